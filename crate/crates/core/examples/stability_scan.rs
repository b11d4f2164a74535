//! Slow stability region as ASCII art.
//! `cargo run --release --example stability_scan -- [method] [scalar|matrix] [rho] [alpha] [xi]`

use mri_gark::stability::{scan_region, ComplexGrid, RegionScan, ScanMode};
use mri_gark::tableaux::builtin;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let method = args.first().map_or("mri-erk33a", String::as_str);
    let mode: ScanMode = args.get(1).map_or("scalar", String::as_str).parse()?;
    let rho = match args.get(2).map(String::as_str) {
        None | Some("inf") => f64::INFINITY,
        Some(v) => v.parse()?,
    };
    let alpha: f64 = args.get(3).map_or(Ok(10.0), |v| v.parse())?;
    let xi: f64 = args.get(4).map_or(Ok(0.0), |v| v.parse())?;

    let grid = ComplexGrid { re_min: -6.0, re_max: 2.0, im_min: -4.0, im_max: 4.0, n_re: 65, n_im: 33 };
    let scan = scan_region(&builtin(method)?, RegionScan::new(method, mode, rho, alpha, xi, grid))?;
    println!(
        "{method} {mode:?} rho={rho} alpha={alpha} xi={xi}: {} of {} points stable",
        scan.member_count(),
        scan.values.len()
    );
    // Top row is the largest imaginary part.
    for row in scan.membership.chunks(grid.n_re).rev() {
        println!("{}", row.iter().map(|&m| if m { '#' } else { '.' }).collect::<String>());
    }
    Ok(())
}
