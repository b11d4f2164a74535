//! φ-function values along a ray: `cargo run --example phi_functions -- [re] [im] [kmax]`.

use mri_gark::phi::{phi_recurrence, phi_row, phi_series};
use num_complex::Complex64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let re: f64 = args.first().map_or(Ok(-2.0), |v| v.parse())?;
    let im: f64 = args.get(1).map_or(Ok(1.0), |v| v.parse())?;
    let kmax: usize = args.get(2).map_or(Ok(4), |v| v.parse())?;

    println!("k,scale,re,im,series_minus_recurrence");
    for scale in [0.0, 0.25, 1.0, 4.0, 16.0] {
        let z = Complex64::new(re, im) * scale;
        for (k, v) in phi_row(kmax, z).iter().enumerate() {
            // The two raw paths only agree where neither is ill-conditioned.
            let gap = if z.norm() > 0.0 { (phi_series(k, z) - phi_recurrence(k, z)).norm() } else { 0.0 };
            println!("{k},{scale},{:.16e},{:.16e},{gap:.2e}", v.re, v.im);
        }
    }
    Ok(())
}
