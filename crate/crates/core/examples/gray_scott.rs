//! Gray–Scott on a periodic grid: `cargo run --release --example gray_scott -- [method] [H] [tf] [n]`.
//!
//! Prints the final mean of `u` and `v`, the last embedded error estimate and step statistics.

use mri_gark::integrator::{integrate, InnerSolveConfig, Record, System};
use mri_gark::problems::{GrayScott, GrayScottParams};
use mri_gark::tableaux::builtin;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let method = builtin(args.first().map_or("mri-erk45a", String::as_str))?;
    let h: f64 = args.get(1).map_or(Ok(0.004), |v| v.parse())?;
    let tf: f64 = args.get(2).map_or(Ok(2.0), |v| v.parse())?;
    let n: usize = args.get(3).map_or(Ok(32), |v| v.parse())?;

    let gs = GrayScott::new(GrayScottParams { n, ..Default::default() })?;
    let y0 = gs.initial_state();
    let started = std::time::Instant::now();
    let tr = integrate(&method, System::Additive(&gs), 0.0, tf, &y0, h, &InnerSolveConfig::default(), Record::Final)?;
    let y = tr.final_state();
    let m = gs.cells();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    println!("{} H={h} tf={tf} n={n}", method.name);
    println!("mean u = {:.12}, mean v = {:.12}", mean(&y[..m]), mean(&y[m..]));
    println!("finite: {}", y.iter().all(|v| v.is_finite()));
    if let Some(e) = tr.error_estimates.last() {
        println!("last embedded estimate = {e:.3e}");
    }
    println!("{}", tr.stats_json()?);
    eprintln!("elapsed {:.1?}", started.elapsed());
    Ok(())
}
