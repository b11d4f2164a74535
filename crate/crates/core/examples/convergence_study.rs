//! Convergence study: `cargo run --release --example convergence_study -- [method] [problem] [H0] [levels] [inner_tol]`.

use mri_gark::convergence::{run_study, Study};
use mri_gark::integrator::InnerSolveConfig;
use mri_gark::problems::Problem;
use mri_gark::tableaux::builtin;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let method = args.first().map_or("mri-erk33a", String::as_str);
    let problem = Problem::by_name(args.get(1).map_or("kpr", String::as_str), &[])?;
    let (t0, tf) = problem.default_interval();
    let h0 = match args.get(2) {
        Some(v) => v.parse()?,
        None => (tf - t0) / 16.0,
    };
    let levels = args.get(3).map_or(Ok(6), |v| v.parse())?;
    let tol = args.get(4).map_or(Ok(1e-10), |v| v.parse())?;

    let m = builtin(method)?;
    let started = std::time::Instant::now();
    let report = run_study(&m, &problem, &Study::new(h0, levels, t0, tf, InnerSolveConfig::adaptive(tol)))?;
    print!("{}", report.to_csv());
    match report.observed_order {
        Some(p) => println!("{method} on {}: observed order {p:.3} (declared {})", report.problem, m.order),
        None => println!("{method} on {}: too few rows above the error floor", report.problem),
    }
    eprintln!("elapsed {:.1?}", started.elapsed());
    Ok(())
}
