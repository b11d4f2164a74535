//! One KPR integration against the exact solution.
//! `cargo run --release --example kpr -- [method] [H] [inner_tol]`

use std::f64::consts::PI;

use mri_gark::integrator::{integrate, InnerSolveConfig, Record};
use mri_gark::problems::Problem;
use mri_gark::tableaux::builtin;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let m = builtin(args.first().map_or("mri-esdirk34a", String::as_str))?;
    let h: f64 = args.get(1).map_or(Ok(PI / 100.0), |v| v.parse())?;
    let tol: f64 = args.get(2).map_or(Ok(1e-10), |v| v.parse())?;

    let p = Problem::by_name("kpr", &[])?;
    let (t0, tf) = p.default_interval();
    let tr = integrate(&m, p.system(), t0, tf, &p.initial_state(), h, &InnerSolveConfig::adaptive(tol), Record::All)?;
    let stride = (tr.times.len() / 10).max(1);
    println!("t,y_f,y_s,err_f,err_s");
    for (t, y) in tr.times.iter().zip(&tr.states).step_by(stride) {
        let e = p.exact(*t).expect("kpr has an exact solution");
        println!("{t:.4},{:.10},{:.10},{:.2e},{:.2e}", y[0], y[1], y[0] - e[0], y[1] - e[1]);
    }
    println!("{}", tr.stats_json()?);
    Ok(())
}
