//! Acceptance criteria, one PASS/FAIL line each.

use std::f64::consts::{PI, TAU};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64 as C64;
use num_traits::{Signed, ToPrimitive};
use rand::{Rng, SeedableRng};

use mri_gark::convergence::{run_study, Study};
use mri_gark::field::{lambda_cubic_residual, lambda_rational, rational_to_decimal, Exact, Field};
use mri_gark::gark_expansion::{check_gark_order, expand, FastRK};
use mri_gark::integrator::{step_additive, step_component, InnerSolveConfig};
use mri_gark::order_conditions::{check_all, Arithmetic};
use mri_gark::phi::{phi, phi_recurrence, phi_row, phi_series, KMAX};
use mri_gark::problems::{linear_2d, linear_scalar, Problem};
use mri_gark::stability::{
    base_stability, matrix_stability, scalar_stability, scan_region, spectral_radius, ComplexGrid, CoupledTestProblem,
    RegionScan, ScanMode, MEMBER_TOL,
};
use mri_gark::tableaux::{builtin, builtin_names};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

fn disk_sample(rng: &mut impl Rng, r: f64) -> C64 {
    C64::from_polar(r * rng.gen::<f64>(), TAU * rng.gen::<f64>())
}

fn order_identities() -> Outcome {
    let mut count = 0;
    for name in builtin_names() {
        let m = builtin(name).map_err(|e| e.to_string())?;
        let reports = check_all(&m, m.order, 0.0, Arithmetic::Exact).map_err(|e| e.to_string())?;
        if let Some(bad) = reports.iter().find(|r| !r.pass) {
            return Err(format!("{name}: {} residual {:e}", bad.id, bad.residual));
        }
        if m.order >= 3 {
            let c3 = reports.iter().find(|r| r.id == "coupling3").ok_or(format!("{name}: no coupling3"))?;
            ensure(c3.rhs == 1.0 / 6.0, || format!("{name}: coupling3 rhs {}", c3.rhs))?;
        }
        if m.order >= 4 {
            let rhs: Vec<f64> = reports.iter().filter(|r| r.id.starts_with("coupling4.")).map(|r| r.rhs).collect();
            let want = [1.0 / 8.0, 1.0 / 12.0, 1.0 / 24.0, 1.0 / 24.0, 1.0 / 24.0];
            ensure(rhs == want, || format!("{name}: order-4 rhs {rhs:?}"))?;
        }
        count += reports.len();
    }
    Ok(format!("{count} conditions, all residuals exactly 0"))
}

fn lambda_root() -> Outcome {
    let l = Exact::lambda();
    let field_residual = Exact::int(-1) + Exact::int(9) * l.clone() - Exact::int(18) * l.clone() * l.clone()
        + Exact::int(6) * l.clone() * l.clone() * l;
    ensure(field_residual.is_zero(), || format!("cubic in Q(λ) reduces to {field_residual}"))?;
    let approx = lambda_cubic_residual().abs().to_f64().unwrap_or(f64::INFINITY);
    ensure(approx < 1e-70, || format!("cubic at the stored expansion is {approx:e}"))?;
    let digits = rational_to_decimal(lambda_rational(), 24);
    ensure(digits == "0.435866521508458999416019", || format!("λ = {digits}"))?;
    Ok(format!("exact in Q(λ); stored expansion residual {approx:.1e}; λ = {digits}"))
}

fn gark_oracle() -> Outcome {
    let fasts = [FastRK::<f64>::rk4(), FastRK::<f64>::rule38()];
    let mut trees = 0;
    for name in builtin_names() {
        let m = builtin(name).map_err(|e| e.to_string())?;
        for fast in &fasts {
            let tab = expand(&m, fast).map_err(|e| e.to_string())?;
            let reports = check_gark_order(&tab, m.order, 1e-12).map_err(|e| e.to_string())?;
            if let Some(bad) = reports.iter().find(|r| !r.pass) {
                return Err(format!("{name}/{}: {} residual {:e}", fast.name, bad.id, bad.residual));
            }
            trees += reports.len();
            if m.order < 4 {
                let next = check_gark_order(&tab, m.order + 1, 1e-12).map_err(|e| e.to_string())?;
                ensure(next.iter().any(|r| !r.pass), || {
                    format!("{name}/{}: no order {} tree fails", fast.name, m.order + 1)
                })?;
            }
        }
    }
    Ok(format!("{trees} tree conditions pass; every p < 4 method fails some order p+1 tree"))
}

fn r_emidp(zf: C64, zs: C64) -> C64 {
    let h = zf * 0.5;
    let p1h = phi(1, h);
    phi(0, zf) + (phi(0, h) * 1.5 - 0.5) * p1h * zs + p1h * p1h * zs * zs * 0.5
}

fn r_itrap(zf: C64, zs: C64) -> C64 {
    (phi(0, zf) + (phi(1, zf) - 0.5) * zs) / (1.0 - zs * 0.5)
}

fn stability_closed_forms() -> Outcome {
    let mid = builtin("mri-erk22a").map_err(|e| e.to_string())?;
    let trap = builtin("mri-irk21a").map_err(|e| e.to_string())?;
    let mut rng = rand::rngs::StdRng::seed_from_u64(4);
    let (mut worst, mut worst_rho) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let zf = disk_sample(&mut rng, 20.0);
        let zs = disk_sample(&mut rng, 20.0);
        let e = rel(scalar_stability(&mid, zf, zs).map_err(|e| e.to_string())?, r_emidp(zf, zs));
        let t = rel(scalar_stability(&trap, zf, zs).map_err(|e| e.to_string())?, r_itrap(zf, zs));
        worst = worst.max(e).max(t);

        let p = CoupledTestProblem::new(zf, disk_sample(&mut rng, 1.5), rng.gen());
        let r1 = spectral_radius(&matrix_stability(&trap, &p, 1.0).map_err(|e| e.to_string())?);
        let r5 = spectral_radius(
            &matrix_stability(&trap, &p.with_alpha(C64::new(5.0, 0.0)), 1.0).map_err(|e| e.to_string())?,
        );
        worst_rho = worst_rho.max((r1 - r5).abs() / r1.max(1.0));
    }
    ensure(worst <= 1e-12, || format!("closed-form mismatch {worst:e}"))?;
    ensure(worst_rho <= 1e-12, || format!("α-scaling changes the spectral radius by {worst_rho:e}"))?;
    Ok(format!("max rel diff {worst:.1e}, α-scaling diff {worst_rho:.1e}"))
}

fn integrator_cross_oracle() -> Outcome {
    let inner = InnerSolveConfig::adaptive(1e-12);
    let h = 0.1;
    let mut rng = rand::rngs::StdRng::seed_from_u64(20);
    let samples: Vec<(f64, f64, f64)> =
        (0..20).map(|_| (-rng.gen_range(0.5..50.0), -rng.gen_range(0.05..5.0), rng.gen::<f64>())).collect();
    let mut worst = 0.0f64;
    for name in builtin_names() {
        let m = builtin(name).map_err(|e| e.to_string())?;
        for &(lf, ls, xi) in &samples {
            let sys = linear_scalar(lf, ls);
            let y = step_additive(&m, &sys, 0.0, &[1.0], h, &inner).map_err(|e| e.to_string())?.y_next[0];
            let r = scalar_stability(&m, C64::new(h * lf, 0.0), C64::new(h * ls, 0.0)).map_err(|e| e.to_string())?;
            worst = worst.max((y - r.re).abs());

            let p = CoupledTestProblem::new(C64::new(lf, 0.0), C64::new(ls, 0.0), xi);
            let sys = linear_2d(&p).map_err(|e| e.to_string())?;
            let mm = matrix_stability(&m, &p, h).map_err(|e| e.to_string())?;
            for col in 0..2 {
                let e = [(col == 0) as u8 as f64, (col == 1) as u8 as f64];
                let y = step_component(&m, &sys, 0.0, &e[..1], &e[1..], h, &inner).map_err(|e| e.to_string())?.y_next;
                for row in 0..2 {
                    worst = worst.max((y[row] - mm[row][col].re).abs());
                }
            }
        }
    }
    ensure(worst <= 1e-10, || format!("max deviation {worst:e}"))?;
    Ok(format!("8 methods × 20 samples, max deviation {worst:.1e}"))
}

fn study_orders(problem: &Problem, cases: &[(&str, f64)], study: &Study, band: f64) -> Outcome {
    let mut parts = Vec::new();
    let mut failures = Vec::new();
    for &(name, expect) in cases {
        let m = builtin(name).map_err(|e| e.to_string())?;
        let rep = run_study(&m, problem, study).map_err(|e| e.to_string())?;
        match rep.observed_order {
            Some(q) if !rep.failed() && (q - expect).abs() <= band => parts.push(format!("{name} {q:.2}")),
            q => failures.push(format!("{name} {q:?} (expected {expect} ± {band})")),
        }
    }
    if failures.is_empty() {
        Ok(parts.join(", "))
    } else {
        Err(failures.join("; "))
    }
}

fn kpr_convergence() -> Outcome {
    let problem = Problem::by_name("kpr", &[]).map_err(|e| e.to_string())?;
    let tf = 2.5 * PI;
    let study = Study::new(tf / 16.0, 6, 0.0, tf, InnerSolveConfig::adaptive(1e-10));
    let cases = [
        ("mri-erk33a", 3.0),
        ("mri-erk45a", 4.0),
        ("mri-esdirk34a", 3.0),
        ("mri-esdirk46a", 4.0),
        ("mri-erk22a", 2.0),
        ("mri-irk21a", 2.0),
    ];
    study_orders(&problem, &cases, &study, 0.4)
}

fn gray_scott_convergence() -> Outcome {
    let problem = Problem::by_name("gray-scott", &[]).map_err(|e| e.to_string())?;
    // H0 sits just inside the explicit diffusion limit; a tight inner tolerance
    // keeps the fine levels above the fit floor.
    let study = Study::new(0.004, 5, 0.0, 2.0, InnerSolveConfig::adaptive(1e-13));
    study_orders(&problem, &[("mri-erk33a", 3.0), ("mri-erk45a", 4.0)], &study, 0.5)
}

fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (1..=n)
        .map(|i| {
            let mut x = (PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for j in 2..=n {
                    let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (0.5 * (1.0 + x), 1.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// Composite Gauss–Legendre value of `∫₀¹ e^{z(1−t)} t^{k−1} dt`.
fn phi_quadrature(k: usize, z: C64, rule: &[(f64, f64)]) -> C64 {
    if k == 0 {
        return z.exp();
    }
    let panels = 200;
    let h = 1.0 / panels as f64;
    let mut sum = C64::new(0.0, 0.0);
    for p in 0..panels {
        for &(x, w) in rule {
            let t = (p as f64 + x) * h;
            sum += (z * (1.0 - t)).exp() * t.powi(k as i32 - 1) * (w * h);
        }
    }
    sum
}

fn phi_suite() -> Outcome {
    let mut cross = 0.0f64;
    for j in 0..64 {
        let z = C64::from_polar(1.0, TAU * j as f64 / 64.0);
        for k in 0..=6 {
            cross = cross.max(rel(phi_series(k, z), phi_recurrence(k, z)));
        }
    }
    ensure(cross <= 1e-12, || format!("series/recurrence differ by {cross:e} at |z| = 1"))?;

    let rule = gauss_legendre(16);
    let mut rng = rand::rngs::StdRng::seed_from_u64(8);
    let mut quad = 0.0f64;
    for _ in 0..50 {
        let z = disk_sample(&mut rng, 50.0);
        let row = phi_row(6, z);
        for (k, v) in row.iter().enumerate() {
            quad = quad.max(rel(*v, phi_quadrature(k, z, &rule)));
        }
    }
    ensure(quad <= 1e-12, || format!("quadrature mismatch {quad:e}"))?;

    let zero = C64::new(0.0, 0.0);
    for k in 1..=KMAX {
        ensure(phi_series(k, zero) == C64::new(1.0 / k as f64, 0.0), || format!("φ_{k}(0) is not 1/{k}"))?;
    }
    Ok(format!("crossover {cross:.1e}, quadrature {quad:.1e}, φ_k(0) = 1/k exact"))
}

fn region_scans() -> Outcome {
    let grid = ComplexGrid { re_min: -6.0, re_max: 2.0, im_min: -5.0, im_max: 5.0, n_re: 57, n_im: 71 };
    let points = grid.points();
    let origin = points.iter().position(|z| z.norm() < 1e-12).ok_or("grid misses the origin")?;
    let scan = |name: &str, mode, rho, alpha, xi| -> Result<RegionScan, String> {
        let m = builtin(name).map_err(|e| e.to_string())?;
        scan_region(&m, RegionScan::new(name, mode, rho, alpha, xi, grid)).map_err(|e| e.to_string())
    };

    for name in builtin_names() {
        for &alpha in &[10.0, 45.0, 80.0] {
            let s = scan(name, ScanMode::Scalar, f64::INFINITY, alpha, 0.0)?;
            ensure(s.membership[origin], || format!("{name} scalar α={alpha}: z^s = 0 not a member"))?;
        }
    }

    for name in ["mri-erk22a", "mri-irk21a"] {
        let scans: Vec<RegionScan> = [10.0, 45.0, 80.0]
            .iter()
            .map(|&a| scan(name, ScanMode::Scalar, f64::INFINITY, a, 0.0))
            .collect::<Result<_, _>>()?;
        for w in scans.windows(2) {
            let (narrow, wide) = (&w[0], &w[1]);
            let escaped = wide.membership.iter().zip(&narrow.membership).filter(|(&a, &b)| a && !b).count();
            ensure(escaped == 0, || {
                format!("{name}: {escaped} points stable at α={} but not at α={}", wide.alpha_deg, narrow.alpha_deg)
            })?;
        }
    }

    let (nr, ni) = (grid.n_re, grid.n_im);
    let mut interior_mismatch = 0;
    let mut edge_mismatch = 0;
    for name in builtin_names() {
        let m = builtin(name).map_err(|e| e.to_string())?;
        let s = scan(name, ScanMode::Matrix, 10.0, 45.0, 0.0)?;
        ensure(s.membership[origin], || format!("{name} matrix ξ=0: z^s = 0 not a member"))?;
        let base: Vec<bool> = points
            .iter()
            .map(|&z| base_stability(&m, z).map(|r| r.norm() <= 1.0 + MEMBER_TOL).unwrap_or(false))
            .collect();
        for k in 0..points.len() {
            if base[k] == s.membership[k] {
                continue;
            }
            let (i, j) = (k % nr, k / nr);
            let near_edge = [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)].iter().any(|&(di, dj)| {
                let (a, b) = (i as i64 + di, j as i64 + dj);
                (0..nr as i64).contains(&a)
                    && (0..ni as i64).contains(&b)
                    && base[(b as usize) * nr + a as usize] != base[k]
            });
            if near_edge {
                edge_mismatch += 1;
            } else {
                interior_mismatch += 1;
            }
        }
    }
    ensure(interior_mismatch == 0, || {
        format!("{interior_mismatch} ξ=0 points differ from the base region away from its boundary")
    })?;
    Ok(format!("origin stable, α-nesting holds, ξ=0 matches base ({edge_mismatch} boundary-adjacent differences)"))
}

fn main() -> ExitCode {
    let criteria: [(&str, Duration, fn() -> Outcome); 9] = [
        ("order-condition identities", Duration::from_secs(1), order_identities),
        ("ESDIRK34a diagonal root", Duration::from_secs(1), lambda_root),
        ("GARK expansion oracle", Duration::from_secs(10), gark_oracle),
        ("stability closed forms", Duration::from_secs(1), stability_closed_forms),
        ("integrator/stability cross-oracle", Duration::from_secs(30), integrator_cross_oracle),
        ("KPR convergence", Duration::from_secs(300), kpr_convergence),
        ("Gray-Scott convergence", Duration::from_secs(600), gray_scott_convergence),
        ("phi-function suite", Duration::from_secs(1), phi_suite),
        ("region-scan sanity", Duration::from_secs(120), region_scans),
    ];
    let mut failed = 0;
    for (k, (label, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut outcome = check();
        let elapsed = start.elapsed();
        if outcome.is_ok() && elapsed > *budget {
            outcome = Err(format!("took {elapsed:.1?}, budget {budget:?}"));
        }
        match outcome {
            Ok(detail) => println!("PASS {} {label} [{elapsed:.2?}]: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {label} [{elapsed:.2?}]: {detail}", k + 1);
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
