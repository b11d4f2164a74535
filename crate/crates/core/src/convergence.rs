//! Fixed-step convergence studies and observed-order fits.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrator::{dopri5, integrate, rms, InnerSolveConfig, Record, StepStats, System};
use crate::problems::Problem;
use crate::tableaux::MriGarkMethod;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub h: f64,
    pub steps: usize,
    /// RMS error at `tf`; `None` when the integration failed.
    pub error: Option<f64>,
    /// `log₂(e_prev / e)` against the previous row.
    pub rate: Option<f64>,
    /// Error within 100× the inner tolerance.
    pub floor_limited: bool,
    pub in_fit: bool,
    pub stats: StepStats,
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub method: String,
    pub problem: String,
    pub inner: InnerSolveConfig,
    pub t0: f64,
    pub tf: f64,
    pub reference: String,
    pub rows: Vec<ConvergenceRow>,
    pub observed_order: Option<f64>,
}

impl ConvergenceReport {
    pub fn failed(&self) -> bool {
        self.rows.iter().any(|r| r.failure.is_some())
    }

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
        let mut out = String::from("h,steps,error,rate,floor_limited,in_fit\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{:.16e},{},{},{},{},{}\n",
                r.h,
                r.steps,
                opt(r.error),
                opt(r.rate),
                r.floor_limited as u8,
                r.in_fit as u8
            ));
        }
        out
    }
}

/// Least-squares slope of `log e` against `log h`.
pub fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    slope.is_finite().then_some(slope)
}

/// Mark fit rows (error above `100 · floor`, coarsest level excluded) and fit the order.
pub fn fit_order(rows: &mut [ConvergenceRow], floor: f64) -> Option<f64> {
    for (k, r) in rows.iter_mut().enumerate() {
        r.floor_limited = r.error.is_some_and(|e| e <= 100.0 * floor);
        r.in_fit = k > 0 && r.error.is_some_and(|e| e > 100.0 * floor && e.is_finite());
    }
    let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.in_fit).map(|r| (r.h, r.error.unwrap())).collect();
    fit_slope(&pts)
}

/// Solve `y' = f^f + f^s` as one system with DOPRI5 at tolerance `tol`.
pub fn monolithic_solution(sys: System<'_>, t0: f64, tf: f64, y0: &[f64], tol: f64) -> Result<Vec<f64>> {
    let mut rhs = |theta: f64, y: &[f64]| -> Result<Vec<f64>> {
        let t = t0 + theta;
        match sys {
            System::Additive(s) => {
                let mut f = s.f_fast(t, y)?;
                for (a, b) in f.iter_mut().zip(s.f_slow(t, y)?) {
                    *a += b;
                }
                Ok(f)
            }
            System::Component(s) => {
                let nf = s.dims().0;
                let (yf, ys) = y.split_at(nf);
                let mut f = s.f_fast(t, yf, ys)?;
                f.extend(s.f_slow(t, yf, ys)?);
                Ok(f)
            }
        }
    };
    Ok(dopri5(&mut rhs, y0, tf - t0, tol, tol, 100_000_000)?.0)
}

/// Study parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Study {
    pub h0: f64,
    pub levels: usize,
    pub t0: f64,
    pub tf: f64,
    pub inner: InnerSolveConfig,
    /// Tolerance of the monolithic reference when no exact solution exists.
    pub reference_tol: f64,
}

impl Study {
    pub fn new(h0: f64, levels: usize, t0: f64, tf: f64, inner: InnerSolveConfig) -> Self {
        Study { h0, levels, t0, tf, inner, reference_tol: 1e-12 }
    }
}

/// Run `levels` integrations at `h0, h0/2, …` and compare against the exact
/// solution or a monolithic reference. Failed levels are reported per row.
pub fn run_study(method: &MriGarkMethod, problem: &Problem, study: &Study) -> Result<ConvergenceReport> {
    if study.levels < 3 {
        return Err(Error::InvalidArgument(format!(
            "a convergence study needs at least 3 levels, got {}",
            study.levels
        )));
    }
    if !(study.h0 > 0.0) || !(study.tf > study.t0) {
        return Err(Error::InvalidArgument(format!(
            "invalid grid: H0 = {}, interval [{}, {}]",
            study.h0, study.t0, study.tf
        )));
    }
    study.inner.validate()?;
    let y0 = problem.initial_state();
    let exact_from_zero = study.t0 == 0.0;
    let (reference, label) = match problem.exact(study.tf).filter(|_| exact_from_zero) {
        Some(e) => (e, "exact".to_string()),
        None => {
            let r = monolithic_solution(problem.system(), study.t0, study.tf, &y0, study.reference_tol)?;
            (r, format!("dopri5 tol {:e}", study.reference_tol))
        }
    };
    let hs: Vec<f64> = (0..study.levels).map(|k| study.h0 / f64::powi(2.0, k as i32)).collect();
    let mut rows: Vec<ConvergenceRow> = hs
        .par_iter()
        .map(|&h| {
            let steps = crate::integrator::step_count(study.t0, study.tf, h).unwrap_or(0);
            let run = integrate(method, problem.system(), study.t0, study.tf, &y0, h, &study.inner, Record::Final);
            match run {
                Ok(tr) => {
                    let diff: Vec<f64> = tr.final_state().iter().zip(&reference).map(|(a, b)| a - b).collect();
                    ConvergenceRow {
                        h,
                        steps,
                        error: Some(rms(&diff)),
                        rate: None,
                        floor_limited: false,
                        in_fit: false,
                        stats: tr.stats,
                        failure: None,
                    }
                }
                Err(e) => ConvergenceRow {
                    h,
                    steps,
                    error: None,
                    rate: None,
                    floor_limited: false,
                    in_fit: false,
                    stats: StepStats::default(),
                    failure: Some(e.to_string()),
                },
            }
        })
        .collect();
    for k in 1..rows.len() {
        if let (Some(a), Some(b)) = (rows[k - 1].error, rows[k].error) {
            rows[k].rate = Some((a / b).log2());
        }
    }
    let floor = study.inner.rel_tol.max(study.inner.abs_tol);
    let observed_order = fit_order(&mut rows, floor);
    Ok(ConvergenceReport {
        method: method.name.clone(),
        problem: problem.name().to_string(),
        inner: study.inner,
        t0: study.t0,
        tf: study.tf,
        reference: label,
        rows,
        observed_order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tableaux::builtin;

    fn row(h: f64, e: f64) -> ConvergenceRow {
        ConvergenceRow {
            h,
            steps: 0,
            error: Some(e),
            rate: None,
            floor_limited: false,
            in_fit: false,
            stats: StepStats::default(),
            failure: None,
        }
    }

    #[test]
    fn slope_of_exact_power_law() {
        let pts: Vec<(f64, f64)> = (0..5)
            .map(|k| {
                let h = 0.1 / 2f64.powi(k);
                (h, 3.0 * h.powi(3))
            })
            .collect();
        assert!((fit_slope(&pts).unwrap() - 3.0).abs() < 1e-12);
        assert!(fit_slope(&pts[..1]).is_none());
    }

    #[test]
    fn fit_skips_coarsest_and_floor_rows() {
        let mut rows = vec![row(0.8, 1.0), row(0.4, 1e-2), row(0.2, 1.25e-3), row(0.1, 1.5625e-4), row(0.05, 1e-9)];
        let p = fit_order(&mut rows, 1e-10).unwrap();
        assert!((p - 3.0).abs() < 1e-12);
        assert!(!rows[0].in_fit && rows[1].in_fit && !rows[4].in_fit);
        assert!(rows[4].floor_limited);
    }

    #[test]
    fn linear_scalar_study_hits_method_order() {
        let m = builtin("mri-erk33a").unwrap();
        let p = Problem::by_name("linear-scalar", &[]).unwrap();
        let study = Study::new(0.1, 4, 0.0, 1.0, InnerSolveConfig::adaptive(1e-12));
        let rep = run_study(&m, &p, &study).unwrap();
        assert_eq!(rep.reference, "exact");
        let q = rep.observed_order.unwrap();
        assert!((q - 3.0).abs() < 0.3, "{q}");
        assert!(rep.to_csv().starts_with("h,steps,error,rate,floor_limited,in_fit\n1.0000000000000001e-1,10,"));
    }

    #[test]
    fn base_exact_case_is_floor_limited() {
        // λf = λs = 0: every method is exact.
        let m = builtin("mri-erk22a").unwrap();
        let p = Problem::by_name("linear-scalar", &[("lambda_f".into(), 0.0), ("lambda_s".into(), 0.0)]).unwrap();
        let rep = run_study(&m, &p, &Study::new(0.25, 3, 0.0, 1.0, InnerSolveConfig::default())).unwrap();
        assert!(rep.rows.iter().all(|r| r.floor_limited));
        assert!(rep.observed_order.is_none());
    }

    #[test]
    fn monolithic_matches_exact_flow() {
        let p = Problem::by_name("linear-2d", &[]).unwrap();
        let y = monolithic_solution(p.system(), 0.0, 1.0, &p.initial_state(), 1e-12).unwrap();
        let e = p.exact(1.0).unwrap();
        assert!(rms(&[y[0] - e[0], y[1] - e[1]]) < 1e-10);
    }

    #[test]
    fn bad_studies() {
        let m = builtin("mri-erk22a").unwrap();
        let p = Problem::by_name("kpr", &[]).unwrap();
        assert!(run_study(&m, &p, &Study::new(0.1, 2, 0.0, 1.0, InnerSolveConfig::default())).is_err());
        assert!(run_study(&m, &p, &Study::new(-0.1, 3, 0.0, 1.0, InnerSolveConfig::default())).is_err());
    }

    #[test]
    fn failures_become_rows() {
        // A large step drives the KPR state negative.
        let m = builtin("mri-erk22a").unwrap();
        let p = Problem::by_name("kpr", &[("lambda_s".into(), -60.0)]).unwrap();
        let rep = run_study(&m, &p, &Study::new(2.0, 3, 0.0, 8.0, InnerSolveConfig::default())).unwrap();
        assert!(rep.failed(), "{:?}", rep.rows);
        assert!(rep.rows.iter().any(|r| r.failure.is_some() && r.error.is_none()));
    }
}
