//! Simplified Newton for implicit slow stages `Y = R + hγ f(Y)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

use super::rms;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonConfig {
    pub max_iter: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Contraction rate above which the Jacobian is refreshed.
    pub refresh_rate: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig { max_iter: 50, rel_tol: 1e-10, abs_tol: 1e-12, refresh_rate: 0.5 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct NewtonStats {
    pub iterations: usize,
    pub f_evals: usize,
    pub jac_evals: usize,
}

/// Forward-difference Jacobian with increments `√ε · max(1, |yⱼ|)`.
pub fn fd_jacobian(f: &mut dyn FnMut(&[f64]) -> Result<Vec<f64>>, y: &[f64], f0: &[f64]) -> Result<DMatrix<f64>> {
    let n = y.len();
    let mut jac = DMatrix::zeros(f0.len(), n);
    let mut yp = y.to_vec();
    for j in 0..n {
        let dy = f64::EPSILON.sqrt() * y[j].abs().max(1.0);
        yp[j] = y[j] + dy;
        let fp = f(&yp)?;
        for i in 0..f0.len() {
            jac[(i, j)] = (fp[i] - f0[i]) / dy;
        }
        yp[j] = y[j];
    }
    Ok(jac)
}

type Rhs<'a> = dyn FnMut(&[f64]) -> Result<Vec<f64>> + 'a;
type Jac<'a> = dyn FnMut(&[f64]) -> Option<DMatrix<f64>> + 'a;

fn iteration_matrix(
    f: &mut Rhs<'_>,
    jac: &mut Jac<'_>,
    y: &[f64],
    fy: &[f64],
    hg: f64,
    st: &mut NewtonStats,
) -> Result<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>> {
    let n = y.len();
    let j = match jac(y) {
        Some(j) => j,
        None => {
            st.f_evals += n;
            fd_jacobian(f, y, fy)?
        }
    };
    st.jac_evals += 1;
    Ok((DMatrix::identity(n, n) - j * hg).lu())
}

/// Solve `Y − R − hγ f(Y) = 0` from the guess `y0`; returns `Y` and `f(Y)`.
///
/// `jac` returns `∂f/∂Y` at a point, or `None` to fall back to forward
/// differences. Converged when the next correction satisfies
/// `‖ΔY‖ ≤ max(abs_tol, rel_tol‖Y‖)` in the RMS norm; that last correction is
/// still applied but not counted as an iteration.
pub fn solve_implicit_slow_stage(
    f: &mut Rhs<'_>,
    jac: &mut Jac<'_>,
    r: &[f64],
    hg: f64,
    y0: &[f64],
    cfg: &NewtonConfig,
) -> Result<(Vec<f64>, Vec<f64>, NewtonStats)> {
    let n = y0.len();
    let mut st = NewtonStats::default();
    let mut y = y0.to_vec();
    let mut fy = f(&y)?;
    st.f_evals += 1;
    let mut lu = iteration_matrix(f, jac, &y, &fy, hg, &mut st)?;
    let mut fresh = true;
    let correction = |lu: &nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>, y: &[f64], fy: &[f64]| {
        let g = DVector::from_fn(n, |i, _| r[i] + hg * fy[i] - y[i]);
        lu.solve(&g).map(|d| d.as_slice().to_vec())
    };
    let singular = |it| Error::NewtonFailure { iterations: it, residual: f64::NAN };
    let mut dy = correction(&lu, &y, &fy).ok_or(singular(0))?;
    loop {
        let norm = rms(&dy);
        if !norm.is_finite() {
            return Err(Error::NewtonFailure { iterations: st.iterations, residual: norm });
        }
        if norm <= cfg.abs_tol.max(cfg.rel_tol * rms(&y)) {
            for i in 0..n {
                y[i] += dy[i];
            }
            fy = f(&y)?;
            st.f_evals += 1;
            return Ok((y, fy, st));
        }
        if st.iterations == cfg.max_iter {
            return Err(Error::NewtonFailure { iterations: st.iterations, residual: norm });
        }
        st.iterations += 1;
        for i in 0..n {
            y[i] += dy[i];
        }
        fy = f(&y)?;
        st.f_evals += 1;
        dy = correction(&lu, &y, &fy).ok_or(singular(st.iterations))?;
        let rate = rms(&dy) / norm;
        if rate > cfg.refresh_rate && !fresh {
            lu = iteration_matrix(f, jac, &y, &fy, hg, &mut st)?;
            dy = correction(&lu, &y, &fy).ok_or(singular(st.iterations))?;
            fresh = true;
        } else {
            fresh = false;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_problem_takes_one_correction() {
        // Y = 1 + 0.5·(−3Y + 2)  ⇒  Y = 4/5.
        let mut f = |y: &[f64]| Ok(vec![-3.0 * y[0] + 2.0]);
        let mut jac = |_y: &[f64]| Some(DMatrix::from_element(1, 1, -3.0));
        let (y, _, st) =
            solve_implicit_slow_stage(&mut f, &mut jac, &[1.0], 0.5, &[0.0], &NewtonConfig::default()).unwrap();
        assert!((y[0] - 0.8).abs() < 1e-15);
        assert_eq!(st.iterations, 1);
        assert_eq!(st.jac_evals, 1);
    }

    #[test]
    fn cubic_with_finite_differences() {
        // Y = 1 + 0.1 Y³.
        let mut f = |y: &[f64]| Ok(vec![y[0].powi(3)]);
        let mut jac = |_y: &[f64]| None;
        let (y, _, st) =
            solve_implicit_slow_stage(&mut f, &mut jac, &[1.0], 0.1, &[1.0], &NewtonConfig::default()).unwrap();
        // The Jacobian frozen at the guess contracts at about 0.4 per iteration.
        assert!((y[0] - 1.0 - 0.1 * y[0].powi(3)).abs() < 1e-10, "{y:?} {st:?}");
        assert!(st.iterations < 30, "{st:?}");
        assert!(st.jac_evals >= 1);
    }

    #[test]
    fn fd_jacobian_matches_analytic() {
        let mut f = |y: &[f64]| Ok(vec![y[0] * y[1], y[0].sin()]);
        let y = [0.3, -2.0];
        let f0 = f(&y).unwrap();
        let j = fd_jacobian(&mut f, &y, &f0).unwrap();
        let ex = [[-2.0, 0.3], [0.3f64.cos(), 0.0]];
        for a in 0..2 {
            for b in 0..2 {
                assert!((j[(a, b)] - ex[a][b]).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn divergence_is_reported() {
        // Y = 10(Y² + 1) has no real root.
        let mut f = |y: &[f64]| Ok(vec![y[0] * y[0] + 1.0]);
        let mut jac = |y: &[f64]| Some(DMatrix::from_element(1, 1, 2.0 * y[0]));
        let cfg = NewtonConfig { max_iter: 20, ..Default::default() };
        let r = solve_implicit_slow_stage(&mut f, &mut jac, &[0.0], 10.0, &[0.0], &cfg);
        assert!(matches!(r, Err(Error::NewtonFailure { .. })));
    }
}
