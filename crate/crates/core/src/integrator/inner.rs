//! Solvers for the modified fast ODE on `θ ∈ [0, H]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gark_expansion::FastRK;

/// Right-hand side `v' = g(θ, v)` of an inner problem.
pub type InnerRhs<'a> = dyn FnMut(f64, &[f64]) -> Result<Vec<f64>> + 'a;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InnerMode {
    Adaptive,
    Fixed,
}

/// How each modified fast ODE is resolved.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InnerSolveConfig {
    pub mode: InnerMode,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Fixed mode: substeps per stage.
    pub substeps: usize,
    /// Fixed mode: order of the explicit substep method, 1 to 4.
    pub order: usize,
    /// Adaptive mode: step budget per inner solve.
    pub max_steps: usize,
}

impl Default for InnerSolveConfig {
    fn default() -> Self {
        InnerSolveConfig {
            mode: InnerMode::Adaptive,
            rel_tol: 1e-10,
            abs_tol: 1e-10,
            substeps: 10,
            order: 4,
            max_steps: 1_000_000,
        }
    }
}

impl InnerSolveConfig {
    pub fn adaptive(tol: f64) -> Self {
        InnerSolveConfig { rel_tol: tol, abs_tol: tol, ..Default::default() }
    }

    pub fn fixed(substeps: usize, order: usize) -> Self {
        InnerSolveConfig { mode: InnerMode::Fixed, substeps, order, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        match self.mode {
            InnerMode::Adaptive => {
                if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
                    return Err(Error::InvalidArgument("inner tolerances must be positive".into()));
                }
            }
            InnerMode::Fixed => {
                if self.substeps == 0 || !(1..=4).contains(&self.order) {
                    return Err(Error::InvalidArgument(format!(
                        "fixed inner mode needs substeps >= 1 and order in 1..=4 (got {}, {})",
                        self.substeps, self.order
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct InnerStats {
    pub evals: usize,
    pub steps: usize,
    pub rejected: usize,
}

/// Integrate `v' = g(θ, v)` from `θ = 0` to `θ = h`.
pub fn solve_inner(g: &mut InnerRhs<'_>, v0: &[f64], h: f64, cfg: &InnerSolveConfig) -> Result<(Vec<f64>, InnerStats)> {
    match cfg.mode {
        InnerMode::Adaptive => dopri5(g, v0, h, cfg.rel_tol, cfg.abs_tol, cfg.max_steps),
        InnerMode::Fixed => {
            let rk = match cfg.order {
                1 => FastRK::euler(),
                2 => FastRK::midpoint(),
                3 => FastRK::kutta3(),
                4 => FastRK::rk4(),
                q => return Err(Error::InvalidArgument(format!("no fixed inner method of order {q}"))),
            };
            fixed_rk(g, v0, h, cfg.substeps, &rk)
        }
    }
}

/// `M` equal steps of an explicit Runge–Kutta method.
pub fn fixed_rk(
    g: &mut InnerRhs<'_>,
    v0: &[f64],
    h: f64,
    substeps: usize,
    rk: &FastRK<f64>,
) -> Result<(Vec<f64>, InnerStats)> {
    let n = v0.len();
    let s = rk.stages();
    let dt = h / substeps as f64;
    let mut v = v0.to_vec();
    let mut stats = InnerStats::default();
    let mut k: Vec<Vec<f64>> = Vec::with_capacity(s);
    for m in 0..substeps {
        let t = m as f64 * dt;
        k.clear();
        for i in 0..s {
            let mut arg = v.clone();
            for (j, kj) in k.iter().enumerate() {
                let a = rk.a[i][j];
                if a != 0.0 {
                    for (x, y) in arg.iter_mut().zip(kj) {
                        *x += dt * a * y;
                    }
                }
            }
            k.push(g(t + rk.c[i] * dt, &arg)?);
            stats.evals += 1;
        }
        for (i, ki) in k.iter().enumerate() {
            let b = rk.b[i];
            for l in 0..n {
                v[l] += dt * b * ki[l];
            }
        }
        stats.steps += 1;
    }
    Ok((v, stats))
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Difference between the fifth- and fourth-order weights.
const E: [f64; 7] =
    [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];

fn scaled_norm(v: &[f64], y0: &[f64], y1: &[f64], rtol: f64, atol: f64) -> f64 {
    let n = v.len().max(1);
    let sum: f64 = (0..v.len())
        .map(|i| {
            let sc = atol + rtol * y0[i].abs().max(y1[i].abs());
            (v[i] / sc).powi(2)
        })
        .sum();
    (sum / n as f64).sqrt()
}

/// Dormand–Prince 5(4) with FSAL and a standard step-size controller.
pub fn dopri5(
    g: &mut InnerRhs<'_>,
    v0: &[f64],
    span: f64,
    rtol: f64,
    atol: f64,
    max_steps: usize,
) -> Result<(Vec<f64>, InnerStats)> {
    let n = v0.len();
    let mut stats = InnerStats::default();
    if span == 0.0 || n == 0 {
        return Ok((v0.to_vec(), stats));
    }
    let mut y = v0.to_vec();
    let mut t = 0.0;
    let mut f0 = g(0.0, &y)?;
    stats.evals += 1;

    // Initial step guess.
    let mut h = {
        let d0 = scaled_norm(&y, &y, &y, rtol, atol);
        let d1 = scaled_norm(&f0, &y, &y, rtol, atol);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span } else { (0.01 * d0 / d1).min(span) };
        let y1: Vec<f64> = (0..n).map(|i| y[i] + h0 * f0[i]).collect();
        let f1 = g(h0, &y1)?;
        stats.evals += 1;
        let diff: Vec<f64> = (0..n).map(|i| f1[i] - f0[i]).collect();
        let d2 = scaled_norm(&diff, &y, &y, rtol, atol) / h0;
        if d1.max(d2) <= 1e-15 {
            span
        } else {
            (100.0 * h0).min((0.01 / d1.max(d2)).powf(0.2)).min(span)
        }
    };

    let mut k = vec![vec![0.0; n]; 7];
    let mut reject_last = false;
    let mut ytmp = vec![0.0; n];
    while t < span {
        if stats.steps + stats.rejected >= max_steps {
            return Err(Error::InnerSolver(format!("dopri5 exceeded {max_steps} steps")));
        }
        if h < 1e-14 * span {
            return Err(Error::InnerSolver(format!("dopri5 step size underflow at θ = {t:e}")));
        }
        let last = t + h >= span * (1.0 - 1e-14);
        if last {
            h = span - t;
        }
        k[0].copy_from_slice(&f0);
        for i in 1..7 {
            for l in 0..n {
                let mut acc = 0.0;
                for j in 0..i {
                    acc += A[i][j] * k[j][l];
                }
                ytmp[l] = y[l] + h * acc;
            }
            k[i] = g(t + C[i] * h, &ytmp)?;
            stats.evals += 1;
        }
        // ytmp now holds the fifth-order solution (row 7 equals the weights).
        let err_vec: Vec<f64> = (0..n).map(|l| h * (0..7).map(|j| E[j] * k[j][l]).sum::<f64>()).collect();
        let err = scaled_norm(&err_vec, &y, &ytmp, rtol, atol);
        if err <= 1.0 {
            stats.steps += 1;
            t = if last { span } else { t + h };
            y.copy_from_slice(&ytmp);
            f0.copy_from_slice(&k[6]);
            let mut fac = if err == 0.0 { 10.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 10.0) };
            if reject_last {
                fac = fac.min(1.0);
            }
            reject_last = false;
            h *= fac;
        } else {
            stats.rejected += 1;
            reject_last = true;
            h *= (0.9 * err.powf(-0.2)).max(0.2);
        }
    }
    Ok((y, stats))
}
