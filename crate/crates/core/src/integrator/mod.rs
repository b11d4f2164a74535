//! One-step MRI-GARK maps for additive and component-partitioned systems, and a
//! fixed-step driver.

mod inner;
mod newton;

use std::io::Write;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::tableaux::{MriGarkMethod, NumericMethod};

pub use inner::{dopri5, fixed_rk, solve_inner, InnerMode, InnerRhs, InnerSolveConfig, InnerStats};
pub use newton::{fd_jacobian, solve_implicit_slow_stage, NewtonConfig, NewtonStats};

/// `y' = f^f(t, y) + f^s(t, y)`.
pub trait AdditiveSystem: Sync {
    fn dim(&self) -> usize;
    fn f_fast(&self, t: f64, y: &[f64]) -> Result<Vec<f64>>;
    fn f_slow(&self, t: f64, y: &[f64]) -> Result<Vec<f64>>;
    fn jac_slow(&self, _t: f64, _y: &[f64]) -> Option<DMatrix<f64>> {
        None
    }
}

/// `y_f' = f^f(t, y_f, y_s)`, `y_s' = f^s(t, y_f, y_s)`.
pub trait ComponentSystem: Sync {
    /// `(n_f, n_s)`.
    fn dims(&self) -> (usize, usize);
    fn f_fast(&self, t: f64, yf: &[f64], ys: &[f64]) -> Result<Vec<f64>>;
    fn f_slow(&self, t: f64, yf: &[f64], ys: &[f64]) -> Result<Vec<f64>>;
    /// `∂f^s/∂y_s`.
    fn jac_slow_ys(&self, _t: f64, _yf: &[f64], _ys: &[f64]) -> Option<DMatrix<f64>> {
        None
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StepStats {
    pub steps: usize,
    pub slow_rhs: usize,
    pub fast_rhs: usize,
    pub newton_iters: usize,
    pub rejected_inner_steps: usize,
}

impl StepStats {
    pub fn accumulate(&mut self, o: &StepStats) {
        self.steps += o.steps;
        self.slow_rhs += o.slow_rhs;
        self.fast_rhs += o.fast_rhs;
        self.newton_iters += o.newton_iters;
        self.rejected_inner_steps += o.rejected_inner_steps;
    }

    fn inner(&mut self, s: InnerStats) {
        self.fast_rhs += s.evals;
        self.rejected_inner_steps += s.rejected;
    }

    fn newton(&mut self, s: NewtonStats) {
        self.slow_rhs += s.f_evals;
        self.newton_iters += s.iterations;
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepResult {
    pub y_next: Vec<f64>,
    pub y_embedded: Option<Vec<f64>>,
    pub error_estimate: Option<f64>,
    pub stats: StepStats,
}

/// `‖v‖₂ / √n`.
pub fn rms(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt()
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn rate(fs: &[Option<Vec<f64>>], j: usize) -> &[f64] {
    fs[j].as_deref().expect("slow rate of a used stage is cached")
}

/// `g_k = Σⱼ rows[k][j] fⱼ`, the coefficients of the forcing polynomial in `θ/H`.
fn forcing<'a>(rows: impl Iterator<Item = &'a [f64]>, fs: &[Option<Vec<f64>>], n: usize) -> Vec<Vec<f64>> {
    rows.map(|row| {
        let mut g = vec![0.0; n];
        for (j, &c) in row.iter().enumerate() {
            if c != 0.0 {
                axpy(c, rate(fs, j), &mut g);
            }
        }
        g
    })
    .collect()
}

/// `Yᵢ + H Σⱼ weights[j] fⱼ`.
fn quadrature(y: &[f64], h: f64, weights: &[f64], fs: &[Option<Vec<f64>>]) -> Vec<f64> {
    let mut out = y.to_vec();
    for (j, &w) in weights.iter().enumerate() {
        if w != 0.0 {
            axpy(h * w, rate(fs, j), &mut out);
        }
    }
    out
}

fn gamma_row(m: &NumericMethod, i: usize) -> impl Iterator<Item = &[f64]> {
    m.gamma.iter().map(move |g| &g[i][..])
}

fn gamma_hat_row(m: &NumericMethod) -> impl Iterator<Item = &[f64]> {
    m.gamma_hat.iter().flatten().map(|r| &r[..])
}

/// Solve `v' = Δc f^f(T + Δc θ, v) + Σₖ (θ/H)ᵏ gₖ` over `θ ∈ [0, H]`.
pub fn solve_modified_fast_ode(
    fast: &mut dyn FnMut(f64, &[f64]) -> Result<Vec<f64>>,
    t_stage: f64,
    dc: f64,
    forcing: &[Vec<f64>],
    v0: &[f64],
    h: f64,
    inner: &InnerSolveConfig,
) -> Result<(Vec<f64>, InnerStats)> {
    let mut g = |theta: f64, v: &[f64]| -> Result<Vec<f64>> {
        let mut out = fast(t_stage + dc * theta, v)?;
        for x in out.iter_mut() {
            *x *= dc;
        }
        let tau = theta / h;
        let mut p = 1.0;
        for gk in forcing {
            axpy(p, gk, &mut out);
            p *= tau;
        }
        Ok(out)
    };
    solve_inner(&mut g, v0, h, inner)
}

fn check_step(h: f64, inner: &InnerSolveConfig) -> Result<()> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("step size must be positive, got {h}")));
    }
    inner.validate()
}

/// One step of the additive form.
pub fn step_additive(
    method: &MriGarkMethod,
    sys: &dyn AdditiveSystem,
    t: f64,
    y: &[f64],
    h: f64,
    inner: &InnerSolveConfig,
) -> Result<StepResult> {
    check_step(h, inner)?;
    let n = sys.dim();
    if y.len() != n {
        return Err(Error::InvalidArgument(format!("state has length {}, system has {n}", y.len())));
    }
    let m = method.numeric();
    let s = m.c.len();
    let time = |j: usize| t + m.c[j] * h;
    let newton = NewtonConfig::default();
    let mut st = StepStats { steps: 1, ..Default::default() };
    let mut stages: Vec<Vec<f64>> = vec![y.to_vec()];
    let mut fs: Vec<Option<Vec<f64>>> = vec![None; s];

    for i in 0..s {
        if m.slow_used[i] && fs[i].is_none() {
            fs[i] = Some(sys.f_slow(time(i), &stages[i])?);
            st.slow_rhs += 1;
        }
        let next = if m.stationary[i] {
            let r = quadrature(&stages[i], h, &m.gamma_bar[i][..=i], &fs);
            let diag = if i + 1 < s { m.gamma_bar[i][i + 1] } else { 0.0 };
            if diag != 0.0 {
                let tn = time(i + 1);
                let (yn, fy, ns) = solve_implicit_slow_stage(
                    &mut |v| sys.f_slow(tn, v),
                    &mut |v| sys.jac_slow(tn, v),
                    &r,
                    h * diag,
                    &r,
                    &newton,
                )?;
                st.newton(ns);
                fs[i + 1] = Some(fy);
                yn
            } else {
                r
            }
        } else {
            let g = forcing(gamma_row(m, i), &fs, n);
            let (v, is) =
                solve_modified_fast_ode(&mut |tt, v| sys.f_fast(tt, v), time(i), m.dc[i], &g, &stages[i], h, inner)?;
            st.inner(is);
            v
        };
        stages.push(next);
    }

    let y_next = stages.pop().expect("s + 1 stages");
    let y_embedded = match &m.gamma_hat_bar {
        None => None,
        Some(w) => {
            let last = s - 1;
            Some(if m.stationary[last] {
                quadrature(&stages[last], h, w, &fs)
            } else {
                let g = forcing(gamma_hat_row(m), &fs, n);
                let (v, is) = solve_modified_fast_ode(
                    &mut |tt, v| sys.f_fast(tt, v),
                    time(last),
                    m.dc[last],
                    &g,
                    &stages[last],
                    h,
                    inner,
                )?;
                st.inner(is);
                v
            })
        }
    };
    Ok(finish(y_next, y_embedded, st))
}

fn finish(y_next: Vec<f64>, y_embedded: Option<Vec<f64>>, stats: StepStats) -> StepResult {
    let error_estimate =
        y_embedded.as_ref().map(|e| rms(&y_next.iter().zip(e).map(|(a, b)| a - b).collect::<Vec<_>>()));
    StepResult { y_next, y_embedded, error_estimate, stats }
}

/// One step of the component form. States are `[y_f, y_s]` concatenated.
pub fn step_component(
    method: &MriGarkMethod,
    sys: &dyn ComponentSystem,
    t: f64,
    yf: &[f64],
    ys: &[f64],
    h: f64,
    inner: &InnerSolveConfig,
) -> Result<StepResult> {
    check_step(h, inner)?;
    let (nf, ns) = sys.dims();
    if yf.len() != nf || ys.len() != ns {
        return Err(Error::InvalidArgument(format!(
            "state has lengths ({}, {}), system has ({nf}, {ns})",
            yf.len(),
            ys.len()
        )));
    }
    let m = method.numeric();
    let s = m.c.len();
    let time = |j: usize| t + m.c[j] * h;
    let newton = NewtonConfig::default();
    let mut st = StepStats { steps: 1, ..Default::default() };
    let mut sf: Vec<Vec<f64>> = vec![yf.to_vec()];
    let mut ss: Vec<Vec<f64>> = vec![ys.to_vec()];
    let mut fs: Vec<Option<Vec<f64>>> = vec![None; s];

    // Fast stage ODE with the slow argument `Y^s_i + H Σₖ (θ/H)^{k+1}/(k+1) gₖ`.
    let fast_stage = |i: usize, rows: Vec<Vec<f64>>, vf: &[f64], vs: &[f64], st: &mut StepStats| -> Result<Vec<f64>> {
        let (ti, dc) = (time(i), m.dc[i]);
        let mut arg = vs.to_vec();
        let mut g = |theta: f64, v: &[f64]| -> Result<Vec<f64>> {
            let tau = theta / h;
            arg.copy_from_slice(vs);
            let mut p = tau;
            for (k, gk) in rows.iter().enumerate() {
                axpy(h * p / (k + 1) as f64, gk, &mut arg);
                p *= tau;
            }
            let mut out = sys.f_fast(ti + dc * theta, v, &arg)?;
            for x in out.iter_mut() {
                *x *= dc;
            }
            Ok(out)
        };
        let (v, is) = solve_inner(&mut g, vf, h, inner)?;
        st.inner(is);
        Ok(v)
    };

    for i in 0..s {
        if m.slow_used[i] && fs[i].is_none() {
            fs[i] = Some(sys.f_slow(time(i), &sf[i], &ss[i])?);
            st.slow_rhs += 1;
        }
        let r = quadrature(&ss[i], h, &m.gamma_bar[i][..=i], &fs);
        if m.stationary[i] {
            let frozen = sf[i].clone();
            let diag = if i + 1 < s { m.gamma_bar[i][i + 1] } else { 0.0 };
            let next = if diag != 0.0 {
                let tn = time(i + 1);
                let (yn, fy, nst) = solve_implicit_slow_stage(
                    &mut |v| sys.f_slow(tn, &frozen, v),
                    &mut |v| sys.jac_slow_ys(tn, &frozen, v),
                    &r,
                    h * diag,
                    &r,
                    &newton,
                )?;
                st.newton(nst);
                fs[i + 1] = Some(fy);
                yn
            } else {
                r
            };
            sf.push(frozen);
            ss.push(next);
        } else {
            let g = forcing(gamma_row(m, i), &fs, ns);
            let vf = fast_stage(i, g, &sf[i], &ss[i], &mut st)?;
            sf.push(vf);
            ss.push(r);
        }
    }

    let join = |a: &[f64], b: &[f64]| [a, b].concat();
    let y_next = join(&sf[s], &ss[s]);
    let y_embedded = match &m.gamma_hat_bar {
        None => None,
        Some(w) => {
            let last = s - 1;
            let slow = quadrature(&ss[last], h, w, &fs);
            let fast = if m.stationary[last] {
                sf[last].clone()
            } else {
                let g = forcing(gamma_hat_row(m), &fs, ns);
                fast_stage(last, g, &sf[last], &ss[last], &mut st)?
            };
            Some(join(&fast, &slow))
        }
    };
    Ok(finish(y_next, y_embedded, st))
}

/// Either partitioning of a system.
#[derive(Clone, Copy)]
pub enum System<'a> {
    Additive(&'a dyn AdditiveSystem),
    /// State vectors are `[y_f, y_s]`.
    Component(&'a dyn ComponentSystem),
}

impl System<'_> {
    pub fn dim(&self) -> usize {
        match self {
            System::Additive(s) => s.dim(),
            System::Component(s) => {
                let (a, b) = s.dims();
                a + b
            }
        }
    }

    pub fn step(
        &self,
        method: &MriGarkMethod,
        t: f64,
        y: &[f64],
        h: f64,
        inner: &InnerSolveConfig,
    ) -> Result<StepResult> {
        match self {
            System::Additive(s) => step_additive(method, *s, t, y, h, inner),
            System::Component(s) => {
                let nf = s.dims().0.min(y.len());
                step_component(method, *s, t, &y[..nf], &y[nf..], h, inner)
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// One entry per step when the method has an embedded solution.
    pub error_estimates: Vec<f64>,
    pub stats: StepStats,
}

impl Trajectory {
    pub fn final_state(&self) -> &[f64] {
        self.states.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn final_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(f64::NAN)
    }

    /// `t,y_0,...,y_{n-1}`.
    pub fn write_csv(&self, w: &mut dyn Write) -> Result<()> {
        let n = self.states.first().map_or(0, Vec::len);
        let mut header = vec!["t".to_string()];
        header.extend((0..n).map(|i| format!("y_{i}")));
        writeln!(w, "{}", header.join(","))?;
        for (t, y) in self.times.iter().zip(&self.states) {
            let mut row = vec![format!("{t:.16e}")];
            row.extend(y.iter().map(|v| format!("{v:.16e}")));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn stats_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.stats)?)
    }
}

/// Which states `integrate` keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Record {
    All,
    Final,
}

/// Number of steps of size at most `h` covering `[t0, tf]`; a step that
/// would overshoot by less than `1e−12` relative is not added.
pub fn step_count(t0: f64, tf: f64, h: f64) -> Result<usize> {
    if !(tf > t0) || !(h > 0.0) || !tf.is_finite() || !h.is_finite() {
        return Err(Error::InvalidArgument(format!("invalid grid: t0 = {t0}, tf = {tf}, H = {h}")));
    }
    let q = (tf - t0) / h;
    Ok(((q - 1e-12 * q.max(1.0)).ceil() as usize).max(1))
}

/// Fixed steps of size `h` from `t0` to `tf`; the last step is shortened.
#[allow(clippy::too_many_arguments)]
pub fn integrate(
    method: &MriGarkMethod,
    sys: System<'_>,
    t0: f64,
    tf: f64,
    y0: &[f64],
    h: f64,
    inner: &InnerSolveConfig,
    record: Record,
) -> Result<Trajectory> {
    let steps = step_count(t0, tf, h)?;
    let mut out = Trajectory { times: vec![t0], states: vec![y0.to_vec()], ..Default::default() };
    let mut y = y0.to_vec();
    for k in 0..steps {
        let t = t0 + k as f64 * h;
        let hk = if k + 1 == steps { tf - t } else { h };
        let r = sys.step(method, t, &y, hk, inner).map_err(|e| Error::Step { step: k, source: Box::new(e) })?;
        out.stats.accumulate(&r.stats);
        if r.y_next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Step { step: k, source: Box::new(Error::Domain("non-finite state".into())) });
        }
        if let Some(e) = r.error_estimate {
            out.error_estimates.push(e);
        }
        y = r.y_next;
        let tn = if k + 1 == steps { tf } else { t + h };
        if record == Record::All || k + 1 == steps {
            out.times.push(tn);
            out.states.push(y.clone());
        }
    }
    Ok(out)
}
