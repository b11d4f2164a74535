//! Benchmark systems: Gray–Scott reaction–diffusion, the KPR problem and the
//! linear test problems.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::integrator::{AdditiveSystem, ComponentSystem, System};
use crate::stability::CoupledTestProblem;

fn bad(msg: String) -> Error {
    Error::InvalidArgument(msg)
}

fn unknown_key(problem: &str, key: &str, keys: &[&str]) -> Error {
    bad(format!("{problem}: unknown parameter `{key}` (expected one of {})", keys.join(", ")))
}

/// Gray–Scott parameters on the unit square with an `n × n` periodic grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrayScottParams {
    pub eps_u: f64,
    pub eps_v: f64,
    pub feed: f64,
    pub kill: f64,
    pub n: usize,
}

impl Default for GrayScottParams {
    fn default() -> Self {
        GrayScottParams { eps_u: 0.0625, eps_v: 0.0312, feed: 0.0180, kill: 0.0520, n: 32 }
    }
}

impl GrayScottParams {
    pub const KEYS: [&'static str; 5] = ["eps_u", "eps_v", "f", "k", "n"];

    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        match key {
            "eps_u" => self.eps_u = value,
            "eps_v" => self.eps_v = value,
            "f" | "feed" => self.feed = value,
            "k" | "kill" => self.kill = value,
            "n" => {
                if value.fract() != 0.0 || value < 0.0 {
                    return Err(bad(format!("gray-scott: n must be a whole number, got {value}")));
                }
                self.n = value as usize;
            }
            _ => return Err(unknown_key("gray-scott", key, &Self::KEYS)),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.eps_u, self.eps_v, self.feed, self.kill];
        if all.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(bad(format!("gray-scott: parameters must be positive, got {self:?}")));
        }
        if self.n < 4 {
            return Err(bad(format!("gray-scott: grid must have n >= 4, got {}", self.n)));
        }
        Ok(())
    }
}

/// Method-of-lines Gray–Scott: `f^s` is diffusion, `f^f` the reaction.
/// State layout is `[u; v]` with cell `(i, j)` at `i·n + j`.
#[derive(Clone, Debug)]
pub struct GrayScott {
    pub params: GrayScottParams,
    inv_h2: f64,
}

impl GrayScott {
    pub fn new(params: GrayScottParams) -> Result<Self> {
        params.validate()?;
        let n = params.n as f64;
        Ok(GrayScott { params, inv_h2: n * n })
    }

    pub fn cells(&self) -> usize {
        self.params.n * self.params.n
    }

    /// `u = 1, v = 0`, with `u = 1/2, v = 1/4` on cells centred in `[1/4, 3/4]²`.
    pub fn initial_state(&self) -> Vec<f64> {
        let n = self.params.n;
        let m = self.cells();
        let mut y = vec![0.0; 2 * m];
        let inside = |i: usize| {
            let x = (i as f64 + 0.5) / n as f64;
            (0.25..=0.75).contains(&x)
        };
        for i in 0..n {
            for j in 0..n {
                let (u, v) = if inside(i) && inside(j) { (0.5, 0.25) } else { (1.0, 0.0) };
                y[i * n + j] = u;
                y[m + i * n + j] = v;
            }
        }
        y
    }

    fn laplacian(&self, w: &[f64], out: &mut [f64], scale: f64) {
        let n = self.params.n;
        let c = scale * self.inv_h2;
        for i in 0..n {
            let (up, down) = ((i + n - 1) % n, (i + 1) % n);
            for j in 0..n {
                let (left, right) = ((j + n - 1) % n, (j + 1) % n);
                let k = i * n + j;
                out[k] = c * (w[up * n + j] + w[down * n + j] + w[i * n + left] + w[i * n + right] - 4.0 * w[k]);
            }
        }
    }
}

impl AdditiveSystem for GrayScott {
    fn dim(&self) -> usize {
        2 * self.cells()
    }

    fn f_slow(&self, _t: f64, y: &[f64]) -> Result<Vec<f64>> {
        let m = self.cells();
        let mut out = vec![0.0; 2 * m];
        let (ou, ov) = out.split_at_mut(m);
        self.laplacian(&y[..m], ou, self.params.eps_u);
        self.laplacian(&y[m..], ov, self.params.eps_v);
        Ok(out)
    }

    fn f_fast(&self, _t: f64, y: &[f64]) -> Result<Vec<f64>> {
        let m = self.cells();
        let GrayScottParams { feed, kill, .. } = self.params;
        let mut out = vec![0.0; 2 * m];
        for k in 0..m {
            let (u, v) = (y[k], y[m + k]);
            let uvv = u * v * v;
            out[k] = -uvv + feed * (1.0 - u);
            out[m + k] = uvv - (feed + kill) * v;
        }
        Ok(out)
    }

    fn jac_slow(&self, _t: f64, _y: &[f64]) -> Option<DMatrix<f64>> {
        let n = self.params.n;
        let m = self.cells();
        let mut j = DMatrix::zeros(2 * m, 2 * m);
        for (block, eps) in [(0, self.params.eps_u), (m, self.params.eps_v)] {
            let c = eps * self.inv_h2;
            for i in 0..n {
                for jj in 0..n {
                    let k = block + i * n + jj;
                    for nb in [
                        ((i + n - 1) % n) * n + jj,
                        ((i + 1) % n) * n + jj,
                        i * n + (jj + n - 1) % n,
                        i * n + (jj + 1) % n,
                    ] {
                        j[(k, block + nb)] += c;
                    }
                    j[(k, k)] -= 4.0 * c;
                }
            }
        }
        Some(j)
    }
}

/// KPR parameters; `Ω` is the coupled test problem matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KprParams {
    pub lambda_f: f64,
    pub lambda_s: f64,
    pub xi: f64,
    pub alpha: f64,
    pub omega: f64,
}

impl Default for KprParams {
    fn default() -> Self {
        KprParams { lambda_f: -10.0, lambda_s: -1.0, xi: 0.1, alpha: 1.0, omega: 20.0 }
    }
}

impl KprParams {
    pub const KEYS: [&'static str; 5] = ["lambda_f", "lambda_s", "xi", "alpha", "omega"];

    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        match key {
            "lambda_f" => self.lambda_f = value,
            "lambda_s" => self.lambda_s = value,
            "xi" => self.xi = value,
            "alpha" => self.alpha = value,
            "omega" => self.omega = value,
            _ => return Err(unknown_key("kpr", key, &Self::KEYS)),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_f < 0.0 && self.lambda_s < 0.0) {
            return Err(bad(format!("kpr: lambda_f and lambda_s must be negative, got {self:?}")));
        }
        if !(self.xi > 0.0 && self.xi < 1.0) {
            return Err(bad(format!("kpr: xi must lie in (0, 1), got {}", self.xi)));
        }
        if !(self.omega > 0.0) || !(self.alpha != 0.0 && self.alpha.is_finite()) {
            return Err(bad(format!("kpr: need omega > 0 and alpha != 0, got {self:?}")));
        }
        Ok(())
    }

    pub fn coupled(&self) -> CoupledTestProblem {
        CoupledTestProblem::new(Complex64::new(self.lambda_f, 0.0), Complex64::new(self.lambda_s, 0.0), self.xi)
            .with_alpha(Complex64::new(self.alpha, 0.0))
    }
}

fn real_omega(p: &CoupledTestProblem) -> [[f64; 2]; 2] {
    let o = p.omega();
    [[o[0][0].re, o[0][1].re], [o[1][0].re, o[1][1].re]]
}

#[derive(Clone, Debug)]
pub struct Kpr {
    pub params: KprParams,
    omega_matrix: [[f64; 2]; 2],
}

impl Kpr {
    pub fn new(params: KprParams) -> Result<Self> {
        params.validate()?;
        Ok(Kpr { params, omega_matrix: real_omega(&params.coupled()) })
    }

    pub fn omega_matrix(&self) -> [[f64; 2]; 2] {
        self.omega_matrix
    }

    /// `(√(3 + cos ωt), √(2 + cos t))`.
    pub fn exact(&self, t: f64) -> [f64; 2] {
        [(3.0 + (self.params.omega * t).cos()).sqrt(), (2.0 + t.cos()).sqrt()]
    }

    fn residuals(&self, t: f64, yf: f64, ys: f64) -> Result<[f64; 2]> {
        if !(yf > 0.0 && ys > 0.0) {
            return Err(Error::Domain(format!("kpr state must stay positive, got ({yf}, {ys}) at t = {t}")));
        }
        let w = self.params.omega;
        Ok([(-3.0 + yf * yf - (w * t).cos()) / (2.0 * yf), (-2.0 + ys * ys - t.cos()) / (2.0 * ys)])
    }
}

impl ComponentSystem for Kpr {
    fn dims(&self) -> (usize, usize) {
        (1, 1)
    }

    fn f_fast(&self, t: f64, yf: &[f64], ys: &[f64]) -> Result<Vec<f64>> {
        let r = self.residuals(t, yf[0], ys[0])?;
        let o = &self.omega_matrix;
        let w = self.params.omega;
        Ok(vec![o[0][0] * r[0] + o[0][1] * r[1] - w * (w * t).sin() / (2.0 * yf[0])])
    }

    fn f_slow(&self, t: f64, yf: &[f64], ys: &[f64]) -> Result<Vec<f64>> {
        let r = self.residuals(t, yf[0], ys[0])?;
        let o = &self.omega_matrix;
        Ok(vec![o[1][0] * r[0] + o[1][1] * r[1] - t.sin() / (2.0 * ys[0])])
    }

    fn jac_slow_ys(&self, t: f64, _yf: &[f64], ys: &[f64]) -> Option<DMatrix<f64>> {
        let y2 = ys[0] * ys[0];
        let d = self.omega_matrix[1][1] * 0.5 * (1.0 + (2.0 + t.cos()) / y2) + t.sin() / (2.0 * y2);
        Some(DMatrix::from_element(1, 1, d))
    }
}

/// `y' = λ^f y + λ^s y`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearScalar {
    pub lambda_f: f64,
    pub lambda_s: f64,
}

impl LinearScalar {
    pub fn exact(&self, t: f64, y0: f64) -> f64 {
        y0 * ((self.lambda_f + self.lambda_s) * t).exp()
    }
}

impl AdditiveSystem for LinearScalar {
    fn dim(&self) -> usize {
        1
    }
    fn f_fast(&self, _t: f64, y: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![self.lambda_f * y[0]])
    }
    fn f_slow(&self, _t: f64, y: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![self.lambda_s * y[0]])
    }
    fn jac_slow(&self, _t: f64, _y: &[f64]) -> Option<DMatrix<f64>> {
        Some(DMatrix::from_element(1, 1, self.lambda_s))
    }
}

pub fn linear_scalar(lambda_f: f64, lambda_s: f64) -> LinearScalar {
    LinearScalar { lambda_f, lambda_s }
}

/// `[y_f; y_s]' = Ω [y_f; y_s]` for a real coupled test problem.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Linear2d {
    pub omega: [[f64; 2]; 2],
}

pub fn linear_2d(problem: &CoupledTestProblem) -> Result<Linear2d> {
    let o = problem.omega();
    if o.iter().flatten().any(|v| v.im != 0.0) {
        return Err(bad("linear-2d: coupled problem must be real".into()));
    }
    Ok(Linear2d { omega: real_omega(problem) })
}

impl Linear2d {
    /// `e^{tΩ}` from `e^{μt}(cosh(δt) I + sinh(δt)/δ (Ω − μI))`, `μ = tr/2`, `δ² = μ² − det`.
    pub fn flow(&self, t: f64) -> [[f64; 2]; 2] {
        let o = self.omega;
        let mu = 0.5 * (o[0][0] + o[1][1]);
        let det = o[0][0] * o[1][1] - o[0][1] * o[1][0];
        let d = Complex64::new(mu * mu - det, 0.0).sqrt();
        let dt = d * t;
        let ch = dt.cosh().re;
        // sinh(δt)/δ, with its limit t as δ → 0.
        let sh = if dt.norm() < 1e-8 { t * (1.0 + (dt * dt).re / 6.0) } else { (dt.sinh() / d).re };
        let e = (mu * t).exp();
        [[e * (ch + sh * (o[0][0] - mu)), e * sh * o[0][1]], [e * sh * o[1][0], e * (ch + sh * (o[1][1] - mu))]]
    }

    pub fn exact(&self, t: f64, y0: [f64; 2]) -> [f64; 2] {
        let m = self.flow(t);
        [m[0][0] * y0[0] + m[0][1] * y0[1], m[1][0] * y0[0] + m[1][1] * y0[1]]
    }
}

impl ComponentSystem for Linear2d {
    fn dims(&self) -> (usize, usize) {
        (1, 1)
    }
    fn f_fast(&self, _t: f64, yf: &[f64], ys: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![self.omega[0][0] * yf[0] + self.omega[0][1] * ys[0]])
    }
    fn f_slow(&self, _t: f64, yf: &[f64], ys: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![self.omega[1][0] * yf[0] + self.omega[1][1] * ys[0]])
    }
    fn jac_slow_ys(&self, _t: f64, _yf: &[f64], _ys: &[f64]) -> Option<DMatrix<f64>> {
        Some(DMatrix::from_element(1, 1, self.omega[1][1]))
    }
}

/// A named benchmark with its initial state and default interval.
#[derive(Clone, Debug)]
pub enum Problem {
    GrayScott(GrayScott),
    Kpr(Kpr),
    LinearScalar { system: LinearScalar, y0: f64 },
    Linear2d { system: Linear2d, y0: [f64; 2] },
}

pub const PROBLEM_NAMES: [&str; 4] = ["gray-scott", "kpr", "linear-scalar", "linear-2d"];

impl Problem {
    /// Build a problem by name with `key=value` overrides.
    pub fn by_name(name: &str, overrides: &[(String, f64)]) -> Result<Problem> {
        match name {
            "gray-scott" => {
                let mut p = GrayScottParams::default();
                for (k, v) in overrides {
                    p.set(k, *v)?;
                }
                Ok(Problem::GrayScott(GrayScott::new(p)?))
            }
            "kpr" => {
                let mut p = KprParams::default();
                for (k, v) in overrides {
                    p.set(k, *v)?;
                }
                Ok(Problem::Kpr(Kpr::new(p)?))
            }
            "linear-scalar" => {
                let (mut lf, mut ls, mut y0) = (-10.0, -1.0, 1.0);
                for (k, v) in overrides {
                    match k.as_str() {
                        "lambda_f" => lf = *v,
                        "lambda_s" => ls = *v,
                        "y0" => y0 = *v,
                        _ => return Err(unknown_key(name, k, &["lambda_f", "lambda_s", "y0"])),
                    }
                }
                Ok(Problem::LinearScalar { system: linear_scalar(lf, ls), y0 })
            }
            "linear-2d" => {
                let (mut lf, mut ls, mut xi, mut alpha) = (-10.0, -1.0, 0.1, 1.0);
                let mut y0 = [1.0, 1.0];
                for (k, v) in overrides {
                    match k.as_str() {
                        "lambda_f" => lf = *v,
                        "lambda_s" => ls = *v,
                        "xi" => xi = *v,
                        "alpha" => alpha = *v,
                        "yf0" => y0[0] = *v,
                        "ys0" => y0[1] = *v,
                        _ => return Err(unknown_key(name, k, &["lambda_f", "lambda_s", "xi", "alpha", "yf0", "ys0"])),
                    }
                }
                if alpha == 0.0 {
                    return Err(bad("linear-2d: alpha must be nonzero".into()));
                }
                let p = CoupledTestProblem::new(Complex64::new(lf, 0.0), Complex64::new(ls, 0.0), xi)
                    .with_alpha(Complex64::new(alpha, 0.0));
                Ok(Problem::Linear2d { system: linear_2d(&p)?, y0 })
            }
            _ => Err(bad(format!("unknown problem `{name}` (expected one of {})", PROBLEM_NAMES.join(", ")))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Problem::GrayScott(_) => "gray-scott",
            Problem::Kpr(_) => "kpr",
            Problem::LinearScalar { .. } => "linear-scalar",
            Problem::Linear2d { .. } => "linear-2d",
        }
    }

    pub fn system(&self) -> System<'_> {
        match self {
            Problem::GrayScott(p) => System::Additive(p),
            Problem::Kpr(p) => System::Component(p),
            Problem::LinearScalar { system, .. } => System::Additive(system),
            Problem::Linear2d { system, .. } => System::Component(system),
        }
    }

    pub fn initial_state(&self) -> Vec<f64> {
        match self {
            Problem::GrayScott(p) => p.initial_state(),
            Problem::Kpr(p) => p.exact(0.0).to_vec(),
            Problem::LinearScalar { y0, .. } => vec![*y0],
            Problem::Linear2d { y0, .. } => y0.to_vec(),
        }
    }

    pub fn default_interval(&self) -> (f64, f64) {
        match self {
            Problem::GrayScott(_) => (0.0, 2.0),
            Problem::Kpr(_) => (0.0, 2.5 * std::f64::consts::PI),
            _ => (0.0, 1.0),
        }
    }

    /// Exact solution at `t` from the initial state at `t0 = 0`, where one is known.
    pub fn exact(&self, t: f64) -> Option<Vec<f64>> {
        match self {
            Problem::GrayScott(_) => None,
            Problem::Kpr(p) => Some(p.exact(t).to_vec()),
            Problem::LinearScalar { system, y0 } => Some(vec![system.exact(t, *y0)]),
            Problem::Linear2d { system, y0 } => Some(system.exact(t, *y0).to_vec()),
        }
    }
}
