//! Linear stability: the scalar stability function `R(z^f, z^s)`, the 2×2 error
//! propagation matrix of the coupled test problem, and slow stability region scans.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::phi::phi_row;
use crate::tableaux::{MriGarkMethod, NumericMethod};

pub type C64 = Complex64;

const SINGULAR: f64 = 1e-14;

/// Membership tolerance above 1.
pub const MEMBER_TOL: f64 = 1e-10;

/// Stage coefficients that depend on `z^f` only.
#[derive(Clone, Debug)]
pub struct FastFactors {
    /// `φ₀(Δcᵢ z^f)`.
    pub phi0: Vec<C64>,
    /// `φ₁(Δcᵢ z^f)`.
    pub phi1: Vec<C64>,
    /// `μᵢⱼ = Σₖ Γᵏᵢⱼ φₖ₊₁(Δcᵢ z^f)`.
    pub mu: Vec<Vec<C64>>,
    /// `νᵢⱼ = Σₖ Γᵏᵢⱼ/(k+1) φₖ₊₂(Δcᵢ z^f)`.
    pub nu: Vec<Vec<C64>>,
}

impl FastFactors {
    pub fn new(m: &NumericMethod, zf: C64) -> Self {
        Self::build(m, |dc| phi_row(m.gamma.len() + 1, zf * dc))
    }

    /// The `z^f → ∞` limit inside the open left half-plane: every φ of a
    /// nonzero argument vanishes.
    pub fn stiff_limit(m: &NumericMethod) -> Self {
        let kmax = m.gamma.len() + 1;
        Self::build(
            m,
            |dc| {
                if dc == 0.0 {
                    phi_row(kmax, C64::new(0.0, 0.0))
                } else {
                    vec![C64::new(0.0, 0.0); kmax + 1]
                }
            },
        )
    }

    fn build(m: &NumericMethod, row: impl Fn(f64) -> Vec<C64>) -> Self {
        let s = m.c.len();
        let mut out = FastFactors { phi0: vec![], phi1: vec![], mu: vec![], nu: vec![] };
        for i in 0..s {
            let p = row(m.dc[i]);
            out.phi0.push(p[0]);
            out.phi1.push(p[1]);
            let mut mu = vec![C64::new(0.0, 0.0); s];
            let mut nu = vec![C64::new(0.0, 0.0); s];
            for (k, g) in m.gamma.iter().enumerate() {
                for j in 0..s {
                    let v = g[i][j];
                    if v != 0.0 {
                        mu[j] += p[k + 1] * v;
                        nu[j] += p[k + 2] * (v / (k + 1) as f64);
                    }
                }
            }
            out.mu.push(mu);
            out.nu.push(nu);
        }
        out
    }
}

fn singular(stage: usize, d: C64) -> Result<()> {
    if d.norm() < SINGULAR {
        Err(Error::Singular { stage, modulus: d.norm() })
    } else {
        Ok(())
    }
}

/// `R` from precomputed fast factors.
pub fn scalar_stability_with(m: &NumericMethod, f: &FastFactors, zs: C64) -> Result<C64> {
    let s = m.c.len();
    let mut y = Vec::with_capacity(s + 1);
    y.push(C64::new(1.0, 0.0));
    for i in 0..s {
        let mut acc = f.phi0[i] * y[i];
        for j in 0..=i {
            acc += zs * f.mu[i][j] * y[j];
        }
        let diag = if i + 1 < s { f.mu[i][i + 1] } else { C64::new(0.0, 0.0) };
        if diag != C64::new(0.0, 0.0) {
            singular(i, C64::new(1.0, 0.0) - zs * m.gamma_bar[i][i + 1])?;
            let d = C64::new(1.0, 0.0) - zs * diag;
            singular(i, d)?;
            acc /= d;
        }
        y.push(acc);
    }
    Ok(y[s])
}

/// Scalar stability function for `y' = λ^f y + λ^s y` with `z^f = Hλ^f`, `z^s = Hλ^s`.
pub fn scalar_stability(method: &MriGarkMethod, zf: C64, zs: C64) -> Result<C64> {
    let m = method.numeric();
    scalar_stability_with(m, &FastFactors::new(m, zf), zs)
}

/// Classical stability function `1 + z bᵀ(I − zA)⁻¹ 1` of the base slow method.
pub fn base_stability(method: &MriGarkMethod, z: C64) -> Result<C64> {
    let m = method.numeric();
    let s = m.c.len();
    let lhs = DMatrix::from_fn(s, s, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        C64::new(id, 0.0) - z * m.a[i][j]
    });
    let rhs = DVector::from_element(s, C64::new(1.0, 0.0));
    let x = lhs.lu().solve(&rhs).ok_or(Error::Singular { stage: 0, modulus: 0.0 })?;
    let bx: C64 = m.b.iter().zip(x.iter()).map(|(b, v)| v * *b).sum();
    Ok(C64::new(1.0, 0.0) + z * bx)
}

/// The coupled linear test problem
/// `Ω = [[λf, (1−ξ)(λf−λs)/α], [−αξ(λf−λs), λs]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoupledTestProblem {
    pub lambda_f: C64,
    pub lambda_s: C64,
    pub xi: f64,
    pub alpha_scale: C64,
}

impl CoupledTestProblem {
    pub fn new(lambda_f: C64, lambda_s: C64, xi: f64) -> Self {
        CoupledTestProblem { lambda_f, lambda_s, xi, alpha_scale: C64::new(1.0, 0.0) }
    }

    pub fn with_alpha(mut self, alpha: C64) -> Self {
        self.alpha_scale = alpha;
        self
    }

    /// Coupling of the slow variable into the fast equation.
    pub fn eta_s(&self) -> C64 {
        (self.lambda_f - self.lambda_s) * (1.0 - self.xi) / self.alpha_scale
    }

    /// Coupling of the fast variable into the slow equation.
    pub fn eta_f(&self) -> C64 {
        -self.alpha_scale * self.xi * (self.lambda_f - self.lambda_s)
    }

    pub fn omega(&self) -> [[C64; 2]; 2] {
        [[self.lambda_f, self.eta_s()], [self.eta_f(), self.lambda_s]]
    }

    /// `δ = √(4 η^f η^s + (λf − λs)²)`.
    pub fn delta(&self) -> C64 {
        let d = self.lambda_f - self.lambda_s;
        (self.eta_f() * self.eta_s() * 4.0 + d * d).sqrt()
    }

    /// `{ξλf + (1−ξ)λs, (1−ξ)λf + ξλs}`.
    pub fn eigenvalues(&self) -> [C64; 2] {
        let x = self.xi;
        [self.lambda_f * x + self.lambda_s * (1.0 - x), self.lambda_f * (1.0 - x) + self.lambda_s * x]
    }
}

pub type Mat2 = [[C64; 2]; 2];

/// `M` from precomputed fast factors, given `z^s` and the scaled couplings.
pub fn matrix_stability_with(m: &NumericMethod, f: &FastFactors, zs: C64, ws: C64, wf: C64) -> Result<Mat2> {
    let s = m.c.len();
    let mut cols = [[C64::new(0.0, 0.0); 2]; 2];
    // Propagate both unit initial vectors at once: yf[j][col], ys[j][col].
    let mut yf: Vec<[C64; 2]> = vec![[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]];
    let mut ys: Vec<[C64; 2]> = vec![[C64::new(0.0, 0.0), C64::new(1.0, 0.0)]];
    for i in 0..s {
        let dc = m.dc[i];
        let mut nf = [C64::new(0.0, 0.0); 2];
        for col in 0..2 {
            let mut v = f.phi0[i] * yf[i][col];
            if dc != 0.0 {
                v += f.phi1[i] * ws * dc * ys[i][col];
                for j in 0..=i {
                    v += ws * dc * f.nu[i][j] * (wf * yf[j][col] + zs * ys[j][col]);
                }
            }
            nf[col] = v;
        }
        yf.push(nf);
        let g = &m.gamma_bar[i];
        let diag = if i + 1 < s { g[i + 1] } else { 0.0 };
        let d = C64::new(1.0, 0.0) - zs * diag;
        singular(i, d)?;
        let mut nsv = [C64::new(0.0, 0.0); 2];
        for col in 0..2 {
            let mut v = ys[i][col];
            for j in 0..=(i + 1).min(s - 1) {
                if g[j] != 0.0 {
                    v += wf * g[j] * yf[j][col];
                }
            }
            for j in 0..=i {
                if g[j] != 0.0 {
                    v += zs * g[j] * ys[j][col];
                }
            }
            nsv[col] = v / d;
        }
        ys.push(nsv);
    }
    for col in 0..2 {
        cols[0][col] = yf[s][col];
        cols[1][col] = ys[s][col];
    }
    Ok(cols)
}

/// Error propagation matrix over one step `H` of the coupled test problem.
pub fn matrix_stability(method: &MriGarkMethod, problem: &CoupledTestProblem, h: f64) -> Result<Mat2> {
    let m = method.numeric();
    let zf = problem.lambda_f * h;
    let zs = problem.lambda_s * h;
    let f = FastFactors::new(m, zf);
    matrix_stability_with(m, &f, zs, problem.eta_s() * h, problem.eta_f() * h)
}

/// Largest eigenvalue modulus of a 2×2 matrix.
pub fn spectral_radius(m: &Mat2) -> f64 {
    let half_tr = (m[0][0] + m[1][1]) * 0.5;
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let root = (half_tr * half_tr - det).sqrt();
    (half_tr + root).norm().max((half_tr - root).norm())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanMode {
    Scalar,
    Matrix,
}

impl std::str::FromStr for ScanMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scalar" => Ok(ScanMode::Scalar),
            "matrix" => Ok(ScanMode::Matrix),
            _ => Err(Error::InvalidArgument(format!("unknown stability mode `{s}`"))),
        }
    }
}

/// Rectangular grid of `z^s` values, row-major with the real part varying fastest.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComplexGrid {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub n_re: usize,
    pub n_im: usize,
}

impl ComplexGrid {
    pub fn points(&self) -> Vec<C64> {
        let step = |lo: f64, hi: f64, n: usize, k: usize| lo + (hi - lo) * k as f64 / (n - 1) as f64;
        let mut out = Vec::with_capacity(self.n_re * self.n_im);
        for j in 0..self.n_im {
            for i in 0..self.n_re {
                out.push(C64::new(
                    step(self.re_min, self.re_max, self.n_re, i),
                    step(self.im_min, self.im_max, self.n_im, j),
                ));
            }
        }
        out
    }
}

/// Sampling of the wedge `{z^f : |z^f| ≤ ρ, |arg z^f − π| ≤ α}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WedgeSampling {
    /// Radii on a log scale from `r_min` to `min(ρ, cap)`, plus the origin.
    pub n_radii: usize,
    pub r_min: f64,
    pub cap: f64,
    /// Angles are the multiples of this step below α, plus α itself.
    pub angle_step_deg: f64,
}

impl Default for WedgeSampling {
    fn default() -> Self {
        WedgeSampling { n_radii: 32, r_min: 1e-2, cap: 1e6, angle_step_deg: 5.0 }
    }
}

impl WedgeSampling {
    /// Deviations from the negative real axis, in degrees, both sides.
    pub fn angles(&self, alpha_deg: f64) -> Vec<f64> {
        let mut a = vec![0.0];
        let mut k = 1;
        while (k as f64) * self.angle_step_deg < alpha_deg - 1e-12 {
            a.push(k as f64 * self.angle_step_deg);
            k += 1;
        }
        if alpha_deg > 0.0 {
            a.push(alpha_deg);
        }
        let neg: Vec<f64> = a.iter().skip(1).map(|x| -x).collect();
        a.extend(neg);
        a
    }

    pub fn radii(&self, rho: f64) -> Vec<f64> {
        let top = rho.min(self.cap);
        let mut r = vec![0.0];
        if top <= 0.0 {
            return r;
        }
        let lo = self.r_min.min(top);
        let n = self.n_radii.max(2);
        for k in 0..n {
            r.push(lo * (top / lo).powf(k as f64 / (n - 1) as f64));
        }
        r
    }

    pub fn samples(&self, rho: f64, alpha_deg: f64) -> Vec<C64> {
        let mut out = Vec::new();
        for &r in &self.radii(rho) {
            if r == 0.0 {
                out.push(C64::new(0.0, 0.0));
                continue;
            }
            for &a in &self.angles(alpha_deg) {
                out.push(C64::from_polar(r, std::f64::consts::PI + a.to_radians()));
            }
        }
        out
    }
}

/// A slow stability region scan: configuration plus results.
#[derive(Clone, Debug, Serialize)]
pub struct RegionScan {
    pub method: String,
    pub mode: ScanMode,
    #[serde(serialize_with = "serialize_rho")]
    pub rho: f64,
    pub alpha_deg: f64,
    pub xi: f64,
    pub grid: ComplexGrid,
    pub wedge: WedgeSampling,
    #[serde(skip)]
    pub values: Vec<f64>,
    #[serde(skip)]
    pub membership: Vec<bool>,
}

fn serialize_rho<S: serde::Serializer>(rho: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if rho.is_finite() {
        s.serialize_f64(*rho)
    } else {
        s.serialize_str("inf")
    }
}

impl RegionScan {
    pub fn new(method: &str, mode: ScanMode, rho: f64, alpha_deg: f64, xi: f64, grid: ComplexGrid) -> Self {
        RegionScan {
            method: method.to_string(),
            mode,
            rho,
            alpha_deg,
            xi,
            grid,
            wedge: WedgeSampling::default(),
            values: Vec::new(),
            membership: Vec::new(),
        }
    }

    /// `re_zs,im_zs,max_modulus,member`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("re_zs,im_zs,max_modulus,member\n");
        for ((z, v), m) in self.grid.points().iter().zip(&self.values).zip(&self.membership) {
            out.push_str(&format!("{:.16e},{:.16e},{:.16e},{}\n", z.re, z.im, v, u8::from(*m)));
        }
        out
    }

    /// Scan metadata for the sidecar file.
    pub fn metadata_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn member_count(&self) -> usize {
        self.membership.iter().filter(|&&m| m).count()
    }
}

/// Fill `values` (max over the wedge of `|R|` or of the spectral radius of `M`)
/// and `membership`. Points whose stage solves are singular get `+∞`.
pub fn scan_region(method: &MriGarkMethod, mut scan: RegionScan) -> Result<RegionScan> {
    let g = &scan.grid;
    if g.n_re < 2 || g.n_im < 2 {
        return Err(Error::InvalidArgument("scan grid needs at least 2 points per axis".into()));
    }
    if !(0.0..=180.0).contains(&scan.alpha_deg)
        || !(0.0..=1.0).contains(&scan.xi)
        || scan.rho.is_nan()
        || scan.rho < 0.0
    {
        return Err(Error::InvalidArgument("scan parameters out of range".into()));
    }
    let m = method.numeric();
    let zfs = scan.wedge.samples(scan.rho, scan.alpha_deg);
    let mut factors: Vec<(C64, FastFactors)> = zfs.iter().map(|&zf| (zf, FastFactors::new(m, zf))).collect();
    if scan.mode == ScanMode::Scalar && scan.rho.is_infinite() && scan.alpha_deg < 90.0 {
        factors.push((C64::new(f64::NEG_INFINITY, 0.0), FastFactors::stiff_limit(m)));
    }
    let xi = scan.xi;
    let mode = scan.mode;
    let values: Vec<f64> = g
        .points()
        .par_iter()
        .map(|&zs| {
            let mut worst = 0.0f64;
            for (zf, f) in &factors {
                let v = match mode {
                    ScanMode::Scalar => scalar_stability_with(m, f, zs).map(|r| r.norm()),
                    ScanMode::Matrix => {
                        let p = CoupledTestProblem::new(*zf, zs, xi);
                        matrix_stability_with(m, f, zs, p.eta_s(), p.eta_f()).map(|mm| spectral_radius(&mm))
                    }
                };
                let v = match v {
                    Ok(x) if x.is_finite() => x,
                    _ => f64::INFINITY,
                };
                worst = worst.max(v);
                if worst == f64::INFINITY {
                    break;
                }
            }
            worst
        })
        .collect();
    scan.membership = values.iter().map(|&v| v <= 1.0 + MEMBER_TOL).collect();
    scan.values = values;
    Ok(scan)
}
