//! Method coefficients: the slow base tableau, the polynomial coupling stack,
//! and the built-in registry.
//!
//! Stage indices are 0-based throughout. Row `i` of every `Γᵏ` drives the stage
//! that advances `Y_i` to `Y_{i+1}`; row `s−1` produces the step solution.

mod builtin;
mod json;

pub use builtin::{builtin, builtin_names, erk22, erk33};
pub use json::{from_json, to_json, MethodDocument};

use crate::error::{Error, Result};
use crate::field::{Exact, Field};

pub type Matrix<T> = Vec<Vec<T>>;

/// Slow base Runge–Kutta tableau.
#[derive(Clone, Debug, PartialEq)]
pub struct BaseTableau<T> {
    pub c: Vec<T>,
    pub a: Matrix<T>,
    pub b: Vec<T>,
    pub b_hat: Option<Vec<T>>,
    pub dc: Vec<T>,
}

/// Polynomial coupling coefficients `Γ(τ) = Σ_k Γᵏ τᵏ` and the embedded last row.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaStack<T> {
    pub gamma: Vec<Matrix<T>>,
    pub gamma_hat: Option<Vec<Vec<T>>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodKind {
    Explicit,
    DecoupledImplicit,
}

impl MethodKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MethodKind::Explicit => "explicit",
            MethodKind::DecoupledImplicit => "decoupled_implicit",
        }
    }
}

impl<T: Field> GammaStack<T> {
    pub fn stages(&self) -> usize {
        self.gamma.first().map_or(0, Vec::len)
    }

    /// Highest stored polynomial degree `K`.
    pub fn degree(&self) -> usize {
        self.gamma.len().saturating_sub(1)
    }

    /// Entry `Γᵏ[i][j]`, zero beyond the stored degree.
    pub fn entry(&self, k: usize, i: usize, j: usize) -> T {
        self.gamma.get(k).map_or_else(T::zero, |g| g[i][j].clone())
    }
}

/// Increments `c[i+1] − c[i]`, with `1 − c[s−1]` for the last stage.
pub fn increments<T: Field>(c: &[T]) -> Vec<T> {
    let s = c.len();
    (0..s).map(|i| if i + 1 < s { c[i + 1].clone() - c[i].clone() } else { T::one() - c[i].clone() }).collect()
}

/// `γ̄ = Σ_k Γᵏ/(k+1)`.
pub fn gamma_bar<T: Field>(gammas: &GammaStack<T>) -> Matrix<T> {
    integrate_rows(&gammas.gamma)
}

/// Integrated embedded row `Σ_k γ̂ᵏ/(k+1)`.
pub fn gamma_hat_bar<T: Field>(gammas: &GammaStack<T>) -> Option<Vec<T>> {
    gammas.gamma_hat.as_ref().map(|rows| integrate_vec(rows))
}

fn integrate_vec<T: Field>(rows: &[Vec<T>]) -> Vec<T> {
    let n = rows.first().map_or(0, Vec::len);
    let mut out = vec![T::zero(); n];
    for (k, row) in rows.iter().enumerate() {
        let w = T::from_ratio(1, k as i64 + 1);
        for (o, v) in out.iter_mut().zip(row) {
            if !v.is_zero() {
                *o = o.clone() + v.clone() * w.clone();
            }
        }
    }
    out
}

fn integrate_rows<T: Field>(gamma: &[Matrix<T>]) -> Matrix<T> {
    let s = gamma.first().map_or(0, Vec::len);
    (0..s)
        .map(|i| {
            let rows: Vec<Vec<T>> = gamma.iter().map(|g| g[i].clone()).collect();
            integrate_vec(&rows)
        })
        .collect()
}

/// `Γ(τ) = Σ_k Γᵏ τᵏ` for `τ ∈ [0, 1]`.
pub fn gamma_at<T: Field>(gammas: &GammaStack<T>, tau: T) -> Result<Matrix<T>> {
    let t = tau.to_f64();
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidArgument(format!("tau = {t} outside [0, 1]")));
    }
    let s = gammas.stages();
    let mut out = vec![vec![T::zero(); s]; s];
    let mut p = T::one();
    for g in &gammas.gamma {
        for i in 0..s {
            for j in 0..s {
                if !g[i][j].is_zero() {
                    out[i][j] = out[i][j].clone() + g[i][j].clone() * p.clone();
                }
            }
        }
        p = p * tau.clone();
    }
    Ok(out)
}

/// Base tableau implied by the coupling stack: `A[i] = Σ_{p<i} γ̄[p]`, `b = Σ_p γ̄[p]`,
/// `c` the row sums of `A`. The embedded weights are `A[s−1] + γ̂̄`.
pub fn reconstruct_base<T: Field>(gammas: &GammaStack<T>, s: usize) -> BaseTableau<T> {
    let gb = gamma_bar(gammas);
    let mut a = vec![vec![T::zero(); s]; s];
    for i in 1..s {
        for j in 0..s {
            a[i][j] = a[i - 1][j].clone() + gb[i - 1][j].clone();
        }
    }
    let b: Vec<T> = (0..s).map(|j| a[s - 1][j].clone() + gb[s - 1][j].clone()).collect();
    let c: Vec<T> = a.iter().map(|row| sum(row)).collect();
    let b_hat = gamma_hat_bar(gammas).map(|gh| (0..s).map(|j| a[s - 1][j].clone() + gh[j].clone()).collect());
    let dc = increments(&c);
    BaseTableau { c, a, b, b_hat, dc }
}

pub(crate) fn sum<T: Field>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, x| acc + x.clone())
}

/// One complete MRI-GARK scheme. Coefficients are held exactly; a double-precision
/// copy is cached for the solver and stability code.
#[derive(Clone, Debug)]
pub struct MriGarkMethod {
    pub name: String,
    pub order: usize,
    pub embedded_order: usize,
    pub kind: MethodKind,
    pub base: BaseTableau<Exact>,
    pub gammas: GammaStack<Exact>,
    numeric: NumericMethod,
}

/// Double-precision coefficients with the derived quantities the solvers need.
#[derive(Clone, Debug)]
pub struct NumericMethod {
    pub c: Vec<f64>,
    pub dc: Vec<f64>,
    pub a: Matrix<f64>,
    pub b: Vec<f64>,
    pub b_hat: Option<Vec<f64>>,
    pub gamma: Vec<Matrix<f64>>,
    pub gamma_hat: Option<Vec<Vec<f64>>>,
    pub gamma_bar: Matrix<f64>,
    pub gamma_hat_bar: Option<Vec<f64>>,
    /// Stages whose slow rate enters some coupling coefficient.
    pub slow_used: Vec<bool>,
    /// `dc[i] == 0` exactly.
    pub stationary: Vec<bool>,
}

fn to_f64_vec(v: &[Exact]) -> Vec<f64> {
    v.iter().map(Field::to_f64).collect()
}

fn to_f64_mat(m: &[Vec<Exact>]) -> Matrix<f64> {
    m.iter().map(|r| to_f64_vec(r)).collect()
}

impl MriGarkMethod {
    /// Build and validate a method. The base tableau must agree with the one
    /// reconstructed from the coupling stack.
    pub fn new(
        name: impl Into<String>,
        order: usize,
        embedded_order: usize,
        base: BaseTableau<Exact>,
        gammas: GammaStack<Exact>,
    ) -> Result<Self> {
        let name = name.into();
        let kind = validate(&name, &base, &gammas)?;
        let numeric = numeric(&base, &gammas);
        Ok(MriGarkMethod { name, order, embedded_order, kind, base, gammas, numeric })
    }

    /// Build a method from its coupling stack alone; the base tableau is reconstructed.
    pub fn from_gammas(
        name: impl Into<String>,
        order: usize,
        embedded_order: usize,
        gammas: GammaStack<Exact>,
    ) -> Result<Self> {
        let s = gammas.stages();
        if s == 0 {
            return Err(Error::InvalidMethod("empty coupling stack".into()));
        }
        let base = reconstruct_base(&gammas, s);
        Self::new(name, order, embedded_order, base, gammas)
    }

    pub fn stages(&self) -> usize {
        self.base.c.len()
    }

    pub fn numeric(&self) -> &NumericMethod {
        &self.numeric
    }

    pub fn has_embedded(&self) -> bool {
        self.gammas.gamma_hat.is_some()
    }
}

fn numeric(base: &BaseTableau<Exact>, gammas: &GammaStack<Exact>) -> NumericMethod {
    let s = base.c.len();
    let gamma: Vec<Matrix<f64>> = gammas.gamma.iter().map(|g| to_f64_mat(g)).collect();
    let gamma_hat: Option<Vec<Vec<f64>>> =
        gammas.gamma_hat.as_ref().map(|rows| rows.iter().map(|r| to_f64_vec(r)).collect());
    let slow_used = (0..s)
        .map(|j| {
            gammas.gamma.iter().any(|g| g.iter().any(|row| !row[j].is_zero()))
                || gammas.gamma_hat.iter().flatten().any(|row| !row[j].is_zero())
        })
        .collect();
    NumericMethod {
        c: to_f64_vec(&base.c),
        dc: to_f64_vec(&base.dc),
        a: to_f64_mat(&base.a),
        b: to_f64_vec(&base.b),
        b_hat: base.b_hat.as_ref().map(|v| to_f64_vec(v)),
        gamma,
        gamma_hat,
        gamma_bar: to_f64_mat(&gamma_bar(gammas)),
        gamma_hat_bar: gamma_hat_bar(gammas).map(|v| to_f64_vec(&v)),
        slow_used,
        stationary: base.dc.iter().map(Field::is_zero).collect(),
    }
}

fn validate(name: &str, base: &BaseTableau<Exact>, gammas: &GammaStack<Exact>) -> Result<MethodKind> {
    let bad = |msg: String| Err(Error::InvalidMethod(format!("{name}: {msg}")));
    let s = base.c.len();
    if s == 0 {
        return bad("no stages".into());
    }
    if base.a.len() != s || base.a.iter().any(|r| r.len() != s) || base.b.len() != s || base.dc.len() != s {
        return bad(format!("base tableau dimensions inconsistent with {s} stages"));
    }
    if base.b_hat.as_ref().is_some_and(|v| v.len() != s) {
        return bad("b_hat length".into());
    }
    if gammas.gamma.is_empty() {
        return bad("coupling stack has no matrices".into());
    }
    if gammas.gamma.iter().any(|g| g.len() != s || g.iter().any(|r| r.len() != s)) {
        return bad("coupling matrix dimensions".into());
    }
    if let Some(gh) = &gammas.gamma_hat {
        if gh.len() != gammas.gamma.len() || gh.iter().any(|r| r.len() != s) {
            return bad("embedded row dimensions".into());
        }
    }
    for (i, c) in base.c.iter().enumerate() {
        if c.is_negative() || (Exact::one() - c.clone()).is_negative() {
            return bad(format!("c[{i}] outside [0, 1]"));
        }
    }
    let dc = increments(&base.c);
    for i in 0..s {
        if !dc[i].close_to(&base.dc[i]) {
            return bad(format!("dc[{i}] does not match the abscissae"));
        }
        if dc[i].is_negative() {
            return bad(format!("abscissae decrease at stage {i}"));
        }
        if !sum(&base.a[i]).close_to(&base.c[i]) {
            return bad(format!("row sum of A[{i}] differs from c[{i}]"));
        }
    }
    if !sum(&base.b).close_to(&Exact::one()) {
        return bad("weights do not sum to 1".into());
    }
    if base.b_hat.as_ref().is_some_and(|bh| !sum(bh).close_to(&Exact::one())) {
        return bad("embedded weights do not sum to 1".into());
    }
    let mut implicit = false;
    for (k, g) in gammas.gamma.iter().enumerate() {
        for i in 0..s {
            for j in i + 2..s {
                if !g[i][j].is_zero() {
                    return bad(format!("Gamma^{k}[{i}][{j}] must be zero"));
                }
            }
            if i + 1 < s && !g[i][i + 1].is_zero() {
                if !base.dc[i].is_zero() {
                    return bad(format!("Gamma^{k}[{i}][{}] is nonzero on a stage with nonzero increment", i + 1));
                }
                implicit = true;
            }
        }
    }
    let rec = reconstruct_base(gammas, s);
    for i in 0..s {
        for j in 0..s {
            if !rec.a[i][j].close_to(&base.a[i][j]) {
                return bad(format!("A[{i}][{j}] differs from the value implied by the coupling stack"));
            }
        }
        if !rec.b[i].close_to(&base.b[i]) {
            return bad(format!("b[{i}] differs from the value implied by the coupling stack"));
        }
    }
    match (&rec.b_hat, &base.b_hat) {
        (Some(r), Some(b)) => {
            if let Some(j) = (0..s).find(|&j| !r[j].close_to(&b[j])) {
                return bad(format!("b_hat[{j}] differs from the value implied by the embedded row"));
            }
        }
        (None, None) => {}
        _ => return bad("b_hat and the embedded coupling row must be given together".into()),
    }
    Ok(if implicit { MethodKind::DecoupledImplicit } else { MethodKind::Explicit })
}
