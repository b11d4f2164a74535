//! Order-condition verification: internal consistency, classical base-method
//! conditions, and the order-3/order-4 coupling conditions.
//!
//! Every check is generic over [`Field`], so the same code runs exactly on
//! [`Exact`] coefficients and approximately on `f64`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{Exact, Field};
use crate::tableaux::{increments, reconstruct_base, BaseTableau, GammaStack, Matrix, MriGarkMethod};

/// Outcome of one algebraic condition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    pub id: String,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub pass: bool,
}

impl ConditionReport {
    /// The residual is formed in `T` before rounding, so exact checks report 0 exactly.
    pub fn new<T: Field>(id: impl Into<String>, lhs: T, rhs: T, tol: f64) -> Self {
        let residual = (lhs.clone() - rhs.clone()).to_f64().abs();
        ConditionReport { id: id.into(), lhs: lhs.to_f64(), rhs: rhs.to_f64(), residual, pass: residual <= tol }
    }
}

/// Quadrature coefficients of the exact-solution series, indexed by polynomial degree.
#[derive(Clone, Debug, PartialEq)]
pub struct BSeriesTables<T> {
    pub zeta: Vec<T>,
    pub omega: Vec<T>,
    pub xi: Vec<T>,
}

impl<T: Field> BSeriesTables<T> {
    /// Tables for degrees `0..=kmax`.
    pub fn new(kmax: usize) -> Self {
        let r = |k: usize, f: fn(i64) -> i64| T::from_ratio(1, f(k as i64));
        BSeriesTables {
            zeta: (0..=kmax).map(|k| r(k, |k| (k + 1) * (k + 2))).collect(),
            omega: (0..=kmax).map(|k| r(k, |k| (k + 1) * (k + 3))).collect(),
            xi: (0..=kmax).map(|k| r(k, |k| (k + 1) * (k + 2) * (k + 3))).collect(),
        }
    }
}

fn dot<T: Field>(x: &[T], y: &[T]) -> T {
    x.iter().zip(y).fold(
        T::zero(),
        |acc, (a, b)| {
            if a.is_zero() || b.is_zero() {
                acc
            } else {
                acc + a.clone() * b.clone()
            }
        },
    )
}

fn matvec<T: Field>(m: &[Vec<T>], v: &[T]) -> Vec<T> {
    m.iter().map(|row| dot(row, v)).collect()
}

fn hadamard<T: Field>(x: &[T], y: &[T]) -> Vec<T> {
    x.iter().zip(y).map(|(a, b)| a.clone() * b.clone()).collect()
}

fn ones<T: Field>(n: usize) -> Vec<T> {
    vec![T::one(); n]
}

/// `Γᵏ·1 = Δc` for `k = 0` and `Γᵏ·1 = 0` for `k ≥ 1`, one report per (k, row).
pub fn internal_consistency<T: Field>(base: &BaseTableau<T>, gammas: &GammaStack<T>, tol: f64) -> Vec<ConditionReport> {
    let s = base.c.len();
    let dc = increments(&base.c);
    let mut out = Vec::new();
    for (k, g) in gammas.gamma.iter().enumerate() {
        let sums = matvec(g, &ones(s));
        for (i, v) in sums.into_iter().enumerate() {
            let rhs = if k == 0 { dc[i].clone() } else { T::zero() };
            out.push(ConditionReport::new(format!("internal/gamma{k}/row{i}"), v, rhs, tol));
        }
    }
    if let Some(gh) = &gammas.gamma_hat {
        for (k, row) in gh.iter().enumerate() {
            let rhs = if k == 0 { dc[s - 1].clone() } else { T::zero() };
            out.push(ConditionReport::new(format!("internal/gamma_hat{k}"), dot(row, &ones(s)), rhs, tol));
        }
    }
    out
}

/// Stored base tableau against the one implied by the coupling stack; the
/// residual of each row is its largest entry difference.
pub fn gamma_bar_consistency<T: Field>(
    base: &BaseTableau<T>,
    gammas: &GammaStack<T>,
    tol: f64,
) -> Vec<ConditionReport> {
    let s = base.c.len();
    let rec = reconstruct_base(gammas, s);
    let worst = |x: &[T], y: &[T]| -> (T, T) {
        let mut best = (T::zero(), T::zero());
        let mut best_abs = -1.0;
        for (a, b) in x.iter().zip(y) {
            let d = (a.clone() - b.clone()).to_f64().abs();
            if d > best_abs {
                best_abs = d;
                best = (a.clone(), b.clone());
            }
        }
        best
    };
    let mut out = Vec::new();
    for i in 0..s {
        let (l, r) = worst(&rec.a[i], &base.a[i]);
        out.push(ConditionReport::new(format!("gamma_bar/A/row{i}"), l, r, tol));
    }
    let (l, r) = worst(&rec.b, &base.b);
    out.push(ConditionReport::new("gamma_bar/b", l, r, tol));
    if let (Some(rb), Some(bb)) = (&rec.b_hat, &base.b_hat) {
        let (l, r) = worst(rb, bb);
        out.push(ConditionReport::new("gamma_bar/b_hat", l, r, tol));
    }
    out
}

/// Classical conditions `(id, order, lhs, rhs)` for weights `w` through order `p`.
fn classical<T: Field>(a: &Matrix<T>, c: &[T], w: &[T], p: usize) -> Vec<(&'static str, T, T)> {
    let s = c.len();
    let c2 = hadamard(c, c);
    let ac = matvec(a, c);
    let mut out = vec![("1", dot(w, &ones(s)), T::one())];
    if p >= 2 {
        out.push(("c", dot(w, c), T::from_ratio(1, 2)));
    }
    if p >= 3 {
        out.push(("c2", dot(w, &c2), T::from_ratio(1, 3)));
        out.push(("Ac", dot(w, &ac), T::from_ratio(1, 6)));
    }
    if p >= 4 {
        out.push(("c3", dot(w, &hadamard(&c2, c)), T::from_ratio(1, 4)));
        out.push(("cAc", dot(w, &hadamard(c, &ac)), T::from_ratio(1, 8)));
        out.push(("Ac2", dot(w, &matvec(a, &c2)), T::from_ratio(1, 12)));
        out.push(("AAc", dot(w, &matvec(a, &ac)), T::from_ratio(1, 24)));
    }
    out
}

/// Classical Runge–Kutta conditions through order `p` for `b`, and through
/// `embedded_order` for `b_hat` when present.
pub fn base_order<T: Field>(
    base: &BaseTableau<T>,
    p: usize,
    embedded_order: usize,
    tol: f64,
) -> Result<Vec<ConditionReport>> {
    if !(1..=4).contains(&p) || embedded_order > 4 {
        return Err(Error::InvalidArgument(format!("order {p} outside 1..=4")));
    }
    let mut out: Vec<ConditionReport> = classical(&base.a, &base.c, &base.b, p)
        .into_iter()
        .map(|(id, l, r)| ConditionReport::new(format!("base/b.{id}"), l, r, tol))
        .collect();
    if let Some(bh) = &base.b_hat {
        if embedded_order >= 1 {
            out.extend(
                classical(&base.a, &base.c, bh, embedded_order)
                    .into_iter()
                    .map(|(id, l, r)| ConditionReport::new(format!("base/b_hat.{id}"), l, r, tol)),
            );
        }
    }
    Ok(out)
}

/// Highest order (0..=4) whose classical conditions hold for weights `w`.
pub fn classical_order<T: Field>(base: &BaseTableau<T>, w: &[T], tol: f64) -> usize {
    (1..=4)
        .take_while(|&p| classical(&base.a, &base.c, w, p).into_iter().all(|(_, l, r)| (l - r).to_f64().abs() <= tol))
        .last()
        .unwrap_or(0)
}

/// `𝔄 = A + Σ_k ζ_k Γᵏ`.
pub fn frak_a<T: Field>(base: &BaseTableau<T>, gammas: &GammaStack<T>) -> Matrix<T> {
    let tables = BSeriesTables::<T>::new(gammas.degree());
    let mut m = base.a.clone();
    for (k, g) in gammas.gamma.iter().enumerate() {
        for (mrow, grow) in m.iter_mut().zip(g) {
            for (x, y) in mrow.iter_mut().zip(grow) {
                if !y.is_zero() {
                    *x = x.clone() + tables.zeta[k].clone() * y.clone();
                }
            }
        }
    }
    m
}

/// `Δcᵀ 𝔄 c = 1/6`.
pub fn coupling_order3<T: Field>(base: &BaseTableau<T>, gammas: &GammaStack<T>, tol: f64) -> ConditionReport {
    let dc = increments(&base.c);
    let lhs = dot(&dc, &matvec(&frak_a(base, gammas), &base.c));
    ConditionReport::new("coupling3", lhs, T::from_ratio(1, 6), tol)
}

/// Auxiliary vectors of the order-4 conditions.
#[derive(Clone, Debug, PartialEq)]
pub struct Order4Helpers<T> {
    /// `c[i+1]² − c[i]²` with `c[s] = 1`.
    pub z: Vec<T>,
    /// `Δc[i] (1 − Σ_{ℓ≤i} b[ℓ])`.
    pub d: Vec<T>,
    /// `Σ_{j>i} Δc[j]²`.
    pub t: Vec<T>,
}

pub fn order4_helpers<T: Field>(base: &BaseTableau<T>) -> Order4Helpers<T> {
    let s = base.c.len();
    let dc = increments(&base.c);
    let next = |i: usize| if i + 1 < s { base.c[i + 1].clone() } else { T::one() };
    let z = (0..s).map(|i| next(i) * next(i) - base.c[i].clone() * base.c[i].clone()).collect();
    let mut partial = T::zero();
    let d = (0..s)
        .map(|i| {
            partial = partial.clone() + base.b[i].clone();
            dc[i].clone() * (T::one() - partial.clone())
        })
        .collect();
    let t = (0..s).map(|i| (i + 1..s).fold(T::zero(), |acc, j| acc + dc[j].clone() * dc[j].clone())).collect();
    Order4Helpers { z, d, t }
}

/// The five order-4 coupling conditions, labelled A, C, F, H and I.
pub fn coupling_order4<T: Field>(base: &BaseTableau<T>, gammas: &GammaStack<T>, tol: f64) -> Vec<ConditionReport> {
    let s = base.c.len();
    let c = &base.c;
    let a = &base.a;
    let dc = increments(c);
    let tables = BSeriesTables::<T>::new(gammas.degree());
    let fa = frak_a(base, gammas);
    let h = order4_helpers(base);
    let ac = matvec(a, c);
    let fac = matvec(&fa, c);
    let half = T::from_ratio(1, 2);

    let mut lhs_a = half.clone() * dot(&h.z, &ac);
    for (k, g) in gammas.gamma.iter().enumerate() {
        let w: Vec<T> = (0..s)
            .map(|i| dc[i].clone() * (tables.zeta[k].clone() * c[i].clone() + tables.omega[k].clone() * dc[i].clone()))
            .collect();
        lhs_a = lhs_a + dot(&w, &matvec(g, c));
    }

    let lhs_c = dot(&dc, &matvec(&fa, &hadamard(c, c)));
    let lhs_f = dot(&h.d, &fac);

    let mut mixed: Matrix<T> = a.iter().map(|r| r.iter().map(|x| half.clone() * x.clone()).collect()).collect();
    for (k, g) in gammas.gamma.iter().enumerate() {
        for (mrow, grow) in mixed.iter_mut().zip(g) {
            for (x, y) in mrow.iter_mut().zip(grow) {
                if !y.is_zero() {
                    *x = x.clone() + tables.xi[k].clone() * y.clone();
                }
            }
        }
    }
    let lhs_h = dot(&hadamard(&dc, &dc), &matvec(&mixed, c)) + dot(&h.t, &fac);
    let lhs_i = dot(&dc, &matvec(&fa, &ac));

    vec![
        ConditionReport::new("coupling4.A", lhs_a, T::from_ratio(1, 8), tol),
        ConditionReport::new("coupling4.C", lhs_c, T::from_ratio(1, 12), tol),
        ConditionReport::new("coupling4.F", lhs_f, T::from_ratio(1, 24), tol),
        ConditionReport::new("coupling4.H", lhs_h, T::from_ratio(1, 24), tol),
        ConditionReport::new("coupling4.I", lhs_i, T::from_ratio(1, 24), tol),
    ]
}

/// Double-precision copies of a method's coefficients for floating-point checks.
pub fn float_parts(m: &MriGarkMethod) -> (BaseTableau<f64>, GammaStack<f64>) {
    let v = |x: &[Exact]| x.iter().map(Field::to_f64).collect::<Vec<_>>();
    let mm = |x: &[Vec<Exact>]| x.iter().map(|r| v(r)).collect::<Vec<_>>();
    let base = BaseTableau {
        c: v(&m.base.c),
        a: mm(&m.base.a),
        b: v(&m.base.b),
        b_hat: m.base.b_hat.as_deref().map(v),
        dc: v(&m.base.dc),
    };
    let gammas = GammaStack {
        gamma: m.gammas.gamma.iter().map(|g| mm(g)).collect(),
        gamma_hat: m.gammas.gamma_hat.as_deref().map(mm),
    };
    (base, gammas)
}

/// Arithmetic used by the method-level checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arithmetic {
    Exact,
    Float,
}

pub fn check_internal_consistency(m: &MriGarkMethod, tol: f64) -> Vec<ConditionReport> {
    internal_consistency(&m.base, &m.gammas, tol)
}

pub fn check_base_order(m: &MriGarkMethod, p: usize, tol: f64) -> Result<Vec<ConditionReport>> {
    base_order(&m.base, p, m.embedded_order.min(p), tol)
}

pub fn check_coupling_order3(m: &MriGarkMethod, tol: f64) -> ConditionReport {
    coupling_order3(&m.base, &m.gammas, tol)
}

pub fn check_coupling_order4(m: &MriGarkMethod, tol: f64) -> Vec<ConditionReport> {
    coupling_order4(&m.base, &m.gammas, tol)
}

fn suite<T: Field>(
    base: &BaseTableau<T>,
    gammas: &GammaStack<T>,
    p: usize,
    embedded_order: usize,
    tol: f64,
) -> Result<Vec<ConditionReport>> {
    let mut out = internal_consistency(base, gammas, tol);
    out.extend(gamma_bar_consistency(base, gammas, tol));
    out.extend(base_order(base, p, embedded_order.min(p), tol)?);
    if p >= 3 {
        out.push(coupling_order3(base, gammas, tol));
    }
    if p >= 4 {
        out.extend(coupling_order4(base, gammas, tol));
    }
    Ok(out)
}

/// Every check relevant to order `p`: internal consistency, coupling/base
/// consistency, classical base conditions and the coupling conditions.
pub fn check_all(m: &MriGarkMethod, p: usize, tol: f64, arith: Arithmetic) -> Result<Vec<ConditionReport>> {
    match arith {
        Arithmetic::Exact => suite(&m.base, &m.gammas, p, m.embedded_order, tol),
        Arithmetic::Float => {
            let (base, gammas) = float_parts(m);
            suite(&base, &gammas, p, m.embedded_order, tol)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tableaux::{builtin, builtin_names, erk22, erk33};

    fn q(p: i64, d: i64) -> Exact {
        Exact::ratio(p, d)
    }

    #[test]
    fn tables_match_listed_values() {
        let t = BSeriesTables::<Exact>::new(5);
        let z: Vec<Exact> = [2, 6, 12, 20, 30, 42].iter().map(|&d| q(1, d)).collect();
        let o: Vec<Exact> = [3, 8, 15, 24, 35, 48].iter().map(|&d| q(1, d)).collect();
        let x: Vec<Exact> = [6, 24, 60, 120, 210, 336].iter().map(|&d| q(1, d)).collect();
        assert_eq!((t.zeta, t.omega, t.xi), (z, o, x));
    }

    /// Iterated integrals of tᵏ evaluated by exact polynomial antiderivatives.
    #[test]
    fn tables_match_iterated_integrals() {
        // ∫₀¹∫₀^θ tᵏ dt dθ = ∫₀¹ θ^{k+1}/(k+1) dθ, and so on; each antiderivative is a monomial.
        let t = BSeriesTables::<Exact>::new(8);
        for k in 0..=8i64 {
            let inner = |p: i64| q(1, p + 1); // ∫₀^θ t^p dt = θ^{p+1}/(p+1)
            let zeta = inner(k) * q(1, k + 2);
            let omega = inner(k) * q(1, k + 3);
            let xi = inner(k) * q(1, k + 2) * q(1, k + 3);
            assert_eq!(t.zeta[k as usize], zeta);
            assert_eq!(t.omega[k as usize], omega);
            assert_eq!(t.xi[k as usize], xi);
        }
    }

    #[test]
    fn erk45a_internal_consistency_rows() {
        let m = builtin("mri-erk45a").unwrap();
        let reps = check_internal_consistency(&m, 0.0);
        assert!(reps.iter().all(|r| r.pass && r.residual == 0.0));
        let g0: Vec<f64> = reps.iter().filter(|r| r.id.starts_with("internal/gamma0/")).map(|r| r.lhs).collect();
        assert_eq!(g0, vec![0.2; 5]);
    }

    #[test]
    fn identity_first_degree_fails() {
        let m = builtin("mri-erk22a").unwrap();
        let mut g = m.gammas.clone();
        g.gamma.push(vec![vec![q(1, 1), q(0, 1)], vec![q(0, 1), q(1, 1)]]);
        let reps = internal_consistency(&m.base, &g, 0.0);
        let k1: Vec<_> = reps.iter().filter(|r| r.id.starts_with("internal/gamma1/")).collect();
        assert_eq!(k1.len(), 2);
        assert!(k1.iter().all(|r| !r.pass && r.residual == 1.0));
    }

    #[test]
    fn irk21a_row_sums_match_increments() {
        let m = builtin("mri-irk21a").unwrap();
        let reps = check_internal_consistency(&m, 0.0);
        let lhs: Vec<f64> = reps.iter().filter(|r| r.id.starts_with("internal/gamma0/")).map(|r| r.lhs).collect();
        assert_eq!(lhs, vec![1.0, 0.0, 0.0]);
        assert!(reps.iter().all(|r| r.pass));
    }

    #[test]
    fn base_order_examples() {
        let m = builtin("mri-erk33a").unwrap();
        let reps = base_order(&m.base, 3, 0, 0.0).unwrap();
        assert_eq!(reps.len(), 4);
        assert!(reps.iter().all(|r| r.pass));
        let m = builtin("mri-esdirk46a").unwrap();
        let reps = base_order(&m.base, 4, 0, 0.0).unwrap();
        assert_eq!(reps.len(), 8);
        assert!(reps.iter().all(|r| r.pass));
        let euler = BaseTableau { c: vec![0.0], a: vec![vec![0.0]], b: vec![1.0], b_hat: None, dc: vec![1.0] };
        let reps = base_order(&euler, 2, 0, 1e-12).unwrap();
        assert!(reps[0].pass && !reps[1].pass);
        assert!(base_order(&euler, 5, 0, 1e-12).is_err());
        assert!(base_order(&euler, 0, 0, 1e-12).is_err());
    }

    #[test]
    fn frak_a_examples() {
        let m = builtin("mri-erk22a").unwrap();
        assert_eq!(frak_a(&m.base, &m.gammas), vec![vec![q(1, 4), q(0, 1)], vec![q(1, 4), q(1, 2)]]);
        let zero = GammaStack { gamma: vec![vec![vec![q(0, 1); 2]; 2]], gamma_hat: None };
        assert_eq!(frak_a(&m.base, &zero), m.base.a);
        let only1 = GammaStack {
            gamma: vec![vec![vec![q(0, 1); 2]; 2], vec![vec![q(1, 1), q(0, 1)], vec![q(0, 1), q(1, 1)]]],
            gamma_hat: None,
        };
        let fa = frak_a(&m.base, &only1);
        assert_eq!(fa[0][0], q(1, 6));
        assert_eq!(fa[1][0], q(1, 2));
    }

    #[test]
    fn coupling3_examples() {
        let r = check_coupling_order3(&builtin("mri-erk33a").unwrap(), 0.0);
        assert!(r.pass && r.residual == 0.0);
        assert!(!check_coupling_order3(&builtin("mri-erk22a").unwrap(), 1e-12).pass);
        let r = check_coupling_order3(&builtin("mri-esdirk34a").unwrap(), 0.0);
        assert!(r.pass && r.residual == 0.0);
    }

    #[test]
    fn coupling4_examples() {
        let reps = check_coupling_order4(&builtin("mri-erk45a").unwrap(), 0.0);
        assert!(reps.iter().all(|r| r.pass && r.residual == 0.0), "{reps:?}");
        let reps = check_coupling_order4(&builtin("mri-erk33a").unwrap(), 1e-12);
        assert!(reps.iter().any(|r| !r.pass));
    }

    #[test]
    fn helper_z_equidistant() {
        let m = builtin("mri-erk45a").unwrap();
        let h = order4_helpers(&m.base);
        assert_eq!(h.z, [1, 3, 5, 7, 9].iter().map(|&k| q(k, 25)).collect::<Vec<_>>());
        assert_eq!(h.t[4], q(0, 1));
        assert_eq!(h.t[0], q(4, 25));
    }

    #[test]
    fn declared_orders_hold_exactly() {
        for name in builtin_names() {
            let m = builtin(name).unwrap();
            let reps = check_all(&m, m.order, 0.0, Arithmetic::Exact).unwrap();
            for r in &reps {
                assert!(r.pass && r.residual == 0.0, "{name}: {r:?}");
            }
            let c3 = check_coupling_order3(&m, 1e-12).pass;
            assert_eq!(c3, m.order >= 3, "{name}");
            let c4 = check_coupling_order4(&m, 1e-12).iter().all(|r| r.pass);
            assert_eq!(c4, m.order >= 4, "{name}");
        }
    }

    #[test]
    fn embedded_orders_are_sharp() {
        for name in builtin_names() {
            let m = builtin(name).unwrap();
            let bh = m.base.b_hat.clone().unwrap();
            let got = classical_order(&m.base, &bh, 0.0);
            // The fourth-order embedded weights of the explicit order-4 method coincide with b.
            let expected = if *name == "mri-erk45a" { 4 } else { m.embedded_order };
            assert_eq!(got, expected, "{name}");
        }
    }

    #[test]
    fn float_and_exact_agree() {
        for name in builtin_names() {
            let m = builtin(name).unwrap();
            let e = check_all(&m, m.order, 1e-12, Arithmetic::Exact).unwrap();
            let f = check_all(&m, m.order, 1e-12, Arithmetic::Float).unwrap();
            assert_eq!(e.len(), f.len());
            for (x, y) in e.iter().zip(&f) {
                assert_eq!(x.id, y.id);
                assert!(y.pass, "{name} {}", y.id);
                if x.id.starts_with("gamma_bar") {
                    assert!(y.residual < 1e-12);
                } else {
                    assert!((x.lhs - y.lhs).abs() < 1e-10, "{name} {}", x.id);
                }
            }
        }
    }

    #[test]
    fn families_keep_their_order() {
        for c2 in [q(1, 3), q(2, 3), q(1, 1)] {
            let m = erk22(c2).unwrap();
            assert!(check_all(&m, 2, 0.0, Arithmetic::Exact).unwrap().iter().all(|r| r.pass));
        }
        for d in [q(0, 1), q(1, 5), q(-3, 4)] {
            let m = erk33(d).unwrap();
            assert!(check_all(&m, 3, 0.0, Arithmetic::Exact).unwrap().iter().all(|r| r.pass));
        }
    }
}
