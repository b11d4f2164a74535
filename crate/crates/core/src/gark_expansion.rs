//! Expansion of an MRI-GARK method plus a concrete fast Runge–Kutta method into
//! a two-partition GARK tableau, and an order check over bi-colored trees.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::field::{Exact, Field};
use crate::order_conditions::{float_parts, ConditionReport};
use crate::tableaux::{increments, BaseTableau, GammaStack, Matrix, MriGarkMethod};

/// Fast Runge–Kutta method used to resolve the inner ODE.
#[derive(Clone, Debug, PartialEq)]
pub struct FastRK<T> {
    pub name: String,
    pub a: Matrix<T>,
    pub b: Vec<T>,
    pub c: Vec<T>,
    pub order: usize,
}

impl<T: Field> FastRK<T> {
    pub fn new(name: &str, a: Matrix<T>, b: Vec<T>, order: usize) -> Result<Self> {
        let s = b.len();
        if a.len() != s || a.iter().any(|r| r.len() != s) {
            return Err(Error::InvalidArgument(format!("{name}: A must be {s}x{s}")));
        }
        let total = b.iter().cloned().fold(T::zero(), |x, y| x + y);
        if !total.close_to(&T::one()) {
            return Err(Error::InvalidArgument(format!("{name}: weights do not sum to 1")));
        }
        let c = a.iter().map(|r| r.iter().cloned().fold(T::zero(), |x, y| x + y)).collect();
        Ok(FastRK { name: name.to_string(), a, b, c, order })
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }

    fn rational(name: &str, a: &[&[(i64, i64)]], b: &[(i64, i64)], order: usize) -> Self {
        let q = |&(p, d): &(i64, i64)| T::from_ratio(p, d);
        let s = b.len();
        let a = a
            .iter()
            .map(|r| {
                let mut row: Vec<T> = r.iter().map(q).collect();
                row.resize(s, T::zero());
                row
            })
            .collect();
        Self::new(name, a, b.iter().map(q).collect(), order).expect("fixed tableau")
    }

    pub fn euler() -> Self {
        Self::rational("euler", &[&[]], &[(1, 1)], 1)
    }

    pub fn midpoint() -> Self {
        Self::rational("midpoint", &[&[], &[(1, 2)]], &[(0, 1), (1, 1)], 2)
    }

    /// Kutta's third-order method.
    pub fn kutta3() -> Self {
        Self::rational("kutta3", &[&[], &[(1, 2)], &[(-1, 1), (2, 1)]], &[(1, 6), (2, 3), (1, 6)], 3)
    }

    /// The classical fourth-order method.
    pub fn rk4() -> Self {
        Self::rational(
            "rk4",
            &[&[], &[(1, 2)], &[(0, 1), (1, 2)], &[(0, 1), (0, 1), (1, 1)]],
            &[(1, 6), (1, 3), (1, 3), (1, 6)],
            4,
        )
    }

    /// Kutta's 3/8 rule.
    pub fn rule38() -> Self {
        Self::rational(
            "rule38",
            &[&[], &[(1, 3)], &[(-1, 3), (1, 1)], &[(1, 1), (-1, 1), (1, 1)]],
            &[(1, 8), (3, 8), (3, 8), (1, 8)],
            4,
        )
    }
}

/// Two-partition GARK tableau. Fast stage `(i, l)` has index `i·s_f + l`.
#[derive(Clone, Debug, PartialEq)]
pub struct GarkTableau<T> {
    pub aff: Matrix<T>,
    pub afs: Matrix<T>,
    pub asf: Matrix<T>,
    pub ass: Matrix<T>,
    pub bf: Vec<T>,
    pub bs: Vec<T>,
}

fn row_sums<T: Field>(m: &Matrix<T>) -> Vec<T> {
    m.iter().map(|r| r.iter().cloned().fold(T::zero(), |x, y| x + y)).collect()
}

impl<T: Field> GarkTableau<T> {
    pub fn cff(&self) -> Vec<T> {
        row_sums(&self.aff)
    }
    pub fn cfs(&self) -> Vec<T> {
        row_sums(&self.afs)
    }
    pub fn csf(&self) -> Vec<T> {
        row_sums(&self.asf)
    }
    pub fn css(&self) -> Vec<T> {
        row_sums(&self.ass)
    }
}

/// Assemble the GARK blocks from coefficients in any field.
pub fn expand_parts<T: Field>(
    base: &BaseTableau<T>,
    gammas: &GammaStack<T>,
    fast: &FastRK<T>,
) -> Result<GarkTableau<T>> {
    let s = base.c.len();
    let sf = fast.stages();
    if gammas.stages() != s || fast.a.len() != sf {
        return Err(Error::InvalidArgument("dimension mismatch between method and fast tableau".into()));
    }
    let dc = increments(&base.c);
    let n = s * sf;

    let mut aff = vec![vec![T::zero(); n]; n];
    for i in 0..s {
        for l in 0..sf {
            let r = i * sf + l;
            for lam in 0..i {
                for m in 0..sf {
                    aff[r][lam * sf + m] = dc[lam].clone() * fast.b[m].clone();
                }
            }
            for m in 0..sf {
                aff[r][i * sf + m] = dc[i].clone() * fast.a[l][m].clone();
            }
        }
    }

    // (A^ff c^{f,k})_l for each degree k.
    let weights: Vec<Vec<T>> = (0..gammas.gamma.len())
        .map(|k| {
            (0..sf)
                .map(|l| {
                    (0..sf).fold(T::zero(), |acc, m| {
                        let mut ck = T::one();
                        for _ in 0..k {
                            ck = ck * fast.c[m].clone();
                        }
                        acc + fast.a[l][m].clone() * ck
                    })
                })
                .collect()
        })
        .collect();
    let mut afs = vec![vec![T::zero(); s]; n];
    for i in 0..s {
        for l in 0..sf {
            for j in 0..s {
                let mut v = base.a[i][j].clone();
                for (k, g) in gammas.gamma.iter().enumerate() {
                    if !g[i][j].is_zero() {
                        v = v + weights[k][l].clone() * g[i][j].clone();
                    }
                }
                afs[i * sf + l][j] = v;
            }
        }
    }

    let mut asf = vec![vec![T::zero(); n]; s];
    for (ell, row) in asf.iter_mut().enumerate() {
        for lam in 0..ell {
            for m in 0..sf {
                row[lam * sf + m] = dc[lam].clone() * fast.b[m].clone();
            }
        }
    }

    let bf = (0..n).map(|r| dc[r / sf].clone() * fast.b[r % sf].clone()).collect();
    Ok(GarkTableau { aff, afs, asf, ass: base.a.clone(), bf, bs: base.b.clone() })
}

/// Expansion in double precision.
pub fn expand(method: &MriGarkMethod, fast: &FastRK<f64>) -> Result<GarkTableau<f64>> {
    let (base, gammas) = float_parts(method);
    expand_parts(&base, &gammas, fast)
}

/// Expansion in exact arithmetic.
pub fn expand_exact(method: &MriGarkMethod, fast: &FastRK<Exact>) -> Result<GarkTableau<Exact>> {
    expand_parts(&method.base, &method.gammas, fast)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Color {
    Fast,
    Slow,
}

/// Rooted tree with colored vertices, children kept sorted so equal trees compare equal.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ColoredTree {
    pub color: Color,
    pub children: Vec<ColoredTree>,
}

impl ColoredTree {
    pub fn leaf(color: Color) -> Self {
        ColoredTree { color, children: Vec::new() }
    }

    pub fn new(color: Color, mut children: Vec<ColoredTree>) -> Self {
        children.sort();
        ColoredTree { color, children }
    }

    pub fn order(&self) -> usize {
        1 + self.children.iter().map(ColoredTree::order).sum::<usize>()
    }

    /// `γ(τ) = |τ| ∏ γ(children)`.
    pub fn density(&self) -> u64 {
        self.order() as u64 * self.children.iter().map(ColoredTree::density).product::<u64>()
    }

    /// Every tree obtained by attaching one new leaf of either color.
    fn grow(&self) -> Vec<ColoredTree> {
        let mut out = Vec::new();
        for color in [Color::Fast, Color::Slow] {
            let mut kids = self.children.clone();
            kids.push(ColoredTree::leaf(color));
            out.push(ColoredTree::new(self.color, kids));
        }
        for (idx, child) in self.children.iter().enumerate() {
            for g in child.grow() {
                let mut kids = self.children.clone();
                kids[idx] = g;
                out.push(ColoredTree::new(self.color, kids));
            }
        }
        out
    }
}

impl fmt::Display for ColoredTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self.color {
            Color::Fast => "f",
            Color::Slow => "s",
        })?;
        if !self.children.is_empty() {
            f.write_str("[")?;
            for (i, c) in self.children.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{c}")?;
            }
            f.write_str("]")?;
        }
        Ok(())
    }
}

/// All bi-colored trees with at most `p` vertices, sorted by order.
pub fn colored_trees(p: usize) -> Result<Vec<ColoredTree>> {
    if !(1..=4).contains(&p) {
        return Err(Error::InvalidArgument(format!("tree order {p} outside 1..=4")));
    }
    let mut level: BTreeSet<ColoredTree> = [Color::Fast, Color::Slow].into_iter().map(ColoredTree::leaf).collect();
    let mut out: Vec<ColoredTree> = level.iter().cloned().collect();
    for _ in 1..p {
        level = level.iter().flat_map(ColoredTree::grow).collect();
        out.extend(level.iter().cloned());
    }
    Ok(out)
}

/// Number of trees of each exact order `1..=p`.
pub fn tree_counts(p: usize) -> Result<Vec<usize>> {
    let trees = colored_trees(p)?;
    Ok((1..=p).map(|n| trees.iter().filter(|t| t.order() == n).count()).collect())
}

fn block<'a, T>(tab: &'a GarkTableau<T>, row: Color, col: Color) -> &'a Matrix<T> {
    match (row, col) {
        (Color::Fast, Color::Fast) => &tab.aff,
        (Color::Fast, Color::Slow) => &tab.afs,
        (Color::Slow, Color::Fast) => &tab.asf,
        (Color::Slow, Color::Slow) => &tab.ass,
    }
}

/// Stage weight vector `Φ` of a subtree, in the partition of its root color.
fn elementary<T: Field>(tab: &GarkTableau<T>, tree: &ColoredTree) -> Vec<T> {
    let n = match tree.color {
        Color::Fast => tab.bf.len(),
        Color::Slow => tab.bs.len(),
    };
    let mut phi = vec![T::one(); n];
    for child in &tree.children {
        let inner = elementary(tab, child);
        let m = block(tab, tree.color, child.color);
        for (p, row) in phi.iter_mut().zip(m) {
            let v = row.iter().zip(&inner).fold(
                T::zero(),
                |acc, (a, x)| {
                    if a.is_zero() {
                        acc
                    } else {
                        acc + a.clone() * x.clone()
                    }
                },
            );
            *p = p.clone() * v;
        }
    }
    phi
}

/// `b^{σ}ᵀ Φ(τ)` for a tree with root color σ.
pub fn elementary_weight<T: Field>(tab: &GarkTableau<T>, tree: &ColoredTree) -> T {
    let b = match tree.color {
        Color::Fast => &tab.bf,
        Color::Slow => &tab.bs,
    };
    b.iter().zip(elementary(tab, tree)).fold(T::zero(), |acc, (w, x)| acc + w.clone() * x)
}

/// One report per bi-colored tree of order at most `p`, keyed `tree/<signature>`.
pub fn check_gark_order<T: Field>(tab: &GarkTableau<T>, p: usize, tol: f64) -> Result<Vec<ConditionReport>> {
    Ok(colored_trees(p)?
        .iter()
        .map(|t| {
            let rhs = T::from_ratio(1, t.density() as i64);
            ConditionReport::new(format!("tree/{t}"), elementary_weight(tab, t), rhs, tol)
        })
        .collect())
}

/// Reports for trees of exactly order `p`.
pub fn check_gark_exact_order<T: Field>(tab: &GarkTableau<T>, p: usize, tol: f64) -> Result<Vec<ConditionReport>> {
    let all = check_gark_order(tab, p, tol)?;
    let trees = colored_trees(p)?;
    Ok(all.into_iter().zip(trees).filter(|(_, t)| t.order() == p).map(|(r, _)| r).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tableaux::{builtin, builtin_names};

    #[test]
    fn tree_counts_by_order() {
        assert_eq!(tree_counts(4).unwrap(), vec![2, 4, 14, 52]);
        assert!(colored_trees(5).is_err());
        assert!(colored_trees(0).is_err());
    }

    #[test]
    fn densities() {
        use Color::*;
        let t = ColoredTree::new(
            Fast,
            vec![ColoredTree::new(Slow, vec![ColoredTree::leaf(Fast)]), ColoredTree::leaf(Slow)],
        );
        assert_eq!(t.order(), 4);
        assert_eq!(t.density(), 8);
        assert_eq!(t.to_string(), "f[s,s[f]]");
        let tall = ColoredTree::new(
            Slow,
            vec![ColoredTree::new(Slow, vec![ColoredTree::new(Slow, vec![ColoredTree::leaf(Slow)])])],
        );
        assert_eq!(tall.density(), 24);
        let bushy = ColoredTree::new(Fast, vec![ColoredTree::leaf(Fast); 3]);
        assert_eq!(bushy.density(), 4);
    }

    #[test]
    fn signatures_are_unique() {
        let trees = colored_trees(4).unwrap();
        let sigs: BTreeSet<String> = trees.iter().map(ToString::to_string).collect();
        assert_eq!(sigs.len(), trees.len());
    }

    #[test]
    fn fast_methods_have_their_order() {
        for fast in [FastRK::<Exact>::euler(), FastRK::midpoint(), FastRK::kutta3(), FastRK::rk4(), FastRK::rule38()] {
            // A one-partition check: every single-colored fast tree through the method's order.
            let tab = GarkTableau {
                aff: fast.a.clone(),
                afs: vec![vec![]; fast.stages()],
                asf: vec![],
                ass: vec![],
                bf: fast.b.clone(),
                bs: vec![],
            };
            for t in colored_trees(4).unwrap() {
                if format!("{t}").contains('s') {
                    continue;
                }
                let ok = elementary_weight(&tab, &t) == Exact::ratio(1, t.density() as i64);
                assert!(ok || t.order() > fast.order, "{} {t}", fast.name);
            }
        }
    }

    #[test]
    fn erk22a_with_rk4_blocks() {
        let m = builtin("mri-erk22a").unwrap();
        let tab = expand_exact(&m, &FastRK::rk4()).unwrap();
        assert_eq!(tab.aff.len(), 8);
        let h = Exact::ratio(1, 2);
        assert_eq!(tab.ass, vec![vec![Exact::zero(), Exact::zero()], vec![h.clone(), Exact::zero()]]);
        let sum = tab.bf.iter().cloned().fold(Exact::zero(), |a, b| a + b);
        assert_eq!(sum, Exact::one());
        let bc = tab.bf.iter().zip(tab.cff()).fold(Exact::zero(), |a, (x, y)| a + x.clone() * y);
        assert_eq!(bc, h);
    }

    #[test]
    fn abscissae_relations() {
        for name in builtin_names() {
            let m = builtin(name).unwrap();
            let fast = FastRK::<Exact>::rule38();
            let tab = expand_exact(&m, &fast).unwrap();
            let sf = fast.stages();
            for (r, v) in tab.cff().into_iter().enumerate() {
                let (i, l) = (r / sf, r % sf);
                assert_eq!(v, m.base.c[i].clone() + m.base.dc[i].clone() * fast.c[l].clone(), "{name}");
            }
            assert_eq!(tab.csf(), m.base.c, "{name}");
            assert_eq!(tab.css(), m.base.c, "{name}");
            assert_eq!(tab.cfs(), tab.cff(), "{name}");
        }
    }

    #[test]
    fn euler_like_single_stage() {
        let base = BaseTableau { c: vec![0.0], a: vec![vec![0.0]], b: vec![1.0], b_hat: None, dc: vec![1.0] };
        let gammas = GammaStack { gamma: vec![vec![vec![1.0]]], gamma_hat: None };
        let tab = expand_parts(&base, &gammas, &FastRK::euler()).unwrap();
        let reps = check_gark_order(&tab, 1, 1e-14).unwrap();
        assert_eq!(reps.len(), 2);
        assert!(reps.iter().all(|r| r.pass));
    }

    #[test]
    fn erk22a_order_two_not_three() {
        let tab = expand(&builtin("mri-erk22a").unwrap(), &FastRK::rk4()).unwrap();
        assert!(check_gark_order(&tab, 2, 1e-12).unwrap().iter().all(|r| r.pass));
        assert!(check_gark_exact_order(&tab, 3, 1e-12).unwrap().iter().any(|r| !r.pass));
    }

    #[test]
    fn erk45a_all_fourth_order_trees_exactly() {
        let tab = expand_exact(&builtin("mri-erk45a").unwrap(), &FastRK::rk4()).unwrap();
        let reps = check_gark_order(&tab, 4, 0.0).unwrap();
        assert_eq!(reps.len(), 72);
        assert!(reps.iter().all(|r| r.pass), "{:?}", reps.iter().filter(|r| !r.pass).collect::<Vec<_>>());
    }

    #[test]
    fn verdicts_do_not_depend_on_fast_method() {
        for name in builtin_names() {
            let m = builtin(name).unwrap();
            let p = m.order;
            let a = check_gark_order(&expand(&m, &FastRK::rk4()).unwrap(), p, 1e-12).unwrap();
            let b = check_gark_order(&expand(&m, &FastRK::rule38()).unwrap(), p, 1e-12).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!(x.pass && y.pass, "{name} {}", x.id);
            }
        }
    }

    #[test]
    fn low_fast_order_is_visible() {
        let tab = expand(&builtin("mri-erk33a").unwrap(), &FastRK::midpoint()).unwrap();
        let reps = check_gark_exact_order(&tab, 3, 1e-12).unwrap();
        assert!(reps.iter().any(|r| !r.pass && !r.id.contains('s')));
    }
}
