//! Built-in method registry.
//!
//! The decoupled implicit methods are written in condensed form: only the
//! odd-numbered (1-based) stage columns carry coefficients, and the condensed
//! entries are spread onto columns 0, 2, 4, ... of the full layout.

use super::{increments, BaseTableau, GammaStack, Matrix, MriGarkMethod};
use crate::error::{Error, Result};
use crate::field::{Exact, Field};

const NAMES: [&str; 8] = [
    "mri-erk22a",
    "mri-erk22b",
    "mri-erk33a",
    "mri-erk45a",
    "mri-esdirk34a",
    "mri-esdirk46a",
    "mri-irk21a",
    "mri-sdirk33a",
];

/// Registry names in sorted order.
pub fn builtin_names() -> &'static [&'static str] {
    &NAMES
}

/// Look up a built-in method by name.
pub fn builtin(name: &str) -> Result<MriGarkMethod> {
    let m = match name {
        "mri-erk22a" => erk22_named(name, q(1, 2)),
        "mri-erk22b" => erk22_named(name, q(1, 1)),
        "mri-erk33a" => erk33_named(name, q(-1, 2)),
        "mri-erk45a" => erk45a(),
        "mri-irk21a" => irk21a(),
        "mri-esdirk34a" => esdirk34a(),
        "mri-sdirk33a" => sdirk33a(),
        "mri-esdirk46a" => esdirk46a(),
        _ => {
            return Err(Error::UnknownMethod {
                name: name.to_string(),
                available: NAMES.iter().map(|s| s.to_string()).collect(),
            })
        }
    };
    m
}

fn q(p: i64, d: i64) -> Exact {
    Exact::ratio(p, d)
}

fn z() -> Exact {
    Exact::zero()
}

fn lam() -> Exact {
    Exact::lambda()
}

/// Integer polynomial in λ, lowest degree first.
fn lp(coeffs: &[i64]) -> Exact {
    Exact::lambda_poly(coeffs)
}

fn row(v: &[(i64, i64)]) -> Vec<Exact> {
    v.iter().map(|&(p, d)| q(p, d)).collect()
}

/// Pad each row of a lower-triangular listing with zeros to width `s`.
fn lower(rows: Vec<Vec<Exact>>, s: usize) -> Matrix<Exact> {
    rows.into_iter()
        .map(|mut r| {
            r.resize(s, z());
            r
        })
        .collect()
}

/// Spread condensed entries onto the odd-numbered stage columns of a width-`s` row.
fn spread(r: Vec<Exact>, s: usize) -> Vec<Exact> {
    let mut full = vec![z(); s];
    for (m, v) in r.into_iter().enumerate() {
        full[2 * m] = v;
    }
    full
}

fn spread_rows(rows: Vec<Vec<Exact>>, s: usize) -> Matrix<Exact> {
    rows.into_iter().map(|r| spread(r, s)).collect()
}

fn assemble(
    name: &str,
    order: usize,
    embedded_order: usize,
    a: Matrix<Exact>,
    b: Vec<Exact>,
    b_hat: Option<Vec<Exact>>,
    gamma: Vec<Matrix<Exact>>,
    gamma_hat: Vec<Vec<Exact>>,
) -> Result<MriGarkMethod> {
    let c: Vec<Exact> = a.iter().map(|r| super::sum(r)).collect();
    let dc = increments(&c);
    let s = c.len();
    // Without a listed b̂, the embedded weights follow from the embedded coupling row.
    let b_hat = b_hat.unwrap_or_else(|| {
        let ghb = super::integrate_vec(&gamma_hat);
        (0..s).map(|j| a[s - 1][j].clone() + ghb[j].clone()).collect()
    });
    let base = BaseTableau { c, a, b, b_hat: Some(b_hat), dc };
    let gammas = GammaStack { gamma, gamma_hat: Some(gamma_hat) };
    MriGarkMethod::new(name, order, embedded_order, base, gammas)
}

/// Second-order explicit family with free abscissa `c2 ∈ (0, 1]`.
pub fn erk22(c2: Exact) -> Result<MriGarkMethod> {
    let name = format!("mri-erk22(c2={c2})");
    erk22_named(&name, c2)
}

fn erk22_named(name: &str, c2: Exact) -> Result<MriGarkMethod> {
    let c2f = c2.to_f64();
    if !(c2f > 0.0 && c2f <= 1.0) {
        return Err(Error::InvalidArgument(format!("c2 = {c2} outside (0, 1]")));
    }
    let two_c2 = Exact::int(2) * c2.clone();
    let a = vec![vec![z(), z()], vec![c2.clone(), z()]];
    let b = vec![(two_c2.clone() - Exact::one()) / two_c2.clone(), Exact::one() / two_c2.clone()];
    let b_hat = vec![Exact::one(), z()];
    let g21 = -(Exact::int(2) * c2.clone() * c2.clone() - two_c2.clone() + Exact::one()) / two_c2.clone();
    let g0 = vec![vec![c2.clone(), z()], vec![g21, Exact::one() / two_c2]];
    let gh = vec![Exact::one() - c2, z()];
    assemble(name, 2, 1, a, b, Some(b_hat), vec![g0], vec![gh])
}

/// Third-order explicit family with equidistant abscissae and free parameter `δ`.
pub fn erk33(delta: Exact) -> Result<MriGarkMethod> {
    let name = format!("mri-erk33(delta={delta})");
    erk33_named(&name, delta)
}

fn erk33_named(name: &str, d: Exact) -> Result<MriGarkMethod> {
    let six_d = Exact::int(6) * d.clone();
    let two_d = Exact::int(2) * d.clone();
    let a = lower(vec![vec![], vec![q(1, 3)], vec![z(), q(2, 3)]], 3);
    let b = row(&[(1, 4), (0, 1), (3, 4)]);
    let b_hat = row(&[(1, 12), (1, 3), (7, 12)]);
    let g0 = vec![
        vec![q(1, 3), z(), z()],
        vec![(-six_d.clone() - Exact::int(7)) / Exact::int(12), (six_d.clone() + Exact::int(11)) / Exact::int(12), z()],
        vec![z(), (six_d - Exact::int(5)) / Exact::int(12), (Exact::int(3) - two_d.clone()) / Exact::int(4)],
    ];
    let h = (two_d + Exact::one()) / Exact::int(2);
    let g1 = vec![vec![z(), z(), z()], vec![h.clone(), -h.clone(), z()], vec![q(1, 2), -h, d]];
    let gh = vec![row(&[(1, 12), (-1, 3), (7, 12)]), vec![z(), z(), z()]];
    assemble(name, 3, 2, a, b, Some(b_hat), vec![g0, g1], gh)
}

/// The embedded weights follow from the embedded coupling row, which
/// integrates to the main weights `b`.
fn erk45a() -> Result<MriGarkMethod> {
    let a = lower(
        vec![
            vec![],
            row(&[(1, 5)]),
            row(&[(1, 32), (59, 160)]),
            row(&[(-1, 2), (171, 64), (-503, 320)]),
            row(&[(125773, 379760), (-183399, 379760), (175277, 189880), (136, 4747)]),
        ],
        5,
    );
    let b = row(&[(1, 32), (1, 3), (11, 48), (-1, 12), (47, 96)]);
    let g0 = lower(
        vec![
            row(&[(1, 5)]),
            row(&[(-53, 16), (281, 80)]),
            row(&[(-36562993, 71394880), (34903117, 17848720), (-88770499, 71394880)]),
            row(&[(-7631593, 71394880), (-166232021, 35697440), (6068517, 1519040), (8644289, 8924360)]),
            row(&[(277061, 303808), (-209323, 1139280), (-1360217, 1139280), (-148789, 56964), (147889, 45120)]),
        ],
        5,
    );
    let g1 = lower(
        vec![
            vec![],
            row(&[(503, 80), (-503, 80)]),
            row(&[(-1365537, 35697440), (4963773, 7139488), (-1465833, 2231090)]),
            row(&[(66974357, 35697440), (21445367, 7139488), (-3, 1), (-8388609, 4462180)]),
            row(&[(-18227, 7520), (2, 1), (1, 1), (5, 1), (-41933, 7520)]),
        ],
        5,
    );
    let gh = vec![
        row(&[(-1482837, 759520), (175781, 71205), (-790577, 1139280), (-6379, 56964), (47, 96)]),
        row(&[(6213, 1880), (-6213, 1880), (0, 1), (0, 1), (0, 1)]),
    ];
    assemble("mri-erk45a", 4, 3, a, b, None, vec![g0, g1], gh)
}

fn irk21a() -> Result<MriGarkMethod> {
    let s = 3;
    let a = spread_rows(vec![row(&[(0, 1)]), row(&[(1, 1)]), row(&[(1, 2), (1, 2)])], s);
    let b = spread(row(&[(1, 2), (1, 2)]), s);
    let b_hat = spread(row(&[(0, 1), (1, 1)]), s);
    let g0 = spread_rows(vec![row(&[(1, 1)]), row(&[(-1, 2), (1, 2)]), vec![]], s);
    let gh = vec![spread(row(&[(-1, 2), (1, 2)]), s)];
    assemble("mri-irk21a", 2, 1, a, b, Some(b_hat), vec![g0], gh)
}

/// `num / den` for λ-polynomials given lowest degree first.
fn lq(num: &[i64], den: &[i64]) -> Exact {
    lp(num) / lp(den)
}

/// The embedded weights follow from the embedded coupling row.
fn esdirk34a() -> Result<MriGarkMethod> {
    let s = 7;
    let l = lam();
    let a_rows = vec![
        vec![],
        vec![q(1, 3)],
        vec![lq(&[1, -3], &[3]), l.clone()],
        vec![lq(&[1, 4, -24], &[-6, 24]), lq(&[-5, 12, 24], &[-6, 24])],
        vec![lq(&[0, 1], &[3, -12]), lq(&[2, -12, 12], &[3, -12]), l.clone()],
        vec![q(1, 4), lp(&[0, 3]), lq(&[3, -12], &[4])],
        vec![lq(&[1, -4], &[4]), lp(&[0, 3]), lq(&[3, -12], &[4]), l.clone()],
    ];
    let a = spread_rows(a_rows.clone(), s);
    let b = spread(a_rows[6].clone(), s);
    // Common factor 1/(4 (6λ² − 6λ + 1)²).
    let den = Exact::int(4) * lp(&[1, -6, 6]) * lp(&[1, -6, 6]);
    let g0 = spread_rows(
        vec![
            vec![q(1, 3)],
            vec![-l.clone(), l.clone()],
            vec![lq(&[3, -10], &[-6, 24]), lq(&[5, -18], &[6, -24])],
            vec![lq(&[1, 6, -24], &[6, -24]), lq(&[1, 12, -48], &[-6, 24]), l.clone()],
            vec![lq(&[3, -16], &[12, -48]), lq(&[2, -21, 48], &[-3, 12]), lq(&[3, -16], &[4])],
            vec![-l.clone(), z(), z(), l.clone()],
            vec![],
        ],
        s,
    );
    let gh = vec![spread(
        vec![
            lp(&[-3, 58, -429, 1500, -2406, 1152, 576]) / den.clone(),
            Exact::int(-6) * lp(&[-1, 20, -153, 552, -906, 432, 216]) / den.clone(),
            Exact::int(3) * lp(&[-1, 4]) * lp(&[1, -18, 111, -264, 162, 72]) / den.clone(),
            Exact::int(-4) * l.clone() * lp(&[1, -9, 18, 6]) * lp(&[1, -6, 6]) / den,
        ],
        s,
    )];
    assemble("mri-esdirk34a", 3, 2, a, b, None, vec![g0], gh)
}

/// The coupling matrix is the integrated one, `Γ⁰ = γ̄`, derived from the base
/// tableau (rows `A[i+1] − A[i]`, last row `b − A[s−1]`). The transfer row into
/// the second implicit stage is `[4λ − 3/2, c₄ − 4λ + 3/2]`, which is what the
/// third-order coupling condition requires given the other rows.
fn sdirk33a() -> Result<MriGarkMethod> {
    let s = 7;
    let l = lam();
    let c4 = lq(&[2, -9, 6], &[3, -12, 6]);
    let a73 = lq(&[1, -4], &[4, -24, 36, -12]);
    let a75 = Exact::int(-3) * lp(&[1, -4, 2]) * lp(&[1, -4, 2]) / (Exact::int(4) * lp(&[-1, 6, -9, 3]));
    let a_rows = vec![
        vec![],
        vec![l.clone()],
        vec![z(), l.clone()],
        vec![lp(&[-3, 8]) / Exact::int(2), c4.clone() - lp(&[-3, 8]) / Exact::int(2)],
        vec![z(), c4 - l.clone(), l.clone()],
        vec![z(), lp(&[0, 3]), lp(&[1, -3])],
        vec![z(), a73.clone(), a75.clone(), l.clone()],
    ];
    let a = spread_rows(a_rows.clone(), s);
    let b = spread(a_rows[6].clone(), s);
    let b_hat = spread(vec![z(), lq(&[1], &[2, -2]), z(), lq(&[1, -2], &[2, -2])], s);
    let mut g0: Matrix<Exact> =
        (0..s - 1).map(|i| (0..s).map(|j| a[i + 1][j].clone() - a[i][j].clone()).collect()).collect();
    g0.push((0..s).map(|j| b[j].clone() - a[s - 1][j].clone()).collect());
    let gh = vec![spread(vec![z(), lq(&[1, -7, 14, -6], &[4, -28, 60, -48, 12]), -a75, lq(&[1, -4, 2], &[2, -2])], s)];
    assemble("mri-sdirk33a", 3, 2, a, b, Some(b_hat), vec![g0], gh)
}

fn esdirk46a() -> Result<MriGarkMethod> {
    let s = 11;
    let a_rows = vec![
        row(&[]),
        row(&[(1, 5)]),
        row(&[(-1, 20), (1, 4)]),
        row(&[(0, 1), (2, 5)]),
        row(&[(-103, 380), (8, 19), (1, 4)]),
        row(&[(0, 1), (0, 1), (3, 5)]),
        row(&[(202381, 316160), (2199, 31616), (-1197, 3328), (1, 4)]),
        row(&[(0, 1), (0, 1), (0, 1), (4, 5)]),
        row(&[(1978577, 3575040), (20417, 119168), (-3579, 12544), (65, 588), (1, 4)]),
        row(&[(0, 1), (0, 1), (0, 1), (0, 1), (1, 1)]),
        row(&[(1, 4), (-7, 24), (13, 24), (13, 24), (-7, 24), (1, 4)]),
    ];
    let a = spread_rows(a_rows.clone(), s);
    let b = spread(a_rows[10].clone(), s);
    let b_hat = spread(row(&[(0, 1), (18163, 52824), (13943, 52824), (3263, 52824), (11053, 52824), (1067, 8804)]), s);
    let g0 = spread_rows(
        vec![
            row(&[(1, 5)]),
            row(&[(-1, 4), (1, 4)]),
            row(&[(1771023115159, 1929363690800), (-1385150376999, 1929363690800)]),
            row(&[(914009, 345800), (-1000459, 345800), (1, 4)]),
            row(&[(18386293581909, 36657910125200), (5506531089, 80566835440), (-178423463189, 482340922700)]),
            row(&[(36036097, 8299200), (4621, 118560), (-38434367, 8299200), (1, 4)]),
            row(&[
                (-247809665162987, 146631640500800),
                (10604946373579, 14663164050080),
                (10838126175385, 5865265620032),
                (-24966656214317, 36657910125200),
            ]),
            row(&[(38519701, 11618880), (10517363, 9682400), (-23284701, 19364800), (-10018609, 2904720), (1, 4)]),
            row(&[
                (-52907807977903, 33838070884800),
                (74846944529257, 73315820250400),
                (365022522318171, 146631640500800),
                (-20513210406809, 109973730375600),
                (-2918009798, 1870301537),
            ]),
            row(&[(19, 100), (-73, 300), (127, 300), (127, 300), (-313, 300), (1, 4)]),
            row(&[]),
        ],
        s,
    );
    let g1 = spread_rows(
        vec![
            row(&[]),
            row(&[]),
            row(&[(-1674554930619, 964681845400), (1674554930619, 964681845400)]),
            row(&[(-1007739, 172900), (1007739, 172900)]),
            row(&[(-8450070574289, 18328955062600), (-39429409169, 40283417720), (173621393067, 120585230675)]),
            row(&[(-122894383, 16598400), (14501, 237120), (121879313, 16598400)]),
            row(&[
                (32410002731287, 15434909526400),
                (-46499276605921, 29326328100160),
                (-34914135774643, 11730531240064),
                (45128506783177, 18328955062600),
            ]),
            row(&[(-128357303, 23237760), (-35433927, 19364800), (71038479, 38729600), (8015933, 1452360)]),
            row(&[
                (136721604296777, 67676141769600),
                (-349632444539303, 146631640500800),
                (-1292744859249609, 293263281001600),
                (8356250416309, 54986865187800),
                (17282943803, 3740603074),
            ]),
            row(&[(3, 25), (-29, 300), (71, 300), (71, 300), (-149, 300)]),
            row(&[]),
        ],
        s,
    );
    let gh = vec![
        spread(row(&[(-1, 4), (5595, 8804), (-2445, 8804), (-4225, 8804), (2205, 4402), (-567, 4402)]), s),
        vec![z(); s],
    ];
    assemble("mri-esdirk46a", 4, 3, a, b, Some(b_hat), vec![g0, g1], gh)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_builds_every_method() {
        for name in builtin_names() {
            let m = builtin(name).unwrap_or_else(|e| panic!("{e}"));
            assert_eq!(&m.name, name);
        }
    }

    #[test]
    fn unknown_name_lists_available() {
        let err = builtin("mri-xyz").unwrap_err().to_string();
        assert!(err.contains("mri-erk45a") && err.contains("mri-xyz"));
    }

    #[test]
    fn erk45a_abscissae() {
        let m = builtin("mri-erk45a").unwrap();
        assert_eq!(m.base.c, (0..5).map(|i| q(i, 5)).collect::<Vec<_>>());
    }

    #[test]
    fn implicit_abscissae_match_listing() {
        let m = builtin("mri-esdirk34a").unwrap();
        assert_eq!(m.base.c, row(&[(0, 1), (1, 3), (1, 3), (2, 3), (2, 3), (1, 1), (1, 1)]));
        let m = builtin("mri-esdirk46a").unwrap();
        let c: Vec<Exact> = [0, 1, 1, 2, 2, 3, 3, 4, 4, 5, 5].iter().map(|&k| q(k, 5)).collect();
        assert_eq!(m.base.c, c);
        let m = builtin("mri-irk21a").unwrap();
        assert_eq!(m.base.c, row(&[(0, 1), (1, 1), (1, 1)]));
        let m = builtin("mri-sdirk33a").unwrap();
        let c4 = lq(&[2, -9, 6], &[3, -12, 6]);
        assert_eq!(m.base.c, vec![z(), lam(), lam(), c4.clone(), c4, q(1, 1), q(1, 1)]);
    }

    #[test]
    fn lambda_methods_share_lambda() {
        let m = builtin("mri-esdirk34a").unwrap();
        let lam_f = crate::field::lambda_f64();
        assert!((m.numeric().a[2][2] - lam_f).abs() < 1e-16);
        assert!((lam_f - 0.435866521508459).abs() < 1e-15);
    }

    #[test]
    fn sdirk33a_first_coupling_row_is_lambda() {
        let m = builtin("mri-sdirk33a").unwrap();
        assert_eq!(m.gammas.gamma[0][0][0], lam());
        assert_eq!(m.gammas.gamma[0][1][0], -lam());
        assert_eq!(m.gammas.gamma[0][1][2], lam());
    }

    #[test]
    fn families_reject_bad_parameters() {
        assert!(erk22(q(0, 1)).is_err());
        assert!(erk22(q(3, 2)).is_err());
        assert!(erk22(q(1, 3)).is_ok());
        assert!(erk33(q(1, 7)).is_ok());
    }
}
