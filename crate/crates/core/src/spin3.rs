//! Spin 3/2: the split of the curvature of a connection on `M` into
//! `F⁽⁰⁾ ∈ ∧²E⊗S⁶H`, `F⁽¹⁾ ∈ S²E⊗S⁴H`, `F⁽²⁾ ∈ ∧²E⊗S²H`, `F⁽³⁾ ∈ S²E`,
//! the harmonic contraction table, and the 0-/1-partial pipelines.
//!
//! Symmetric tensors in `SⁿH` are stored by their value on a sorted index
//! with `j` twos, `j = 0..=n`. `𝔖` is the unnormalised sum over the
//! permutations of each index triple.

use crate::gauge::{self, Check, ConnectionOnM, GaugeError, GaugeOptions, PipelineRun, Result};
use crate::harmonic::{AnalyticMode, HarmonicModel};
use crate::linalg::{self, Mat};
use crate::poly::{Poly, PolyMatrix, UM1, UP1};
use crate::scalar::Gq;
use crate::ym;

const M: usize = 3;

fn twos(t: &[usize]) -> usize {
    t.iter().filter(|&&a| a == 1).count()
}

fn rep(k: usize) -> [usize; 3] {
    let mut t = [0; 3];
    for slot in t.iter_mut().skip(M - k) {
        *slot = 1;
    }
    t
}

const PERMS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

/// One column of the reassembly map: the summand `k` with the given basis
/// tensor, evaluated on `(A, B)` of `k₁`, `k₂` twos.
fn summand(eps: &[[i64; 2]; 2], k: usize, basis_j: usize, a: [usize; 3], b: [usize; 3]) -> i64 {
    let mut total = 0;
    for s in PERMS {
        for t in PERMS {
            let pa = [a[s[0]], a[s[1]], a[s[2]]];
            let pb = [b[t[0]], b[t[1]], b[t[2]]];
            let mut w = 1;
            for j in 0..k {
                w *= eps[pa[j]][pb[j]];
            }
            if w == 0 {
                continue;
            }
            let rest: Vec<usize> = pa[k..].iter().chain(&pb[k..]).copied().collect();
            if twos(&rest) == basis_j {
                total += w;
            }
        }
    }
    total
}

/// Columns: `(k, j)` pairs for the summands of one `E`-symmetry type.
fn columns(sym_in_e: bool) -> Vec<(usize, usize)> {
    let ks: [usize; 2] = if sym_in_e { [1, 3] } else { [0, 2] };
    let mut out = Vec::new();
    for k in ks {
        for j in 0..=2 * (M - k) {
            out.push((k, j));
        }
    }
    out
}

/// The reassembly map `(F⁽ᵏ⁾ components) → 4×4 table` and its left
/// inverse, for the `E`-symmetric or `E`-skew part.
#[derive(Debug, Clone)]
pub struct Projection {
    pub columns: Vec<(usize, usize)>,
    pub assemble: Mat<Gq>,
    pub project: Mat<Gq>,
}

impl Projection {
    pub fn new(eps: &[[i64; 2]; 2], sym_in_e: bool) -> Result<Self> {
        let columns = columns(sym_in_e);
        let mut assemble = linalg::zeros(16, columns.len());
        for k1 in 0..=M {
            for k2 in 0..=M {
                for (c, &(k, j)) in columns.iter().enumerate() {
                    assemble[k1 * 4 + k2][c] = Gq::int(summand(eps, k, j, rep(k1), rep(k2)));
                }
            }
        }
        let project = linalg::left_inverse(&assemble, 0.0).ok_or_else(|| {
            GaugeError::Invariant("curvature projection is not injective".into())
        })?;
        Ok(Projection {
            columns,
            assemble,
            project,
        })
    }
}

fn apply(m: &Mat<Gq>, v: &[PolyMatrix]) -> Result<Vec<PolyMatrix>> {
    let r = v[0].dim();
    let mut out = Vec::with_capacity(m.len());
    for row in m {
        let mut acc = PolyMatrix::zero(r);
        for (c, x) in row.iter().zip(v) {
            if !c.is_zero() {
                acc = acc.add(&x.scale(c))?;
            }
        }
        out.push(acc);
    }
    Ok(out)
}

/// `f[k][e][e'][j]`.
#[derive(Debug, Clone)]
pub struct Spin3CurvatureReport {
    pub f: [Vec<Vec<Vec<PolyMatrix>>>; 4],
    pub reassembly_exact: bool,
}

impl Spin3CurvatureReport {
    pub fn vanishes(&self, k: usize) -> bool {
        self.f[k].iter().flatten().flatten().all(|c| c.is_zero())
    }

    pub fn zero_partial(&self) -> bool {
        self.vanishes(0)
    }

    pub fn one_partial(&self) -> bool {
        self.vanishes(0) && self.vanishes(1) && self.vanishes(2)
    }
}

/// Splits `F(X^e_A, X^{e'}_B)` (flat index `e·4 + k`) into the four pieces.
pub fn decompose(eps: &[[i64; 2]; 2], curv: &[Vec<PolyMatrix>]) -> Result<Spin3CurvatureReport> {
    let p = curv.len() / 4;
    let r = curv[0][0].dim();
    let sym = Projection::new(eps, true)?;
    let skew = Projection::new(eps, false)?;
    let empty = |k: usize| vec![vec![vec![PolyMatrix::zero(r); 2 * (M - k) + 1]; p]; p];
    let mut f = [empty(0), empty(1), empty(2), empty(3)];
    let mut exact = true;
    let half = Gq::ratio(1, 2);
    for e in 0..p {
        for e2 in 0..p {
            let g = |k: usize, l: usize| &curv[e * 4 + k][e2 * 4 + l];
            let mut vs = Vec::with_capacity(16);
            let mut vk = Vec::with_capacity(16);
            for k in 0..=M {
                for l in 0..=M {
                    vs.push(g(k, l).sub(g(l, k))?.scale(&half));
                    vk.push(g(k, l).add(g(l, k))?.scale(&half));
                }
            }
            for (proj, v) in [(&sym, &vs), (&skew, &vk)] {
                let c = apply(&proj.project, v)?;
                if apply(&proj.assemble, &c)? != *v {
                    exact = false;
                }
                for (x, &(k, j)) in c.into_iter().zip(&proj.columns) {
                    f[k][e][e2][j] = x;
                }
            }
        }
    }
    Ok(Spin3CurvatureReport {
        f,
        reassembly_exact: exact,
    })
}

/// `Σ_t u^{s₁}_{t₁}⋯u^{s_n}_{t_n} T_{sort t}` for a symmetric tensor `T`.
pub fn contract(t: &[PolyMatrix], minus: &[bool]) -> PolyMatrix {
    let n = minus.len();
    let r = t[0].dim();
    let mut out = PolyMatrix::zero(r);
    for bits in 0..1usize << n {
        let mut mono = vec![0u16; 4];
        let mut k = 0;
        for (j, &m) in minus.iter().enumerate() {
            let a = (bits >> j) & 1;
            k += a;
            mono[a + if m { UM1 } else { UP1 }] += 1;
        }
        let u = Poly::monomial(mono, Gq::one());
        out = out.add(&t[k].scale_poly(&u)).expect("same rank");
    }
    out
}

/// `F(X^e_i, X^{e'}_j) = Σ u^{(i)}_A u^{(j)}_B F(X^e_A, X^{e'}_B)` with
/// `i`, `j` the numbers of minus slots.
pub fn pattern_curvature(curv: &[Vec<PolyMatrix>], e: usize, i: usize, e2: usize, j: usize) -> PolyMatrix {
    let r = curv[0][0].dim();
    let mut out = PolyMatrix::zero(r);
    for a in 0..1usize << M {
        for b in 0..1usize << M {
            let ta: Vec<usize> = (0..M).map(|s| (a >> s) & 1).collect();
            let tb: Vec<usize> = (0..M).map(|s| (b >> s) & 1).collect();
            let mut mono = vec![0u16; 4];
            for (s, &x) in ta.iter().enumerate() {
                mono[x + if s < i { UM1 } else { UP1 }] += 1;
            }
            for (s, &x) in tb.iter().enumerate() {
                mono[x + if s < j { UM1 } else { UP1 }] += 1;
            }
            let u = Poly::monomial(mono, Gq::one());
            let f = &curv[e * 4 + twos(&ta)][e2 * 4 + twos(&tb)];
            out = out.add(&f.scale_poly(&u)).expect("same rank");
        }
    }
    out
}

/// One term of the contraction table: the curvature component on the
/// pattern pair `(i, j)` receives `expected · contraction(F⁽ᵏ⁾)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorEntry {
    pub label: String,
    pub summand: usize,
    pub expected: Gq,
    pub measured: Option<Gq>,
}

impl FactorEntry {
    pub fn agrees(&self) -> bool {
        self.measured.as_ref() == Some(&self.expected)
    }
}

struct TableRow {
    label: &'static str,
    i: usize,
    j: usize,
    /// `(summand, factor, minus-slot pattern of the contraction)`
    terms: Vec<(usize, i64, Vec<bool>)>,
}

fn table() -> Vec<TableRow> {
    let p = false;
    let m = true;
    vec![
        TableRow { label: "F(X+++,X'+++)", i: 0, j: 0, terms: vec![] },
        TableRow { label: "F(X---,X'---)", i: 3, j: 3, terms: vec![] },
        TableRow { label: "F(X+++,X'+)", i: 0, j: 1, terms: vec![(1, 12, vec![p, p, p, p])] },
        TableRow { label: "F(X---,X'-)", i: 3, j: 2, terms: vec![(1, -12, vec![m, m, m, m])] },
        TableRow { label: "F(X+,X'+)", i: 1, j: 1, terms: vec![(2, -8, vec![p, p])] },
        TableRow { label: "F(X-,X'-)", i: 2, j: 2, terms: vec![(2, -8, vec![m, m])] },
        TableRow {
            label: "F(X+++,X'---)",
            i: 0,
            j: 3,
            terms: vec![(1, 36, vec![p, p, m, m]), (2, 36, vec![p, m]), (3, 36, vec![])],
        },
        TableRow {
            label: "F(X+++,X'-)",
            i: 0,
            j: 2,
            terms: vec![(1, 24, vec![p, p, p, m]), (2, 12, vec![p, p])],
        },
        TableRow {
            label: "F(X---,X'+)",
            i: 3,
            j: 1,
            terms: vec![(1, -24, vec![m, m, m, p]), (2, 12, vec![m, m])],
        },
        TableRow {
            label: "F(X+,X'-)",
            i: 1,
            j: 2,
            terms: vec![(1, 12, vec![p, p, m, m]), (2, -4, vec![p, m]), (3, -12, vec![])],
        },
    ]
}

/// A sample curvature with only `F⁽ᵏ⁾ ≠ 0` (rank 1, `p = 2`), assembled
/// through the projection maps; components are small distinct integers.
fn single_summand_curvature(eps: &[[i64; 2]; 2], k: usize) -> Result<(Vec<Vec<PolyMatrix>>, Vec<Vec<Vec<PolyMatrix>>>)> {
    let p = 2;
    let sym_in_e = k % 2 == 1;
    let proj = Projection::new(eps, sym_in_e)?;
    let len = 2 * (M - k) + 1;
    let mut tensor = vec![vec![vec![PolyMatrix::zero(1); len]; p]; p];
    let mut curv = vec![vec![PolyMatrix::zero(1); 4 * p]; 4 * p];
    for e in 0..p {
        for e2 in 0..p {
            if !sym_in_e && e == e2 {
                continue;
            }
            let (lo, hi) = (e.min(e2), e.max(e2));
            let sign = if !sym_in_e && e > e2 { -1 } else { 1 };
            let mut coeffs = Vec::new();
            for &(kk, j) in &proj.columns {
                let v = if kk == k {
                    (3 * j + 5 * lo + 7 * hi + 2) as i64 * sign
                } else {
                    0
                };
                coeffs.push(PolyMatrix::from_const(&vec![vec![Gq::int(v)]])?);
                if kk == k {
                    tensor[e][e2][j] = coeffs.last().cloned().expect("pushed");
                }
            }
            let v = apply(&proj.assemble, &coeffs)?;
            for k1 in 0..4 {
                for k2 in 0..4 {
                    let x = &v[k1 * 4 + k2];
                    let cur = &curv[e * 4 + k1][e2 * 4 + k2];
                    curv[e * 4 + k1][e2 * 4 + k2] = cur.add(x)?;
                }
            }
        }
    }
    Ok((curv, tensor))
}

fn ratio(lhs: &PolyMatrix, rhs: &PolyMatrix) -> Option<Gq> {
    if rhs.is_zero() {
        return if lhs.is_zero() { Some(Gq::zero()) } else { None };
    }
    let (mono, c) = rhs.get(0, 0).terms().iter().next().map(|(m, c)| (m.clone(), c.clone()))?;
    let l = lhs
        .get(0, 0)
        .terms()
        .iter()
        .find(|(m, _)| **m == mono)
        .map(|(_, c)| c.clone())
        .unwrap_or_else(Gq::zero);
    let q = &l / &c;
    (rhs.scale(&q) == *lhs).then_some(q)
}

/// Measures every factor of the contraction table against the
/// self-solved projections.
pub fn factor_table(eps: &[[i64; 2]; 2]) -> Result<Vec<FactorEntry>> {
    let mut out = Vec::new();
    let samples: Vec<_> = (1..=3)
        .map(|k| single_summand_curvature(eps, k))
        .collect::<Result<_>>()?;
    for row in table() {
        for k in 1..=3 {
            let (curv, tensor) = &samples[k - 1];
            let lhs = pattern_curvature(curv, 0, row.i, 1, row.j);
            let (expected, pattern) = match row.terms.iter().find(|t| t.0 == k) {
                Some((_, f, pat)) => (Gq::int(*f), pat.clone()),
                None => (Gq::zero(), Vec::new()),
            };
            let measured = if expected.is_zero() {
                lhs.is_zero().then(Gq::zero)
            } else {
                ratio(&lhs, &contract(&tensor[0][1], &pattern))
            };
            out.push(FactorEntry {
                label: format!("{} ← F({k})", row.label),
                summand: k,
                expected,
                measured,
            });
        }
    }
    Ok(out)
}

/// Output of a spin-3/2 run.
#[derive(Debug, Clone)]
pub struct Spin3Run {
    pub run: PipelineRun,
    pub decomposition: Spin3CurvatureReport,
    pub ym_zero: Option<bool>,
    pub checks: Vec<Check>,
}

impl Spin3Run {
    pub fn connection(&self) -> &ConnectionOnM {
        &self.run.connection
    }

    pub fn all_passed(&self) -> bool {
        self.run.all_passed() && self.checks.iter().all(|c| c.passed)
    }
}

fn build(model: &HarmonicModel, mode: AnalyticMode, a_pp: &PolyMatrix, opts: &GaugeOptions) -> Result<Spin3Run> {
    if model.spin_m != 3 {
        return Err(GaugeError::Invariant(format!("spin {} model passed to the spin-3/2 pipeline", model.spin_m)));
    }
    let run = gauge::run_pipeline(model, mode, a_pp, opts)?;
    let decomposition = decompose(&model.eps, &run.curvature)?;
    let mut checks = vec![
        Check {
            name: "curvature reassembly exact".into(),
            passed: decomposition.reassembly_exact,
        },
        Check {
            name: "F(0) = 0".into(),
            passed: decomposition.zero_partial(),
        },
    ];
    let mut ym_zero = None;
    if mode == AnalyticMode::OnePartial {
        checks.push(Check {
            name: "F(0) = F(1) = F(2) = 0".into(),
            passed: decomposition.one_partial(),
        });
        if model.rank_e % 2 == 0 {
            let omega_e = ym::standard_omega_e(model.rank_e);
            let res = ym::ym_residual(model, &run.connection, &omega_e)?;
            let zero = res.is_empty();
            checks.push(Check {
                name: "Yang-Mills residual zero".into(),
                passed: zero,
            });
            ym_zero = Some(zero);
        }
    }
    Ok(Spin3Run {
        run,
        decomposition,
        ym_zero,
        checks,
    })
}

pub fn build_0partial(model: &HarmonicModel, a_pp: &PolyMatrix, opts: &GaugeOptions) -> Result<Spin3Run> {
    build(model, AnalyticMode::ZeroPartial, a_pp, opts)
}

pub fn build_1partial(model: &HarmonicModel, a_pp: &PolyMatrix, opts: &GaugeOptions) -> Result<Spin3Run> {
    build(model, AnalyticMode::OnePartial, a_pp, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: [[i64; 2]; 2] = [[0, 1], [-1, 0]];

    fn nilp() -> Vec<Vec<Gq>> {
        vec![vec![Gq::zero(), Gq::one()], vec![Gq::zero(), Gq::zero()]]
    }

    #[test]
    fn projections_are_square() {
        let s = Projection::new(&EPS, true).unwrap();
        let k = Projection::new(&EPS, false).unwrap();
        assert_eq!(s.columns.len(), 6);
        assert_eq!(k.columns.len(), 10);
    }

    #[test]
    fn factor_table_matches() {
        let t = factor_table(&EPS).unwrap();
        let bad: Vec<_> = t.iter().filter(|e| !e.agrees()).collect();
        assert!(bad.is_empty(), "{bad:#?}");
    }

    #[test]
    fn zero_prepotential_is_flat() {
        let model = HarmonicModel::build(3, 2, 2).unwrap();
        let r = build_1partial(&model, &PolyMatrix::zero(2), &GaugeOptions::default()).unwrap();
        assert!(r.all_passed());
        assert!(r.connection().coeffs.iter().flatten().all(|c| c.is_zero()));
    }

    #[test]
    fn one_partial_example() {
        let model = HarmonicModel::build(3, 2, 2).unwrap();
        let x = model.x_pattern(0, "ppm").unwrap();
        let a = PolyMatrix::poly_times_const(&x.mul(&x), &nilp()).unwrap();
        let r = build_1partial(&model, &a, &GaugeOptions::default()).unwrap();
        assert!(r.all_passed(), "{:?} {:?} {:?}", r.checks, r.run.checks, r.run.audit);
        assert_eq!(r.ym_zero, Some(true));
        assert!(!r.decomposition.vanishes(3));
        let z = build_0partial(&model, &a, &GaugeOptions::default()).unwrap();
        assert_eq!(z.run.connection, r.run.connection);
    }

    #[test]
    fn zero_partial_only_example() {
        let model = HarmonicModel::build(3, 2, 3).unwrap();
        let x = |a: usize, p: &str| model.x_pattern(a, p).unwrap();
        let unit = |i: usize, j: usize| {
            let mut m = vec![vec![Gq::zero(); 3]; 3];
            m[i][j] = Gq::one();
            m
        };
        let a = PolyMatrix::poly_times_const(&x(0, "ppm").mul(&x(0, "ppm")), &unit(0, 1))
            .unwrap()
            .add(&PolyMatrix::poly_times_const(&x(1, "ppp").mul(&x(1, "pmm")), &unit(1, 2)).unwrap())
            .unwrap();
        assert!(build_1partial(&model, &a, &GaugeOptions::default()).is_err());
        let r = build_0partial(&model, &a, &GaugeOptions::default()).unwrap();
        assert!(r.all_passed(), "{:?} {:?} {:?}", r.checks, r.run.checks, r.run.audit);
        assert!(r.decomposition.zero_partial());
        assert!(!r.decomposition.vanishes(1));
        assert!(!r.decomposition.vanishes(2));
    }
}
