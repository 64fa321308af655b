//! Exterior algebra on a finite-dimensional oriented metric vector space:
//! wedge, Hodge star, induced inner products and the operator
//! `B_Ω ω = ∗(∗Ω ∧ ω)` in both its definitional and contracted forms.

use crate::linalg::{self, Mat};
use crate::scalar::{rationalize, Field, Gq};
use std::collections::BTreeMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExteriorError {
    #[error("forms live on different metric spaces")]
    SpaceMismatch,
    #[error("degree {0} exceeds the dimension {1}")]
    DegreeTooLarge(usize, usize),
    #[error("expected a form of degree {expected}, got degree {got}")]
    DegreeMismatch { expected: usize, got: usize },
    #[error("metric is degenerate")]
    DegenerateMetric,
    #[error("metric is not symmetric")]
    AsymmetricMetric,
    #[error("no exact square root of the metric determinant {0}")]
    NoExactVolume(String),
    #[error("invalid index tuple {0:?}")]
    BadIndex(Vec<usize>),
    #[error("eigensolver did not converge")]
    NoConvergence,
    #[error("spectrum has a non-real eigenvalue {re} + {im}i")]
    NonRealSpectrum { re: f64, im: f64 },
    #[error("matrix entry is not real")]
    NonRealEntry,
    #[error("self-duality requires a nonzero eigenvalue")]
    ZeroLambda,
}

pub type Result<T> = std::result::Result<T, ExteriorError>;

/// How the scale `s` of `vol = s·e¹∧…∧eⁿ` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VolumeRoot {
    /// `s = √|det g|`.
    Absolute,
    /// `s = √det g`, the principal root (imaginary when `det g < 0`).
    Principal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpace<S: Field> {
    dim: usize,
    gram: Mat<S>,
    inv_gram: Mat<S>,
    det: S,
    orientation: i8,
    vol_scale: S,
    root: VolumeRoot,
}

impl<S: Field> MetricSpace<S> {
    pub fn new(gram: Mat<S>, orientation: i8, root: VolumeRoot) -> Result<Arc<Self>> {
        let n = gram.len();
        if gram.iter().any(|r| r.len() != n) {
            return Err(ExteriorError::AsymmetricMetric);
        }
        for i in 0..n {
            for j in 0..i {
                if gram[i][j] != gram[j][i] {
                    return Err(ExteriorError::AsymmetricMetric);
                }
            }
        }
        let det = linalg::determinant(&gram);
        if det.is_zero() {
            return Err(ExteriorError::DegenerateMetric);
        }
        let inv_gram = linalg::inverse(&gram, 0.0).ok_or(ExteriorError::DegenerateMetric)?;
        let radicand = match root {
            VolumeRoot::Absolute if det.is_negative_real() => det.neg(),
            _ => det.clone(),
        };
        let vol_scale = radicand
            .sqrt()
            .ok_or_else(|| ExteriorError::NoExactVolume(format!("{:?}", det)))?;
        Ok(Arc::new(MetricSpace {
            dim: n,
            gram,
            inv_gram,
            det,
            orientation: if orientation < 0 { -1 } else { 1 },
            vol_scale,
            root,
        }))
    }

    pub fn euclidean(n: usize) -> Arc<Self> {
        Self::new(linalg::identity(n), 1, VolumeRoot::Absolute).expect("identity metric")
    }

    pub fn diagonal(signs: &[i64], root: VolumeRoot) -> Result<Arc<Self>> {
        let n = signs.len();
        let mut g = linalg::zeros(n, n);
        for (i, s) in signs.iter().enumerate() {
            g[i][i] = S::from_i64(*s);
        }
        Self::new(g, 1, root)
    }

    /// Signature `(n−1, 1)`: the last basis vector is timelike.
    pub fn lorentzian(n: usize, root: VolumeRoot) -> Result<Arc<Self>> {
        let mut signs = vec![1; n];
        signs[n - 1] = -1;
        Self::diagonal(&signs, root)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn gram(&self) -> &Mat<S> {
        &self.gram
    }
    pub fn inverse_gram(&self) -> &Mat<S> {
        &self.inv_gram
    }
    pub fn det(&self) -> &S {
        &self.det
    }
    pub fn orientation(&self) -> i8 {
        self.orientation
    }
    pub fn volume_scale(&self) -> &S {
        &self.vol_scale
    }
    pub fn volume_root(&self) -> VolumeRoot {
        self.root
    }

    /// `⟨e^I, e^J⟩ = det(g^{-1}[I, J])`.
    pub fn basis_inner(&self, i: &[usize], j: &[usize]) -> S {
        let m: Mat<S> = i
            .iter()
            .map(|&a| j.iter().map(|&b| self.inv_gram[a][b].clone()).collect())
            .collect();
        linalg::determinant(&m)
    }

    /// Gram matrix of the induced inner product on `Λ²` in the
    /// lexicographic basis.
    pub fn lambda2_gram(&self) -> Mat<S> {
        let basis = combinations(self.dim, 2);
        basis
            .iter()
            .map(|i| basis.iter().map(|j| self.basis_inner(i, j)).collect())
            .collect()
    }
}

/// Strictly increasing `p`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, p: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(p);
    fn rec(start: usize, n: usize, p: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == p {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < p - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, p, cur, out);
            cur.pop();
        }
    }
    rec(0, n, p, &mut cur, &mut out);
    out
}

/// Sorts `idx` and returns the permutation sign, or `None` if an index
/// repeats.
pub fn sort_with_sign(idx: &[usize]) -> Option<(Vec<usize>, i64)> {
    let mut v = idx.to_vec();
    let mut sign = 1;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some((v, sign))
    }
}

fn complement(n: usize, i: &[usize]) -> Vec<usize> {
    (0..n).filter(|x| !i.contains(x)).collect()
}

/// Sign of the shuffle `(I, Iᶜ)`.
fn shuffle_sign(i: &[usize]) -> i64 {
    let s: usize = i.iter().enumerate().map(|(k, &x)| x - k).sum();
    if s % 2 == 0 {
        1
    } else {
        -1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Form<S: Field> {
    space: Arc<MetricSpace<S>>,
    degree: usize,
    coeffs: BTreeMap<Vec<usize>, S>,
}

impl<S: Field> Form<S> {
    pub fn zero(space: &Arc<MetricSpace<S>>, degree: usize) -> Self {
        Form {
            space: space.clone(),
            degree,
            coeffs: BTreeMap::new(),
        }
    }

    /// The basis covector `e^i` (0-based).
    pub fn basis(space: &Arc<MetricSpace<S>>, idx: &[usize]) -> Result<Self> {
        let mut f = Form::zero(space, idx.len());
        f.add_term(idx, S::one())?;
        Ok(f)
    }

    pub fn scalar(space: &Arc<MetricSpace<S>>, c: S) -> Self {
        let mut f = Form::zero(space, 0);
        if !c.is_zero() {
            f.coeffs.insert(Vec::new(), c);
        }
        f
    }

    /// Adds `c·e^{i₁}∧…∧e^{i_p}` for an arbitrary (not necessarily sorted)
    /// index tuple.
    pub fn add_term(&mut self, idx: &[usize], c: S) -> Result<()> {
        if idx.len() != self.degree {
            return Err(ExteriorError::DegreeMismatch {
                expected: self.degree,
                got: idx.len(),
            });
        }
        if idx.iter().any(|&i| i >= self.space.dim) {
            return Err(ExteriorError::BadIndex(idx.to_vec()));
        }
        let Some((key, sign)) = sort_with_sign(idx) else {
            return Ok(());
        };
        let c = if sign < 0 { c.neg() } else { c };
        accumulate(&mut self.coeffs, key, c);
        Ok(())
    }

    pub fn from_coeffs(
        space: &Arc<MetricSpace<S>>,
        degree: usize,
        terms: impl IntoIterator<Item = (Vec<usize>, S)>,
    ) -> Result<Self> {
        let mut f = Form::zero(space, degree);
        for (k, c) in terms {
            f.add_term(&k, c)?;
        }
        Ok(f)
    }

    pub fn space(&self) -> &Arc<MetricSpace<S>> {
        &self.space
    }
    pub fn degree(&self) -> usize {
        self.degree
    }
    pub fn coeffs(&self) -> &BTreeMap<Vec<usize>, S> {
        &self.coeffs
    }
    pub fn coeff(&self, key: &[usize]) -> S {
        self.coeffs.get(key).cloned().unwrap_or_else(S::zero)
    }
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn check_space(&self, o: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.space, &o.space) || *self.space == *o.space {
            Ok(())
        } else {
            Err(ExteriorError::SpaceMismatch)
        }
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.check_space(o)?;
        if self.degree != o.degree {
            return Err(ExteriorError::DegreeMismatch {
                expected: self.degree,
                got: o.degree,
            });
        }
        let mut out = self.clone();
        for (k, c) in &o.coeffs {
            accumulate(&mut out.coeffs, k.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.scale(&S::from_i64(-1)))
    }

    pub fn scale(&self, s: &S) -> Self {
        let mut out = Form::zero(&self.space, self.degree);
        if s.is_zero() {
            return out;
        }
        for (k, c) in &self.coeffs {
            out.coeffs.insert(k.clone(), c.mul(s));
        }
        out
    }

    pub fn wedge(&self, o: &Self) -> Result<Self> {
        self.check_space(o)?;
        let deg = self.degree + o.degree;
        if deg > self.space.dim {
            return Err(ExteriorError::DegreeTooLarge(deg, self.space.dim));
        }
        let mut out = Form::zero(&self.space, deg);
        for (a, ca) in &self.coeffs {
            for (b, cb) in &o.coeffs {
                let mut idx = a.clone();
                idx.extend_from_slice(b);
                if let Some((key, sign)) = sort_with_sign(&idx) {
                    let c = ca.mul(cb);
                    accumulate(&mut out.coeffs, key, if sign < 0 { c.neg() } else { c });
                }
            }
        }
        Ok(out)
    }

    /// Induced inner product `⟨α, β⟩`.
    pub fn inner(&self, o: &Self) -> Result<S> {
        self.check_space(o)?;
        if self.degree != o.degree {
            return Err(ExteriorError::DegreeMismatch {
                expected: self.degree,
                got: o.degree,
            });
        }
        let mut acc = S::zero();
        for (i, a) in &self.coeffs {
            for (j, b) in &o.coeffs {
                let g = self.space.basis_inner(i, j);
                if !g.is_zero() {
                    acc = acc.add(&a.mul(&g).mul(b));
                }
            }
        }
        Ok(acc)
    }

    /// The volume form `s·o·e¹∧…∧eⁿ`.
    pub fn volume(space: &Arc<MetricSpace<S>>) -> Self {
        let n = space.dim;
        let mut f = Form::zero(space, n);
        let s = if space.orientation < 0 {
            space.vol_scale.neg()
        } else {
            space.vol_scale.clone()
        };
        f.coeffs.insert((0..n).collect(), s);
        f
    }

    /// Hodge star, characterised by `α ∧ ∗β = ⟨α, β⟩ vol`.
    pub fn hodge(&self) -> Self {
        let n = self.space.dim;
        let p = self.degree;
        let mut out = Form::zero(&self.space, n - p);
        let scale = if self.space.orientation < 0 {
            self.space.vol_scale.neg()
        } else {
            self.space.vol_scale.clone()
        };
        for j in combinations(n, p) {
            let mut raised = S::zero();
            for (k, b) in &self.coeffs {
                let g = self.space.basis_inner(&j, k);
                if !g.is_zero() {
                    raised = raised.add(&g.mul(b));
                }
            }
            if raised.is_zero() {
                continue;
            }
            let mut c = raised.mul(&scale);
            if shuffle_sign(&j) < 0 {
                c = c.neg();
            }
            accumulate(&mut out.coeffs, complement(n, &j), c);
        }
        out
    }

    /// Fully antisymmetric component `Ω_{i…}` for an arbitrary index tuple,
    /// i.e. the stored coefficient divided by `p!` with the sorting sign.
    pub fn antisym_component(&self, idx: &[usize]) -> S {
        match sort_with_sign(idx) {
            None => S::zero(),
            Some((key, sign)) => {
                let c = self.coeff(&key);
                if c.is_zero() {
                    return c;
                }
                let c = c
                    .div(&S::from_i64(factorial(self.degree)))
                    .expect("nonzero factorial");
                if sign < 0 {
                    c.neg()
                } else {
                    c
                }
            }
        }
    }

    /// Evaluation on basis vectors `Ω(e_{i₁}, …, e_{i_p})`.
    pub fn evaluate(&self, idx: &[usize]) -> S {
        match sort_with_sign(idx) {
            None => S::zero(),
            Some((key, sign)) => {
                let c = self.coeff(&key);
                if sign < 0 {
                    c.neg()
                } else {
                    c
                }
            }
        }
    }
}

pub(crate) fn factorial(n: usize) -> i64 {
    (1..=n as i64).product()
}

fn accumulate<S: Field>(map: &mut BTreeMap<Vec<usize>, S>, key: Vec<usize>, c: S) {
    if c.is_zero() {
        return;
    }
    match map.get_mut(&key) {
        Some(v) => {
            let s = v.add(&c);
            if s.is_zero() {
                map.remove(&key);
            } else {
                *v = s;
            }
        }
        None => {
            map.insert(key, c);
        }
    }
}

fn expect_degree<S: Field>(f: &Form<S>, d: usize) -> Result<()> {
    if f.degree != d {
        Err(ExteriorError::DegreeMismatch {
            expected: d,
            got: f.degree,
        })
    } else {
        Ok(())
    }
}

/// `B_Ω ω := ∗(∗Ω ∧ ω)`.
pub fn b_omega_def<S: Field>(omega4: &Form<S>, w: &Form<S>) -> Result<Form<S>> {
    expect_degree(omega4, 4)?;
    expect_degree(w, 2)?;
    Ok(omega4.hodge().wedge(w)?.hodge())
}

/// `B_Ω ω = 12 Σ g^{ii'} g^{jj'} Ω_{ijkl} ω_{i'j'} e^k∧e^l` with fully
/// antisymmetric components.
pub fn b_omega_contract<S: Field>(omega4: &Form<S>, w: &Form<S>) -> Result<Form<S>> {
    expect_degree(omega4, 4)?;
    expect_degree(w, 2)?;
    omega4.check_space(w)?;
    let space = omega4.space.clone();
    let n = space.dim;
    let gi = &space.inv_gram;
    // raised ω^{ij} = g^{ii'} g^{jj'} ω_{i'j'}, ω_{i'j'} = stored/2
    let half = S::from_ratio(1, 2);
    let mut raised = vec![vec![S::zero(); n]; n];
    for (k, c) in &w.coeffs {
        let (a, b) = (k[0], k[1]);
        let c = c.mul(&half);
        for i in 0..n {
            if gi[i][a].is_zero() && gi[i][b].is_zero() {
                continue;
            }
            for j in 0..n {
                let t = gi[i][a].mul(&gi[j][b]).sub(&gi[i][b].mul(&gi[j][a]));
                if !t.is_zero() {
                    raised[i][j] = raised[i][j].add(&t.mul(&c));
                }
            }
        }
    }
    let twelve = S::from_i64(12);
    let mut out = Form::zero(&space, 2);
    for (key, c) in &omega4.coeffs {
        // each stored coefficient contributes to all orderings of its key
        let comp = c.div(&S::from_i64(24)).expect("24");
        for perm in permutations4() {
            let idx: Vec<usize> = perm.0.iter().map(|&p| key[p]).collect();
            let (i, j, k, l) = (idx[0], idx[1], idx[2], idx[3]);
            if raised[i][j].is_zero() {
                continue;
            }
            let mut t = comp.mul(&raised[i][j]).mul(&twelve);
            if perm.1 < 0 {
                t = t.neg();
            }
            out.add_term(&[k, l], t)?;
        }
    }
    Ok(out)
}

fn permutations4() -> Vec<([usize; 4], i64)> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let p = [a, b, c, d];
                    if let Some((_, s)) = sort_with_sign(&p) {
                        out.push((p, s));
                    }
                }
            }
        }
    }
    out
}

/// Matrix of `B_Ω` on `Λ²` in the lexicographic basis; column `j` holds the
/// image of the `j`-th basis 2-form.
pub fn b_omega_matrix<S: Field>(omega4: &Form<S>) -> Result<Mat<S>> {
    expect_degree(omega4, 4)?;
    let space = omega4.space.clone();
    let basis = combinations(space.dim, 2);
    let star = omega4.hodge();
    let mut m = linalg::zeros(basis.len(), basis.len());
    for (col, b) in basis.iter().enumerate() {
        let img = star.wedge(&Form::basis(&space, b)?)?.hodge();
        for (row, r) in basis.iter().enumerate() {
            m[row][col] = img.coeff(r);
        }
    }
    Ok(m)
}

/// Self-adjointness for the `Λ²` inner product: `Mᵀ G = G M`.
pub fn is_self_adjoint<S: Field>(m: &Mat<S>, g: &Mat<S>) -> bool {
    let lhs = linalg::mat_mul(&linalg::transpose(m), g);
    let rhs = linalg::mat_mul(g, m);
    lhs == rhs
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenspace {
    pub value: f64,
    pub multiplicity: usize,
    pub basis: Vec<Vec<f64>>,
}

pub const CLUSTER_TOL: f64 = 1e-9;

pub fn to_f64_matrix<S: Field>(m: &Mat<S>) -> Result<Mat<f64>> {
    m.iter()
        .map(|r| {
            r.iter()
                .map(|x| x.to_real_f64().ok_or(ExteriorError::NonRealEntry))
                .collect()
        })
        .collect()
}

/// Real spectrum with clustering at relative tolerance `tol`; eigenvalues
/// sorted descending.
pub fn spectrum(m: &Mat<f64>, tol: f64) -> Result<Vec<Eigenspace>> {
    let n = m.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let dm = nalgebra::DMatrix::from_fn(n, n, |i, j| m[i][j]);
    let scale = dm.amax().max(1.0);
    let symmetric = (0..n).all(|i| (0..i).all(|j| (m[i][j] - m[j][i]).abs() <= 1e-12 * scale));
    let mut values: Vec<f64> = if symmetric {
        let eig = nalgebra::SymmetricEigen::try_new(dm.clone(), 1e-14, 10_000)
            .ok_or(ExteriorError::NoConvergence)?;
        eig.eigenvalues.iter().copied().collect()
    } else {
        let schur = nalgebra::Schur::try_new(dm.clone(), 1e-14, 10_000)
            .ok_or(ExteriorError::NoConvergence)?;
        let ev = schur.complex_eigenvalues();
        let mut out = Vec::with_capacity(n);
        for c in ev.iter() {
            if c.im.abs() > 1e-7 * scale {
                return Err(ExteriorError::NonRealSpectrum { re: c.re, im: c.im });
            }
            out.push(c.re);
        }
        out
    };
    values.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let vmax = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let eps = if vmax > 0.0 { tol * vmax } else { tol };
    let cluster_eps = if symmetric { eps } else { eps.max(1e-6 * vmax) };
    let mut groups: Vec<Vec<f64>> = Vec::new();
    for v in values {
        match groups.last_mut() {
            Some(g) if (g[0] - v).abs() <= cluster_eps => g.push(v),
            _ => groups.push(vec![v]),
        }
    }
    let mut out = Vec::new();
    for g in groups {
        let value = g.iter().sum::<f64>() / g.len() as f64;
        let shifted = &dm - nalgebra::DMatrix::identity(n, n) * value;
        let svd = shifted.svd(false, true);
        let vt = svd.v_t.ok_or(ExteriorError::NoConvergence)?;
        let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
        idx.sort_by(|&a, &b| {
            svd.singular_values[a]
                .partial_cmp(&svd.singular_values[b])
                .unwrap()
        });
        let basis = idx
            .iter()
            .take(g.len())
            .map(|&k| vt.row(k).iter().copied().collect())
            .collect();
        out.push(Eigenspace {
            value,
            multiplicity: g.len(),
            basis,
        });
    }
    Ok(out)
}

/// Exact eigenvalues with multiplicities, obtained by rationalising the
/// floating spectrum and confirming each candidate by an exact kernel
/// computation. Returns `None` when the candidates do not account for the
/// full dimension.
pub fn exact_spectrum(m: &Mat<Gq>) -> Result<Option<Vec<(Gq, usize)>>> {
    let n = m.len();
    let fm = to_f64_matrix(m)?;
    let approx = spectrum(&fm, CLUSTER_TOL)?;
    let mut out = Vec::new();
    let mut total = 0;
    for e in approx {
        let Some((p, q)) = rationalize(e.value, 10_000) else {
            return Ok(None);
        };
        let lam = Gq::ratio(p, q);
        let shifted: Mat<Gq> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { &m[i][j] - &lam } else { m[i][j].clone() })
                    .collect()
            })
            .collect();
        let nullity = n - linalg::rank(&shifted, 0.0);
        total += nullity;
        out.push((lam, nullity));
    }
    if total == n {
        Ok(Some(out))
    } else {
        Ok(None)
    }
}

/// Coefficients that a vector-valued 2-form may carry: anything closed
/// under addition and scaling by the form's field.
pub trait Module<S: Field>: Clone {
    fn scaled(&self, s: &S) -> Self;
    fn plus(&self, o: &Self) -> Self;
    fn norm(&self) -> f64;
    fn is_zero_module(&self) -> bool;
}

impl<S: Field> Module<S> for Mat<S> {
    fn scaled(&self, s: &S) -> Self {
        linalg::mat_scale(self, s)
    }
    fn plus(&self, o: &Self) -> Self {
        self.iter()
            .zip(o)
            .map(|(r, t)| r.iter().zip(t).map(|(a, b)| a.add(b)).collect())
            .collect()
    }
    fn norm(&self) -> f64 {
        self.iter()
            .flat_map(|r| r.iter())
            .fold(0.0f64, |a, x| a.max(x.magnitude()))
    }
    fn is_zero_module(&self) -> bool {
        linalg::is_zero_mat(self)
    }
}

/// A 2-form with module-valued coefficients indexed by increasing pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct ValuedTwoForm<M> {
    pub dim: usize,
    pub coeffs: BTreeMap<(usize, usize), M>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfDuality {
    pub holds: bool,
    pub residual: f64,
}

/// Tests `B_Ω F = λ F` entrywise.
pub fn selfduality_check<S: Field, M: Module<S>>(
    omega4: &Form<S>,
    lambda: &S,
    f: &ValuedTwoForm<M>,
    tol: f64,
) -> Result<SelfDuality> {
    if lambda.is_zero() {
        return Err(ExteriorError::ZeroLambda);
    }
    let n = omega4.space.dim;
    if f.dim != n {
        return Err(ExteriorError::SpaceMismatch);
    }
    let b = b_omega_matrix(omega4)?;
    let basis = combinations(n, 2);
    let mut residual = 0.0f64;
    let mut exact_zero = true;
    for (row, r) in basis.iter().enumerate() {
        let mut acc: Option<M> = f.coeffs.get(&(r[0], r[1])).map(|m| m.scaled(&lambda.neg()));
        for (col, c) in basis.iter().enumerate() {
            if b[row][col].is_zero() {
                continue;
            }
            if let Some(m) = f.coeffs.get(&(c[0], c[1])) {
                let t = m.scaled(&b[row][col]);
                acc = Some(match acc {
                    Some(a) => a.plus(&t),
                    None => t,
                });
            }
        }
        if let Some(a) = acc {
            residual = residual.max(a.norm());
            if !a.is_zero_module() {
                exact_zero = false;
            }
        }
    }
    let holds = if S::is_exact() { exact_zero } else { residual <= tol };
    Ok(SelfDuality { holds, residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(space: &Arc<MetricSpace<Gq>>, idx: &[usize]) -> Form<Gq> {
        Form::basis(space, idx).unwrap()
    }

    #[test]
    fn wedge_basics() {
        let s = MetricSpace::<Gq>::euclidean(4);
        let a = e(&s, &[0]).wedge(&e(&s, &[1])).unwrap();
        assert_eq!(a.coeff(&[0, 1]), Gq::one());
        assert!(e(&s, &[0]).wedge(&e(&s, &[0])).unwrap().is_zero());
        let x = e(&s, &[0, 1]);
        let y = e(&s, &[2, 3]);
        assert_eq!(x.wedge(&y).unwrap(), y.wedge(&x).unwrap());
    }

    #[test]
    fn hodge_on_r4() {
        let s = MetricSpace::<Gq>::euclidean(4);
        assert_eq!(e(&s, &[0, 1]).hodge(), e(&s, &[2, 3]));
        for k in combinations(4, 2) {
            let w = e(&s, &k);
            assert_eq!(w.hodge().hodge(), w);
        }
    }

    #[test]
    fn b_of_volume_is_hodge() {
        let s = MetricSpace::<Gq>::euclidean(4);
        let vol = Form::volume(&s);
        for k in combinations(4, 2) {
            let w = e(&s, &k);
            assert_eq!(b_omega_def(&vol, &w).unwrap(), w.hodge());
            assert_eq!(b_omega_contract(&vol, &w).unwrap(), w.hodge());
        }
    }

    #[test]
    fn contraction_sign_depends_on_volume_root() {
        let abs = MetricSpace::<Gq>::lorentzian(4, VolumeRoot::Absolute).unwrap();
        let om = e(&abs, &[0, 1, 2, 3]);
        let w = e(&abs, &[0, 3]);
        let d = b_omega_def(&om, &w).unwrap();
        let c = b_omega_contract(&om, &w).unwrap();
        assert_eq!(d, c.scale(&Gq::int(-1)));
        let pr = MetricSpace::<Gq>::lorentzian(4, VolumeRoot::Principal).unwrap();
        let om = e(&pr, &[0, 1, 2, 3]);
        let w = e(&pr, &[0, 3]);
        assert_eq!(b_omega_def(&om, &w).unwrap(), b_omega_contract(&om, &w).unwrap());
    }

    #[test]
    fn spectrum_of_identity() {
        let id: Mat<f64> = linalg::identity(6);
        let sp = spectrum(&id, CLUSTER_TOL).unwrap();
        assert_eq!(sp.len(), 1);
        assert_eq!(sp[0].multiplicity, 6);
    }

    #[test]
    fn zero_lambda_rejected() {
        let s = MetricSpace::<Gq>::euclidean(4);
        let f: ValuedTwoForm<Mat<Gq>> = ValuedTwoForm {
            dim: 4,
            coeffs: BTreeMap::new(),
        };
        assert_eq!(
            selfduality_check(&Form::volume(&s), &Gq::zero(), &f, 0.0),
            Err(ExteriorError::ZeroLambda)
        );
    }
}
