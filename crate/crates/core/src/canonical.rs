//! Concrete parallel 4-forms: Kähler, hyper-Kähler, quaternionic Kähler,
//! G2, Spin(7), Kostant alternations and the spin-m/2 forms, together with
//! the symmetrised pairings on `SᵐH` and the torsion admissibility
//! projector.

use crate::exterior::{combinations, sort_with_sign, ExteriorError, Form, MetricSpace};
use crate::linalg::{self, Mat};
use crate::scalar::Gq;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CanonicalError {
    #[error("parameter out of range: {0}")]
    BadParameter(String),
    #[error("basis is not closed under the commutator")]
    NotClosed,
    #[error("bilinear form is degenerate on the span")]
    DegenerateForm,
    #[error("matrix is not antisymmetric")]
    NotAntisymmetric,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error(transparent)]
    Exterior(#[from] ExteriorError),
}

pub type Result<T> = std::result::Result<T, CanonicalError>;

fn q(v: i64) -> Gq {
    Gq::int(v)
}

// ---------------------------------------------------------------- octonions

type Quat = [i64; 4];

fn qmul(a: &Quat, b: &Quat) -> Quat {
    [
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    ]
}

fn qconj(a: &Quat) -> Quat {
    [a[0], -a[1], -a[2], -a[3]]
}

/// Octonions as pairs of quaternions with
/// `(a,b)(c,d) = (ac − d̄b, da + bc̄)`.
fn omul(x: &[i64; 8], y: &[i64; 8]) -> [i64; 8] {
    let a: Quat = [x[0], x[1], x[2], x[3]];
    let b: Quat = [x[4], x[5], x[6], x[7]];
    let c: Quat = [y[0], y[1], y[2], y[3]];
    let d: Quat = [y[4], y[5], y[6], y[7]];
    let ac = qmul(&a, &c);
    let db = qmul(&qconj(&d), &b);
    let da = qmul(&d, &a);
    let bc = qmul(&b, &qconj(&c));
    let mut out = [0; 8];
    for k in 0..4 {
        out[k] = ac[k] - db[k];
        out[k + 4] = da[k] + bc[k];
    }
    out
}

/// Multiplication table on the basis `{1, i₁, …, i₇}`: `e_a e_b = s·e_c`.
#[derive(Debug, Clone, PartialEq)]
pub struct OctonionAlgebra {
    pub table: [[(i8, u8); 8]; 8],
}

impl Default for OctonionAlgebra {
    fn default() -> Self {
        Self::cayley_dickson()
    }
}

impl OctonionAlgebra {
    pub fn cayley_dickson() -> Self {
        let mut table = [[(0i8, 0u8); 8]; 8];
        for a in 0..8 {
            for b in 0..8 {
                let p = omul(&unit(a), &unit(b));
                let c = p.iter().position(|&v| v != 0).expect("nonzero product");
                table[a][b] = (p[c] as i8, c as u8);
            }
        }
        OctonionAlgebra { table }
    }

    pub fn mul(&self, x: &[i64; 8], y: &[i64; 8]) -> [i64; 8] {
        let mut out = [0; 8];
        for a in 0..8 {
            if x[a] == 0 {
                continue;
            }
            for b in 0..8 {
                if y[b] == 0 {
                    continue;
                }
                let (s, c) = self.table[a][b];
                out[c as usize] += s as i64 * x[a] * y[b];
            }
        }
        out
    }

    pub fn associator(&self, x: &[i64; 8], y: &[i64; 8], z: &[i64; 8]) -> [i64; 8] {
        let l = self.mul(&self.mul(x, y), z);
        let r = self.mul(x, &self.mul(y, z));
        let mut out = [0; 8];
        for k in 0..8 {
            out[k] = l[k] - r[k];
        }
        out
    }
}

fn unit(a: usize) -> [i64; 8] {
    let mut v = [0; 8];
    v[a] = 1;
    v
}

fn dot8(x: &[i64; 8], y: &[i64; 8]) -> i64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// The 3-form `φ(x,y,z) = ⟨xy, z⟩` on `Im 𝕆 = ℝ⁷`.
pub fn g2_phi(alg: &OctonionAlgebra) -> Form<Gq> {
    let s = MetricSpace::euclidean(7);
    let mut phi = Form::zero(&s, 3);
    for t in combinations(7, 3) {
        let v = dot8(&alg.mul(&unit(t[0] + 1), &unit(t[1] + 1)), &unit(t[2] + 1));
        if v != 0 {
            phi.add_term(&t, q(v)).expect("valid indices");
        }
    }
    phi
}

/// The raw associator form `⟨[x,y,z], w⟩` on `ℝ⁷`.
pub fn associator_form(alg: &OctonionAlgebra) -> Form<Gq> {
    let s = MetricSpace::euclidean(7);
    let mut out = Form::zero(&s, 4);
    for t in combinations(7, 4) {
        let a = alg.associator(&unit(t[0] + 1), &unit(t[1] + 1), &unit(t[2] + 1));
        let v = dot8(&a, &unit(t[3] + 1));
        if v != 0 {
            out.add_term(&t, q(v)).expect("valid indices");
        }
    }
    out
}

/// `(φ, ψ)` with `ψ = −½⟨[x,y,z], w⟩`, which equals `∗φ` for the standard
/// orientation of `ℝ⁷`.
pub fn g2_forms() -> (Form<Gq>, Form<Gq>) {
    let alg = OctonionAlgebra::cayley_dickson();
    let phi = g2_phi(&alg);
    let psi = associator_form(&alg).scale(&Gq::ratio(-1, 2));
    (phi, psi)
}

/// `Ω = dt∧φ + ψ` on `ℝ⁸ = ℝ·1 ⊕ Im 𝕆`, with `t` the first coordinate.
pub fn spin7_form() -> Form<Gq> {
    let (phi, psi) = g2_forms();
    let s = MetricSpace::euclidean(8);
    let mut out = Form::zero(&s, 4);
    for (k, c) in phi.coeffs() {
        out.add_term(&[0, k[0] + 1, k[1] + 1, k[2] + 1], c.clone())
            .expect("valid indices");
    }
    for (k, c) in psi.coeffs() {
        out.add_term(&[k[0] + 1, k[1] + 1, k[2] + 1, k[3] + 1], c.clone())
            .expect("valid indices");
    }
    out
}

// -------------------------------------------------------------- quaternions

/// Complex structures `J₁, J₂, J₃ = J₁J₂` on `ℝ^{4m} = ℍᵐ`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuaternionTriple {
    pub m: usize,
    pub j: [Mat<Gq>; 3],
}

/// Matrix of right multiplication by the quaternion `u` on `ℍᵐ`, basis
/// `(1, i, j, k)` per block.
fn right_mult(m: usize, u: &Quat) -> Mat<Gq> {
    let n = 4 * m;
    let mut r = linalg::zeros(n, n);
    for blk in 0..m {
        for b in 0..4 {
            let mut e: Quat = [0; 4];
            e[b] = 1;
            let p = qmul(&e, u);
            for c in 0..4 {
                if p[c] != 0 {
                    r[4 * blk + c][4 * blk + b] = q(p[c]);
                }
            }
        }
    }
    r
}

impl QuaternionTriple {
    pub fn standard(m: usize) -> Result<Self> {
        if m < 1 {
            return Err(CanonicalError::BadParameter("m must be at least 1".into()));
        }
        let j1 = right_mult(m, &[0, 1, 0, 0]);
        let j2 = right_mult(m, &[0, 0, 1, 0]);
        let j3 = linalg::mat_mul(&j1, &j2);
        Ok(QuaternionTriple { m, j: [j1, j2, j3] })
    }

    /// The frame `J'_α = Σ_β R_{αβ} J_β` for a rotation `R`.
    pub fn rotated(&self, r: &Mat<Gq>) -> Self {
        let n = 4 * self.m;
        let mut js: Vec<Mat<Gq>> = Vec::new();
        for a in 0..3 {
            let mut acc = linalg::zeros(n, n);
            for b in 0..3 {
                acc = linalg::mat_sub(&acc, &linalg::mat_scale(&self.j[b], &(-&r[a][b])));
            }
            js.push(acc);
        }
        QuaternionTriple {
            m: self.m,
            j: [js[0].clone(), js[1].clone(), js[2].clone()],
        }
    }

    /// `ω_α(X, Y) = g(J_α X, Y)`.
    pub fn kaehler_forms(&self) -> [Form<Gq>; 3] {
        let n = 4 * self.m;
        let s = MetricSpace::euclidean(n);
        let mk = |j: &Mat<Gq>| {
            let mut f = Form::zero(&s, 2);
            for k in combinations(n, 2) {
                let v = j[k[1]][k[0]].clone();
                if !v.is_zero() {
                    f.add_term(&k, v).expect("valid indices");
                }
            }
            f
        };
        [mk(&self.j[0]), mk(&self.j[1]), mk(&self.j[2])]
    }
}

/// Rational rotation of `ℝ³` induced by conjugation with a nonzero integer
/// quaternion.
pub fn rotation_from_quaternion(a: i64, b: i64, c: i64, d: i64) -> Mat<Gq> {
    let n = a * a + b * b + c * c + d * d;
    assert!(n > 0, "zero quaternion");
    let raw = [
        [a * a + b * b - c * c - d * d, 2 * (b * c - a * d), 2 * (b * d + a * c)],
        [2 * (b * c + a * d), a * a - b * b + c * c - d * d, 2 * (c * d - a * b)],
        [2 * (b * d - a * c), 2 * (c * d + a * b), a * a - b * b - c * c + d * d],
    ];
    raw.iter()
        .map(|r| r.iter().map(|&v| Gq::ratio(v, n)).collect())
        .collect()
}

/// `Ω = Σ_α ω_α ∧ ω_α` for a given frame.
pub fn quaternionic_form_from(t: &QuaternionTriple) -> Form<Gq> {
    let w = t.kaehler_forms();
    let mut out = w[0].wedge(&w[0]).expect("same space");
    for f in &w[1..] {
        out = out.add(&f.wedge(f).expect("same space")).expect("same space");
    }
    out
}

pub fn quaternionic_form(m: usize) -> Result<Form<Gq>> {
    Ok(quaternionic_form_from(&QuaternionTriple::standard(m)?))
}

/// The six parallel 4-forms `ω_α∧ω_β` (α ≤ β) of a hyper-Kähler structure
/// on `ℝ^{4k}`.
pub fn hyperkaehler_forms(k: usize) -> Result<Vec<((usize, usize), Form<Gq>)>> {
    let w = QuaternionTriple::standard(k)?.kaehler_forms();
    let mut out = Vec::new();
    for a in 0..3 {
        for b in a..3 {
            out.push(((a + 1, b + 1), w[a].wedge(&w[b])?));
        }
    }
    Ok(out)
}

/// The standard Kähler form `Σ e^{2i}∧e^{2i+1}` on `ℝ^{2m}`.
pub fn kaehler_form(m: usize) -> Form<Gq> {
    let s = MetricSpace::euclidean(2 * m);
    let mut f = Form::zero(&s, 2);
    for i in 0..m {
        f.add_term(&[2 * i, 2 * i + 1], q(1)).expect("valid indices");
    }
    f
}

pub fn kaehler_form_sq(m: usize) -> Result<Form<Gq>> {
    if m < 2 {
        return Err(CanonicalError::BadParameter("m must be at least 2".into()));
    }
    let w = kaehler_form(m);
    Ok(w.wedge(&w)?)
}

// ------------------------------------------------------------------ Kostant

/// `E_ab − E_ba`, `a < b`.
pub fn so_basis(n: usize) -> Vec<Mat<Gq>> {
    combinations(n, 2)
        .into_iter()
        .map(|k| {
            let mut m = linalg::zeros(n, n);
            m[k[0]][k[1]] = q(1);
            m[k[1]][k[0]] = q(-1);
            m
        })
        .collect()
}

/// Basis of `u(2) ⊂ so(4)`: antisymmetric matrices commuting with the
/// standard complex structure.
pub fn u2_basis() -> Vec<Mat<Gq>> {
    let so4 = so_basis(4);
    let mut j = linalg::zeros(4, 4);
    j[1][0] = q(1);
    j[0][1] = q(-1);
    j[3][2] = q(1);
    j[2][3] = q(-1);
    // linear map c ↦ [Σ c_k X_k, J] flattened
    let cols = so4.len();
    let mut a: Mat<Gq> = linalg::zeros(16, cols);
    for (k, x) in so4.iter().enumerate() {
        let c = linalg::mat_sub(&linalg::mat_mul(x, &j), &linalg::mat_mul(&j, x));
        for r in 0..4 {
            for s in 0..4 {
                a[4 * r + s][k] = c[r][s].clone();
            }
        }
    }
    linalg::nullspace(&a, cols, 0.0)
        .into_iter()
        .map(|v| {
            let mut m = linalg::zeros(4, 4);
            for (k, c) in v.iter().enumerate() {
                m = linalg::mat_sub(&m, &linalg::mat_scale(&so4[k], &-c));
            }
            m
        })
        .collect()
}

/// `B(X, Y) = −tr(XY)`.
pub fn trace_form(basis: &[Mat<Gq>]) -> Mat<Gq> {
    basis
        .iter()
        .map(|x| {
            basis
                .iter()
                .map(|y| -linalg::trace(&linalg::mat_mul(x, y)))
                .collect()
        })
        .collect()
}

fn matrix_as_two_form(s: &Arc<MetricSpace<Gq>>, x: &Mat<Gq>) -> Form<Gq> {
    let n = s.dim();
    let mut f = Form::zero(s, 2);
    for k in combinations(n, 2) {
        if !x[k[0]][k[1]].is_zero() {
            f.add_term(&k, x[k[0]][k[1]].clone()).expect("valid indices");
        }
    }
    f
}

/// `alt B`: the image of the invariant form, transported to `S²𝔤` by
/// itself, under `S²Λ²V* → Λ⁴V*`.
pub fn kostant_form(lie_basis: &[Mat<Gq>], b: &Mat<Gq>) -> Result<Form<Gq>> {
    let k = lie_basis.len();
    if k == 0 || b.len() != k {
        return Err(CanonicalError::DegenerateForm);
    }
    let n = lie_basis[0].len();
    for x in lie_basis {
        if x.len() != n || x.iter().any(|r| r.len() != n) {
            return Err(CanonicalError::Shape("basis matrices must be n×n".into()));
        }
        if linalg::transpose(x) != linalg::mat_scale(x, &q(-1)) {
            return Err(CanonicalError::NotAntisymmetric);
        }
    }
    // closure: every commutator lies in the span
    let mut span: Mat<Gq> = linalg::zeros(n * n, k);
    for (c, x) in lie_basis.iter().enumerate() {
        for r in 0..n {
            for s in 0..n {
                span[n * r + s][c] = x[r][s].clone();
            }
        }
    }
    for x in lie_basis {
        for y in lie_basis {
            let c = linalg::mat_sub(&linalg::mat_mul(x, y), &linalg::mat_mul(y, x));
            let rhs: Vec<Gq> = c.iter().flat_map(|r| r.iter().cloned()).collect();
            if linalg::solve(&span, &rhs, 0.0).is_none() {
                return Err(CanonicalError::NotClosed);
            }
        }
    }
    let binv = linalg::inverse(b, 0.0).ok_or(CanonicalError::DegenerateForm)?;
    let s = MetricSpace::euclidean(n);
    let hats: Vec<Form<Gq>> = lie_basis.iter().map(|x| matrix_as_two_form(&s, x)).collect();
    let mut out = Form::zero(&s, 4);
    for i in 0..k {
        for j in 0..k {
            if binv[i][j].is_zero() {
                continue;
            }
            out = out.add(&hats[i].wedge(&hats[j])?.scale(&binv[i][j]))?;
        }
    }
    Ok(out)
}

// ------------------------------------------------------------ spin-m forms

/// Basis `h_A` of `SᵐH*`: index `k` is the multiset with `m−k` ones and
/// `k` twos (0-based entries).
pub fn multiset(m: usize, k: usize) -> Vec<usize> {
    let mut v = vec![0; m - k];
    v.extend(std::iter::repeat(1).take(k));
    v
}

fn eps(a: usize, b: usize) -> i64 {
    match (a, b) {
        (0, 1) => 1,
        (1, 0) => -1,
        _ => 0,
    }
}

fn permutations(v: &[usize]) -> Vec<Vec<usize>> {
    if v.len() <= 1 {
        return vec![v.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..v.len() {
        let mut rest = v.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

/// `ω_Hᵐ(h_A, h_B) = (m!)⁻² Σ_{σ,τ} Π_i ε(a_{σi}, b_{τi})`.
pub fn omega_h_power(m: usize) -> Result<Mat<Gq>> {
    if m < 1 {
        return Err(CanonicalError::BadParameter("m must be at least 1".into()));
    }
    let norm = {
        let f = crate::exterior::factorial(m);
        f * f
    };
    let mut w = linalg::zeros(m + 1, m + 1);
    for a in 0..=m {
        for b in 0..=m {
            let pa = permutations(&multiset(m, a));
            let pb = permutations(&multiset(m, b));
            let mut s = 0i64;
            for x in &pa {
                for y in &pb {
                    s += x.iter().zip(y).map(|(&i, &j)| eps(i, j)).product::<i64>();
                }
            }
            w[a][b] = Gq::ratio(s, norm);
        }
    }
    Ok(w)
}

/// Raised form `ω^{AB}` defined by `ω^{AC} ω_{BC} = −δ^A_B`, i.e.
/// `−(ω⁻¹)ᵀ`; for antisymmetric `ω` this is the matrix inverse.
pub fn omega_raise(w: &Mat<Gq>) -> Option<Mat<Gq>> {
    let inv = linalg::inverse(w, 0.0)?;
    Some(linalg::mat_scale(&linalg::transpose(&inv), &q(-1)))
}

/// `ω^{AB} ω_{AB}`.
pub fn omega_self_contraction(w: &Mat<Gq>) -> Option<Gq> {
    let up = omega_raise(w)?;
    let mut acc = Gq::zero();
    for (r, s) in up.iter().zip(w) {
        for (x, y) in r.iter().zip(s) {
            acc += &(x * y);
        }
    }
    Some(acc)
}

fn check_square(w: &Mat<Gq>, what: &str) -> Result<usize> {
    let n = w.len();
    if n == 0 || w.iter().any(|r| r.len() != n) {
        return Err(CanonicalError::Shape(format!("{what} must be square")));
    }
    Ok(n)
}

fn spin_form_from(e_form: &Mat<Gq>, m: usize) -> Result<Form<Gq>> {
    let p = check_square(e_form, "the E-form")?;
    let w = omega_h_power(m)?;
    let h = m + 1;
    let n = p * h;
    let s = MetricSpace::euclidean(n);
    let split = |i: usize| (i / h, i % h);
    let t = |i: usize, j: usize, k: usize, l: usize| -> Gq {
        let (a, aa) = split(i);
        let (b, bb) = split(j);
        let (c, cc) = split(k);
        let (d, dd) = split(l);
        let v = &e_form[a][b] * &e_form[c][d];
        if v.is_zero() {
            return v;
        }
        &(&v * &w[aa][cc]) * &w[bb][dd]
    };
    let mut out = Form::zero(&s, 4);
    for key in combinations(n, 4) {
        let mut acc = Gq::zero();
        for perm in permutations(&[0, 1, 2, 3]) {
            let idx: Vec<usize> = perm.iter().map(|&x| key[x]).collect();
            let (_, sign) = sort_with_sign(&perm).expect("permutation");
            let v = t(idx[0], idx[1], idx[2], idx[3]);
            if sign < 0 {
                acc -= &v;
            } else {
                acc += &v;
            }
        }
        if !acc.is_zero() {
            out.add_term(&key, acc)?;
        }
    }
    Ok(out)
}

/// `Ω = Σ ω_ab ω_cd ω_AC ω_BD X^{aA}∧X^{bB}∧X^{cC}∧X^{dD}` on the
/// `p(m+1)`-dimensional model of `E*⊗SᵐH*`, flat index `a(m+1) + A`.
pub fn spin_m_form(m: usize, omega_e: &Mat<Gq>) -> Result<Form<Gq>> {
    if m % 2 == 0 {
        return Err(CanonicalError::BadParameter(
            "spin_m_form needs odd m; use spin_m_form_even".into(),
        ));
    }
    let p = check_square(omega_e, "ω_E")?;
    if p % 2 != 0 || linalg::transpose(omega_e) != linalg::mat_scale(omega_e, &q(-1)) {
        return Err(CanonicalError::NotAntisymmetric);
    }
    if linalg::determinant(omega_e).is_zero() {
        return Err(CanonicalError::DegenerateForm);
    }
    spin_form_from(omega_e, m)
}

/// The variant with a symmetric `γ_E` for even `m`.
pub fn spin_m_form_even(m: usize, gamma_e: &Mat<Gq>) -> Result<Form<Gq>> {
    if m % 2 != 0 || m == 0 {
        return Err(CanonicalError::BadParameter(
            "spin_m_form_even needs even m ≥ 2".into(),
        ));
    }
    check_square(gamma_e, "γ_E")?;
    if linalg::transpose(gamma_e) != *gamma_e {
        return Err(CanonicalError::Shape("γ_E must be symmetric".into()));
    }
    spin_form_from(gamma_e, m)
}

/// The metric `g = ω_E ⊗ ω_Hᵐ` on the flat index `a(m+1) + A`.
pub fn spin_metric(m: usize, omega_e: &Mat<Gq>) -> Result<Mat<Gq>> {
    let w = omega_h_power(m)?;
    let p = check_square(omega_e, "ω_E")?;
    let h = m + 1;
    let mut g = linalg::zeros(p * h, p * h);
    for a in 0..p {
        for b in 0..p {
            for aa in 0..h {
                for bb in 0..h {
                    g[a * h + aa][b * h + bb] = &omega_e[a][b] * &w[aa][bb];
                }
            }
        }
    }
    Ok(g)
}

/// The contraction `K_{cCdD} = −½ S^{ab} ω^{AB} (alt Ω)_{aA bB cC dD}` of
/// `S_{ab} ω_{AB}` against the spin-m form, as a `p(m+1)`-square matrix.
/// `alt` is the unnormalised alternation, half of whose terms survive the
/// contraction.
pub fn spin_m_contraction(m: usize, omega_e: &Mat<Gq>, s: &Mat<Gq>) -> Result<Mat<Gq>> {
    let omega = spin_m_form(m, omega_e)?;
    let p = omega_e.len();
    let h = m + 1;
    let n = p * h;
    let w = omega_h_power(m)?;
    let w_up = omega_raise(&w).ok_or(CanonicalError::DegenerateForm)?;
    let e_inv = linalg::inverse(omega_e, 0.0).ok_or(CanonicalError::DegenerateForm)?;
    let s_up = linalg::mat_mul(&linalg::mat_mul(&e_inv, s), &linalg::transpose(&e_inv));
    let mut k = linalg::zeros(n, n);
    let half = Gq::ratio(-1, 2);
    for i in 0..n {
        for j in 0..n {
            let coef = &s_up[i / h][j / h] * &w_up[i % h][j % h];
            if coef.is_zero() {
                continue;
            }
            let coef = &coef * &half;
            for c in 0..n {
                for d in 0..n {
                    let v = omega.evaluate(&[i, j, c, d]);
                    if !v.is_zero() {
                        k[c][d] += &(&coef * &v);
                    }
                }
            }
        }
    }
    Ok(k)
}

/// The scalar `f` with `−K = f · S_{cd} ω_{CD}`, when `K` is proportional.
pub fn spin_m_contraction_factor(m: usize, omega_e: &Mat<Gq>, s: &Mat<Gq>) -> Result<Option<Gq>> {
    let k = spin_m_contraction(m, omega_e, s)?;
    let target = spin_metric(m, s)?;
    let n = k.len();
    let mut factor: Option<Gq> = None;
    for i in 0..n {
        for j in 0..n {
            let t = &target[i][j];
            let v = -&k[i][j];
            if t.is_zero() {
                if !v.is_zero() {
                    return Ok(None);
                }
                continue;
            }
            let f = &v / t;
            match &factor {
                None => factor = Some(f),
                Some(g) if *g != f => return Ok(None),
                _ => {}
            }
        }
    }
    Ok(factor.or(Some(Gq::zero())))
}

// -------------------------------------------------------------- admissibility

/// Torsion components `T^{cγ}_{aα,bβ}` on the rank-`(p, 2)` model.
#[derive(Debug, Clone, PartialEq)]
pub struct TorsionTensor {
    pub p: usize,
    data: Vec<Gq>,
}

impl TorsionTensor {
    pub fn zero(p: usize) -> Self {
        TorsionTensor {
            p,
            data: vec![Gq::zero(); p * 2 * (2 * p) * (2 * p)],
        }
    }

    fn idx(&self, c: usize, g: usize, a: usize, al: usize, b: usize, be: usize) -> usize {
        let n = 2 * self.p;
        ((c * 2 + g) * n + (a * 2 + al)) * n + (b * 2 + be)
    }

    pub fn get(&self, c: usize, g: usize, a: usize, al: usize, b: usize, be: usize) -> &Gq {
        &self.data[self.idx(c, g, a, al, b, be)]
    }

    /// Sets a component together with its antisymmetric partner.
    pub fn set(&mut self, c: usize, g: usize, a: usize, al: usize, b: usize, be: usize, v: Gq) {
        let i = self.idx(c, g, a, al, b, be);
        let j = self.idx(c, g, b, be, a, al);
        if i == j {
            return;
        }
        self.data[j] = -&v;
        self.data[i] = v;
    }

    pub fn is_antisymmetric(&self) -> bool {
        let p = self.p;
        for c in 0..p {
            for g in 0..2 {
                for a in 0..p {
                    for al in 0..2 {
                        for b in 0..p {
                            for be in 0..2 {
                                let x = self.get(c, g, a, al, b, be);
                                let y = self.get(c, g, b, be, a, al);
                                if !(x + y).is_zero() {
                                    return false;
                                }
                            }
                        }
                    }
                }
            }
        }
        true
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    /// Embeds `Q_{c; ab; δαβ}` (skew in `ab`, symmetric in `δαβ`) of
    /// `E*⊗Λ²E⊗S³H` into `TM⊗Λ²T*M` by raising `δ` with `ε`.
    pub fn from_e_wedge_s3(p: usize, qf: impl Fn(usize, usize, usize, usize, usize, usize) -> Gq) -> Self {
        let mut t = TorsionTensor::zero(p);
        let raise = raise_eps();
        for c in 0..p {
            for g in 0..2 {
                for a in 0..p {
                    for al in 0..2 {
                        for b in 0..p {
                            for be in 0..2 {
                                let mut v = Gq::zero();
                                for d in 0..2 {
                                    if raise[g][d] != 0 {
                                        v += &(&Gq::int(raise[g][d]) * &qf(c, a, b, d, al, be));
                                    }
                                }
                                let i = t.idx(c, g, a, al, b, be);
                                t.data[i] = v;
                            }
                        }
                    }
                }
            }
        }
        t
    }
}

/// `(εᵀ)⁻¹`, the inverse of lowering `L_δ = Σ_γ P^γ ε_{γδ}`.
fn raise_eps() -> [[i64; 2]; 2] {
    // εᵀ = [[0,-1],[1,0]], its inverse is [[0,1],[-1,0]]
    [[0, 1], [-1, 0]]
}

/// Projection onto `E*⊗Λ²E⊗S³H` and the admissibility verdict (projection
/// zero).
pub fn admissibility_projector(t: &TorsionTensor) -> Result<(TorsionTensor, bool)> {
    let p = t.p;
    if t.data.len() != p * 2 * (2 * p) * (2 * p) {
        return Err(CanonicalError::Shape("torsion tensor size".into()));
    }
    if !t.is_antisymmetric() {
        return Err(CanonicalError::Shape(
            "torsion must be antisymmetric in its lower slots".into(),
        ));
    }
    // P^{cγ}_{ab,αβ}: E-skew, H-symmetric part
    let pp = |c: usize, g: usize, a: usize, b: usize, al: usize, be: usize| -> Gq {
        let x = t.get(c, g, a, al, b, be) + t.get(c, g, a, be, b, al);
        &x * &Gq::ratio(1, 2)
    };
    // lower γ: L_{c;ab;δαβ} = Σ_γ P^{cγ}_{ab,αβ} ε_{γδ}
    let lower = |c: usize, a: usize, b: usize, d: usize, al: usize, be: usize| -> Gq {
        let mut v = Gq::zero();
        for g in 0..2 {
            let e = eps(g, d);
            if e != 0 {
                v += &(&Gq::int(e) * &pp(c, g, a, b, al, be));
            }
        }
        v
    };
    let sym = |c: usize, a: usize, b: usize, d: usize, al: usize, be: usize| -> Gq {
        let idx = [d, al, be];
        let mut acc = Gq::zero();
        for perm in permutations(&[0, 1, 2]) {
            acc += &lower(c, a, b, idx[perm[0]], idx[perm[1]], idx[perm[2]]);
        }
        &acc * &Gq::ratio(1, 6)
    };
    let proj = TorsionTensor::from_e_wedge_s3(p, sym);
    let admissible = proj.is_zero();
    Ok((proj, admissible))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn octonion_units_square_to_minus_one() {
        let alg = OctonionAlgebra::cayley_dickson();
        for a in 1..8 {
            assert_eq!(alg.table[a][a], (-1, 0));
        }
        for a in 0..8 {
            assert_eq!(alg.table[0][a], (1, a as u8));
            assert_eq!(alg.table[a][0], (1, a as u8));
        }
    }

    #[test]
    fn associator_is_minus_twice_star_phi() {
        let alg = OctonionAlgebra::cayley_dickson();
        let phi = g2_phi(&alg);
        let assoc = associator_form(&alg);
        assert_eq!(assoc, phi.hodge().scale(&q(-2)));
    }

    #[test]
    fn quaternion_triple_relations() {
        let t = QuaternionTriple::standard(2).unwrap();
        let id: Mat<Gq> = linalg::identity(8);
        let minus = linalg::mat_scale(&id, &q(-1));
        for j in &t.j {
            assert_eq!(linalg::mat_mul(j, j), minus);
        }
        let j21 = linalg::mat_mul(&t.j[1], &t.j[0]);
        assert_eq!(t.j[2], linalg::mat_scale(&j21, &q(-1)));
    }

    #[test]
    fn omega_h_m1_is_epsilon() {
        let w = omega_h_power(1).unwrap();
        assert_eq!(w, vec![vec![q(0), q(1)], vec![q(-1), q(0)]]);
    }

    #[test]
    fn u2_has_dimension_four() {
        assert_eq!(u2_basis().len(), 4);
    }

    #[test]
    fn kostant_rejects_empty_basis() {
        assert_eq!(kostant_form(&[], &vec![]), Err(CanonicalError::DegenerateForm));
    }
}

#[cfg(test)]
mod spectra {
    use super::*;
    use crate::exterior::{b_omega_matrix, exact_spectrum};

    fn spec(f: &Form<Gq>) -> Vec<(Gq, usize)> {
        exact_spectrum(&b_omega_matrix(f).unwrap()).unwrap().unwrap()
    }

    #[test]
    fn g2_and_spin7() {
        let (_, psi) = g2_forms();
        let s = spec(&psi);
        let mut mults: Vec<usize> = s.iter().map(|x| x.1).collect();
        mults.sort();
        assert_eq!(mults, vec![7, 14]);
        let s = spec(&spin7_form());
        let mut mults: Vec<usize> = s.iter().map(|x| x.1).collect();
        mults.sort();
        assert_eq!(mults, vec![7, 21]);
    }

    #[test]
    fn spin_factor() {
        let oe = vec![vec![q(0), q(1)], vec![q(-1), q(0)]];
        let s = vec![vec![q(1), q(2)], vec![q(2), q(-3)]];
        assert_eq!(spin_m_contraction_factor(1, &oe, &s).unwrap(), Some(q(12)));
        assert_eq!(spin_m_contraction_factor(3, &oe, &s).unwrap(), Some(q(20)));
        let k = kostant_form(&so_basis(4), &trace_form(&so_basis(4))).unwrap();
        assert!(k.is_zero());
        let b = u2_basis();
        let k = kostant_form(&b, &trace_form(&b)).unwrap();
        assert!(!k.is_zero());
        let mut qk = spec(&quaternionic_form(2).unwrap());
        qk.sort();
        assert_eq!(qk, vec![(q(-6), 10), (q(2), 15), (q(10), 3)]);
    }
}
