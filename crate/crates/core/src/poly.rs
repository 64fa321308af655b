//! Exact multivariate polynomials over the Gaussian rationals, reduced
//! modulo `u₊¹u₋² − u₊²u₋¹ = 1`, and square matrices of them.
//!
//! Variables `0..4` are always `u₊¹, u₊², u₋¹, u₋²`; base coordinates and
//! formal parameters follow. Monomials are exponent vectors with trailing
//! zeros trimmed, so polynomials from tables of different sizes mix freely.

use crate::linalg::Mat;
use crate::scalar::Gq;
use num_bigint::BigInt;
use num_rational::BigRational;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use thiserror::Error;

pub const UP1: usize = 0;
pub const UP2: usize = 1;
pub const UM1: usize = 2;
pub const UM2: usize = 3;
pub const N_U: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("polynomial degree {got} exceeds the bound {bound}")]
    DegreeExceeded { got: usize, bound: usize },
    #[error("expected charge {expected}, found a term of charge {got}")]
    Charge { expected: i64, got: i64 },
    #[error("matrix is not invertible in the supported class")]
    NotInvertible,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("inconsistent linear system: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, PolyError>;

pub type Mono = Vec<u16>;

fn trim(m: &mut Mono) {
    while m.last() == Some(&0) {
        m.pop();
    }
}

fn exp(m: &[u16], v: usize) -> u16 {
    m.get(v).copied().unwrap_or(0)
}

/// `deg u₊ − deg u₋` of a monomial.
pub fn mono_charge(m: &[u16]) -> i64 {
    exp(m, UP1) as i64 + exp(m, UP2) as i64 - exp(m, UM1) as i64 - exp(m, UM2) as i64
}

pub fn mono_degree(m: &[u16]) -> usize {
    m.iter().map(|&e| e as usize).sum()
}

fn mono_mul(a: &[u16], b: &[u16]) -> Mono {
    let n = a.len().max(b.len());
    let mut out: Mono = (0..n).map(|i| exp(a, i) + exp(b, i)).collect();
    trim(&mut out);
    out
}

fn binomial(n: u16, k: u16) -> BigInt {
    let mut r = BigInt::from(1);
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

/// Rewrites `(u₊¹u₋²)^k → (1 + u₊²u₋¹)^k` once; the output never contains
/// both `u₊¹` and `u₋²`.
fn reduce_mono(m: &[u16]) -> Vec<(Mono, BigInt)> {
    let k = exp(m, UP1).min(exp(m, UM2));
    if k == 0 {
        return vec![(m.to_vec(), BigInt::from(1))];
    }
    let mut base = m.to_vec();
    base.resize(base.len().max(N_U), 0);
    base[UP1] -= k;
    base[UM2] -= k;
    (0..=k)
        .map(|j| {
            let mut t = base.clone();
            t[UP2] += j;
            t[UM1] += j;
            trim(&mut t);
            (t, binomial(k, j))
        })
        .collect()
}

fn accumulate(map: &mut BTreeMap<Mono, Gq>, m: Mono, c: Gq) {
    if c.is_zero() {
        return;
    }
    use std::collections::btree_map::Entry;
    match map.entry(m) {
        Entry::Vacant(e) => {
            e.insert(c);
        }
        Entry::Occupied(mut e) => {
            let s = e.get() + &c;
            if s.is_zero() {
                e.remove();
            } else {
                *e.get_mut() = s;
            }
        }
    }
}

#[derive(Clone, PartialEq, Eq, Default, Hash)]
pub struct Poly {
    terms: BTreeMap<Mono, Gq>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(Gq::one())
    }

    pub fn constant(c: Gq) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Vec::new(), c);
        }
        Poly { terms }
    }

    pub fn int(v: i64) -> Self {
        Poly::constant(Gq::int(v))
    }

    pub fn var(v: usize) -> Self {
        let mut m = vec![0; v + 1];
        m[v] = 1;
        Poly::monomial(m, Gq::one())
    }

    /// A single term, reduced.
    pub fn monomial(mut m: Mono, c: Gq) -> Self {
        trim(&mut m);
        let mut terms = BTreeMap::new();
        if c.is_zero() {
            return Poly { terms };
        }
        for (t, k) in reduce_mono(&m) {
            accumulate(&mut terms, t, &c * &Gq::real(BigRational::from_integer(k)));
        }
        Poly { terms }
    }

    /// Builds a polynomial from arbitrary (possibly unreduced) terms.
    pub fn from_terms(it: impl IntoIterator<Item = (Mono, Gq)>) -> Self {
        let mut terms = BTreeMap::new();
        for (mut m, c) in it {
            trim(&mut m);
            for (t, k) in reduce_mono(&m) {
                accumulate(&mut terms, t, &c * &Gq::real(BigRational::from_integer(k)));
            }
        }
        Poly { terms }
    }

    pub fn terms(&self) -> &BTreeMap<Mono, Gq> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn constant_term(&self) -> Gq {
        self.terms.get(&Vec::new()).cloned().unwrap_or_else(Gq::zero)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.is_empty())
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(|m| mono_degree(m)).max().unwrap_or(0)
    }

    /// Degree in the four `u` variables.
    pub fn u_degree(&self) -> usize {
        self.terms
            .keys()
            .map(|m| (0..N_U).map(|v| exp(m, v) as usize).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn has_u(&self) -> bool {
        self.terms.keys().any(|m| (0..N_U).any(|v| exp(m, v) > 0))
    }

    /// The common charge of all terms, `None` if mixed; zero has every
    /// charge and reports `Some(0)`.
    pub fn charge(&self) -> Option<i64> {
        let mut it = self.terms.keys().map(|m| mono_charge(m));
        let first = match it.next() {
            None => return Some(0),
            Some(c) => c,
        };
        if it.all(|c| c == first) {
            Some(first)
        } else {
            None
        }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut terms = self.terms.clone();
        for (m, c) in &o.terms {
            accumulate(&mut terms, m.clone(), c.clone());
        }
        Poly { terms }
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        let mut terms = self.terms.clone();
        for (m, c) in &o.terms {
            accumulate(&mut terms, m.clone(), -c);
        }
        Poly { terms }
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, s: &Gq) -> Poly {
        if s.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * s)).collect(),
        }
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut terms = BTreeMap::new();
        for (a, x) in &self.terms {
            for (b, y) in &o.terms {
                let c = x * y;
                let m = mono_mul(a, b);
                for (t, k) in reduce_mono(&m) {
                    if k == BigInt::from(1) {
                        accumulate(&mut terms, t, c.clone());
                    } else {
                        accumulate(&mut terms, t, &c * &Gq::real(BigRational::from_integer(k)));
                    }
                }
            }
        }
        Poly { terms }
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut out = Poly::one();
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// `∂f/∂v` on the canonical representative, reduced.
    pub fn deriv(&self, v: usize) -> Poly {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = exp(m, v);
            if e == 0 {
                continue;
            }
            let mut t = m.clone();
            t[v] -= 1;
            trim(&mut t);
            accumulate(&mut terms, t, c * &Gq::int(e as i64));
        }
        Poly { terms }
    }

    pub fn check_degree(&self, bound: usize) -> Result<()> {
        let d = self.degree();
        if d > bound {
            Err(PolyError::DegreeExceeded { got: d, bound })
        } else {
            Ok(())
        }
    }

    /// Splits off the `u`-part: `Σ (x-monomial) · p_x(u)`.
    pub fn split_u(&self) -> BTreeMap<Mono, BTreeMap<[u16; 4], Gq>> {
        let mut out: BTreeMap<Mono, BTreeMap<[u16; 4], Gq>> = BTreeMap::new();
        for (m, c) in &self.terms {
            let u = [exp(m, 0), exp(m, 1), exp(m, 2), exp(m, 3)];
            let mut rest = m.clone();
            for e in rest.iter_mut().take(N_U) {
                *e = 0;
            }
            trim(&mut rest);
            out.entry(rest).or_default().insert(u, c.clone());
        }
        out
    }

    /// Coefficient of the given `u`-monomial as a polynomial in the other
    /// variables.
    pub fn u_coefficient(&self, u: [u16; 4]) -> Poly {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            if (0..N_U).all(|v| exp(m, v) == u[v]) {
                let mut rest = m.clone();
                for e in rest.iter_mut().take(N_U) {
                    *e = 0;
                }
                trim(&mut rest);
                terms.insert(rest, c.clone());
            }
        }
        Poly { terms }
    }

    /// Substitutes polynomials for variables (`subs[v] = Some(p)`).
    pub fn substitute(&self, subs: &HashMap<usize, Poly>) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut t = Poly::constant(c.clone());
            let mut keep = Vec::new();
            for (v, &e) in m.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                match subs.get(&v) {
                    Some(p) => t = t.mul(&p.pow(e as u32)),
                    None => {
                        keep.resize(v + 1, 0);
                        keep[v] = e;
                    }
                }
            }
            out = out.add(&t.mul(&Poly::monomial(keep, Gq::one())));
        }
        out
    }

    /// Canonical text: sorted monomials, names from `vars`.
    pub fn to_text(&self, vars: &VarTable) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut s = String::new();
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let mono = mono_text(m, vars);
            let neg = c.is_real() && c.is_negative();
            let mag = if neg { -c } else { c.clone() };
            if i == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            match (mono.is_empty(), mag.is_one()) {
                (true, _) => s.push_str(&mag.to_expr_string()),
                (false, true) => s.push_str(&mono),
                (false, false) => {
                    s.push_str(&mag.to_expr_string());
                    s.push('*');
                    s.push_str(&mono);
                }
            }
        }
        s
    }
}

fn mono_text(m: &[u16], vars: &VarTable) -> String {
    let mut parts = Vec::new();
    for (v, &e) in m.iter().enumerate() {
        if e == 0 {
            continue;
        }
        let name = vars.name(v);
        if e == 1 {
            parts.push(name);
        } else {
            parts.push(format!("{name}^{e}"));
        }
    }
    parts.join("*")
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text(&VarTable::anonymous()))
    }
}

impl From<Gq> for Poly {
    fn from(c: Gq) -> Self {
        Poly::constant(c)
    }
}

/// Variable names. `u` variables are always first.
#[derive(Debug, Clone, PartialEq)]
pub struct VarTable {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl VarTable {
    pub fn new() -> Self {
        let mut t = VarTable {
            names: Vec::new(),
            index: HashMap::new(),
        };
        for n in ["u[+,1]", "u[+,2]", "u[-,1]", "u[-,2]"] {
            t.push(n).expect("fresh table");
        }
        t
    }

    fn anonymous() -> Self {
        VarTable {
            names: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn push(&mut self, name: &str) -> Result<usize> {
        if self.index.contains_key(name) {
            return Err(PolyError::Shape(format!("duplicate variable {name}")));
        }
        let i = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), i);
        Ok(i)
    }

    pub fn get(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| PolyError::UnknownVariable(name.to_string()))
    }

    pub fn name(&self, v: usize) -> String {
        self.names.get(v).cloned().unwrap_or_else(|| match v {
            0 => "u[+,1]".into(),
            1 => "u[+,2]".into(),
            2 => "u[-,1]".into(),
            3 => "u[-,2]".into(),
            _ => format!("v{v}"),
        })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

impl Default for VarTable {
    fn default() -> Self {
        Self::new()
    }
}

// ------------------------------------------------------------------ matrices

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PolyMatrix {
    rows: Vec<Vec<Poly>>,
}

impl PolyMatrix {
    pub fn zero(n: usize) -> Self {
        PolyMatrix {
            rows: vec![vec![Poly::zero(); n]; n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n);
        for i in 0..n {
            m.rows[i][i] = Poly::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Poly>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(PolyError::Shape("matrix must be square".into()));
        }
        Ok(PolyMatrix { rows })
    }

    pub fn from_const(m: &Mat<Gq>) -> Result<Self> {
        Self::from_rows(
            m.iter()
                .map(|r| r.iter().map(|c| Poly::constant(c.clone())).collect())
                .collect(),
        )
    }

    /// `p · M` for a scalar polynomial and constant matrix.
    pub fn poly_times_const(p: &Poly, m: &Mat<Gq>) -> Result<Self> {
        Ok(Self::from_const(m)?.scale_poly(p))
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, i: usize, j: usize) -> &Poly {
        &self.rows[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: Poly) {
        self.rows[i][j] = p;
    }

    pub fn rows(&self) -> &[Vec<Poly>] {
        &self.rows
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(|r| r.iter().all(|p| p.is_zero()))
    }

    fn check(&self, o: &Self) -> Result<()> {
        if self.dim() != o.dim() {
            return Err(PolyError::Shape(format!(
                "{}×{} vs {}×{}",
                self.dim(),
                self.dim(),
                o.dim(),
                o.dim()
            )));
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(&Poly) -> Poly) -> Self {
        PolyMatrix {
            rows: self.rows.iter().map(|r| r.iter().map(&f).collect()).collect(),
        }
    }

    pub fn try_map(&self, f: impl Fn(&Poly) -> Result<Poly>) -> Result<Self> {
        let mut rows = Vec::new();
        for r in &self.rows {
            let mut row = Vec::new();
            for p in r {
                row.push(f(p)?);
            }
            rows.push(row);
        }
        Ok(PolyMatrix { rows })
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        Ok(PolyMatrix {
            rows: self
                .rows
                .iter()
                .zip(&o.rows)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x.add(y)).collect())
                .collect(),
        })
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        Ok(PolyMatrix {
            rows: self
                .rows
                .iter()
                .zip(&o.rows)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x.sub(y)).collect())
                .collect(),
        })
    }

    pub fn neg(&self) -> Self {
        self.map(|p| p.neg())
    }

    pub fn scale(&self, s: &Gq) -> Self {
        self.map(|p| p.scale(s))
    }

    pub fn scale_poly(&self, s: &Poly) -> Self {
        self.map(|p| p.mul(s))
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let n = self.dim();
        let mut out = Self::zero(n);
        for i in 0..n {
            for k in 0..n {
                if self.rows[i][k].is_zero() {
                    continue;
                }
                for j in 0..n {
                    if o.rows[k][j].is_zero() {
                        continue;
                    }
                    let t = self.rows[i][k].mul(&o.rows[k][j]);
                    out.rows[i][j] = out.rows[i][j].add(&t);
                }
            }
        }
        Ok(out)
    }

    pub fn commutator(&self, o: &Self) -> Result<Self> {
        self.mul(o)?.sub(&o.mul(self)?)
    }

    pub fn degree(&self) -> usize {
        self.rows
            .iter()
            .flat_map(|r| r.iter().map(|p| p.degree()))
            .max()
            .unwrap_or(0)
    }

    pub fn check_degree(&self, bound: usize) -> Result<()> {
        for r in &self.rows {
            for p in r {
                p.check_degree(bound)?;
            }
        }
        Ok(())
    }

    pub fn has_u(&self) -> bool {
        self.rows.iter().any(|r| r.iter().any(|p| p.has_u()))
    }

    /// Common charge of all entries (zero entries ignored).
    pub fn charge(&self) -> Option<i64> {
        let mut found: Option<i64> = None;
        for r in &self.rows {
            for p in r {
                if p.is_zero() {
                    continue;
                }
                let c = p.charge()?;
                match found {
                    None => found = Some(c),
                    Some(f) if f != c => return None,
                    _ => {}
                }
            }
        }
        Some(found.unwrap_or(0))
    }

    pub fn constant_part(&self) -> Mat<Gq> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|p| p.constant_term()).collect())
            .collect()
    }

    pub fn u_coefficient(&self, u: [u16; 4]) -> Self {
        self.map(|p| p.u_coefficient(u))
    }

    /// Inverse as `Σ_k (−C⁻¹N)^k C⁻¹` around the constant part `C`; fails
    /// unless the series terminates within `max_terms`.
    pub fn invert(&self, max_terms: usize) -> Result<Self> {
        let n = self.dim();
        let c = self.constant_part();
        let cinv = crate::linalg::inverse(&c, 0.0).ok_or(PolyError::NotInvertible)?;
        let cinv_m = Self::from_const(&cinv)?;
        let nil = self.sub(&Self::from_const(&c)?)?;
        let step = cinv_m.mul(&nil)?.neg();
        let mut term = Self::identity(n);
        let mut sum = Self::identity(n);
        for _ in 0..max_terms {
            term = term.mul(&step)?;
            if term.is_zero() {
                let inv = sum.mul(&cinv_m)?;
                debug_assert!(self.mul(&inv)? == Self::identity(n));
                return Ok(inv);
            }
            sum = sum.add(&term)?;
        }
        Err(PolyError::NotInvertible)
    }

    pub fn to_text(&self, vars: &VarTable) -> String {
        let rows: Vec<String> = self
            .rows
            .iter()
            .map(|r| {
                let cells: Vec<String> = r.iter().map(|p| p.to_text(vars)).collect();
                format!("[{}]", cells.join(", "))
            })
            .collect();
        format!("[{}]", rows.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det() -> Poly {
        Poly::var(UP1)
            .mul(&Poly::var(UM2))
            .sub(&Poly::var(UP2).mul(&Poly::var(UM1)))
    }

    #[test]
    fn relation_reduces_to_one() {
        assert_eq!(det(), Poly::one());
    }

    #[test]
    fn rewrite_orientation() {
        let p = Poly::var(UP1).mul(&Poly::var(UM2));
        let expect = Poly::one().add(&Poly::var(UP2).mul(&Poly::var(UM1)));
        assert_eq!(p, expect);
    }

    #[test]
    fn relation_free_monomial_unchanged() {
        let m = vec![2, 1, 3, 0, 1];
        let p = Poly::monomial(m.clone(), Gq::one());
        assert_eq!(p.terms().len(), 1);
        assert!(p.terms().contains_key(&m));
    }

    #[test]
    fn text_form() {
        let vars = VarTable::new();
        let p = Poly::var(UP1).scale(&Gq::ratio(-3, 2)).add(&Poly::int(2));
        assert_eq!(p.to_text(&vars), "2 - 3/2*u[+,1]");
    }

    #[test]
    fn unipotent_inverse() {
        let mut nm = PolyMatrix::zero(2);
        nm.set(0, 1, Poly::var(4));
        let m = PolyMatrix::identity(2).sub(&nm).unwrap();
        let inv = m.invert(4).unwrap();
        assert_eq!(inv, PolyMatrix::identity(2).add(&nm).unwrap());
    }

    #[test]
    fn non_terminating_inverse_rejected() {
        let mut m = PolyMatrix::identity(1);
        m.set(0, 0, Poly::one().sub(&Poly::var(4)));
        assert_eq!(m.invert(5), Err(PolyError::NotInvertible));
    }
}
