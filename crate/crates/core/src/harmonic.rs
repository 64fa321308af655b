//! The flat model of harmonic space `M × Sp(1,ℂ)` for spin `m/2`,
//! `m ∈ {1, 3}`: coordinates, analytic coordinates, the vertical fields
//! `∂₀, ∂₊₊, ∂₋₋` and the horizontal families `X^e_k`.

use crate::derivation::{d0, dmm, dpp, Derivation};
use crate::poly::{Poly, PolyError, PolyMatrix, VarTable, UM1, UM2, UP1, UP2};
use crate::scalar::Gq;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarmonicError {
    #[error("unsupported spin m = {0}; only 1 and 3 are implemented")]
    UnsupportedSpin(usize),
    #[error("rank must be at least 1")]
    BadRank,
    #[error("model self-test failed: {0}")]
    SelfTest(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

pub type Result<T> = std::result::Result<T, HarmonicError>;

/// Which annihilation identities define analyticity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnalyticMode {
    HalfFlat,
    ZeroPartial,
    OnePartial,
}

impl AnalyticMode {
    pub fn spin(&self) -> usize {
        match self {
            AnalyticMode::HalfFlat => 1,
            _ => 3,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            AnalyticMode::HalfFlat => "halfflat",
            AnalyticMode::ZeroPartial => "0partial",
            AnalyticMode::OnePartial => "1partial",
        }
    }
}

/// Options for building a model; `eps` is the symplectic form on `H`
/// (standard `ε₁₂ = 1`), exposed so that a corrupted convention can be
/// injected for mutation testing.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelOptions {
    pub eps: [[i64; 2]; 2],
    pub params: Vec<String>,
    pub self_test: bool,
}

impl Default for ModelOptions {
    fn default() -> Self {
        ModelOptions {
            eps: [[0, 1], [-1, 0]],
            params: Vec::new(),
            self_test: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct HarmonicModel {
    pub spin_m: usize,
    pub rank_e: usize,
    pub gauge_rank: usize,
    pub eps: [[i64; 2]; 2],
    pub vars: VarTable,
    /// `x_index[e][k]`: variable of `x^{eA}` where `A` has `k` twos.
    pub x_index: Vec<Vec<usize>>,
    pub param_index: Vec<usize>,
    pub d0: Derivation,
    pub dpp: Derivation,
    pub dmm: Derivation,
    /// `x_fields[i][e]`: the field with `i` minus slots, charge `m − 2i`.
    pub x_fields: Vec<Vec<Derivation>>,
}

/// Number of distinct orderings of the multiset with `k` twos among `m`.
pub fn multiplicity(m: usize, k: usize) -> i64 {
    let f = |n: usize| (1..=n as i64).product::<i64>();
    f(m) / (f(k) * f(m - k))
}

fn u_plus(alpha: usize) -> Poly {
    Poly::var(if alpha == 0 { UP1 } else { UP2 })
}

fn u_minus(alpha: usize) -> Poly {
    Poly::var(if alpha == 0 { UM1 } else { UM2 })
}

fn u_sign(minus: bool, alpha: usize) -> Poly {
    if minus {
        u_minus(alpha)
    } else {
        u_plus(alpha)
    }
}

/// All index tuples in `{0,1}^m`.
fn tuples(m: usize) -> Vec<Vec<usize>> {
    (0..1usize << m)
        .map(|bits| (0..m).map(|j| (bits >> j) & 1).collect())
        .collect()
}

pub fn field_label(m: usize, i: usize) -> String {
    match (m, i) {
        (1, 0) => "X+".into(),
        (1, 1) => "X-".into(),
        (3, 0) => "X+++".into(),
        (3, 1) => "X+".into(),
        (3, 2) => "X-".into(),
        (3, 3) => "X---".into(),
        _ => format!("X[{m},{i}]"),
    }
}

impl HarmonicModel {
    pub fn build(spin_m: usize, rank_e: usize, gauge_rank: usize) -> Result<Self> {
        Self::build_with(spin_m, rank_e, gauge_rank, &ModelOptions::default())
    }

    pub fn build_with(
        spin_m: usize,
        rank_e: usize,
        gauge_rank: usize,
        opts: &ModelOptions,
    ) -> Result<Self> {
        if spin_m != 1 && spin_m != 3 {
            return Err(HarmonicError::UnsupportedSpin(spin_m));
        }
        if rank_e < 1 || gauge_rank < 1 {
            return Err(HarmonicError::BadRank);
        }
        let mut vars = VarTable::new();
        let mut x_index = Vec::new();
        for e in 0..rank_e {
            let mut row = Vec::new();
            for k in 0..=spin_m {
                let name = if spin_m == 1 {
                    format!("x[{},{}]", e + 1, k + 1)
                } else {
                    let digits: String = (0..spin_m)
                        .map(|j| if j < spin_m - k { '1' } else { '2' })
                        .collect();
                    format!("x[{},{}]", e + 1, digits)
                };
                row.push(vars.push(&name)?);
            }
            x_index.push(row);
        }
        let mut param_index = Vec::new();
        for p in &opts.params {
            param_index.push(vars.push(p)?);
        }
        let mut x_fields = Vec::new();
        for i in 0..=spin_m {
            let mut fam = Vec::new();
            for e in 0..rank_e {
                // slots: the first i are minus, the rest plus
                let mut coeffs: Vec<(usize, Poly)> = Vec::new();
                for t in tuples(spin_m) {
                    let k = t.iter().filter(|&&a| a == 1).count();
                    let mut c = Poly::one();
                    for (j, &a) in t.iter().enumerate() {
                        c = c.mul(&u_sign(j < i, a));
                    }
                    coeffs.push((x_index[e][k], c));
                }
                let name = format!("{}^{}", field_label(spin_m, i), e + 1);
                fam.push(Derivation::new(&name, coeffs)?);
            }
            x_fields.push(fam);
        }
        let model = HarmonicModel {
            spin_m,
            rank_e,
            gauge_rank,
            eps: opts.eps,
            vars,
            x_index,
            param_index,
            d0: d0(),
            dpp: dpp(),
            dmm: dmm(),
            x_fields,
        };
        if opts.self_test {
            let failures = model.commutator_failures();
            if !failures.is_empty() {
                return Err(HarmonicError::SelfTest(failures.join("; ")));
            }
            let failures = model.analytic_coordinate_failures();
            if !failures.is_empty() {
                return Err(HarmonicError::SelfTest(failures.join("; ")));
            }
        }
        Ok(model)
    }

    pub fn n_x(&self) -> usize {
        self.rank_e * (self.spin_m + 1)
    }

    /// Charge of the field family with `i` minus slots.
    pub fn field_charge(&self, i: usize) -> i64 {
        self.spin_m as i64 - 2 * i as i64
    }

    pub fn x(&self, e: usize, k: usize) -> Poly {
        Poly::var(self.x_index[e][k])
    }

    /// `u^±_α = ε_{αβ}u_±^β`.
    pub fn u_lower(&self, minus: bool, alpha: usize) -> Poly {
        let mut out = Poly::zero();
        for beta in 0..2 {
            let c = self.eps[alpha][beta];
            if c != 0 {
                out = out.add(&u_sign(minus, beta).scale(&Gq::int(c)));
            }
        }
        out
    }

    /// Analytic coordinate for the slot pattern `minus[j]` (`true` = `−`):
    /// `Σ_t x^{a,sort t} u^{s₁}_{t₁}⋯u^{s_m}_{t_m} / mult(sort t)`, the
    /// weight matching the tuple sum in the `X` fields.
    pub fn analytic_coordinate(&self, a: usize, minus: &[bool]) -> Poly {
        let m = self.spin_m;
        let mut out = Poly::zero();
        for t in tuples(m) {
            let k = t.iter().filter(|&&x| x == 1).count();
            let mut c = self.x(a, k);
            for (j, &alpha) in t.iter().enumerate() {
                c = c.mul(&self.u_lower(minus[j], alpha));
            }
            out = out.add(&c.scale(&Gq::ratio(1, multiplicity(m, k))));
        }
        out
    }

    /// `x^{a±}` for `m = 1`.
    pub fn x_pm(&self, a: usize, minus: bool) -> Poly {
        self.analytic_coordinate(a, &[minus])
    }

    /// Named coordinates for `m = 3`, pattern like `"ppm"`.
    pub fn x_pattern(&self, a: usize, pattern: &str) -> Option<Poly> {
        if pattern.len() != self.spin_m {
            return None;
        }
        let mut minus = Vec::new();
        for ch in pattern.chars() {
            match ch {
                'p' => minus.push(false),
                'm' => minus.push(true),
                _ => return None,
            }
        }
        Some(self.analytic_coordinate(a, &minus))
    }

    /// Fields annihilating analytic functions in the given mode.
    pub fn analytic_fields(&self, mode: AnalyticMode) -> Vec<&Derivation> {
        match mode {
            AnalyticMode::HalfFlat | AnalyticMode::ZeroPartial => {
                self.x_fields[0].iter().collect()
            }
            AnalyticMode::OnePartial => self.x_fields[0]
                .iter()
                .chain(self.x_fields[1].iter())
                .collect(),
        }
    }

    /// Residuals of the analyticity and charge identities; empty iff the
    /// check passes.
    pub fn analytic_check(
        &self,
        f: &PolyMatrix,
        mode: AnalyticMode,
        charge: i64,
    ) -> Vec<(String, PolyMatrix)> {
        let mut out = Vec::new();
        if mode.spin() != self.spin_m {
            out.push((
                format!("mode {} needs spin {}", mode.name(), mode.spin()),
                f.clone(),
            ));
            return out;
        }
        for x in self.analytic_fields(mode) {
            let r = x.apply_matrix(f);
            if !r.is_zero() {
                out.push((format!("{} A ≠ 0", x.name), r));
            }
        }
        let r = self
            .d0
            .apply_matrix(f)
            .sub(&f.scale(&Gq::int(charge)))
            .expect("same shape");
        if !r.is_zero() {
            out.push((format!("charge check failed: ∂0 A ≠ {charge} A"), r));
        }
        out
    }

    /// All expected brackets among `∂₀, ∂₊₊, ∂₋₋, X^e_k`, as
    /// `(label, lhs, rhs)`.
    pub fn bracket_table(&self) -> Vec<(String, Derivation, Derivation)> {
        let m = self.spin_m;
        let mut out = Vec::new();
        let g = |v: i64| Gq::int(v);
        out.push(("[∂++,∂--] = ∂0".into(), self.dpp.commutator(&self.dmm), self.d0.clone()));
        out.push((
            "[∂0,∂++] = 2∂++".into(),
            self.d0.commutator(&self.dpp),
            self.dpp.scale(&g(2)),
        ));
        out.push((
            "[∂0,∂--] = -2∂--".into(),
            self.d0.commutator(&self.dmm),
            self.dmm.scale(&g(-2)),
        ));
        for i in 0..=m {
            for e in 0..self.rank_e {
                let x = &self.x_fields[i][e];
                let k = self.field_charge(i);
                out.push((
                    format!("[∂0,{}] = {k}·{}", x.name, x.name),
                    self.d0.commutator(x),
                    x.scale(&g(k)),
                ));
                let up = if i == 0 {
                    Derivation::zero("0")
                } else {
                    self.x_fields[i - 1][e].scale(&g(i as i64))
                };
                out.push((format!("[∂++,{}]", x.name), self.dpp.commutator(x), up));
                let down = if i == m {
                    Derivation::zero("0")
                } else {
                    self.x_fields[i + 1][e].scale(&g((m - i) as i64))
                };
                out.push((format!("[∂--,{}]", x.name), self.dmm.commutator(x), down));
            }
        }
        let all: Vec<&Derivation> = self.x_fields.iter().flatten().collect();
        for a in 0..all.len() {
            for b in a + 1..all.len() {
                out.push((
                    format!("[{},{}] = 0", all[a].name, all[b].name),
                    all[a].commutator(all[b]),
                    Derivation::zero("0"),
                ));
            }
        }
        out
    }

    pub fn commutator_failures(&self) -> Vec<String> {
        self.bracket_table()
            .into_iter()
            .filter(|(_, l, r)| !l.same_operator(r))
            .map(|(s, _, _)| s)
            .collect()
    }

    fn analytic_coordinate_failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        let m = self.spin_m;
        for a in 0..self.rank_e {
            if m == 1 {
                let xp = self.x_pm(a, false);
                let xm = self.x_pm(a, true);
                for e in 0..self.rank_e {
                    let xf = &self.x_fields[0][e];
                    if !xf.apply(&xp).is_zero() {
                        out.push(format!("X+^{} x^{}+ ≠ 0", e + 1, a + 1));
                    }
                    let want = if a == e { Poly::one() } else { Poly::zero() };
                    if xf.apply(&xm) != want {
                        out.push(format!("X+^{} x^{}- ≠ δ", e + 1, a + 1));
                    }
                }
            } else {
                let xppm = self.x_pattern(a, "ppm").expect("pattern");
                for e in 0..self.rank_e {
                    for i in 0..2 {
                        if !self.x_fields[i][e].apply(&xppm).is_zero() {
                            out.push(format!(
                                "{} xppm[{}] ≠ 0",
                                self.x_fields[i][e].name,
                                a + 1
                            ));
                        }
                    }
                }
            }
        }
        out
    }

    /// All monomials in the model's `u` and `x` variables of total degree
    /// `≤ d`, reduced (a spanning set of the polynomial ring up to degree `d`).
    pub fn monomials(&self, d: usize) -> Vec<Poly> {
        let n = 4 + self.n_x();
        let mut out = Vec::new();
        let mut cur = vec![0u16; n];
        fn rec(v: usize, left: usize, cur: &mut Vec<u16>, out: &mut Vec<Poly>) {
            if v == cur.len() {
                out.push(Poly::monomial(cur.clone(), Gq::one()));
                return;
            }
            for e in 0..=left {
                cur[v] = e as u16;
                rec(v + 1, left - e, cur, out);
            }
            cur[v] = 0;
        }
        rec(0, d, &mut cur, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn m1_builds_and_self_tests() {
        let m = HarmonicModel::build(1, 2, 2).unwrap();
        assert_eq!(m.x_fields.len(), 2);
        assert_eq!(m.vars.len(), 8);
    }

    #[test]
    fn m3_builds_and_self_tests() {
        let m = HarmonicModel::build(3, 2, 2).unwrap();
        assert_eq!(m.x_fields.len(), 4);
        assert_eq!(m.vars.len(), 12);
    }

    #[test]
    fn xplus_expansion() {
        let m = HarmonicModel::build(1, 1, 1).unwrap();
        let want = m.x(0, 0).mul(&Poly::var(UP2)).sub(&m.x(0, 1).mul(&Poly::var(UP1)));
        assert_eq!(m.x_pm(0, false), want);
    }

    #[test]
    fn unsupported_spin() {
        assert_eq!(
            HarmonicModel::build(2, 1, 1).unwrap_err(),
            HarmonicError::UnsupportedSpin(2)
        );
    }

    #[test]
    fn symmetric_eps_fails_self_test() {
        let opts = ModelOptions {
            eps: [[0, 1], [1, 0]],
            ..Default::default()
        };
        assert!(matches!(
            HarmonicModel::build_with(1, 1, 1, &opts),
            Err(HarmonicError::SelfTest(_))
        ));
    }
}
