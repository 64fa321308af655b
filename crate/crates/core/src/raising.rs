//! Solving `∂₊₊f = g` for charge-2 `g`.
//!
//! The solution is the one without sp(1)-singlet part: `f = ∂₋₋h` with
//! `∂₊₊∂₋₋h = g`, computed per `u`-monomial in the free polynomial ring
//! (where the bidegree spaces are finite sl2-modules) and reduced afterwards.

use crate::linalg::{self, Mat};
use crate::poly::{mono_charge, Mono, Poly, PolyError, PolyMatrix, Result, N_U};
use crate::scalar::Gq;
use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

type UMono = [u16; 4];
type UPoly = BTreeMap<UMono, Gq>;

fn add_to(p: &mut UPoly, m: UMono, c: Gq) {
    if c.is_zero() {
        return;
    }
    let e = p.entry(m).or_insert_with(Gq::zero);
    *e += &c;
    if e.is_zero() {
        p.remove(&m);
    }
}

/// `∂₊₊` on free `u`-polynomials.
fn raise_free(p: &UPoly) -> UPoly {
    let mut out = UPoly::new();
    for (m, c) in p {
        for (from, to) in [(2, 0), (3, 1)] {
            if m[from] > 0 {
                let mut t = *m;
                t[from] -= 1;
                t[to] += 1;
                add_to(&mut out, t, c * &Gq::int(m[from] as i64));
            }
        }
    }
    out
}

/// `∂₋₋` on free `u`-polynomials.
fn lower_free(p: &UPoly) -> UPoly {
    let mut out = UPoly::new();
    for (m, c) in p {
        for (from, to) in [(0, 2), (1, 3)] {
            if m[from] > 0 {
                let mut t = *m;
                t[from] -= 1;
                t[to] += 1;
                add_to(&mut out, t, c * &Gq::int(m[from] as i64));
            }
        }
    }
    out
}

fn bidegree_basis(p: u16, q: u16) -> Vec<UMono> {
    let mut out = Vec::new();
    for a in 0..=p {
        for c in 0..=q {
            out.push([a, p - a, c, q - c]);
        }
    }
    out
}

fn to_poly(p: &UPoly) -> Poly {
    Poly::from_terms(p.iter().map(|(m, c)| (m.to_vec(), c.clone())))
}

/// Solver with a per-monomial cache; safe to share between threads.
#[derive(Debug, Default)]
pub struct Raiser {
    cache: Mutex<HashMap<UMono, Poly>>,
}

impl Raiser {
    pub fn new() -> Self {
        Self::default()
    }

    fn solve_mono(&self, t: UMono) -> Result<Poly> {
        if let Some(p) = self.cache.lock().expect("cache lock").get(&t) {
            return Ok(p.clone());
        }
        let p = t[0] + t[1];
        let q = t[2] + t[3];
        let basis = bidegree_basis(p, q);
        let pos: HashMap<UMono, usize> = basis.iter().enumerate().map(|(i, m)| (*m, i)).collect();
        let n = basis.len();
        let mut ef: Mat<Gq> = linalg::zeros(n, n);
        for (j, m) in basis.iter().enumerate() {
            let mut single = UPoly::new();
            single.insert(*m, Gq::one());
            for (k, c) in raise_free(&lower_free(&single)) {
                ef[pos[&k]][j] = c;
            }
        }
        let mut rhs = vec![Gq::zero(); n];
        rhs[pos[&t]] = Gq::one();
        let h = linalg::solve(&ef, &rhs, 0.0)
            .ok_or_else(|| PolyError::Inconsistent(format!("no preimage for {t:?}")))?;
        let mut hp = UPoly::new();
        for (i, c) in h.into_iter().enumerate() {
            add_to(&mut hp, basis[i], c);
        }
        let f = lower_free(&hp);
        let mut check = UPoly::new();
        check.insert(t, Gq::one());
        if raise_free(&f) != check {
            return Err(PolyError::Inconsistent(format!("raising check failed for {t:?}")));
        }
        let out = to_poly(&f);
        self.cache.lock().expect("cache lock").insert(t, out.clone());
        Ok(out)
    }

    /// The singlet-free `f` with `∂₊₊f = g`, `∂₀f = 0`.
    pub fn solve(&self, g: &Poly, max_degree: usize) -> Result<Poly> {
        let mut out = Poly::zero();
        for (m, c) in g.terms() {
            let ch = mono_charge(m);
            if ch != 2 {
                return Err(PolyError::Charge { expected: 2, got: ch });
            }
            let u = [
                m.first().copied().unwrap_or(0),
                m.get(1).copied().unwrap_or(0),
                m.get(2).copied().unwrap_or(0),
                m.get(3).copied().unwrap_or(0),
            ];
            let mut rest: Mono = m.clone();
            for e in rest.iter_mut().take(N_U) {
                *e = 0;
            }
            let fu = self.solve_mono(u)?;
            out = out.add(&fu.mul(&Poly::monomial(rest, c.clone())));
        }
        out.check_degree(max_degree)?;
        if crate::derivation::dpp().apply(&out) != *g {
            return Err(PolyError::Inconsistent("re-application of ∂++ failed".into()));
        }
        Ok(out)
    }

    pub fn solve_matrix(&self, g: &PolyMatrix, max_degree: usize) -> Result<PolyMatrix> {
        g.try_map(|p| self.solve(p, max_degree))
    }
}

/// One-shot convenience wrapper.
pub fn solve_raising(g: &Poly, max_degree: usize) -> Result<Poly> {
    Raiser::new().solve(g, max_degree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derivation::{d0, dpp};
    use crate::poly::{UM1, UP1, UP2};

    #[test]
    fn zero_input() {
        assert_eq!(solve_raising(&Poly::zero(), 16).unwrap(), Poly::zero());
    }

    #[test]
    fn quadratic_in_u_plus() {
        let g = Poly::var(UP1).mul(&Poly::var(UP2)).mul(&Poly::var(5));
        let f = solve_raising(&g, 16).unwrap();
        assert_eq!(dpp().apply(&f), g);
        assert!(d0().apply(&f).is_zero());
    }

    #[test]
    fn charge_zero_rejected() {
        let g = Poly::var(UP1).mul(&Poly::var(UM1));
        assert!(matches!(solve_raising(&g, 16), Err(PolyError::Charge { .. })));
    }

    #[test]
    fn higher_bidegree() {
        let g = Poly::var(UP1).pow(4).mul(&Poly::var(UM1).pow(2));
        let f = solve_raising(&g, 16).unwrap();
        assert_eq!(dpp().apply(&f), g);
    }
}
