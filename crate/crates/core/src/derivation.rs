//! First-order operators `Σ c_v ∂/∂v` on the reduced function ring.

use crate::poly::{Poly, PolyError, PolyMatrix, Result, N_U, UM1, UM2, UP1, UP2};
use crate::scalar::Gq;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq)]
pub struct Derivation {
    pub name: String,
    coeffs: BTreeMap<usize, Poly>,
}

/// `D(u₊¹u₋² − u₊²u₋¹)` for a derivation given by its coefficients.
fn det_image(c: &BTreeMap<usize, Poly>) -> Poly {
    let get = |v: usize| c.get(&v).cloned().unwrap_or_default();
    get(UP1)
        .mul(&Poly::var(UM2))
        .add(&Poly::var(UP1).mul(&get(UM2)))
        .sub(&get(UP2).mul(&Poly::var(UM1)))
        .sub(&Poly::var(UP2).mul(&get(UM1)))
}

impl Derivation {
    /// Builds the operator and checks that it preserves the determinant
    /// ideal.
    pub fn new(name: &str, coeffs: impl IntoIterator<Item = (usize, Poly)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (v, p) in coeffs {
            let e: &mut Poly = map.entry(v).or_default();
            *e = e.add(&p);
        }
        map.retain(|_, p: &mut Poly| !p.is_zero());
        let d = det_image(&map);
        if !d.is_zero() {
            return Err(PolyError::Inconsistent(format!(
                "derivation {name} does not preserve det = 1"
            )));
        }
        Ok(Derivation {
            name: name.to_string(),
            coeffs: map,
        })
    }

    pub fn zero(name: &str) -> Self {
        Derivation {
            name: name.to_string(),
            coeffs: BTreeMap::new(),
        }
    }

    pub fn coeff(&self, v: usize) -> Poly {
        self.coeffs.get(&v).cloned().unwrap_or_default()
    }

    pub fn coeffs(&self) -> &BTreeMap<usize, Poly> {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn apply(&self, p: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (&v, c) in &self.coeffs {
            let d = p.deriv(v);
            if !d.is_zero() {
                out = out.add(&c.mul(&d));
            }
        }
        out
    }

    pub fn apply_matrix(&self, m: &PolyMatrix) -> PolyMatrix {
        m.map(|p| self.apply(p))
    }

    pub fn add(&self, o: &Derivation) -> Derivation {
        let mut coeffs = self.coeffs.clone();
        for (v, c) in &o.coeffs {
            let e = coeffs.entry(*v).or_default();
            *e = e.add(c);
        }
        coeffs.retain(|_, p| !p.is_zero());
        Derivation {
            name: format!("{}+{}", self.name, o.name),
            coeffs,
        }
    }

    pub fn scale(&self, s: &Gq) -> Derivation {
        let mut coeffs: BTreeMap<usize, Poly> =
            self.coeffs.iter().map(|(v, c)| (*v, c.scale(s))).collect();
        coeffs.retain(|_, p| !p.is_zero());
        Derivation {
            name: format!("{}·{}", s, self.name),
            coeffs,
        }
    }

    /// `[D₁, D₂]` with coefficients `D₁(c₂ᵥ) − D₂(c₁ᵥ)`.
    pub fn commutator(&self, o: &Derivation) -> Derivation {
        let mut coeffs: BTreeMap<usize, Poly> = BTreeMap::new();
        let vars: std::collections::BTreeSet<usize> =
            self.coeffs.keys().chain(o.coeffs.keys()).copied().collect();
        for v in vars {
            let c = self.apply(&o.coeff(v)).sub(&o.apply(&self.coeff(v)));
            if !c.is_zero() {
                coeffs.insert(v, c);
            }
        }
        Derivation {
            name: format!("[{},{}]", self.name, o.name),
            coeffs,
        }
    }

    /// Equality as operators on the quotient ring: both agree on every
    /// generator after reduction.
    pub fn same_operator(&self, o: &Derivation) -> bool {
        self.coeffs == o.coeffs
    }

    /// Whether the operator touches only `u` variables.
    pub fn is_vertical(&self) -> bool {
        self.coeffs.keys().all(|&v| v < N_U)
    }
}

/// `∂₀ = u₊^α ∂/∂u₊^α − u₋^α ∂/∂u₋^α`.
pub fn d0() -> Derivation {
    Derivation::new(
        "∂0",
        [
            (UP1, Poly::var(UP1)),
            (UP2, Poly::var(UP2)),
            (UM1, Poly::var(UM1).neg()),
            (UM2, Poly::var(UM2).neg()),
        ],
    )
    .expect("∂0 preserves det")
}

/// `∂₊₊ = u₊^α ∂/∂u₋^α`.
pub fn dpp() -> Derivation {
    Derivation::new("∂++", [(UM1, Poly::var(UP1)), (UM2, Poly::var(UP2))])
        .expect("∂++ preserves det")
}

/// `∂₋₋ = u₋^α ∂/∂u₊^α`.
pub fn dmm() -> Derivation {
    Derivation::new("∂--", [(UP1, Poly::var(UM1)), (UP2, Poly::var(UM2))])
        .expect("∂-- preserves det")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vertical_fields_on_harmonics() {
        assert_eq!(d0().apply(&Poly::var(UP1)), Poly::var(UP1));
        assert_eq!(d0().apply(&Poly::var(UM2)), Poly::var(UM2).neg());
        assert_eq!(dpp().apply(&Poly::var(UM1)), Poly::var(UP1));
        assert_eq!(dpp().apply(&Poly::var(UM2)), Poly::var(UP2));
    }

    #[test]
    fn sl2_relations() {
        assert!(dpp().commutator(&dmm()).same_operator(&d0()));
        assert!(d0().commutator(&dpp()).same_operator(&dpp().scale(&Gq::int(2))));
        assert!(d0().commutator(&dmm()).same_operator(&dmm().scale(&Gq::int(-2))));
    }

    #[test]
    fn rejects_ideal_breaking_operator() {
        let bad = Derivation::new("bad", [(UP1, Poly::one())]);
        assert!(bad.is_err());
    }
}
