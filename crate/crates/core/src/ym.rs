//! The Yang–Mills residual `d^∇ ∗F` of a connection on `M` for the metric
//! `g = ω_E ⊗ ω_Hᵐ`.

use crate::canonical::spin_metric;
use crate::exterior::{combinations, sort_with_sign, Form, MetricSpace, VolumeRoot};
use crate::gauge::{curvature_on_m, ConnectionOnM, GaugeError, Result};
use crate::harmonic::HarmonicModel;
use crate::linalg::Mat;
use crate::poly::PolyMatrix;
use crate::scalar::Gq;
use std::collections::BTreeMap;

/// `ω_E` with `ω(e_{2i}, e_{2i+1}) = 1`.
pub fn standard_omega_e(p: usize) -> Mat<Gq> {
    let mut w = vec![vec![Gq::zero(); p]; p];
    for i in (0..p.saturating_sub(1)).step_by(2) {
        w[i][i + 1] = Gq::one();
        w[i + 1][i] = -Gq::one();
    }
    w
}

/// An `End W`-valued form: sorted index tuple → matrix coefficient.
pub type ValuedForm = BTreeMap<Vec<usize>, PolyMatrix>;

fn accumulate(f: &mut ValuedForm, key: Vec<usize>, v: &PolyMatrix) -> Result<()> {
    if v.is_zero() {
        return Ok(());
    }
    let next = match f.get(&key) {
        Some(cur) => cur.add(v)?,
        None => v.clone(),
    };
    if next.is_zero() {
        f.remove(&key);
    } else {
        f.insert(key, next);
    }
    Ok(())
}

/// `∗F` entrywise, `F = Σ_{I<J} F_{IJ} dx^I∧dx^J`.
pub fn hodge_curvature(
    model: &HarmonicModel,
    conn: &ConnectionOnM,
    omega_e: &Mat<Gq>,
) -> Result<ValuedForm> {
    if omega_e.len() != model.rank_e || omega_e.iter().any(|r| r.len() != model.rank_e) {
        return Err(GaugeError::Invariant(format!(
            "ω_E must be {0}×{0}",
            model.rank_e
        )));
    }
    let gram = spin_metric(model.spin_m, omega_e)
        .map_err(|e| GaugeError::Invariant(e.to_string()))?;
    let space = MetricSpace::new(gram, 1, VolumeRoot::Absolute)
        .map_err(|e| GaugeError::Invariant(e.to_string()))?;
    let n = space.dim();
    let f = curvature_on_m(model, conn)?;
    let mut out = ValuedForm::new();
    for pair in combinations(n, 2) {
        let fij = &f[pair[0]][pair[1]];
        if fij.is_zero() {
            continue;
        }
        let star = Form::basis(&space, &pair)
            .map_err(|e| GaugeError::Invariant(e.to_string()))?
            .hodge();
        for (key, c) in star.coeffs() {
            accumulate(&mut out, key.clone(), &fij.scale(c))?;
        }
    }
    Ok(out)
}

/// `d^∇β = Σ_K dx^K ∧ (∂_K β + [C_K, β])`.
pub fn covariant_d(model: &HarmonicModel, conn: &ConnectionOnM, beta: &ValuedForm) -> Result<ValuedForm> {
    let h = model.spin_m + 1;
    let n = model.rank_e * h;
    let mut out = ValuedForm::new();
    for (key, b) in beta {
        for k in 0..n {
            let var = model.x_index[k / h][k % h];
            let v = b.map(|p| p.deriv(var)).add(&conn.flat(k).commutator(b)?)?;
            if v.is_zero() {
                continue;
            }
            let mut idx = vec![k];
            idx.extend(key);
            if let Some((sorted, sign)) = sort_with_sign(&idx) {
                accumulate(&mut out, sorted, &v.scale(&Gq::int(sign)))?;
            }
        }
    }
    Ok(out)
}

/// Nonzero coefficients of `d^∇ ∗F`; empty iff the connection is
/// Yang–Mills.
pub fn ym_residual(model: &HarmonicModel, conn: &ConnectionOnM, omega_e: &Mat<Gq>) -> Result<ValuedForm> {
    let star = hodge_curvature(model, conn, omega_e)?;
    covariant_d(model, conn, &star)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n() -> Vec<Vec<Gq>> {
        vec![vec![Gq::zero(), Gq::one()], vec![Gq::zero(), Gq::zero()]]
    }

    #[test]
    fn flat_connection_is_ym() {
        let model = HarmonicModel::build(1, 2, 2).unwrap();
        let conn = ConnectionOnM::zero(1, 2, 2);
        assert!(ym_residual(&model, &conn, &standard_omega_e(2)).unwrap().is_empty());
    }

    #[test]
    fn quadratic_abelian_potential_is_not_ym() {
        let model = HarmonicModel::build(1, 2, 1).unwrap();
        let mut conn = ConnectionOnM::zero(1, 2, 1);
        let x = |e, k| model.x(e, k);
        conn.coeffs[0][0] = PolyMatrix::from_rows(vec![vec![x(0, 1).mul(&x(1, 0))]]).unwrap();
        conn.coeffs[1][1] = PolyMatrix::from_rows(vec![vec![x(0, 0).mul(&x(0, 0))]]).unwrap();
        assert!(!ym_residual(&model, &conn, &standard_omega_e(2)).unwrap().is_empty());
    }

    #[test]
    fn constant_nilpotent_curvature_is_ym() {
        let model = HarmonicModel::build(1, 2, 2).unwrap();
        let mut conn = ConnectionOnM::zero(1, 2, 2);
        conn.coeffs[0][0] = PolyMatrix::poly_times_const(&model.x(0, 1), &n()).unwrap();
        conn.coeffs[0][1] = PolyMatrix::poly_times_const(&model.x(0, 0).neg(), &n()).unwrap();
        assert!(ym_residual(&model, &conn, &standard_omega_e(2)).unwrap().is_empty());
    }

    #[test]
    fn shape_mismatch() {
        let model = HarmonicModel::build(1, 2, 2).unwrap();
        let conn = ConnectionOnM::zero(1, 2, 2);
        assert!(ym_residual(&model, &conn, &standard_omega_e(4)).is_err());
    }
}
