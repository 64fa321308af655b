//! `B_Ω` spectrum reports for the canonical 4-forms.

use crate::canonical::{
    g2_forms, hyperkaehler_forms, kaehler_form_sq, kostant_form, omega_h_power,
    omega_self_contraction, quaternionic_form, so_basis, spin7_form, spin_m_contraction_factor,
    spin_m_form, spin_m_form_even, trace_form, u2_basis, CanonicalError,
};
use crate::exterior::{b_omega_matrix, exact_spectrum, spectrum, to_f64_matrix, ExteriorError, Form};
use crate::linalg;
use crate::scalar::{Field, Gq};
use crate::verify::SPECTRUM_TOL;
use crate::ym::standard_omega_e;
use serde::Serialize;
use thiserror::Error;

pub const SCHEMA_VERSION: &str = "grassmann-gauge/spectrum/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Group {
    Kaehler,
    Hyperkaehler,
    Qk,
    G2,
    Spin7,
    KostantSoN,
    KostantU2,
    SpinM,
}

impl Group {
    pub const ALL: [Group; 8] = [
        Group::Kaehler,
        Group::Hyperkaehler,
        Group::Qk,
        Group::G2,
        Group::Spin7,
        Group::KostantSoN,
        Group::KostantU2,
        Group::SpinM,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Group::Kaehler => "kaehler",
            Group::Hyperkaehler => "hyperkaehler",
            Group::Qk => "qk",
            Group::G2 => "g2",
            Group::Spin7 => "spin7",
            Group::KostantSoN => "kostant-so-n",
            Group::KostantU2 => "kostant-u2",
            Group::SpinM => "spin-m",
        }
    }

    pub fn parse(s: &str) -> Option<Group> {
        Group::ALL.into_iter().find(|g| g.name() == s)
    }
}

#[derive(Debug, Error)]
pub enum SpectraError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Canonical(#[from] CanonicalError),
    #[error(transparent)]
    Exterior(#[from] ExteriorError),
}

impl SpectraError {
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            SpectraError::Usage(_) | SpectraError::Canonical(CanonicalError::BadParameter(_))
        )
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Eigenvalue {
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
    pub multiplicity: usize,
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Component {
    pub indices: Vec<usize>,
    pub value: String,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct FormSpectrum {
    pub label: String,
    pub dim: usize,
    pub form: Vec<Component>,
    pub b_trace: String,
    pub b_symmetric: bool,
    pub eigenvalues: Vec<Eigenvalue>,
    pub appropriate: bool,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct NamedCheck {
    pub name: String,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SpectrumReport {
    pub schema_version: &'static str,
    pub group: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub forms: Vec<FormSpectrum>,
    pub checks: Vec<NamedCheck>,
    pub passed: bool,
}

/// Spectrum of one form. Ratios are taken against `reference`, or against
/// the eigenvalue of largest modulus.
pub fn form_spectrum(label: &str, f: &Form<Gq>, reference: Option<usize>) -> Result<FormSpectrum, SpectraError> {
    let b = b_omega_matrix(f)?;
    let n = b.len();
    let trace = (0..n).fold(Gq::zero(), |acc, i| &acc + &b[i][i]);
    let symmetric = linalg::transpose(&b) == b;
    let approx = spectrum(&to_f64_matrix(&b)?, SPECTRUM_TOL)?;
    let exact = exact_spectrum(&b)?;
    let mut eigenvalues: Vec<Eigenvalue> = approx
        .iter()
        .map(|e| Eigenvalue {
            value: e.value,
            exact: exact.as_ref().and_then(|ex| {
                ex.iter()
                    .find(|(v, k)| *k == e.multiplicity && (v.to_real_f64().unwrap_or(f64::NAN) - e.value).abs() < 1e-6)
                    .map(|(v, _)| v.to_expr_string())
            }),
            multiplicity: e.multiplicity,
            ratio: None,
        })
        .collect();
    let by_dim = reference.and_then(|d| eigenvalues.iter().find(|e| e.multiplicity == d).map(|e| e.value));
    let largest = eigenvalues
        .iter()
        .map(|e| e.value)
        .fold(0.0f64, |a, v| if v.abs() > a.abs() { v } else { a });
    let r = by_dim.unwrap_or(largest);
    if r != 0.0 {
        for e in &mut eigenvalues {
            e.ratio = Some(e.value / r);
        }
    }
    let vmax = largest.abs();
    let appropriate = eigenvalues.iter().any(|e| e.value.abs() > SPECTRUM_TOL * vmax.max(1.0));
    Ok(FormSpectrum {
        label: label.to_string(),
        dim: f.space().dim(),
        form: f
            .coeffs()
            .iter()
            .map(|(k, v)| Component {
                indices: k.clone(),
                value: v.to_expr_string(),
            })
            .collect(),
        b_trace: trace.to_expr_string(),
        b_symmetric: symmetric,
        eigenvalues,
        appropriate,
    })
}

fn dims(f: &FormSpectrum) -> Vec<usize> {
    let mut d: Vec<usize> = f.eigenvalues.iter().map(|e| e.multiplicity).collect();
    d.sort();
    d
}

fn check(name: impl Into<String>, passed: bool) -> NamedCheck {
    NamedCheck {
        name: name.into(),
        passed,
    }
}

fn need(v: Option<usize>, flag: &str, group: Group) -> Result<usize, SpectraError> {
    v.ok_or_else(|| SpectraError::Usage(format!("--{flag} is required for group {}", group.name())))
}

pub fn report(group: Group, m: Option<usize>, n: Option<usize>) -> Result<SpectrumReport, SpectraError> {
    let mut forms = Vec::new();
    let mut checks = Vec::new();
    match group {
        Group::Kaehler => {
            let m = need(m, "m", group)?;
            forms.push(form_spectrum("ω∧ω", &kaehler_form_sq(m)?, None)?);
        }
        Group::Hyperkaehler => {
            let k = need(m, "m", group)?;
            for ((a, b), f) in hyperkaehler_forms(k)? {
                forms.push(form_spectrum(&format!("ω{a}∧ω{b}"), &f, None)?);
            }
        }
        Group::Qk => {
            let m = need(m, "m", group)?;
            let f = form_spectrum("Σ ωα∧ωα", &quaternionic_form(m)?, Some(m * (2 * m + 1)))?;
            let mut want = vec![3, m * (2 * m + 1)];
            if m > 1 {
                want.push(3 * (m - 1) * (2 * m + 1));
            }
            want.sort();
            checks.push(check(format!("multiplicities {want:?}"), dims(&f) == want));
            let targets = [
                (m * (2 * m + 1), 1.0),
                (3 * (m - 1) * (2 * m + 1), -1.0 / 3.0),
                (3, -(2.0 * m as f64 + 1.0) / 3.0),
            ];
            let ratios_ok = f.eigenvalues.iter().all(|e| {
                let r = e.ratio.unwrap_or(f64::NAN);
                targets
                    .iter()
                    .any(|&(d, t)| d == e.multiplicity && (r - t).abs() < SPECTRUM_TOL)
            });
            checks.push(check("ratios 1 : −1/3 : −(2m+1)/3", ratios_ok));
            forms.push(f);
        }
        Group::G2 => {
            let (phi, psi) = g2_forms();
            let f = form_spectrum("ψ", &psi, None)?;
            checks.push(check("multiplicities [7, 14]", dims(&f) == vec![7, 14]));
            checks.push(check("ψ = ∗φ", psi == phi.hodge()));
            forms.push(f);
        }
        Group::Spin7 => {
            let omega = spin7_form();
            let f = form_spectrum("Ω", &omega, None)?;
            checks.push(check("multiplicities [7, 21]", dims(&f) == vec![7, 21]));
            checks.push(check("∗Ω = Ω", omega.hodge() == omega));
            forms.push(f);
        }
        Group::KostantSoN => {
            let n = need(n, "n", group)?;
            if n < 3 {
                return Err(SpectraError::Usage("--n must be at least 3".into()));
            }
            let b = so_basis(n);
            let k = kostant_form(&b, &trace_form(&b))?;
            checks.push(check("alt B = 0", k.is_zero()));
            forms.push(form_spectrum(&format!("alt B on so({n})"), &k, None)?);
        }
        Group::KostantU2 => {
            let b = u2_basis();
            let k = kostant_form(&b, &trace_form(&b))?;
            let w2 = kaehler_form_sq(2)?;
            let prop = match w2.coeffs().iter().next() {
                Some((key, c)) => !k.is_zero() && k == w2.scale(&(&k.coeff(key) / c)),
                None => false,
            };
            checks.push(check("alt B ≠ 0 and ∝ ω∧ω", prop));
            forms.push(form_spectrum("alt B on u(2)", &k, None)?);
        }
        Group::SpinM => {
            let m = need(m, "m", group)?;
            let p = n.unwrap_or(2);
            if m == 0 || p < 2 {
                return Err(SpectraError::Usage("spin-m needs --m ≥ 1 and --n ≥ 2".into()));
            }
            let f = if m % 2 == 1 {
                if p % 2 != 0 {
                    return Err(SpectraError::Usage("odd m needs even --n".into()));
                }
                spin_m_form(m, &standard_omega_e(p))?
            } else {
                spin_m_form_even(m, &linalg::identity(p))?
            };
            let c = omega_self_contraction(&omega_h_power(m)?);
            checks.push(check(
                "ω^AB ω_AB = −(m+1)",
                c == Some(Gq::int(-(m as i64 + 1))),
            ));
            if m % 2 == 1 {
                let s = spin_test_matrix(p);
                let factor = spin_m_contraction_factor(m, &standard_omega_e(p), &s)?;
                let want = Gq::int(4 * (m as i64 + 1));
                let measured = factor.as_ref().map_or("none".to_string(), |f| f.to_expr_string());
                checks.push(check(
                    format!("contraction factor {want} (measured {measured})"),
                    factor == Some(want),
                ));
            }
            forms.push(form_spectrum(&format!("spin {m}/2 form, rank E {p}"), &f, None)?);
        }
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(SpectrumReport {
        schema_version: SCHEMA_VERSION,
        group: group.name(),
        m,
        n,
        forms,
        checks,
        passed,
    })
}

fn spin_test_matrix(p: usize) -> Vec<Vec<Gq>> {
    let mut s = vec![vec![Gq::zero(); p]; p];
    for (i, row) in s.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = Gq::int(1 + ((i + j) % 3) as i64 - 2 * (i == j && i % 2 == 1) as i64);
        }
    }
    s
}

impl SpectrumReport {
    pub fn to_text(&self) -> String {
        let mut s = format!("group {}", self.group);
        if let Some(m) = self.m {
            s.push_str(&format!(" m={m}"));
        }
        if let Some(n) = self.n {
            s.push_str(&format!(" n={n}"));
        }
        s.push('\n');
        for f in &self.forms {
            s.push_str(&format!(
                "{} on R^{}: {} components, tr B = {}, B symmetric {}, appropriate {}\n",
                f.label,
                f.dim,
                f.form.len(),
                f.b_trace,
                f.b_symmetric,
                f.appropriate
            ));
            for e in &f.eigenvalues {
                let v = e.exact.clone().unwrap_or_else(|| format!("{:.12}", e.value));
                match e.ratio {
                    Some(r) => s.push_str(&format!("  {v} ×{} (ratio {r:.9})\n", e.multiplicity)),
                    None => s.push_str(&format!("  {v} ×{}\n", e.multiplicity)),
                }
            }
        }
        for c in &self.checks {
            s.push_str(&format!("[{}] {}\n", if c.passed { "ok" } else { "FAIL" }, c.name));
        }
        s.push_str(&format!("verdict: {}\n", if self.passed { "pass" } else { "fail" }));
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qk_two() {
        let r = report(Group::Qk, Some(2), None).unwrap();
        assert!(r.passed, "{}", r.to_text());
        let mut ratios: Vec<(usize, String)> = r.forms[0]
            .eigenvalues
            .iter()
            .map(|e| (e.multiplicity, format!("{:.6}", e.ratio.unwrap())))
            .collect();
        ratios.sort();
        assert_eq!(
            ratios,
            vec![(3, "-1.666667".into()), (10, "1.000000".into()), (15, "-0.333333".into())]
        );
    }

    #[test]
    fn qk_one() {
        let r = report(Group::Qk, Some(1), None).unwrap();
        assert!(r.passed, "{}", r.to_text());
    }

    #[test]
    fn qk_zero_is_usage_error() {
        let e = report(Group::Qk, Some(0), None).unwrap_err();
        assert!(e.is_usage(), "{e}");
        assert!(report(Group::Qk, None, None).unwrap_err().is_usage());
    }

    #[test]
    fn g2_and_kostant() {
        assert!(report(Group::G2, None, None).unwrap().passed);
        let so4 = report(Group::KostantSoN, None, Some(4)).unwrap();
        assert!(so4.passed && !so4.forms[0].appropriate);
        assert!(report(Group::KostantU2, None, None).unwrap().passed);
    }

    #[test]
    fn names_round_trip() {
        for g in Group::ALL {
            assert_eq!(Group::parse(g.name()), Some(g));
        }
    }
}
