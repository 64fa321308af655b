//! Running a prepared pipeline and serialising the result.

use crate::config::Prepared;
use crate::gauge::{self, decompose_m1, Check, GaugeError, PipelineRun};
use crate::harmonic::{AnalyticMode, HarmonicModel};
use crate::parser;
use crate::poly::VarTable;
use crate::spin3;
use crate::ym;
use serde::Serialize;

pub const SCHEMA_VERSION: &str = "grassmann-gauge/report/1";

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Component {
    pub label: String,
    pub value: String,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct NamedCheck {
    pub name: String,
    pub passed: bool,
}

impl From<&Check> for NamedCheck {
    fn from(c: &Check) -> Self {
        NamedCheck {
            name: c.name.clone(),
            passed: c.passed,
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq, Default)]
pub struct Verdicts {
    pub almost_flat: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub half_flat: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f0_zero: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f1_zero: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f2_zero: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f3_zero: Option<bool>,
    #[serde(rename = "linC_remainder_zero")]
    pub lin_c_remainder_zero: bool,
    pub ym_zero: Option<bool>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct BuildReport {
    pub schema_version: &'static str,
    pub spin: usize,
    #[serde(rename = "rank_E")]
    pub rank_e: usize,
    pub gauge_rank: usize,
    pub mode: &'static str,
    pub prepotential_echo: String,
    pub prepotential: String,
    pub phi: String,
    pub phi_steps: usize,
    pub truncation_order: Option<usize>,
    #[serde(rename = "A_mm")]
    pub a_mm: String,
    #[serde(rename = "C_e_A")]
    pub c_e_a: Vec<Component>,
    pub curvature_components: Vec<Component>,
    pub checks: Vec<NamedCheck>,
    pub verdicts: Verdicts,
    pub passed: bool,
}

/// Labels of the flat index `e(m+1) + k` as `C^e_A`.
pub fn index_label(model: &HarmonicModel, i: usize) -> String {
    let h = model.spin_m + 1;
    let (e, k) = (i / h, i % h);
    let a: String = if model.spin_m == 1 {
        (k + 1).to_string()
    } else {
        (0..model.spin_m)
            .map(|j| if j < model.spin_m - k { '1' } else { '2' })
            .collect()
    };
    format!("{},{}", e + 1, a)
}

fn text(m: &crate::poly::PolyMatrix, vars: &VarTable) -> String {
    m.to_text(vars)
}

/// Whether the failure is a rejected input rather than a failed identity.
pub fn is_input_rejection(e: &GaugeError) -> bool {
    matches!(
        e,
        GaugeError::Analytic(_) | GaugeError::NotNilpotent(_) | GaugeError::Rank { .. } | GaugeError::Poly(_)
    )
}

pub fn build(p: &Prepared) -> Result<BuildReport, GaugeError> {
    let model = &p.model;
    let vars = &model.vars;
    let (run, mut checks, verdicts): (PipelineRun, Vec<NamedCheck>, Verdicts) = match p.mode {
        AnalyticMode::HalfFlat => {
            let run = gauge::run_pipeline(model, p.mode, &p.a_pp, &p.options)?;
            let dec = decompose_m1(model, &run.curvature)?;
            let ym_zero = if model.rank_e % 2 == 0 {
                let w = ym::standard_omega_e(model.rank_e);
                Some(ym::ym_residual(model, &run.connection, &w)?.is_empty())
            } else {
                None
            };
            let mut checks: Vec<NamedCheck> = Vec::new();
            checks.push(NamedCheck {
                name: "curvature split exact".into(),
                passed: dec.reassembly_exact,
            });
            checks.push(NamedCheck {
                name: "half-flat".into(),
                passed: dec.half_flat,
            });
            if let Some(z) = ym_zero {
                checks.push(NamedCheck {
                    name: "Yang-Mills residual zero".into(),
                    passed: z,
                });
            }
            let v = Verdicts {
                almost_flat: run.audit.iter().all(|c| c.passed),
                half_flat: Some(dec.half_flat),
                lin_c_remainder_zero: true,
                ym_zero,
                ..Verdicts::default()
            };
            (run, checks, v)
        }
        _ => {
            let r = match p.mode {
                AnalyticMode::ZeroPartial => spin3::build_0partial(model, &p.a_pp, &p.options)?,
                _ => spin3::build_1partial(model, &p.a_pp, &p.options)?,
            };
            let d = &r.decomposition;
            let v = Verdicts {
                almost_flat: r.run.audit.iter().all(|c| c.passed),
                f0_zero: Some(d.vanishes(0)),
                f1_zero: Some(d.vanishes(1)),
                f2_zero: Some(d.vanishes(2)),
                f3_zero: Some(d.vanishes(3)),
                lin_c_remainder_zero: true,
                ym_zero: r.ym_zero,
                ..Verdicts::default()
            };
            let checks = r.checks.iter().map(NamedCheck::from).collect();
            (r.run, checks, v)
        }
    };
    let mut all: Vec<NamedCheck> = run.checks.iter().map(NamedCheck::from).collect();
    all.extend(run.audit.iter().map(|c| NamedCheck {
        name: format!("audit: {}", c.name),
        passed: c.passed,
    }));
    all.append(&mut checks);
    let passed = all.iter().all(|c| c.passed);
    let h = model.spin_m + 1;
    let mut c_e_a = Vec::new();
    for i in 0..model.rank_e * h {
        c_e_a.push(Component {
            label: format!("C^{}", index_label(model, i)),
            value: text(run.connection.flat(i), vars),
        });
    }
    let mut curvature_components = Vec::new();
    for i in 0..run.curvature.len() {
        for j in i + 1..run.curvature.len() {
            if !run.curvature[i][j].is_zero() {
                curvature_components.push(Component {
                    label: format!("F({};{})", index_label(model, i), index_label(model, j)),
                    value: text(&run.curvature[i][j], vars),
                });
            }
        }
    }
    Ok(BuildReport {
        schema_version: SCHEMA_VERSION,
        spin: model.spin_m,
        rank_e: model.rank_e,
        gauge_rank: model.gauge_rank,
        mode: p.mode.name(),
        prepotential_echo: parser::print(&p.ast),
        prepotential: text(&p.a_pp, vars),
        phi: text(&run.phi.phi, vars),
        phi_steps: run.phi.steps,
        truncation_order: run.phi.truncation_order,
        a_mm: text(&run.potentials.a_mm, vars),
        c_e_a,
        curvature_components,
        checks: all,
        verdicts,
        passed,
    })
}

impl BuildReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!(
            "spin {} rank_E {} gauge_rank {} mode {}\n",
            self.spin, self.rank_e, self.gauge_rank, self.mode
        ));
        s.push_str(&format!("A++ = {}\n", self.prepotential_echo));
        s.push_str(&format!("Phi = {}\n", self.phi));
        if let Some(k) = self.truncation_order {
            s.push_str(&format!("series truncated at order {k}\n"));
        }
        s.push_str(&format!("A-- = {}\n", self.a_mm));
        for c in &self.c_e_a {
            s.push_str(&format!("{} = {}\n", c.label, c.value));
        }
        for c in &self.curvature_components {
            s.push_str(&format!("{} = {}\n", c.label, c.value));
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
    use crate::config::PrepotentialConfig;

    #[test]
    fn worked_report() {
        let c = PrepotentialConfig::from_toml(
            "spin = 1\nrank_E = 2\ngauge_rank = 2\nprepotential = \"xplus[1]^2 * N\"\n\
             [[nilpotent_generators]]\nname = \"N\"\nmatrix = [[0, 1], [0, 0]]\n",
        )
        .unwrap();
        let r = build(&c.prepare(None, None).unwrap()).unwrap();
        assert!(r.passed);
        assert_eq!(r.c_e_a[0].value, "[[0, x[1,2]], [0, 0]]");
        assert_eq!(r.c_e_a[1].value, "[[0, -x[1,1]], [0, 0]]");
        assert_eq!(r.verdicts.ym_zero, Some(true));
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["schema_version"], SCHEMA_VERSION);
        assert_eq!(json["verdicts"]["linC_remainder_zero"], true);
    }
}
