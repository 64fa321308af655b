//! Harmonic-space pipelines: prepotential `A₊₊` → `Φ` → analytic-frame
//! potentials → central frame → connection on `M`, with curvature and
//! the almost-flatness audits.

use crate::derivation::Derivation;
use crate::harmonic::{field_label, multiplicity, AnalyticMode, HarmonicError, HarmonicModel};
use crate::poly::{Poly, PolyError, PolyMatrix};
use crate::raising::Raiser;
use crate::scalar::Gq;
use thiserror::Error;

pub const DEFAULT_MAX_DEGREE: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaugeError {
    #[error("{0}")]
    Analytic(String),
    #[error("Φ iteration did not terminate after {0} steps; input is not nilpotent")]
    NotNilpotent(usize),
    #[error("nonlinear in u_+: remainder {0}")]
    NonlinearInUPlus(String),
    #[error("inconsistent double extraction of C^e_αβγ")]
    InconsistentExtraction,
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("gauge rank mismatch: model {model}, prepotential {input}")]
    Rank { model: usize, input: usize },
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Harmonic(#[from] HarmonicError),
}

pub type Result<T> = std::result::Result<T, GaugeError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhiMode {
    Nilpotent,
    Series(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaugeOptions {
    pub max_degree: usize,
    pub phi_mode: PhiMode,
}

impl Default for GaugeOptions {
    fn default() -> Self {
        GaugeOptions {
            max_degree: DEFAULT_MAX_DEGREE,
            phi_mode: PhiMode::Nilpotent,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhiSolution {
    pub phi: PolyMatrix,
    pub steps: usize,
    pub truncation_order: Option<usize>,
}

/// `Φ = Id + Σ_k Φ_k`, `∂₊₊Φ_k = −A₊₊Φ_{k−1}`.
pub fn solve_phi(
    a_pp: &PolyMatrix,
    raiser: &Raiser,
    opts: &GaugeOptions,
) -> Result<PhiSolution> {
    let n = a_pp.dim();
    let mut phi = PolyMatrix::identity(n);
    let mut term = PolyMatrix::identity(n);
    let limit = match opts.phi_mode {
        PhiMode::Nilpotent => n + 1,
        PhiMode::Series(k) => k,
    };
    let mut steps = 0;
    loop {
        let rhs = a_pp.mul(&term)?.neg();
        if rhs.is_zero() {
            break;
        }
        if steps == limit {
            return match opts.phi_mode {
                PhiMode::Nilpotent => Err(GaugeError::NotNilpotent(limit)),
                PhiMode::Series(k) => Ok(PhiSolution {
                    phi,
                    steps,
                    truncation_order: Some(k),
                }),
            };
        }
        term = raiser.solve_matrix(&rhs, opts.max_degree)?;
        phi = phi.add(&term)?;
        steps += 1;
    }
    let truncation_order = match opts.phi_mode {
        PhiMode::Nilpotent => None,
        PhiMode::Series(k) => Some(k),
    };
    Ok(PhiSolution {
        phi,
        steps,
        truncation_order,
    })
}

/// Frame on `S_H`: `∂₀, ∂₊₊, ∂₋₋`, then `X^e_k` family by family.
#[derive(Debug, Clone)]
pub struct Frame {
    pub labels: Vec<String>,
    pub fields: Vec<Derivation>,
    m: usize,
    p: usize,
}

pub const F_D0: usize = 0;
pub const F_DPP: usize = 1;
pub const F_DMM: usize = 2;

impl Frame {
    pub fn new(model: &HarmonicModel) -> Self {
        let mut labels = vec!["∂0".to_string(), "∂++".into(), "∂--".into()];
        let mut fields = vec![model.d0.clone(), model.dpp.clone(), model.dmm.clone()];
        for (i, fam) in model.x_fields.iter().enumerate() {
            for (e, x) in fam.iter().enumerate() {
                labels.push(format!("{}^{}", field_label(model.spin_m, i), e + 1));
                fields.push(x.clone());
            }
        }
        Frame {
            labels,
            fields,
            m: model.spin_m,
            p: model.rank_e,
        }
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn x(&self, i: usize, e: usize) -> usize {
        3 + i * self.p + e
    }

    fn split(&self, a: usize) -> Option<(usize, usize)> {
        if a < 3 {
            None
        } else {
            Some(((a - 3) / self.p, (a - 3) % self.p))
        }
    }

    /// `[F_a, F_b]` as a combination of frame fields.
    pub fn bracket(&self, a: usize, b: usize) -> Vec<(usize, Gq)> {
        let m = self.m as i64;
        let one = |k: usize, c: i64| if c == 0 { vec![] } else { vec![(k, Gq::int(c))] };
        let neg = |v: Vec<(usize, Gq)>| v.into_iter().map(|(k, c)| (k, -c)).collect();
        match (self.split(a), self.split(b)) {
            (None, None) => match (a, b) {
                (F_D0, F_DPP) => one(F_DPP, 2),
                (F_D0, F_DMM) => one(F_DMM, -2),
                (F_DPP, F_DMM) => one(F_D0, 1),
                (x, y) if x == y => vec![],
                _ => neg(self.bracket(b, a)),
            },
            (None, Some((i, e))) => {
                let i64_ = i as i64;
                match a {
                    F_D0 => one(b, m - 2 * i64_),
                    F_DPP if i > 0 => one(self.x(i - 1, e), i64_),
                    F_DMM if i < self.m => one(self.x(i + 1, e), m - i64_),
                    _ => vec![],
                }
            }
            (Some(_), None) => neg(self.bracket(b, a)),
            (Some(_), Some(_)) => vec![],
        }
    }

    /// `F(a,b) = X_a P_b − X_b P_a + [P_a, P_b] − P([X_a, X_b])`.
    pub fn curvature(&self, pots: &[PolyMatrix], a: usize, b: usize) -> Result<PolyMatrix> {
        let mut f = self.fields[a]
            .apply_matrix(&pots[b])
            .sub(&self.fields[b].apply_matrix(&pots[a]))?
            .add(&pots[a].commutator(&pots[b])?)?;
        for (k, c) in self.bracket(a, b) {
            f = f.sub(&pots[k].scale(&c))?;
        }
        Ok(f)
    }
}

/// A check with a stable name; `passed` is an exact verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
}

fn check(name: impl Into<String>, passed: bool) -> Check {
    Check {
        name: name.into(),
        passed,
    }
}

/// Potentials in the analytic frame, one per frame field.
#[derive(Debug, Clone)]
pub struct AnalyticFramePotentials {
    pub a_pp: PolyMatrix,
    pub a_mm: PolyMatrix,
    pub by_field: Vec<PolyMatrix>,
}

/// `A₋₋ = −(∂₋₋Φ)Φ⁻¹` and the recursion for the horizontal potentials.
pub fn analytic_potentials(
    model: &HarmonicModel,
    frame: &Frame,
    mode: AnalyticMode,
    a_pp: &PolyMatrix,
    phi: &PolyMatrix,
    phi_inv: &PolyMatrix,
) -> Result<AnalyticFramePotentials> {
    let n = a_pp.dim();
    let a_mm = model.dmm.apply_matrix(phi).mul(phi_inv)?.neg();
    let mut by_field = vec![PolyMatrix::zero(n); frame.len()];
    by_field[F_DPP] = a_pp.clone();
    by_field[F_DMM] = a_mm.clone();
    let dmm = &model.dmm;
    // A([∂₋₋, X]) = ∂₋₋A(X) − X A₋₋ + [A₋₋, A(X)]
    let step = |prev: &PolyMatrix, x: &Derivation| -> Result<PolyMatrix> {
        Ok(dmm
            .apply_matrix(prev)
            .sub(&x.apply_matrix(&a_mm))?
            .add(&a_mm.commutator(prev)?)?)
    };
    for e in 0..model.rank_e {
        match mode {
            AnalyticMode::HalfFlat => {
                let am = model.x_fields[0][e].apply_matrix(&a_mm).neg();
                by_field[frame.x(1, e)] = am;
            }
            AnalyticMode::ZeroPartial => {
                let ap = model.x_fields[0][e]
                    .apply_matrix(&a_mm)
                    .scale(&Gq::ratio(-1, 3));
                let am = step(&ap, &model.x_fields[1][e])?.scale(&Gq::ratio(1, 2));
                let ammm = step(&am, &model.x_fields[2][e])?;
                by_field[frame.x(1, e)] = ap;
                by_field[frame.x(2, e)] = am;
                by_field[frame.x(3, e)] = ammm;
            }
            AnalyticMode::OnePartial => {
                let am = model.x_fields[1][e]
                    .apply_matrix(&a_mm)
                    .scale(&Gq::ratio(-1, 2));
                let ammm = step(&am, &model.x_fields[2][e])?;
                by_field[frame.x(2, e)] = am;
                by_field[frame.x(3, e)] = ammm;
            }
        }
    }
    Ok(AnalyticFramePotentials {
        a_pp: a_pp.clone(),
        a_mm,
        by_field,
    })
}

/// `C(X) = Φ⁻¹A(X)Φ + Φ⁻¹(XΦ)` for every frame field.
pub fn central_frame(
    frame: &Frame,
    pots: &AnalyticFramePotentials,
    phi: &PolyMatrix,
    phi_inv: &PolyMatrix,
) -> Result<Vec<PolyMatrix>> {
    let mut out = Vec::with_capacity(frame.len());
    for (k, x) in frame.fields.iter().enumerate() {
        let c = phi_inv
            .mul(&pots.by_field[k])?
            .mul(phi)?
            .add(&phi_inv.mul(&x.apply_matrix(phi))?)?;
        out.push(c);
    }
    Ok(out)
}

/// Potentials `C^e_A` of a connection on `M`; `coeffs[e][k]` with `k` the
/// number of twos in the sorted index `A` (for `m = 1`, `k = α − 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionOnM {
    pub spin_m: usize,
    pub rank_e: usize,
    pub coeffs: Vec<Vec<PolyMatrix>>,
}

impl ConnectionOnM {
    pub fn zero(spin_m: usize, rank_e: usize, r: usize) -> Self {
        ConnectionOnM {
            spin_m,
            rank_e,
            coeffs: vec![vec![PolyMatrix::zero(r); spin_m + 1]; rank_e],
        }
    }

    pub fn gauge_rank(&self) -> usize {
        self.coeffs[0][0].dim()
    }

    pub fn flat(&self, i: usize) -> &PolyMatrix {
        let h = self.spin_m + 1;
        &self.coeffs[i / h][i % h]
    }
}

/// `u_+`-monomial exponent with `k` copies of `u₊²` and `m−k` of `u₊¹`.
fn u_plus_mono(m: usize, k: usize) -> [u16; 4] {
    [(m - k) as u16, k as u16, 0, 0]
}

/// Reads `C^e_A` off `C(X^e_{+…+}) = Σ_t u₊^t C^e_{sort t}` and asserts a
/// zero remainder.
pub fn extract_c(model: &HarmonicModel, frame: &Frame, central: &[PolyMatrix]) -> Result<ConnectionOnM> {
    let m = model.spin_m;
    let r = central[0].dim();
    let mut conn = ConnectionOnM::zero(m, model.rank_e, r);
    for e in 0..model.rank_e {
        let c_top = &central[frame.x(0, e)];
        let mut rebuilt = PolyMatrix::zero(r);
        for k in 0..=m {
            let mono = u_plus_mono(m, k);
            let coeff = c_top
                .u_coefficient(mono)
                .scale(&Gq::ratio(1, multiplicity(m, k)));
            let u = Poly::monomial(mono.to_vec(), Gq::int(multiplicity(m, k)));
            rebuilt = rebuilt.add(&coeff.scale_poly(&u))?;
            conn.coeffs[e][k] = coeff;
        }
        let rem = c_top.sub(&rebuilt)?;
        if !rem.is_zero() {
            return Err(GaugeError::NonlinearInUPlus(rem.to_text(&model.vars)));
        }
    }
    Ok(conn)
}

/// Pull-back potential of a connection on `M` along the field with `i`
/// minus slots: `Σ_t u_{s₁}^{t₁}⋯u_{s_m}^{t_m} C^e_{sort t}`.
pub fn pullback_potential(model: &HarmonicModel, conn: &ConnectionOnM, i: usize, e: usize) -> PolyMatrix {
    let m = model.spin_m;
    let r = conn.gauge_rank();
    let mut out = PolyMatrix::zero(r);
    for bits in 0..1usize << m {
        let t: Vec<usize> = (0..m).map(|j| (bits >> j) & 1).collect();
        let k = t.iter().filter(|&&a| a == 1).count();
        let mut mono = [0u16; 4];
        for (j, &a) in t.iter().enumerate() {
            let minus = j < i;
            mono[a + if minus { 2 } else { 0 }] += 1;
        }
        let u = Poly::monomial(mono.to_vec(), Gq::one());
        out = out.add(&conn.coeffs[e][k].scale_poly(&u)).expect("same rank");
    }
    out
}

/// `F(∂_I, ∂_J) = ∂_I C_J − ∂_J C_I + [C_I, C_J]` over the flat index
/// `I = e(m+1) + k`.
pub fn curvature_on_m(model: &HarmonicModel, conn: &ConnectionOnM) -> Result<Vec<Vec<PolyMatrix>>> {
    let h = model.spin_m + 1;
    let n = model.rank_e * h;
    let var = |i: usize| model.x_index[i / h][i % h];
    let r = conn.gauge_rank();
    let mut f = vec![vec![PolyMatrix::zero(r); n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let ci = conn.flat(i);
            let cj = conn.flat(j);
            let v = cj
                .map(|p| p.deriv(var(i)))
                .sub(&ci.map(|p| p.deriv(var(j))))?
                .add(&ci.commutator(cj)?)?;
            f[j][i] = v.neg();
            f[i][j] = v;
        }
    }
    Ok(f)
}

/// The split of an `m = 1` curvature into `F^{(ee')}` and `F^{[ee']}_{αβ}`.
#[derive(Debug, Clone)]
pub struct CurvatureReport {
    pub components: Vec<Vec<PolyMatrix>>,
    pub sym: Vec<Vec<PolyMatrix>>,
    pub skew: Vec<Vec<[[PolyMatrix; 2]; 2]>>,
    pub half_flat: bool,
    pub reassembly_exact: bool,
}

pub fn decompose_m1(model: &HarmonicModel, f: &[Vec<PolyMatrix>]) -> Result<CurvatureReport> {
    let p = model.rank_e;
    let r = f[0][0].dim();
    let eps = model.eps;
    let w = Gq::int(eps[0][1] - eps[1][0]);
    let winv = w
        .inverse()
        .ok_or_else(|| GaugeError::Invariant("ω_H is degenerate".into()))?;
    let comp = |e: usize, a: usize, e2: usize, b: usize| &f[2 * e + a][2 * e2 + b];
    let z = PolyMatrix::zero(r);
    let mut sym = vec![vec![z.clone(); p]; p];
    let mut skew = vec![vec![[[z.clone(), z.clone()], [z.clone(), z.clone()]]; p]; p];
    let mut half_flat = true;
    let mut reassembly_exact = true;
    for e in 0..p {
        for e2 in 0..p {
            let s = comp(e, 0, e2, 1).sub(comp(e, 1, e2, 0))?.scale(&winv);
            for a in 0..2 {
                for b in 0..2 {
                    let k = comp(e, a, e2, b).sub(&s.scale(&Gq::int(eps[a][b])))?;
                    if !k.is_zero() {
                        half_flat = false;
                    }
                    skew[e][e2][a][b] = k;
                }
            }
            sym[e][e2] = s;
        }
    }
    // type checks: F^(ee') symmetric in ee', F^[ee'] skew in ee', symmetric in αβ
    for e in 0..p {
        for e2 in 0..p {
            if sym[e][e2] != sym[e2][e] {
                reassembly_exact = false;
            }
            for a in 0..2 {
                for b in 0..2 {
                    if skew[e][e2][a][b] != skew[e][e2][b][a]
                        || skew[e][e2][a][b] != skew[e2][e][a][b].neg()
                    {
                        reassembly_exact = false;
                    }
                }
            }
        }
    }
    Ok(CurvatureReport {
        components: f.to_vec(),
        sym,
        skew,
        half_flat,
        reassembly_exact,
    })
}

/// Residuals of the almost-flatness equations in the analytic frame.
pub fn almost_flat_audit(
    model: &HarmonicModel,
    frame: &Frame,
    mode: AnalyticMode,
    pots: &[PolyMatrix],
) -> Result<Vec<Check>> {
    let p = model.rank_e;
    let mut out = Vec::new();
    let vertical = [F_D0, F_DPP, F_DMM];
    let zero = |a: usize, b: usize| -> Result<bool> { Ok(frame.curvature(pots, a, b)?.is_zero()) };
    let mut all_zero = |name: String, pairs: Vec<(usize, usize)>| -> Result<()> {
        let mut ok = true;
        for (a, b) in pairs {
            ok &= zero(a, b)?;
        }
        out.push(check(name, ok));
        Ok(())
    };
    let all: Vec<usize> = (0..frame.len()).collect();
    all_zero("F(∂++,·) = 0".into(), all.iter().map(|&b| (F_DPP, b)).collect())?;
    all_zero("F(∂0,·) = 0".into(), all.iter().map(|&b| (F_D0, b)).collect())?;
    // horizontal families that must be flat along the analytic distribution
    let flat_families: Vec<usize> = match mode {
        AnalyticMode::HalfFlat | AnalyticMode::ZeroPartial => vec![0],
        AnalyticMode::OnePartial => vec![0, 1],
    };
    let vertical_families: Vec<usize> = match mode {
        AnalyticMode::HalfFlat => vec![0],
        AnalyticMode::ZeroPartial | AnalyticMode::OnePartial => vec![0, 1, 2],
    };
    let mut pairs = Vec::new();
    for &i in &flat_families {
        for &j in &flat_families {
            for e in 0..p {
                for e2 in 0..p {
                    pairs.push((frame.x(i, e), frame.x(j, e2)));
                }
            }
        }
    }
    let names: Vec<String> = flat_families
        .iter()
        .map(|&i| field_label(model.spin_m, i))
        .collect();
    all_zero(format!("F(X,X') = 0 for X in {{{}}}", names.join(",")), pairs)?;
    let mut pairs = Vec::new();
    for &i in &vertical_families {
        for e in 0..p {
            for v in vertical {
                pairs.push((frame.x(i, e), v));
            }
        }
    }
    all_zero("F(X,v) = 0 for vertical v".into(), pairs)?;
    if mode == AnalyticMode::HalfFlat {
        let mut ok = true;
        for e in 0..p {
            for e2 in 0..p {
                let l = frame.curvature(pots, frame.x(0, e), frame.x(1, e2))?;
                let r = frame.curvature(pots, frame.x(0, e2), frame.x(1, e))?;
                ok &= l == r;
            }
        }
        out.push(check("F(X+^e,X-^e') = F(X+^e',X-^e)", ok));
        let mut ok = true;
        for e in 0..p {
            ok &= zero(F_DMM, frame.x(1, e))?;
        }
        out.push(check("F(∂--,X-^e) = 0", ok));
    }
    Ok(out)
}

/// Everything one pipeline run produces.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub mode: AnalyticMode,
    pub a_pp: PolyMatrix,
    pub phi: PhiSolution,
    pub phi_inv: PolyMatrix,
    pub potentials: AnalyticFramePotentials,
    pub central: Vec<PolyMatrix>,
    pub connection: ConnectionOnM,
    pub curvature: Vec<Vec<PolyMatrix>>,
    pub checks: Vec<Check>,
    pub audit: Vec<Check>,
}

impl PipelineRun {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().chain(&self.audit).all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<bool> {
        self.checks
            .iter()
            .chain(&self.audit)
            .find(|c| c.name == name)
            .map(|c| c.passed)
    }
}

/// Runs the construction for the given mode. Hard rejections (analyticity,
/// nonlinearity, non-termination) are errors; identities that should hold
/// are reported as checks.
pub fn run_pipeline(
    model: &HarmonicModel,
    mode: AnalyticMode,
    a_pp: &PolyMatrix,
    opts: &GaugeOptions,
) -> Result<PipelineRun> {
    if a_pp.dim() != model.gauge_rank {
        return Err(GaugeError::Rank {
            model: model.gauge_rank,
            input: a_pp.dim(),
        });
    }
    let bad = model.analytic_check(a_pp, mode, 2);
    if let Some((name, _)) = bad.first() {
        let msg = if name.starts_with("charge check failed") {
            "charge check failed: ∂₀A₊₊ ≠ 2A₊₊".to_string()
        } else if name.starts_with("mode ") {
            name.clone()
        } else {
            format!("analyticity check failed: {}", name.replace(" A ", " A₊₊ "))
        };
        return Err(GaugeError::Analytic(msg));
    }
    a_pp.check_degree(opts.max_degree)?;
    let raiser = Raiser::new();
    let frame = Frame::new(model);
    let phi = solve_phi(a_pp, &raiser, opts)?;
    let n = a_pp.dim();
    let phi_inv = match opts.phi_mode {
        PhiMode::Nilpotent => phi.phi.invert(n + 1)?,
        PhiMode::Series(_) => phi.phi.invert(n + opts.max_degree)?,
    };
    let mut checks = Vec::new();
    let phi_res = model
        .dpp
        .apply_matrix(&phi.phi)
        .add(&a_pp.mul(&phi.phi)?)?;
    checks.push(check("∂++Φ + A++Φ = 0", phi_res.is_zero()));
    checks.push(check("∂0Φ = 0", model.d0.apply_matrix(&phi.phi).is_zero()));
    let pots = analytic_potentials(model, &frame, mode, a_pp, &phi.phi, &phi_inv)?;
    if mode == AnalyticMode::OnePartial {
        for e in 0..model.rank_e {
            if !model.x_fields[0][e].apply_matrix(&pots.a_mm).is_zero() {
                return Err(GaugeError::Analytic(format!(
                    "1-partial consistency failed: X+++^{} A₋₋ ≠ 0",
                    e + 1
                )));
            }
        }
    }
    for (k, a) in pots.by_field.iter().enumerate() {
        let want = match k {
            F_D0 => 0,
            F_DPP => 2,
            F_DMM => -2,
            _ => model.field_charge((k - 3) / model.rank_e),
        };
        let res = model.d0.apply_matrix(a).sub(&a.scale(&Gq::int(want)))?;
        if !res.is_zero() {
            checks.push(check(format!("charge of A({})", frame.labels[k]), false));
        }
    }
    checks.push(check(
        "analytic potentials have their charges",
        !checks.iter().any(|c| c.name.starts_with("charge of")),
    ));
    checks.retain(|c| !c.name.starts_with("charge of"));
    let amm = model
        .dpp
        .apply_matrix(&pots.a_mm)
        .sub(&model.dmm.apply_matrix(a_pp))?
        .add(&a_pp.commutator(&pots.a_mm)?)?;
    checks.push(check("∂++A-- − ∂--A++ + [A++,A--] = 0", amm.is_zero()));
    let central = central_frame(&frame, &pots, &phi.phi, &phi_inv)?;
    let vertical_zero = [F_D0, F_DPP, F_DMM].iter().all(|&k| central[k].is_zero());
    checks.push(check("C(∂0) = C(∂++) = C(∂--) = 0", vertical_zero));
    let mut hf_cp = true;
    for e in 0..model.rank_e {
        let c = &central[frame.x(0, e)];
        hf_cp &= model.dpp.apply_matrix(c).is_zero();
        hf_cp &= model
            .d0
            .apply_matrix(c)
            .sub(&c.scale(&Gq::int(model.spin_m as i64)))?
            .is_zero();
    }
    checks.push(check("∂++C(X+) = 0, ∂0C(X+) = m·C(X+)", hf_cp));
    let connection = extract_c(model, &frame, &central)?;
    checks.push(check("extraction remainder zero", true));
    let u_free = connection.coeffs.iter().flatten().all(|c| !c.has_u());
    checks.push(check("C^e_A independent of u", u_free));
    if mode == AnalyticMode::OnePartial {
        for e in 0..model.rank_e {
            let want = pullback_potential(model, &connection, 1, e);
            if want != central[frame.x(1, e)] {
                return Err(GaugeError::InconsistentExtraction);
            }
        }
        checks.push(check("C(X+) matches the same C^e_αβγ", true));
    }
    let audit = almost_flat_audit(model, &frame, mode, &pots.by_field)?;
    let curvature = curvature_on_m(model, &connection)?;
    Ok(PipelineRun {
        mode,
        a_pp: a_pp.clone(),
        phi,
        phi_inv,
        potentials: pots,
        central,
        connection,
        curvature,
        checks,
        audit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nilp() -> Vec<Vec<Gq>> {
        vec![vec![Gq::zero(), Gq::one()], vec![Gq::zero(), Gq::zero()]]
    }

    #[test]
    fn worked_example() {
        let model = HarmonicModel::build(1, 2, 2).unwrap();
        let xp = model.x_pm(0, false);
        let xm = model.x_pm(0, true);
        let a_pp = PolyMatrix::poly_times_const(&xp.mul(&xp), &nilp()).unwrap();
        let run = run_pipeline(&model, AnalyticMode::HalfFlat, &a_pp, &GaugeOptions::default()).unwrap();
        let want_phi = PolyMatrix::identity(2)
            .sub(&PolyMatrix::poly_times_const(&xp.mul(&xm), &nilp()).unwrap())
            .unwrap();
        assert_eq!(run.phi.phi, want_phi);
        let want_amm = PolyMatrix::poly_times_const(&xm.mul(&xm), &nilp()).unwrap();
        assert_eq!(run.potentials.a_mm, want_amm);
        let c11 = PolyMatrix::poly_times_const(&model.x(0, 1), &nilp()).unwrap();
        let c12 = PolyMatrix::poly_times_const(&model.x(0, 0).neg(), &nilp()).unwrap();
        assert_eq!(run.connection.coeffs[0][0], c11);
        assert_eq!(run.connection.coeffs[0][1], c12);
        assert!(run.connection.coeffs[1][0].is_zero());
        let f12 = PolyMatrix::from_const(&nilp()).unwrap().scale(&Gq::int(-2));
        assert_eq!(run.curvature[0][1], f12);
        assert!(run.all_passed(), "{:?}", run.checks);
        let rep = decompose_m1(&model, &run.curvature).unwrap();
        assert!(rep.half_flat);
    }

    #[test]
    fn zero_prepotential_gives_identity() {
        let model = HarmonicModel::build(1, 2, 2).unwrap();
        let run = run_pipeline(
            &model,
            AnalyticMode::HalfFlat,
            &PolyMatrix::zero(2),
            &GaugeOptions::default(),
        )
        .unwrap();
        assert_eq!(run.phi.phi, PolyMatrix::identity(2));
        assert!(run.connection.coeffs.iter().flatten().all(|c| c.is_zero()));
    }

    #[test]
    fn wrong_charge_rejected() {
        let model = HarmonicModel::build(1, 2, 2).unwrap();
        let a = PolyMatrix::poly_times_const(&model.x_pm(0, false), &nilp()).unwrap();
        let err = run_pipeline(&model, AnalyticMode::HalfFlat, &a, &GaugeOptions::default())
            .unwrap_err();
        assert!(err.to_string().contains("charge check failed"));
    }
}
