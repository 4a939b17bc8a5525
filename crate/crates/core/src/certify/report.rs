use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::channels::{
    verify_l0_lminus, verify_l0_lplus, verify_l1, verify_l_ge_2, verify_lminus_l_ge_1, ChannelOutput,
};
use super::VerifyOptions;
use crate::certificate::Certificate;
use crate::config::OperatorSelection;
use crate::error::{Error, Result};
use crate::groundstate::{certify_q_bounds, GroundStateProfile};
use crate::radialode::Operator;

pub const VERDICT_CERTIFIED: &str = "gap certified at desk scale";
pub const VERDICT_NOT_CERTIFIED: &str = "not certified";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileFingerprint {
    pub shoot_param: f64,
    pub resolution_error: f64,
    pub tail_coeff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub lambda_grid: Vec<f64>,
    pub t0_range: (f64, f64),
    pub t0_step: f64,
    pub bound_fine_step: f64,
    pub bound_coarse_step: f64,
    pub sturm_spacing: f64,
    pub epsilon_sweep: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub integrator: f64,
    pub kernel_integrator: f64,
    pub kernel_relative: f64,
    pub zero: f64,
    pub checkpoint_slack: f64,
    pub sturm_slack: f64,
    pub refinement: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub operator: String,
    pub verdict: String,
    pub complete: bool,
    pub profile_fingerprint: ProfileFingerprint,
    pub grids: GridSummary,
    pub tolerances: Tolerances,
    pub certificates: Vec<Certificate>,
    pub observations: BTreeMap<String, Value>,
}

impl GapReport {
    pub fn certified(&self) -> bool {
        self.verdict == VERDICT_CERTIFIED
    }

    pub fn failed(&self) -> impl Iterator<Item = &Certificate> {
        self.certificates.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Fixed-width table `pass  margin  id`, one row per certificate.
    pub fn margin_table(&self) -> String {
        let width = self.certificates.iter().map(|c| c.id.len()).max().unwrap_or(2).max(2);
        let mut s = format!("{:<4}  {:>13}  {:<width$}\n", "ok", "margin", "id");
        for c in &self.certificates {
            let mark = if c.pass { "PASS" } else { "FAIL" };
            s.push_str(&format!("{mark:<4}  {:>13.6e}  {:<width$}\n", c.margin, c.id));
        }
        s.push_str(&format!("verdict: {}\n", self.verdict));
        s
    }
}

fn required_prefixes(op: Operator) -> &'static [&'static str] {
    match op {
        Operator::Lplus => &["Q.", "Lplus.l_ge_2.", "Lplus.l1.", "Lplus.l0."],
        Operator::Lminus => &["Q.", "Lminus.l_ge_1.", "Lminus.l0."],
    }
}

/// Conjunction of all certificates. A selection whose channels are not all
/// represented is incomplete and never certified.
pub fn assemble_report(
    selection: OperatorSelection,
    certificates: Vec<Certificate>,
    observations: BTreeMap<String, Value>,
    profile: &GroundStateProfile,
    opts: &VerifyOptions,
) -> GapReport {
    let complete = !certificates.is_empty()
        && selection
            .operators()
            .iter()
            .flat_map(|op| required_prefixes(*op).iter())
            .all(|p| certificates.iter().any(|c| c.id.starts_with(p)));
    let all_pass = certificates.iter().all(|c| c.pass);
    let verdict = if complete && all_pass { VERDICT_CERTIFIED } else { VERDICT_NOT_CERTIFIED };
    GapReport {
        operator: selection.name().to_string(),
        verdict: verdict.to_string(),
        complete,
        profile_fingerprint: ProfileFingerprint {
            shoot_param: profile.shoot_param,
            resolution_error: profile.resolution_error,
            tail_coeff: profile.tail_coeff,
        },
        grids: GridSummary {
            lambda_grid: opts.lambda_grid.clone(),
            t0_range: opts.t0_range,
            t0_step: opts.t0_grid_step,
            bound_fine_step: opts.bound_grid.fine_step,
            bound_coarse_step: opts.bound_grid.coarse_step,
            sturm_spacing: opts.sturm_spacing,
            epsilon_sweep: opts.epsilon_sweep.clone(),
        },
        tolerances: Tolerances {
            integrator: opts.tol,
            kernel_integrator: opts.kernel_tol,
            kernel_relative: opts.kernel_rel_tol,
            zero: opts.zero_tol,
            checkpoint_slack: opts.checkpoint_slack,
            sturm_slack: opts.sturm_slack,
            refinement: opts.refinement_tol,
        },
        certificates,
        observations,
    }
}

fn run_operator(profile: &GroundStateProfile, op: Operator, opts: &VerifyOptions) -> Result<ChannelOutput> {
    let mut out = ChannelOutput::default();
    match op {
        Operator::Lplus => {
            let (ge2, (l1, l0)) = std::thread::scope(|s| {
                let l1 = s.spawn(|| verify_l1(profile, opts));
                let l0 = s.spawn(|| verify_l0_lplus(profile, opts));
                let ge2 = verify_l_ge_2(profile, opts);
                (ge2, (join(l1), join(l0)))
            });
            out.certificates.push(ge2);
            out.extend(l1?);
            out.extend(l0?);
        }
        Operator::Lminus => {
            out.certificates.push(verify_lminus_l_ge_1(profile, opts));
            out.extend(verify_l0_lminus(profile, opts)?);
        }
    }
    Ok(out)
}

fn join<T>(h: std::thread::ScopedJoinHandle<'_, Result<T>>) -> Result<T> {
    h.join().unwrap_or_else(|_| Err(Error::Numeric("channel worker panicked".into())))
}

/// Margins of the grid-dependent `l = 1` certificates under doubled λ- and
/// t₀-grid density. Ids present in both runs are compared.
pub fn refinement_stability(
    profile: &GroundStateProfile,
    opts: &VerifyOptions,
    coarse: &[Certificate],
) -> Result<Certificate> {
    let fine = verify_l1(profile, &opts.refined())?;
    let fine_by_id: BTreeMap<&str, f64> = fine.certificates.iter().map(|c| (c.id.as_str(), c.margin)).collect();
    let mut worst: f64 = 0.0;
    let mut worst_id = String::new();
    let mut compared = 0usize;
    for c in coarse.iter().filter(|c| c.id.starts_with("Lplus.l1.")) {
        if let Some(m) = fine_by_id.get(c.id.as_str()) {
            compared += 1;
            let d = (m - c.margin).abs();
            if d > worst || compared == 1 {
                worst = d;
                worst_id = c.id.clone();
            }
        }
    }
    Ok(Certificate::new("grid.refinement_stability", "plumbing", opts.refinement_tol - worst, compared > 0)
        .with("max_margin_change", worst)
        .with("worst_id", worst_id)
        .with("compared", compared as f64)
        .with("refined_t0_step", 0.5 * opts.t0_grid_step))
}

/// Runs every channel of the selected operators and assembles the report.
pub fn verify(profile: &GroundStateProfile, selection: OperatorSelection, opts: &VerifyOptions) -> Result<GapReport> {
    opts.validate()?;
    let violations = profile.violations();
    if !violations.is_empty() {
        return Err(Error::InvalidArgument(format!("invalid profile: {}", violations.join("; "))));
    }
    let mut certificates = certify_q_bounds(profile, &opts.bound_grid);
    let mut observations = BTreeMap::new();
    for op in selection.operators() {
        let out = run_operator(profile, op, opts)?;
        certificates.extend(out.certificates);
        observations.extend(out.observations);
    }
    if opts.refinement_check && selection != OperatorSelection::Lminus {
        let c = refinement_stability(profile, opts, &certificates)?;
        certificates.push(c);
    }
    if let Some(id) = &opts.inject_failure {
        let target = certificates
            .iter_mut()
            .find(|c| &c.id == id)
            .ok_or_else(|| Error::Config(format!("no certificate named '{id}' to fail")))?;
        *target = target.clone().fail("injected failure");
    }
    Ok(assemble_report(selection, certificates, observations, profile, opts))
}
