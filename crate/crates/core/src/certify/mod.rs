//! Channel-by-channel gap verification for `L₊` and `L₋`.
//!
//! Channels: `l ≥ 2` (`L₊`) and `l ≥ 1` (`L₋`) follow from pointwise bounds on
//! `Q`; `l = 1` of `L₊` is a zero search over a λ-grid plus a growth check over
//! a grid of shifts `t₀`; `l = 0` of both operators is a baseline integration
//! on `[0, 5]`, a Bessel-mode continuation past 5, and an ε-sweep.

mod channels;
mod report;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groundstate::BoundGrid;

pub use channels::{
    eigen_trial, find_negative_eigenvalue, kernel_deviation, lipschitz_coverage, verify_l0_lminus, verify_l0_lplus,
    verify_l1, verify_l1_growth, verify_l_ge_2, verify_lminus_l_ge_1, ChannelOutput, KernelCheck, NegativeEigenvalue,
    EULER_EXPONENT,
};
pub use report::{
    assemble_report, refinement_stability, verify, GapReport, GridSummary, ProfileFingerprint, Tolerances,
    VERDICT_CERTIFIED, VERDICT_NOT_CERTIFIED,
};

/// Parameters of a verification run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyOptions {
    /// Integrator tolerance for channel solves.
    pub tol: f64,
    /// Integrator tolerance for the kernel cross-checks, which track a
    /// decaying solution against a growing one.
    pub kernel_tol: f64,
    pub kernel_rel_tol: f64,
    pub kernel_window: (f64, f64),
    pub lambda_grid: Vec<f64>,
    pub t0_range: (f64, f64),
    pub t0_grid_step: f64,
    pub l1_t_start: f64,
    pub zero_tol: f64,
    /// Horizon of the zero searches.
    pub sweep_end: f64,
    pub checkpoint: (f64, f64),
    pub checkpoint_slack: f64,
    pub continuation_end: f64,
    pub sturm_spacing: f64,
    pub sturm_slack: f64,
    pub growth_end: f64,
    pub growth_min_ratio: f64,
    pub growth_min_slope: f64,
    /// End of the Euler-comparison window past `growth_end`.
    pub growth_comparison_end: f64,
    pub epsilon_sweep: Vec<f64>,
    pub refinement_check: bool,
    pub refinement_tol: f64,
    /// Test hook: forces the named certificate to fail.
    pub inject_failure: Option<String>,
    pub bound_grid: BoundGrid,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        let mut lambda_grid = vec![0.01, 0.05];
        lambda_grid.extend((1..=10).map(|k| k as f64 / 10.0));
        Self {
            tol: 1e-10,
            kernel_tol: 1e-13,
            kernel_rel_tol: 1e-5,
            kernel_window: (0.1, 10.0),
            lambda_grid,
            t0_range: (0.2, 1.5),
            t0_grid_step: 0.01,
            l1_t_start: 1e-3,
            zero_tol: 1e-10,
            sweep_end: 30.0,
            checkpoint: (0.47, 0.03),
            checkpoint_slack: 0.02,
            continuation_end: 20.0,
            sturm_spacing: 1e-2,
            sturm_slack: 1e-8,
            growth_end: 2.5,
            growth_min_ratio: 0.01,
            growth_min_slope: 1e-3,
            growth_comparison_end: 10.0,
            epsilon_sweep: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            refinement_check: true,
            refinement_tol: 1e-3,
            inject_failure: None,
            bound_grid: BoundGrid::default(),
        }
    }
}

fn cfg_err(msg: String) -> Error {
    Error::Config(msg)
}

impl VerifyOptions {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("tol", self.tol),
            ("kernel_tol", self.kernel_tol),
            ("kernel_rel_tol", self.kernel_rel_tol),
            ("t0_grid_step", self.t0_grid_step),
            ("zero_tol", self.zero_tol),
            ("checkpoint_slack", self.checkpoint_slack),
            ("sturm_spacing", self.sturm_spacing),
            ("refinement_tol", self.refinement_tol),
            ("bound_grid.fine_step", self.bound_grid.fine_step),
            ("bound_grid.coarse_step", self.bound_grid.coarse_step),
            ("bound_grid.coverage", self.bound_grid.coverage),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(cfg_err(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.sturm_slack >= 0.0) {
            return Err(cfg_err("sturm_slack must be nonnegative".into()));
        }
        validate_lambda_grid(&self.lambda_grid)?;
        let (a, b) = self.t0_range;
        if !(0.2 <= a && a < b && b <= 1.5) {
            return Err(cfg_err(format!("t0_range {:?} must lie in [0.2, 1.5]", self.t0_range)));
        }
        if self.t0_grid_step > b - a {
            return Err(cfg_err(format!("t0_grid_step {} exceeds the t0 range", self.t0_grid_step)));
        }
        if !(self.l1_t_start > 0.0 && self.l1_t_start <= 0.05) {
            return Err(cfg_err(format!("l1_t_start {} outside (0, 0.05]", self.l1_t_start)));
        }
        let (k0, k1) = self.kernel_window;
        if !(0.0 < k0 && k0 < k1) {
            return Err(cfg_err("kernel_window must be an interval in (0, ∞)".into()));
        }
        if !(self.continuation_end > 5.0 && self.sweep_end > 5.0) {
            return Err(cfg_err("continuation_end and sweep_end must exceed 5".into()));
        }
        if !(self.growth_end > 0.0 && self.growth_comparison_end > self.growth_end) {
            return Err(cfg_err("need 0 < growth_end < growth_comparison_end".into()));
        }
        if self.epsilon_sweep.iter().any(|e| !(0.0..=1.0).contains(e)) {
            return Err(cfg_err("epsilon_sweep values must lie in [0, 1]".into()));
        }
        Ok(())
    }

    /// Shift grid `t₀ = a, a + h, …, b`.
    pub fn t0_grid(&self) -> Vec<f64> {
        let (a, b) = self.t0_range;
        let n = ((b - a) / self.t0_grid_step).round().max(1.0) as usize;
        (0..=n).map(|k| a + (b - a) * k as f64 / n as f64).collect()
    }

    /// The same options with both the λ-grid and the t₀-grid twice as dense.
    pub fn refined(&self) -> Self {
        let mut out = self.clone();
        let mut lam = Vec::with_capacity(2 * self.lambda_grid.len());
        let mut sorted = self.lambda_grid.clone();
        sorted.sort_by(f64::total_cmp);
        for (i, &l) in sorted.iter().enumerate() {
            if i > 0 {
                lam.push(0.5 * (sorted[i - 1] + l));
            }
            lam.push(l);
        }
        out.lambda_grid = lam;
        out.t0_grid_step = 0.5 * self.t0_grid_step;
        out
    }
}

/// λ-grid must be nonempty, inside `(0, 1]`, and contain 1.
pub fn validate_lambda_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(cfg_err("lambda grid is empty".into()));
    }
    if let Some(bad) = grid.iter().find(|l| !(**l > 0.0 && **l <= 1.0)) {
        return Err(cfg_err(format!("lambda {bad} outside (0, 1]")));
    }
    if !grid.contains(&1.0) {
        return Err(cfg_err("lambda grid must contain 1".into()));
    }
    Ok(())
}
