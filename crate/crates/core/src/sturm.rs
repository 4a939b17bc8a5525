//! Executable Sturm comparison for `u'' = V u`.
//!
//! If `G ≥ g` on `[a, b]`, `F'' = G F`, `f'' = g f`, the initial data are
//! ordered and `f > 0` on the interior, then `F ≥ f`. The check samples the
//! hypothesis and the conclusion on a grid rather than trusting the comparison theorem.

use serde::{Deserialize, Serialize};

use crate::certificate::Certificate;
use crate::error::{Error, Result};
use crate::radialode::{Potential, Trajectory};

/// Default sampling spacing.
pub const DEFAULT_SPACING: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitialCheck {
    /// `F(a) = f(a) ≥ 0` and `F'(a) ≥ f'(a)`.
    Direct,
    /// `F(a) ≥ f(a) > 0` and `F'(a)/F(a) ≥ f'(a)/f(a)`.
    Riccati,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonCertificate {
    pub interval: (f64, f64),
    pub spacing: f64,
    pub points: usize,
    /// `min (G - g)` over the grid.
    pub min_potential_gap: f64,
    pub initial_form: InitialCheck,
    /// `F(a) - f(a)`.
    pub initial_value_gap: f64,
    /// `F'(a) - f'(a)` for the direct form, `F'/F - f'/f` at `a` for the Riccati form.
    pub initial_slope_gap: f64,
    /// `min (F - f)` over the grid.
    pub min_solution_gap: f64,
    /// `min f` over interior grid points.
    pub min_minorant: f64,
    pub slack: f64,
    pub pass: bool,
}

impl ComparisonCertificate {
    /// Wraps the comparison as a [`Certificate`] whose margin is the
    /// potential gap.
    pub fn to_certificate(&self, id: &str, anchor: &str) -> Certificate {
        let mut c = Certificate::new(id, anchor, self.min_potential_gap, self.pass)
            .with("interval_lo", self.interval.0)
            .with("interval_hi", self.interval.1)
            .with("spacing", self.spacing)
            .with("min_solution_gap", self.min_solution_gap)
            .with("min_minorant", self.min_minorant)
            .with("initial_value_gap", self.initial_value_gap)
            .with("initial_slope_gap", self.initial_slope_gap);
        if !self.pass {
            c = c.fail("comparison hypotheses or conclusion violated");
        }
        c
    }
}

fn grid(interval: (f64, f64), spacing: f64) -> Vec<f64> {
    let (a, b) = interval;
    let n = ((b - a) / spacing).ceil().max(1.0) as usize;
    (0..=n).map(|k| a + (b - a) * k as f64 / n as f64).collect()
}

/// Samples the comparison hypotheses and conclusion on `interval`.
///
/// `slack` absorbs integration noise: the minima must be `≥ -slack`.
pub fn check_comparison(
    v_major: &dyn Potential,
    v_minor: &dyn Potential,
    f_major: &Trajectory,
    f_minor: &Trajectory,
    interval: (f64, f64),
    spacing: f64,
    slack: f64,
) -> Result<ComparisonCertificate> {
    let (a, b) = interval;
    if !(b > a) || !(spacing > 0.0) || !(slack >= 0.0) {
        return Err(Error::InvalidArgument("bad comparison interval, spacing or slack".into()));
    }
    if !f_major.covers(a, b) || !f_minor.covers(a, b) {
        return Err(Error::Coverage { lo: a, hi: b });
    }
    let pts = grid(interval, spacing.min(DEFAULT_SPACING));
    let mut min_potential_gap = f64::INFINITY;
    let mut min_solution_gap = f64::INFINITY;
    let mut min_minorant = f64::INFINITY;
    for (k, &t) in pts.iter().enumerate() {
        min_potential_gap = min_potential_gap.min(v_major.eval(t)? - v_minor.eval(t)?);
        let big = f_major.eval(t)?[0];
        let small = f_minor.eval(t)?[0];
        min_solution_gap = min_solution_gap.min(big - small);
        if k > 0 && k + 1 < pts.len() {
            min_minorant = min_minorant.min(small);
        }
    }

    let fa = f_major.eval(a)?;
    let ga = f_minor.eval(a)?;
    let value_gap = fa[0] - ga[0];
    let scale = fa[0].abs().max(ga[0].abs()).max(1e-300);
    let equal = value_gap.abs() <= slack + 1e-12 * scale;
    let (form, slope_gap, init_ok) = if equal && ga[0] >= -slack {
        let g = fa[1] - ga[1];
        (InitialCheck::Direct, g, g >= -slack)
    } else {
        let ok = ga[0] > 0.0 && value_gap >= -slack;
        let g = if ok { fa[1] / fa[0] - ga[1] / ga[0] } else { f64::NEG_INFINITY };
        (InitialCheck::Riccati, g, ok && g >= -slack)
    };

    let pass = init_ok && min_potential_gap >= -slack && min_solution_gap >= -slack && min_minorant > 0.0;
    Ok(ComparisonCertificate {
        interval,
        spacing: spacing.min(DEFAULT_SPACING),
        points: pts.len(),
        min_potential_gap,
        initial_form: form,
        initial_value_gap: value_gap,
        initial_slope_gap: slope_gap,
        min_solution_gap,
        min_minorant,
        slack,
        pass,
    })
}

/// Grid minimum of `F'/F - f'/f` on `interval`.
pub fn riccati_gap(f_major: &Trajectory, f_minor: &Trajectory, interval: (f64, f64), spacing: f64) -> Result<f64> {
    let (a, b) = interval;
    if !(b > a) || !(spacing > 0.0) {
        return Err(Error::InvalidArgument("bad interval or spacing".into()));
    }
    if !f_major.covers(a, b) || !f_minor.covers(a, b) {
        return Err(Error::Coverage { lo: a, hi: b });
    }
    let mut worst = f64::INFINITY;
    for t in grid(interval, spacing) {
        let big = f_major.eval(t)?;
        let small = f_minor.eval(t)?;
        if !(big[0] > 0.0) || !(small[0] > 0.0) {
            return Err(Error::InvalidArgument(format!("nonpositive trajectory value at t = {t}")));
        }
        worst = worst.min(big[1] / big[0] - small[1] / small[0]);
    }
    Ok(worst)
}
