//! Radial ground state `Q` of `-y'' - (2/r) y' + y - y³ = 0`.
//!
//! The central height `b = Q(0)` is located by bisection on the shooting
//! dichotomy: for `b` below the ground-state height the trajectory turns back
//! upward before reaching zero (it is trapped in the well around `y = 1`), for
//! `b` above it the trajectory crosses zero.
//!
//! Forward shooting cannot follow the decaying solution far in double
//! precision (any error excites the `e^r/r` mode), so the stored profile is
//! assembled from two branches: the shot from the origin on `[0, r_m]` and the
//! decaying solution integrated backward from `R_max` on `[r_m, R_max]`. The
//! pair `(b, c)` is polished by Newton's method until `Q` and `Q'` agree at
//! `r_m`, which makes the profile a `C¹` solution on the whole grid.

mod bounds;

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::{bisect_root, hermite, hermite5, segment};
use crate::ode::{integrate_adaptive, Flow, State, StepControl};

pub use bounds::{certify_q_bounds, half_inverse_square_certificate, BoundGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShotVerdict {
    /// `y` reached zero while decreasing.
    CrossesZero,
    /// `y'` became positive while `y > 0`: the trajectory turned away from zero.
    TurnsBack,
    /// Neither happened before `r_max`.
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotOutcome {
    pub verdict: ShotVerdict,
    pub r: f64,
    pub y: f64,
    pub dy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GroundStateOptions {
    pub bracket: (f64, f64),
    pub r_max: f64,
    /// Launch radius for the two-term regular series.
    pub r_start: f64,
    /// Radius where the forward and backward branches are matched.
    pub match_radius: f64,
    pub inner_step: f64,
    pub outer_step: f64,
    pub integrator_tol: f64,
    /// Tolerance of the classification shots used during bisection.
    pub shoot_tol: f64,
    /// Width of the window `[R_max - w, R_max]` used for the tail fit.
    pub tail_window: f64,
}

impl Default for GroundStateOptions {
    fn default() -> Self {
        Self {
            bracket: (4.0, 5.0),
            r_max: 30.0,
            r_start: 1e-6,
            match_radius: 3.0,
            inner_step: 1e-3,
            outer_step: 1e-3,
            integrator_tol: 1e-13,
            shoot_tol: 1e-12,
            tail_window: 5.0,
        }
    }
}

/// Sampled ground state with a `c·e^{-t}/t` tail beyond the last knot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundStateProfile {
    pub shoot_param: f64,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub derivs: Vec<f64>,
    pub tail_coeff: f64,
    pub resolution_error: f64,
}

fn regular_series(b: f64, r: f64) -> State {
    let a2 = (b - b * b * b) / 6.0;
    [b + a2 * r * r, 2.0 * a2 * r]
}

fn ground_rhs(r: f64, s: &State) -> Result<State> {
    Ok([s[1], -2.0 / r * s[1] + s[0] - s[0] * s[0] * s[0]])
}

/// Integrates the ground-state equation from the origin with `y(0) = b` and
/// classifies the trajectory.
pub fn shoot(b: f64, r_max: f64, tol: f64) -> Result<ShotOutcome> {
    shoot_from(b, r_max, tol, GroundStateOptions::default().r_start)
}

fn shoot_from(b: f64, r_max: f64, tol: f64, r_start: f64) -> Result<ShotOutcome> {
    if !(b > 0.0) {
        return Err(Error::InvalidArgument(format!("central height b = {b} must be positive")));
    }
    if !(r_max > r_start) || !(tol > 0.0) {
        return Err(Error::InvalidArgument("r_max and tol must be positive".into()));
    }
    let ctl = StepControl::new(tol).with_max_step(0.05);
    let mut event: Option<(ShotVerdict, f64, State, f64, State)> = None;
    let mut last = (r_start, regular_series(b, r_start));
    integrate_adaptive(ground_rhs, r_start, last.1, r_max, &ctl, &[], |t0, y0, t1, y1| {
        last = (t1, *y1);
        if y1[0] < 0.0 {
            event = Some((ShotVerdict::CrossesZero, t0, *y0, t1, *y1));
            Flow::Stop
        } else if y1[1] > 0.0 {
            event = Some((ShotVerdict::TurnsBack, t0, *y0, t1, *y1));
            Flow::Stop
        } else {
            Flow::Continue
        }
    })?;
    let Some((verdict, t0, y0, t1, y1)) = event else {
        let (r, s) = last;
        return Ok(ShotOutcome { verdict: ShotVerdict::Undecided, r, y: s[0], dy: s[1] });
    };
    let dense = |t: f64| hermite(t0, y0[0], y0[1], t1, y1[0], y1[1], t);
    let r = match verdict {
        ShotVerdict::CrossesZero => {
            if y0[0] > 0.0 {
                bisect_root(t0, t1, 1e-13, |t| dense(t).0).1
            } else {
                t1
            }
        }
        _ => {
            if y0[1] < 0.0 {
                bisect_root(t0, t1, 1e-13, |t| dense(t).1).1
            } else {
                t1
            }
        }
    };
    let (y, dy) = dense(r);
    Ok(ShotOutcome { verdict, r, y, dy })
}

/// Bisection on the shooting dichotomy; returns the final bracket.
pub fn bisect_central_height(opts: &GroundStateOptions, tol: f64) -> Result<(f64, f64)> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {tol} must be positive")));
    }
    let (mut lo, mut hi) = opts.bracket;
    let v_lo = shoot_from(lo, opts.r_max, opts.shoot_tol, opts.r_start)?.verdict;
    let v_hi = shoot_from(hi, opts.r_max, opts.shoot_tol, opts.r_start)?.verdict;
    if v_lo != ShotVerdict::TurnsBack || v_hi != ShotVerdict::CrossesZero {
        return Err(Error::Bracket { lo, hi });
    }
    while hi - lo >= tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match shoot_from(mid, opts.r_max, opts.shoot_tol, opts.r_start)?.verdict {
            ShotVerdict::TurnsBack => lo = mid,
            ShotVerdict::CrossesZero => hi = mid,
            ShotVerdict::Undecided => {
                return Err(Error::Numeric(format!("shot from b = {mid} undecided at r = {}", opts.r_max)))
            }
        }
    }
    Ok((lo, hi))
}

/// Knots at half spacing; even indices are profile knots, odd ones are used
/// to measure the interpolation error.
struct HalfGrid {
    inner: Vec<f64>,
    outer: Vec<f64>,
}

impl HalfGrid {
    fn new(opts: &GroundStateOptions) -> Result<Self> {
        let rm = opts.match_radius;
        let n_in = (rm / opts.inner_step).round() as usize;
        let n_out = ((opts.r_max - rm) / opts.outer_step).round() as usize;
        if n_in == 0 || n_out == 0 || !(rm > opts.r_start) || !(opts.r_max > rm) {
            return Err(Error::InvalidArgument("inconsistent ground-state grid".into()));
        }
        let inner = (0..=2 * n_in).map(|k| rm * k as f64 / (2 * n_in) as f64).collect();
        let outer = (0..=2 * n_out).map(|k| rm + (opts.r_max - rm) * k as f64 / (2 * n_out) as f64).collect();
        Ok(Self { inner, outer })
    }
}

struct Branches {
    /// `(Q, Q')` at `inner[1..]`.
    forward: Vec<State>,
    /// `(Q, Q')` at `outer[..]`, ascending radius.
    backward: Vec<State>,
}

fn pick_stops(samples: &[(f64, State)], stops: &[f64]) -> Result<Vec<State>> {
    let mut out = Vec::with_capacity(stops.len());
    let mut j = 0;
    for &(t, s) in samples {
        if j < stops.len() && t == stops[j] {
            out.push(s);
            j += 1;
        }
    }
    if out.len() != stops.len() {
        return Err(Error::Numeric("integrator skipped a grid stop".into()));
    }
    Ok(out)
}

fn tail_to_q(r: f64, w: &State) -> State {
    let e = (-r).exp() / r;
    [w[0] * e, e * (w[1] - w[0] - w[0] / r)]
}

fn integrate_branches(opts: &GroundStateOptions, grid: &HalfGrid, b: f64, c: f64, tol: f64) -> Result<Branches> {
    let ctl = StepControl::new(tol).with_max_step(0.05);
    let stops = &grid.inner[1..];
    let fwd = integrate_adaptive(
        ground_rhs,
        opts.r_start,
        regular_series(b, opts.r_start),
        opts.match_radius,
        &ctl,
        stops,
        |_, _, _, _| Flow::Continue,
    )?;
    let forward = pick_stops(&fwd, stops)?;

    // u = r y = w e^{-r}:  w'' = 2 w' - w³ e^{-2r} / r²
    let tail_rhs = |r: f64, w: &State| Ok([w[1], 2.0 * w[1] - w[0] * w[0] * w[0] * (-2.0 * r).exp() / (r * r)]);
    let back_stops: Vec<f64> = grid.outer.iter().rev().skip(1).copied().collect();
    let bwd =
        integrate_adaptive(tail_rhs, opts.r_max, [c, 0.0], opts.match_radius, &ctl, &back_stops, |_, _, _, _| {
            Flow::Continue
        })?;
    let mut backward = vec![tail_to_q(opts.r_max, &[c, 0.0])];
    for (r, w) in back_stops.iter().zip(pick_stops(&bwd, &back_stops)?) {
        backward.push(tail_to_q(*r, &w));
    }
    backward.reverse();
    Ok(Branches { forward, backward })
}

fn mismatch(br: &Branches) -> [f64; 2] {
    let f = br.forward.last().unwrap();
    let t = br.backward[0];
    [(f[0] - t[0]) / t[0], (f[1] - t[1]) / t[0]]
}

struct Polished {
    b: f64,
    branches: Branches,
}

fn polish(opts: &GroundStateOptions, grid: &HalfGrid, b0: f64, tol: f64) -> Result<Polished> {
    let rm = opts.match_radius;
    let probe = integrate_branches(opts, grid, b0, 2.7, tol)?;
    let q_m = probe.forward.last().unwrap()[0];
    let mut x = [b0, q_m * rm * rm.exp()];
    for _ in 0..20 {
        let br = integrate_branches(opts, grid, x[0], x[1], tol)?;
        let r0 = mismatch(&br);
        if r0[0].abs().max(r0[1].abs()) < 1e-14 {
            return Ok(Polished { b: x[0], branches: br });
        }
        let db = 1e-7;
        let dc = 1e-7 * x[1];
        let rb = mismatch(&integrate_branches(opts, grid, x[0] + db, x[1], tol)?);
        let rc = mismatch(&integrate_branches(opts, grid, x[0], x[1] + dc, tol)?);
        let j = [[(rb[0] - r0[0]) / db, (rc[0] - r0[0]) / dc], [(rb[1] - r0[1]) / db, (rc[1] - r0[1]) / dc]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(Error::Numeric("singular matching Jacobian".into()));
        }
        let step_b = (r0[0] * j[1][1] - r0[1] * j[0][1]) / det;
        let step_c = (j[0][0] * r0[1] - j[1][0] * r0[0]) / det;
        x[0] -= step_b;
        x[1] -= step_c;
        if step_b.abs() < 1e-15 * x[0] && step_c.abs() < 1e-15 * x[1] {
            let br = integrate_branches(opts, grid, x[0], x[1], tol)?;
            return Ok(Polished { b: x[0], branches: br });
        }
    }
    let br = integrate_branches(opts, grid, x[0], x[1], tol)?;
    let r = mismatch(&br);
    if r[0].abs().max(r[1].abs()) < 1e-11 {
        Ok(Polished { b: x[0], branches: br })
    } else {
        Err(Error::Numeric(format!("branch matching did not converge (mismatch {r:?})")))
    }
}

struct Assembled {
    profile: GroundStateProfile,
    /// Largest Hermite interpolation error at the half-grid midpoints.
    interp_error: f64,
}

fn assemble(opts: &GroundStateOptions, grid: &HalfGrid, pol: Polished) -> Assembled {
    let b = pol.b;
    let mut knots = vec![0.0];
    let mut values = vec![b];
    let mut derivs = vec![0.0];
    let mut mids: Vec<(f64, State)> = Vec::new();
    for (k, s) in pol.branches.forward.iter().enumerate() {
        let r = grid.inner[k + 1];
        if (k + 1) % 2 == 0 {
            knots.push(r);
            values.push(s[0]);
            derivs.push(s[1]);
        } else {
            mids.push((r, *s));
        }
    }
    // Junction knot: average of the two matched branches.
    let back = &pol.branches.backward;
    let last = values.len() - 1;
    values[last] = 0.5 * (values[last] + back[0][0]);
    derivs[last] = 0.5 * (derivs[last] + back[0][1]);
    for (k, s) in back.iter().enumerate().skip(1) {
        let r = grid.outer[k];
        if k % 2 == 0 {
            knots.push(r);
            values.push(s[0]);
            derivs.push(s[1]);
        } else {
            mids.push((r, *s));
        }
    }

    let tail_coeff = fit_tail(&knots, &values, opts.r_max - opts.tail_window);
    let profile = GroundStateProfile { shoot_param: b, grid: knots, values, derivs, tail_coeff, resolution_error: 0.0 };
    let interp_error = mids.iter().map(|(r, s)| (profile.eval_unchecked(*r).0 - s[0]).abs()).fold(0.0, f64::max);
    Assembled { profile, interp_error }
}

/// Least-squares constant fit of `ln(Q t e^t)` over knots with `t ≥ from`.
fn fit_tail(grid: &[f64], values: &[f64], from: f64) -> f64 {
    let (sum, n) = grid
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= from)
        .fold((0.0, 0usize), |(s, n), (t, q)| (s + (q * t).ln() + t, n + 1));
    (sum / n as f64).exp()
}

fn build(opts: &GroundStateOptions, tol: f64, integrator_tol: f64) -> Result<(Assembled, (f64, f64))> {
    let (lo, hi) = bisect_central_height(opts, tol)?;
    let grid = HalfGrid::new(opts)?;
    let b_mid = 0.5 * (lo + hi);
    let pol = polish(opts, &grid, b_mid, integrator_tol)?;
    if (pol.b - b_mid).abs() > tol.max(1e-11) {
        return Err(Error::Numeric(format!(
            "matched central height {} left the bisection bracket [{lo}, {hi}]",
            pol.b
        )));
    }
    Ok((assemble(opts, &grid, pol), (lo, hi)))
}

/// Computes the ground-state profile with default options.
pub fn compute_ground_state(tol: f64) -> Result<GroundStateProfile> {
    compute_ground_state_with(&GroundStateOptions::default(), tol)
}

/// Bisects to a bracket narrower than `tol`, matches the branches, and
/// estimates the resolution error by rerunning with every tolerance halved
/// and by checking the interpolant at the half-grid midpoints.
pub fn compute_ground_state_with(opts: &GroundStateOptions, tol: f64) -> Result<GroundStateProfile> {
    let (first, _) = build(opts, tol, opts.integrator_tol)?;
    let (second, _) = build(opts, 0.5 * tol, 0.5 * opts.integrator_tol)?;
    let halving =
        first.profile.values.iter().zip(&second.profile.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let mut profile = first.profile;
    profile.resolution_error = halving.max(first.interp_error).max(second.interp_error);
    Ok(profile)
}

impl GroundStateProfile {
    pub fn r_max(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    /// Hermite/tail evaluation without the sign check.
    fn eval_unchecked(&self, t: f64) -> (f64, f64) {
        let r_max = self.r_max();
        if t > r_max {
            let e = self.tail_coeff * (-t).exp() / t;
            return (e, -e * (1.0 + 1.0 / t));
        }
        let i = segment(&self.grid, t);
        hermite(
            self.grid[i],
            self.values[i],
            self.derivs[i],
            self.grid[i + 1],
            self.values[i + 1],
            self.derivs[i + 1],
            t,
        )
    }

    /// `Q''` at knot `i`, from the ground-state equation.
    fn second_deriv(&self, i: usize) -> f64 {
        let q = self.values[i];
        let r = self.grid[i];
        if r == 0.0 {
            (q - q * q * q) / 3.0
        } else {
            -2.0 / r * self.derivs[i] + q - q * q * q
        }
    }

    /// `(Q, Q')` from a quintic Hermite interpolant whose knot data include
    /// `Q''` taken from the equation. Interpolation error is far below the
    /// cubic evaluator's, which matters when `Q` feeds a potential whose
    /// solutions are tracked against exponentially growing modes.
    pub fn q_smooth(&self, t: f64) -> Result<(f64, f64)> {
        if !(t >= 0.0) {
            return Err(Error::InvalidArgument(format!("radius {t} must be nonnegative")));
        }
        if t > self.r_max() {
            return Ok(self.eval_unchecked(t));
        }
        let i = segment(&self.grid, t);
        let knot = |j: usize| [self.values[j], self.derivs[j], self.second_deriv(j)];
        Ok(hermite5(self.grid[i], knot(i), self.grid[i + 1], knot(i + 1), t))
    }

    /// `Q(t)`; cubic Hermite on the grid, tail model beyond it.
    pub fn q(&self, t: f64) -> Result<f64> {
        self.q_and_deriv(t).map(|(v, _)| v)
    }

    pub fn q_and_deriv(&self, t: f64) -> Result<(f64, f64)> {
        if !(t >= 0.0) {
            return Err(Error::InvalidArgument(format!("radius {t} must be nonnegative")));
        }
        Ok(self.eval_unchecked(t))
    }

    /// Invariant violations; empty for a valid profile.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let n = self.grid.len();
        if n < 2 || self.values.len() != n || self.derivs.len() != n {
            out.push("grid, values and derivs must have equal length ≥ 2".into());
            return out;
        }
        if self.grid[0] != 0.0 {
            out.push("grid must start at 0".into());
        }
        if self.grid.windows(2).any(|w| w[1] <= w[0]) {
            out.push("grid not strictly increasing".into());
        }
        if self.values.iter().any(|&v| !(v > 0.0)) {
            out.push("values must be strictly positive".into());
        }
        if self.values.windows(2).any(|w| w[1] >= w[0]) {
            out.push("values must be strictly decreasing".into());
        }
        if self.derivs[0] != 0.0 {
            out.push("derivs[0] must be 0".into());
        }
        if self.derivs[1..].iter().any(|&d| !(d < 0.0)) {
            out.push("derivs must be negative away from the origin".into());
        }
        if !(self.values.iter().copied().fold(f64::MIN, f64::max) < 4.4) {
            out.push("max Q must be below 4.4".into());
        }
        if !(self.tail_coeff > 187.0 / 69.0 && self.tail_coeff < 350.0 / 129.0) {
            out.push(format!("tail coefficient {} outside (187/69, 350/129)", self.tail_coeff));
        }
        out
    }

    /// Sup-norm of `Q'' + (2/r) Q' - Q + Q³` over knots in `[lo, hi]`, with
    /// `Q''` from an eighth-order central difference of the stored
    /// derivatives. Knots whose stencil is not uniform are skipped.
    pub fn residual_sup(&self, lo: f64, hi: f64) -> f64 {
        const W: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
        let g = &self.grid;
        let d = &self.derivs;
        let mut worst: f64 = 0.0;
        for i in 4..g.len().saturating_sub(4) {
            let r = g[i];
            if r < lo || r > hi {
                continue;
            }
            let h = g[i + 1] - r;
            let uniform = (1..=4).all(|k| {
                let k_f = k as f64;
                (g[i + k] - r - k_f * h).abs() < 1e-9 * h && (r - g[i - k] - k_f * h).abs() < 1e-9 * h
            });
            if !uniform {
                continue;
            }
            let second = (1..=4).map(|k| W[k - 1] * (d[i + k] - d[i - k])).sum::<f64>() / h;
            let q = self.values[i];
            let res = second + 2.0 / r * d[i] - q + q * q * q;
            worst = worst.max(res.abs());
        }
        worst
    }

    /// Test hook: multiplies the profile by a constant.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            shoot_param: self.shoot_param * factor,
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
            derivs: self.derivs.iter().map(|v| v * factor).collect(),
            tail_coeff: self.tail_coeff * factor,
            resolution_error: self.resolution_error,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(s)?;
        if p.grid.len() < 2 || p.values.len() != p.grid.len() || p.derivs.len() != p.grid.len() {
            return Err(Error::InvalidArgument("profile arrays have inconsistent lengths".into()));
        }
        Ok(p)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// CSV with header `r,Q,dQ`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "r,Q,dQ")?;
        for ((r, q), d) in self.grid.iter().zip(&self.values).zip(&self.derivs) {
            writeln!(w, "{r},{q},{d}")?;
        }
        Ok(())
    }
}

/// Free-function form of [`GroundStateProfile::q`].
pub fn eval_q(profile: &GroundStateProfile, t: f64) -> Result<f64> {
    profile.q(t)
}
