//! Radial channel equations `u'' = V(t) u` of the linearized operators.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groundstate::GroundStateProfile;
use crate::interp::{bisect_root, hermite, hermite5, segment};
use crate::ode::{integrate_adaptive, Flow, State, StepControl};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Operator {
    Lplus,
    Lminus,
}

impl Operator {
    /// Coefficient of `Q²` in the potential: 3 for `L₊`, 1 for `L₋`.
    pub fn coupling(self) -> f64 {
        match self {
            Operator::Lplus => 3.0,
            Operator::Lminus => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Operator::Lplus => "lplus",
            Operator::Lminus => "lminus",
        }
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Operator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lplus" | "l+" => Ok(Operator::Lplus),
            "lminus" | "l-" => Ok(Operator::Lminus),
            _ => Err(Error::InvalidArgument(format!("unknown operator '{s}'"))),
        }
    }
}

/// Anything that can be evaluated as `V(t)` in `u'' = V u`.
pub trait Potential {
    fn eval(&self, t: f64) -> Result<f64>;
}

/// `V(t) = [1 - λ] + l(l+1)/(t+t₀)² - c·Q(t+t₀)²`, with the bracketed term
/// omitted when `drop_constant` is set and `c` the operator coupling.
#[derive(Debug, Clone, Copy)]
pub struct EffectivePotential<'a> {
    pub operator: Operator,
    pub l: u32,
    pub lambda: f64,
    pub shift: f64,
    pub drop_constant: bool,
    pub profile: &'a GroundStateProfile,
}

impl<'a> EffectivePotential<'a> {
    pub fn new(profile: &'a GroundStateProfile, operator: Operator, l: u32, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidArgument(format!("lambda = {lambda} outside [0, 1]")));
        }
        Ok(Self { operator, l, lambda, shift: 0.0, drop_constant: false, profile })
    }

    pub fn shifted(mut self, t0: f64) -> Result<Self> {
        if !(t0 >= 0.0) {
            return Err(Error::InvalidArgument(format!("shift {t0} must be nonnegative")));
        }
        self.shift = t0;
        Ok(self)
    }

    pub fn without_constant(mut self) -> Self {
        self.drop_constant = true;
        self
    }

    fn centrifugal(&self) -> f64 {
        (self.l * (self.l + 1)) as f64
    }
}

impl Potential for EffectivePotential<'_> {
    fn eval(&self, t: f64) -> Result<f64> {
        eval_potential(self, t)
    }
}

/// Evaluates an effective potential. `t = 0` is accepted only where the
/// potential is finite there (`l = 0` or a positive shift).
pub fn eval_potential(v: &EffectivePotential<'_>, t: f64) -> Result<f64> {
    let s = t + v.shift;
    if !(t >= 0.0) || (v.l > 0 && !(s > 0.0)) {
        return Err(Error::InvalidArgument(format!("potential evaluated at t = {t}")));
    }
    let q = v.profile.q_smooth(s)?.0;
    let constant = if v.drop_constant { 0.0 } else { 1.0 - v.lambda };
    let cent = if v.l == 0 { 0.0 } else { v.centrifugal() / (s * s) };
    Ok(constant + cent - v.operator.coupling() * q * q)
}

/// Constant potential, for tests and calibration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantPotential(pub f64);

impl Potential for ConstantPotential {
    fn eval(&self, _t: f64) -> Result<f64> {
        Ok(self.0)
    }
}

/// Wraps a closure as a potential.
pub struct FnPotential<F>(pub F);

impl<F: Fn(f64) -> f64> Potential for FnPotential<F> {
    fn eval(&self, t: f64) -> Result<f64> {
        Ok((self.0)(t))
    }
}

/// Initial point of the regular solution near the origin, scaled by `sigma`.
///
/// For `l = 1` this is the two-term series `t² + c₄t⁴` at `t_start` with
/// `c₄ = (1 - λ - c·Q(0)²)/10`; for `l = 0` the data `(0, σ)` at `t = 0`.
pub fn launch_at_origin(v: &EffectivePotential<'_>, t_start: f64, sigma: f64) -> Result<(f64, State)> {
    if v.drop_constant || v.shift != 0.0 {
        return Err(Error::InvalidArgument("launch requires an unshifted potential with its constant".into()));
    }
    if sigma == 0.0 || !sigma.is_finite() {
        return Err(Error::InvalidArgument("launch sign must be nonzero".into()));
    }
    match v.l {
        0 => Ok((0.0, [0.0, sigma])),
        1 => {
            if !(t_start > 0.0 && t_start <= 0.05) {
                return Err(Error::InvalidArgument(format!("t_start = {t_start} outside (0, 0.05]")));
            }
            let b = v.profile.shoot_param;
            let c4 = (1.0 - v.lambda - v.operator.coupling() * b * b) / 10.0;
            let t = t_start;
            Ok((t, [sigma * (t * t + c4 * t.powi(4)), sigma * (2.0 * t + 4.0 * c4 * t.powi(3))]))
        }
        l => Err(Error::InvalidArgument(format!("l = {l} is never integrated"))),
    }
}

/// Sampled solution of `u'' = V u` with Hermite dense output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub f: Vec<f64>,
    pub df: Vec<f64>,
    /// Sup-norm of the difference against a rerun at half the tolerance,
    /// relative to `max(1, sup |F|)`.
    pub error_estimate: f64,
    pub tol: f64,
}

impl Trajectory {
    fn from_samples(samples: &[(f64, State)], tol: f64) -> Self {
        Self {
            t: samples.iter().map(|s| s.0).collect(),
            f: samples.iter().map(|s| s.1[0]).collect(),
            df: samples.iter().map(|s| s.1[1]).collect(),
            error_estimate: 0.0,
            tol,
        }
    }

    /// Builds a trajectory directly from samples; used for synthetic data.
    pub fn from_parts(t: Vec<f64>, f: Vec<f64>, df: Vec<f64>) -> Result<Self> {
        if t.len() < 2 || f.len() != t.len() || df.len() != t.len() {
            return Err(Error::InvalidArgument("trajectory needs ≥ 2 samples of equal length".into()));
        }
        if t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("sample abscissae must increase".into()));
        }
        Ok(Self { t, f, df, error_estimate: 0.0, tol: 0.0 })
    }

    pub fn start(&self) -> f64 {
        self.t[0]
    }

    pub fn end(&self) -> f64 {
        *self.t.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn covers(&self, lo: f64, hi: f64) -> bool {
        self.start() <= lo && hi <= self.end()
    }

    /// `(F, F')` at `t` by cubic Hermite interpolation.
    pub fn eval(&self, t: f64) -> Result<State> {
        if !(t >= self.start() && t <= self.end()) {
            return Err(Error::InvalidArgument(format!(
                "t = {t} outside trajectory range [{}, {}]",
                self.start(),
                self.end()
            )));
        }
        let i = segment(&self.t, t);
        let (v, d) = hermite(self.t[i], self.f[i], self.df[i], self.t[i + 1], self.f[i + 1], self.df[i + 1], t);
        Ok([v, d])
    }

    /// `(F, F')` at `t` by quintic Hermite interpolation, using `F'' = V F`
    /// at the knots. `v` must be the potential the trajectory solves.
    pub fn eval_along<P: Potential + ?Sized>(&self, v: &P, t: f64) -> Result<State> {
        self.eval(t)?;
        let i = segment(&self.t, t);
        let knot = |j: usize| -> Result<[f64; 3]> { Ok([self.f[j], self.df[j], v.eval(self.t[j])? * self.f[j]]) };
        let (f, d) = hermite5(self.t[i], knot(i)?, self.t[i + 1], knot(i + 1)?, t);
        Ok([f, d])
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,F,dF")?;
        for i in 0..self.len() {
            writeln!(w, "{},{},{}", self.t[i], self.f[i], self.df[i])?;
        }
        Ok(())
    }
}

/// Largest step allowed on `(0, 5]`, so sign changes cannot hide between samples.
pub const NEAR_FIELD_MAX_STEP: f64 = 0.05;

fn solve<P: Potential + ?Sized>(v: &P, init: (f64, State), t_end: f64, tol: f64) -> Result<Vec<(f64, State)>> {
    let ctl = StepControl::new(tol).with_fine_region(0.0, 5.0, NEAR_FIELD_MAX_STEP);
    let rhs = |t: f64, y: &State| -> Result<State> {
        let p = v.eval(t).map_err(|_| Error::PotentialEvaluation(t))?;
        Ok([y[1], p * y[0]])
    };
    integrate_adaptive(rhs, init.0, init.1, t_end, &ctl, &[], |_, _, _, _| Flow::Continue)
}

/// Integrates `u'' = V u` from `init = (t, F, F')` to `t_end` and attaches a
/// tolerance-halving error estimate.
pub fn integrate<P: Potential + ?Sized>(v: &P, init: (f64, State), t_end: f64, tol: f64) -> Result<Trajectory> {
    if !(init.0 < t_end) {
        return Err(Error::InvalidArgument(format!("t_end = {t_end} must exceed start {}", init.0)));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {tol} must be positive")));
    }
    let samples = solve(v, init, t_end, tol)?;
    let mut traj = Trajectory::from_samples(&samples, tol);
    let fine = Trajectory::from_samples(&solve(v, init, t_end, 0.5 * tol)?, 0.5 * tol);
    let scale = traj.f.iter().fold(1.0f64, |m, f| m.max(f.abs()));
    let mut err: f64 = 0.0;
    for (t, s) in &samples {
        err = err.max((fine.eval(*t)?[0] - s[0]).abs());
    }
    traj.error_estimate = err / scale;
    Ok(traj)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroReport {
    pub found: bool,
    pub bracket: (f64, f64),
    pub t_star: f64,
    pub tol: f64,
}

/// First sign change of `F` strictly after `after`, refined by bisection on
/// the dense output to a bracket of width ≤ `tol`.
pub fn first_positive_zero(traj: &Trajectory, after: f64, tol: f64) -> ZeroReport {
    let none = ZeroReport { found: false, bracket: (f64::NAN, f64::NAN), t_star: f64::NAN, tol };
    let lo_t = after.max(traj.start());
    let Ok(start) = traj.eval(lo_t) else {
        return none;
    };
    let mut prev = (lo_t, start[0]);
    let first = traj.t.partition_point(|&t| t <= lo_t);
    for i in first..traj.len() {
        let cur = (traj.t[i], traj.f[i]);
        if cur.1 == 0.0 {
            if prev.1 != 0.0 {
                return ZeroReport { found: true, bracket: (prev.0, cur.0), t_star: cur.0, tol };
            }
        } else if prev.1 != 0.0 && (prev.1 < 0.0) != (cur.1 < 0.0) {
            let (lo, hi) = bisect_root(prev.0, cur.0, tol, |t| traj.eval(t).map(|s| s[0]).unwrap_or(f64::NAN));
            return ZeroReport { found: true, bracket: (lo, hi), t_star: 0.5 * (lo + hi), tol };
        }
        prev = cur;
    }
    none
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticFit {
    pub c1: f64,
    pub c2: f64,
    /// `sup |F - c₁t² - c₂/t| / sup |F|` over the window.
    pub residual: f64,
}

/// Least-squares fit of `F ≈ c₁t² + c₂/t` over the samples in `window`.
pub fn fit_asymptotics(traj: &Trajectory, window: (f64, f64)) -> Result<AsymptoticFit> {
    let (a, b) = window;
    let pts: Vec<(f64, f64)> =
        traj.t.iter().zip(&traj.f).filter(|(t, _)| **t >= a && **t <= b).map(|(t, f)| (*t, *f)).collect();
    if pts.len() < 5 {
        return Err(Error::InvalidArgument(format!("window [{a}, {b}] holds {} samples, need at least 5", pts.len())));
    }
    // Columns are normalized before forming the normal equations.
    let n1 = pts.iter().map(|(t, _)| t.powi(4)).sum::<f64>().sqrt();
    let n2 = pts.iter().map(|(t, _)| t.powi(-2)).sum::<f64>().sqrt();
    let (mut a11, mut a12, mut a22, mut r1, mut r2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(t, f) in &pts {
        let x1 = t * t / n1;
        let x2 = 1.0 / (t * n2);
        a11 += x1 * x1;
        a12 += x1 * x2;
        a22 += x2 * x2;
        r1 += x1 * f;
        r2 += x2 * f;
    }
    let det = a11 * a22 - a12 * a12;
    if !(det.abs() > 1e-14) {
        return Err(Error::Numeric("degenerate asymptotic fit".into()));
    }
    let c1 = (r1 * a22 - r2 * a12) / det / n1;
    let c2 = (a11 * r2 - a12 * r1) / det / n2;
    let scale = pts.iter().fold(0.0f64, |m, p| m.max(p.1.abs()));
    let dev = pts.iter().fold(0.0f64, |m, &(t, f)| m.max((f - c1 * t * t - c2 / t).abs()));
    Ok(AsymptoticFit { c1, c2, residual: if scale > 0.0 { dev / scale } else { dev } })
}

/// Largest normalized drift of the Wronskian `F₁F₂' - F₂F₁'` over the common
/// range, measured at the samples of `a`:
/// `|W(t) - W(t_first)| / (|F₁F₂'| + |F₂F₁'|)`. Both trajectories must solve
/// `u'' = V u` for the given `v`, which supplies the interpolant for `b`.
pub fn wronskian_drift<P: Potential + ?Sized>(v: &P, a: &Trajectory, b: &Trajectory) -> Result<f64> {
    let lo = a.start().max(b.start());
    let hi = a.end().min(b.end());
    if !(hi > lo) {
        return Err(Error::InvalidArgument("trajectories share no range".into()));
    }
    let mut w0: Option<f64> = None;
    let mut worst: f64 = 0.0;
    for i in 0..a.len() {
        let t = a.t[i];
        if t < lo || t > hi {
            continue;
        }
        let s = b.eval_along(v, t)?;
        let p = a.f[i] * s[1];
        let q = s[0] * a.df[i];
        let w = p - q;
        let scale = p.abs() + q.abs();
        match w0 {
            None => w0 = Some(w),
            Some(w0) if scale > 0.0 => worst = worst.max((w - w0).abs() / scale),
            _ => {}
        }
    }
    Ok(worst)
}
