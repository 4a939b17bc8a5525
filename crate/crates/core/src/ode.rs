//! Dormand–Prince 5(4) integrator for two-dimensional first-order systems.
//!
//! Every second-order problem in this crate (the ground-state equation and the
//! linear channel equations `u'' = V(t) u`) is integrated as `y = (u, u')`.
//! The driver records every accepted step so that callers can build cubic
//! Hermite dense output from `(u, u')` pairs and scan for sign changes.

use crate::error::{Error, Result};

pub type State = [f64; 2];

/// Decision returned by the per-step observer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Stop,
}

#[derive(Debug, Clone)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    /// Tighter step cap `(lo, hi, h)` applied while `t ∈ [lo, hi]`.
    pub fine_region: Option<(f64, f64, f64)>,
    pub max_steps: usize,
}

impl StepControl {
    pub fn new(tol: f64) -> Self {
        Self { rtol: tol, atol: tol * 1e-6, max_step: 0.5, fine_region: None, max_steps: 2_000_000 }
    }

    pub fn with_max_step(mut self, h: f64) -> Self {
        self.max_step = h;
        self
    }

    pub fn with_fine_region(mut self, lo: f64, hi: f64, h: f64) -> Self {
        self.fine_region = Some((lo, hi, h));
        self
    }

    fn step_cap(&self, t: f64) -> f64 {
        match self.fine_region {
            Some((lo, hi, h)) if t >= lo && t <= hi => h.min(self.max_step),
            _ => self.max_step,
        }
    }
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b*, the embedded fourth-order error weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[inline]
fn axpy(y: &State, h: f64, terms: &[(f64, &State)]) -> State {
    let mut out = *y;
    for (c, k) in terms {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

fn check(t: f64, k: State) -> Result<State> {
    if k[0].is_finite() && k[1].is_finite() {
        Ok(k)
    } else {
        Err(Error::PotentialEvaluation(t))
    }
}

/// One Dormand–Prince step; returns the fifth-order solution, the embedded
/// error vector and the derivative at the new point (FSAL).
fn dp_step<R>(rhs: &mut R, t: f64, y: &State, k1: &State, h: f64) -> Result<(State, State, State)>
where
    R: FnMut(f64, &State) -> Result<State>,
{
    let k2 = check(t, rhs(t + C2 * h, &axpy(y, h, &[(A21, k1)]))?)?;
    let k3 = check(t, rhs(t + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]))?)?;
    let k4 = check(t, rhs(t + C4 * h, &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]))?)?;
    let k5 = check(t, rhs(t + C5 * h, &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]))?)?;
    let k6 = check(t, rhs(t + h, &axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]))?)?;
    let y_new = axpy(y, h, &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = check(t + h, rhs(t + h, &y_new)?)?;
    let mut err = [0.0; 2];
    for i in 0..2 {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    Ok((y_new, err, k7))
}

/// Adaptive integration from `t0` to `t_end` (either direction).
///
/// `stops` are abscissae that must appear exactly among the recorded samples;
/// they must be ordered in the direction of integration. The observer sees each
/// accepted step `(t_prev, y_prev, t, y)` and may end the integration early.
pub fn integrate_adaptive<R, O>(
    mut rhs: R,
    t0: f64,
    y0: State,
    t_end: f64,
    ctl: &StepControl,
    stops: &[f64],
    mut observer: O,
) -> Result<Vec<(f64, State)>>
where
    R: FnMut(f64, &State) -> Result<State>,
    O: FnMut(f64, &State, f64, &State) -> Flow,
{
    if !(ctl.rtol > 0.0) || !(ctl.atol > 0.0) {
        return Err(Error::InvalidArgument("tolerances must be positive".into()));
    }
    if t_end == t0 {
        return Ok(vec![(t0, y0)]);
    }
    let dir = (t_end - t0).signum();
    let mut samples = Vec::with_capacity(1024);
    samples.push((t0, y0));

    let mut t = t0;
    let mut y = y0;
    let mut k1 = check(t, rhs(t, &y)?)?;
    let mut h = ctl.step_cap(t).min(1e-3 * (t_end - t0).abs().max(1e-3));
    let mut stop_idx = stops.iter().position(|&s| dir * (s - t0) > 0.0).unwrap_or(stops.len());
    let mut steps = 0usize;

    while dir * (t_end - t) > 0.0 {
        steps += 1;
        if steps > ctl.max_steps {
            return Err(Error::Numeric(format!("step budget exhausted at t = {t}")));
        }
        h = h.min(ctl.step_cap(t));
        let mut target = t_end;
        while stop_idx < stops.len() && dir * (stops[stop_idx] - t) <= 0.0 {
            stop_idx += 1;
        }
        if stop_idx < stops.len() && dir * (stops[stop_idx] - t_end) < 0.0 {
            target = stops[stop_idx];
        }
        let mut landing = false;
        if h >= (target - t).abs() {
            h = (target - t).abs();
            landing = true;
        }
        if h <= 1e-14 * t.abs().max(1.0) {
            return Err(Error::StepUnderflow { t, h });
        }

        let (y_new, err, k_new) = dp_step(&mut rhs, t, &y, &k1, dir * h)?;
        let mut norm = 0.0;
        for i in 0..2 {
            let sc = ctl.atol + ctl.rtol * y[i].abs().max(y_new[i].abs());
            norm += (err[i] / sc).powi(2);
        }
        let norm = (norm / 2.0).sqrt();

        if norm <= 1.0 {
            let t_new = if landing { target } else { t + dir * h };
            samples.push((t_new, y_new));
            let flow = observer(t, &y, t_new, &y_new);
            t = t_new;
            y = y_new;
            k1 = k_new;
            let factor = if norm == 0.0 { 5.0 } else { (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0) };
            h *= factor;
            if flow == Flow::Stop {
                break;
            }
        } else {
            h *= (0.9 * norm.powf(-0.2)).clamp(0.1, 0.9);
        }
    }
    Ok(samples)
}

/// Fixed-step fifth-order Dormand–Prince integration with `n` equal steps.
/// Used for convergence-order checks.
pub fn integrate_fixed<R>(mut rhs: R, t0: f64, y0: State, t_end: f64, n: usize) -> Result<Vec<(f64, State)>>
where
    R: FnMut(f64, &State) -> Result<State>,
{
    if n == 0 {
        return Err(Error::InvalidArgument("step count must be positive".into()));
    }
    let h = (t_end - t0) / n as f64;
    let mut out = Vec::with_capacity(n + 1);
    let mut y = y0;
    out.push((t0, y));
    let mut k1 = check(t0, rhs(t0, &y)?)?;
    for i in 0..n {
        let t = t0 + h * i as f64;
        let (y_new, _, k_new) = dp_step(&mut rhs, t, &y, &k1, h)?;
        y = y_new;
        k1 = k_new;
        out.push((t0 + h * (i + 1) as f64, y));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oscillator(_t: f64, y: &State) -> Result<State> {
        Ok([y[1], -y[0]])
    }

    #[test]
    fn harmonic_oscillator_quarter_periods() {
        let ctl = StepControl::new(1e-10);
        let s = integrate_adaptive(oscillator, 0.0, [0.0, 1.0], 4.0, &ctl, &[], |_, _, _, _| Flow::Continue).unwrap();
        let (t, y) = *s.last().unwrap();
        assert_eq!(t, 4.0);
        assert!((y[0] - 4f64.sin()).abs() < 1e-9);
        assert!((y[1] - 4f64.cos()).abs() < 1e-9);
    }

    #[test]
    fn stops_are_hit_exactly_and_backward_works() {
        let ctl = StepControl::new(1e-9);
        let stops = [3.0, 2.5, 1.0];
        let s = integrate_adaptive(
            |_t, y: &State| Ok([y[1], y[0]]),
            4.0,
            [(-4f64).exp(), -(-4f64).exp()],
            0.0,
            &ctl,
            &stops,
            |_, _, _, _| Flow::Continue,
        )
        .unwrap();
        for st in stops {
            assert!(s.iter().any(|(t, _)| *t == st));
        }
        let (t, y) = *s.last().unwrap();
        assert_eq!(t, 0.0);
        assert!((y[0] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn observer_can_stop() {
        let ctl = StepControl::new(1e-8).with_max_step(0.05);
        let s = integrate_adaptive(oscillator, 0.0, [0.0, 1.0], 10.0, &ctl, &[], |_, _, _, y| {
            if y[0] < 0.0 {
                Flow::Stop
            } else {
                Flow::Continue
            }
        })
        .unwrap();
        let t = s.last().unwrap().0;
        assert!(t > std::f64::consts::PI && t < std::f64::consts::PI + 0.05 + 1e-12);
    }

    #[test]
    fn non_finite_rhs_is_reported() {
        let ctl = StepControl::new(1e-8);
        let r = integrate_adaptive(
            |t, y: &State| Ok([y[1], if t > 0.5 { f64::NAN } else { 0.0 }]),
            0.0,
            [0.0, 1.0],
            1.0,
            &ctl,
            &[],
            |_, _, _, _| Flow::Continue,
        );
        assert!(matches!(r, Err(Error::PotentialEvaluation(_))));
    }

    #[test]
    fn fixed_step_is_fifth_order() {
        let err = |n| {
            let s = integrate_fixed(oscillator, 0.0, [0.0, 1.0], 4.0, n).unwrap();
            (s.last().unwrap().1[0] - 4f64.sin()).abs()
        };
        let ratio = err(20) / err(40);
        assert!(ratio > 24.0, "ratio {ratio}");
    }
}
