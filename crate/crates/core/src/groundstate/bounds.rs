//! Pointwise inequalities on `Q` checked on a dense grid, with the region
//! beyond the last knot closed by the `c e^{-t}/t` tail model.

use serde::{Deserialize, Serialize};

use super::GroundStateProfile;
use crate::certificate::Certificate;

/// Sampling policy for the bound checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundGrid {
    pub fine_step: f64,
    /// Fine spacing is used below this radius.
    pub fine_end: f64,
    pub coarse_step: f64,
    /// Each adjacent pair must satisfy `min(m_i, m_{i+1}) > coverage · |m_{i+1} - m_i|`.
    pub coverage: f64,
}

impl Default for BoundGrid {
    fn default() -> Self {
        Self { fine_step: 1e-4, fine_end: 2.5, coarse_step: 1e-3, coverage: 20.0 }
    }
}

impl BoundGrid {
    /// Points in `[lo, hi]`; `lo` itself is skipped when `open_lo`.
    fn points(&self, lo: f64, hi: f64, open_lo: bool) -> Vec<f64> {
        fn run(out: &mut Vec<f64>, a: f64, b: f64, h: f64, skip_first: bool) {
            if b <= a {
                return;
            }
            let n = ((b - a) / h).ceil().max(1.0) as usize;
            for k in usize::from(skip_first)..=n {
                out.push(a + (b - a) * k as f64 / n as f64);
            }
        }
        let mut out = Vec::new();
        let split = self.fine_end.clamp(lo, hi);
        run(&mut out, lo, split, self.fine_step, open_lo);
        let skip = !out.is_empty() || open_lo;
        run(&mut out, split, hi, self.coarse_step, skip);
        out
    }
}

struct Scan {
    min: f64,
    argmin: f64,
    /// Smallest ratio `min(m_i, m_{i+1}) / |m_{i+1} - m_i|` over adjacent pairs.
    coverage_ratio: f64,
}

fn scan(points: &[f64], mut m: impl FnMut(f64) -> f64) -> Scan {
    let mut min = f64::INFINITY;
    let mut argmin = f64::NAN;
    let mut ratio = f64::INFINITY;
    let mut prev: Option<f64> = None;
    for &t in points {
        let v = m(t);
        if !(v >= min) {
            min = v;
            argmin = t;
        }
        if let Some(p) = prev {
            let d = (v - p).abs();
            let r = if d == 0.0 { f64::INFINITY } else { v.min(p) / d };
            if !(r >= ratio) {
                ratio = r;
            }
        }
        prev = Some(v);
    }
    Scan { min, argmin, coverage_ratio: ratio }
}

fn q2(p: &GroundStateProfile, t: f64) -> f64 {
    let q = p.eval_unchecked(t).0;
    q * q
}

struct Bound<'a> {
    id: &'a str,
    anchor: &'a str,
    /// Sampled pieces `(lo, hi, open_lo)`.
    pieces: Vec<(f64, f64, bool)>,
    margin: Box<dyn Fn(f64) -> f64 + 'a>,
    /// Infimum of the margin over `[R_max, ∞)` under the tail model, when the
    /// claim extends to infinity.
    tail: Option<f64>,
}

fn certify(grid: &BoundGrid, b: Bound<'_>) -> (Certificate, Vec<Scan>) {
    let scans: Vec<Scan> = b.pieces.iter().map(|&(lo, hi, open)| scan(&grid.points(lo, hi, open), &b.margin)).collect();
    let mut min = f64::INFINITY;
    let mut argmin = f64::NAN;
    let mut ratio = f64::INFINITY;
    for s in &scans {
        if !(s.min >= min) {
            min = s.min;
            argmin = s.argmin;
        }
        ratio = ratio.min(s.coverage_ratio);
    }
    let tail = b.tail.unwrap_or(f64::INFINITY);
    let margin = min.min(tail);
    let covered = ratio > grid.coverage;
    let mut c = Certificate::new(b.id, b.anchor, margin, covered)
        .with("grid_min", min)
        .with("argmin", argmin)
        .with("fine_step", grid.fine_step)
        .with("coarse_step", grid.coarse_step)
        .with("coverage_ratio", ratio);
    if let Some(t) = b.tail {
        c.insert("tail_closure", t);
    }
    if !covered {
        c = c.fail("grid spacing too coarse for the recorded margin");
    }
    (c, scans)
}

/// The five pointwise bounds on `Q`, in the order:
/// tail upper bound, squared exponential bound, `2/t²` bound, `6/t²` bound on
/// `[0.2, 1.5]`, and `2/t² > Q²`.
pub fn certify_q_bounds(profile: &GroundStateProfile, grid: &BoundGrid) -> Vec<Certificate> {
    let p = profile;
    let r_max = p.r_max();
    let c = p.tail_coeff;
    let mut out = Vec::with_capacity(5);

    out.push(
        certify(
            grid,
            Bound {
                id: "Q.tail_upper_2.714",
                anchor: "Q(t) <= 2.714 e^-t / t for t >= 2.5",
                pieces: vec![(2.5, r_max, false)],
                margin: Box::new(|t| 1.0 - p.eval_unchecked(t).0 * t * t.exp() / 2.714),
                tail: Some(1.0 - c / 2.714),
            },
        )
        .0
        .note("relative margin 1 - Q t e^t / 2.714"),
    );

    out.push(
        certify(
            grid,
            Bound {
                id: "Q.three_q2_le_exp",
                anchor: "3 Q(t)^2 <= e^-2t for t >= 5",
                pieces: vec![(5.0, r_max, false)],
                margin: Box::new(|t| 1.0 - 3.0 * q2(p, t) * (2.0 * t).exp()),
                tail: Some(1.0 - 3.0 * c * c / (r_max * r_max)),
            },
        )
        .0
        .note("relative margin 1 - 3 Q^2 e^2t"),
    );

    let rel_iii = |t: f64| 1.0 - 1.5 * t * t * q2(p, t);
    let (mut iii, _) = certify(
        grid,
        Bound {
            id: "Q.inverse_square_2",
            anchor: "2/t^2 >= 3 Q(t)^2 for 0 < t <= 0.2 and t >= 1.5",
            pieces: vec![(0.0, 0.2, true), (1.5, r_max, false)],
            margin: Box::new(rel_iii),
            tail: Some(1.0 - 1.5 * c * c * (-2.0 * r_max).exp()),
        },
    );
    let abs = |t: f64| 2.0 / (t * t) - 3.0 * q2(p, t);
    iii.insert("abs_min_0_0.2", scan(&grid.points(0.0, 0.2, true), abs).min);
    iii.insert("abs_min_1.5_2.5", scan(&grid.points(1.5, 2.5, false), abs).min);
    out.push(iii.note("relative margin 1 - 1.5 t^2 Q^2"));

    let (iv, scans) = certify(
        grid,
        Bound {
            id: "Q.inverse_square_6_gt_2",
            anchor: "6/t^2 - 3 Q(t)^2 > 2 for 0.2 <= t <= 1.5",
            pieces: vec![(0.2, 1.5, false)],
            margin: Box::new(|t| 6.0 / (t * t) - 3.0 * q2(p, t) - 2.0),
            tail: None,
        },
    );
    let abs_min = scans[0].min + 2.0;
    out.push(iv.with("abs_min", abs_min).note("absolute margin (6/t^2 - 3 Q^2) - 2"));

    out.push(
        certify(
            grid,
            Bound {
                id: "Q.inverse_square_1",
                anchor: "2/t^2 > Q(t)^2 for t > 0",
                pieces: vec![(0.0, r_max, true)],
                margin: Box::new(|t| 1.0 - 0.5 * t * t * q2(p, t)),
                tail: Some(1.0 - 0.5 * c * c * (-2.0 * r_max).exp()),
            },
        )
        .0
        .note("relative margin 1 - t^2 Q^2 / 2"),
    );
    out
}

/// `2/t² - 3Q² > 0.5/t²` on `[2.5, ∞)`, the comparison hypothesis for growth
/// past 2.5 in the `l = 1` channel.
pub fn half_inverse_square_certificate(profile: &GroundStateProfile, grid: &BoundGrid) -> Certificate {
    let p = profile;
    let r_max = p.r_max();
    let c = p.tail_coeff;
    certify(
        grid,
        Bound {
            id: "Q.inverse_square_half",
            anchor: "2/t^2 - 3 Q(t)^2 > 0.5/t^2 for t >= 2.5",
            pieces: vec![(2.5, r_max, false)],
            margin: Box::new(|t| 1.0 - 2.0 * t * t * q2(p, t)),
            tail: Some(1.0 - 2.0 * c * c * (-2.0 * r_max).exp()),
        },
    )
    .0
    .note("relative margin 1 - 2 t^2 Q^2")
}
