#![allow(dead_code)]

use std::sync::OnceLock;

use nlsgap::{compute_ground_state, GroundStateProfile};

/// Default profile at bisection width 1e-10, built once per test binary.
pub fn profile() -> &'static GroundStateProfile {
    static P: OnceLock<GroundStateProfile> = OnceLock::new();
    P.get_or_init(|| compute_ground_state(1e-10).expect("ground state"))
}

/// Classical fixed-step RK4 on `(y, y')` for `y'' = f(t, y, y')`.
pub fn rk4<F: Fn(f64, f64, f64) -> f64>(f: F, t0: f64, y: [f64; 2], h: f64, n: usize) -> Vec<(f64, [f64; 2])> {
    let rhs = |t: f64, s: [f64; 2]| [s[1], f(t, s[0], s[1])];
    let mut out = Vec::with_capacity(n + 1);
    let mut s = y;
    out.push((t0, s));
    for i in 0..n {
        let t = t0 + h * i as f64;
        let k1 = rhs(t, s);
        let k2 = rhs(t + h / 2.0, [s[0] + h / 2.0 * k1[0], s[1] + h / 2.0 * k1[1]]);
        let k3 = rhs(t + h / 2.0, [s[0] + h / 2.0 * k2[0], s[1] + h / 2.0 * k2[1]]);
        let k4 = rhs(t + h, [s[0] + h * k3[0], s[1] + h * k3[1]]);
        for j in 0..2 {
            s[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        out.push((t0 + h * (i + 1) as f64, s));
    }
    out
}
