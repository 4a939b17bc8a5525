mod common;

use std::f64::consts::PI;

use nlsgap::ode::integrate_fixed;
use nlsgap::radialode::{
    eval_potential, first_positive_zero, fit_asymptotics, integrate, launch_at_origin, wronskian_drift,
    ConstantPotential, FnPotential,
};
use nlsgap::{EffectivePotential, Operator, Potential, Trajectory};

use common::profile;

const TOL: f64 = 1e-10;

fn oscillator(v: f64, t_end: f64) -> Trajectory {
    integrate(&ConstantPotential(v), (0.0, [0.0, 1.0]), t_end, TOL).unwrap()
}

fn max_dev(traj: &Trajectory, exact: impl Fn(f64) -> f64) -> f64 {
    traj.t.iter().zip(&traj.f).map(|(t, f)| (f - exact(*t)).abs()).fold(0.0, f64::max)
}

#[test]
fn constant_potential_hooks() {
    let s = oscillator(-1.0, 4.0);
    assert!(max_dev(&s, f64::sin) < 10.0 * TOL, "sin dev {}", max_dev(&s, f64::sin));
    let z = first_positive_zero(&s, 0.0, TOL);
    assert!(z.found && (z.t_star - PI).abs() <= TOL, "zero {}", z.t_star);
    assert!(z.bracket.0 < z.t_star && z.t_star < z.bracket.1 && z.bracket.1 - z.bracket.0 <= TOL);
    let lo = s.eval(z.bracket.0).unwrap()[0];
    let hi = s.eval(z.bracket.1).unwrap()[0];
    assert!(lo * hi < 0.0);
    assert!(s.eval(z.t_star).unwrap()[0].abs() <= 1.0 * TOL);

    let free = oscillator(0.0, 1.0);
    assert!(max_dev(&free, |t| t) < 10.0 * TOL);
    let sh = oscillator(1.0, 2.0);
    assert!(max_dev(&sh, f64::sinh) < 10.0 * TOL * 2f64.sinh());
    assert!(!first_positive_zero(&sh, 0.0, TOL).found);
}

#[test]
fn dense_output_reproduces_knots() {
    let s = oscillator(-1.0, 4.0);
    for i in (0..s.len()).step_by(7) {
        let e = s.eval(s.t[i]).unwrap();
        assert_eq!(e[0], s.f[i]);
        assert_eq!(e[1], s.df[i]);
    }
    assert!(s.t.windows(2).all(|w| w[1] > w[0]));
    assert!(s.eval(4.5).is_err());
}

#[test]
fn error_estimate_is_recorded() {
    let s = oscillator(-1.0, 4.0);
    assert!(s.error_estimate > 0.0 && s.error_estimate < 1e-8, "{}", s.error_estimate);
    assert_eq!(s.tol, TOL);
}

#[test]
fn integrator_order_under_step_halving() {
    let err = |n: usize| {
        let path = integrate_fixed(|_, y| Ok([y[1], -y[0]]), 0.0, [0.0, 1.0], 4.0, n).unwrap();
        (path.last().unwrap().1[0] - 4f64.sin()).abs()
    };
    for n in [20, 40, 80] {
        let ratio = err(n) / err(2 * n);
        assert!(ratio >= 8.0, "n = {n}: ratio {ratio}");
    }
}

#[test]
fn potential_examples() {
    let p = profile();
    let v = EffectivePotential::new(p, Operator::Lplus, 1, 1.0).unwrap();
    for t in [0.05, 0.5, 1.0, 3.0] {
        let q = p.q_smooth(t).unwrap().0;
        assert!((eval_potential(&v, t).unwrap() - (2.0 / (t * t) - 3.0 * q * q)).abs() < 1e-12);
    }
    let v0 = EffectivePotential::new(p, Operator::Lplus, 0, 0.0).unwrap();
    assert!((eval_potential(&v0, 40.0).unwrap() - 1.0).abs() < 1e-12);
    let vs = EffectivePotential::new(p, Operator::Lplus, 1, 0.3).unwrap().shifted(0.2).unwrap().without_constant();
    let q = p.q_smooth(1.2).unwrap().0;
    assert!((eval_potential(&vs, 1.0).unwrap() - (2.0 / 1.44 - 3.0 * q * q)).abs() < 1e-12);
    let vm = EffectivePotential::new(p, Operator::Lminus, 2, 0.5).unwrap();
    let q = p.q_smooth(0.7).unwrap().0;
    assert!((eval_potential(&vm, 0.7).unwrap() - (0.5 + 6.0 / 0.49 - q * q)).abs() < 1e-12);
    assert!(eval_potential(&v, 0.0).is_err());
    assert!(eval_potential(&v, -1.0).is_err());
    assert!(EffectivePotential::new(p, Operator::Lplus, 1, 1.5).is_err());
}

#[test]
fn launch_examples() {
    let p = profile();
    let v = EffectivePotential::new(p, Operator::Lplus, 1, 1.0).unwrap();
    let (t, s) = launch_at_origin(&v, 1e-3, 1.0).unwrap();
    assert_eq!(t, 1e-3);
    let b = p.shoot_param;
    assert!((s[0] / 1e-6 - 1.0).abs() < 3.0 * b * b * 1e-6);
    assert!(s[0] < 1e-6);
    let v0 = EffectivePotential::new(p, Operator::Lplus, 0, 1.0).unwrap();
    assert_eq!(launch_at_origin(&v0, 1e-3, -1.0).unwrap(), (0.0, [0.0, -1.0]));
    let v2 = EffectivePotential::new(p, Operator::Lplus, 2, 1.0).unwrap();
    assert!(launch_at_origin(&v2, 1e-3, 1.0).is_err());
    assert!(launch_at_origin(&v, 0.1, 1.0).is_err());
    let shifted = EffectivePotential::new(p, Operator::Lplus, 1, 1.0).unwrap().shifted(0.2).unwrap();
    assert!(launch_at_origin(&shifted, 1e-3, 1.0).is_err());
}

#[test]
fn kernel_launches_track_profile() {
    let p = profile();
    // L₊, l = 1 against -tQ'.
    let v = EffectivePotential::new(p, Operator::Lplus, 1, 0.0).unwrap();
    let traj = integrate(&v, launch_at_origin(&v, 1e-3, 1.0).unwrap(), 10.0, 1e-13).unwrap();
    let oracle = |t: f64| -t * p.q_smooth(t).unwrap().1;
    let c = traj.eval(0.1).unwrap()[0] / oracle(0.1);
    let dev = traj
        .t
        .iter()
        .zip(&traj.f)
        .filter(|(t, _)| **t >= 0.1)
        .map(|(t, f)| (f / (c * oracle(*t)) - 1.0).abs())
        .fold(0.0, f64::max);
    assert!(dev < 1e-5, "l = 1 kernel deviation {dev}");
    assert!(!first_positive_zero(&traj, 0.0, TOL).found);

    // L₋, l = 0 against tQ.
    let v = EffectivePotential::new(p, Operator::Lminus, 0, 0.0).unwrap();
    let traj = integrate(&v, (0.0, [0.0, 1.0]), 10.0, 1e-13).unwrap();
    let oracle = |t: f64| t * p.q_smooth(t).unwrap().0;
    let c = traj.eval(0.1).unwrap()[0] / oracle(0.1);
    let dev = traj
        .t
        .iter()
        .zip(&traj.f)
        .filter(|(t, _)| **t >= 0.1)
        .map(|(t, f)| (f / (c * oracle(*t)) - 1.0).abs())
        .fold(0.0, f64::max);
    assert!(dev < 1e-5, "L- l = 0 kernel deviation {dev}");
}

#[test]
fn baseline_l0_changes_sign_before_5() {
    let p = profile();
    let v = EffectivePotential::new(p, Operator::Lplus, 0, 1.0).unwrap();
    let traj = integrate(&v, launch_at_origin(&v, 1e-3, -1.0).unwrap(), 5.0, TOL).unwrap();
    let z = first_positive_zero(&traj, 0.0, TOL);
    assert!(z.found && z.t_star < 5.0);
    let scale = traj.f.iter().fold(0.0f64, |m, f| m.max(f.abs()));
    assert!(traj.eval(z.t_star).unwrap()[0].abs() <= scale * TOL);
}

#[test]
fn near_field_steps_are_capped() {
    let p = profile();
    let v = EffectivePotential::new(p, Operator::Lplus, 1, 0.5).unwrap();
    let traj = integrate(&v, launch_at_origin(&v, 1e-3, 1.0).unwrap(), 30.0, TOL).unwrap();
    for w in traj.t.windows(2) {
        if w[1] <= 5.0 {
            assert!(w[1] - w[0] <= 0.05 + 1e-12);
        }
    }
}

#[test]
fn asymptotic_fit() {
    let t: Vec<f64> = (0..200).map(|k| 5.0 + 0.1 * k as f64).collect();
    let f: Vec<f64> = t.iter().map(|t| 3.0 * t * t + 0.5 / t).collect();
    let df: Vec<f64> = t.iter().map(|t| 6.0 * t - 0.5 / (t * t)).collect();
    let synth = Trajectory::from_parts(t, f, df).unwrap();
    let fit = fit_asymptotics(&synth, (5.0, 24.0)).unwrap();
    assert!((fit.c1 - 3.0).abs() < 1e-10 && (fit.c2 - 0.5).abs() < 1e-8 && fit.residual < 1e-12);
    assert!(fit_asymptotics(&synth, (5.0, 5.3)).is_err());

    let p = profile();
    let v = EffectivePotential::new(p, Operator::Lplus, 1, 1.0).unwrap();
    let traj = integrate(&v, launch_at_origin(&v, 1e-3, 1.0).unwrap(), 20.0, TOL).unwrap();
    let near = fit_asymptotics(&traj, (10.0, 15.0)).unwrap();
    let far = fit_asymptotics(&traj, (15.0, 20.0)).unwrap();
    assert!(near.c1.abs() > 1e-3, "c1 = {}", near.c1);
    assert!(far.residual < near.residual, "{} vs {}", far.residual, near.residual);
}

fn pipeline_pairs() -> Vec<(String, Box<dyn Potential + 'static>, Trajectory, Trajectory)> {
    let p = profile();
    let mut out: Vec<(String, Box<dyn Potential>, Trajectory, Trajectory)> = Vec::new();
    for lambda in [0.01, 0.1, 0.5, 1.0] {
        let v = EffectivePotential::new(p, Operator::Lplus, 1, lambda).unwrap();
        let a = integrate(&v, launch_at_origin(&v, 1e-3, 1.0).unwrap(), 20.0, TOL).unwrap();
        let b = integrate(&v, (0.1, [1.0, 0.0]), 20.0, TOL).unwrap();
        out.push((format!("lplus l1 lambda {lambda}"), Box::new(v), a, b));
    }
    for (op, lambda) in
        [(Operator::Lplus, 1.0), (Operator::Lplus, 0.5), (Operator::Lminus, 1.0), (Operator::Lminus, 0.25)]
    {
        let v = EffectivePotential::new(p, op, 0, lambda).unwrap();
        let a = integrate(&v, (0.0, [0.0, -1.0]), 20.0, TOL).unwrap();
        let b = integrate(&v, (0.0, [1.0, 0.0]), 20.0, TOL).unwrap();
        out.push((format!("{op} l0 lambda {lambda}"), Box::new(v), a, b));
    }
    let shifted = FnPotential(move |t: f64| {
        let s = t + 0.2;
        let q = p.q_smooth(s).unwrap().0;
        2.0 / (s * s) - 3.0 * q * q
    });
    let a = integrate(&shifted, (0.0, [0.0, 1.0]), 10.0, TOL).unwrap();
    let b = integrate(&shifted, (0.0, [1.0, 0.0]), 10.0, TOL).unwrap();
    out.push(("lplus l1 growth t0 0.2".into(), Box::new(shifted), a, b));
    out
}

#[test]
fn wronskian_is_conserved() {
    for (name, v, a, b) in pipeline_pairs() {
        let drift = wronskian_drift(v.as_ref(), &a, &b).unwrap();
        assert!(drift <= 100.0 * TOL, "{name}: drift {drift}");
    }
}

#[test]
fn trajectory_csv() {
    let s = oscillator(-1.0, 1.0);
    let mut buf = Vec::new();
    s.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("t,F,dF\n"));
    assert_eq!(text.lines().count(), s.len() + 1);
}
