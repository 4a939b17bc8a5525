mod common;

use nlsgap::radialode::{first_positive_zero, integrate, ConstantPotential, FnPotential};
use nlsgap::sturm::{check_comparison, riccati_gap, InitialCheck};
use nlsgap::Trajectory;
use proptest::prelude::*;

use common::profile;

const TOL: f64 = 1e-10;

fn solve(v: f64, t_end: f64) -> Trajectory {
    integrate(&ConstantPotential(v), (0.0, [0.0, 1.0]), t_end, TOL).unwrap()
}

#[test]
fn sinh_dominates_t() {
    let (big, small) = (solve(1.0, 2.0), solve(0.0, 2.0));
    let c = check_comparison(&ConstantPotential(1.0), &ConstantPotential(0.0), &big, &small, (0.0, 2.0), 1e-2, 1e-8)
        .unwrap();
    assert!(c.pass);
    assert_eq!(c.initial_form, InitialCheck::Direct);
    assert!((c.min_potential_gap - 1.0).abs() < 1e-15);
    assert!(c.min_solution_gap >= -1e-8 && c.min_minorant > 0.0);
    assert!(c.points >= 201);
    let cert = c.to_certificate("example", "plumbing");
    assert!(cert.pass && cert.margin > 0.0);
}

#[test]
fn equality_case_has_zero_margins() {
    let f = solve(0.5, 2.0);
    let c = check_comparison(&ConstantPotential(0.5), &ConstantPotential(0.5), &f, &f, (0.0, 2.0), 1e-2, 1e-8).unwrap();
    assert!(c.pass);
    assert_eq!(c.min_potential_gap, 0.0);
    assert_eq!(c.min_solution_gap, 0.0);
    assert_eq!(riccati_gap(&f, &f, (0.5, 2.0), 1e-2).unwrap(), 0.0);
}

#[test]
fn reversed_pair_fails() {
    let (big, small) = (solve(1.0, 2.0), solve(0.0, 2.0));
    let c = check_comparison(&ConstantPotential(0.0), &ConstantPotential(1.0), &small, &big, (0.0, 2.0), 1e-2, 1e-8)
        .unwrap();
    assert!(!c.pass);
    assert!(c.min_potential_gap < 0.0 && c.min_solution_gap < 0.0);
    assert!(!c.to_certificate("example", "plumbing").pass);
}

#[test]
fn coverage_mismatch_is_an_error() {
    let (a, b) = (solve(1.0, 2.0), solve(0.0, 1.0));
    assert!(check_comparison(&ConstantPotential(1.0), &ConstantPotential(0.0), &a, &b, (0.0, 2.0), 1e-2, 1e-8).is_err());
    assert!(riccati_gap(&a, &b, (0.5, 2.0), 1e-2).is_err());
}

#[test]
fn riccati_examples() {
    let (big, small) = (solve(1.0, 2.0), solve(0.0, 2.0));
    assert!(riccati_gap(&big, &small, (0.5, 2.0), 1e-2).unwrap() > 0.0);
    assert!(riccati_gap(&big, &small, (0.0, 2.0), 1e-2).is_err());
}

#[test]
fn riccati_form_initial_data() {
    // F(a) = f(a) > 0 with F'/F ≥ f'/f at a.
    let big = integrate(&ConstantPotential(1.0), (0.0, [1.0, 1.0]), 2.0, TOL).unwrap();
    let small = integrate(&ConstantPotential(0.0), (0.0, [1.0, 0.5]), 2.0, TOL).unwrap();
    let c = check_comparison(&ConstantPotential(1.0), &ConstantPotential(0.0), &big, &small, (0.0, 2.0), 1e-2, 1e-8)
        .unwrap();
    assert!(c.pass);
}

#[test]
fn shifted_l0_pair() {
    // ε = 0.5 majorant past its first zero against the ε = 0 baseline past its own.
    let p = profile();
    let zero_of = |eps: f64| {
        let v = FnPotential(move |t: f64| {
            let q = p.q_smooth(t).unwrap().0;
            eps - 3.0 * q * q
        });
        let traj = integrate(&v, (0.0, [0.0, -1.0]), 10.0, TOL).unwrap();
        first_positive_zero(&traj, 0.0, TOL).t_star
    };
    let (t_eps, t0) = (zero_of(0.5), zero_of(0.0));
    assert!(t_eps >= t0);
    let major = FnPotential(move |t: f64| {
        let q = p.q_smooth(t + t_eps).unwrap().0;
        0.5 - 3.0 * q * q
    });
    let minor = FnPotential(move |t: f64| {
        let q = p.q_smooth(t + t0).unwrap().0;
        -3.0 * q * q
    });
    let big = integrate(&major, (0.0, [0.0, 1.0]), 15.0, TOL).unwrap();
    let small = integrate(&minor, (0.0, [0.0, 1.0]), 15.0, TOL).unwrap();
    assert!(riccati_gap(&big, &small, (0.05, 15.0), 1e-2).unwrap() >= -1e-8);
    let c = check_comparison(&major, &minor, &big, &small, (0.0, 15.0), 1e-2, 1e-8).unwrap();
    assert!(c.pass);
}

/// Piecewise-linear interpolant through `(knot_k, y_k)` on `[0, 2]`.
fn pl(nodes: &[f64]) -> impl Fn(f64) -> f64 + Clone + '_ {
    move |t: f64| {
        let n = nodes.len() - 1;
        let s = (t / 2.0 * n as f64).clamp(0.0, n as f64);
        let i = (s.floor() as usize).min(n - 1);
        let w = s - i as f64;
        nodes[i] * (1.0 - w) + nodes[i + 1] * w
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]
    #[test]
    fn comparison_holds_for_ordered_potentials(
        minor in prop::collection::vec(-1.0f64..3.0, 6),
        gap in prop::collection::vec(0.0f64..2.0, 6),
        slope in 0.0f64..0.5,
    ) {
        let major: Vec<f64> = minor.iter().zip(&gap).map(|(g, d)| g + d).collect();
        let g_major = FnPotential(pl(&major));
        let g_minor = FnPotential(pl(&minor));
        let big = integrate(&g_major, (0.0, [0.0, 1.0 + slope]), 2.0, TOL).unwrap();
        let small = integrate(&g_minor, (0.0, [0.0, 1.0]), 2.0, TOL).unwrap();
        let c = check_comparison(&g_major, &g_minor, &big, &small, (0.0, 2.0), 1e-2, 1e-8).unwrap();
        prop_assert!(c.pass, "{:?}", c);
        let r = riccati_gap(&big, &small, (0.05, 2.0), 1e-2).unwrap();
        prop_assert!(r >= -100.0 * TOL, "riccati gap {}", r);
    }
}
