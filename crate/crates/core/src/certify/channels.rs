use std::collections::BTreeMap;

use serde_json::{json, Value};

use super::{validate_lambda_grid, VerifyOptions};
use crate::bessel::{mode_verdict, solve_mode, Anchor, BesselMode, ModeVerdict};
use crate::certificate::Certificate;
use crate::error::{Error, Result};
use crate::groundstate::{certify_q_bounds, half_inverse_square_certificate, GroundStateProfile};
use crate::radialode::{
    first_positive_zero, integrate, launch_at_origin, EffectivePotential, FnPotential, Operator, Trajectory,
};
use crate::sturm::check_comparison;

/// Positive indicial exponent of `u'' = u / (2 s²)`, the root of `α(α-1) = 1/2`.
pub const EULER_EXPONENT: f64 = 1.366_025_403_784_438_6;

/// Certificates of one channel plus diagnostics that are not pass/fail.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ChannelOutput {
    pub certificates: Vec<Certificate>,
    pub observations: BTreeMap<String, Value>,
}

impl ChannelOutput {
    fn push(&mut self, c: Certificate) {
        self.certificates.push(c);
    }

    fn observe(&mut self, key: &str, v: impl Into<Value>) {
        self.observations.insert(key.to_string(), v.into());
    }

    pub fn extend(&mut self, other: ChannelOutput) {
        self.certificates.extend(other.certificates);
        self.observations.extend(other.observations);
    }
}

fn bound(profile: &GroundStateProfile, opts: &VerifyOptions, index: usize) -> Certificate {
    certify_q_bounds(profile, &opts.bound_grid).swap_remove(index)
}

const SQUARE_EXP: usize = 1;
const INV_SQ_2: usize = 2;
const INV_SQ_6: usize = 3;
const INV_SQ_1: usize = 4;

/// `l ≥ 2` of `L₊`: `6/t² - 3Q² > 0` everywhere, so the channel potential is
/// positive and admits no decaying solution.
pub fn verify_l_ge_2(profile: &GroundStateProfile, opts: &VerifyOptions) -> Certificate {
    let iii = bound(profile, opts, INV_SQ_2);
    let iv = bound(profile, opts, INV_SQ_6);
    let half = half_inverse_square_certificate(profile, &opts.bound_grid);
    Certificate::new(
        "Lplus.l_ge_2.positive_potential",
        "6/t^2 - 3 Q^2 > 0 on (0, inf): positive potential excludes L2 solutions for l >= 2",
        iii.margin.min(iv.margin),
        iii.pass && iv.pass,
    )
    .with("abs_min_0.2_1.5", iv.meta_f64("abs_min").unwrap_or(f64::NAN))
    .with("rel_margin_inverse_square_2", iii.margin)
    .with("rel_margin_half_inverse_square", half.margin)
    .note("off [0.2, 1.5] the bound 2/t^2 >= 3 Q^2 gives 6/t^2 - 3 Q^2 >= 4/t^2")
}

/// `l ≥ 1` of `L₋`: `2/t² - Q² > 0` everywhere.
pub fn verify_lminus_l_ge_1(profile: &GroundStateProfile, opts: &VerifyOptions) -> Certificate {
    let v = bound(profile, opts, INV_SQ_1);
    Certificate::new(
        "Lminus.l_ge_1.positive_potential",
        "2/t^2 - Q^2 > 0 on (0, inf): positive potential excludes L2 solutions for l >= 1",
        v.margin,
        v.pass,
    )
    .with("relative_form", "1 - t^2 Q^2 / 2")
}

/// Result of comparing a `λ = 0` launch with a known kernel function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelCheck {
    pub max_rel_deviation: f64,
    pub normalization: f64,
    pub zero_found: bool,
}

/// `L₊, l = 1` against `-tQ'`, or `L₋, l = 0` against `tQ`, on `window`.
pub fn kernel_deviation(
    profile: &GroundStateProfile,
    operator: Operator,
    window: (f64, f64),
    tol: f64,
    t_start: f64,
) -> Result<KernelCheck> {
    let (l, oracle): (u32, Box<dyn Fn(f64) -> Result<f64>>) = match operator {
        Operator::Lplus => (1, Box::new(|t| Ok(-t * profile.q_smooth(t)?.1))),
        Operator::Lminus => (0, Box::new(|t| Ok(t * profile.q_smooth(t)?.0))),
    };
    let v = EffectivePotential::new(profile, operator, l, 0.0)?;
    let traj = integrate(&v, launch_at_origin(&v, t_start, 1.0)?, window.1, tol)?;
    let normalization = traj.eval(window.0)?[0] / oracle(window.0)?;
    let mut worst: f64 = 0.0;
    for (t, f) in traj.t.iter().zip(&traj.f) {
        if *t >= window.0 && *t <= window.1 {
            worst = worst.max((f / (normalization * oracle(*t)?) - 1.0).abs());
        }
    }
    let zero = first_positive_zero(&traj, 0.0, 1e-10);
    Ok(KernelCheck { max_rel_deviation: worst, normalization, zero_found: zero.found })
}

fn kernel_certificate(profile: &GroundStateProfile, operator: Operator, opts: &VerifyOptions) -> Result<Certificate> {
    let (id, anchor, oracle) = match operator {
        Operator::Lplus => ("Lplus.l1.kernel", "-Q' solves the l = 1 equation of L+ at lambda = 0", "-t Q'(t)"),
        Operator::Lminus => ("Lminus.l0.kernel", "Q solves the l = 0 equation of L- at lambda = 0", "t Q(t)"),
    };
    let k = kernel_deviation(profile, operator, opts.kernel_window, opts.kernel_tol, opts.l1_t_start)?;
    let mut c = Certificate::new(id, anchor, 1.0 - k.max_rel_deviation / opts.kernel_rel_tol, !k.zero_found)
        .with("oracle", oracle)
        .with("max_rel_deviation", k.max_rel_deviation)
        .with("rel_tol", opts.kernel_rel_tol)
        .with("window_lo", opts.kernel_window.0)
        .with("window_hi", opts.kernel_window.1)
        .with("integrator_tol", opts.kernel_tol)
        .with("zero_in_window", k.zero_found);
    if k.zero_found {
        c = c.fail("kernel launch changed sign inside the window");
    }
    Ok(c)
}

fn l1_trajectory(profile: &GroundStateProfile, lambda: f64, opts: &VerifyOptions) -> Result<Trajectory> {
    let v = EffectivePotential::new(profile, Operator::Lplus, 1, lambda)?;
    integrate(&v, launch_at_origin(&v, opts.l1_t_start, 1.0)?, opts.sweep_end, opts.tol)
}

fn lambda_label(lambda: f64) -> String {
    format!("{lambda:.4}").trim_end_matches('0').trim_end_matches('.').to_string()
}

/// `l = 1` of `L₊`: no zero before 0.2, a zero after 0.2 for every λ in the
/// grid, and growth after the zero for every shift `t₀`.
pub fn verify_l1(profile: &GroundStateProfile, opts: &VerifyOptions) -> Result<ChannelOutput> {
    validate_lambda_grid(&opts.lambda_grid)?;
    let mut out = ChannelOutput::default();
    out.push(kernel_certificate(profile, Operator::Lplus, opts)?);

    let iii = bound(profile, opts, INV_SQ_2);
    let mut lambdas = opts.lambda_grid.clone();
    lambdas.sort_by(f64::total_cmp);
    let mut min_ratio = f64::INFINITY;
    let mut zeros = Vec::with_capacity(lambdas.len());
    let mut per_lambda = Vec::with_capacity(lambdas.len());
    for &lambda in &lambdas {
        let traj = l1_trajectory(profile, lambda, opts)?;
        for (t, f) in traj.t.iter().zip(&traj.f) {
            if *t > 0.0 && *t <= 0.2 {
                min_ratio = min_ratio.min(f / (t * t));
            }
        }
        let z = first_positive_zero(&traj, 0.0, opts.zero_tol);
        let label = lambda_label(lambda);
        let id = format!("Lplus.l1.first_zero_ge_0.2[lambda={label}]");
        let anchor = "the regular l = 1 solution changes sign, first at t0 >= 0.2";
        let c = if z.found {
            zeros.push(json!([lambda, z.t_star]));
            Certificate::new(id, anchor, z.t_star - 0.2, true)
                .with("lambda", lambda)
                .with("t_star", z.t_star)
                .with("bracket_lo", z.bracket.0)
                .with("bracket_hi", z.bracket.1)
                .with("error_estimate", traj.error_estimate)
        } else {
            Certificate::new(id, anchor, f64::NAN, false)
                .with("lambda", lambda)
                .fail(&format!("no sign change on (0, {}]", opts.sweep_end))
        };
        per_lambda.push(c);
    }
    let mut a = Certificate::new(
        "Lplus.l1.no_zero_before_0.2",
        "2/t^2 >= 3 Q^2 on (0, 0.2] makes the l = 1 potential nonnegative there",
        iii.margin.min(min_ratio),
        iii.pass,
    )
    .with("min_F_over_t2", min_ratio)
    .with("bound_margin", iii.margin)
    .with("lambda_count", lambdas.len() as f64);
    if !iii.pass {
        a = a.fail("bound 2/t^2 >= 3 Q^2 not certified");
    }
    out.push(a);
    out.certificates.extend(per_lambda);

    let t_stars: Vec<f64> = zeros.iter().filter_map(|z| z[1].as_f64()).collect();
    let decreasing = t_stars.windows(2).all(|w| w[1] < w[0]);
    out.observe("Lplus.l1.first_zeros", Value::Array(zeros));
    out.observe("Lplus.l1.first_zero_decreasing_in_lambda", decreasing);

    // Growth after the first zero.
    let grid = opts.t0_grid();
    let mut margins = Vec::with_capacity(grid.len());
    let mut all_pass = true;
    let mut worst: Option<Certificate> = None;
    for &t0 in &grid {
        let c = verify_l1_growth(profile, t0, opts)?;
        all_pass &= c.pass;
        margins.push(c.margin);
        if worst.as_ref().is_none_or(|w| c.margin < w.margin) {
            worst = Some(c);
        }
    }
    let (min_margin, lipschitz, covered) = lipschitz_coverage(&grid, &margins);
    let worst = worst.expect("t0 grid is nonempty");
    let mut g = Certificate::new(
        "Lplus.l1.post_zero_growth",
        "after the first zero t0 in [0.2, 1.5] the shifted solution stays positive and grows",
        min_margin,
        all_pass && covered,
    )
    .with("t0_lo", opts.t0_range.0)
    .with("t0_hi", opts.t0_range.1)
    .with("t0_step", opts.t0_grid_step)
    .with("t0_points", grid.len() as f64)
    .with("worst_t0", worst.meta_f64("t0").unwrap_or(f64::NAN))
    .with("worst_min_G_over_t", worst.meta_f64("min_G_over_t").unwrap_or(f64::NAN))
    .with("worst_dG_end", worst.meta_f64("dG_end").unwrap_or(f64::NAN))
    .with("lipschitz_in_t0", lipschitz)
    .with("euler_exponent", EULER_EXPONENT);
    if !covered {
        g = g.fail("t0 grid too coarse for the recorded margin");
    }
    out.push(g);
    out.observe(
        "Lplus.l1.growth_margins",
        Value::Array(grid.iter().zip(&margins).map(|(t, m)| json!([t, m])).collect()),
    );

    out.push(
        Certificate::new(
            "Lplus.l1.growth_t0_ge_1.5",
            "for t0 >= 1.5 the shifted potential 2/(t+t0)^2 - 3 Q(t+t0)^2 is nonnegative",
            iii.margin,
            iii.pass,
        )
        .with("source", iii.id.clone()),
    );
    let half = half_inverse_square_certificate(profile, &opts.bound_grid);
    out.push(
        Certificate::new(
            "Lplus.l1.euler_comparison",
            "2/t^2 - 3 Q^2 >= 0.5/t^2 for t >= 2.5: comparison with an Euler equation of exponent (1+sqrt 3)/2",
            half.margin,
            half.pass,
        )
        .with("euler_exponent", EULER_EXPONENT),
    );
    Ok(out)
}

/// Minimum margin, finite-difference Lipschitz constant in the grid variable,
/// and whether the minimum exceeds `L·h/2` for the largest spacing `h`.
pub fn lipschitz_coverage(grid: &[f64], margins: &[f64]) -> (f64, f64, bool) {
    let min = margins.iter().copied().fold(f64::INFINITY, f64::min);
    let mut lip: f64 = 0.0;
    let mut h_max: f64 = 0.0;
    for i in 1..grid.len().min(margins.len()) {
        let h = grid[i] - grid[i - 1];
        h_max = h_max.max(h);
        lip = lip.max((margins[i] - margins[i - 1]).abs() / h);
    }
    (min, lip, min.is_finite() && min > lip * h_max / 2.0)
}

fn euler_minorant(t0: f64, t_a: f64, g: f64, dg: f64) -> impl Fn(f64) -> (f64, f64) {
    let a = EULER_EXPONENT;
    let b = 1.0 - EULER_EXPONENT;
    let s_a = t_a + t0;
    let coef_a = (dg * s_a - b * g) / (a - b) / s_a.powf(a);
    let coef_b = (a * g - dg * s_a) / (a - b) / s_a.powf(b);
    move |t: f64| {
        let s = t + t0;
        (coef_a * s.powf(a) + coef_b * s.powf(b), coef_a * a * s.powf(a - 1.0) + coef_b * b * s.powf(b - 1.0))
    }
}

/// Growth of `G'' = (2/(t+t₀)² - 3Q(t+t₀)²) G`, `G(0) = 0`, `G'(0) = 1`.
///
/// Passes when `min G/t > growth_min_ratio` on `(0, growth_end]`,
/// `G'(growth_end) > growth_min_slope`, and `G` dominates the Euler minorant
/// with the same data at `growth_end` up to `growth_comparison_end`.
pub fn verify_l1_growth(profile: &GroundStateProfile, t0: f64, opts: &VerifyOptions) -> Result<Certificate> {
    if !(0.2..=1.5).contains(&t0) {
        return Err(Error::InvalidArgument(format!("t0 = {t0} outside [0.2, 1.5]")));
    }
    let v = EffectivePotential::new(profile, Operator::Lplus, 1, 1.0)?.shifted(t0)?.without_constant();
    let traj = integrate(&v, (0.0, [0.0, 1.0]), opts.growth_comparison_end, opts.tol)?;
    let t_end = opts.growth_end;
    let mut min_ratio = f64::INFINITY;
    for (t, f) in traj.t.iter().zip(&traj.f) {
        if *t > 0.0 && *t <= t_end {
            min_ratio = min_ratio.min(f / t);
        }
    }
    let end = traj.eval(t_end)?;
    let margin = (min_ratio - opts.growth_min_ratio).min(end[1] - opts.growth_min_slope);

    let minorant = euler_minorant(t0, t_end, end[0], end[1]);
    let mut ts = vec![t_end];
    ts.extend(traj.t.iter().copied().filter(|t| *t > t_end));
    let (f, df): (Vec<f64>, Vec<f64>) = ts.iter().map(|t| minorant(*t)).unzip();
    let minor = Trajectory::from_parts(ts, f, df)?;
    let euler = FnPotential(move |t: f64| 0.5 / ((t + t0) * (t + t0)));
    let cmp = check_comparison(
        &v,
        &euler,
        &traj,
        &minor,
        (t_end, opts.growth_comparison_end),
        opts.sturm_spacing,
        opts.sturm_slack,
    )?;

    let id = format!("Lplus.l1.growth[t0={}]", lambda_label(t0));
    let mut c = Certificate::new(
        id,
        "G(t) > 0 on (0, 2.5] and G'(2.5) > 0 for the solution shifted to start at its first zero",
        margin,
        cmp.pass,
    )
    .with("t0", t0)
    .with("min_G_over_t", min_ratio)
    .with("dG_end", end[1])
    .with("G_end", end[0])
    .with("euler_exponent", EULER_EXPONENT)
    .with("comparison_min_solution_gap", cmp.min_solution_gap)
    .with("comparison_min_potential_gap", cmp.min_potential_gap);
    if !cmp.pass {
        c = c.fail("Euler comparison past growth_end failed");
    }
    Ok(c)
}

struct L0Channel {
    operator: Operator,
    prefix: &'static str,
    k: f64,
    /// Largest ε included in the sign-change sweep.
    eps_max_inclusive: bool,
}

fn l0_trajectory(profile: &GroundStateProfile, op: Operator, eps: f64, t_end: f64, tol: f64) -> Result<Trajectory> {
    let v = EffectivePotential::new(profile, op, 0, 1.0 - eps)?;
    integrate(&v, launch_at_origin(&v, 0.0, -1.0)?, t_end, tol)
}

fn l0_pipeline(profile: &GroundStateProfile, chan: &L0Channel, opts: &VerifyOptions) -> Result<ChannelOutput> {
    let mut out = ChannelOutput::default();
    let op = chan.operator;
    let pre = chan.prefix;
    let c = op.coupling();
    let base = l0_trajectory(profile, op, 0.0, opts.continuation_end, opts.tol)?;
    let at5 = base.eval(5.0)?;

    if op == Operator::Lplus {
        let (f_ref, df_ref) = opts.checkpoint;
        let dev = (at5[0] - f_ref).abs().max((at5[1] - df_ref).abs());
        out.push(
            Certificate::new(
                format!("{pre}.checkpoint"),
                "baseline F(5) near 0.47 and F'(5) near 0.03",
                opts.checkpoint_slack - dev,
                true,
            )
            .with("F5", at5[0])
            .with("dF5", at5[1])
            .with("F5_ref", f_ref)
            .with("dF5_ref", df_ref)
            .with("slack", opts.checkpoint_slack),
        );
    } else {
        out.observe(&format!("{pre}.H5"), at5[0]);
        out.observe(&format!("{pre}.dH5"), at5[1]);
    }

    let z0 = first_positive_zero(&base, 0.0, opts.zero_tol);
    let t_base = if z0.found && z0.t_star < 5.0 { z0.t_star } else { f64::NAN };
    let mut zc = Certificate::new(
        format!("{pre}.baseline_zero"),
        "the baseline solution launched downward has its first zero in (0, 5)",
        t_base.min(5.0 - t_base),
        z0.found,
    )
    .with("first_zero", if z0.found { z0.t_star } else { f64::NAN });
    if !z0.found {
        zc = zc.fail("baseline has no sign change");
    }
    out.push(zc);

    // Continuation past t = 5 by a Bessel mode.
    let sq = bound(profile, opts, SQUARE_EXP);
    let mode = solve_mode(Anchor { t: 5.0, value: at5[0], deriv: at5[1] }, chan.k)?;
    let verdict = mode_verdict(&mode);
    let lb = mode.lower_bound()?;
    let mut bc = Certificate::new(
        format!("{pre}.bessel_continuation"),
        "past t = 5 the solution dominates a positive growing Bessel mode",
        (-mode.alpha2).min(lb),
        sq.pass && verdict == ModeVerdict::PositiveGrowing,
    )
    .with("alpha1", mode.alpha1)
    .with("alpha2", mode.alpha2)
    .with("k", chan.k)
    .with("lower_bound", lb)
    .with("verdict", format!("{verdict:?}"))
    .with("bound_source", sq.id.clone());
    if verdict != ModeVerdict::PositiveGrowing {
        bc = bc.fail("Bessel mode not positive and growing");
    }
    if !sq.pass {
        bc = bc.fail("bound 3 Q^2 <= e^-2t not certified");
    }
    out.push(bc);
    out.push(mode_comparison(profile, chan, opts, &base, &mode)?);

    // ε-sweep and the reduction of every ε to the baseline.
    let mut zeros = BTreeMap::new();
    let mut min_zero = f64::INFINITY;
    let mut sweep_ok = true;
    let mut ordered = true;
    let mut reduction_margin = f64::INFINITY;
    let mut worst_case = f64::INFINITY;
    for &eps in &opts.epsilon_sweep {
        let included = eps < 1.0 || chan.eps_max_inclusive;
        if !included {
            continue;
        }
        let traj = if eps == 0.0 { base.clone() } else { l0_trajectory(profile, op, eps, opts.sweep_end, opts.tol)? };
        let z = first_positive_zero(&traj, 0.0, opts.zero_tol);
        let key = lambda_label(eps);
        if !z.found {
            zeros.insert(key, Value::Null);
            if eps < 1.0 {
                sweep_ok = false;
            }
            continue;
        }
        zeros.insert(key, json!(z.t_star));
        min_zero = min_zero.min(z.t_star);
        if !z0.found {
            continue;
        }
        if eps > 0.0 && z.t_star < z0.t_star {
            ordered = false;
        }
        let m = reduction_min(profile, c, eps, z.t_star, z0.t_star, opts.continuation_end, opts.sturm_spacing)?;
        if eps == 0.0 {
            worst_case = worst_case.min(m);
        } else {
            reduction_margin = reduction_margin.min(m);
        }
    }
    // Worst case ε = 0, t_ε = t₀ is an identity; evaluated for the record.
    if z0.found {
        worst_case = worst_case.min(reduction_min(
            profile,
            c,
            0.0,
            z0.t_star,
            z0.t_star,
            opts.continuation_end,
            opts.sturm_spacing,
        )?);
    }

    let mut sc = Certificate::new(
        format!("{pre}.sign_change_sweep"),
        "for every swept epsilon below 1 the solution launched downward changes sign",
        min_zero,
        sweep_ok,
    )
    .with("first_zeros", Value::Object(zeros.into_iter().collect()));
    if !sweep_ok {
        sc = sc.fail("a swept epsilon below 1 has no sign change");
    }
    out.push(sc);

    let mut rc = Certificate::new(
        format!("{pre}.baseline_reduction"),
        "eps - c Q(t+t_eps)^2 >= -c Q(t+t0)^2 with t_eps >= t0 reduces every epsilon to the baseline",
        reduction_margin,
        ordered && worst_case >= 0.0,
    )
    .with("coupling", c)
    .with("worst_case_margin", worst_case)
    .with("zeros_ordered", ordered)
    .note("margin excludes the identity case eps = 0");
    if !ordered {
        rc = rc.fail("some t_eps precedes the baseline zero");
    }
    out.push(rc);
    Ok(out)
}

/// `min_t (ε - cQ(t+t_ε)² + cQ(t+t₀)²)` over `[0, t_end]`.
fn reduction_min(
    profile: &GroundStateProfile,
    c: f64,
    eps: f64,
    t_eps: f64,
    t0: f64,
    t_end: f64,
    spacing: f64,
) -> Result<f64> {
    let n = (t_end / spacing).ceil() as usize;
    let mut m = f64::INFINITY;
    for k in 0..=n {
        let t = t_end * k as f64 / n as f64;
        let a = profile.q(t + t_eps)?;
        let b = profile.q(t + t0)?;
        m = m.min(eps - c * a * a + c * b * b);
    }
    Ok(m)
}

fn mode_comparison(
    profile: &GroundStateProfile,
    chan: &L0Channel,
    opts: &VerifyOptions,
    base: &Trajectory,
    mode: &BesselMode,
) -> Result<Certificate> {
    let (a, b) = (5.0, opts.continuation_end);
    let mut ts = vec![a];
    ts.extend(base.t.iter().copied().filter(|t| *t > a && *t < b));
    ts.push(b);
    let mut f = Vec::with_capacity(ts.len());
    let mut df = Vec::with_capacity(ts.len());
    for &t in &ts {
        let (g, dg) = mode.eval(t)?;
        f.push(g);
        df.push(dg);
    }
    let minor = Trajectory::from_parts(ts, f, df)?;
    let v = EffectivePotential::new(profile, chan.operator, 0, 1.0)?;
    let k2 = chan.k * chan.k;
    let bessel_pot = FnPotential(move |t: f64| -k2 * (-2.0 * t).exp());
    let cmp = check_comparison(&v, &bessel_pot, base, &minor, (a, b), opts.sturm_spacing, opts.sturm_slack)?;
    Ok(cmp
        .to_certificate(
            &format!("{}.sturm_dominates_mode", chan.prefix),
            "Sturm comparison: the baseline dominates the Bessel mode on [5, continuation_end]",
        )
        .with("k", chan.k))
}

/// `l = 0` of `L₊`.
pub fn verify_l0_lplus(profile: &GroundStateProfile, opts: &VerifyOptions) -> Result<ChannelOutput> {
    let chan = L0Channel { operator: Operator::Lplus, prefix: "Lplus.l0", k: 1.0, eps_max_inclusive: true };
    let mut out = l0_pipeline(profile, &chan, opts)?;
    let (neg, cert) = find_negative_eigenvalue(profile, opts)?;
    out.observe("Lplus.l0.negative_eigenvalue", neg.epsilon0);
    out.push(cert);
    Ok(out)
}

/// `l = 0` of `L₋`.
pub fn verify_l0_lminus(profile: &GroundStateProfile, opts: &VerifyOptions) -> Result<ChannelOutput> {
    let mut out = ChannelOutput::default();
    out.push(kernel_certificate(profile, Operator::Lminus, opts)?);
    let chan =
        L0Channel { operator: Operator::Lminus, prefix: "Lminus.l0", k: 1.0 / 3f64.sqrt(), eps_max_inclusive: false };
    out.extend(l0_pipeline(profile, &chan, opts)?);

    // Solution started at the baseline zero; its minimum past t = 1 is
    // recorded without a threshold.
    if let Some(tau0) = out
        .certificates
        .iter()
        .find(|c| c.id == "Lminus.l0.baseline_zero")
        .and_then(|c| c.meta_f64("first_zero"))
        .filter(|t| t.is_finite())
    {
        let v = EffectivePotential::new(profile, Operator::Lminus, 0, 1.0)?.shifted(tau0)?.without_constant();
        let p = integrate(&v, (0.0, [0.0, 1.0]), opts.continuation_end, opts.tol)?;
        let min_p = p.t.iter().zip(&p.f).filter(|(t, _)| **t >= 1.0).map(|(_, f)| *f).fold(f64::INFINITY, f64::min);
        out.observe("Lminus.l0.min_p_t_ge_1", min_p);
    }
    Ok(out)
}

/// Negative eigenvalue `-ε₀` of the `l = 0` channel of `L₊`.
#[derive(Debug, Clone, PartialEq)]
pub struct NegativeEigenvalue {
    pub epsilon0: f64,
    pub bracket: (f64, f64),
    /// Fitted decay rate of the eigenfunction against `sqrt(1 + ε₀)`.
    pub decay_rate: f64,
    pub eigenfunction: Trajectory,
}

const EIGEN_HORIZON: f64 = 15.0;

/// True when the solution of `G'' = (1 + ε₀ - 3Q²) G`, `G(0) = 0`,
/// `G'(0) = 1` changes sign before the horizon.
pub fn eigen_trial(profile: &GroundStateProfile, eps0: f64, tol: f64) -> Result<(bool, Trajectory)> {
    let v = FnPotential(|t: f64| {
        let q = profile.q_smooth(t).map(|x| x.0).unwrap_or(f64::NAN);
        1.0 + eps0 - 3.0 * q * q
    });
    let traj = integrate(&v, (0.0, [0.0, 1.0]), EIGEN_HORIZON, tol)?;
    Ok((first_positive_zero(&traj, 0.0, 1e-8).found, traj))
}

/// Bisection on the sign-change dichotomy in `ε₀`, then positivity and
/// decay checks on the eigenfunction.
pub fn find_negative_eigenvalue(
    profile: &GroundStateProfile,
    opts: &VerifyOptions,
) -> Result<(NegativeEigenvalue, Certificate)> {
    let tol = opts.tol;
    let (mut lo, mut hi) = (0.0, 1.0);
    if !eigen_trial(profile, lo, tol)?.0 {
        return Err(Error::Bracket { lo, hi });
    }
    while eigen_trial(profile, hi, tol)?.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 64.0 {
            return Err(Error::Bracket { lo, hi });
        }
    }
    // Run to float exhaustion: the growing mode amplifies the bracket width
    // by e^{2kt} before the decay window.
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if eigen_trial(profile, mid, tol)?.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let eps0 = 0.5 * (lo + hi);
    let (_, traj) = eigen_trial(profile, hi, tol)?;

    // Positivity up to the decay window, and the decay rate on it. The window
    // ends where the residual growing mode would reach ~1e-3 relative size.
    let k = (1.0 + eps0).sqrt();
    let w1 = (15.0 / k).min(6.0);
    let w0 = 0.5 * w1;
    let positive = traj.t.iter().zip(&traj.f).filter(|(t, _)| **t > 0.0 && **t <= w1).all(|(_, f)| *f > 0.0);
    let g0 = traj.eval(w0)?[0];
    let g1 = traj.eval(w1)?[0];
    let rate = -(g1 / g0).ln() / (w1 - w0);
    let expected = k;
    let rate_err = (rate / expected - 1.0).abs();
    let ok = positive && rate_err < 0.05;
    let mut c = Certificate::new(
        "Lplus.l0.negative_eigenvalue",
        "the l = 0 channel of L+ has a negative eigenvalue with a positive decaying eigenfunction",
        eps0,
        ok,
    )
    .with("epsilon0", eps0)
    .with("bracket_lo", lo)
    .with("bracket_hi", hi)
    .with("decay_rate", rate)
    .with("expected_rate", expected)
    .with("decay_window_lo", w0)
    .with("decay_window_hi", w1);
    if !ok {
        c = c.fail("eigenfunction not positive or decay rate off by more than 5%");
    }
    Ok((NegativeEigenvalue { epsilon0: eps0, bracket: (lo, hi), decay_rate: rate, eigenfunction: traj }, c))
}
