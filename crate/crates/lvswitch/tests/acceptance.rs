//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured numbers (run with `--nocapture` to see them).
//!
//! Criteria 1-6 and 9 are deterministic formula checks; 7 and 8 are
//! finite-horizon statistical checks with fixed seeds and stated tolerances.
//!
//! Note on the simulation operating points: they are stated in the scan
//! variable `w` of the interval quadratic (the natural axis for these
//! fixtures), and the mixing weight is its remap `s = w / (5(1-w) + w)`
//! for the standard fixture's growth rates (e.g. `w = 0.4 -> s = 2/17`,
//! `w = 0.75 -> s = 3/8`).

use lvswitch::boundary::{boundary_measure, Face};
use lvswitch::envmodel::{Environment, EnvironmentPair, Species, SwitchRates};
use lvswitch::invasion::{
    classify_outcome, frequency_limits, invasion_rate_x, invasion_rate_y, Outcome, Sign,
};
use lvswitch::pdmp::{
    boundary_growth_average, boundary_occupation, extinction_ensemble, lyapunov_slope,
    near_extinction_fraction, simulate, PdmpError, SimConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

fn env(vals: [f64; 6]) -> Environment {
    Environment::new(vals[0], vals[1], vals[2], vals[3], vals[4], vals[5]).unwrap()
}

fn fixture_pair(rho: f64) -> EnvironmentPair {
    EnvironmentPair::new(
        env([1.0, 1.0, 2.0, 2.0, 1.0, 5.0]),
        env([3.0, 3.0, 4.0, 4.0 + rho, 5.0, 1.0]),
    )
}

/// Root-variable remap of the standard fixture (alpha0 = 1, alpha1 = 5).
fn scan_weight(w: f64) -> f64 {
    w / (5.0 * (1.0 - w) + w)
}

fn random_env(rng: &mut ChaCha12Rng) -> Environment {
    let mut v = [0.0; 6];
    for x in &mut v {
        *x = rng.gen_range(0.2..5.0);
    }
    env(v)
}

/// A random pair with both environments favorable to x.
fn random_favorable_pair(rng: &mut ChaCha12Rng) -> EnvironmentPair {
    let sample = |rng: &mut ChaCha12Rng| loop {
        let a = rng.gen_range(0.2..3.0);
        let b = rng.gen_range(0.2..3.0);
        let c = a + rng.gen_range(0.05..2.0);
        let d = b + rng.gen_range(0.05..2.0);
        let alpha = rng.gen_range(0.2..5.0);
        let beta = rng.gen_range(0.2..5.0);
        if let Ok(e) = Environment::new(a, b, c, d, alpha, beta) {
            return e;
        }
    };
    EnvironmentPair::new(sample(rng), sample(rng))
}

#[test]
fn c1_interval_golden_values() {
    let map = |u: f64| u / (5.0 * (1.0 - u) + u);
    let half = 1.0 / (2.0 * 6.0f64.sqrt());
    let want_i = (map(0.75 - half), map(0.75 + half));
    for rho in [0.0, 1.0, 3.0] {
        let iv = fixture_pair(rho).interval_i().interval.expect("I nonempty");
        assert!((iv.lo - want_i.0).abs() <= 1e-10, "I lo at rho={rho}");
        assert!((iv.hi - want_i.1).abs() <= 1e-10, "I hi at rho={rho}");
    }
    // (b) J = I exactly for rho = 0.
    let p0 = fixture_pair(0.0);
    assert_eq!(p0.interval_j().interval, p0.interval_i().interval);
    // (c) J endpoints for rho = 1.
    let j1 = fixture_pair(1.0).interval_j().interval.expect("J nonempty");
    let root = |sign: f64| (71.0 + sign * 241.0f64.sqrt()) / 96.0;
    assert!((j1.lo - map(root(-1.0))).abs() <= 1e-10);
    assert!((j1.hi - map(root(1.0))).abs() <= 1e-10);
    // (d) J empty for rho = 3.
    assert!(fixture_pair(3.0).interval_j().interval.is_none());
    println!(
        "ACCEPTANCE c1: PASS - I = ({:.12}, {:.12}) for all rho; J(rho=1) = ({:.12}, {:.12}); J(rho=3) empty",
        want_i.0, want_i.1, j1.lo, j1.hi
    );
}

#[test]
fn c2_mass_identities_on_rate_grid() {
    let pair = fixture_pair(3.0);
    let mut worst: f64 = 0.0;
    for s in [0.1, 0.3, 0.5, 0.7, 0.9] {
        for t in [0.1, 1.0, 10.0, 100.0] {
            let rates = SwitchRates::from_mixture(s, t).unwrap();
            let mu = boundary_measure(&pair, &rates, Face::Y).unwrap();
            let c = mu.continuous().expect("continuous branch");
            let want0 = rates.lambda1() / rates.intensity();
            let want1 = rates.lambda0() / rates.intensity();
            // Construction-route masses (reciprocal-variable quadrature).
            worst = worst.max((c.mass(0) - want0).abs());
            worst = worst.max((c.mass(1) - want1).abs());
            // Independent route: direct abundance-variable quadrature with
            // the materialized normalization constant.
            let (lo, hi) = c.support();
            let m0 = mu.mass_between(0, lo, hi).unwrap();
            let m1 = mu.mass_between(1, lo, hi).unwrap();
            worst = worst.max((m0 - want0).abs());
            worst = worst.max((m1 - want1).abs());
            worst = worst.max((m0 + m1 - 1.0).abs());
            assert!(
                worst <= 1e-9,
                "mass identity violation {worst:.3e} at s={s}, t={t}"
            );
        }
    }
    println!("ACCEPTANCE c2: PASS - worst identity deviation {worst:.3e} over 20-point rate grid (both quadrature routes)");
}

#[test]
fn c3_rate_cross_check_on_random_inputs() {
    let mut rng = ChaCha12Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for k in 0..50 {
        let pair = EnvironmentPair::new(random_env(&mut rng), random_env(&mut rng));
        let rates =
            SwitchRates::new(rng.gen_range(0.05..20.0), rng.gen_range(0.05..20.0)).unwrap();
        let r = invasion_rate_y(&pair, &rates).unwrap_or_else(|e| panic!("input {k}: {e}"));
        worst = worst.max(r.cross_check_diff);
        assert!(
            r.cross_check_diff <= 1e-7,
            "routes disagree at input {k}: {:.3e}",
            r.cross_check_diff
        );
    }
    println!("ACCEPTANCE c3: PASS - worst route disagreement {worst:.3e} over 50 random inputs");
}

#[test]
fn c4_frequency_limit_convergence() {
    let pair = fixture_pair(3.0);
    for s in [0.3, 0.5, 0.75] {
        let (low, high) = frequency_limits(&pair, s, Species::Y);
        let at = |t: f64| {
            invasion_rate_y(&pair, &SwitchRates::from_mixture(s, t).unwrap())
                .unwrap()
                .value
        };
        let fast_err = (at(1e6) - high).abs();
        let slow_err = (at(1e-6) - low).abs();
        assert!(fast_err <= 1e-3, "fast limit at s={s}: err {fast_err:.2e}");
        assert!(slow_err <= 1e-3, "slow limit at s={s}: err {slow_err:.2e}");
        let errs: Vec<f64> = [1e2, 1e3, 1e4, 1e5, 1e6]
            .iter()
            .map(|&t| (at(t) - high).abs())
            .collect();
        for (k, w) in errs.windows(2).enumerate() {
            assert!(
                w[1] < w[0],
                "error not decreasing at s={s}, step {k}: {errs:?}"
            );
        }
        println!(
            "ACCEPTANCE c4 (s={s}): PASS - fast err {fast_err:.2e}, slow err {slow_err:.2e}, errors {errs:?}"
        );
    }
}

#[test]
fn c5_figure_operating_points() {
    let points = [
        (3.0, 0.4, 100.0, Outcome::ExtinctionY),
        (3.0, 0.75, 12.0, Outcome::Persistence),
        (1.0, 0.75, 10.0, Outcome::Persistence),
        (1.0, 0.75, 100.0, Outcome::ExtinctionX),
        (0.0, 0.75, 1.0 / 0.15, Outcome::ExtinctionEither),
    ];
    for (rho, w, t, want) in points {
        let s = scan_weight(w);
        let rates = SwitchRates::from_mixture(s, t).unwrap();
        let report = classify_outcome(&fixture_pair(rho), &rates).unwrap();
        assert_eq!(
            report.outcome, want,
            "rho={rho}, w={w} (s={s:.4}), t={t}: got {:?} (lx={:.4}, ly={:.4})",
            report.outcome, report.lambda_x, report.lambda_y
        );
        println!(
            "ACCEPTANCE c5 (rho={rho}, w={w}, t={t:.3}): PASS - {:?} (lambda_x {:+.4}, lambda_y {:+.4})",
            report.outcome, report.lambda_x, report.lambda_y
        );
    }
}

#[test]
fn c6_universal_sign_properties() {
    // J empty at rho = 3: the x rate is positive over the whole rate plane.
    let pair = fixture_pair(3.0);
    let mut min_lx = f64::INFINITY;
    for si in 1..=9 {
        let s = f64::from(si) / 10.0;
        for ti in 0..10 {
            let t = 0.1 * 10f64.powf(f64::from(ti) / 2.25);
            let rates = SwitchRates::from_mixture(s, t).unwrap();
            let lx = invasion_rate_x(&pair, &rates).unwrap().value;
            min_lx = min_lx.min(lx);
            assert!(lx > 0.0, "Lambda_x not positive at s={s}, t={t}: {lx}");
        }
    }
    // Slow-switching limits for favorable pairs: y negative, x positive.
    let mut rng = ChaCha12Rng::seed_from_u64(77);
    let mut pairs = vec![
        fixture_pair(0.0),
        fixture_pair(1.0),
        fixture_pair(3.0),
        EnvironmentPair::new(
            env([1.0, 1.0, 2.0, 2.0, 10.0, 1.0]),
            env([0.5, 0.5, 0.65, 0.65, 1.0, 10.0]),
        ),
    ];
    for _ in 0..16 {
        pairs.push(random_favorable_pair(&mut rng));
    }
    for (k, pair) in pairs.iter().enumerate() {
        assert!(pair.both_favorable_to_x());
        for s in [0.3, 0.7] {
            let rates = SwitchRates::from_mixture(s, 1e-6).unwrap();
            let ly = invasion_rate_y(pair, &rates).unwrap().value;
            let lx = invasion_rate_x(pair, &rates).unwrap().value;
            assert!(ly < 0.0, "pair {k}, s={s}: Lambda_y = {ly}");
            assert!(lx > 0.0, "pair {k}, s={s}: Lambda_x = {lx}");
        }
    }
    println!(
        "ACCEPTANCE c6: PASS - min Lambda_x {min_lx:.4} on the 9x10 grid; slow-switching signs (+,-) on {} favorable pairs",
        pairs.len()
    );
}

#[test]
fn c7_boundary_monte_carlo_vs_closed_form() {
    let pair = fixture_pair(3.0);
    let rates = SwitchRates::new(1.0, 1.0).unwrap();
    let horizon = 1e5;
    let mu = boundary_measure(&pair, &rates, Face::Y).unwrap();
    let c = mu.continuous().unwrap();
    let (lo, hi) = c.support();
    let n_bins = 200;
    let edges: Vec<f64> = (0..=n_bins)
        .map(|k| lo + (hi - lo) * k as f64 / n_bins as f64)
        .collect();
    let closed = mu.marginal_bin_masses(&edges).unwrap();
    let lambda_y = invasion_rate_y(&pair, &rates).unwrap().value;

    for seed in [1u64, 2, 3] {
        let empirical = boundary_occupation(&pair, &rates, 0.5, 0, horizon, seed, &edges);
        let tv: f64 = 0.5
            * empirical
                .iter()
                .zip(&closed)
                .map(|(e, c)| (e - c).abs())
                .sum::<f64>();
        assert!(tv <= 0.02, "seed {seed}: TV distance {tv:.4}");

        let avg = boundary_growth_average(&pair, &rates, 0.5, 0, horizon, seed);
        let rel = (avg - lambda_y).abs() / lambda_y.abs();
        assert!(
            rel <= 0.02,
            "seed {seed}: ergodic average {avg:.5} vs rate {lambda_y:.5} (rel {rel:.4})"
        );
        println!(
            "ACCEPTANCE c7 (seed {seed}): PASS - TV {tv:.4} <= 0.02; ergodic average {avg:.5} within {:.2}% of {lambda_y:.5}",
            100.0 * rel
        );
    }
}

/// Criterion 8(a), decay part: in the y-extinction run the fitted log-Y
/// slope obeys the one-sided invasion-rate bound and lands within 30% of
/// the rate itself; the late-window X path stays inside the fattened
/// support interval.
#[test]
fn c8a_extinction_slope_and_containment() {
    let pair = fixture_pair(3.0);
    let s = scan_weight(0.4);
    let rates = SwitchRates::from_mixture(s, 100.0).unwrap();
    let lambda_y = invasion_rate_y(&pair, &rates).unwrap().value;
    assert!(lambda_y < 0.0);

    let cfg = SimConfig::default();
    let traj = simulate(&pair, &rates, 0.5, 0.5, 0, 2000.0, 8, &cfg).unwrap();
    assert!(traj.extinct_y.is_some(), "y must go extinct");
    let estimate = match lyapunov_slope(&traj, Species::Y, 0.1) {
        Err(PdmpError::ExtinctFloor { estimate, .. }) => estimate,
        other => panic!("expected pre-flag slope, got {other:?}"),
    };
    assert!(
        estimate.slope <= lambda_y + 3.0 * estimate.stderr,
        "slope {:.4} above bound {:.4} + 3 * {:.4}",
        estimate.slope,
        lambda_y,
        estimate.stderr
    );
    let rel = (estimate.slope - lambda_y).abs() / lambda_y.abs();
    assert!(
        rel <= 0.30,
        "slope {:.4} not within 30% of {:.4}",
        estimate.slope,
        lambda_y
    );

    // Containment: after extinction the path lives within +-0.02 of the
    // boundary support interval.
    let late: Vec<f64> = traj
        .samples
        .iter()
        .filter(|p| p.t >= 1000.0)
        .map(|p| p.x())
        .collect();
    let (min_x, max_x) = late
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    assert!(
        min_x >= 1.0 / 3.0 - 0.02 && max_x <= 1.0 + 0.02,
        "late X range ({min_x:.4}, {max_x:.4}) escapes the support"
    );

    // The late-window occupation collapses onto the boundary law: after
    // extinction the path lives on the y ~ 0 strip and its x-marginal
    // matches the closed-form boundary marginal.
    let mu = boundary_measure(&pair, &rates, Face::Y).unwrap();
    let (lo, hi) = mu.continuous().unwrap().support();
    let n_bins = 40;
    let edges: Vec<f64> = (0..=n_bins)
        .map(|k| lo + (hi - lo) * k as f64 / n_bins as f64)
        .collect();
    let closed = mu.marginal_bin_masses(&edges).unwrap();
    let mut empirical = vec![0.0; n_bins];
    for &x in &late {
        let idx = edges
            .partition_point(|&e| e <= x)
            .saturating_sub(1)
            .min(n_bins - 1);
        empirical[idx] += 1.0 / late.len() as f64;
    }
    let tv: f64 = 0.5
        * empirical
            .iter()
            .zip(&closed)
            .map(|(e, c)| (e - c).abs())
            .sum::<f64>();
    assert!(tv <= 0.05, "occupation vs boundary marginal: TV {tv:.4}");
    println!(
        "ACCEPTANCE c8a (slope/containment): PASS - slope {:.4} (stderr {:.4}) vs rate {:.4} (rel {:.1}%); late X in ({:.4}, {:.4}); occupation-vs-boundary TV {:.4}",
        estimate.slope,
        estimate.stderr,
        lambda_y,
        100.0 * rel,
        min_x,
        max_x,
        tv
    );
}

/// Criterion 8(a), coverage part, as stated: the late-window X range is
/// required to cover at least 90% of the support interval [1/3, 1].
///
/// At the stated operating point (intensity 100) the boundary law
/// concentrates its mass in a band of width about 0.1 around 1/a_s; the
/// occupation density near the support endpoints is of order exp(-30) and
/// no finite desk-scale run visits them. The full-interval limit set is a
/// property of infinite time (or of slow switching: at unit rates the same
/// check passes easily, see the boundary Monte Carlo criterion). The check
/// is implemented exactly as stated and is expected to fail; see the
/// decisions ledger.
#[test]
fn c8a_limit_set_coverage() {
    let pair = fixture_pair(3.0);
    let s = scan_weight(0.4);
    let rates = SwitchRates::from_mixture(s, 100.0).unwrap();
    let cfg = SimConfig::default();
    let traj = simulate(&pair, &rates, 0.5, 0.5, 0, 2000.0, 8, &cfg).unwrap();
    let late: Vec<f64> = traj
        .samples
        .iter()
        .filter(|p| p.t >= 1000.0)
        .map(|p| p.x())
        .collect();
    let (min_x, max_x) = late
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    let coverage = (max_x - min_x) / (2.0 / 3.0);
    println!(
        "ACCEPTANCE c8a (coverage): late X range ({min_x:.4}, {max_x:.4}) covers {:.1}% of [1/3, 1] (required: 90%)",
        100.0 * coverage
    );
    assert!(
        coverage >= 0.90,
        "late-window X range covers only {:.1}% of [1/3, 1] at switching intensity 100: \
         the boundary law at these rates concentrates near x = {:.3} and its density at the \
         support endpoints is ~exp(-30), so no finite desk-scale run can sweep the full \
         interval (the same sweep holds and passes at slow switching; see README)",
        100.0 * coverage,
        1.0 / pair.average(s).a()
    );
}

#[test]
fn c8b_both_extinctions_ensemble() {
    let pair = fixture_pair(0.0);
    let s = scan_weight(0.75);
    let rates = SwitchRates::from_mixture(s, 1.0 / 0.15).unwrap();
    let report = classify_outcome(&pair, &rates).unwrap();
    assert_eq!(report.outcome, Outcome::ExtinctionEither);

    let cfg = SimConfig::default();
    let ensemble =
        extinction_ensemble(&pair, &rates, 0.5, 0.5, 0, 500, 2000.0, 2026, &cfg).unwrap();
    let decided = ensemble.p_extinct_x + ensemble.p_extinct_y;
    assert!(
        ensemble.extinct_x > 0 && ensemble.extinct_y > 0,
        "both extinction events must occur: x {}, y {}",
        ensemble.extinct_x,
        ensemble.extinct_y
    );
    assert!(decided >= 0.95, "decided fraction {decided:.3}");
    println!(
        "ACCEPTANCE c8b: PASS - p(extinct x) = {:.3} {:?}, p(extinct y) = {:.3} {:?}, decided {:.3}",
        ensemble.p_extinct_x,
        ensemble.wilson_x,
        ensemble.p_extinct_y,
        ensemble.wilson_y,
        decided
    );
}

#[test]
fn c8c_persistence_ensemble_and_boundary_occupation() {
    let pair = fixture_pair(3.0);
    let s = scan_weight(0.75);
    let rates = SwitchRates::from_mixture(s, 12.0).unwrap();
    let cfg = SimConfig::default();
    let ensemble =
        extinction_ensemble(&pair, &rates, 0.5, 0.5, 0, 100, 2000.0, 11, &cfg).unwrap();
    assert_eq!(
        ensemble.undecided, 100,
        "persistence run must see zero extinctions (x {}, y {})",
        ensemble.extinct_x, ensemble.extinct_y
    );

    // Occupation near the extinction set shrinks with the neighborhood.
    let traj = simulate(&pair, &rates, 0.5, 0.5, 0, 2000.0, 11, &cfg).unwrap();
    let masses: Vec<f64> = [0.05, 0.02, 0.01]
        .iter()
        .map(|&eps| near_extinction_fraction(&traj, eps))
        .collect();
    assert!(
        masses[0] > 0.0,
        "path never approaches the boundary; occupation check vacuous"
    );
    assert!(
        masses[1] <= masses[0] && masses[2] <= masses[1],
        "occupation not decreasing: {masses:?}"
    );
    assert!(
        masses[2] < masses[0],
        "occupation flat across eps: {masses:?}"
    );

    // Support check: where the persistent path skims the x-axis, its x
    // values concentrate on the boundary support interval (fattened).
    let near_boundary: Vec<f64> = traj
        .samples
        .iter()
        .filter(|p| p.t >= 200.0 && p.y() < 0.01)
        .map(|p| p.x())
        .collect();
    assert!(!near_boundary.is_empty());
    let inside = near_boundary
        .iter()
        .filter(|&&x| (1.0 / 3.0 - 0.05..=1.05).contains(&x))
        .count();
    let frac = inside as f64 / near_boundary.len() as f64;
    assert!(frac >= 0.95, "near-boundary x outside support: {frac:.3}");
    println!(
        "ACCEPTANCE c8c: PASS - zero extinctions over 100 runs; occupation near boundary {:.4} / {:.4} / {:.4} at eps 0.05 / 0.02 / 0.01; near-boundary x inside support: {:.1}%",
        masses[0], masses[1], masses[2], 100.0 * frac
    );
}

#[test]
fn c9_lie_coefficient_oracle() {
    let mut rng = ChaCha12Rng::seed_from_u64(4242);
    let mut equal_cases = 0usize;
    for k in 0..100 {
        // Mix plain random pairs with constructed ratio-equality cases so
        // both sides of the biconditional are exercised.
        let pair = if k % 4 == 3 {
            let e0 = random_env(&mut rng);
            let a1 = rng.gen_range(0.2..5.0);
            let c1 = rng.gen_range(0.2..5.0);
            let al1 = rng.gen_range(0.2..5.0);
            let be1 = e0.beta() * al1 * a1 * e0.c() / (e0.alpha() * e0.a() * c1);
            let e1 = Environment::new(
                a1,
                rng.gen_range(0.2..5.0),
                c1,
                rng.gen_range(0.2..5.0),
                al1,
                be1,
            )
            .unwrap();
            EnvironmentPair::new(e0, e1)
        } else {
            EnvironmentPair::new(random_env(&mut rng), random_env(&mut rng))
        };
        let ratios = pair.bracket_condition();
        let coeffs = pair.lie_determinant_coefficients();
        let scale = |x: f64, y: f64| x.abs().max(y.abs()).max(1.0);
        let ac_equal = (ratios.rate_ratio - ratios.ac_ratio).abs()
            <= 1e-10 * scale(ratios.rate_ratio, ratios.ac_ratio);
        let bd_equal = (ratios.rate_ratio - ratios.bd_ratio).abs()
            <= 1e-10 * scale(ratios.rate_ratio, ratios.bd_ratio);
        let c41_c31_zero = coeffs.c41.abs() <= 1e-10 && coeffs.c31.abs() <= 1e-10;
        let c14_c13_zero = coeffs.c14.abs() <= 1e-10 && coeffs.c13.abs() <= 1e-10;
        assert_eq!(ac_equal, c41_c31_zero, "pair {k}: {pair:?}");
        assert_eq!(bd_equal, c14_c13_zero, "pair {k}: {pair:?}");
        if ac_equal {
            equal_cases += 1;
        }
    }
    assert!(equal_cases >= 20, "constructed equality cases missing");
    println!(
        "ACCEPTANCE c9: PASS - biconditional held on 100 pairs ({equal_cases} ratio-equality cases)"
    );
}

/// The sign conventions behind criteria 5-8 in one place: the slow-switching
/// regime always reproduces plain competitive exclusion.
#[test]
fn slow_switching_is_competitive_exclusion() {
    for rho in [0.0, 1.0, 3.0] {
        let report = classify_outcome(
            &fixture_pair(rho),
            &SwitchRates::from_mixture(0.5, 1e-4).unwrap(),
        )
        .unwrap();
        assert_eq!(report.sign_x, Sign::Positive);
        assert_eq!(report.sign_y, Sign::Negative);
        assert_eq!(report.outcome, Outcome::ExtinctionY);
    }
}
