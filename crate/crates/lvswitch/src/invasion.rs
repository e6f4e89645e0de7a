//! Invasion rates and the sign-based classification of long-run outcomes.
//!
//! The invasion rate of species y is its low-density growth rate averaged
//! against the invariant law `mu` of the boundary process on the
//! y-extinction face:
//!
//! ```text
//! Lambda_y = ∫ beta_0 (1 - c_0 x) mu(dx, 0) + ∫ beta_1 (1 - c_1 x) mu(dx, 1)
//! ```
//!
//! When the two equilibria coincide this is a two-term average; otherwise it
//! equals `p0 p1 C ∫ P(x) theta(x) dx` with `theta` the shared singular
//! kernel of the boundary densities and `P` a signed quadratic. Both forms
//! are computed here -- the kernel form as the primary value, the
//! expectation form as a mandatory cross-check -- and a disagreement beyond
//! 1e-6 relative is reported as an error rather than silently returned.
//!
//! `Lambda_x` is *defined* as `Lambda_y` of the species-swapped pair and is
//! implemented exactly that way; there is no second formula transcription
//! to drift.
//!
//! The pair of signs `(sign Lambda_x, sign Lambda_y)` determines the fate of
//! the process started from the interior: `(+,-)` extinction of y, `(-,+)`
//! extinction of x, `(-,-)` extinction of one species (random which),
//! `(+,+)` persistence with a unique interior invariant law.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::boundary::{boundary_measure, BoundaryError, BoundaryMeasure, Face, MeasureKind};
use crate::envmodel::{EnvironmentPair, Species, SwitchRates};

/// Errors from invasion-rate computation.
#[derive(Debug, Clone, Error)]
pub enum InvasionError {
    #[error(transparent)]
    Boundary(#[from] BoundaryError),
    /// The kernel-quadrature and expectation routes disagree.
    #[error(
        "invasion-rate routes disagree: kernel {direct}, expectation {expected} \
         (rel diff {rel_diff:.3e})"
    )]
    CrossCheckMismatch {
        direct: f64,
        expected: f64,
        rel_diff: f64,
    },
    /// Zero-set tracing requires a nonempty interval `I`.
    #[error("interval I is empty: the invasion rate of y is negative for all rates")]
    EmptyInterval,
}

/// An invasion rate together with its numerical diagnostics.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RateResult {
    /// The rate from the kernel quadrature (exact on the point-mass branch).
    pub value: f64,
    /// Achieved relative tolerance of the underlying quadratures.
    pub rel_change: f64,
    /// Relative disagreement between the two computation routes.
    pub cross_check_diff: f64,
}

/// Sign of an invasion rate, with an explicit zero band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

/// Long-run outcome predicted by the pair of invasion-rate signs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Outcome {
    /// `(+,-)`: y dies out almost surely; occupation settles on the y-face law.
    ExtinctionY,
    /// `(-,+)`: x dies out almost surely.
    ExtinctionX,
    /// `(-,-)`: one of the two dies out; both events have positive probability
    /// under the stated reachability conditions.
    ExtinctionEither,
    /// `(+,+)`: unique interior invariant law, occupation converges to it.
    Persistence,
    /// A rate sits inside the zero band; the sign theorems do not apply.
    Indeterminate,
}

/// Both rates, their signs, and the predicted outcome.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct InvasionReport {
    pub lambda_x: f64,
    pub lambda_y: f64,
    pub sign_x: Sign,
    pub sign_y: Sign,
    pub outcome: Outcome,
    pub diag_x: RateResult,
    pub diag_y: RateResult,
}

/// The signed quadratic `P` entering the kernel form of `Lambda_y`.
fn signed_quadratic(pair: &EnvironmentPair) -> impl Fn(f64) -> f64 {
    let (e0, e1) = (pair.env0, pair.env1);
    let orientation = if e1.a() > e0.a() { 1.0 } else { -1.0 };
    move |x: f64| {
        orientation
            * (e1.beta() / e1.alpha() * (1.0 - e1.c() * x) * (1.0 - e0.a() * x)
                - e0.beta() / e0.alpha() * (1.0 - e0.c() * x) * (1.0 - e1.a() * x))
    }
}

/// Invasion rate of species y.
///
/// On the point-mass branch this is the closed two-term average
/// `(lambda1 beta0 (1 - c0 p) + lambda0 beta1 (1 - c1 p)) / (lambda0 + lambda1)`.
/// Otherwise the kernel quadrature `p0 p1 C ∫ P theta` is returned, after
/// checking it against the expectation `E_mu[beta_I (1 - c_I X)]` computed
/// with the per-density endpoint exponents.
pub fn invasion_rate_y(
    pair: &EnvironmentPair,
    rates: &SwitchRates,
) -> Result<RateResult, InvasionError> {
    let mu = boundary_measure(pair, rates, Face::Y)?;
    invasion_rate_on(pair, rates, &mu)
}

/// Invasion rate of species x: by definition the y-rate of the
/// species-swapped pair.
pub fn invasion_rate_x(
    pair: &EnvironmentPair,
    rates: &SwitchRates,
) -> Result<RateResult, InvasionError> {
    invasion_rate_y(&pair.swap_species(), rates)
}

fn invasion_rate_on(
    pair: &EnvironmentPair,
    rates: &SwitchRates,
    mu: &BoundaryMeasure,
) -> Result<RateResult, InvasionError> {
    let growth = |x: f64, i: usize| {
        let e = pair.env(i);
        e.beta() * (1.0 - e.c() * x)
    };
    match mu.kind() {
        MeasureKind::Dirac { p, .. } => {
            let value = (rates.lambda1() * growth(*p, 0) + rates.lambda0() * growth(*p, 1))
                / rates.intensity();
            Ok(RateResult {
                value,
                rel_change: 0.0,
                cross_check_diff: 0.0,
            })
        }
        MeasureKind::Continuous(c) => {
            let direct = mu.kernel_integral(signed_quadratic(pair))?;
            let expected = mu.expect(growth)?;
            // Disagreement is judged against the problem scale, not the
            // (possibly vanishing) rate itself: near the zero set both
            // routes return numbers tiny relative to the growth function.
            // The growth rates are linear in x, so their sup over the
            // support is attained at an endpoint.
            let (lo, hi) = c.support();
            let magnitude = (0..2)
                .map(|i| {
                    mu.regime_mass(i) * growth(lo, i).abs().max(growth(hi, i).abs())
                })
                .sum::<f64>();
            let scale = direct.value.abs().max(expected.abs()).max(magnitude);
            let rel_diff = (direct.value - expected).abs() / scale.max(f64::MIN_POSITIVE);
            if rel_diff > 1e-6 {
                return Err(InvasionError::CrossCheckMismatch {
                    direct: direct.value,
                    expected,
                    rel_diff,
                });
            }
            Ok(RateResult {
                value: direct.value,
                rel_change: direct.rel_change,
                cross_check_diff: rel_diff,
            })
        }
    }
}

/// Closed-form limits of `t -> Lambda(ts, t(1-s))` for fixed mixing weight:
/// `(slow-switching limit, fast-switching limit)`.
///
/// For species y the fast limit is `beta_s (1 - c_s / a_s)` -- positive
/// exactly on the interval `I` -- and the slow limit is
/// `(1-s) beta0 (1 - c0/a0) + s beta1 (1 - c1/a1)`, which is negative
/// whenever both environments favor x. Species x uses the same formulas on
/// the swapped pair.
pub fn frequency_limits(pair: &EnvironmentPair, s: f64, species: Species) -> (f64, f64) {
    let pair = match species {
        Species::Y => *pair,
        Species::X => pair.swap_species(),
    };
    let (e0, e1) = (pair.env0, pair.env1);
    let low = (1.0 - s) * e0.beta() * (1.0 - e0.c() / e0.a())
        + s * e1.beta() * (1.0 - e1.c() / e1.a());
    let avg = pair.average(s);
    let high = avg.beta() * (1.0 - avg.c() / avg.a());
    (low, high)
}

fn assign_sign(rate: &RateResult) -> Sign {
    let band = 1e-9f64.max(10.0 * rate.rel_change);
    if rate.value.abs() <= band {
        Sign::Zero
    } else if rate.value > 0.0 {
        Sign::Positive
    } else {
        Sign::Negative
    }
}

fn outcome_from_signs(sign_x: Sign, sign_y: Sign) -> Outcome {
    match (sign_x, sign_y) {
        (Sign::Positive, Sign::Negative) => Outcome::ExtinctionY,
        (Sign::Negative, Sign::Positive) => Outcome::ExtinctionX,
        (Sign::Negative, Sign::Negative) => Outcome::ExtinctionEither,
        (Sign::Positive, Sign::Positive) => Outcome::Persistence,
        _ => Outcome::Indeterminate,
    }
}

/// Computes both invasion rates and maps their signs to the predicted
/// outcome. Rates within `max(1e-9, 10x achieved quadrature tolerance)` of
/// zero get sign `Zero` and the outcome `Indeterminate`.
///
/// ```
/// use lvswitch::envmodel::{Environment, EnvironmentPair, SwitchRates};
/// use lvswitch::invasion::{classify_outcome, Outcome};
///
/// let pair = EnvironmentPair::new(
///     Environment::new(1.0, 1.0, 2.0, 2.0, 1.0, 5.0).unwrap(),
///     Environment::new(3.0, 3.0, 4.0, 7.0, 5.0, 1.0).unwrap(),
/// );
/// // Slow switching keeps each regime's own competitive exclusion in force.
/// let rates = SwitchRates::from_mixture(0.5, 0.01).unwrap();
/// let report = classify_outcome(&pair, &rates).unwrap();
/// assert_eq!(report.outcome, Outcome::ExtinctionY);
/// ```
pub fn classify_outcome(
    pair: &EnvironmentPair,
    rates: &SwitchRates,
) -> Result<InvasionReport, InvasionError> {
    let diag_y = invasion_rate_y(pair, rates)?;
    let diag_x = invasion_rate_x(pair, rates)?;
    let sign_x = assign_sign(&diag_x);
    let sign_y = assign_sign(&diag_y);
    Ok(InvasionReport {
        lambda_x: diag_x.value,
        lambda_y: diag_y.value,
        sign_x,
        sign_y,
        outcome: outcome_from_signs(sign_x, sign_y),
        diag_x,
        diag_y,
    })
}

/// One resolved (or unresolved) point of the zero-set curve.
#[derive(Debug, Clone, Serialize)]
pub struct ZeroSetSample {
    pub s: f64,
    /// The located intensity `t(s)` with `Lambda_y(t s, t (1-s)) = 0`.
    pub t: Option<f64>,
    pub resolved: bool,
    /// Number of sign changes seen in the scan; more than one means the
    /// curve was not a single crossing at this `s` and only the first is
    /// bisected.
    pub crossings: usize,
    /// Bracket around the crossing after the scan, before bisection.
    pub bracket: Option<(f64, f64)>,
    /// Scan values `(t, Lambda_y)`, attached when unresolved.
    pub scan: Vec<(f64, f64)>,
}

/// The traced zero set of `t -> Lambda_y(ts, t(1-s))` over a set of mixing
/// weights inside the interval `I`.
#[derive(Debug, Clone, Serialize)]
pub struct ZeroSetCurve {
    pub samples: Vec<ZeroSetSample>,
    pub t_bounds: (f64, f64),
}

/// Default scan bounds for [`trace_zero_set`].
pub const ZERO_SET_T_BOUNDS: (f64, f64) = (1e-3, 1e6);
const ZERO_SET_SCAN_POINTS: usize = 40;

/// Locates `t(s)` with `Lambda_y(ts, t(1-s)) = 0` for each requested mixing
/// weight, by a 40-point logarithmic scan over `t_bounds` followed by
/// bisection in `log t` to relative width 1e-8.
///
/// The slow-switching limit is negative and the fast-switching limit is
/// positive for `s` inside `I`, so a crossing exists there; samples given
/// outside `I` (or weights whose crossing escapes `t_bounds`) come back
/// unresolved with their scan attached. Requires `I` nonempty.
pub fn trace_zero_set(
    pair: &EnvironmentPair,
    s_samples: &[f64],
    t_bounds: (f64, f64),
) -> Result<ZeroSetCurve, InvasionError> {
    pair.interval_i()
        .interval
        .ok_or(InvasionError::EmptyInterval)?;
    let samples = s_samples
        .par_iter()
        .map(|&s| trace_one(pair, s, t_bounds))
        .collect::<Vec<_>>();
    Ok(ZeroSetCurve { samples, t_bounds })
}

fn lambda_y_at(pair: &EnvironmentPair, s: f64, t: f64) -> Option<f64> {
    SwitchRates::from_mixture(s, t)
        .ok()
        .and_then(|rates| invasion_rate_y(pair, &rates).ok())
        .map(|r| r.value)
}

fn trace_one(pair: &EnvironmentPair, s: f64, (t_min, t_max): (f64, f64)) -> ZeroSetSample {
    let log_min = t_min.ln();
    let log_step = (t_max / t_min).ln() / (ZERO_SET_SCAN_POINTS - 1) as f64;
    let scan: Vec<(f64, f64)> = (0..ZERO_SET_SCAN_POINTS)
        .filter_map(|k| {
            let t = (log_min + log_step * k as f64).exp();
            lambda_y_at(pair, s, t).map(|v| (t, v))
        })
        .collect();

    let mut crossings = 0usize;
    let mut bracket = None;
    for w in scan.windows(2) {
        if w[0].1.signum() != w[1].1.signum() {
            crossings += 1;
            if bracket.is_none() {
                bracket = Some((w[0].0, w[1].0));
            }
        }
    }
    let Some((mut lo, mut hi)) = bracket else {
        return ZeroSetSample {
            s,
            t: None,
            resolved: false,
            crossings,
            bracket: None,
            scan,
        };
    };
    let f_lo = lambda_y_at(pair, s, lo);
    // Bisect in log t until the bracket width is 1e-8 relative.
    while (hi - lo) > 1e-8 * 0.5 * (hi + lo) {
        let mid = (lo.ln() + 0.5 * ((hi / lo).ln())).exp();
        let f_mid = lambda_y_at(pair, s, mid);
        match (f_lo, f_mid) {
            (Some(a), Some(m)) => {
                if a.signum() == m.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            _ => break,
        }
    }
    ZeroSetSample {
        s,
        t: Some((lo.ln() + 0.5 * (hi / lo).ln()).exp()),
        resolved: true,
        crossings,
        bracket: Some((lo, hi)),
        scan: Vec::new(),
    }
}

/// One cell of a sign sweep over an `(s, t)` grid.
#[derive(Debug, Clone, Serialize)]
pub struct SweepCell {
    pub s: f64,
    pub t: f64,
    pub lambda_x: Option<f64>,
    pub lambda_y: Option<f64>,
    pub sign_x: Option<Sign>,
    pub sign_y: Option<Sign>,
    pub outcome: Option<Outcome>,
    pub error: Option<String>,
}

/// Evaluates both invasion-rate signs on the full `s_grid x t_grid`.
///
/// Cells are computed in parallel but assembled in row-major grid order
/// (s outer, t inner), so output files are reproducible; per-cell errors
/// are recorded and the sweep continues.
pub fn sign_sweep(pair: &EnvironmentPair, s_grid: &[f64], t_grid: &[f64]) -> Vec<SweepCell> {
    let cells: Vec<(f64, f64)> = s_grid
        .iter()
        .flat_map(|&s| t_grid.iter().map(move |&t| (s, t)))
        .collect();
    cells
        .into_par_iter()
        .map(|(s, t)| {
            match SwitchRates::from_mixture(s, t)
                .map_err(|e| e.to_string())
                .and_then(|rates| classify_outcome(pair, &rates).map_err(|e| e.to_string()))
            {
                Ok(report) => SweepCell {
                    s,
                    t,
                    lambda_x: Some(report.lambda_x),
                    lambda_y: Some(report.lambda_y),
                    sign_x: Some(report.sign_x),
                    sign_y: Some(report.sign_y),
                    outcome: Some(report.outcome),
                    error: None,
                },
                Err(message) => SweepCell {
                    s,
                    t,
                    lambda_x: None,
                    lambda_y: None,
                    sign_x: None,
                    sign_y: None,
                    outcome: None,
                    error: Some(message),
                },
            }
        })
        .collect()
}

/// Convenience remap for operating points stated in the scan variable `w`
/// of the interval quadratic: returns the corresponding mixing weight
/// `s = w alpha0 / ((1-w) alpha1 + w alpha0)`.
pub fn scan_weight(pair: &EnvironmentPair, w: f64) -> f64 {
    pair.root_to_mixture(w)
}
