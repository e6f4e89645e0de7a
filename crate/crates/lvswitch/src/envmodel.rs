//! Environment parameters, vector fields, regime classification, and the
//! mixing-weight analysis of a two-environment pair.
//!
//! A single environment is the parameter set `(a, b, c, d, alpha, beta)` of
//! one competitive Lotka-Volterra vector field
//!
//! ```text
//! dx/dt = alpha * x * (1 - a*x - b*y)
//! dy/dt = beta  * y * (1 - c*x - d*y)
//! ```
//!
//! For a pair of environments, `average` produces the environment whose field
//! is the pointwise convex combination of the two fields: the effective
//! dynamics under very fast random switching that spends weight `s` in
//! environment 1. The sets of weights where the averaged environment flips
//! the sign of `a_s - c_s` (interval `I`) or `b_s - d_s` (interval `J`) are
//! the levers behind every non-obvious long-run outcome, and both reduce to
//! the sign of an explicit quadratic in a remapped weight variable.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance below which two competition coefficients are treated
/// as equal (tie-breaking in `classify`, the linear fallback in the interval
/// quadratics, and the atom-versus-density cut for boundary measures).
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Which of the two competing species an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Species {
    X,
    Y,
}

/// Errors from environment construction and classification.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum EnvError {
    /// A parameter was zero, negative, or not finite.
    #[error("parameter {name} must be positive and finite, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },
    /// `a = c` or `b = d` within [`DEGENERACY_TOL`]: the four-way regime
    /// classification is undefined on the ties.
    #[error("degenerate environment: {which} are equal within tolerance")]
    DegenerateEnvironment { which: &'static str },
    /// An operation required both environments favorable to the x species.
    #[error("environment pair is not favorable to species x in both regimes")]
    NotBothFavorable,
    /// The isocline system is numerically singular (no reliable interior equilibrium).
    #[error("isocline system is singular: |ad - bc| below tolerance")]
    SingularIsoclines,
}

/// One competitive Lotka-Volterra regime: competition matrix `(a b; c d)`
/// and intrinsic growth rates `(alpha, beta)`, all strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawEnvironment")]
pub struct Environment {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    alpha: f64,
    beta: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
struct RawEnvironment {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    alpha: f64,
    beta: f64,
}

impl TryFrom<RawEnvironment> for Environment {
    type Error = EnvError;

    fn try_from(raw: RawEnvironment) -> Result<Self, Self::Error> {
        Environment::new(raw.a, raw.b, raw.c, raw.d, raw.alpha, raw.beta)
    }
}

impl Environment {
    /// Validates and builds an environment; every parameter must be a
    /// positive finite number.
    ///
    /// ```
    /// use lvswitch::envmodel::Environment;
    ///
    /// let env = Environment::new(1.0, 1.0, 2.0, 2.0, 1.0, 5.0).unwrap();
    /// assert_eq!(env.carrying_x(), 1.0);
    /// assert!(Environment::new(0.0, 1.0, 2.0, 2.0, 1.0, 5.0).is_err());
    /// ```
    pub fn new(a: f64, b: f64, c: f64, d: f64, alpha: f64, beta: f64) -> Result<Self, EnvError> {
        for (name, value) in [
            ("a", a),
            ("b", b),
            ("c", c),
            ("d", d),
            ("alpha", alpha),
            ("beta", beta),
        ] {
            if !value.is_finite() || value <= 0.0 {
                return Err(EnvError::NonPositiveParameter { name, value });
            }
        }
        Ok(Self {
            a,
            b,
            c,
            d,
            alpha,
            beta,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Equilibrium abundance `1/a` of species x alone.
    pub fn carrying_x(&self) -> f64 {
        1.0 / self.a
    }

    /// Equilibrium abundance `1/d` of species y alone.
    pub fn carrying_y(&self) -> f64 {
        1.0 / self.d
    }

    /// Boundary equilibrium `(1/a, 0)` on the x axis.
    pub fn boundary_equilibrium_x(&self) -> (f64, f64) {
        (self.carrying_x(), 0.0)
    }

    /// Boundary equilibrium `(0, 1/d)` on the y axis.
    pub fn boundary_equilibrium_y(&self) -> (f64, f64) {
        (0.0, self.carrying_y())
    }

    /// True when intraspecific competition beats interspecific competition
    /// for species x in this regime: `a < c` and `b < d`. Every interior
    /// orbit of such a regime converges to `(1/a, 0)`.
    pub fn favorable_to_x(&self) -> bool {
        self.a < self.c && self.b < self.d
    }

    /// The environment seen by relabeling the species: swaps the roles of
    /// the two equations, so `(a, b, c, d, alpha, beta)` becomes
    /// `(d, c, b, a, beta, alpha)`. An involution.
    pub fn swap_species(&self) -> Self {
        Self {
            a: self.d,
            b: self.c,
            c: self.b,
            d: self.a,
            alpha: self.beta,
            beta: self.alpha,
        }
    }

    /// Evaluates the vector field at `(x, y)`; total on the closed quadrant.
    pub fn vector_field(&self, x: f64, y: f64) -> (f64, f64) {
        (
            self.alpha * x * (1.0 - self.a * x - self.b * y),
            self.beta * y * (1.0 - self.c * x - self.d * y),
        )
    }

    /// Classifies the single-environment flow by the signs of `c - a` and
    /// `d - b`.
    ///
    /// - `a < c, b < d`: favorable to x, interior orbits reach `(1/a, 0)`;
    /// - `a > c, b > d`: favorable to y, interior orbits reach `(0, 1/d)`;
    /// - `a > c, b < d`: interior sink, globally attracting coexistence;
    /// - `a < c, b > d`: interior saddle, bistable boundary attractors.
    ///
    /// Ties within [`DEGENERACY_TOL`] are reported as
    /// [`EnvError::DegenerateEnvironment`] rather than forced into a case.
    pub fn classify(&self) -> Result<Regime, EnvError> {
        if (self.a - self.c).abs() < DEGENERACY_TOL {
            return Err(EnvError::DegenerateEnvironment { which: "a and c" });
        }
        if (self.b - self.d).abs() < DEGENERACY_TOL {
            return Err(EnvError::DegenerateEnvironment { which: "b and d" });
        }
        let a_below_c = self.a < self.c;
        let b_above_d = self.b > self.d;
        Ok(match (a_below_c, b_above_d) {
            (true, false) => Regime::FavorableX,
            (false, true) => Regime::FavorableY,
            (false, false) => Regime::CoexistenceSink {
                equilibrium: self.interior_equilibrium()?,
            },
            (true, true) => Regime::Bistable {
                equilibrium: self.interior_equilibrium()?,
            },
        })
    }

    /// Solves the isocline system `a x + b y = 1`, `c x + d y = 1`.
    fn interior_equilibrium(&self) -> Result<(f64, f64), EnvError> {
        let det = self.a * self.d - self.b * self.c;
        let scale = (self.a * self.d).abs().max((self.b * self.c).abs());
        if det.abs() <= 1e-14 * scale {
            return Err(EnvError::SingularIsoclines);
        }
        Ok(((self.d - self.b) / det, (self.a - self.c) / det))
    }
}

/// Long-run behavior of a single constant environment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Regime {
    /// All interior orbits converge to `(1/a, 0)`.
    FavorableX,
    /// All interior orbits converge to `(0, 1/d)`.
    FavorableY,
    /// A positive sink attracts the whole open quadrant.
    CoexistenceSink { equilibrium: (f64, f64) },
    /// A positive saddle separates the basins of the two boundary equilibria.
    Bistable { equilibrium: (f64, f64) },
}

/// The two environments the process switches between.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentPair {
    pub env0: Environment,
    pub env1: Environment,
}

impl EnvironmentPair {
    pub fn new(env0: Environment, env1: Environment) -> Self {
        Self { env0, env1 }
    }

    /// Regime-indexed access: `env(0)` or `env(1)`.
    pub fn env(&self, regime: usize) -> &Environment {
        match regime {
            0 => &self.env0,
            1 => &self.env1,
            _ => panic!("regime index must be 0 or 1"),
        }
    }

    /// True iff both environments are favorable to species x.
    pub fn both_favorable_to_x(&self) -> bool {
        self.env0.favorable_to_x() && self.env1.favorable_to_x()
    }

    /// Relabels the species in both environments (an involution).
    pub fn swap_species(&self) -> Self {
        Self {
            env0: self.env0.swap_species(),
            env1: self.env1.swap_species(),
        }
    }

    /// The environment whose vector field equals
    /// `s * F_env1 + (1 - s) * F_env0` pointwise.
    ///
    /// Growth rates combine linearly; competition coefficients combine with
    /// growth-rate weighting:
    /// `a_s = (s alpha1 a1 + (1-s) alpha0 a0) / alpha_s`, and likewise for
    /// `b` (with `alpha`), `c`, `d` (with `beta`).
    ///
    /// ```
    /// use lvswitch::envmodel::{Environment, EnvironmentPair};
    ///
    /// let pair = EnvironmentPair::new(
    ///     Environment::new(1.0, 1.0, 2.0, 2.0, 1.0, 5.0).unwrap(),
    ///     Environment::new(3.0, 3.0, 4.0, 7.0, 5.0, 1.0).unwrap(),
    /// );
    /// let mid = pair.average(0.75);
    /// assert!((mid.alpha() - 4.0).abs() < 1e-15);
    /// assert!((mid.a() - 2.875).abs() < 1e-15);
    /// ```
    pub fn average(&self, s: f64) -> Environment {
        assert!((0.0..=1.0).contains(&s), "mixing weight must be in [0, 1]");
        let (e0, e1) = (&self.env0, &self.env1);
        let alpha_s = s * e1.alpha + (1.0 - s) * e0.alpha;
        let beta_s = s * e1.beta + (1.0 - s) * e0.beta;
        let wa = |v1: f64, v0: f64| (s * e1.alpha * v1 + (1.0 - s) * e0.alpha * v0) / alpha_s;
        let wb = |v1: f64, v0: f64| (s * e1.beta * v1 + (1.0 - s) * e0.beta * v0) / beta_s;
        Environment {
            a: wa(e1.a, e0.a),
            b: wa(e1.b, e0.b),
            c: wb(e1.c, e0.c),
            d: wb(e1.d, e0.d),
            alpha: alpha_s,
            beta: beta_s,
        }
    }

    /// Remaps a mixing weight `s` to the quadratic's variable
    /// `u = s alpha1 / alpha_s`.
    pub fn mixture_to_root(&self, s: f64) -> f64 {
        let alpha_s = s * self.env1.alpha + (1.0 - s) * self.env0.alpha;
        s * self.env1.alpha / alpha_s
    }

    /// Inverse of [`mixture_to_root`](Self::mixture_to_root):
    /// `s = u alpha0 / ((1-u) alpha1 + u alpha0)`. Strictly increasing on
    /// `[0, 1]` with fixed endpoints.
    pub fn root_to_mixture(&self, u: f64) -> f64 {
        u * self.env0.alpha / ((1.0 - u) * self.env1.alpha + u * self.env0.alpha)
    }

    /// Mixing weights where the averaged environment has `a_s > c_s`.
    pub fn interval_i(&self) -> IntervalResult {
        self.sign_interval(self.env0.a, self.env1.a, self.env0.c, self.env1.c)
    }

    /// Mixing weights where the averaged environment has `b_s > d_s`.
    pub fn interval_j(&self) -> IntervalResult {
        self.sign_interval(self.env0.b, self.env1.b, self.env0.d, self.env1.d)
    }

    /// Both intervals with their quadratic diagnostics.
    pub fn intervals(&self) -> IntervalSet {
        IntervalSet {
            i: self.interval_i(),
            j: self.interval_j(),
        }
    }

    /// Shared machinery behind `interval_i` / `interval_j`.
    ///
    /// With `R = beta0 alpha1 / (alpha0 beta1)` and `u` the remapped weight,
    /// the sign of `y_s - x_s` (where `x` stands for the `a`-like and `y`
    /// for the `c`-like coefficient) is the sign of `A u^2 + B u + C`:
    ///
    /// ```text
    /// A = (x1 - x0)(R - 1)
    /// B = (2 x0 - y0 - x1) R + (y1 - x0)
    /// C = (y0 - x0) R
    /// ```
    ///
    /// The wanted set `{x_s > y_s}` is where the quadratic is negative. Roots
    /// use the cancellation-free form; `A ~ 0` falls back to the linear root.
    fn sign_interval(&self, x0: f64, x1: f64, y0: f64, y1: f64) -> IntervalResult {
        let (e0, e1) = (&self.env0, &self.env1);
        let r = e0.beta * e1.alpha / (e0.alpha * e1.beta);
        let qa = (x1 - x0) * (r - 1.0);
        let qb = (2.0 * x0 - y0 - x1) * r + (y1 - x0);
        let qc = (y0 - x0) * r;
        let delta = qb * qb - 4.0 * qa * qc;
        let diag = QuadraticDiag {
            r,
            a: qa,
            b: qb,
            c: qc,
            delta,
        };

        let interval = negative_root_interval(qa, qb, qc, delta).map(|(u_lo, u_hi)| Interval {
            lo: self.root_to_mixture(u_lo),
            hi: self.root_to_mixture(u_hi),
        });
        IntervalResult { interval, diag }
    }

    /// True iff the averaged environment is favorable to x for every
    /// `s` in `[0, 1]`, i.e. both intervals are empty.
    ///
    /// Errors with [`EnvError::NotBothFavorable`] if either endpoint
    /// environment already fails favorability.
    pub fn jointly_favorable(&self) -> Result<bool, EnvError> {
        if !self.both_favorable_to_x() {
            return Err(EnvError::NotBothFavorable);
        }
        Ok(self.interval_i().interval.is_none() && self.interval_j().interval.is_none())
    }

    /// The rate-ratio condition behind the exponential-convergence result:
    /// holds iff `beta0 alpha1 / (alpha0 beta1)` differs (relative 1e-12)
    /// from `a0 c1 / (a1 c0)` or from `b0 d1 / (b1 d0)`.
    pub fn bracket_condition(&self) -> BracketCondition {
        let (e0, e1) = (&self.env0, &self.env1);
        let rate_ratio = e0.beta * e1.alpha / (e0.alpha * e1.beta);
        let ac_ratio = e0.a * e1.c / (e1.a * e0.c);
        let bd_ratio = e0.b * e1.d / (e1.b * e0.d);
        let differs = |x: f64, y: f64| (x - y).abs() > 1e-12 * x.abs().max(y.abs());
        BracketCondition {
            holds: differs(rate_ratio, ac_ratio) || differs(rate_ratio, bd_ratio),
            rate_ratio,
            ac_ratio,
            bd_ratio,
        }
    }

    /// Coefficients `c_ij` of the polynomial
    /// `det(F1 - F0, [F1, F0])(x, y) = sum c_ij x^i y^j`, whose
    /// non-vanishing at an accessible point makes that point a smoothing
    /// (Doeblin) point for the switched process.
    pub fn lie_determinant_coefficients(&self) -> LieCoefficients {
        let (e0, e1) = (&self.env0, &self.env1);
        let a = e1.alpha - e0.alpha;
        let b = e0.alpha * e0.a - e1.alpha * e1.a;
        let c = e0.alpha * e0.b - e1.alpha * e1.b;
        let d = e1.beta - e0.beta;
        let e = e0.beta * e0.d - e1.beta * e1.d;
        let f = e0.beta * e0.c - e1.beta * e1.c;
        let g = e0.alpha;
        let h = -e0.alpha * e0.a;
        let i = -e0.alpha * e0.b;
        let j = e0.beta;
        let k = -e0.beta * e0.d;
        let l = -e0.beta * e0.c;
        LieCoefficients {
            c41: -b * f * h + b * b * l,
            c32: -2.0 * c * f * h - f * f * i + b * f * k + 2.0 * b * c * l - b * e * l
                + c * f * l,
            c23: -c * e * h + b * e * i - c * f * i - 2.0 * e * f * i + 2.0 * c * f * k
                + c * c * l,
            c14: -e * e * i + c * e * k,
            c31: -2.0 * a * f * h + 2.0 * a * b * l,
            c22: b * e * g - c * f * g - c * d * h - a * e * h + b * d * i
                - a * f * i
                - 2.0 * d * f * i
                - b * e * j
                + c * f * j
                + b * d * k
                + a * f * k
                + 2.0 * a * c * l
                + c * d * l
                - a * e * l,
            c13: -2.0 * d * e * i + 2.0 * c * d * k,
            c21: b * d * g - a * f * g - a * d * h + a * a * l,
            c12: -d * d * i + c * d * j - a * e * j + a * d * k,
        }
    }
}

/// The subset of (0, 1) in `u`-space where `qa u^2 + qb u + qc < 0`, when
/// that subset is a single interval; `None` when it is empty. For pairs
/// favorable to x the quadratic is positive at both endpoints, so the set is
/// always either empty or one interval strictly inside (0, 1).
fn negative_root_interval(qa: f64, qb: f64, qc: f64, delta: f64) -> Option<(f64, f64)> {
    let scale = qa.abs().max(qb.abs()).max(qc.abs());
    if scale == 0.0 {
        return None;
    }
    if qa.abs() < DEGENERACY_TOL * scale {
        if qb.abs() < DEGENERACY_TOL * scale {
            // Constant sign; negative everywhere only outside the
            // favorable-to-x class.
            return (qc < 0.0).then_some((0.0, 1.0));
        }
        let u = -qc / qb;
        let (lo, hi) = if qb > 0.0 { (0.0, u) } else { (u, 1.0) };
        return clip_unit(lo, hi);
    }
    if delta <= 0.0 {
        return (qa < 0.0).then_some((0.0, 1.0));
    }
    let sign_b = if qb >= 0.0 { 1.0 } else { -1.0 };
    let q = -0.5 * (qb + sign_b * delta.sqrt());
    let (r1, r2) = (q / qa, qc / q);
    let (u_lo, u_hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
    if qa > 0.0 {
        clip_unit(u_lo, u_hi)
    } else {
        // Negative outside the roots. A single component remains only when
        // at most one root lies inside (0, 1); both-inside cannot occur for
        // pairs favorable to x.
        if u_lo >= 1.0 || u_hi <= 0.0 {
            Some((0.0, 1.0))
        } else if u_lo <= 0.0 {
            clip_unit(u_hi, 1.0)
        } else {
            clip_unit(0.0, u_lo)
        }
    }
}

fn clip_unit(lo: f64, hi: f64) -> Option<(f64, f64)> {
    let lo = lo.max(0.0);
    let hi = hi.min(1.0);
    (lo < hi).then_some((lo, hi))
}

/// Jump intensities of the environment chain. Regime `i` is left at rate
/// `lambda_i`, so sojourns in regime `i` are exponential with that rate.
///
/// The `(s, t)` view writes `lambda0 = s t`, `lambda1 = (1 - s) t`: `t` is
/// the overall switching intensity and `s` the long-run fraction of time the
/// chain spends in regime 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchRates {
    lambda0: f64,
    lambda1: f64,
}

impl SwitchRates {
    pub fn new(lambda0: f64, lambda1: f64) -> Result<Self, EnvError> {
        for (name, value) in [("lambda0", lambda0), ("lambda1", lambda1)] {
            if !value.is_finite() || value <= 0.0 {
                return Err(EnvError::NonPositiveParameter { name, value });
            }
        }
        Ok(Self { lambda0, lambda1 })
    }

    /// Builds from the `(s, t)` parameterization: `lambda0 = s t`,
    /// `lambda1 = (1 - s) t` with `s` in (0, 1), `t > 0`.
    pub fn from_mixture(s: f64, t: f64) -> Result<Self, EnvError> {
        if !s.is_finite() || s <= 0.0 || s >= 1.0 {
            return Err(EnvError::NonPositiveParameter { name: "s", value: s });
        }
        Self::new(s * t, (1.0 - s) * t)
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    /// Rate out of the given regime.
    pub fn rate(&self, regime: usize) -> f64 {
        match regime {
            0 => self.lambda0,
            1 => self.lambda1,
            _ => panic!("regime index must be 0 or 1"),
        }
    }

    /// Long-run fraction of time in regime 1: `lambda0 / (lambda0 + lambda1)`.
    pub fn mixture(&self) -> f64 {
        self.lambda0 / (self.lambda0 + self.lambda1)
    }

    /// Total switching intensity `lambda0 + lambda1`.
    pub fn intensity(&self) -> f64 {
        self.lambda0 + self.lambda1
    }
}

/// Open interval of mixing weights, `0 <= lo < hi <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, s: f64) -> bool {
        self.lo < s && s < self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Quadratic diagnostics for one sign interval: `R` and the coefficients
/// and discriminant of `A u^2 + B u + C`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct QuadraticDiag {
    pub r: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub delta: f64,
}

/// One sign interval (possibly empty) plus its quadratic diagnostics.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IntervalResult {
    pub interval: Option<Interval>,
    pub diag: QuadraticDiag,
}

/// The pair of sign intervals `I` (on `a_s > c_s`) and `J` (on `b_s > d_s`).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IntervalSet {
    pub i: IntervalResult,
    pub j: IntervalResult,
}

/// Result of [`EnvironmentPair::bracket_condition`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BracketCondition {
    pub holds: bool,
    pub rate_ratio: f64,
    pub ac_ratio: f64,
    pub bd_ratio: f64,
}

/// The nine coefficients of the bracket determinant polynomial.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LieCoefficients {
    pub c41: f64,
    pub c32: f64,
    pub c23: f64,
    pub c14: f64,
    pub c31: f64,
    pub c22: f64,
    pub c13: f64,
    pub c21: f64,
    pub c12: f64,
}

impl LieCoefficients {
    pub fn as_array(&self) -> [f64; 9] {
        [
            self.c41, self.c32, self.c23, self.c14, self.c31, self.c22, self.c13, self.c21,
            self.c12,
        ]
    }
}
