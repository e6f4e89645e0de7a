//! Invariant probability measures of the process restricted to an
//! extinction face.
//!
//! With one species absent, the other follows a switched logistic equation
//! whose invariant law is explicit. Writing `p_i = 1/a_i` for the two
//! single-species equilibria and `gamma_i = lambda_i / alpha_i`, the law on
//! the y-extinction face is either a point mass at `p` (when `p_0 = p_1 = p`)
//! split between the regimes by the jump chain, or absolutely continuous on
//! the interval between `p_0` and `p_1` with per-regime densities
//!
//! ```text
//! h1(x) = C p1 |x - p1|^(gamma1 - 1) |p0 - x|^gamma0     / (alpha1 x^(1 + gamma0 + gamma1))
//! h0(x) = C p0 |x - p1|^gamma1       |p0 - x|^(gamma0-1) / (alpha0 x^(1 + gamma0 + gamma1))
//! ```
//!
//! normalized by total mass one. The per-regime masses are pinned by the
//! jump chain alone: `∫h0 = lambda1/(lambda0+lambda1)` and
//! `∫h1 = lambda0/(lambda0+lambda1)`; the constructor recomputes both by
//! quadrature as a self-check and refuses to return a measure that fails it.
//!
//! Numerically everything runs in the reciprocal variable `v = 1/x`, where
//! the shared kernel `theta` of both densities becomes a pure Jacobi weight
//! `|v - a0|^(gamma0-1) |v - a1|^(gamma1-1)` on the interval between the
//! competition coefficients -- the awkward `x^-(1+gamma0+gamma1)` factor
//! cancels identically. All integrals are then expectation ratios against
//! that weight, so nothing overflows even at switching intensities where the
//! normalization constant is far outside the range of a double.
//!
//! The x-extinction face is the same object for the species-swapped pair
//! (`alpha <-> beta`, `(a, c) -> (d, b)`), and is implemented exactly that
//! way.

use serde::Serialize;
use thiserror::Error;

use crate::envmodel::{EnvironmentPair, SwitchRates, DEGENERACY_TOL};
use crate::quadrature::{
    expect_singular, integrate_singular, ln_beta, Quadrature, QuadratureError, DEFAULT_REL_TOL,
};

/// Which extinction face the measure lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Face {
    /// Species x absent; the measure is over y-abundance.
    X,
    /// Species y absent; the measure is over x-abundance.
    Y,
}

/// Errors from boundary-measure construction and evaluation.
#[derive(Debug, Clone, Error)]
pub enum BoundaryError {
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    /// The quadrature masses disagree with the jump-chain identities.
    #[error("mass identities failed: got ({got0:.9}, {got1:.9}), want ({want0:.9}, {want1:.9})")]
    NormalizationFailure {
        got0: f64,
        got1: f64,
        want0: f64,
        want1: f64,
    },
    /// A density-branch operation was called on the point-mass branch.
    #[error("measure is a point mass; no densities to evaluate")]
    DiracMeasure,
}

/// A pointwise density value, with endpoint divergence kept explicit
/// instead of encoded as a large float.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum DensityValue {
    Finite(f64),
    Divergent,
}

impl DensityValue {
    pub fn value(&self) -> Option<f64> {
        match self {
            DensityValue::Finite(v) => Some(*v),
            DensityValue::Divergent => None,
        }
    }

    pub fn is_divergent(&self) -> bool {
        matches!(self, DensityValue::Divergent)
    }
}

/// The invariant law of the boundary process: a regime-weighted point mass
/// or a pair of densities on the interval between the two single-species
/// equilibria.
#[derive(Debug, Clone)]
pub struct BoundaryMeasure {
    face: Face,
    rates: SwitchRates,
    kind: MeasureKind,
}

#[derive(Debug, Clone)]
pub enum MeasureKind {
    /// `p_0 = p_1 = p`: point mass at `p`, regimes weighted by the chain.
    Dirac {
        p: f64,
        /// Weight of regime 1, `lambda0 / (lambda0 + lambda1)`.
        nu1: f64,
    },
    /// `p_0 != p_1`: densities supported between the equilibria.
    Continuous(ContinuousMeasure),
}

/// Density-branch data. Index order is always `[regime 0, regime 1]`.
#[derive(Debug, Clone)]
pub struct ContinuousMeasure {
    /// Single-species equilibria `p_i = 1/a_i` (face-appropriate).
    p: [f64; 2],
    /// Reciprocals `a_i = 1/p_i` (the competition coefficients).
    recip: [f64; 2],
    /// Density exponents `gamma_i = lambda_i / alpha_i`.
    gamma: [f64; 2],
    /// Growth rates entering the density prefactors (`alpha_i` on the
    /// y-face, `beta_i` on the x-face).
    growth: [f64; 2],
    /// Canonically ordered support `(p_lo, p_hi)`.
    support: (f64, f64),
    /// Per-regime masses from quadrature; checked against the identities.
    mass: [f64; 2],
    /// `ln C` of the shared normalization constant.
    log_norm_c: f64,
    /// Worst relative change reported by the construction quadratures.
    rel_change: f64,
}

/// Computes the invariant law of the process restricted to the given
/// extinction face.
///
/// The x-face is defined through the species swap and built by the same
/// code path as the y-face.
///
/// ```
/// use lvswitch::boundary::{boundary_measure, Face, MeasureKind};
/// use lvswitch::envmodel::{Environment, EnvironmentPair, SwitchRates};
///
/// let pair = EnvironmentPair::new(
///     Environment::new(1.0, 1.0, 2.0, 2.0, 1.0, 5.0).unwrap(),
///     Environment::new(3.0, 3.0, 4.0, 7.0, 5.0, 1.0).unwrap(),
/// );
/// let rates = SwitchRates::new(1.0, 1.0).unwrap();
/// let mu = boundary_measure(&pair, &rates, Face::Y).unwrap();
/// match mu.kind() {
///     MeasureKind::Continuous(c) => {
///         assert_eq!(c.support(), (1.0 / 3.0, 1.0));
///         assert!((c.gamma0() - 1.0).abs() < 1e-15);
///         assert!((c.gamma1() - 0.2).abs() < 1e-15);
///     }
///     _ => unreachable!(),
/// }
/// ```
pub fn boundary_measure(
    pair: &EnvironmentPair,
    rates: &SwitchRates,
    face: Face,
) -> Result<BoundaryMeasure, BoundaryError> {
    let effective = match face {
        Face::Y => *pair,
        Face::X => pair.swap_species(),
    };
    build_on_y_face(&effective, rates, face)
}

fn build_on_y_face(
    pair: &EnvironmentPair,
    rates: &SwitchRates,
    face: Face,
) -> Result<BoundaryMeasure, BoundaryError> {
    let recip = [pair.env0.a(), pair.env1.a()];
    let growth = [pair.env0.alpha(), pair.env1.alpha()];
    let p = [1.0 / recip[0], 1.0 / recip[1]];
    let gamma = [rates.lambda0() / growth[0], rates.lambda1() / growth[1]];

    if (p[0] - p[1]).abs() <= DEGENERACY_TOL * p[0].max(p[1]) {
        return Ok(BoundaryMeasure {
            face,
            rates: *rates,
            kind: MeasureKind::Dirac {
                p: 0.5 * (p[0] + p[1]),
                nu1: rates.mixture(),
            },
        });
    }

    let support = (p[0].min(p[1]), p[0].max(p[1]));
    let cm = ContinuousMeasure {
        p,
        recip,
        gamma,
        growth,
        support,
        mass: [f64::NAN, f64::NAN],
        log_norm_c: f64::NAN,
        rel_change: 0.0,
    };
    let vs = cm.vspace();

    // Per-regime mass components: the density of regime i carries one extra
    // power of the distance to the *other* regime's coefficient.
    let q1 = expect_singular(
        |v| (v - recip[0]).abs() / growth[1],
        vs.lo,
        vs.hi,
        vs.exp_lo,
        vs.exp_hi,
        DEFAULT_REL_TOL,
    )?;
    let q0 = expect_singular(
        |v| (v - recip[1]).abs() / growth[0],
        vs.lo,
        vs.hi,
        vs.exp_lo,
        vs.exp_hi,
        DEFAULT_REL_TOL,
    )?;
    let total = q0.value + q1.value;
    let mass = [q0.value / total, q1.value / total];

    let want = [
        rates.lambda1() / rates.intensity(),
        rates.lambda0() / rates.intensity(),
    ];
    if (mass[0] - want[0]).abs() > 1e-6 || (mass[1] - want[1]).abs() > 1e-6 {
        return Err(BoundaryError::NormalizationFailure {
            got0: mass[0],
            got1: mass[1],
            want0: want[0],
            want1: want[1],
        });
    }

    // 1/C = p0 p1 * Theta * E[mden]; Theta collects the constant factors of
    // the kernel after the reciprocal substitution.
    let span = vs.hi - vs.lo;
    let log_theta = (gamma[0] - 1.0) * p[0].ln()
        + (gamma[1] - 1.0) * p[1].ln()
        + (gamma[0] + gamma[1] - 1.0) * span.ln()
        + ln_beta(vs.exp_lo + 1.0, vs.exp_hi + 1.0);
    let log_norm_c = -((p[0] * p[1]).ln() + log_theta + total.ln());

    Ok(BoundaryMeasure {
        face,
        rates: *rates,
        kind: MeasureKind::Continuous(ContinuousMeasure {
            mass,
            log_norm_c,
            rel_change: q0.rel_change.max(q1.rel_change),
            ..cm
        }),
    })
}

/// Reciprocal-variable view of the support: the interval between the two
/// competition coefficients, with the kernel exponent `gamma_i - 1`
/// attached to the end owned by regime `i`.
struct VSpace {
    lo: f64,
    hi: f64,
    exp_lo: f64,
    exp_hi: f64,
    /// True when the lower v-endpoint is regime 0's coefficient.
    lo_is_regime0: bool,
}

impl ContinuousMeasure {
    fn vspace(&self) -> VSpace {
        if self.recip[0] < self.recip[1] {
            VSpace {
                lo: self.recip[0],
                hi: self.recip[1],
                exp_lo: self.gamma[0] - 1.0,
                exp_hi: self.gamma[1] - 1.0,
                lo_is_regime0: true,
            }
        } else {
            VSpace {
                lo: self.recip[1],
                hi: self.recip[0],
                exp_lo: self.gamma[1] - 1.0,
                exp_hi: self.gamma[0] - 1.0,
                lo_is_regime0: false,
            }
        }
    }

    /// Jacobi exponents for expectations against the regime-`i` density:
    /// the exponent at the other regime's end gains one.
    fn vspace_for_regime(&self, regime: usize) -> VSpace {
        let mut vs = self.vspace();
        let other_is_lo = vs.lo_is_regime0 == (regime == 1);
        if other_is_lo {
            vs.exp_lo += 1.0;
        } else {
            vs.exp_hi += 1.0;
        }
        vs
    }

    /// Canonically ordered support `(p_lo, p_hi)`.
    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    /// Equilibrium `p_i` of regime `i`.
    pub fn p(&self, regime: usize) -> f64 {
        self.p[regime]
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma[0]
    }

    pub fn gamma1(&self) -> f64 {
        self.gamma[1]
    }

    /// Growth rate entering the regime-`i` density prefactor.
    pub fn growth(&self, regime: usize) -> f64 {
        self.growth[regime]
    }

    /// Mass of regime `i`; equals `lambda_(1-i) / (lambda0 + lambda1)`.
    pub fn mass(&self, regime: usize) -> f64 {
        self.mass[regime]
    }

    /// `ln` of the normalization constant `C`.
    pub fn log_norm_c(&self) -> f64 {
        self.log_norm_c
    }

    /// The normalization constant itself. Overflows to `0`/`inf` outside
    /// roughly `|ln C| < 709`; prefer [`log_norm_c`](Self::log_norm_c).
    pub fn norm_c(&self) -> f64 {
        self.log_norm_c.exp()
    }

    /// Worst relative change reported by the construction quadratures.
    pub fn rel_change(&self) -> f64 {
        self.rel_change
    }

    /// `ln h_regime(x)` for interior `x`, assembled in log space.
    fn ln_density(&self, x: f64, regime: usize) -> f64 {
        let other = 1 - regime;
        let s_self = self.gamma[regime] - 1.0;
        let s_other = self.gamma[other];
        self.log_norm_c + (self.p[regime] / self.growth[regime]).ln()
            + s_self * (x - self.p[regime]).abs().ln()
            + s_other * (x - self.p[other]).abs().ln()
            - (1.0 + self.gamma[0] + self.gamma[1]) * x.ln()
    }
}

impl BoundaryMeasure {
    pub fn face(&self) -> Face {
        self.face
    }

    pub fn rates(&self) -> &SwitchRates {
        &self.rates
    }

    pub fn kind(&self) -> &MeasureKind {
        &self.kind
    }

    /// The continuous branch, if this measure has densities.
    pub fn continuous(&self) -> Option<&ContinuousMeasure> {
        match &self.kind {
            MeasureKind::Continuous(c) => Some(c),
            MeasureKind::Dirac { .. } => None,
        }
    }

    fn continuous_or_err(&self) -> Result<&ContinuousMeasure, BoundaryError> {
        self.continuous().ok_or(BoundaryError::DiracMeasure)
    }

    /// Mass carried by regime `i` (`nu_i` on the point-mass branch).
    pub fn regime_mass(&self, regime: usize) -> f64 {
        match &self.kind {
            MeasureKind::Dirac { nu1, .. } => {
                if regime == 1 {
                    *nu1
                } else {
                    1.0 - *nu1
                }
            }
            MeasureKind::Continuous(c) => c.mass(regime),
        }
    }

    /// Evaluates the regime-`i` density at `x`.
    ///
    /// Returns zero outside the open support. At a support endpoint the
    /// value is divergence-flagged when the local exponent is negative,
    /// otherwise the finite limit.
    pub fn density(&self, x: f64, regime: usize) -> Result<DensityValue, BoundaryError> {
        let c = self.continuous_or_err()?;
        let (lo, hi) = c.support;
        if x < lo || x > hi {
            return Ok(DensityValue::Finite(0.0));
        }
        // Exactly at an endpoint the local exponent decides.
        if x == c.p[regime] {
            let s = c.gamma[regime] - 1.0;
            if s < 0.0 {
                return Ok(DensityValue::Divergent);
            }
            if s > 0.0 {
                return Ok(DensityValue::Finite(0.0));
            }
            // gamma = 1 exactly: drop the unit-exponent factor.
            let other = 1 - regime;
            let ln = c.log_norm_c + (c.p[regime] / c.growth[regime]).ln()
                + c.gamma[other] * (x - c.p[other]).abs().ln()
                - (1.0 + c.gamma[0] + c.gamma[1]) * x.ln();
            return Ok(DensityValue::Finite(ln.exp()));
        }
        if x == c.p[1 - regime] {
            // The other regime's endpoint carries exponent gamma_other > 0.
            return Ok(DensityValue::Finite(0.0));
        }
        Ok(DensityValue::Finite(c.ln_density(x, regime).exp()))
    }

    /// Expectation `E[g(X, I)]` under the measure.
    ///
    /// On the density branch each regime is integrated against its own
    /// Jacobi weight (the per-density endpoint exponents differ by one
    /// between the regimes), then combined with the regime masses.
    pub fn expect<G>(&self, g: G) -> Result<f64, BoundaryError>
    where
        G: Fn(f64, usize) -> f64,
    {
        match &self.kind {
            MeasureKind::Dirac { p, nu1 } => Ok((1.0 - nu1) * g(*p, 0) + nu1 * g(*p, 1)),
            MeasureKind::Continuous(c) => {
                let mut total = 0.0;
                for regime in 0..2 {
                    let vs = c.vspace_for_regime(regime);
                    let q = expect_singular(
                        |v| g(1.0 / v, regime),
                        vs.lo,
                        vs.hi,
                        vs.exp_lo,
                        vs.exp_hi,
                        DEFAULT_REL_TOL,
                    )?;
                    total += c.mass(regime) * q.value;
                }
                Ok(total)
            }
        }
    }

    /// Computes `p0 p1 C ∫ g(x) theta(x) dx` against the shared singular
    /// kernel of the two densities, as a ratio of expectations in the
    /// reciprocal variable (the constant never materializes).
    ///
    /// This is the quantity entering the invasion-rate formula with `g` the
    /// signed quadratic.
    pub fn kernel_integral<G>(&self, g: G) -> Result<Quadrature, BoundaryError>
    where
        G: Fn(f64) -> f64,
    {
        let c = self.continuous_or_err()?;
        let vs = c.vspace();
        let numer = expect_singular(
            |v| g(1.0 / v) * v,
            vs.lo,
            vs.hi,
            vs.exp_lo,
            vs.exp_hi,
            DEFAULT_REL_TOL,
        )?;
        let denom = expect_singular(
            |v| (v - c.recip[0]).abs() / c.growth[1] + (v - c.recip[1]).abs() / c.growth[0],
            vs.lo,
            vs.hi,
            vs.exp_lo,
            vs.exp_hi,
            DEFAULT_REL_TOL,
        )?;
        Ok(Quadrature {
            value: numer.value / denom.value,
            rel_change: numer.rel_change.max(denom.rel_change),
            nodes_used: numer.nodes_used.max(denom.nodes_used),
        })
    }

    /// Mass the regime-`i` density assigns to `[lo, hi]`, by direct
    /// quadrature in the abundance variable (support-endpoint exponents are
    /// attached where the bin touches the support).
    pub fn mass_between(&self, regime: usize, lo: f64, hi: f64) -> Result<f64, BoundaryError> {
        let c = self.continuous_or_err()?;
        let (slo, shi) = c.support;
        let lo = lo.max(slo);
        let hi = hi.min(shi);
        if lo >= hi {
            return Ok(0.0);
        }
        let other = 1 - regime;
        let s_self = c.gamma[regime] - 1.0;
        let s_other = c.gamma[other];
        // Which support endpoint is whose: p[regime] and p[other] are the
        // two ends in some order.
        let exp_at = |endpoint: f64| {
            if endpoint == c.p[regime] {
                s_self
            } else {
                s_other
            }
        };
        let exp_lo = if lo == slo { exp_at(slo) } else { 0.0 };
        let exp_hi = if hi == shi { exp_at(shi) } else { 0.0 };
        // Distance factors absorbed by the rule weight are dropped from the
        // smooth part (they coincide exactly when the bin edge sits on the
        // support endpoint).
        let self_in_weight = (lo == slo && c.p[regime] == slo) || (hi == shi && c.p[regime] == shi);
        let other_in_weight = (lo == slo && c.p[other] == slo) || (hi == shi && c.p[other] == shi);
        let ln_pref = c.log_norm_c + (c.p[regime] / c.growth[regime]).ln();
        let f = |x: f64| {
            let mut ln = ln_pref - (1.0 + c.gamma[0] + c.gamma[1]) * x.ln();
            if !self_in_weight {
                ln += s_self * (x - c.p[regime]).abs().ln();
            }
            if !other_in_weight {
                ln += s_other * (x - c.p[other]).abs().ln();
            }
            ln.exp()
        };
        let q = integrate_singular(f, lo, hi, exp_lo, exp_hi, DEFAULT_REL_TOL)?;
        Ok(q.value)
    }

    /// Marginal (both regimes summed) masses for a full set of bin edges.
    pub fn marginal_bin_masses(&self, edges: &[f64]) -> Result<Vec<f64>, BoundaryError> {
        let mut out = Vec::with_capacity(edges.len().saturating_sub(1));
        for pair in edges.windows(2) {
            let m0 = self.mass_between(0, pair[0], pair[1])?;
            let m1 = self.mass_between(1, pair[0], pair[1])?;
            out.push(m0 + m1);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envmodel::Environment;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn env(vals: [f64; 6]) -> Environment {
        Environment::new(vals[0], vals[1], vals[2], vals[3], vals[4], vals[5]).unwrap()
    }

    fn fixture_pair(rho: f64) -> EnvironmentPair {
        EnvironmentPair::new(
            env([1.0, 1.0, 2.0, 2.0, 1.0, 5.0]),
            env([3.0, 3.0, 4.0, 4.0 + rho, 5.0, 1.0]),
        )
    }

    #[test]
    fn dirac_branch_weights() {
        // Equal carrying capacities: point mass at 1 with chain weights.
        let pair = EnvironmentPair::new(
            env([1.0, 1.0, 2.0, 2.0, 1.0, 5.0]),
            env([1.0, 3.0, 4.0, 7.0, 5.0, 1.0]),
        );
        let rates = SwitchRates::new(2.0, 1.0).unwrap();
        let mu = boundary_measure(&pair, &rates, Face::Y).unwrap();
        match mu.kind() {
            MeasureKind::Dirac { p, nu1 } => {
                assert_relative_eq!(*p, 1.0, epsilon = 1e-14);
                assert_relative_eq!(*nu1, 2.0 / 3.0, epsilon = 1e-14);
            }
            _ => panic!("expected point mass"),
        }
        // Expectations reduce to the weighted sum.
        let val = mu.expect(|x, i| if i == 1 { x } else { 0.0 }).unwrap();
        assert_relative_eq!(val, 2.0 / 3.0, epsilon = 1e-14);
        assert!(mu.density(0.5, 0).is_err());
    }

    #[test]
    fn fixture_continuous_parameters() {
        let rates = SwitchRates::new(1.0, 1.0).unwrap();
        let mu = boundary_measure(&fixture_pair(3.0), &rates, Face::Y).unwrap();
        let c = mu.continuous().unwrap();
        assert_relative_eq!(c.support().0, 1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(c.support().1, 1.0, epsilon = 1e-15);
        assert_relative_eq!(c.gamma0(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(c.gamma1(), 0.2, epsilon = 1e-15);
        // Chain identities.
        assert_relative_eq!(c.mass(0), 0.5, epsilon = 1e-9);
        assert_relative_eq!(c.mass(1), 0.5, epsilon = 1e-9);
    }

    #[test]
    fn mass_identities_on_rate_grid() {
        let pair = fixture_pair(3.0);
        for s in [0.1, 0.5, 0.9] {
            for t in [0.1, 1.0, 10.0, 100.0] {
                let rates = SwitchRates::from_mixture(s, t).unwrap();
                let mu = boundary_measure(&pair, &rates, Face::Y).unwrap();
                let c = mu.continuous().unwrap();
                assert_abs_diff_eq!(
                    c.mass(0),
                    rates.lambda1() / rates.intensity(),
                    epsilon = 1e-9
                );
                assert_abs_diff_eq!(
                    c.mass(1),
                    rates.lambda0() / rates.intensity(),
                    epsilon = 1e-9
                );
            }
        }
    }

    #[test]
    fn density_formula_wiring() {
        // h1(2/3) = C (1/3) (1/3)^(-0.8) (1/3)^1 / (5 (2/3)^2.2) for the
        // rho = 3 fixture at unit rates.
        let rates = SwitchRates::new(1.0, 1.0).unwrap();
        let mu = boundary_measure(&fixture_pair(3.0), &rates, Face::Y).unwrap();
        let c = mu.continuous().unwrap();
        let x: f64 = 2.0 / 3.0;
        let want = c.norm_c() * (1.0 / 3.0) * (1.0f64 / 3.0).powf(-0.8) * (1.0 / 3.0)
            / (5.0 * x.powf(2.2));
        let got = mu.density(x, 1).unwrap().value().unwrap();
        assert_relative_eq!(got, want, max_relative = 1e-12);
    }

    #[test]
    fn density_outside_support_and_endpoint_flags() {
        let rates = SwitchRates::new(1.0, 1.0).unwrap();
        let mu = boundary_measure(&fixture_pair(3.0), &rates, Face::Y).unwrap();
        assert_eq!(mu.density(0.2, 0).unwrap(), DensityValue::Finite(0.0));
        assert_eq!(mu.density(1.5, 1).unwrap(), DensityValue::Finite(0.0));
        // gamma1 = 0.2 < 1: h1 diverges at its own endpoint p1 = 1/3.
        assert!(mu.density(1.0 / 3.0, 1).unwrap().is_divergent());
        // gamma0 = 1: h0 has a finite positive limit at p0 = 1.
        let at_p0 = mu.density(1.0, 0).unwrap().value().unwrap();
        assert!(at_p0.is_finite() && at_p0 > 0.0);
        // The other regime's endpoint always carries a positive exponent.
        assert_eq!(mu.density(1.0, 1).unwrap(), DensityValue::Finite(0.0));
    }

    #[test]
    fn expectation_of_one_and_regime_indicator() {
        let rates = SwitchRates::new(2.0, 3.0).unwrap();
        let mu = boundary_measure(&fixture_pair(3.0), &rates, Face::Y).unwrap();
        assert_relative_eq!(mu.expect(|_, _| 1.0).unwrap(), 1.0, epsilon = 1e-10);
        let ind0 = mu.expect(|_, i| if i == 0 { 1.0 } else { 0.0 }).unwrap();
        assert_relative_eq!(ind0, 3.0 / 5.0, epsilon = 1e-9);
    }

    #[test]
    fn symmetric_pair_density_ratio_at_midpoint() {
        // Equal growth rates and rates: gamma0 = gamma1, so at the support
        // midpoint the distance factors cancel and h0/h1 = (p0/alpha0) /
        // (p1/alpha1) = p0/p1.
        let pair = EnvironmentPair::new(
            env([1.0, 1.0, 2.0, 2.0, 1.0, 5.0]),
            env([3.0, 3.0, 4.0, 7.0, 1.0, 1.0]),
        );
        let rates = SwitchRates::new(1.0, 1.0).unwrap();
        let mu = boundary_measure(&pair, &rates, Face::Y).unwrap();
        let mid = 0.5 * (1.0 + 1.0 / 3.0);
        let h0 = mu.density(mid, 0).unwrap().value().unwrap();
        let h1 = mu.density(mid, 1).unwrap().value().unwrap();
        assert_relative_eq!(h0 / h1, 3.0, max_relative = 1e-12);
    }

    #[test]
    fn x_face_equals_swapped_y_face() {
        let pair = fixture_pair(1.0);
        let rates = SwitchRates::new(0.7, 1.3).unwrap();
        let direct = boundary_measure(&pair, &rates, Face::X).unwrap();
        let swapped = boundary_measure(&pair.swap_species(), &rates, Face::Y).unwrap();
        let (cd, cs) = (
            direct.continuous().unwrap(),
            swapped.continuous().unwrap(),
        );
        assert_eq!(cd.support(), cs.support());
        assert_eq!(cd.gamma0(), cs.gamma0());
        assert_eq!(cd.log_norm_c(), cs.log_norm_c());
        assert_eq!(direct.face(), Face::X);
        // x-face support is between the y-carrying capacities 1/d_i.
        assert_relative_eq!(cd.support().0, 1.0 / 5.0, epsilon = 1e-15);
        assert_relative_eq!(cd.support().1, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn bin_masses_sum_to_one() {
        let rates = SwitchRates::new(1.0, 1.0).unwrap();
        let mu = boundary_measure(&fixture_pair(3.0), &rates, Face::Y).unwrap();
        let (lo, hi) = mu.continuous().unwrap().support();
        let edges: Vec<f64> = (0..=40)
            .map(|k| lo + (hi - lo) * f64::from(k) / 40.0)
            .collect();
        let masses = mu.marginal_bin_masses(&edges).unwrap();
        assert!(masses.iter().all(|&m| m >= 0.0));
        let total: f64 = masses.iter().sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn extreme_rates_stay_finite() {
        // Switching intensity 1e6: the normalization constant is far outside
        // f64 range but masses and kernel ratios must stay clean.
        let rates = SwitchRates::from_mixture(0.5, 1e6).unwrap();
        let mu = boundary_measure(&fixture_pair(3.0), &rates, Face::Y).unwrap();
        let c = mu.continuous().unwrap();
        assert_relative_eq!(c.mass(0), 0.5, epsilon = 1e-9);
        assert!(c.log_norm_c().is_finite());
        let q = mu.kernel_integral(|x| x).unwrap();
        assert!(q.value.is_finite() && q.value > 0.0);
    }
}
