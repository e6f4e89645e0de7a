//! Gauss-Jacobi quadrature on (0, 1) for integrands with endpoint singularities.
//!
//! The rules integrate `u^a * (1-u)^b * f(u)` over (0, 1) exactly for
//! polynomial `f` up to degree `2n - 1`, for any exponents `a, b > -1`.
//! The boundary densities of the switched logistic process have exactly this
//! shape once the support is mapped affinely onto (0, 1), with exponents that
//! may lie anywhere in `(-1, 0]` (integrable singularity) or grow without
//! bound at high switching rates.
//!
//! Nodes and weights come from the Golub-Welsch eigendecomposition of the
//! Jacobi recurrence matrix. The implementation keeps the *normalized*
//! weights (summing to one) together with the log of the total weight mass
//! `ln B(a+1, b+1)`, so expectation-style quadrature stays finite even when
//! the mass itself underflows or overflows a double.

use statrs::function::gamma::ln_gamma;
use thiserror::Error;

/// Node-count schedule used by the adaptive wrappers: start here...
pub const N_MIN: usize = 32;
/// ...and double up to here before giving up.
pub const N_MAX: usize = 4096;

/// Default relative tolerance for the adaptive wrappers.
pub const DEFAULT_REL_TOL: f64 = 1e-11;

/// Errors reported by rule construction and the adaptive integrators.
#[derive(Debug, Clone, Error)]
pub enum QuadratureError {
    /// An endpoint exponent was `<= -1` (or not finite): the weight is not integrable.
    #[error("endpoint exponent {value} out of range: must be finite and > -1")]
    ExponentOutOfRange { value: f64 },
    /// The integration interval was empty or not finite.
    #[error("bad interval [{lo}, {hi}]: need finite lo < hi")]
    BadInterval { lo: f64, hi: f64 },
    /// Doubling the node count did not stabilize the estimate. Carries the
    /// best estimate and the tolerance actually achieved.
    #[error("no convergence at n = {nodes_used}: best estimate {best}, achieved rel change {achieved:.3e}")]
    NoConvergence {
        best: f64,
        achieved: f64,
        nodes_used: usize,
    },
    /// The QL iteration failed to converge on an eigenvalue (pathological input).
    #[error("eigenvalue iteration failed for n = {n}, exponents ({a_exp}, {b_exp})")]
    EigenFailure { n: usize, a_exp: f64, b_exp: f64 },
}

/// A Gauss-Jacobi rule on (0, 1) with weight `u^a_exp * (1-u)^b_exp`.
#[derive(Debug, Clone)]
pub struct JacobiRule {
    a_exp: f64,
    b_exp: f64,
    nodes: Vec<f64>,
    norm_weights: Vec<f64>,
    log_mass: f64,
}

impl JacobiRule {
    /// Exponent attached to the `u = 0` endpoint.
    pub fn a_exp(&self) -> f64 {
        self.a_exp
    }

    /// Exponent attached to the `u = 1` endpoint.
    pub fn b_exp(&self) -> f64 {
        self.b_exp
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// True if the rule has no nodes (never produced by `jacobi_rule`).
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes in strictly increasing order, all inside (0, 1).
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Weights normalized to sum to one (the Beta-distribution view).
    pub fn normalized_weights(&self) -> &[f64] {
        &self.norm_weights
    }

    /// `ln` of the total weight mass `B(a_exp + 1, b_exp + 1)`.
    pub fn log_mass(&self) -> f64 {
        self.log_mass
    }

    /// Raw quadrature weights, summing to `B(a_exp + 1, b_exp + 1)`.
    ///
    /// For extreme exponents the mass itself may overflow or underflow `f64`;
    /// use [`normalized_weights`](Self::normalized_weights) plus
    /// [`log_mass`](Self::log_mass) in that regime.
    pub fn weights(&self) -> Vec<f64> {
        let mass = self.log_mass.exp();
        self.norm_weights.iter().map(|w| w * mass).collect()
    }

    /// Quadrature sum `∫₀¹ f(u) u^a (1-u)^b du`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.log_mass.exp() * self.expect(f)
    }

    /// Normalized quadrature sum `∫₀¹ f(u) u^a (1-u)^b du / B(a+1, b+1)`,
    /// i.e. the expectation of `f` under the Beta(a+1, b+1) distribution.
    pub fn expect<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.norm_weights)
            .map(|(&u, &w)| w * f(u))
            .sum()
    }
}

fn check_exponent(value: f64) -> Result<(), QuadratureError> {
    if !value.is_finite() || value <= -1.0 {
        return Err(QuadratureError::ExponentOutOfRange { value });
    }
    Ok(())
}

/// Builds the `n`-point Gauss-Jacobi rule on (0, 1) with weight
/// `u^a_exp * (1-u)^b_exp`.
///
/// Nodes are eigenvalues of the symmetric tridiagonal Jacobi matrix of the
/// three-term recurrence; normalized weights are squared first components of
/// the eigenvectors. Deterministic for fixed inputs.
///
/// ```
/// let rule = lvswitch::quadrature::jacobi_rule(2, 0.0, 0.0).unwrap();
/// let third = rule.integrate(|u| u * u);
/// assert!((third - 1.0 / 3.0).abs() < 1e-15);
/// ```
pub fn jacobi_rule(n: usize, a_exp: f64, b_exp: f64) -> Result<JacobiRule, QuadratureError> {
    assert!(n >= 1, "node count must be at least 1");
    check_exponent(a_exp)?;
    check_exponent(b_exp)?;

    // Monic Jacobi recurrence on (-1, 1) with weight (1-x)^alpha (1+x)^beta.
    // Our u = 0 endpoint maps to x = -1, so alpha = b_exp and beta = a_exp.
    let alpha = b_exp;
    let beta = a_exp;
    let ab = alpha + beta;

    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n];
    diag[0] = (beta - alpha) / (ab + 2.0);
    for k in 1..n {
        let kf = k as f64;
        let den = 2.0 * kf + ab;
        diag[k] = (beta * beta - alpha * alpha) / (den * (den + 2.0));
        // Recurrence coefficient b_k; k = 1 is written separately because the
        // general form is 0/0 when alpha + beta = -1.
        let bk = if k == 1 {
            4.0 * (1.0 + alpha) * (1.0 + beta) / ((ab + 2.0) * (ab + 2.0) * (ab + 3.0))
        } else {
            4.0 * kf * (kf + alpha) * (kf + beta) * (kf + ab)
                / (den * den * (den + 1.0) * (den - 1.0))
        };
        off[k - 1] = bk.sqrt();
    }

    let mut first = vec![0.0; n];
    first[0] = 1.0;
    tridiag_ql(&mut diag, &mut off, &mut first).map_err(|_| QuadratureError::EigenFailure {
        n,
        a_exp,
        b_exp,
    })?;

    let mut pairs: Vec<(f64, f64)> = diag
        .iter()
        .zip(&first)
        .map(|(&x, &z)| (0.5 * (1.0 + x), z * z))
        .collect();
    pairs.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let (nodes, norm_weights): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let log_mass = ln_beta(a_exp + 1.0, b_exp + 1.0);

    Ok(JacobiRule {
        a_exp,
        b_exp,
        nodes,
        norm_weights,
        log_mass,
    })
}

/// `ln B(p, q)` for `p, q > 0`.
pub fn ln_beta(p: f64, q: f64) -> f64 {
    ln_gamma(p) + ln_gamma(q) - ln_gamma(p + q)
}

/// Implicit-shift QL for a symmetric tridiagonal matrix, accumulating only
/// the first component of each eigenvector (all that Golub-Welsch needs).
///
/// `d` holds the diagonal, `e` the subdiagonal (`e[n-1]` is workspace),
/// `z` the first-row accumulator, initialized to `e_1`. On return `d` holds
/// eigenvalues (unsorted) and `z` the matching first components.
fn tridiag_ql(d: &mut [f64], e: &mut [f64], z: &mut [f64]) -> Result<(), ()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0usize;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(());
            }
            // Wilkinson-style shift from the 2x2 block at l.
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                f = z[i + 1];
                z[i + 1] = s * z[i] + c * f;
                z[i] = c * z[i] - s * f;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Result of an adaptive quadrature: the value, the relative change between
/// the last two refinements (the achieved-tolerance estimate), and the node
/// count of the final rule.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: f64,
    pub rel_change: f64,
    pub nodes_used: usize,
}

fn refine<G>(eval: G, rel_tol: f64) -> Result<Quadrature, QuadratureError>
where
    G: Fn(usize) -> Result<(f64, f64), QuadratureError>,
{
    // eval(n) returns (estimate, L1 scale of the integrand under the rule).
    let (mut prev, mut prev_scale) = eval(N_MIN)?;
    let mut n = N_MIN * 2;
    loop {
        let (cur, scale) = eval(n)?;
        let denom = cur
            .abs()
            .max(prev.abs())
            .max(scale)
            .max(prev_scale)
            .max(f64::MIN_POSITIVE);
        let rel_change = (cur - prev).abs() / denom;
        if rel_change <= rel_tol {
            return Ok(Quadrature {
                value: cur,
                rel_change,
                nodes_used: n,
            });
        }
        if n >= N_MAX {
            return Err(QuadratureError::NoConvergence {
                best: cur,
                achieved: rel_change,
                nodes_used: n,
            });
        }
        prev = cur;
        prev_scale = scale;
        n *= 2;
    }
}

/// Integrates `f(x) * (x - lo)^exp_lo * (hi - x)^exp_hi` over (lo, hi) for a
/// smooth `f`, doubling the Gauss-Jacobi node count from 32 until two
/// successive estimates agree to `rel_tol` (relative to the larger of the
/// estimate and the integrand's L1 mass), capped at 4096 nodes.
///
/// ```
/// use lvswitch::quadrature::integrate_singular;
/// use std::f64::consts::PI;
///
/// // Beta(1/2, 1/2) despite the singular endpoints.
/// let q = integrate_singular(|_| 1.0, 0.0, 1.0, -0.5, -0.5, 1e-11).unwrap();
/// assert!((q.value - PI).abs() < 1e-12);
/// ```
pub fn integrate_singular<F>(
    f: F,
    lo: f64,
    hi: f64,
    exp_lo: f64,
    exp_hi: f64,
    rel_tol: f64,
) -> Result<Quadrature, QuadratureError>
where
    F: Fn(f64) -> f64,
{
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(QuadratureError::BadInterval { lo, hi });
    }
    let span = hi - lo;
    // (x - lo)^p (hi - x)^q dx = span^(p + q + 1) u^p (1 - u)^q du.
    let log_prefactor = (exp_lo + exp_hi + 1.0) * span.ln();
    refine(
        |n| {
            let rule = jacobi_rule(n, exp_lo, exp_hi)?;
            let scale = (log_prefactor + rule.log_mass()).exp();
            let mut sum = 0.0;
            let mut abs_sum = 0.0;
            for (&u, &w) in rule.nodes().iter().zip(rule.normalized_weights()) {
                let v = w * f(lo + span * u);
                sum += v;
                abs_sum += v.abs();
            }
            Ok((scale * sum, scale * abs_sum))
        },
        rel_tol,
    )
}

/// Expectation of a smooth `f` under the probability density proportional to
/// `(x - lo)^exp_lo * (hi - x)^exp_hi` on (lo, hi), with the same doubling
/// schedule as [`integrate_singular`].
///
/// The normalization constant never materializes, so this stays finite for
/// exponents far beyond what the raw integral can represent in double
/// precision.
pub fn expect_singular<F>(
    f: F,
    lo: f64,
    hi: f64,
    exp_lo: f64,
    exp_hi: f64,
    rel_tol: f64,
) -> Result<Quadrature, QuadratureError>
where
    F: Fn(f64) -> f64,
{
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(QuadratureError::BadInterval { lo, hi });
    }
    let span = hi - lo;
    refine(
        |n| {
            let rule = jacobi_rule(n, exp_lo, exp_hi)?;
            let mut sum = 0.0;
            let mut abs_sum = 0.0;
            for (&u, &w) in rule.nodes().iter().zip(rule.normalized_weights()) {
                let v = w * f(lo + span * u);
                sum += v;
                abs_sum += v.abs();
            }
            Ok((sum, abs_sum))
        },
        rel_tol,
    )
}
