//! Two-species competitive Lotka-Volterra dynamics whose parameters switch
//! at random between two environments.
//!
//! A single environment `(a, b, c, d, alpha, beta)` drives the flow
//!
//! ```text
//! dx/dt = alpha x (1 - a x - b y),    dy/dt = beta y (1 - c x - d y),
//! ```
//!
//! and an independent two-state chain with jump rates `lambda0`, `lambda1`
//! selects which environment is active. Even when both environments on
//! their own send species y extinct, the switched process can persist — or
//! kill x instead. The deciding quantities are the two *invasion rates*:
//! the growth rate of each species, at low density, averaged under the
//! explicit invariant law of the process restricted to the other species'
//! extinction face. Their sign pair classifies the long-run outcome, and
//! everything in that chain is computable:
//!
//! - [`envmodel`] — environments, regime classification, the fast-switching
//!   averaged environment, and the sign intervals `I`, `J` of mixing
//!   weights where averaging flips the competitive order;
//! - [`boundary`] — closed-form invariant measures on the extinction faces
//!   (a point mass or a pair of Beta-like densities), with the jump-chain
//!   mass identities enforced as a built-in self-check;
//! - [`invasion`] — the rates `Lambda_x`, `Lambda_y` by dual-route singular
//!   quadrature, frequency limits, outcome classification, zero-set
//!   tracing, and `(s, t)`-plane sign sweeps;
//! - [`pdmp`] — an exact-event simulator of the switched process (adaptive
//!   Runge-Kutta in log coordinates, exact logistic segments on the faces)
//!   with occupation statistics, Lyapunov slopes, and reproducible
//!   extinction ensembles that verify the classification empirically;
//! - [`quadrature`] — Gauss-Jacobi rules for the endpoint-singular
//!   integrals all of the above produce.
//!
//! ```
//! use lvswitch::envmodel::{Environment, EnvironmentPair, SwitchRates};
//! use lvswitch::invasion::{classify_outcome, Outcome};
//!
//! // Both environments favor species x...
//! let pair = EnvironmentPair::new(
//!     Environment::new(1.0, 1.0, 2.0, 2.0, 1.0, 5.0)?,
//!     Environment::new(3.0, 3.0, 4.0, 7.0, 5.0, 1.0)?,
//! );
//! assert!(pair.both_favorable_to_x());
//!
//! // ...yet switching between them 12 times per unit while spending 3/8 of
//! // the time in the second keeps both species alive.
//! let rates = SwitchRates::from_mixture(0.375, 12.0)?;
//! let report = classify_outcome(&pair, &rates)?;
//! assert_eq!(report.outcome, Outcome::Persistence);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```
//!
//! The [`guide`] module carries the long-form walkthrough (the same text as
//! the `book/` directory); its code blocks run as doc-tests. The `lvswitch`
//! binary exposes each analysis as a subcommand with JSON/CSV output.

pub mod boundary;
pub mod envmodel;
pub mod guide;
pub mod invasion;
pub mod pdmp;
pub mod quadrature;
