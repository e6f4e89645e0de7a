//! Event-driven simulation of the switched Lotka-Volterra process
//! `(X_t, Y_t, I_t)` and the statistics the limit theorems speak about.
//!
//! Between jumps of the regime chain the abundances follow the active
//! environment's flow, integrated in log coordinates: extinction is
//! exponential decay over hundreds of time units, so log coordinates keep
//! abundances positive by construction, make Lyapunov slopes directly
//! readable, and leave the extinction faces exactly invariant (a `-inf`
//! log-abundance stays `-inf`).
//!
//! On a face the dynamics reduce to a switched one-dimensional logistic
//! equation with a closed-form solution per regime, so the boundary
//! simulator uses exact segments: no integrator error, and occupation
//! histograms and ergodic averages are computed exactly per segment rather
//! than from discrete samples.
//!
//! # Reproducibility contract
//!
//! All randomness comes from `ChaCha12` seeded with a caller-supplied
//! 64-bit seed via `seed_from_u64`. Sojourn times are inverse-CDF
//! exponentials `-ln(1 - u) / rate` with `u` the generator's standard
//! 53-bit uniform in `[0, 1)`. Ensemble replicate `k` uses the stream seed
//! [`replicate_seed`]`(seed, k)`, a SplitMix64 finalizer of
//! `seed + (k + 1) * 0x9E3779B97F4A7C15`; replicates are therefore
//! independent of thread scheduling, and ensemble statistics are reduced in
//! replicate order so floating-point sums are reproducible too.

mod rk45;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::envmodel::{Environment, EnvironmentPair, Species, SwitchRates};
use rk45::Dopri5;

/// Integrator tolerances, extinction bookkeeping, and sampling cadence.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SimConfig {
    /// Relative tolerance of the adaptive integrator.
    pub ode_rel_tol: f64,
    /// Absolute tolerance of the adaptive integrator.
    pub ode_abs_tol: f64,
    /// Hard cap on a single integrator step.
    pub max_step: f64,
    /// Log-abundance below which a species is counted as extinct.
    pub extinction_log_threshold: f64,
    /// Number of consecutive below-threshold record points that declare
    /// extinction.
    pub extinction_consecutive: usize,
    /// State-space box parameter; only used to size default histogram grids.
    pub eta: f64,
    /// Sampling interval of the recorded trajectory.
    pub record_dt: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            ode_rel_tol: 1e-8,
            ode_abs_tol: 1e-10,
            max_step: f64::INFINITY,
            extinction_log_threshold: 1e-9f64.ln(),
            extinction_consecutive: 10,
            eta: 1e-3,
            record_dt: 0.05,
        }
    }
}

impl SimConfig {
    fn validate(&self) -> Result<(), PdmpError> {
        if !(self.ode_rel_tol > 0.0 && self.ode_abs_tol > 0.0 && self.record_dt > 0.0) {
            return Err(PdmpError::InvalidInput(
                "tolerances and record_dt must be positive".into(),
            ));
        }
        if self.extinction_log_threshold >= 0.0 {
            return Err(PdmpError::InvalidInput(
                "extinction_log_threshold must be negative".into(),
            ));
        }
        if self.eta.is_nan() || self.eta <= 0.0 {
            return Err(PdmpError::InvalidInput("eta must be positive".into()));
        }
        Ok(())
    }
}

/// One recorded point of a simulated path.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrajectoryState {
    pub t: f64,
    pub log_x: f64,
    pub log_y: f64,
    pub regime: usize,
}

impl TrajectoryState {
    pub fn x(&self) -> f64 {
        self.log_x.exp()
    }

    pub fn y(&self) -> f64 {
        self.log_y.exp()
    }

    fn log_abundance(&self, species: Species) -> f64 {
        match species {
            Species::X => self.log_x,
            Species::Y => self.log_y,
        }
    }
}

/// A simulated path: samples on the record grid, the jump times of the
/// regime chain, and the extinction flags raised along the way.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<TrajectoryState>,
    pub jump_times: Vec<f64>,
    pub regime0: usize,
    pub seed: u64,
    pub config: SimConfig,
    /// Times at which x respectively y were declared extinct (the sustained
    /// threshold rule), if they were.
    pub extinct_x: Option<f64>,
    pub extinct_y: Option<f64>,
}

impl Trajectory {
    pub fn extinction_time(&self, species: Species) -> Option<f64> {
        match species {
            Species::X => self.extinct_x,
            Species::Y => self.extinct_y,
        }
    }

    /// Inter-jump gaps grouped by the regime active during the gap. The
    /// final censored gap (cut off by the horizon) is excluded.
    pub fn regime_gaps(&self) -> [Vec<f64>; 2] {
        regime_gaps(&self.jump_times, self.regime0)
    }
}

fn regime_gaps(jump_times: &[f64], regime0: usize) -> [Vec<f64>; 2] {
    let mut gaps = [Vec::new(), Vec::new()];
    let mut prev = 0.0;
    let mut regime = regime0;
    for &t in jump_times {
        gaps[regime].push(t - prev);
        prev = t;
        regime = 1 - regime;
    }
    gaps
}

/// Errors from the simulators and estimators.
#[derive(Debug, Error)]
pub enum PdmpError {
    #[error("invalid simulation input: {0}")]
    InvalidInput(String),
    /// The adaptive integrator underflowed its step size; carries the
    /// partial trajectory up to the failure time.
    #[error("integrator step underflow at t = {t}")]
    IntegratorFailure { t: f64, trajectory: Box<Trajectory> },
    /// The species hit the extinction floor inside the requested fit
    /// window; the estimate is computed on the pre-flag segment.
    #[error("extinction floor reached at t = {at}; slope fitted on the pre-flag segment")]
    ExtinctFloor { at: f64, estimate: SlopeEstimate },
    #[error("not enough finite samples in the fit window")]
    WindowTooShort,
}

/// Per-replicate stream seed: SplitMix64 finalizer over the master seed and
/// the replicate index.
pub fn replicate_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn exp_draw<R: Rng>(rng: &mut R, rate: f64) -> f64 {
    let u: f64 = rng.gen();
    -(1.0 - u).ln() / rate
}

fn log_field(env: &Environment) -> impl Fn([f64; 2]) -> [f64; 2] + '_ {
    move |ly: [f64; 2]| {
        let x = ly[0].exp();
        let y = ly[1].exp();
        [
            env.alpha() * (1.0 - env.a() * x - env.b() * y),
            env.beta() * (1.0 - env.c() * x - env.d() * y),
        ]
    }
}

/// Simulates the switched process from `(x0, y0)` in `regime0` up to
/// `horizon`, recording on the `record_dt` grid.
///
/// Identical inputs and seed reproduce the trajectory bit for bit. A zero
/// initial abundance is honored exactly: its log-coordinate stays `-inf`
/// and the other species follows the switched logistic flow.
#[allow(clippy::too_many_arguments)]
pub fn simulate(
    pair: &EnvironmentPair,
    rates: &SwitchRates,
    x0: f64,
    y0: f64,
    regime0: usize,
    horizon: f64,
    seed: u64,
    cfg: &SimConfig,
) -> Result<Trajectory, PdmpError> {
    cfg.validate()?;
    if !(x0 >= 0.0 && y0 >= 0.0 && x0.is_finite() && y0.is_finite()) {
        return Err(PdmpError::InvalidInput(
            "initial abundances must be finite and nonnegative".into(),
        ));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(PdmpError::InvalidInput("horizon must be positive".into()));
    }
    if regime0 > 1 {
        return Err(PdmpError::InvalidInput("regime0 must be 0 or 1".into()));
    }

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut y = [x0.ln(), y0.ln()];
    let mut regime = regime0;
    let mut t = 0.0;
    let mut stepper = Dopri5::new(cfg.ode_rel_tol, cfg.ode_abs_tol, cfg.max_step);

    let mut traj = Trajectory {
        samples: Vec::with_capacity((horizon / cfg.record_dt) as usize + 2),
        jump_times: Vec::new(),
        regime0,
        seed,
        config: *cfg,
        extinct_x: None,
        extinct_y: None,
    };
    let mut below = [0usize; 2];
    let record = |traj: &mut Trajectory, below: &mut [usize; 2], t: f64, y: [f64; 2], regime: usize| {
        traj.samples.push(TrajectoryState {
            t,
            log_x: y[0],
            log_y: y[1],
            regime,
        });
        for i in 0..2 {
            if y[i] < cfg.extinction_log_threshold {
                below[i] += 1;
                if below[i] == cfg.extinction_consecutive {
                    let slot = if i == 0 {
                        &mut traj.extinct_x
                    } else {
                        &mut traj.extinct_y
                    };
                    if slot.is_none() {
                        *slot = Some(t);
                    }
                }
            } else {
                below[i] = 0;
            }
        }
    };

    record(&mut traj, &mut below, 0.0, y, regime);
    let mut record_idx = 1u64;
    let mut next_jump = exp_draw(&mut rng, rates.rate(regime));

    while t < horizon {
        let next_record = record_idx as f64 * cfg.record_dt;
        let stop = next_jump.min(next_record).min(horizon);
        {
            let env = pair.env(regime);
            let f = log_field(env);
            if let Err(u) = stepper.integrate_to(&f, &mut y, &mut t, stop) {
                return Err(PdmpError::IntegratorFailure {
                    t: u.t,
                    trajectory: Box::new(traj),
                });
            }
        }
        if stop == next_jump && stop < horizon {
            regime = 1 - regime;
            traj.jump_times.push(stop);
            next_jump = stop + exp_draw(&mut rng, rates.rate(regime));
        }
        if stop == next_record {
            record(&mut traj, &mut below, stop, y, regime);
            record_idx += 1;
        }
    }
    Ok(traj)
}

/// One exact flow segment of the boundary (single-species) process.
#[derive(Debug, Clone, Copy)]
struct Segment {
    t_start: f64,
    x_start: f64,
    x_end: f64,
    regime: usize,
    duration: f64,
    ends_in_jump: bool,
}

/// Exact logistic solution `x(t)` from `x0` under carrying capacity `p` and
/// growth rate `alpha`. The result is pinned between `x0` and `p`, which the
/// exact flow satisfies and rounding must not break (the occupation binning
/// relies on strict monotone containment).
fn logistic_at(x0: f64, p: f64, alpha: f64, t: f64) -> f64 {
    let e = (-alpha * t).exp();
    let x = p * x0 / (x0 + (p - x0) * e);
    if x0 <= p {
        x.clamp(x0, p)
    } else {
        x.clamp(p, x0)
    }
}

/// Time for the logistic flow to reach `xe` from `x0` (requires `xe`
/// strictly between `x0` and `p`).
fn logistic_time_to(x0: f64, p: f64, alpha: f64, xe: f64) -> f64 {
    -((x0 * (p - xe)) / (xe * (p - x0))).ln() / alpha
}

struct BoundarySegments {
    rng: ChaCha12Rng,
    p: [f64; 2],
    alpha: [f64; 2],
    rates: SwitchRates,
    t: f64,
    x: f64,
    regime: usize,
    horizon: f64,
    done: bool,
}

impl BoundarySegments {
    fn new(
        pair: &EnvironmentPair,
        rates: &SwitchRates,
        x0: f64,
        regime0: usize,
        horizon: f64,
        seed: u64,
    ) -> Self {
        Self {
            rng: ChaCha12Rng::seed_from_u64(seed),
            p: [pair.env0.carrying_x(), pair.env1.carrying_x()],
            alpha: [pair.env0.alpha(), pair.env1.alpha()],
            rates: *rates,
            t: 0.0,
            x: x0,
            regime: regime0,
            horizon,
            done: false,
        }
    }
}

impl Iterator for BoundarySegments {
    type Item = Segment;

    fn next(&mut self) -> Option<Segment> {
        if self.done {
            return None;
        }
        let sojourn = exp_draw(&mut self.rng, self.rates.rate(self.regime));
        let remaining = self.horizon - self.t;
        let ends_in_jump = sojourn < remaining;
        let duration = if ends_in_jump { sojourn } else { remaining };
        let x_end = logistic_at(
            self.x,
            self.p[self.regime],
            self.alpha[self.regime],
            duration,
        );
        let seg = Segment {
            t_start: self.t,
            x_start: self.x,
            x_end,
            regime: self.regime,
            duration,
            ends_in_jump,
        };
        self.t += duration;
        self.x = x_end;
        if ends_in_jump {
            self.regime = 1 - self.regime;
        } else {
            self.done = true;
        }
        Some(seg)
    }
}

/// A sampled path of the boundary process.
#[derive(Debug, Clone)]
pub struct BoundaryTrajectory {
    /// `(t, x, regime)` on the record grid.
    pub samples: Vec<(f64, f64, usize)>,
    pub jump_times: Vec<f64>,
    pub regime0: usize,
    pub seed: u64,
}

impl BoundaryTrajectory {
    /// Inter-jump gaps by regime, final censored gap excluded.
    pub fn regime_gaps(&self) -> [Vec<f64>; 2] {
        regime_gaps(&self.jump_times, self.regime0)
    }
}

/// Simulates the single-species boundary process with exact logistic
/// segments between jumps - no integrator error, deterministic per seed.
pub fn simulate_boundary(
    pair: &EnvironmentPair,
    rates: &SwitchRates,
    x0: f64,
    regime0: usize,
    horizon: f64,
    seed: u64,
    record_dt: f64,
) -> BoundaryTrajectory {
    assert!(x0 > 0.0, "boundary process needs a positive abundance");
    let mut samples = vec![(0.0, x0, regime0)];
    let mut jump_times = Vec::new();
    let mut record_idx = 1u64;
    for seg in BoundarySegments::new(pair, rates, x0, regime0, horizon, seed) {
        let seg_end = seg.t_start + seg.duration;
        loop {
            let tr = record_idx as f64 * record_dt;
            if tr > seg_end || tr > horizon {
                break;
            }
            let p = pair.env(seg.regime).carrying_x();
            let alpha = pair.env(seg.regime).alpha();
            let x = logistic_at(seg.x_start, p, alpha, tr - seg.t_start);
            let regime = if tr == seg_end && seg.ends_in_jump {
                1 - seg.regime
            } else {
                seg.regime
            };
            samples.push((tr, x, regime));
            record_idx += 1;
        }
        if seg.ends_in_jump {
            jump_times.push(seg_end);
        }
    }
    BoundaryTrajectory {
        samples,
        jump_times,
        regime0,
        seed,
    }
}

/// Exact occupation histogram of the boundary process over the given bin
/// edges: time in each bin is computed from the logistic crossing times,
/// not from discrete samples. Returns masses normalized to sum to one;
/// values outside the edge range are clamped into the end bins.
pub fn boundary_occupation(
    pair: &EnvironmentPair,
    rates: &SwitchRates,
    x0: f64,
    regime0: usize,
    horizon: f64,
    seed: u64,
    edges: &[f64],
) -> Vec<f64> {
    assert!(edges.len() >= 2, "need at least one bin");
    let n_bins = edges.len() - 1;
    let bin_of = |x: f64| -> usize {
        let idx = edges.partition_point(|&e| e <= x);
        idx.saturating_sub(1).min(n_bins - 1)
    };
    let mut mass = vec![0.0; n_bins];
    for seg in BoundarySegments::new(pair, rates, x0, regime0, horizon, seed) {
        let p = pair.env(seg.regime).carrying_x();
        let alpha = pair.env(seg.regime).alpha();
        if seg.x_start == seg.x_end {
            mass[bin_of(seg.x_start)] += seg.duration;
            continue;
        }
        let upward = seg.x_end > seg.x_start;
        // Interior bin edges crossed by the monotone segment, in motion order.
        let (lo, hi) = if upward {
            (seg.x_start, seg.x_end)
        } else {
            (seg.x_end, seg.x_start)
        };
        let mut stops: Vec<f64> = edges.iter().copied().filter(|&e| e > lo && e < hi).collect();
        if !upward {
            stops.reverse();
        }
        let mut prev_x = seg.x_start;
        let mut prev_t = 0.0;
        for &e in &stops {
            // Rounding at the far end of a long sojourn can push a crossing
            // time past the segment; clamping keeps the partition exact.
            let mut te = logistic_time_to(seg.x_start, p, alpha, e);
            if !te.is_finite() {
                te = seg.duration;
            }
            let te = te.clamp(prev_t, seg.duration);
            mass[bin_of(0.5 * (prev_x + e))] += te - prev_t;
            prev_x = e;
            prev_t = te;
        }
        mass[bin_of(0.5 * (prev_x + seg.x_end))] += seg.duration - prev_t;
    }
    let total: f64 = mass.iter().sum();
    for m in &mut mass {
        *m /= total;
    }
    mass
}

/// Exact time average of the absent species' growth rate
/// `beta_I (1 - c_I X_t)` along a boundary path: segment integrals of the
/// logistic flow are closed-form, so no sampling error enters.
pub fn boundary_growth_average(
    pair: &EnvironmentPair,
    rates: &SwitchRates,
    x0: f64,
    regime0: usize,
    horizon: f64,
    seed: u64,
) -> f64 {
    let mut total = 0.0;
    for seg in BoundarySegments::new(pair, rates, x0, regime0, horizon, seed) {
        let env = pair.env(seg.regime);
        let p = env.carrying_x();
        let delta_log = (seg.x_end / seg.x_start).ln();
        // ∫ beta (1 - c x) dt = beta [(1 - c p) tau + (c p / alpha) d(ln x)].
        total += env.beta()
            * ((1.0 - env.c() * p) * seg.duration + env.c() * p / env.alpha() * delta_log);
    }
    total / horizon
}

/// Time-weighted 2D occupation histogram of a sampled trajectory, one grid
/// per regime, masses summing to one.
#[derive(Debug, Clone, Serialize)]
pub struct OccupationHistogram {
    pub x_edges: Vec<f64>,
    pub y_edges: Vec<f64>,
    /// Row-major `[iy * nx + ix]` masses, one grid per regime.
    pub mass: [Vec<f64>; 2],
    pub total_time: f64,
}

impl OccupationHistogram {
    pub fn nx(&self) -> usize {
        self.x_edges.len() - 1
    }

    pub fn ny(&self) -> usize {
        self.y_edges.len() - 1
    }

    pub fn total_mass(&self) -> f64 {
        self.mass[0].iter().sum::<f64>() + self.mass[1].iter().sum::<f64>()
    }

    /// Sum of masses over bins whose center satisfies the predicate.
    pub fn mass_where<P: Fn(f64, f64) -> bool>(&self, pred: P) -> f64 {
        let mut total = 0.0;
        for iy in 0..self.ny() {
            let yc = 0.5 * (self.y_edges[iy] + self.y_edges[iy + 1]);
            for ix in 0..self.nx() {
                let xc = 0.5 * (self.x_edges[ix] + self.x_edges[ix + 1]);
                if pred(xc, yc) {
                    total += self.mass[0][iy * self.nx() + ix] + self.mass[1][iy * self.nx() + ix];
                }
            }
        }
        total
    }
}

/// Uniform bin edges from 0 to `max`.
pub fn grid_edges(max: f64, n_bins: usize) -> Vec<f64> {
    (0..=n_bins).map(|k| max * k as f64 / n_bins as f64).collect()
}

/// Default histogram extent: 1.2 times the largest single-species
/// equilibrium of either environment, capped at the `1/eta` box bound.
pub fn default_grid_max_with(pair: &EnvironmentPair, eta: f64) -> f64 {
    let extent = 1.2
        * pair
            .env0
            .carrying_x()
            .max(pair.env1.carrying_x())
            .max(pair.env0.carrying_y())
            .max(pair.env1.carrying_y());
    extent.min(1.0 / eta)
}

/// [`default_grid_max_with`] at the default box parameter.
pub fn default_grid_max(pair: &EnvironmentPair) -> f64 {
    default_grid_max_with(pair, SimConfig::default().eta)
}

/// Bins a sampled trajectory with trapezoidal time weights (each sample
/// carries half of its two adjacent inter-sample intervals); out-of-range
/// positions are clamped into the edge bins.
pub fn occupation_histogram(
    traj: &Trajectory,
    x_edges: Vec<f64>,
    y_edges: Vec<f64>,
) -> OccupationHistogram {
    assert!(x_edges.len() >= 2 && y_edges.len() >= 2);
    let nx = x_edges.len() - 1;
    let ny = y_edges.len() - 1;
    let mut hist = OccupationHistogram {
        x_edges,
        y_edges,
        mass: [vec![0.0; nx * ny], vec![0.0; nx * ny]],
        total_time: 0.0,
    };
    let n = traj.samples.len();
    if n < 2 {
        return hist;
    }
    let t0 = traj.samples[0].t;
    let t_end = traj.samples[n - 1].t;
    hist.total_time = t_end - t0;
    let bin = |edges: &[f64], v: f64, count: usize| -> usize {
        edges.partition_point(|&e| e <= v).saturating_sub(1).min(count - 1)
    };
    for (k, s) in traj.samples.iter().enumerate() {
        let w = if k == 0 {
            0.5 * (traj.samples[1].t - t0)
        } else if k == n - 1 {
            0.5 * (t_end - traj.samples[n - 2].t)
        } else {
            0.5 * (traj.samples[k + 1].t - traj.samples[k - 1].t)
        };
        let ix = bin(&hist.x_edges, s.x(), nx);
        let iy = bin(&hist.y_edges, s.y(), ny);
        hist.mass[s.regime][iy * nx + ix] += w / hist.total_time;
    }
    hist
}

/// Fraction of (trapezoid-weighted) time the path spends with
/// `min(x, y) <= eps`: the occupation of the eps-neighborhood of the
/// extinction set.
pub fn near_extinction_fraction(traj: &Trajectory, eps: f64) -> f64 {
    let n = traj.samples.len();
    if n < 2 {
        return 0.0;
    }
    let t0 = traj.samples[0].t;
    let t_end = traj.samples[n - 1].t;
    let mut near = 0.0;
    for (k, s) in traj.samples.iter().enumerate() {
        let w = if k == 0 {
            0.5 * (traj.samples[1].t - t0)
        } else if k == n - 1 {
            0.5 * (t_end - traj.samples[n - 2].t)
        } else {
            0.5 * (traj.samples[k + 1].t - traj.samples[k - 1].t)
        };
        if s.x().min(s.y()) <= eps {
            near += w;
        }
    }
    near / (t_end - t0)
}

/// Least-squares slope of a log-abundance with a block-bootstrap standard
/// error.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SlopeEstimate {
    pub slope: f64,
    pub stderr: f64,
    pub window: (f64, f64),
    pub n_points: usize,
}

const BOOTSTRAP_BLOCKS: usize = 20;
const BOOTSTRAP_RESAMPLES: usize = 200;

/// Fits `log-abundance ~ slope * t` over the retained window
/// `[discard_fraction * T_eff, T_eff]`, where `T_eff` is the extinction
/// flag time if the species was flagged and the trajectory end otherwise.
///
/// The standard error comes from resampling 20 contiguous residual blocks
/// with replacement (200 resamples, deterministic internal stream derived
/// from the trajectory seed). A flagged species yields
/// [`PdmpError::ExtinctFloor`] carrying the pre-flag estimate.
pub fn lyapunov_slope(
    traj: &Trajectory,
    species: Species,
    discard_fraction: f64,
) -> Result<SlopeEstimate, PdmpError> {
    assert!((0.0..1.0).contains(&discard_fraction));
    let t_start = traj.samples.first().map(|s| s.t).unwrap_or(0.0);
    let t_end = traj.samples.last().map(|s| s.t).unwrap_or(0.0);
    assert!(
        (1.0 - discard_fraction) * (t_end - t_start) >= 100.0,
        "trajectory too short for a slope estimate"
    );
    let flag = traj.extinction_time(species);
    let t_eff = flag.unwrap_or(t_end);
    let window = (t_start + discard_fraction * (t_eff - t_start), t_eff);

    let pts: Vec<(f64, f64)> = traj
        .samples
        .iter()
        .filter(|s| s.t >= window.0 && s.t <= window.1)
        .map(|s| (s.t, s.log_abundance(species)))
        .filter(|&(_, v)| v.is_finite())
        .collect();
    if pts.len() < 2 * BOOTSTRAP_BLOCKS {
        return Err(PdmpError::WindowTooShort);
    }

    let (slope, _) = fit_line(&pts);

    // Block bootstrap: a log-abundance is an integrated process, so OLS
    // residuals are long-range dependent and residual resampling would
    // understate the slope error. Per-block slopes over windows much longer
    // than the switching correlation time are close to independent;
    // bootstrap their mean.
    let block_len = pts.len() / BOOTSTRAP_BLOCKS;
    let block_slopes: Vec<f64> = (0..BOOTSTRAP_BLOCKS)
        .map(|b| fit_line(&pts[b * block_len..(b + 1) * block_len]).0)
        .collect();
    let mut rng = ChaCha12Rng::seed_from_u64(replicate_seed(traj.seed, 0x4C59_4150));
    let mut means = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    for _ in 0..BOOTSTRAP_RESAMPLES {
        let total: f64 = (0..BOOTSTRAP_BLOCKS)
            .map(|_| block_slopes[rng.gen_range(0..BOOTSTRAP_BLOCKS)])
            .sum();
        means.push(total / BOOTSTRAP_BLOCKS as f64);
    }
    let mean = means.iter().sum::<f64>() / means.len() as f64;
    let var =
        means.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (means.len() - 1) as f64;

    let estimate = SlopeEstimate {
        slope,
        stderr: var.sqrt(),
        window,
        n_points: pts.len(),
    };
    match flag {
        Some(at) => Err(PdmpError::ExtinctFloor { at, estimate }),
        None => Ok(estimate),
    }
}

fn fit_line(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mean_t = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_v = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for &(t, v) in pts {
        num += (t - mean_t) * (v - mean_v);
        den += (t - mean_t) * (t - mean_t);
    }
    let slope = num / den;
    (slope, mean_v - slope * mean_t)
}

/// How an ensemble replicate ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ReplicateFate {
    ExtinctX,
    ExtinctY,
    Undecided,
}

/// Extinction frequencies over independent replicates, with Wilson 95%
/// intervals.
#[derive(Debug, Clone, Serialize)]
pub struct EnsembleReport {
    pub n_reps: usize,
    pub extinct_x: usize,
    pub extinct_y: usize,
    pub undecided: usize,
    pub p_extinct_x: f64,
    pub p_extinct_y: f64,
    pub p_undecided: f64,
    pub wilson_x: (f64, f64),
    pub wilson_y: (f64, f64),
    /// Mean extinction-flag time over decided replicates.
    pub mean_decision_time: Option<f64>,
}

/// 95% Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054f64;
    let n_f = n as f64;
    let p = k as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let center = (p + z2 / (2.0 * n_f)) / denom;
    let half = z * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Runs `n_reps` independent simulations (replicate `k` seeded with
/// [`replicate_seed`]`(seed, k)`) and classifies each by which species'
/// log-abundance first stayed below the extinction threshold for the
/// configured number of consecutive record points.
///
/// Replicates run in parallel; the reduction is performed in replicate
/// order, so the report is identical regardless of thread count.
#[allow(clippy::too_many_arguments)]
pub fn extinction_ensemble(
    pair: &EnvironmentPair,
    rates: &SwitchRates,
    x0: f64,
    y0: f64,
    regime0: usize,
    n_reps: usize,
    horizon: f64,
    seed: u64,
    cfg: &SimConfig,
) -> Result<EnsembleReport, PdmpError> {
    let fates: Vec<(ReplicateFate, Option<f64>)> = (0..n_reps)
        .into_par_iter()
        .map(|k| {
            let traj = simulate(
                pair,
                rates,
                x0,
                y0,
                regime0,
                horizon,
                replicate_seed(seed, k as u64),
                cfg,
            )?;
            Ok(classify_replicate(&traj))
        })
        .collect::<Result<_, PdmpError>>()?;

    let mut report = EnsembleReport {
        n_reps,
        extinct_x: 0,
        extinct_y: 0,
        undecided: 0,
        p_extinct_x: 0.0,
        p_extinct_y: 0.0,
        p_undecided: 0.0,
        wilson_x: (0.0, 0.0),
        wilson_y: (0.0, 0.0),
        mean_decision_time: None,
    };
    let mut decision_sum = 0.0;
    let mut decided = 0usize;
    for (fate, time) in &fates {
        match fate {
            ReplicateFate::ExtinctX => report.extinct_x += 1,
            ReplicateFate::ExtinctY => report.extinct_y += 1,
            ReplicateFate::Undecided => report.undecided += 1,
        }
        if let Some(t) = time {
            decision_sum += t;
            decided += 1;
        }
    }
    let n_f = n_reps.max(1) as f64;
    report.p_extinct_x = report.extinct_x as f64 / n_f;
    report.p_extinct_y = report.extinct_y as f64 / n_f;
    report.p_undecided = report.undecided as f64 / n_f;
    report.wilson_x = wilson_interval(report.extinct_x, n_reps);
    report.wilson_y = wilson_interval(report.extinct_y, n_reps);
    if decided > 0 {
        report.mean_decision_time = Some(decision_sum / decided as f64);
    }
    Ok(report)
}

fn classify_replicate(traj: &Trajectory) -> (ReplicateFate, Option<f64>) {
    match (traj.extinct_x, traj.extinct_y) {
        (Some(tx), Some(ty)) if tx <= ty => (ReplicateFate::ExtinctX, Some(tx)),
        (Some(_), Some(ty)) => (ReplicateFate::ExtinctY, Some(ty)),
        (Some(tx), None) => (ReplicateFate::ExtinctX, Some(tx)),
        (None, Some(ty)) => (ReplicateFate::ExtinctY, Some(ty)),
        (None, None) => (ReplicateFate::Undecided, None),
    }
}

/// Two-sided Kolmogorov-Smirnov distance between a sample and the
/// exponential distribution with the given rate.
pub fn exponential_ks_distance(gaps: &[f64], rate: f64) -> f64 {
    let mut sorted: Vec<f64> = gaps.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &g) in sorted.iter().enumerate() {
        let cdf = 1.0 - (-rate * g).exp();
        let hi = (i + 1) as f64 / n - cdf;
        let lo = cdf - i as f64 / n;
        d = d.max(hi.abs()).max(lo.abs());
    }
    d
}
