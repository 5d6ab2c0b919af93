//! Monte Carlo estimators with error bars.
//!
//! Replica `i` always draws from stream `i` of the estimator's master seed, so
//! estimators called with the same seed run on the same paths and their
//! results do not depend on the number of worker threads.

mod tube;

pub use tube::TubeSpec;

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use rayon::ThreadPool;

use crate::error::{param, precondition, Error, Result};
use crate::kernel::KernelParams;
use crate::rng::{self, Stream};
use crate::simulate::{self, discounted_occupation, occupation_time, Domain, Path, SimConfig, StopReason};
use crate::stats::{self, CompensatedSum, Z95};

/// Pilot paths used to size the exit-time horizon.
pub const PILOT_PATHS: usize = 100;
/// Horizon as a multiple of the pilot mean exit time.
pub const HORIZON_FACTOR: f64 = 50.0;
/// Censored fraction above which an exit-time estimate is flagged as biased.
pub const CENSORING_FLAG: f64 = 1e-3;
/// Replicas at or below this count get Wilson intervals for binomial estimates.
pub const WILSON_BELOW: usize = 5;
/// Default ball radius for transition-density estimates.
pub const DEFAULT_BANDWIDTH: f64 = 0.05;
/// Minimum replicas for a density estimate.
pub const MIN_DENSITY_REPLICAS: usize = 1000;

const PILOT_SALT: u64 = 0x0091_1707;

pub const CSV_HEADER: &str = "scenario,estimator,params_hash,mean,std_error,n,ci_lo,ci_hi,censored_frac,elapsed";

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateResult {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
    pub ci95: (f64, f64),
    /// Wall time in seconds.
    pub elapsed: f64,
    /// Fraction of replicas stopped by the horizon before the event of
    /// interest; zero for estimators without censoring.
    pub censored_frac: f64,
}

impl EstimateResult {
    pub(crate) fn from_values(values: &[f64], censored: usize, started: Instant) -> Self {
        let (mean, std_error) = stats::mean_and_se(values);
        EstimateResult {
            mean,
            std_error,
            n: values.len(),
            ci95: (mean - Z95 * std_error, mean + Z95 * std_error),
            elapsed: started.elapsed().as_secs_f64(),
            censored_frac: censored as f64 / values.len() as f64,
        }
    }

    /// Proportion estimate with a normal interval, or a Wilson interval when
    /// fewer than [`WILSON_BELOW`] successes or failures were seen. The
    /// interval is clipped to `[0, 1]`.
    pub fn binomial(successes: usize, n: usize, elapsed: f64) -> Self {
        let p = successes as f64 / n as f64;
        let std_error = (p * (1.0 - p) / n as f64).sqrt();
        let ci95 = if successes < WILSON_BELOW || n - successes < WILSON_BELOW {
            stats::wilson(successes, n, Z95)
        } else {
            ((p - Z95 * std_error).max(0.0), (p + Z95 * std_error).min(1.0))
        };
        EstimateResult {
            mean: p,
            std_error,
            n,
            ci95,
            elapsed,
            censored_frac: 0.0,
        }
    }

    fn scaled(mut self, factor: f64) -> Self {
        self.mean *= factor;
        self.std_error *= factor;
        self.ci95 = (self.ci95.0 * factor, self.ci95.1 * factor);
        self
    }

    /// Whether the censored fraction is large enough to bias the mean.
    pub fn censoring_flagged(&self) -> bool {
        self.censored_frac > CENSORING_FLAG
    }

    pub fn ci_excludes_zero(&self) -> bool {
        self.ci95.0 > 0.0
    }

    pub fn csv_row(&self, scenario: &str, estimator: &str, params_hash: &str) -> String {
        format!(
            "{scenario},{estimator},{params_hash},{},{},{},{},{},{},{:.3}",
            self.mean, self.std_error, self.n, self.ci95.0, self.ci95.1, self.censored_frac, self.elapsed
        )
    }
}

/// Runs replicated simulations of one kernel with a fixed master seed.
#[derive(Clone)]
pub struct Estimator {
    params: KernelParams,
    eps_min: f64,
    n: usize,
    seed: u64,
    max_horizon: f64,
    resolvent_tol: f64,
    pool: Option<Arc<ThreadPool>>,
}

impl std::fmt::Debug for Estimator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Estimator")
            .field("params", &self.params)
            .field("eps_min", &self.eps_min)
            .field("n", &self.n)
            .field("seed", &self.seed)
            .finish()
    }
}

impl Estimator {
    pub fn new(params: KernelParams, eps_min: f64, n: usize, seed: u64) -> Result<Self> {
        SimConfig::new(eps_min, 0.0)?;
        if n < 2 {
            return param(format!("at least 2 replicas are needed, got {n}"));
        }
        Ok(Estimator {
            params,
            eps_min,
            n,
            seed,
            max_horizon: 1000.0,
            resolvent_tol: 1e-6,
            pool: None,
        })
    }

    /// Caps the number of worker threads; `0` uses the global pool.
    pub fn with_threads(mut self, threads: usize) -> Result<Self> {
        self.pool = if threads == 0 {
            None
        } else {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::Parameter(format!("cannot build thread pool: {e}")))?;
            Some(Arc::new(pool))
        };
        Ok(self)
    }

    /// Largest horizon any exit-time run may use.
    pub fn with_max_horizon(mut self, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return param("max horizon must be positive and finite");
        }
        self.max_horizon = horizon;
        Ok(self)
    }

    /// Truncation tolerance of the resolvent integral: paths run until
    /// `e^(-λT) = tol`.
    pub fn with_resolvent_tol(mut self, tol: f64) -> Result<Self> {
        if !(tol > 0.0 && tol < 1.0) {
            return param("resolvent tolerance must lie in (0, 1)");
        }
        self.resolvent_tol = tol;
        Ok(self)
    }

    pub fn with_n(mut self, n: usize) -> Result<Self> {
        if n < 2 {
            return param(format!("at least 2 replicas are needed, got {n}"));
        }
        self.n = n;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn eps_min(&self) -> f64 {
        self.eps_min
    }

    /// Maps `f` over replica indices `0..n` on the configured pool, returning
    /// results in index order.
    pub fn replicas<T, F>(&self, n: usize, seed: u64, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(&mut Stream) -> Result<T> + Sync + Send,
    {
        let run = || {
            (0..n as u64)
                .into_par_iter()
                .map(|i| f(&mut rng::stream(seed, i)))
                .collect::<Result<Vec<T>>>()
        };
        match &self.pool {
            Some(pool) => pool.install(run),
            None => run(),
        }
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        self.params.check_point(x, "start point")
    }

    fn check_domain(&self, dom: &Domain, what: &str) -> Result<()> {
        if dom.dim() != self.params.dim() {
            return param(format!("{what} has dimension {} but the kernel has {}", dom.dim(), self.params.dim()));
        }
        Ok(())
    }

    /// Horizon for exit-time runs from `x` out of `dom`: a multiple of the
    /// mean exit time of [`PILOT_PATHS`] pilot paths, capped by the max horizon.
    pub fn exit_horizon(&self, x: &[f64], dom: &Domain) -> Result<f64> {
        let cfg = SimConfig::new(self.eps_min, self.max_horizon)?.with_domain(dom.clone());
        let pilot_seed = rng::derive_seed(self.seed, PILOT_SALT);
        let times = self.replicas(PILOT_PATHS, pilot_seed, |rng| {
            Ok(simulate::simulate_path(&self.params, x, &cfg, rng)?.t_final())
        })?;
        let mean = times.iter().copied().collect::<CompensatedSum>().value() / PILOT_PATHS as f64;
        Ok((HORIZON_FACTOR * mean).min(self.max_horizon))
    }

    /// Simulates the `n` replica paths from `x` stopped on leaving `dom` and
    /// applies `f` to each; returns the values and the number of censored paths.
    pub fn exit_replicas<T, F>(&self, x: &[f64], dom: &Domain, f: F) -> Result<(Vec<T>, usize)>
    where
        T: Send,
        F: Fn(&Path) -> Result<T> + Sync + Send,
    {
        self.check_point(x)?;
        self.check_domain(dom, "domain")?;
        if !dom.contains(x) {
            return precondition("start point lies outside the domain");
        }
        let horizon = self.exit_horizon(x, dom)?;
        let cfg = SimConfig::new(self.eps_min, horizon)?.with_domain(dom.clone());
        let out = self.replicas(self.n, self.seed, |rng| {
            let path = simulate::simulate_path(&self.params, x, &cfg, rng)?;
            Ok((f(&path)?, path.stop_reason() == StopReason::HorizonReached))
        })?;
        let censored = out.iter().filter(|(_, c)| *c).count();
        Ok((out.into_iter().map(|(v, _)| v).collect(), censored))
    }

    /// Mean exit time from `dom` started at `x`. Censored paths contribute
    /// the horizon.
    pub fn mean_exit_time(&self, x: &[f64], dom: &Domain) -> Result<EstimateResult> {
        let started = Instant::now();
        let (times, censored) = self.exit_replicas(x, dom, |p| Ok(p.t_final()))?;
        Ok(EstimateResult::from_values(&times, censored, started))
    }

    /// Exit times of the individual replicas.
    pub fn exit_time_samples(&self, x: &[f64], dom: &Domain) -> Result<Vec<f64>> {
        Ok(self.exit_replicas(x, dom, |p| Ok(p.t_final()))?.0)
    }

    /// Probability of entering `target` before leaving `confine`. A start
    /// inside `target` counts as a hit.
    pub fn hitting_prob(&self, x: &[f64], target: &Domain, confine: &Domain) -> Result<EstimateResult> {
        let started = Instant::now();
        self.check_domain(target, "target")?;
        if !confine.contains_domain(target) {
            return precondition("target must lie inside the confining domain");
        }
        let start_hit = target.contains(x);
        let (hits, censored) = self.exit_replicas(x, confine, |p| {
            if start_hit {
                return Ok(true);
            }
            let exit = if p.stop_reason() == StopReason::DomainExited {
                p.t_final()
            } else {
                f64::INFINITY
            };
            Ok(simulate::hitting_time(p, target).is_some_and(|t| t < exit))
        })?;
        let successes = hits.iter().filter(|h| **h).count();
        let mut result = EstimateResult::binomial(successes, self.n, started.elapsed().as_secs_f64());
        result.censored_frac = censored as f64 / self.n as f64;
        Ok(result)
    }

    fn check_occupation_geometry(&self, x: &[f64], cube: &Domain, set: &Domain) -> Result<()> {
        let Domain::Cube { center, side } = cube else {
            return param("occupation estimates need a cube as the confining domain");
        };
        self.check_domain(set, "set")?;
        if !cube.contains_domain(set) {
            return precondition("set must lie inside the cube");
        }
        if !Domain::cube(center.clone(), side / 2.0)?.contains(x) {
            return precondition("start point must lie in the concentric cube of half the side");
        }
        Ok(())
    }

    /// Expected time spent in `set` before leaving the cube `cube`.
    pub fn occupation(&self, x: &[f64], cube: &Domain, set: &Domain) -> Result<EstimateResult> {
        Ok(self.occupation_many(x, cube, std::slice::from_ref(set))?.remove(0))
    }

    /// Occupation estimates for several sets computed on the same paths.
    pub fn occupation_many(&self, x: &[f64], cube: &Domain, sets: &[Domain]) -> Result<Vec<EstimateResult>> {
        let started = Instant::now();
        self.check_point(x)?;
        self.check_domain(cube, "cube")?;
        for set in sets {
            self.check_occupation_geometry(x, cube, set)?;
        }
        let (values, censored) = self.exit_replicas(x, cube, |p| {
            sets.iter()
                .map(|set| occupation_time(p, set, p.t_final()))
                .collect::<Result<Vec<f64>>>()
        })?;
        Ok((0..sets.len())
            .map(|k| {
                let column: Vec<f64> = values.iter().map(|v| v[k]).collect();
                EstimateResult::from_values(&column, censored, started)
            })
            .collect())
    }

    /// `E^x ∫_0^∞ e^(-λt) 1_set(X_t) dt`, truncated at `e^(-λT) = tol`. The
    /// discarded tail, at most `tol/λ`, is added to the upper CI bound.
    pub fn resolvent(&self, x: &[f64], set: &Domain, lambda: f64) -> Result<EstimateResult> {
        let started = Instant::now();
        if !(lambda > 0.0 && lambda.is_finite()) {
            return param(format!("lambda must be positive, got {lambda}"));
        }
        self.check_point(x)?;
        self.check_domain(set, "set")?;
        let horizon = (1.0 / self.resolvent_tol).ln() / lambda;
        let cfg = SimConfig::new(self.eps_min, horizon)?;
        let values = self.replicas(self.n, self.seed, |rng| {
            let path = simulate::simulate_path(&self.params, x, &cfg, rng)?;
            Ok(discounted_occupation(&path, set, lambda, horizon))
        })?;
        let mut result = EstimateResult::from_values(&values, 0, started);
        result.ci95.1 += self.resolvent_tol / lambda;
        Ok(result)
    }

    /// Endpoints `X_t` of the replica paths started at `x`.
    pub fn endpoints(&self, t: f64, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check_point(x)?;
        let cfg = SimConfig::new(self.eps_min, t)?;
        self.replicas(self.n, self.seed, |rng| {
            Ok(simulate::simulate_path(&self.params, x, &cfg, rng)?.last_position().to_vec())
        })
    }

    /// Transition density `p(t, x, y)` estimated by the fraction of endpoints
    /// in the ball `B(y, h)` divided by its volume. The O(h) smoothing bias is
    /// not modeled.
    pub fn density(&self, t: f64, x: &[f64], y: &[f64], h: f64) -> Result<EstimateResult> {
        let started = Instant::now();
        self.check_density_args(t, h)?;
        self.check_point(y)?;
        let ball = Domain::ball(y.to_vec(), h)?;
        let hits = self.endpoints(t, x)?.iter().filter(|e| ball.contains(e)).count();
        Ok(EstimateResult::binomial(hits, self.n, started.elapsed().as_secs_f64()).scaled(1.0 / ball.volume()))
    }

    /// Density of the process killed on leaving `killing`, estimated as for
    /// [`Estimator::density`] over paths that have not left by time `t`.
    pub fn killed_density(&self, t: f64, x: &[f64], y: &[f64], h: f64, killing: &Domain) -> Result<EstimateResult> {
        let started = Instant::now();
        self.check_density_args(t, h)?;
        self.check_point(x)?;
        self.check_point(y)?;
        self.check_domain(killing, "killing domain")?;
        if !killing.contains(x) {
            return precondition("start point lies outside the killing domain");
        }
        let ball = Domain::ball(y.to_vec(), h)?;
        let cfg = SimConfig::new(self.eps_min, t)?.with_domain(killing.clone());
        let hits = self.replicas(self.n, self.seed, |rng| {
            let p = simulate::simulate_path(&self.params, x, &cfg, rng)?;
            Ok(p.stop_reason() == StopReason::HorizonReached && ball.contains(p.last_position()))
        })?;
        let hits = hits.iter().filter(|h| **h).count();
        Ok(EstimateResult::binomial(hits, self.n, started.elapsed().as_secs_f64()).scaled(1.0 / ball.volume()))
    }

    fn check_density_args(&self, t: f64, h: f64) -> Result<()> {
        if !(t > 0.0) {
            return param(format!("density time must be positive, got {t}"));
        }
        if !(h > 0.0) {
            return param(format!("bandwidth must be positive, got {h}"));
        }
        if self.n < MIN_DENSITY_REPLICAS {
            return param(format!("density estimates need at least {MIN_DENSITY_REPLICAS} replicas"));
        }
        Ok(())
    }

    /// `sup_{s ≤ t₀} |X_s - φ(s)|` for each replica path started at `x = φ(0)`.
    pub fn tube_distances(&self, x: &[f64], tube: &TubeSpec) -> Result<Vec<f64>> {
        self.check_point(x)?;
        if tube.dim() != self.params.dim() {
            return param("tube dimension differs from the kernel dimension");
        }
        if x != tube.start() {
            return precondition("start point must equal the first waypoint of the tube");
        }
        let cfg = SimConfig::new(self.eps_min, tube.t_end())?;
        self.replicas(self.n, self.seed, |rng| {
            Ok(tube.sup_distance(&simulate::simulate_path(&self.params, x, &cfg, rng)?))
        })
    }

    /// Probability that the path stays within `ε` of `φ` up to `t₀`.
    pub fn tube_probability(&self, x: &[f64], tube: &TubeSpec) -> Result<EstimateResult> {
        let started = Instant::now();
        let dists = self.tube_distances(x, tube)?;
        Ok(tube_result(&dists, tube.epsilon(), started.elapsed().as_secs_f64()))
    }
}

/// Tube probability at radius `epsilon` from precomputed sup distances.
pub fn tube_result(distances: &[f64], epsilon: f64, elapsed: f64) -> EstimateResult {
    let inside = distances.iter().filter(|d| **d < epsilon).count();
    EstimateResult::binomial(inside, distances.len(), elapsed)
}
