//! Exact simulation of the truncated jump process and pathwise functionals.
//!
//! Jumps shorter than `eps_min` are dropped, so paths are piecewise constant
//! with finitely many jumps on bounded time intervals. Waiting times are
//! exponential at the rate of the dominating kernel `κ₂|w|^(-d-α)`; each
//! proposal is accepted with probability `a(x, x + w) / κ₂`.

mod domain;
mod functionals;
mod path;

pub use domain::Domain;
pub use functionals::{discounted_occupation, first_exit, hitting_time, occupation_time, Exit};
pub use path::{snap_up, Path, StopReason, TIME_TICK};

use rand::Rng;
use rand_distr::{Distribution, Exp, Exp1};

use crate::error::{param, precondition, Result};
use crate::kernel::{self, KernelParams};

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub eps_min: f64,
    /// Horizon, rounded up to the time grid.
    pub t_max: f64,
    pub stop_domain: Option<Domain>,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(eps_min: f64, t_max: f64) -> Result<Self> {
        if !(eps_min > 0.0 && eps_min < 1.0) {
            return param(format!("eps_min must lie in (0, 1), got {eps_min}"));
        }
        if !(t_max >= 0.0 && t_max.is_finite()) {
            return param(format!("t_max must be finite and nonnegative, got {t_max}"));
        }
        Ok(SimConfig {
            eps_min,
            t_max: snap_up(t_max),
            stop_domain: None,
            seed: 0,
        })
    }

    /// Config whose cutoff discards at most the default quadratic variation.
    pub fn with_default_cutoff(params: &KernelParams, t_max: f64) -> Result<Self> {
        Self::new(kernel::eps_min_for_variation(params, kernel::DEFAULT_DISCARDED_VARIATION), t_max)
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.stop_domain = Some(domain);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_horizon(mut self, t_max: f64) -> Result<Self> {
        let fresh = SimConfig::new(self.eps_min, t_max)?;
        self.t_max = fresh.t_max;
        Ok(self)
    }

    fn check(&self, params: &KernelParams, x0: &[f64]) -> Result<()> {
        params.check_point(x0, "start point")?;
        if let Some(dom) = &self.stop_domain {
            if dom.dim() != params.dim() {
                return param("stop domain dimension differs from the kernel dimension");
            }
            if !dom.contains(x0) {
                return precondition("start point lies outside the stop domain");
            }
        }
        Ok(())
    }
}

/// Next event time on the grid, strictly after `t`.
fn advance(t: f64, wait: f64) -> f64 {
    snap_up(t + wait).max(t + TIME_TICK)
}

fn exp_clock(rate: f64) -> Exp<f64> {
    Exp::new(rate).expect("jump rates are positive and finite")
}

/// Simulates one path of the process with kernel `J · 1{|w| ≥ eps_min}`.
pub fn simulate_path<R: Rng + ?Sized>(params: &KernelParams, x0: &[f64], cfg: &SimConfig, rng: &mut R) -> Result<Path> {
    cfg.check(params, x0)?;
    let d = params.dim();
    let clock = exp_clock(params.dominating_rate(cfg.eps_min, 1.0));
    let mut path = Path::start(d, x0);
    let mut x = x0.to_vec();
    let mut y = vec![0.0; d];
    let mut w = vec![0.0; d];
    let mut t = 0.0;
    loop {
        t = advance(t, clock.sample(rng));
        if t > cfg.t_max {
            path.finish(cfg.t_max, StopReason::HorizonReached);
            return Ok(path);
        }
        params.propose(cfg.eps_min, 1.0, rng, &mut w);
        for i in 0..d {
            y[i] = x[i] + w[i];
        }
        if !params.is_constant() && rng.random::<f64>() * params.kappa2() >= params.modulation(&x, &y) {
            continue;
        }
        std::mem::swap(&mut x, &mut y);
        path.push(t, &x);
        if cfg.stop_domain.as_ref().is_some_and(|dom| !dom.contains(&x)) {
            path.finish(t, StopReason::DomainExited);
            return Ok(path);
        }
    }
}

/// A large jump added by the layered construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Insertion {
    pub time: f64,
    pub displacement: Vec<f64>,
}

/// Bookkeeping of the layered construction along one path.
#[derive(Debug, Clone, PartialEq)]
pub struct MeyerState {
    pub beta: f64,
    /// Unit exponential clocks, in the order they were drawn.
    pub clocks: Vec<f64>,
    /// Large-jump compensator `C` accumulated along the path up to `t_final`.
    pub compensator: f64,
    pub insertions: Vec<Insertion>,
}

/// Builds a path by simulating the process restricted to jumps in
/// `[eps_min, beta)` and inserting the jumps of length in `[beta, 1)` when the
/// accumulated compensator crosses successive exponential clocks.
///
/// Between events the position is constant, so the compensator grows linearly
/// at slope `large_jump_rate(x, beta)` and crossing times are solved exactly.
/// After each insertion the compensator restarts against a fresh clock.
pub fn meyer_compose<R: Rng + ?Sized>(
    params: &KernelParams,
    x0: &[f64],
    beta: f64,
    cfg: &SimConfig,
    rng: &mut R,
) -> Result<(Path, MeyerState)> {
    if !(beta > cfg.eps_min && beta < 1.0) {
        return param(format!("beta must lie in (eps_min, 1) = ({}, 1), got {beta}", cfg.eps_min));
    }
    cfg.check(params, x0)?;
    let d = params.dim();
    let small_clock = exp_clock(params.dominating_rate(cfg.eps_min, beta));
    let exits = |x: &[f64]| cfg.stop_domain.as_ref().is_some_and(|dom| !dom.contains(x));

    let mut path = Path::start(d, x0);
    let mut state = MeyerState {
        beta,
        clocks: Vec::new(),
        compensator: 0.0,
        insertions: Vec::new(),
    };
    let mut x = x0.to_vec();
    let mut y = vec![0.0; d];
    let mut w = vec![0.0; d];
    let mut t = 0.0;
    let mut rate = params.large_jump_rate_unchecked(&x, beta);
    // compensator since the last insertion, and the clock it must reach
    let mut since = 0.0;
    let mut clock: f64 = Exp1.sample(rng);
    state.clocks.push(clock);
    let mut next_small = advance(0.0, small_clock.sample(rng));

    loop {
        let end = next_small.min(cfg.t_max);
        if since + rate * (end - t) >= clock {
            let u = snap_up(t + (clock - since) / rate).clamp(t + TIME_TICK, end);
            state.compensator += clock - since;
            params.sample_shell(&x, beta, 1.0, rng, &mut w)?;
            for i in 0..d {
                x[i] += w[i];
            }
            t = u;
            path.push(t, &x);
            state.insertions.push(Insertion {
                time: t,
                displacement: w.clone(),
            });
            if exits(&x) {
                path.finish(t, StopReason::DomainExited);
                return Ok((path, state));
            }
            rate = params.large_jump_rate_unchecked(&x, beta);
            since = 0.0;
            clock = Exp1.sample(rng);
            state.clocks.push(clock);
            if next_small <= t {
                next_small = advance(t, small_clock.sample(rng));
            }
            continue;
        }
        since += rate * (end - t);
        state.compensator += rate * (end - t);
        t = end;
        if next_small > cfg.t_max {
            path.finish(cfg.t_max, StopReason::HorizonReached);
            return Ok((path, state));
        }
        params.propose(cfg.eps_min, beta, rng, &mut w);
        for i in 0..d {
            y[i] = x[i] + w[i];
        }
        next_small = advance(t, small_clock.sample(rng));
        if !params.is_constant() && rng.random::<f64>() * params.kappa2() >= params.modulation(&x, &y) {
            continue;
        }
        std::mem::swap(&mut x, &mut y);
        path.push(t, &x);
        if exits(&x) {
            path.finish(t, StopReason::DomainExited);
            return Ok((path, state));
        }
        if !params.is_constant() {
            rate = params.large_jump_rate_unchecked(&x, beta);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::stats;

    fn iso(dim: usize) -> KernelParams {
        KernelParams::isotropic(dim, 1.0, 1.0).unwrap()
    }

    #[test]
    fn zero_horizon_gives_single_event() {
        let cfg = SimConfig::new(0.01, 0.0).unwrap();
        let p = simulate_path(&iso(1), &[0.3], &cfg, &mut stream(1, 0)).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.stop_reason(), StopReason::HorizonReached);
        let (p, state) = meyer_compose(&iso(1), &[0.3], 0.5, &cfg, &mut stream(1, 0)).unwrap();
        assert_eq!(p.len(), 1);
        assert!(state.insertions.is_empty());
    }

    #[test]
    fn start_outside_stop_domain_is_rejected() {
        let cfg = SimConfig::new(0.01, 1.0)
            .unwrap()
            .with_domain(Domain::ball(vec![0.0], 0.1).unwrap());
        let err = simulate_path(&iso(1), &[0.5], &cfg, &mut stream(1, 0)).unwrap_err();
        assert!(matches!(err, crate::Error::Precondition(_)));
    }

    #[test]
    fn bad_cutoffs_are_rejected() {
        assert!(SimConfig::new(0.0, 1.0).is_err());
        assert!(SimConfig::new(1.0, 1.0).is_err());
        let cfg = SimConfig::new(0.1, 1.0).unwrap();
        assert!(meyer_compose(&iso(1), &[0.0], 0.1, &cfg, &mut stream(1, 0)).is_err());
        assert!(meyer_compose(&iso(1), &[0.0], 0.05, &cfg, &mut stream(1, 0)).is_err());
    }

    #[test]
    fn path_invariants_hold() {
        let params = KernelParams::new(2, 1.3, 1.0, 2.0, crate::kernel::Modulation::DirectionWeighted).unwrap();
        let cfg = SimConfig::new(0.01, 0.5).unwrap();
        for i in 0..20 {
            let p = simulate_path(&params, &[0.0, 0.0], &cfg, &mut stream(3, i)).unwrap();
            let (q, _) = meyer_compose(&params, &[0.0, 0.0], 0.3, &cfg, &mut stream(3, i)).unwrap();
            for path in [&p, &q] {
                assert!(path.times().windows(2).all(|w| w[0] < w[1]));
                assert!(path.t_final() >= path.last_time());
                for w in path.displacements() {
                    let r = kernel::distance(&w, &[0.0, 0.0]);
                    assert!((0.01 * (1.0 - 1e-12)..1.0).contains(&r), "{r}");
                }
            }
        }
    }

    #[test]
    fn same_seed_same_path() {
        let params = KernelParams::new(2, 0.9, 1.0, 3.0, crate::kernel::Modulation::Checkerboard).unwrap();
        let cfg = SimConfig::new(0.02, 1.0).unwrap();
        let a = simulate_path(&params, &[0.1, 0.2], &cfg, &mut stream(42, 7)).unwrap();
        let b = simulate_path(&params, &[0.1, 0.2], &cfg, &mut stream(42, 7)).unwrap();
        assert_eq!(a, b);
        let (c, _) = meyer_compose(&params, &[0.1, 0.2], 0.4, &cfg, &mut stream(42, 7)).unwrap();
        let (e, _) = meyer_compose(&params, &[0.1, 0.2], 0.4, &cfg, &mut stream(42, 7)).unwrap();
        assert_eq!(c, e);
    }

    #[test]
    fn stops_at_first_exit() {
        let dom = Domain::ball(vec![0.0], 0.2).unwrap();
        let cfg = SimConfig::new(0.01, 100.0).unwrap().with_domain(dom.clone());
        for i in 0..50 {
            let p = simulate_path(&iso(1), &[0.0], &cfg, &mut stream(9, i)).unwrap();
            assert_eq!(p.stop_reason(), StopReason::DomainExited);
            assert!(!dom.contains(p.last_position()));
            assert!((0..p.len() - 1).all(|k| dom.contains(p.position(k))));
            assert_eq!(p.t_final(), p.last_time());
        }
    }

    #[test]
    fn jump_count_mean_matches_dominating_rate() {
        // Λ = 2 (1/0.01 - 1) = 198
        let cfg = SimConfig::new(0.01, 1.0).unwrap();
        let n = 10_000;
        let counts: Vec<f64> = (0..n)
            .map(|i| simulate_path(&iso(1), &[0.0], &cfg, &mut stream(2024, i)).unwrap().jumps() as f64)
            .collect();
        let mean = counts.iter().sum::<f64>() / n as f64;
        assert!((mean - 198.0).abs() < 3.0 * (198.0f64 / n as f64).sqrt(), "{mean}");
    }

    #[test]
    fn inserted_large_jumps_are_poisson_with_rate_two() {
        // isotropic d = 1, α = 1, β = 0.5: λ = 2 independent of position
        let cfg = SimConfig::new(0.01, 1.0).unwrap();
        let n = 10_000;
        let total: usize = (0..n)
            .map(|i| {
                meyer_compose(&iso(1), &[0.0], 0.5, &cfg, &mut stream(77, i))
                    .unwrap()
                    .1
                    .insertions
                    .len()
            })
            .sum();
        let mean = total as f64 / n as f64;
        assert!((mean - 2.0).abs() < 0.05, "{mean}");
    }

    #[test]
    fn compensator_tracks_rate_times_horizon() {
        let cfg = SimConfig::new(0.01, 3.0).unwrap();
        let (_, state) = meyer_compose(&iso(1), &[0.0], 0.5, &cfg, &mut stream(1, 1)).unwrap();
        assert!((state.compensator - 6.0).abs() < 1e-9);
        assert!(state.clocks.iter().all(|&c| c > 0.0));
        assert_eq!(state.clocks.len(), state.insertions.len() + 1);
    }

    #[test]
    fn layered_and_direct_exit_times_agree_in_law() {
        let params = iso(2);
        let dom = Domain::ball(vec![0.0, 0.0], 0.3).unwrap();
        let cfg = SimConfig::new(0.01, 50.0).unwrap().with_domain(dom);
        let n = 2000;
        let direct: Vec<f64> = (0..n)
            .map(|i| simulate_path(&params, &[0.0, 0.0], &cfg, &mut stream(5, i)).unwrap().t_final())
            .collect();
        let layered: Vec<f64> = (0..n)
            .map(|i| {
                meyer_compose(&params, &[0.0, 0.0], 0.25, &cfg, &mut stream(6, i))
                    .unwrap()
                    .0
                    .t_final()
            })
            .collect();
        let ks = stats::ks_two_sample(&direct, &layered);
        assert!(ks.p_value > 0.01, "{ks:?}");
    }
}
