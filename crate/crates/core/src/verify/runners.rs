use std::time::Instant;

use super::{
    decreases, spread, Check, Report, Scenario, ScenarioKind, BAND_NARROW, BAND_WIDE, EXPONENT_TOL, KS_LEVEL,
    PLATEAU_RATIO, SLOPE_TOL,
};
use crate::error::{config, Error, Result};
use crate::estimate::{tube_result, EstimateResult, Estimator, TubeSpec};
use crate::kernel::{distance, sphere_area};
use crate::rng::derive_seed;
use crate::simulate::{meyer_compose, occupation_time, simulate_path, Domain, SimConfig, StopReason};
use crate::stats::{ks_two_sample, loglog_slope};

pub fn run_scenario(scn: &Scenario) -> Result<Report> {
    log::info!("running scenario {}", scn.name);
    match scn.kind {
        ScenarioKind::DensityDecay { .. } => run_density_decay(scn),
        ScenarioKind::ExitScaling { .. } => run_exit_scaling(scn),
        ScenarioKind::HittingLinearity { .. } => run_hitting_linearity(scn),
        ScenarioKind::OccupationTheorem { .. } => run_occupation_theorem(scn),
        ScenarioKind::SupportTheorem { .. } => run_support_theorem(scn),
        ScenarioKind::MeyerEquivalence { .. } => run_meyer_equivalence(scn),
    }
}

fn estimator(scn: &Scenario) -> Result<Estimator> {
    Estimator::new(scn.kernel.clone(), scn.eps_min, scn.n, scn.seed)?.with_threads(scn.threads)
}

fn wrong_kind<T>(scn: &Scenario, what: &str) -> Result<T> {
    config(format!("scenario '{}' is not a {what} scenario", scn.name))
}

fn as_config(e: Error) -> Error {
    match e {
        Error::Parameter(msg) | Error::Precondition(msg) => Error::Config(msg),
        other => other,
    }
}

fn means(results: &[EstimateResult]) -> Vec<f64> {
    results.iter().map(|e| e.mean).collect()
}

fn min_ci_lo<'a>(results: impl IntoIterator<Item = &'a EstimateResult>) -> f64 {
    results.into_iter().map(|e| e.ci95.0).fold(f64::INFINITY, f64::min)
}

fn increasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] > w[0])
}

/// Radius of the `dim`-ball of the given volume.
fn ball_radius(dim: usize, volume: f64) -> f64 {
    let unit = sphere_area(dim) / dim as f64;
    (volume / unit).powf(1.0 / dim as f64)
}

pub fn run_density_decay(scn: &Scenario) -> Result<Report> {
    let ScenarioKind::DensityDecay {
        x,
        small_t,
        plateau_t,
        bandwidth,
        far_y,
        far_t,
        killing_radius,
        killed_t,
        killed_y,
    } = &scn.kind
    else {
        return wrong_kind(scn, "density-decay");
    };
    if small_t.len() < 3 {
        return config(format!("slope fit needs at least 3 time points, got {}", small_t.len()));
    }
    if plateau_t.len() < 2 || far_t.len() < 2 {
        return config("plateau and off-diagonal grids need at least 2 time points");
    }
    let est = estimator(scn)?;
    let mut report = Report::new(&scn.name);
    let d = scn.kernel.dim() as f64;
    let alpha = scn.kernel.alpha();

    let on_diagonal = |grid: &[f64], report: &mut Report| -> Result<Vec<EstimateResult>> {
        let results = grid
            .iter()
            .map(|&t| est.density(t, x, x, *bandwidth))
            .collect::<Result<Vec<_>>>()?;
        for (t, e) in grid.iter().zip(&results) {
            report.estimate(format!("p({t}, x, x)"), e.clone());
        }
        Ok(results)
    };

    let small = on_diagonal(small_t, &mut report)?;
    let expected = -d / alpha;
    let small_means = means(&small);
    let slope = if small_means.iter().all(|m| *m > 0.0) {
        loglog_slope(small_t, &small_means)
    } else {
        f64::NAN
    };
    report.check(
        "on-diagonal slope",
        Check::SlopeInRange,
        slope,
        format!("[{}; {}]", expected - SLOPE_TOL, expected + SLOPE_TOL),
        (slope - expected).abs() <= SLOPE_TOL,
        format!("expected -d/alpha = {expected}"),
    );

    let plateau = on_diagonal(plateau_t, &mut report)?;
    let ratio = spread(&means(&plateau));
    report.check(
        "plateau",
        Check::Band,
        ratio,
        format!("<= {PLATEAU_RATIO}"),
        ratio <= PLATEAU_RATIO,
        "max/min of p(t, x, x) over the plateau grid",
    );

    let far = far_t
        .iter()
        .map(|&t| est.density(t, x, far_y, *bandwidth))
        .collect::<Result<Vec<_>>>()?;
    for (t, e) in far_t.iter().zip(&far) {
        report.estimate(format!("p({t}, x, y)"), e.clone());
    }
    let far_means = means(&far);
    report.check(
        "off-diagonal increasing in t",
        Check::Monotonicity,
        decreases(&far_means) as f64,
        "0 decreases",
        increasing(&far_means),
        format!("|x - y| = {}", distance(x, far_y)),
    );

    let killing = Domain::ball(x.clone(), *killing_radius)?;
    let killed = est.killed_density(*killed_t, x, killed_y, *bandwidth, &killing)?;
    report.check(
        "killed density positive",
        Check::Positivity,
        killed.ci95.0,
        "> 0",
        killed.ci_excludes_zero(),
        format!("t = {killed_t}"),
    );
    report.estimate(format!("killed p({killed_t}, x, y)"), killed);
    Ok(report)
}

pub fn run_exit_scaling(scn: &Scenario) -> Result<Report> {
    let ScenarioKind::ExitScaling { center, radii, offset } = &scn.kind else {
        return wrong_kind(scn, "exit-scaling");
    };
    if radii.len() < 2 {
        return config(format!("radius grid needs at least 2 points, got {}", radii.len()));
    }
    if !increasing(radii) || radii[0] <= 0.0 {
        return config("radii must be positive and strictly increasing");
    }
    if !(0.0..1.0).contains(offset) {
        return config("off-center offset must lie in [0, 1)");
    }
    let est = estimator(scn)?;
    let mut report = Report::new(&scn.name);
    let mut centered = Vec::new();
    let mut shifted = Vec::new();
    for &r in radii {
        let dom = Domain::ball(center.clone(), r)?;
        let mut off = center.clone();
        off[0] += offset * r;
        let c = est.mean_exit_time(center, &dom)?;
        let o = est.mean_exit_time(&off, &dom)?;
        report.estimate(format!("E tau, r = {r}, center"), c.clone());
        report.estimate(format!("E tau, r = {r}, offset"), o.clone());
        centered.push(c);
        shifted.push(o);
    }
    let flagged = centered.iter().chain(&shifted).filter(|e| e.censoring_flagged()).count();
    let lo = min_ci_lo(centered.iter().chain(&shifted));
    report.check(
        "exit times positive",
        Check::Positivity,
        lo,
        "> 0",
        lo > 0.0,
        format!("{flagged} estimates flagged for censoring"),
    );
    let c_means = means(&centered);
    let drops = decreases(&c_means);
    report.check(
        "monotone in r",
        Check::Monotonicity,
        drops as f64,
        "0 decreases",
        drops == 0,
        "centered starts",
    );
    let alpha = scn.kernel.alpha();
    let other = 2.0 * alpha / scn.kernel.dim() as f64;
    let slope = loglog_slope(radii, &c_means);
    report.check(
        "exit exponent",
        Check::SlopeInRange,
        slope,
        format!("{alpha} or {other} within {EXPONENT_TOL}"),
        (slope - alpha).abs() <= EXPONENT_TOL || (slope - other).abs() <= EXPONENT_TOL,
        format!("deviation from alpha {:.3}; from 2alpha/d {:.3}", slope - alpha, slope - other),
    );
    let ratios: Vec<f64> = centered
        .iter()
        .zip(&shifted)
        .map(|(c, o)| (c.mean / o.mean).max(o.mean / c.mean))
        .collect();
    let worst = ratios.iter().copied().fold(0.0, f64::max);
    report.check(
        "center/offset ratio",
        Check::Band,
        worst,
        format!("<= {BAND_NARROW}"),
        worst <= BAND_NARROW,
        format!("offset {offset} r"),
    );
    Ok(report)
}

pub fn run_hitting_linearity(scn: &Scenario) -> Result<Report> {
    let ScenarioKind::HittingLinearity {
        x,
        confine_radius,
        target_center,
        fractions,
    } = &scn.kind
    else {
        return wrong_kind(scn, "hitting-linearity");
    };
    if fractions.len() < 2 {
        return config("volume grid needs at least 2 points");
    }
    if fractions.iter().any(|f| !(*f > 0.0 && *f <= 1.0)) {
        return config("volume fractions must lie in (0, 1]");
    }
    let est = estimator(scn)?;
    let mut report = Report::new(&scn.name);
    let d = scn.kernel.dim();
    let confine = Domain::ball(x.clone(), *confine_radius)?;
    let total = confine.volume();
    let mut results = Vec::new();
    let mut ratios = Vec::new();
    for &f in fractions {
        let volume = f * total;
        let target = Domain::ball(target_center.clone(), ball_radius(d, volume))?;
        let e = est.hitting_prob(x, &target, &confine).map_err(as_config)?;
        ratios.push(e.mean / volume);
        report.estimate(format!("P(hit A), |A| = {volume:.6}"), e.clone());
        results.push(e);
    }
    let lo = min_ci_lo(&results);
    report.check("hitting positive", Check::Positivity, lo, "> 0", lo > 0.0, "");
    let band = spread(&ratios);
    report.check(
        "P/|A| band",
        Check::Band,
        band,
        format!("<= {BAND_NARROW}"),
        band <= BAND_NARROW,
        format!("P/|A| = {ratios:.3?}"),
    );
    Ok(report)
}

/// Ten small cubes of total volume `fraction·side^d` in distinct cells of a
/// 4-per-axis lattice over `Q(center, side)`.
fn scattered_union(center: &[f64], side: f64, fraction: f64) -> Result<Domain> {
    const PIECES: usize = 10;
    let d = center.len();
    let cells = 4usize.checked_pow(d as u32).unwrap_or(usize::MAX);
    let small = side * (fraction / PIECES as f64).powf(1.0 / d as f64);
    if cells < PIECES || small >= side / 4.0 {
        return config(format!("cannot scatter {PIECES} cubes of volume fraction {fraction} in dimension {d}"));
    }
    let parts = (0..PIECES)
        .map(|k| {
            let mut cell = (k * 7) % cells;
            let c = center
                .iter()
                .map(|c0| {
                    let i = cell % 4;
                    cell /= 4;
                    c0 + side * (-0.375 + 0.25 * i as f64)
                })
                .collect();
            Domain::cube(c, small)
        })
        .collect::<Result<Vec<_>>>()?;
    Domain::union(d, parts)
}

pub fn run_occupation_theorem(scn: &Scenario) -> Result<Report> {
    let ScenarioKind::OccupationTheorem {
        center,
        side,
        nested_fractions,
        shape_fraction,
        starts,
    } = &scn.kind
    else {
        return wrong_kind(scn, "occupation-theorem");
    };
    if nested_fractions.len() < 2 || !increasing(nested_fractions) {
        return config("nested fractions need at least 2 strictly increasing values");
    }
    if nested_fractions[0] <= 0.0 || *nested_fractions.last().expect("nonempty") > 1.0 {
        return config("nested fractions must lie in (0, 1]");
    }
    if starts.is_empty() {
        return config("occupation scenario needs at least one start point");
    }
    let d = center.len();
    let est = estimator(scn)?;
    let mut report = Report::new(&scn.name);
    let q = Domain::cube(center.clone(), *side)?;
    let inner = Domain::cube(center.clone(), side / 2.0)?;

    let root = 1.0 / d as f64;
    let mut sets: Vec<Domain> = nested_fractions
        .iter()
        .map(|f| Domain::cube(center.clone(), side * f.powf(root)))
        .collect::<Result<_>>()?;
    let nested = sets.len();
    let s = side * shape_fraction.powf(root);
    let shift = 0.6 * (side - s) / 2.0;
    let radius = ball_radius(d, shape_fraction * side.powi(d as i32));
    if radius >= side / 2.0 {
        return config("shape fraction too large for a ball inside the cube");
    }
    let shapes = [
        ("solid", Domain::cube(center.clone(), s)?),
        ("shifted", Domain::cube(center.iter().map(|c| c + shift).collect(), s)?),
        ("ball", Domain::ball(center.clone(), radius)?),
        ("scattered", scattered_union(center, *side, *shape_fraction)?),
    ];
    sets.extend(shapes.iter().map(|(_, dom)| dom.clone()));

    let mut nested_results = Vec::new();
    let mut shape_results = Vec::new();
    let mut violations = 0usize;
    let mut shape_ratio: f64 = 0.0;
    for x in starts {
        if !inner.contains(x) {
            return config(format!("start {x:?} lies outside the cube of half the side"));
        }
        let started = Instant::now();
        let (values, censored) = est.exit_replicas(x, &q, |p| {
            sets.iter()
                .map(|set| occupation_time(p, set, p.t_final()))
                .collect::<Result<Vec<f64>>>()
        })?;
        violations += values.iter().filter(|v| decreases(&v[..nested]) > 0).count();
        let results: Vec<EstimateResult> = (0..sets.len())
            .map(|k| {
                let column: Vec<f64> = values.iter().map(|v| v[k]).collect();
                EstimateResult::from_values(&column, censored, started)
            })
            .collect();
        for (f, e) in nested_fractions.iter().zip(&results) {
            report.estimate(format!("x = {x:?}, nested |B| = {f}"), e.clone());
        }
        for ((name, _), e) in shapes.iter().zip(&results[nested..]) {
            report.estimate(format!("x = {x:?}, {name} |B| = {shape_fraction}"), e.clone());
        }
        let solid = results[nested].mean;
        let scattered = results[nested + 3].mean;
        shape_ratio = shape_ratio.max(spread(&[solid, scattered]));
        nested_results.extend_from_slice(&results[..nested]);
        shape_results.extend_from_slice(&results[nested..]);
    }
    let lo = min_ci_lo(&nested_results);
    report.check("nested positive", Check::Positivity, lo, "> 0", lo > 0.0, "");
    report.check(
        "nested monotone pathwise",
        Check::Monotonicity,
        violations as f64,
        "0 paths",
        violations == 0,
        "paths where a larger nested set got less time",
    );
    let lo = min_ci_lo(&shape_results);
    report.check("same-volume minimum positive", Check::Positivity, lo, "> 0", lo > 0.0, "");
    report.check(
        "scattered/solid ratio",
        Check::Band,
        shape_ratio,
        format!("<= {BAND_WIDE}"),
        shape_ratio <= BAND_WIDE,
        "",
    );
    Ok(report)
}

pub fn run_support_theorem(scn: &Scenario) -> Result<Report> {
    let ScenarioKind::SupportTheorem { tubes, epsilon, eps_grid } = &scn.kind else {
        return wrong_kind(scn, "support-theorem");
    };
    if tubes.is_empty() || eps_grid.len() < 2 {
        return config("support scenario needs at least one tube and two radii");
    }
    if !increasing(eps_grid) {
        return config("tube radii must increase strictly");
    }
    let specs = tubes
        .iter()
        .map(|(name, wp)| Ok((name, TubeSpec::new(wp.clone(), *epsilon).map_err(as_config)?)))
        .collect::<Result<Vec<_>>>()?;
    let est = estimator(scn)?;
    let mut report = Report::new(&scn.name);
    let mut results = Vec::new();
    let mut violations = 0;
    for (name, tube) in &specs {
        let started = Instant::now();
        let dists = est.tube_distances(tube.start(), tube)?;
        let e = tube_result(&dists, *epsilon, started.elapsed().as_secs_f64());
        report.estimate(format!("{name}, eps = {epsilon}"), e.clone());
        results.push(e);
        let counts: Vec<f64> = eps_grid
            .iter()
            .map(|eps| dists.iter().filter(|v| **v < *eps).count() as f64)
            .collect();
        violations += decreases(&counts);
    }
    let lo = min_ci_lo(&results);
    report.check("tube probability positive", Check::Positivity, lo, "> 0", lo > 0.0, "");
    report.check(
        "monotone in epsilon",
        Check::Monotonicity,
        violations as f64,
        "0 decreases",
        violations == 0,
        "shared paths",
    );
    Ok(report)
}

pub fn run_meyer_equivalence(scn: &Scenario) -> Result<Report> {
    let ScenarioKind::MeyerEquivalence {
        radius,
        betas,
        z,
        gamma,
        t0,
        event_n,
    } = &scn.kind
    else {
        return wrong_kind(scn, "meyer-equivalence");
    };
    if betas.is_empty() {
        return config("meyer scenario needs at least one beta");
    }
    if let Some(b) = betas.iter().find(|b| !(**b > scn.eps_min && **b < 1.0)) {
        return config(format!("beta {b} must lie in (eps_min, 1) = ({}, 1)", scn.eps_min));
    }
    let params = &scn.kernel;
    let d = params.dim();
    if z.len() != d {
        return config("displacement z has the wrong dimension");
    }
    let est = estimator(scn)?;
    let mut report = Report::new(&scn.name);
    let x = vec![0.0; d];
    let dom = Domain::ball(x.clone(), *radius)?;
    let horizon = est.exit_horizon(&x, &dom)?;
    let cfg = SimConfig::new(scn.eps_min, horizon)?.with_domain(dom);

    let exit_estimate = |samples: &[(f64, bool)], started: Instant| {
        let times: Vec<f64> = samples.iter().map(|s| s.0).collect();
        let censored = samples.iter().filter(|s| s.1).count();
        (EstimateResult::from_values(&times, censored, started), times)
    };
    let started = Instant::now();
    let direct = est.replicas(scn.n, derive_seed(scn.seed, 1), |rng| {
        let p = simulate_path(params, &x, &cfg, rng)?;
        Ok((p.t_final(), p.stop_reason() == StopReason::HorizonReached))
    })?;
    let (e, direct) = exit_estimate(&direct, started);
    report.estimate("E tau direct", e);

    let mut p_values = Vec::new();
    for (k, &beta) in betas.iter().enumerate() {
        let started = Instant::now();
        let layered = est.replicas(scn.n, derive_seed(scn.seed, 100 + k as u64), |rng| {
            let (p, _) = meyer_compose(params, &x, beta, &cfg, rng)?;
            Ok((p.t_final(), p.stop_reason() == StopReason::HorizonReached))
        })?;
        let (e, layered) = exit_estimate(&layered, started);
        report.estimate(format!("E tau layered, beta = {beta}"), e);
        p_values.push(ks_two_sample(&direct, &layered).p_value);
    }
    let worst = p_values.iter().copied().fold(1.0, f64::min);
    report.check(
        "ks direct vs layered",
        Check::KsTest,
        worst,
        format!("> {KS_LEVEL}"),
        worst > KS_LEVEL,
        format!("p-values {p_values:.4?} for beta {betas:?}"),
    );

    // exactly one large jump before t0, landing within delta of z
    let z_len = distance(z, &x);
    let beta = z_len / 2.0;
    if !(beta > scn.eps_min && beta < 1.0) {
        return config("|z|/2 must lie in (eps_min, 1)");
    }
    let delta = (gamma / 3.0).min(z_len / 6.0);
    let event_cfg = SimConfig::new(scn.eps_min, *t0)?;
    let event_est = est.clone().with_n(*event_n)?;
    let started = Instant::now();
    let hits = event_est.replicas(*event_n, derive_seed(scn.seed, 2), |rng| {
        let (p, state) = meyer_compose(params, &x, beta, &event_cfg, rng)?;
        let mut early = state.insertions.iter().filter(|i| i.time < *t0);
        Ok(match (early.next(), early.next()) {
            (Some(ins), None) => distance(p.position_at(ins.time), z) < delta,
            _ => false,
        })
    })?;
    let hits = hits.iter().filter(|h| **h).count();
    let e = EstimateResult::binomial(hits, *event_n, started.elapsed().as_secs_f64());
    report.check(
        "single large jump event positive",
        Check::Positivity,
        e.ci95.0,
        "> 0",
        e.ci_excludes_zero(),
        format!("beta = {beta}, delta = {delta:.4}, t0 = {t0}"),
    );
    report.estimate("P(one large jump into B(z, delta))", e);
    Ok(report)
}
