//! Statistical experiments with pass/fail criteria.
//!
//! Each [`Scenario`] names a kernel, a geometry, a parameter grid and a
//! replica count. Running it produces a [`Report`] holding the estimates and
//! one verdict per criterion. Thresholds are fixed harness constants.

mod runners;
mod suite;

pub use runners::{
    run_density_decay, run_exit_scaling, run_hitting_linearity, run_meyer_equivalence, run_occupation_theorem,
    run_scenario, run_support_theorem,
};
pub use suite::{default_suite, scenario_names};

use std::fmt::Write as _;

use crate::estimate::EstimateResult;
use crate::kernel::KernelParams;

/// Significance level of the two-sample tests.
pub const KS_LEVEL: f64 = 0.01;
/// Allowed deviation of a fitted density slope from `-d/α`.
pub const SLOPE_TOL: f64 = 0.3;
/// Allowed deviation of the fitted exit-time exponent from a candidate.
pub const EXPONENT_TOL: f64 = 0.25;
/// Largest max/min ratio of the density over the plateau grid.
pub const PLATEAU_RATIO: f64 = 1.1;
/// Band for `P(hit A)/|A|` and for center/off-center exit times.
pub const BAND_NARROW: f64 = 10.0;
/// Band for occupation times of same-volume sets.
pub const BAND_WIDE: f64 = 20.0;

pub const REPORT_HEADER: &str = "scenario,criterion,check,value,target,passed";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    Positivity,
    Monotonicity,
    SlopeInRange,
    KsTest,
    Band,
}

impl Check {
    pub fn as_str(&self) -> &'static str {
        match self {
            Check::Positivity => "positivity",
            Check::Monotonicity => "monotonicity",
            Check::SlopeInRange => "slope-in-range",
            Check::KsTest => "ks-test",
            Check::Band => "band",
        }
    }
}

/// `(time, point)` pairs of a polygonal path.
pub type Waypoints = Vec<(f64, Vec<f64>)>;

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioKind {
    /// On-diagonal density over `small_t` (slope fit) and `plateau_t`
    /// (boundedness), off-diagonal density at `far_y` over `far_t`, and the
    /// density killed on leaving `B(x, killing_radius)` at `(killed_t, killed_y)`.
    DensityDecay {
        x: Vec<f64>,
        small_t: Vec<f64>,
        plateau_t: Vec<f64>,
        bandwidth: f64,
        far_y: Vec<f64>,
        far_t: Vec<f64>,
        killing_radius: f64,
        killed_t: f64,
        killed_y: Vec<f64>,
    },
    /// Mean exit times from `B(center, r)` started at the center and at
    /// `center + offset·r·e₁`.
    ExitScaling { center: Vec<f64>, radii: Vec<f64>, offset: f64 },
    /// Hitting probabilities of balls around `target_center` whose volumes
    /// are `fractions` of the confining ball `B(x, confine_radius)`.
    HittingLinearity {
        x: Vec<f64>,
        confine_radius: f64,
        target_center: Vec<f64>,
        fractions: Vec<f64>,
    },
    /// Occupation times before leaving the cube `Q(center, side)` of nested
    /// concentric cubes and of same-volume sets of various shapes.
    OccupationTheorem {
        center: Vec<f64>,
        side: f64,
        nested_fractions: Vec<f64>,
        shape_fraction: f64,
        starts: Vec<Vec<f64>>,
    },
    /// Tube probabilities around polygonal paths, and their monotonicity in
    /// the tube radius over `eps_grid`.
    SupportTheorem {
        tubes: Vec<(String, Waypoints)>,
        epsilon: f64,
        eps_grid: Vec<f64>,
    },
    /// Exit times from `B(0, radius)` sampled directly and by the layered
    /// construction for each `β`, and the single-large-jump event for a
    /// displacement `z` before `t0`.
    MeyerEquivalence {
        radius: f64,
        betas: Vec<f64>,
        z: Vec<f64>,
        gamma: f64,
        t0: f64,
        event_n: usize,
    },
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub kernel: KernelParams,
    pub eps_min: f64,
    pub n: usize,
    pub seed: u64,
    /// Worker threads; `0` uses the global pool.
    pub threads: usize,
    pub kind: ScenarioKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionResult {
    pub name: String,
    pub check: Check,
    pub value: f64,
    /// Human-readable acceptance region for `value`.
    pub target: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub scenario: String,
    pub estimates: Vec<(String, EstimateResult)>,
    pub criteria: Vec<CriterionResult>,
}

impl Report {
    pub(crate) fn new(scenario: &str) -> Self {
        Report {
            scenario: scenario.to_string(),
            estimates: Vec::new(),
            criteria: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }

    pub fn criterion(&self, name: &str) -> Option<&CriterionResult> {
        self.criteria.iter().find(|c| c.name == name)
    }

    pub(crate) fn estimate(&mut self, label: impl Into<String>, result: EstimateResult) {
        self.estimates.push((label.into(), result));
    }

    pub(crate) fn check(
        &mut self,
        name: &str,
        check: Check,
        value: f64,
        target: impl Into<String>,
        passed: bool,
        detail: impl Into<String>,
    ) {
        self.criteria.push(CriterionResult {
            name: name.to_string(),
            check,
            value,
            target: target.into(),
            passed,
            detail: detail.into(),
        });
    }

    /// One CSV row per criterion, without a header. Contains no timings, so
    /// it is identical across reruns with the same seed.
    pub fn csv_rows(&self) -> String {
        let mut out = String::new();
        for c in &self.criteria {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                self.scenario,
                c.name,
                c.check.as_str(),
                c.value,
                c.target,
                if c.passed { "pass" } else { "fail" }
            );
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let _ = writeln!(out, "{}: {verdict}", self.scenario);
        for c in &self.criteria {
            let mark = if c.passed { "pass" } else { "FAIL" };
            let _ = writeln!(
                out,
                "  [{mark}] {} ({}): {:.4} target {}  {}",
                c.name,
                c.check.as_str(),
                c.value,
                c.target,
                c.detail
            );
        }
        for (label, e) in &self.estimates {
            let _ = writeln!(
                out,
                "    {label}: {:.5} ± {:.5} [{:.5}, {:.5}] n={}{}",
                e.mean,
                e.std_error,
                e.ci95.0,
                e.ci95.1,
                e.n,
                if e.censoring_flagged() {
                    format!(" censored={:.4}", e.censored_frac)
                } else {
                    String::new()
                }
            );
        }
        out
    }
}

/// Number of adjacent pairs with `v[i+1] < v[i]`.
pub(crate) fn decreases(values: &[f64]) -> usize {
    values.windows(2).filter(|w| w[1] < w[0]).count()
}

/// `max/min` of positive values, infinite if any is zero.
pub(crate) fn spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_passes_iff_all_criteria_pass() {
        let mut r = Report::new("demo");
        assert!(r.passed());
        r.check("a", Check::Positivity, 1.0, "> 0", true, "");
        assert!(r.passed());
        r.check("b", Check::Band, 30.0, "<= 10", false, "");
        assert!(!r.passed());
        assert_eq!(r.csv_rows(), "demo,a,positivity,1,> 0,pass\ndemo,b,band,30,<= 10,fail\n");
        assert!(r.summary().starts_with("demo: FAIL"));
    }

    #[test]
    fn helpers() {
        assert_eq!(decreases(&[1.0, 2.0, 2.0, 1.5, 3.0]), 1);
        assert_eq!(spread(&[2.0, 4.0, 3.0]), 2.0);
        assert_eq!(spread(&[0.0, 1.0]), f64::INFINITY);
    }
}
