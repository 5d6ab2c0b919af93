use super::{Scenario, ScenarioKind};
use crate::kernel::{KernelParams, Modulation};

const NAMES: [&str; 6] = [
    "density-decay",
    "exit-scaling",
    "hitting-linearity",
    "occupation-theorem",
    "support-theorem",
    "meyer-equivalence",
];

pub fn scenario_names() -> &'static [&'static str] {
    &NAMES
}

/// The six desk-scale scenarios, all driven by `seed`.
pub fn default_suite(seed: u64) -> Vec<Scenario> {
    let iso = |dim, kappa| KernelParams::isotropic(dim, 1.0, kappa).expect("valid kernel");
    let scenario = |name: &str, kernel, n, kind| Scenario {
        name: name.to_string(),
        kernel,
        eps_min: 0.01,
        n,
        seed,
        threads: 0,
        kind,
    };
    let quarter_arc: Vec<(f64, Vec<f64>)> = (0..=4)
        .map(|k| {
            let theta = std::f64::consts::FRAC_PI_2 * k as f64 / 4.0;
            (k as f64 / 4.0, vec![0.25 * theta.sin(), 0.25 * (1.0 - theta.cos())])
        })
        .collect();
    vec![
        scenario(
            NAMES[0],
            iso(1, 1.0),
            50_000,
            ScenarioKind::DensityDecay {
                x: vec![0.0],
                small_t: vec![0.02, 0.04, 0.08, 0.16],
                plateau_t: vec![1.0, 2.0, 4.0],
                bandwidth: 0.05,
                far_y: vec![0.5],
                far_t: vec![0.025, 0.05, 0.1, 0.2],
                killing_radius: 1.0,
                killed_t: 0.5,
                killed_y: vec![0.25],
            },
        ),
        scenario(
            NAMES[1],
            iso(1, 1.0),
            10_000,
            ScenarioKind::ExitScaling {
                center: vec![0.0],
                radii: vec![0.05, 0.1, 0.2, 0.4],
                offset: 0.7,
            },
        ),
        scenario(
            NAMES[2],
            iso(2, 1.0),
            100_000,
            ScenarioKind::HittingLinearity {
                x: vec![0.0, 0.0],
                confine_radius: 0.5,
                target_center: vec![0.25, 0.0],
                fractions: vec![0.001, 0.004, 0.016],
            },
        ),
        scenario(
            NAMES[3],
            KernelParams::new(2, 1.0, 0.5, 1.0, Modulation::Checkerboard).expect("valid kernel"),
            20_000,
            ScenarioKind::OccupationTheorem {
                center: vec![0.0, 0.0],
                side: 1.0,
                nested_fractions: vec![0.05, 0.1, 0.2, 0.4, 0.8],
                shape_fraction: 0.1,
                starts: vec![vec![0.0, 0.0], vec![0.2, -0.2], vec![-0.1, 0.2]],
            },
        ),
        scenario(
            NAMES[4],
            iso(2, 0.1),
            10_000,
            ScenarioKind::SupportTheorem {
                tubes: vec![
                    (
                        "segment".to_string(),
                        vec![(0.0, vec![0.0, 0.0]), (1.0, vec![0.25, 0.0])],
                    ),
                    (
                        "l-shape".to_string(),
                        vec![(0.0, vec![0.0, 0.0]), (0.5, vec![0.25, 0.0]), (1.0, vec![0.25, 0.25])],
                    ),
                    ("arc".to_string(), quarter_arc),
                ],
                epsilon: 0.25,
                eps_grid: vec![0.125, 0.25, 0.5, 1.0, 10.0],
            },
        ),
        scenario(
            NAMES[5],
            iso(2, 1.0),
            2000,
            ScenarioKind::MeyerEquivalence {
                radius: 0.3,
                betas: vec![0.25, 0.5, 0.75],
                z: vec![0.4, 0.0],
                gamma: 0.2,
                t0: 0.1,
                event_n: 20_000,
            },
        ),
    ]
}
