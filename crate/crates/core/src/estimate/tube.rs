use crate::error::{param, Result};
use crate::kernel::distance;
use crate::simulate::Path;

/// A polygonal reference path `φ` on `[0, t₀]` and a tube radius.
#[derive(Debug, Clone, PartialEq)]
pub struct TubeSpec {
    waypoints: Vec<(f64, Vec<f64>)>,
    epsilon: f64,
}

impl TubeSpec {
    /// `waypoints` are `(time, point)` pairs joined by straight segments. Times
    /// must start at 0 and increase strictly.
    pub fn new(waypoints: Vec<(f64, Vec<f64>)>, epsilon: f64) -> Result<Self> {
        if waypoints.len() < 2 {
            return param("a tube needs at least two waypoints");
        }
        if waypoints[0].0 != 0.0 {
            return param("the first waypoint must be at time 0");
        }
        let dim = waypoints[0].1.len();
        if dim == 0 {
            return param("waypoints must have at least one coordinate");
        }
        for pair in waypoints.windows(2) {
            if !(pair[1].0 > pair[0].0) || !pair[1].0.is_finite() {
                return param("waypoint times must increase strictly");
            }
            if pair[1].1.len() != dim || pair[1].1.iter().any(|v| !v.is_finite()) {
                return param("waypoints must be finite points of equal dimension");
            }
        }
        if !(epsilon > 0.0) {
            return param(format!("tube radius must be positive, got {epsilon}"));
        }
        Ok(TubeSpec { waypoints, epsilon })
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        TubeSpec::new(self.waypoints.clone(), epsilon)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn dim(&self) -> usize {
        self.waypoints[0].1.len()
    }

    pub fn start(&self) -> &[f64] {
        &self.waypoints[0].1
    }

    pub fn t_end(&self) -> f64 {
        self.waypoints.last().expect("validated").0
    }

    pub fn waypoints(&self) -> &[(f64, Vec<f64>)] {
        &self.waypoints
    }

    /// `φ(s)`, held constant beyond `t₀`.
    pub fn phi(&self, s: f64) -> Vec<f64> {
        let k = self.waypoints.partition_point(|(t, _)| *t <= s);
        if k >= self.waypoints.len() {
            return self.waypoints.last().expect("validated").1.clone();
        }
        let (t0, a) = &self.waypoints[k - 1];
        let (t1, b) = &self.waypoints[k];
        let u = (s - t0) / (t1 - t0);
        a.iter().zip(b).map(|(p, q)| p + u * (q - p)).collect()
    }

    /// `sup_{s ≤ t₀} |X_s - φ(s)|` for a path simulated up to at least `t₀`.
    ///
    /// On a holding interval the position is fixed and `φ` is piecewise
    /// linear, so the distance is convex between waypoint times and its sup is
    /// attained at interval endpoints or waypoint times inside the interval.
    pub fn sup_distance(&self, path: &Path) -> f64 {
        let t_end = self.t_end();
        let mut worst: f64 = 0.0;
        let n = path.len();
        for i in 0..n {
            let a = path.time(i);
            if a > t_end {
                break;
            }
            let b = if i + 1 < n { path.time(i + 1).min(t_end) } else { t_end };
            let x = path.position(i);
            worst = worst.max(distance(x, &self.phi(a))).max(distance(x, &self.phi(b)));
            for (t, p) in &self.waypoints {
                if *t > a && *t < b {
                    worst = worst.max(distance(x, p));
                }
            }
        }
        worst
    }

    pub fn contains_path(&self, path: &Path) -> bool {
        self.sup_distance(path) < self.epsilon
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l_shape(eps: f64) -> TubeSpec {
        TubeSpec::new(
            vec![(0.0, vec![0.0, 0.0]), (0.5, vec![0.25, 0.0]), (1.0, vec![0.25, 0.25])],
            eps,
        )
        .unwrap()
    }

    #[test]
    fn validation() {
        assert!(TubeSpec::new(vec![(0.0, vec![0.0])], 1.0).is_err());
        assert!(TubeSpec::new(vec![(0.1, vec![0.0]), (1.0, vec![0.0])], 1.0).is_err());
        assert!(TubeSpec::new(vec![(0.0, vec![0.0]), (0.0, vec![1.0])], 1.0).is_err());
        assert!(TubeSpec::new(vec![(0.0, vec![0.0]), (0.5, vec![1.0]), (0.4, vec![1.0])], 1.0).is_err());
        assert!(TubeSpec::new(vec![(0.0, vec![0.0]), (1.0, vec![1.0])], 0.0).is_err());
    }

    #[test]
    fn phi_interpolates() {
        let tube = l_shape(0.1);
        assert_eq!(tube.phi(0.0), vec![0.0, 0.0]);
        assert_eq!(tube.phi(0.25), vec![0.125, 0.0]);
        assert_eq!(tube.phi(0.75), vec![0.25, 0.125]);
        assert_eq!(tube.phi(3.0), vec![0.25, 0.25]);
    }

    #[test]
    fn sup_distance_of_a_constant_path_hits_the_corner() {
        // staying at the origin: the farthest point of φ is its end (0.25, 0.25)
        let tube = l_shape(0.1);
        let path = Path::from_events(&[(0.0, vec![0.0, 0.0])], 1.0).unwrap();
        assert!((tube.sup_distance(&path) - 0.125f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn sup_distance_uses_interior_waypoints() {
        let tube = l_shape(0.3);
        let path = Path::from_events(
            &[(0.0, vec![0.0, 0.0]), (0.4, vec![0.25, 0.25]), (0.6, vec![0.25, 0.1])],
            1.0,
        )
        .unwrap();
        let d = tube.sup_distance(&path);
        // worst case: holding (0.25, 0.25) at s = 0.4 against φ(0.4) = (0.2, 0);
        // the interior waypoint (0.25, 0) is at 0.25 and the last hold at most 0.15
        let expected = (0.05f64 * 0.05 + 0.25 * 0.25).sqrt();
        assert!((d - expected).abs() < 1e-12, "{d} vs {expected}");
    }
}
