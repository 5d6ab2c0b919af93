use crate::error::{param, Result};
use crate::kernel::sphere_area;
use crate::rng;
use rand::Rng;

/// Samples used by hit-or-miss volume estimates of composite regions.
const HIT_OR_MISS_SAMPLES: usize = 200_000;

/// An open region of `ℝ^d`.
///
/// Balls and cubes are open, so boundary points are outside. A zero extent
/// gives the empty set.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Ball { center: Vec<f64>, radius: f64 },
    /// Axis-aligned cube of the given side length.
    Cube { center: Vec<f64>, side: f64 },
    /// All of `ℝ^d`.
    Space { dim: usize },
    Union { dim: usize, parts: Vec<Domain> },
    Difference(Box<Domain>, Box<Domain>),
}

fn check_extent(extent: f64, center: &[f64]) -> Result<()> {
    if center.is_empty() {
        return param("domain center must have at least one coordinate");
    }
    if !(extent >= 0.0 && extent.is_finite()) {
        return param(format!("domain extent must be finite and nonnegative, got {extent}"));
    }
    if center.iter().any(|c| !c.is_finite()) {
        return param("domain center has non-finite coordinates");
    }
    Ok(())
}

impl Domain {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        check_extent(radius, &center)?;
        Ok(Domain::Ball { center, radius })
    }

    pub fn cube(center: Vec<f64>, side: f64) -> Result<Self> {
        check_extent(side, &center)?;
        Ok(Domain::Cube { center, side })
    }

    pub fn space(dim: usize) -> Self {
        Domain::Space { dim }
    }

    pub fn empty(dim: usize) -> Self {
        Domain::Union { dim, parts: Vec::new() }
    }

    pub fn union(dim: usize, parts: Vec<Domain>) -> Result<Self> {
        if let Some(p) = parts.iter().find(|p| p.dim() != dim) {
            return param(format!("union part has dimension {} instead of {dim}", p.dim()));
        }
        Ok(Domain::Union { dim, parts })
    }

    /// `outer ∖ inner`.
    pub fn difference(outer: Domain, inner: Domain) -> Result<Self> {
        if outer.dim() != inner.dim() {
            return param("difference of domains with different dimensions");
        }
        Ok(Domain::Difference(Box::new(outer), Box::new(inner)))
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Ball { center, .. } | Domain::Cube { center, .. } => center.len(),
            Domain::Space { dim } | Domain::Union { dim, .. } => *dim,
            Domain::Difference(a, _) => a.dim(),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Domain::Ball { center, radius } => {
                let mut d2 = 0.0;
                for (a, b) in x.iter().zip(center) {
                    d2 += (a - b) * (a - b);
                }
                d2 < radius * radius
            }
            Domain::Cube { center, side } => {
                let half = 0.5 * side;
                x.iter().zip(center).all(|(a, b)| (a - b).abs() < half)
            }
            Domain::Space { .. } => true,
            Domain::Union { parts, .. } => parts.iter().any(|p| p.contains(x)),
            Domain::Difference(a, b) => a.contains(x) && !b.contains(x),
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            Domain::Ball { radius: e, .. } | Domain::Cube { side: e, .. } => *e == 0.0,
            Domain::Space { .. } => false,
            Domain::Union { parts, .. } => parts.iter().all(Domain::is_empty),
            Domain::Difference(a, b) => a.is_empty() || b.contains_domain(a),
        }
    }

    /// Closed axis-aligned box containing the domain; `None` when unbounded.
    pub fn bounding_box(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match self {
            Domain::Ball { center, radius: h } => Some((
                center.iter().map(|c| c - h).collect(),
                center.iter().map(|c| c + h).collect(),
            )),
            Domain::Cube { center, side } => {
                let h = 0.5 * side;
                Some((center.iter().map(|c| c - h).collect(), center.iter().map(|c| c + h).collect()))
            }
            Domain::Space { .. } => None,
            Domain::Union { dim, parts } => {
                let mut lo = vec![f64::INFINITY; *dim];
                let mut hi = vec![f64::NEG_INFINITY; *dim];
                for p in parts.iter().filter(|p| !p.is_empty()) {
                    let (a, b) = p.bounding_box()?;
                    for i in 0..*dim {
                        lo[i] = lo[i].min(a[i]);
                        hi[i] = hi[i].max(b[i]);
                    }
                }
                if lo[0] > hi[0] {
                    lo.iter_mut().chain(hi.iter_mut()).for_each(|v| *v = 0.0);
                }
                Some((lo, hi))
            }
            Domain::Difference(a, _) => a.bounding_box(),
        }
    }

    /// Conservative test for `other ⊆ self`: `true` is always correct, `false`
    /// may be returned for some composite regions that are in fact contained.
    pub fn contains_domain(&self, other: &Domain) -> bool {
        if other.is_empty() {
            return true;
        }
        match (self, other) {
            (Domain::Space { .. }, _) => true,
            (_, Domain::Space { .. }) => false,
            (_, Domain::Union { parts, .. }) => parts.iter().all(|p| self.contains_domain(p)),
            (_, Domain::Difference(a, _)) => self.contains_domain(a),
            (Domain::Union { parts, .. }, _) => parts.iter().any(|p| p.contains_domain(other)),
            (Domain::Difference(a, b), _) => a.contains_domain(other) && disjoint(b, other),
            (Domain::Ball { center: c, radius: r }, Domain::Ball { center: c2, radius: r2 }) => {
                crate::kernel::distance(c, c2) + r2 <= *r
            }
            (Domain::Ball { center: c, radius: r }, Domain::Cube { center: c2, side }) => {
                // farthest corner of the cube
                let h = 0.5 * side;
                let far: f64 = c.iter().zip(c2).map(|(a, b)| ((a - b).abs() + h).powi(2)).sum();
                far.sqrt() <= *r
            }
            (Domain::Cube { center: c, side }, Domain::Ball { center: c2, radius: r2 }) => {
                c.iter().zip(c2).all(|(a, b)| (a - b).abs() + r2 <= 0.5 * side)
            }
            (Domain::Cube { center: c, side }, Domain::Cube { center: c2, side: s2 }) => {
                c.iter().zip(c2).all(|(a, b)| (a - b).abs() + 0.5 * s2 <= 0.5 * side)
            }
        }
    }

    /// Lebesgue measure. Analytic for balls, cubes and unions or differences
    /// whose pieces are disjoint or nested; hit-or-miss otherwise.
    pub fn volume(&self) -> f64 {
        match self {
            Domain::Ball { center, radius } => {
                let d = center.len();
                sphere_area(d) / d as f64 * radius.powi(d as i32)
            }
            Domain::Cube { center, side } => side.powi(center.len() as i32),
            Domain::Space { .. } => f64::INFINITY,
            Domain::Union { parts, .. } => {
                let live: Vec<&Domain> = parts.iter().filter(|p| !p.is_empty()).collect();
                let pairwise_disjoint = live
                    .iter()
                    .enumerate()
                    .all(|(i, a)| live[i + 1..].iter().all(|b| disjoint(a, b)));
                if pairwise_disjoint {
                    live.iter().map(|p| p.volume()).sum()
                } else {
                    self.hit_or_miss_volume()
                }
            }
            Domain::Difference(a, b) => {
                if a.contains_domain(b) {
                    a.volume() - b.volume()
                } else if disjoint(a, b) {
                    a.volume()
                } else {
                    self.hit_or_miss_volume()
                }
            }
        }
    }

    fn hit_or_miss_volume(&self) -> f64 {
        let Some((lo, hi)) = self.bounding_box() else {
            return f64::INFINITY;
        };
        let box_volume: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
        if box_volume == 0.0 {
            return 0.0;
        }
        let mut rng = rng::stream(rng::derive_seed(0x0B0C, HIT_OR_MISS_SAMPLES as u64), 0);
        let mut x = vec![0.0; lo.len()];
        let mut hits = 0usize;
        for _ in 0..HIT_OR_MISS_SAMPLES {
            for i in 0..x.len() {
                x[i] = lo[i] + (hi[i] - lo[i]) * rng.random::<f64>();
            }
            if self.contains(&x) {
                hits += 1;
            }
        }
        box_volume * hits as f64 / HIT_OR_MISS_SAMPLES as f64
    }
}

/// True when the bounding boxes of `a` and `b` have disjoint interiors.
fn disjoint(a: &Domain, b: &Domain) -> bool {
    if a.is_empty() || b.is_empty() {
        return true;
    }
    match (a.bounding_box(), b.bounding_box()) {
        (Some((alo, ahi)), Some((blo, bhi))) => (0..alo.len()).any(|i| ahi[i] <= blo[i] || bhi[i] <= alo[i]),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn membership_is_open() {
        let b = Domain::ball(vec![0.0, 0.0], 1.0).unwrap();
        assert!(b.contains(&[0.5, 0.5]));
        assert!(!b.contains(&[1.0, 0.0]));
        let q = Domain::cube(vec![0.0], 1.0).unwrap();
        assert!(q.contains(&[0.49]));
        assert!(!q.contains(&[0.5]));
        assert!(!q.contains(&[-0.5]));
    }

    #[test]
    fn zero_extent_is_empty() {
        let b = Domain::ball(vec![0.3], 0.0).unwrap();
        assert!(b.is_empty());
        assert!(!b.contains(&[0.3]));
        assert_eq!(b.volume(), 0.0);
        assert!(Domain::ball(vec![0.0], -1.0).is_err());
    }

    #[test]
    fn analytic_volumes() {
        let b = Domain::ball(vec![0.0; 3], 2.0).unwrap();
        assert!((b.volume() - 4.0 / 3.0 * std::f64::consts::PI * 8.0).abs() < 1e-12);
        let q = Domain::cube(vec![1.0, 1.0], 0.5).unwrap();
        assert_eq!(q.volume(), 0.25);
        let outer = Domain::cube(vec![0.0, 0.0], 1.0).unwrap();
        let inner = Domain::cube(vec![0.1, 0.1], 0.5).unwrap();
        let diff = Domain::difference(outer, inner).unwrap();
        assert!((diff.volume() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn union_of_disjoint_cubes_sums_volumes() {
        let parts = (0..4)
            .map(|i| Domain::cube(vec![i as f64 * 0.3, 0.0], 0.1).unwrap())
            .collect();
        let u = Domain::union(2, parts).unwrap();
        assert!((u.volume() - 0.04).abs() < 1e-15);
    }

    #[test]
    fn overlapping_union_uses_hit_or_miss() {
        let a = Domain::cube(vec![0.0, 0.0], 1.0).unwrap();
        let b = Domain::cube(vec![0.5, 0.0], 1.0).unwrap();
        let u = Domain::union(2, vec![a, b]).unwrap();
        assert!((u.volume() - 1.5).abs() < 0.01, "{}", u.volume());
    }

    #[test]
    fn containment() {
        let q = Domain::cube(vec![0.0, 0.0], 1.0).unwrap();
        let b = Domain::ball(vec![0.1, 0.1], 0.3).unwrap();
        assert!(q.contains_domain(&b));
        assert!(!b.contains_domain(&q));
        let big = Domain::ball(vec![0.0, 0.0], 0.75).unwrap();
        assert!(big.contains_domain(&q));
        assert!(!Domain::ball(vec![0.0, 0.0], 0.7).unwrap().contains_domain(&q));
        assert!(q.contains_domain(&Domain::empty(2)));
        assert!(Domain::space(2).contains_domain(&q));
        assert!(!q.contains_domain(&Domain::space(2)));
    }
}
