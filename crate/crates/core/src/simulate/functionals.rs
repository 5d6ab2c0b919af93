use super::{Domain, Path};
use crate::error::{precondition, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Exit {
    pub time: f64,
    pub position: Vec<f64>,
}

/// First exit from `dom`: the first event landing outside it. Pure-jump paths
/// leave open sets only at jump times.
pub fn first_exit(path: &Path, dom: &Domain) -> Result<Option<Exit>> {
    if !dom.contains(path.x0()) {
        return precondition("path starts outside the domain");
    }
    Ok((1..path.len()).find(|&i| !dom.contains(path.position(i))).map(|i| Exit {
        time: path.time(i),
        position: path.position(i).to_vec(),
    }))
}

/// First event time after 0 whose position lies in `target`.
pub fn hitting_time(path: &Path, target: &Domain) -> Option<f64> {
    (1..path.len())
        .find(|&i| target.contains(path.position(i)))
        .map(|i| path.time(i))
}

/// Time spent in `set` during `[0, until)`.
///
/// Computed as a sum over maximal runs of consecutive holding intervals
/// inside `set`, each contributing `end - start`. Event times lie on the time
/// grid, so the result is exact and additive over disjoint sets.
pub fn occupation_time(path: &Path, set: &Domain, until: f64) -> Result<f64> {
    if until > path.t_final() {
        return precondition(format!("occupation horizon {until} exceeds t_final {}", path.t_final()));
    }
    let mut total = 0.0;
    let mut run_start: Option<f64> = None;
    for i in 0..path.len() {
        let t = path.time(i);
        if t >= until {
            break;
        }
        let inside = set.contains(path.position(i));
        match (inside, run_start) {
            (true, None) => run_start = Some(t),
            (false, Some(s)) => {
                total += t - s;
                run_start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = run_start {
        total += until - s;
    }
    Ok(total)
}

/// `∫_0^until e^(-λt) 1_set(X_t) dt`, integrated in closed form per holding
/// interval.
pub fn discounted_occupation(path: &Path, set: &Domain, lambda: f64, until: f64) -> f64 {
    let mut total = 0.0;
    let n = path.len();
    for i in 0..n {
        let a = path.time(i);
        if a >= until {
            break;
        }
        let b = if i + 1 < n { path.time(i + 1).min(until) } else { until };
        if set.contains(path.position(i)) {
            total += -(-lambda * a).exp() * (-lambda * (b - a)).exp_m1() / lambda;
        }
    }
    total
}
