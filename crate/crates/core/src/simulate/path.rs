use std::io::{self, Write};

use crate::error::{param, Result};

/// Resolution of the time grid every event time lies on (2⁻³⁶).
///
/// Grid values below 2¹⁷ are exact in `f64`, so sums and differences of event
/// times are computed without rounding and pathwise identities hold exactly.
pub const TIME_TICK: f64 = 1.0 / (1u64 << 36) as f64;

/// Rounds `t` up to the time grid.
pub fn snap_up(t: f64) -> f64 {
    (t / TIME_TICK).ceil() * TIME_TICK
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    HorizonReached,
    DomainExited,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::HorizonReached => "horizon-reached",
            StopReason::DomainExited => "domain-exited",
        }
    }
}

/// A right-continuous piecewise-constant trajectory.
///
/// Event `i` is the pair `(t_i, x_i)`; the path sits at `x_i` on
/// `[t_i, t_{i+1})` and at the last position up to `t_final`.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    dim: usize,
    times: Vec<f64>,
    positions: Vec<f64>,
    t_final: f64,
    stop_reason: StopReason,
}

impl Path {
    pub(crate) fn start(dim: usize, x0: &[f64]) -> Self {
        Path {
            dim,
            times: vec![0.0],
            positions: x0.to_vec(),
            t_final: 0.0,
            stop_reason: StopReason::HorizonReached,
        }
    }

    pub(crate) fn push(&mut self, t: f64, x: &[f64]) {
        self.times.push(t);
        self.positions.extend_from_slice(x);
    }

    pub(crate) fn finish(&mut self, t_final: f64, reason: StopReason) {
        self.t_final = t_final;
        self.stop_reason = reason;
    }

    /// Builds a path from explicit events. The first event must be at time 0,
    /// times must increase strictly and consecutive positions must differ.
    pub fn from_events(events: &[(f64, Vec<f64>)], t_final: f64) -> Result<Self> {
        let Some((t0, x0)) = events.first() else {
            return param("a path needs at least one event");
        };
        if *t0 != 0.0 {
            return param("the first event must be at time 0");
        }
        let dim = x0.len();
        let mut path = Path::start(dim, x0);
        for pair in events.windows(2) {
            let ((ta, xa), (tb, xb)) = (&pair[0], &pair[1]);
            if xb.len() != dim {
                return param("events have inconsistent dimensions");
            }
            if tb <= ta {
                return param("event times must increase strictly");
            }
            if xa == xb {
                return param("consecutive positions must differ");
            }
            path.push(*tb, xb);
        }
        if t_final < path.last_time() {
            return param("t_final precedes the last event");
        }
        path.finish(t_final, StopReason::HorizonReached);
        Ok(path)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of events, including the initial one.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Number of jumps.
    pub fn jumps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn time(&self, i: usize) -> f64 {
        self.times[i]
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    pub fn x0(&self) -> &[f64] {
        self.position(0)
    }

    pub fn last_position(&self) -> &[f64] {
        self.position(self.len() - 1)
    }

    pub fn last_time(&self) -> f64 {
        *self.times.last().expect("paths are never empty")
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn stop_reason(&self) -> StopReason {
        self.stop_reason
    }

    /// `X_t`: the position of the last event at or before `t`.
    pub fn position_at(&self, t: f64) -> &[f64] {
        let i = self.times.partition_point(|&s| s <= t).max(1) - 1;
        self.position(i)
    }

    /// Iterator over `(t_i, x_i)`.
    pub fn events(&self) -> impl Iterator<Item = (f64, &[f64])> + '_ {
        self.times.iter().copied().zip(self.positions.chunks_exact(self.dim))
    }

    /// Displacements `ΔX` at each jump, in order.
    pub fn displacements(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (1..self.len()).map(move |i| {
            self.position(i)
                .iter()
                .zip(self.position(i - 1))
                .map(|(b, a)| b - a)
                .collect()
        })
    }

    /// Writes `t,x1,...,xd` rows, one per event, plus a final row at `t_final`.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        write!(out, "t")?;
        for i in 1..=self.dim {
            write!(out, ",x{i}")?;
        }
        writeln!(out)?;
        let mut row = |t: f64, x: &[f64]| -> io::Result<()> {
            write!(out, "{t}")?;
            for v in x {
                write!(out, ",{v}")?;
            }
            writeln!(out)
        };
        for (t, x) in self.events() {
            row(t, x)?;
        }
        if self.t_final > self.last_time() {
            row(self.t_final, self.last_position())?;
        }
        Ok(())
    }
}
