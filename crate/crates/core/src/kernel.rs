//! Symmetric jump kernels comparable to the α-stable kernel and truncated at
//! unit jump length.
//!
//! A kernel is `J(x, y) = a(x, y) |y - x|^(-d-α)` for `|y - x| < 1` and zero
//! otherwise, where the modulation `a` is symmetric and takes values in
//! `[κ₁, κ₂]`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{param, Error, Result};
use crate::rng;

/// Proposals allowed per large-jump draw before giving up.
pub const REJECTION_CAP: usize = 1_000_000;

/// Default node budget of the product quadrature used for non-constant
/// modulations.
pub const DEFAULT_QUADRATURE_NODES: usize = 2048;

/// Upper bound on the quadratic variation per unit time discarded by the
/// small-jump truncation when the default cutoff is used.
pub const DEFAULT_DISCARDED_VARIATION: f64 = 1e-4;

pub type ModulationFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;

static CLAMP_WARNED: AtomicBool = AtomicBool::new(false);

/// The position- and direction-dependent factor `a(x, y)` of the kernel.
#[derive(Clone)]
pub enum Modulation {
    /// `a ≡ κ₂`.
    Isotropic,
    /// `κ₁` or `κ₂` according to the parity of `⌊2x₁⌋ + ⌊2y₁⌋`.
    Checkerboard,
    /// `κ₁ + (κ₂ - κ₁) cos²θ` with `θ` the angle between `y - x` and the first axis.
    DirectionWeighted,
    /// User supplied. Symmetrized and clamped into `[κ₁, κ₂]` on evaluation.
    Custom(ModulationFn),
}

impl Modulation {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "isotropic" => Ok(Modulation::Isotropic),
            "checkerboard" => Ok(Modulation::Checkerboard),
            "direction-weighted" => Ok(Modulation::DirectionWeighted),
            other => Err(Error::Config(format!("unknown modulation '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Modulation::Isotropic => "isotropic",
            Modulation::Checkerboard => "checkerboard",
            Modulation::DirectionWeighted => "direction-weighted",
            Modulation::Custom(_) => "custom",
        }
    }
}

impl fmt::Debug for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Sphere nodes and weights for the angular part of the product quadrature.
#[derive(Debug, Clone)]
struct SphereRule {
    nodes: Vec<f64>,
    weight: f64,
    radial_cells: usize,
}

impl SphereRule {
    fn new(dim: usize, budget: usize) -> Self {
        let area = sphere_area(dim);
        let count = match dim {
            1 => 2,
            2 => 32,
            _ => 128,
        };
        let radial_cells = (budget / count).max(1);
        let mut nodes = Vec::with_capacity(count * dim);
        match dim {
            1 => nodes.extend_from_slice(&[1.0, -1.0]),
            2 => {
                for k in 0..count {
                    let theta = 2.0 * PI * (k as f64 + 0.5) / count as f64;
                    nodes.extend_from_slice(&[theta.cos(), theta.sin()]);
                }
            }
            3 => {
                // Fibonacci lattice
                let golden = PI * (3.0 - 5f64.sqrt());
                for k in 0..count {
                    let z = 1.0 - (2.0 * k as f64 + 1.0) / count as f64;
                    let rho = (1.0 - z * z).sqrt();
                    let phi = golden * k as f64;
                    nodes.extend_from_slice(&[rho * phi.cos(), rho * phi.sin(), z]);
                }
            }
            _ => {
                let mut rng = rng::stream(rng::derive_seed(dim as u64, 0x5EED), 0);
                let mut v = vec![0.0; dim];
                for _ in 0..count {
                    random_direction(&mut rng, &mut v);
                    nodes.extend_from_slice(&v);
                }
            }
        }
        SphereRule {
            nodes,
            weight: area / count as f64,
            radial_cells,
        }
    }
}

/// Validated kernel parameters. Immutable once built.
#[derive(Clone)]
pub struct KernelParams {
    dim: usize,
    alpha: f64,
    kappa1: f64,
    kappa2: f64,
    modulation: Modulation,
    sphere: Arc<SphereRule>,
}

impl fmt::Debug for KernelParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelParams")
            .field("dim", &self.dim)
            .field("alpha", &self.alpha)
            .field("kappa1", &self.kappa1)
            .field("kappa2", &self.kappa2)
            .field("modulation", &self.modulation)
            .finish()
    }
}

impl KernelParams {
    pub fn new(dim: usize, alpha: f64, kappa1: f64, kappa2: f64, modulation: Modulation) -> Result<Self> {
        if dim == 0 {
            return param("dimension must be positive");
        }
        if !(alpha > 0.0 && alpha < 2.0) {
            return param(format!("alpha must lie in (0, 2), got {alpha}"));
        }
        if !(kappa1 > 0.0 && kappa1.is_finite()) {
            return param(format!("kappa1 must be positive, got {kappa1}"));
        }
        if !(kappa2 >= kappa1 && kappa2.is_finite()) {
            return param(format!("kappa2 must be at least kappa1, got {kappa2} < {kappa1}"));
        }
        Ok(KernelParams {
            dim,
            alpha,
            kappa1,
            kappa2,
            modulation,
            sphere: Arc::new(SphereRule::new(dim, DEFAULT_QUADRATURE_NODES)),
        })
    }

    /// `a ≡ κ` in dimension `dim`.
    pub fn isotropic(dim: usize, alpha: f64, kappa: f64) -> Result<Self> {
        Self::new(dim, alpha, kappa, kappa, Modulation::Isotropic)
    }

    /// Replaces the node budget of the non-isotropic rate quadrature.
    pub fn with_quadrature_nodes(mut self, budget: usize) -> Result<Self> {
        if budget < 2 {
            return param("quadrature budget must be at least 2 nodes");
        }
        self.sphere = Arc::new(SphereRule::new(self.dim, budget));
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn kappa1(&self) -> f64 {
        self.kappa1
    }

    pub fn kappa2(&self) -> f64 {
        self.kappa2
    }

    pub fn modulation_kind(&self) -> &Modulation {
        &self.modulation
    }

    /// True when `a` does not depend on its arguments, so jump rates are
    /// state independent and thinning always accepts.
    pub fn is_constant(&self) -> bool {
        matches!(self.modulation, Modulation::Isotropic) || self.kappa1 == self.kappa2
    }

    pub(crate) fn check_point(&self, x: &[f64], what: &str) -> Result<()> {
        if x.len() != self.dim {
            return param(format!("{what} has dimension {} but the kernel has {}", x.len(), self.dim));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return param(format!("{what} has non-finite coordinates"));
        }
        Ok(())
    }

    /// The modulation `a(x, y)`, always symmetric and within `[κ₁, κ₂]`.
    pub fn modulation(&self, x: &[f64], y: &[f64]) -> f64 {
        match &self.modulation {
            Modulation::Isotropic => self.kappa2,
            Modulation::Checkerboard => {
                let cell = (2.0 * x[0]).floor() + (2.0 * y[0]).floor();
                if cell.rem_euclid(2.0) == 0.0 {
                    self.kappa1
                } else {
                    self.kappa2
                }
            }
            Modulation::DirectionWeighted => {
                let mut norm2 = 0.0;
                for (a, b) in x.iter().zip(y) {
                    norm2 += (b - a) * (b - a);
                }
                let w1 = y[0] - x[0];
                let cos2 = if norm2 > 0.0 { w1 * w1 / norm2 } else { 1.0 };
                self.kappa1 + (self.kappa2 - self.kappa1) * cos2
            }
            Modulation::Custom(f) => {
                let raw = 0.5 * (f(x, y) + f(y, x));
                let clamped = if raw.is_nan() { self.kappa1 } else { raw.clamp(self.kappa1, self.kappa2) };
                if clamped != raw && !CLAMP_WARNED.swap(true, Ordering::Relaxed) {
                    log::warn!(
                        "modulation value {raw} outside [{}, {}] clamped; further clamps are not reported",
                        self.kappa1,
                        self.kappa2
                    );
                }
                clamped
            }
        }
    }

    /// `J(x, y)`. Errors on the diagonal, where the kernel is singular.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check_point(x, "x")?;
        self.check_point(y, "y")?;
        let r = distance(x, y);
        if r == 0.0 {
            return Err(Error::Singular);
        }
        if r >= 1.0 {
            return Ok(0.0);
        }
        Ok(self.modulation(x, y) * r.powf(-(self.dim as f64) - self.alpha))
    }

    /// Surface measure of the unit sphere in `ℝ^d`.
    pub fn sphere_area(&self) -> f64 {
        sphere_area(self.dim)
    }

    /// `∫_{lo ≤ |w| < hi} κ |w|^(-d-α) dw` for a constant intensity `κ`.
    pub fn shell_mass(&self, kappa: f64, lo: f64, hi: f64) -> f64 {
        kappa * self.sphere_area() * (lo.powf(-self.alpha) - hi.powf(-self.alpha)) / self.alpha
    }

    /// Rate of the dominating kernel `κ₂|w|^(-d-α)` on jumps in `[lo, hi)`.
    pub fn dominating_rate(&self, lo: f64, hi: f64) -> f64 {
        self.shell_mass(self.kappa2, lo, hi)
    }

    /// Total rate of jumps of length in `[β, 1)` from `x`.
    pub fn large_jump_rate(&self, x: &[f64], beta: f64) -> Result<f64> {
        check_cutoff(beta)?;
        self.check_point(x, "x")?;
        Ok(self.large_jump_rate_unchecked(x, beta))
    }

    pub(crate) fn large_jump_rate_unchecked(&self, x: &[f64], beta: f64) -> f64 {
        if self.is_constant() {
            return self.shell_mass(self.kappa2, beta, 1.0);
        }
        let rule = &self.sphere;
        let d = self.dim;
        let lo = beta.ln();
        let cells = rule.radial_cells;
        let du = -lo / cells as f64;
        let mut y = vec![0.0; d];
        let mut total = 0.0;
        for k in 0..cells {
            let u0 = lo + k as f64 * du;
            let u1 = if k + 1 == cells { 0.0 } else { u0 + du };
            let radial = ((-self.alpha * u0).exp() - (-self.alpha * u1).exp()) / self.alpha;
            let r = (0.5 * (u0 + u1)).exp();
            let mut angular = 0.0;
            for theta in rule.nodes.chunks_exact(d) {
                for i in 0..d {
                    y[i] = x[i] + r * theta[i];
                }
                angular += self.modulation(x, &y);
            }
            total += radial * angular * rule.weight;
        }
        total
    }

    /// Draws a displacement `w` with `β ≤ |w| < 1` from the normalized
    /// large-jump law `J(x, x + w) dw / λ(x)`.
    pub fn sample_large_jump<R: Rng + ?Sized>(&self, x: &[f64], beta: f64, rng: &mut R) -> Result<Vec<f64>> {
        check_cutoff(beta)?;
        self.check_point(x, "x")?;
        let mut w = vec![0.0; self.dim];
        self.sample_shell(x, beta, 1.0, rng, &mut w)?;
        Ok(w)
    }

    /// Rejection sampler for `J(x, x + w)` restricted to `lo ≤ |w| < hi`.
    pub(crate) fn sample_shell<R: Rng + ?Sized>(
        &self,
        x: &[f64],
        lo: f64,
        hi: f64,
        rng: &mut R,
        w: &mut [f64],
    ) -> Result<()> {
        let mut y = vec![0.0; self.dim];
        for _ in 0..REJECTION_CAP {
            self.propose(lo, hi, rng, w);
            if self.is_constant() {
                return Ok(());
            }
            for i in 0..self.dim {
                y[i] = x[i] + w[i];
            }
            if rng.random::<f64>() * self.kappa2 < self.modulation(x, &y) {
                return Ok(());
            }
        }
        Err(Error::RejectionCap(REJECTION_CAP))
    }

    /// Draws from the isotropic density `∝ |w|^(-d-α)` on `lo ≤ |w| < hi`.
    pub(crate) fn propose<R: Rng + ?Sized>(&self, lo: f64, hi: f64, rng: &mut R, w: &mut [f64]) {
        let r = sample_radius(self.alpha, lo, hi, rng);
        random_direction(rng, w);
        for v in w.iter_mut() {
            *v *= r;
        }
    }
}

fn check_cutoff(beta: f64) -> Result<()> {
    if beta > 0.0 && beta < 1.0 {
        Ok(())
    } else {
        param(format!("cutoff must lie in (0, 1), got {beta}"))
    }
}

/// Inverse CDF of the radial density `∝ r^(-1-α)` on `[lo, hi)`.
pub(crate) fn sample_radius<R: Rng + ?Sized>(alpha: f64, lo: f64, hi: f64, rng: &mut R) -> f64 {
    let a = lo.powf(-alpha);
    let b = hi.powf(-alpha);
    loop {
        let u: f64 = rng.random();
        let r = (a - u * (a - b)).powf(-1.0 / alpha);
        if r < hi {
            return r.max(lo);
        }
    }
}

/// Uniform unit vector written into `out`.
pub(crate) fn random_direction<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    match out.len() {
        1 => out[0] = if rng.random::<bool>() { 1.0 } else { -1.0 },
        2 => {
            let theta = 2.0 * PI * rng.random::<f64>();
            out[0] = theta.cos();
            out[1] = theta.sin();
        }
        _ => loop {
            let mut norm2 = 0.0;
            for v in out.iter_mut() {
                *v = rng.sample(StandardNormal);
                norm2 += *v * *v;
            }
            if norm2 > 1e-300 {
                let inv = norm2.sqrt().recip();
                out.iter_mut().for_each(|v| *v *= inv);
                return;
            }
        },
    }
}

pub fn sphere_area(dim: usize) -> f64 {
    let half = dim as f64 / 2.0;
    2.0 * PI.powf(half) / statrs::function::gamma::gamma(half)
}

pub fn distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// Small-jump cutoff for which the discarded quadratic variation per unit time,
/// `κ₂ σ_{d-1} ε^(2-α) / (2-α)`, equals `budget`.
pub fn eps_min_for_variation(params: &KernelParams, budget: f64) -> f64 {
    let two_minus = 2.0 - params.alpha;
    let eps = (budget * two_minus / (params.kappa2 * params.sphere_area())).powf(1.0 / two_minus);
    eps.min(0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_1d() -> KernelParams {
        KernelParams::isotropic(1, 1.0, 1.0).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(KernelParams::isotropic(1, 0.0, 1.0).is_err());
        assert!(KernelParams::isotropic(1, 2.0, 1.0).is_err());
        assert!(KernelParams::isotropic(0, 1.0, 1.0).is_err());
        assert!(KernelParams::new(1, 1.0, 2.0, 1.0, Modulation::Isotropic).is_err());
        assert!(KernelParams::new(1, 1.0, 0.0, 1.0, Modulation::Isotropic).is_err());
    }

    #[test]
    fn kernel_examples() {
        let k = unit_1d();
        assert_eq!(k.eval(&[0.0], &[2.0]).unwrap(), 0.0);
        assert_eq!(k.eval(&[0.0], &[1.0]).unwrap(), 0.0);
        assert_eq!(k.eval(&[0.0], &[0.5]).unwrap(), 4.0);
        assert_eq!(k.eval(&[0.3], &[0.3]), Err(Error::Singular));
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(1) - 2.0).abs() < 1e-12);
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-12);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-12);
    }

    /// Composite Simpson rule, used as an independent check of the analytic
    /// shell mass.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let x = a + i as f64 * h;
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        s * h / 3.0
    }

    #[test]
    fn large_jump_rate_matches_quadrature() {
        let k = unit_1d();
        let rate = k.large_jump_rate(&[0.0], 0.5).unwrap();
        let oracle = 2.0 * simpson(|r| r.powi(-2), 0.5, 1.0, 2000);
        assert!((oracle - 2.0).abs() < 1e-9);
        assert!((rate - 2.0).abs() < 1e-12);

        let k3 = KernelParams::isotropic(3, 0.7, 1.3).unwrap();
        let oracle = 1.3 * 4.0 * PI * simpson(|r| r.powf(-1.7), 0.2, 1.0, 4000);
        assert!((k3.large_jump_rate(&[0.0; 3], 0.2).unwrap() - oracle).abs() < 1e-6 * oracle);
    }

    #[test]
    fn large_jump_rate_vanishes_as_cutoff_approaches_one() {
        let k = KernelParams::isotropic(2, 1.2, 1.0).unwrap();
        let r = k.large_jump_rate(&[0.0, 0.0], 1.0 - 1e-9).unwrap();
        assert!(r < 1e-7);
        assert!(k.large_jump_rate(&[0.0, 0.0], 1.0).is_err());
        assert!(k.large_jump_rate(&[0.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn modulated_rate_within_two_sided_bound() {
        for modulation in [Modulation::Checkerboard, Modulation::DirectionWeighted] {
            for dim in [1, 2, 3] {
                let k = KernelParams::new(dim, 1.0, 1.0, 2.0, modulation.clone()).unwrap();
                let lower = k.shell_mass(1.0, 0.5, 1.0);
                let upper = k.shell_mass(2.0, 0.5, 1.0);
                for start in [0.0, 0.1, 0.26, 0.77] {
                    let mut x = vec![0.0; dim];
                    x[0] = start;
                    let rate = k.large_jump_rate(&x, 0.5).unwrap();
                    assert!(rate >= lower * (1.0 - 1e-12) && rate <= upper * (1.0 + 1e-12), "{rate}");
                }
            }
        }
        let k = KernelParams::new(1, 1.0, 1.0, 2.0, Modulation::Checkerboard).unwrap();
        let rate = k.large_jump_rate(&[0.1], 0.5).unwrap();
        assert!((2.0..=4.0).contains(&rate));
    }

    #[test]
    fn direction_weighted_rate_matches_angular_average() {
        // average of cos²θ over the circle is 1/2
        let k = KernelParams::new(2, 1.0, 1.0, 3.0, Modulation::DirectionWeighted).unwrap();
        let expected = k.shell_mass(2.0, 0.25, 1.0);
        let rate = k.large_jump_rate(&[0.3, -0.2], 0.25).unwrap();
        assert!((rate - expected).abs() < 1e-9 * expected);
    }

    #[test]
    fn large_jump_rate_nonincreasing_in_cutoff() {
        let k = KernelParams::new(2, 0.8, 1.0, 1.5, Modulation::Checkerboard).unwrap();
        let x = [0.13, 0.4];
        let mut prev = f64::INFINITY;
        for i in 1..40 {
            let beta = i as f64 / 40.0;
            let r = k.large_jump_rate(&x, beta).unwrap();
            assert!(r <= prev);
            prev = r;
        }
    }

    #[test]
    fn custom_modulation_is_symmetrized_and_clamped() {
        let f: ModulationFn = Arc::new(|x: &[f64], y: &[f64]| if x[0] < y[0] { 5.0 } else { 0.0 });
        let k = KernelParams::new(1, 1.0, 1.0, 2.0, Modulation::Custom(f)).unwrap();
        // (5 + 0)/2 = 2.5, clamped to 2
        assert_eq!(k.modulation(&[0.0], &[0.5]), 2.0);
        assert_eq!(k.modulation(&[0.5], &[0.0]), 2.0);
        let g: ModulationFn = Arc::new(|_: &[f64], _: &[f64]| 0.1);
        let k = KernelParams::new(1, 1.0, 1.0, 2.0, Modulation::Custom(g)).unwrap();
        assert_eq!(k.modulation(&[0.0], &[0.5]), 1.0);
    }

    #[test]
    fn large_jumps_lie_in_shell() {
        let k = KernelParams::new(2, 1.5, 1.0, 4.0, Modulation::Checkerboard).unwrap();
        let mut rng = rng::stream(11, 0);
        for _ in 0..5000 {
            let w = k.sample_large_jump(&[0.2, 0.1], 0.3, &mut rng).unwrap();
            let r = w.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((0.3..1.0).contains(&r), "{r}");
        }
    }

    #[test]
    fn large_jump_tail_fraction() {
        // P(|w| >= 0.75) = (1/0.75 - 1) / (1/0.5 - 1) = 1/3 for density ∝ r^-2 on [0.5, 1)
        let k = unit_1d();
        let mut rng = rng::stream(5, 0);
        let n = 100_000;
        let hits = (0..n)
            .filter(|_| k.sample_large_jump(&[0.0], 0.5, &mut rng).unwrap()[0].abs() >= 0.75)
            .count();
        let frac = hits as f64 / n as f64;
        assert!((frac - 1.0 / 3.0).abs() < 0.01, "{frac}");
    }

    #[test]
    fn isotropic_large_jumps_have_zero_mean() {
        for dim in [1, 2, 3] {
            let k = KernelParams::isotropic(dim, 1.0, 1.0).unwrap();
            let mut rng = rng::stream(17, dim as u64);
            let n = 100_000;
            let mut sum = vec![0.0; dim];
            let mut sumsq = vec![0.0; dim];
            for _ in 0..n {
                let w = k.sample_large_jump(&vec![0.0; dim], 0.4, &mut rng).unwrap();
                for i in 0..dim {
                    sum[i] += w[i];
                    sumsq[i] += w[i] * w[i];
                }
            }
            for i in 0..dim {
                let mean = sum[i] / n as f64;
                let se = ((sumsq[i] / n as f64 - mean * mean) / n as f64).sqrt();
                assert!(mean.abs() < 3.0 * se, "dim {dim} coord {i}: {mean} vs se {se}");
            }
        }
    }

    #[test]
    fn radial_law_within_dkw_band() {
        // DKW: sup|F_n - F| <= sqrt(ln(2/0.01) / (2n)) with probability 0.99
        let alpha = 1.3;
        let (lo, hi) = (0.1, 1.0);
        let k = KernelParams::isotropic(3, alpha, 1.0).unwrap();
        let mut rng = rng::stream(23, 0);
        let n = 20_000;
        let mut radii: Vec<f64> = (0..n)
            .map(|_| {
                let w = k.sample_large_jump(&[0.0; 3], lo, &mut rng).unwrap();
                distance(&w, &[0.0; 3])
            })
            .collect();
        radii.sort_by(f64::total_cmp);
        // CDF by trapezoidal quadrature of the radial density r^(-1-α)
        let density = |r: f64| r.powf(-1.0 - alpha);
        let grid = 20_000;
        let h = (hi - lo) / grid as f64;
        let mut cdf = vec![0.0; grid + 1];
        for i in 1..=grid {
            let a = lo + (i - 1) as f64 * h;
            cdf[i] = cdf[i - 1] + 0.5 * h * (density(a) + density(a + h));
        }
        let total = cdf[grid];
        let quad_cdf = |r: f64| {
            let pos = ((r - lo) / h).clamp(0.0, grid as f64);
            let i = (pos.floor() as usize).min(grid - 1);
            let frac = pos - i as f64;
            (cdf[i] + frac * (cdf[i + 1] - cdf[i])) / total
        };
        let band = ((2.0f64 / 0.01).ln() / (2.0 * n as f64)).sqrt();
        let mut worst: f64 = 0.0;
        for (i, &r) in radii.iter().enumerate() {
            let f = quad_cdf(r);
            worst = worst.max((f - i as f64 / n as f64).abs()).max(((i + 1) as f64 / n as f64 - f).abs());
        }
        assert!(worst < band, "{worst} >= {band}");
    }

    #[test]
    fn default_cutoff_meets_variation_budget() {
        let k = KernelParams::isotropic(2, 1.0, 1.0).unwrap();
        let eps = eps_min_for_variation(&k, DEFAULT_DISCARDED_VARIATION);
        let discarded = k.kappa2() * k.sphere_area() * eps.powf(2.0 - k.alpha()) / (2.0 - k.alpha());
        assert!((discarded - DEFAULT_DISCARDED_VARIATION).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn kernel_symmetric_and_bounded(
            x in prop::collection::vec(-2.0f64..2.0, 2),
            w in prop::collection::vec(-0.7f64..0.7, 2),
            alpha in 0.1f64..1.9,
            which in 0usize..3,
        ) {
            let modulation = [Modulation::Isotropic, Modulation::Checkerboard, Modulation::DirectionWeighted][which].clone();
            let k = KernelParams::new(2, alpha, 0.5, 2.0, modulation).unwrap();
            let y: Vec<f64> = x.iter().zip(&w).map(|(a, b)| a + b).collect();
            let r = distance(&x, &y);
            prop_assume!(r > 1e-9);
            let j = k.eval(&x, &y).unwrap();
            prop_assert_eq!(j, k.eval(&y, &x).unwrap());
            if r < 1.0 {
                let base = r.powf(-2.0 - alpha);
                prop_assert!(j >= 0.5 * base * (1.0 - 1e-12) && j <= 2.0 * base * (1.0 + 1e-12));
            } else {
                prop_assert_eq!(j, 0.0);
            }
        }
    }
}
