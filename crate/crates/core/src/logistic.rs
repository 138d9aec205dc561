//! Ergodic moments and histograms of the logistic map `x ↦ Γ x (1 − x)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::basis::{fill_basis_values, BasisKind, MomentVector};
use crate::error::{domain, Result};

/// The order cap for [`generate_map_moments`].
pub const MAX_MAP_ORDER: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticConfig {
    pub gamma: f64,
    pub ensemble_size: usize,
    pub transient_steps: usize,
    pub sample_steps: usize,
    pub histogram_bins: usize,
    pub rng_seed: u64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self {
            gamma: 3.6785,
            ensemble_size: 100,
            transient_steps: 10_000,
            sample_steps: 1_000_000,
            histogram_bins: 512,
            rng_seed: 20_240_101,
        }
    }
}

impl LogisticConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma <= 4.0) {
            return domain(format!("gamma must be in (0, 4], got {}", self.gamma));
        }
        if self.ensemble_size == 0 || self.transient_steps == 0 {
            return domain("ensemble_size and transient_steps must be positive");
        }
        if self.sample_steps < 100_000 {
            return domain(format!(
                "sample_steps must be at least 100000, got {}",
                self.sample_steps
            ));
        }
        if self.histogram_bins < 64 {
            return domain(format!(
                "histogram_bins must be at least 64, got {}",
                self.histogram_bins
            ));
        }
        Ok(())
    }
}

/// Trajectory `k`: ChaCha8 seeded with `rng_seed` on stream `k`, one uniform
/// draw in `(0, 1)` for the initial point, then the transient is discarded.
struct Trajectory {
    gamma: f64,
    x: f64,
}

impl Trajectory {
    fn new(cfg: &LogisticConfig, k: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
        rng.set_stream(k as u64);
        let mut x: f64 = rng.random();
        while x <= 0.0 {
            x = rng.random();
        }
        let mut t = Self {
            gamma: cfg.gamma,
            x,
        };
        for _ in 0..cfg.transient_steps {
            t.step();
        }
        t
    }

    fn step(&mut self) -> f64 {
        self.x = self.gamma * self.x * (1.0 - self.x);
        self.x
    }
}

/// Ensemble-and-time average of `T*ₙ(x_t)`, `n = 0..M`.
///
/// Trajectories run in parallel; per-trajectory sums are reduced in
/// trajectory order, so the result is bit-identical for a fixed seed.
pub fn generate_map_moments(cfg: &LogisticConfig, order: usize) -> Result<MomentVector> {
    cfg.validate()?;
    if order > MAX_MAP_ORDER {
        return domain(format!("map moment order {order} exceeds {MAX_MAP_ORDER}"));
    }
    let per_trajectory: Vec<Vec<f64>> = (0..cfg.ensemble_size)
        .into_par_iter()
        .map(|k| {
            let mut trajectory = Trajectory::new(cfg, k);
            let mut row = vec![0.0; order + 1];
            let mut sums = vec![0.0; order + 1];
            for _ in 0..cfg.sample_steps {
                let x = trajectory.step();
                fill_basis_values(BasisKind::ShiftedChebyshev, x, &mut row);
                for (s, t) in sums.iter_mut().zip(&row) {
                    *s += t;
                }
            }
            sums
        })
        .collect();
    let total = (cfg.ensemble_size * cfg.sample_steps) as f64;
    let mut values = vec![0.0; order + 1];
    for sums in &per_trajectory {
        for (v, s) in values.iter_mut().zip(sums) {
            *v += s;
        }
    }
    for v in &mut values {
        *v /= total;
    }
    values[0] = 1.0;
    MomentVector::new(BasisKind::ShiftedChebyshev, values)
}

/// A piecewise-constant density on `[bin_edges[0], bin_edges[last]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramDensity {
    bin_edges: Vec<f64>,
    densities: Vec<f64>,
}

impl HistogramDensity {
    pub fn new(bin_edges: Vec<f64>, densities: Vec<f64>) -> Result<Self> {
        if bin_edges.len() != densities.len() + 1 || densities.is_empty() {
            return domain("a histogram needs one more edge than bins");
        }
        if !bin_edges.windows(2).all(|w| w[0] < w[1]) {
            return domain("histogram edges must be strictly increasing");
        }
        if densities.iter().any(|d| !(*d >= 0.0)) {
            return domain("histogram densities must be non-negative");
        }
        Ok(Self {
            bin_edges,
            densities,
        })
    }

    pub fn bin_edges(&self) -> &[f64] {
        &self.bin_edges
    }

    pub fn densities(&self) -> &[f64] {
        &self.densities
    }

    pub fn bin_centers(&self) -> Vec<f64> {
        self.bin_edges
            .windows(2)
            .map(|w| (w[0] + w[1]) / 2.0)
            .collect()
    }

    /// `Σ density · width`.
    pub fn total_mass(&self) -> f64 {
        self.bin_edges
            .windows(2)
            .zip(&self.densities)
            .map(|(w, d)| d * (w[1] - w[0]))
            .sum()
    }

    /// Linear interpolation between bin centers; zero outside the outer
    /// edges, the end bins' values between an edge and its center.
    pub fn interpolate(&self, x: f64) -> f64 {
        let first = self.bin_edges[0];
        let last = self.bin_edges[self.bin_edges.len() - 1];
        if x < first || x > last {
            return 0.0;
        }
        let centers = self.bin_centers();
        let n = centers.len();
        if x <= centers[0] {
            return self.densities[0];
        }
        if x >= centers[n - 1] {
            return self.densities[n - 1];
        }
        let k = centers.partition_point(|c| *c <= x) - 1;
        let t = (x - centers[k]) / (centers[k + 1] - centers[k]);
        self.densities[k] + t * (self.densities[k + 1] - self.densities[k])
    }
}

/// Normalized histogram of the pooled post-transient iterates over
/// `[min, max]` of those iterates.
pub fn generate_histogram(cfg: &LogisticConfig) -> Result<HistogramDensity> {
    cfg.validate()?;
    let (lo, hi) = (0..cfg.ensemble_size)
        .into_par_iter()
        .map(|k| {
            let mut trajectory = Trajectory::new(cfg, k);
            let mut range = (f64::INFINITY, f64::NEG_INFINITY);
            for _ in 0..cfg.sample_steps {
                let x = trajectory.step();
                range = (range.0.min(x), range.1.max(x));
            }
            range
        })
        .reduce(
            || (f64::INFINITY, f64::NEG_INFINITY),
            |a, b| (a.0.min(b.0), a.1.max(b.1)),
        );
    if !(hi > lo) {
        return domain(format!(
            "iterates collapse to a single value {lo}; no density to histogram"
        ));
    }
    let bins = cfg.histogram_bins;
    let width = (hi - lo) / bins as f64;
    let counts = (0..cfg.ensemble_size)
        .into_par_iter()
        .map(|k| {
            let mut trajectory = Trajectory::new(cfg, k);
            let mut counts = vec![0u64; bins];
            for _ in 0..cfg.sample_steps {
                let x = trajectory.step();
                let b = (((x - lo) / width) as usize).min(bins - 1);
                counts[b] += 1;
            }
            counts
        })
        .reduce(
            || vec![0u64; bins],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    let total = (cfg.ensemble_size * cfg.sample_steps) as f64;
    let edges: Vec<f64> = (0..=bins)
        .map(|b| if b == bins { hi } else { lo + b as f64 * width })
        .collect();
    let densities = counts
        .iter()
        .zip(edges.windows(2))
        .map(|(&c, w)| c as f64 / (total * (w[1] - w[0])))
        .collect();
    HistogramDensity::new(edges, densities)
}
