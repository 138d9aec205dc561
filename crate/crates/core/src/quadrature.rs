//! Gauss–Legendre rules on the unit interval.
//!
//! Every integral in the crate is taken over `[0, 1]`; callers working on
//! another finite interval map it affinely before building moments.

use std::f64::consts::PI;

use crate::error::{check_len, domain, Result};

/// Largest rule size accepted by [`build_gauss_legendre`].
pub const MAX_RULE_SIZE: usize = 4096;

/// Rule sizes used for the reconstructions reported in the tables.
pub const DEFAULT_RULE_SIZES: [usize; 2] = [96, 192];

const NEWTON_TOLERANCE: f64 = 1e-15;
const NEWTON_MAX_ITERATIONS: usize = 100;

/// Nodes and positive weights discretizing `∫₀¹ f(x) dx ≈ Σ wⱼ f(xⱼ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes in strictly increasing order, all inside `(0, 1)`.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Σⱼ wⱼ vⱼ` for values sampled at the nodes.
    pub fn integrate(&self, values: &[f64]) -> Result<f64> {
        check_len("quadrature values", self.size(), values.len())?;
        Ok(self.weights.iter().zip(values).map(|(w, v)| w * v).sum())
    }

    /// Integrates a closure by sampling it at the nodes.
    pub fn integrate_fn(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, w)| w * f(x))
            .sum()
    }

    /// Applies `f` at every node.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|&x| f(x)).collect()
    }
}

/// Builds the `n`-point Gauss–Legendre rule on `[0, 1]`.
///
/// Roots of `Pₙ` are found by Newton iteration from Chebyshev-angle initial
/// guesses; only the positive half is computed and mirrored, so the rule is
/// symmetric about `1/2` to the last bit.
pub fn build_gauss_legendre(n: usize) -> Result<QuadratureRule> {
    if n == 0 || n > MAX_RULE_SIZE {
        return domain(format!(
            "Gauss-Legendre rule size must be in 1..={MAX_RULE_SIZE}, got {n}"
        ));
    }

    let half = n / 2;
    let mut lower_nodes = Vec::with_capacity(half);
    let mut lower_weights = Vec::with_capacity(half);
    for k in 1..=half {
        let guess = (PI * (k as f64 - 0.25) / (n as f64 + 0.5)).cos();
        let (root, derivative) = legendre_root(n, guess);
        let weight = 2.0 / ((1.0 - root * root) * derivative * derivative);
        lower_nodes.push((1.0 - root) / 2.0);
        lower_weights.push(weight / 2.0);
    }

    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    nodes.extend_from_slice(&lower_nodes);
    weights.extend_from_slice(&lower_weights);
    if n % 2 == 1 {
        let (_, derivative) = legendre_with_derivative(n, 0.0);
        nodes.push(0.5);
        weights.push(1.0 / (derivative * derivative));
    }
    nodes.extend(lower_nodes.iter().rev().map(|x| 1.0 - x));
    weights.extend(lower_weights.iter().rev());

    Ok(QuadratureRule { nodes, weights })
}

/// Newton iteration for a root of `Pₙ` on `[-1, 1]`; returns the root and
/// `Pₙ'` evaluated there.
fn legendre_root(n: usize, mut x: f64) -> (f64, f64) {
    for _ in 0..NEWTON_MAX_ITERATIONS {
        let (p, dp) = legendre_with_derivative(n, x);
        let dx = p / dp;
        x -= dx;
        if dx.abs() <= NEWTON_TOLERANCE {
            break;
        }
    }
    let (_, dp) = legendre_with_derivative(n, x);
    (x, dp)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut previous = 1.0;
    let mut current = x;
    for j in 2..=n {
        let j = j as f64;
        let next = ((2.0 * j - 1.0) * x * current - (j - 1.0) * previous) / j;
        previous = current;
        current = next;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let derivative = n as f64 * (x * current - previous) / (x * x - 1.0);
    (current, derivative)
}

/// Integrates `h` against the arcsine density `1/(π√(x − x²))` on `[0, 1]`
/// with the `n`-point Gauss–Chebyshev rule, i.e. the midpoint rule in
/// `θ` under `x = (1 + cos θ)/2`. Exact for polynomials of degree `< 2n`.
pub fn integrate_arcsine(n: usize, h: impl Fn(f64) -> f64) -> Result<f64> {
    if n == 0 {
        return domain("Gauss-Chebyshev rule needs at least one point");
    }
    let sum: f64 = arcsine_nodes(n).into_iter().map(h).sum();
    Ok(sum / n as f64)
}

/// Nodes `(1 + cos θₖ)/2`, `θₖ = π(2k − 1)/(2n)`, of the `n`-point
/// Gauss–Chebyshev rule; every weight is `1/n`.
pub fn arcsine_nodes(n: usize) -> Vec<f64> {
    (1..=n)
        .map(|k| {
            let theta = PI * (2 * k - 1) as f64 / (2 * n) as f64;
            (1.0 + theta.cos()) / 2.0
        })
        .collect()
}
