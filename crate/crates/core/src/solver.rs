//! Minimization of the discrete maximum-entropy dual
//!
//! `D(λ) = Σⱼ ωⱼ exp(Σᵢ t_ij λᵢ − 1) − Σᵢ μᵢ λᵢ`, `i = 0..M`,
//!
//! whose minimizer gives the nodal density `ρⱼ = exp(Σᵢ t_ij λᵢ − 1)`.

use std::fmt;
use std::str::FromStr;

use log::debug;
use nalgebra::{DMatrix, DVector};

use crate::basis::{BasisMatrix, MomentVector};
use crate::error::{check_len, domain, Error, Result};
use crate::quadrature::QuadratureRule;

pub const DEFAULT_EXPONENT_CAP: f64 = 700.0;
pub const DEFAULT_DELTA1_TARGET: f64 = 1e-15;
pub const DEFAULT_MAX_ITERATIONS: usize = 1000;

const ARMIJO_C1: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;
const JITTER_SCALE: f64 = 1e-12;
const RANK_TOLERANCE: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepStrategy {
    DampedNewton,
    GradientDescent,
    /// Damped Newton, with steepest descent whenever the Newton system is
    /// singular or its step makes no progress.
    #[default]
    Hybrid,
}

impl fmt::Display for StepStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StepStrategy::DampedNewton => "newton",
            StepStrategy::GradientDescent => "gradient",
            StepStrategy::Hybrid => "hybrid",
        })
    }
}

impl FromStr for StepStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "newton" | "damped-newton" => Ok(StepStrategy::DampedNewton),
            "gradient" | "gradient-descent" => Ok(StepStrategy::GradientDescent),
            "hybrid" => Ok(StepStrategy::Hybrid),
            other => domain(format!(
                "unknown step strategy '{other}' (expected newton, gradient or hybrid)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub max_iterations: usize,
    pub delta1_target: f64,
    pub step_strategy: StepStrategy,
    /// Largest exponent `Σᵢ t_ij λᵢ − 1` evaluated without clamping.
    pub exponent_cap: f64,
    /// Log progress every this many iterations; 0 disables it.
    pub verbose_every: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: DEFAULT_MAX_ITERATIONS,
            delta1_target: DEFAULT_DELTA1_TARGET,
            step_strategy: StepStrategy::default(),
            exponent_cap: DEFAULT_EXPONENT_CAP,
            verbose_every: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return domain("max_iterations must be positive");
        }
        if !(self.delta1_target > 0.0) {
            return domain(format!(
                "delta1_target must be positive, got {}",
                self.delta1_target
            ));
        }
        if !(self.exponent_cap > 0.0 && self.exponent_cap <= DEFAULT_EXPONENT_CAP) {
            return domain(format!(
                "exponent_cap must be in (0, {DEFAULT_EXPONENT_CAP}], got {}",
                self.exponent_cap
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    /// Dual variables `λ₀..λ_M`.
    pub lambda: Vec<f64>,
    /// `ρ̃ⱼ = ωⱼ ρⱼ`.
    pub rho_tilde: Vec<f64>,
    /// `ρⱼ = exp(Σᵢ t_ij λᵢ − 1)`.
    pub rho: Vec<f64>,
    /// `Z = exp(1 − λ₀)`.
    pub partition_value: f64,
    pub iterations_used: usize,
    /// RMS moment residual over `i = 1..M` (0 when `M = 0`).
    pub delta1_achieved: f64,
    /// `|Σⱼ ρ̃ⱼ − μ₀|`.
    pub mu0_residual: f64,
    pub objective: f64,
    pub converged: bool,
    /// Objective after each accepted step, starting from the initial point.
    pub objective_history: Vec<f64>,
}

impl Reconstruction {
    /// Nodal density for given dual variables. Exponents above the cap are
    /// a [`Error::Range`].
    pub fn from_lambda(
        lambda: &[f64],
        matrix: &BasisMatrix,
        rule: &QuadratureRule,
        exponent_cap: f64,
    ) -> Result<Self> {
        check_len("lambda", matrix.rows(), lambda.len())?;
        check_len("quadrature nodes", matrix.columns(), rule.size())?;
        let exponents = exponents(lambda, matrix);
        check_cap(&exponents, exponent_cap)?;
        let rho: Vec<f64> = exponents.iter().map(|e| e.exp()).collect();
        let rho_tilde = rho.iter().zip(rule.weights()).map(|(r, w)| r * w).collect();
        Ok(Self {
            lambda: lambda.to_vec(),
            rho_tilde,
            rho,
            partition_value: (1.0 - lambda[0]).exp(),
            iterations_used: 0,
            delta1_achieved: f64::NAN,
            mu0_residual: f64::NAN,
            objective: f64::NAN,
            converged: false,
            objective_history: Vec::new(),
        })
    }

    /// Moments `Σⱼ t_ij ρ̃ⱼ` of the reconstruction.
    pub fn moments(&self, matrix: &BasisMatrix) -> Result<Vec<f64>> {
        matrix.apply(&self.rho_tilde)
    }
}

/// `√((1/M) Σᵢ₌₁..M rᵢ²)` over a residual vector indexed `0..M`.
fn residual_rms(residual: &[f64]) -> f64 {
    let m = residual.len() - 1;
    if m == 0 {
        return 0.0;
    }
    (residual[1..].iter().map(|r| r * r).sum::<f64>() / m as f64).sqrt()
}

fn exponents(lambda: &[f64], matrix: &BasisMatrix) -> Vec<f64> {
    let mut e = vec![0.0; matrix.columns()];
    for (i, &l) in lambda.iter().enumerate() {
        if l == 0.0 {
            continue;
        }
        for (ej, t) in e.iter_mut().zip(matrix.row(i)) {
            *ej += l * t;
        }
    }
    for ej in &mut e {
        *ej -= 1.0;
    }
    e
}

fn check_cap(exponents: &[f64], cap: f64) -> Result<()> {
    match exponents.iter().position(|e| !(*e <= cap)) {
        Some(node) => Err(Error::Range {
            node,
            exponent: exponents[node],
            cap,
        }),
        None => Ok(()),
    }
}

/// Neumaier-compensated sum.
fn accurate_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut compensation) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            compensation += (sum - t) + v;
        } else {
            compensation += (v - t) + sum;
        }
        sum = t;
    }
    sum + compensation
}

/// The dual problem for one moment vector on one grid.
struct Dual<'a> {
    matrix: &'a BasisMatrix,
    rule: &'a QuadratureRule,
    mu: &'a [f64],
    cap: f64,
}

/// Objective, gradient and weighted density at one point.
struct Point {
    lambda: Vec<f64>,
    exponents: Vec<f64>,
    rho_tilde: Vec<f64>,
    objective: f64,
    gradient: Vec<f64>,
    /// Some exponent hit the cap; the values are not trustworthy.
    clamped: bool,
}

impl Point {
    fn gradient_norm(&self) -> f64 {
        self.gradient.iter().map(|g| g * g).sum::<f64>().sqrt()
    }

    /// `max(Δ₁, |μ₀ residual|)`, the quantity driven below the target.
    fn residual_metric(&self) -> f64 {
        residual_rms(&self.gradient).max(self.gradient[0].abs())
    }
}

impl<'a> Dual<'a> {
    fn new(
        matrix: &'a BasisMatrix,
        rule: &'a QuadratureRule,
        mu: &'a MomentVector,
        cap: f64,
    ) -> Result<Self> {
        check_len("quadrature nodes", matrix.columns(), rule.size())?;
        check_len("moments", matrix.rows(), mu.values().len())?;
        if mu.kind() != matrix.kind() {
            return domain(format!(
                "moments are in the {} basis but the matrix is {}",
                mu.kind(),
                matrix.kind()
            ));
        }
        Ok(Self {
            matrix,
            rule,
            mu: mu.values(),
            cap,
        })
    }

    fn point(&self, lambda: Vec<f64>) -> Point {
        let mut exponents = exponents(&lambda, self.matrix);
        let mut clamped = false;
        for e in &mut exponents {
            if !(*e <= self.cap) {
                *e = self.cap;
                clamped = true;
            }
        }
        let rho_tilde: Vec<f64> = exponents
            .iter()
            .zip(self.rule.weights())
            .map(|(e, w)| w * e.exp())
            .collect();
        let objective = accurate_sum(
            rho_tilde
                .iter()
                .copied()
                .chain(self.mu.iter().zip(&lambda).map(|(m, l)| -m * l)),
        );
        let gradient = (0..self.matrix.rows())
            .map(|i| {
                accurate_sum(
                    self.matrix
                        .row(i)
                        .iter()
                        .zip(&rho_tilde)
                        .map(|(t, r)| t * r)
                        .chain(std::iter::once(-self.mu[i])),
                )
            })
            .collect();
        Point {
            lambda,
            exponents,
            rho_tilde,
            objective,
            gradient,
            clamped,
        }
    }

    /// `D(trial) − D(base)`, evaluated as `Σⱼ ρ̃ⱼ expm1(Δeⱼ) − μ·Δλ` with
    /// `Δeⱼ = Σᵢ t_ij Δλᵢ` formed from the step itself. Subtracting the two
    /// exponent vectors instead would leave round-off of order `ε|e|`,
    /// far above the decrease of a Newton step near the optimum.
    fn objective_change(&self, base: &Point, trial: &Point) -> f64 {
        let step: Vec<f64> = trial
            .lambda
            .iter()
            .zip(&base.lambda)
            .map(|(l1, l0)| l1 - l0)
            .collect();
        let mut de = vec![0.0; self.matrix.columns()];
        for (i, &dl) in step.iter().enumerate() {
            if dl == 0.0 {
                continue;
            }
            for (d, t) in de.iter_mut().zip(self.matrix.row(i)) {
                *d += dl * t;
            }
        }
        accurate_sum(
            base.rho_tilde
                .iter()
                .zip(&de)
                .map(|(r, d)| r * d.exp_m1())
                .chain(self.mu.iter().zip(&step).map(|(m, dl)| -m * dl)),
        )
    }

    /// Solves `H p = −g` with `H = T diag(ρ̃) Tᵀ = Rᵀ R`, where `R` comes from
    /// a QR factorization of `diag(√ρ̃) Tᵀ`; this avoids squaring the
    /// condition number by forming `H`. A numerically rank-deficient `R`
    /// falls back to Cholesky on `H` with Tikhonov jitter. `None` when both
    /// fail.
    fn newton_direction(&self, table: &DMatrix<f64>, point: &Point) -> Option<Vec<f64>> {
        let scaled = DMatrix::from_fn(table.ncols(), table.nrows(), |j, i| {
            table[(i, j)] * point.rho_tilde[j].sqrt()
        });
        let rhs = -DVector::from_column_slice(&point.gradient);
        let finite = |p: &DVector<f64>| p.iter().all(|v| v.is_finite());
        // More moments than nodes: the Hessian is singular, go straight to
        // the regularized system.
        if scaled.nrows() >= scaled.ncols() {
            let r = scaled.clone().qr().r();
            let diagonal = r.diagonal().map(f64::abs);
            if diagonal.min() > RANK_TOLERANCE * diagonal.max() {
                let p = r
                    .tr_solve_upper_triangular(&rhs)
                    .and_then(|y| r.solve_upper_triangular(&y));
                if let Some(p) = p.filter(finite) {
                    return Some(p.as_slice().to_vec());
                }
            }
        }
        let hessian = scaled.transpose() * &scaled;
        let m = hessian.nrows();
        let jitter = JITTER_SCALE * hessian.trace() / (m.saturating_sub(1)).max(1) as f64;
        let regularized = hessian + DMatrix::identity(m, m) * jitter;
        let p = regularized.cholesky()?.solve(&rhs);
        finite(&p).then(|| p.as_slice().to_vec())
    }

    /// Backtracking along `direction`. Returns the accepted point, if any.
    fn line_search(&self, point: &Point, direction: &[f64]) -> Option<Point> {
        let slope: f64 = point
            .gradient
            .iter()
            .zip(direction)
            .map(|(g, p)| g * p)
            .sum();
        if !(slope < 0.0) {
            return None;
        }
        let base_norm = point.gradient_norm();
        let mut fallback: Option<Point> = None;
        let mut alpha = 1.0;
        for _ in 0..MAX_HALVINGS {
            let lambda: Vec<f64> = point
                .lambda
                .iter()
                .zip(direction)
                .map(|(l, p)| l + alpha * p)
                .collect();
            let trial = self.point(lambda);
            if !trial.clamped && trial.objective.is_finite() {
                let change = self.objective_change(point, &trial);
                if change <= ARMIJO_C1 * alpha * slope {
                    return Some(trial);
                }
                if fallback.is_none() && change <= 0.0 && trial.gradient_norm() < base_norm {
                    fallback = Some(trial);
                }
            }
            alpha /= 2.0;
        }
        fallback
    }
}

/// `D(λ)`. Exponents above the default cap are a [`Error::Range`].
pub fn dual_objective(
    lambda: &[f64],
    matrix: &BasisMatrix,
    rule: &QuadratureRule,
    mu: &MomentVector,
) -> Result<f64> {
    Ok(checked_point(lambda, matrix, rule, mu)?.objective)
}

/// `∂D/∂λᵢ = Σⱼ t_ij ρ̃ⱼ − μᵢ`.
pub fn dual_gradient(
    lambda: &[f64],
    matrix: &BasisMatrix,
    rule: &QuadratureRule,
    mu: &MomentVector,
) -> Result<Vec<f64>> {
    Ok(checked_point(lambda, matrix, rule, mu)?.gradient)
}

fn checked_point(
    lambda: &[f64],
    matrix: &BasisMatrix,
    rule: &QuadratureRule,
    mu: &MomentVector,
) -> Result<Point> {
    let dual = Dual::new(matrix, rule, mu, DEFAULT_EXPONENT_CAP)?;
    check_len("lambda", matrix.rows(), lambda.len())?;
    check_cap(&exponents(lambda, matrix), DEFAULT_EXPONENT_CAP)?;
    Ok(dual.point(lambda.to_vec()))
}

/// Minimizes the dual from `λ = (1, 0, …, 0)`, the uniform density.
///
/// Returns the iterate with the smallest moment residual even when the
/// target is not reached; `converged` tells the two apart.
pub fn solve(
    mu: &MomentVector,
    matrix: &BasisMatrix,
    rule: &QuadratureRule,
    cfg: &SolverConfig,
) -> Result<Reconstruction> {
    cfg.validate()?;
    let dual = Dual::new(matrix, rule, mu, cfg.exponent_cap)?;
    if !(mu.values()[0] > 0.0) {
        return domain(format!("mu_0 must be positive, got {}", mu.values()[0]));
    }
    let table = DMatrix::from_row_slice(matrix.rows(), matrix.columns(), matrix.entries());

    let mut initial = vec![0.0; matrix.rows()];
    initial[0] = 1.0;
    let mut point = dual.point(initial);
    let mut history = vec![point.objective];
    let mut best = (point.residual_metric(), point.lambda.clone(), 0);
    let mut iterations = 0;

    while iterations < cfg.max_iterations && point.residual_metric() > cfg.delta1_target {
        let steepest: Vec<f64> = point.gradient.iter().map(|g| -g).collect();
        let next = match cfg.step_strategy {
            StepStrategy::GradientDescent => dual.line_search(&point, &steepest),
            StepStrategy::DampedNewton => dual
                .newton_direction(&table, &point)
                .and_then(|p| dual.line_search(&point, &p)),
            StepStrategy::Hybrid => dual
                .newton_direction(&table, &point)
                .and_then(|p| dual.line_search(&point, &p))
                .or_else(|| dual.line_search(&point, &steepest)),
        };
        let Some(next) = next else {
            debug!("line search stalled at iteration {iterations}");
            break;
        };
        if !next.objective.is_finite() {
            return Err(Error::NonFinite {
                iteration: iterations,
                last_objective: point.objective,
                lambda: point.lambda,
            });
        }
        point = next;
        iterations += 1;
        history.push(point.objective);
        let metric = point.residual_metric();
        if metric < best.0 {
            best = (metric, point.lambda.clone(), iterations);
        }
        if cfg.verbose_every > 0 && iterations % cfg.verbose_every == 0 {
            debug!(
                "iteration {iterations}: objective {:.17e}, delta1 {:.3e}",
                point.objective,
                residual_rms(&point.gradient)
            );
        }
    }

    let (_, lambda, _) = best;
    let final_point = dual.point(lambda);
    let delta1 = residual_rms(&final_point.gradient);
    let mu0_residual = final_point.gradient[0].abs();
    let rho = final_point.exponents.iter().map(|e| e.exp()).collect();
    Ok(Reconstruction {
        partition_value: (1.0 - final_point.lambda[0]).exp(),
        lambda: final_point.lambda,
        rho_tilde: final_point.rho_tilde,
        rho,
        iterations_used: iterations,
        delta1_achieved: delta1,
        mu0_residual,
        objective: final_point.objective,
        converged: delta1 <= cfg.delta1_target && mu0_residual <= cfg.delta1_target,
        objective_history: history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{build_basis_matrix, BasisKind};
    use crate::corpus::TestFunction;
    use crate::quadrature::build_gauss_legendre;
    use proptest::prelude::*;

    fn setup(order: usize, n: usize) -> (QuadratureRule, BasisMatrix) {
        let rule = build_gauss_legendre(n).unwrap();
        let matrix = build_basis_matrix(BasisKind::ShiftedChebyshev, order, &rule).unwrap();
        (rule, matrix)
    }

    fn step_moments(order: usize) -> MomentVector {
        TestFunction::Step.analytic_moments(order).unwrap()
    }

    #[test]
    fn objective_hand_values() {
        let (rule, matrix) = setup(5, 32);
        let mu = step_moments(5);
        let zero = vec![0.0; 6];
        let d = dual_objective(&zero, &matrix, &rule, &mu).unwrap();
        assert!((d - (-1f64).exp()).abs() < 1e-15);
        let mut unit = zero.clone();
        unit[0] = 1.0;
        assert!(dual_objective(&unit, &matrix, &rule, &mu).unwrap().abs() < 1e-14);
        let g = dual_gradient(&zero, &matrix, &rule, &mu).unwrap();
        assert!((g[0] - ((-1f64).exp() - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn overflow_is_a_range_error() {
        let (rule, matrix) = setup(2, 16);
        let mu = step_moments(2);
        match dual_objective(&[800.0, 0.0, 0.0], &matrix, &rule, &mu) {
            Err(Error::Range { node, .. }) => assert_eq!(node, 0),
            other => panic!("expected range error, got {other:?}"),
        }
    }

    #[test]
    fn dimension_mismatches_are_rejected() {
        let (rule, matrix) = setup(4, 16);
        assert!(dual_objective(&[0.0; 4], &matrix, &rule, &step_moments(4)).is_err());
        assert!(solve(&step_moments(3), &matrix, &rule, &SolverConfig::default()).is_err());
        let negative = MomentVector::new(BasisKind::ShiftedChebyshev, vec![-1.0; 5]).unwrap();
        assert!(solve(&negative, &matrix, &rule, &SolverConfig::default()).is_err());
        let power = MomentVector::new(BasisKind::Power, vec![1.0; 5]).unwrap();
        assert!(solve(&power, &matrix, &rule, &SolverConfig::default()).is_err());
    }

    #[test]
    fn config_validation() {
        let mut cfg = SolverConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.exponent_cap = 800.0;
        assert!(cfg.validate().is_err());
        cfg = SolverConfig {
            delta1_target: 0.0,
            ..SolverConfig::default()
        };
        assert!(cfg.validate().is_err());
        assert_eq!(
            "hybrid".parse::<StepStrategy>().unwrap(),
            StepStrategy::Hybrid
        );
        assert!("bfgs".parse::<StepStrategy>().is_err());
    }

    #[test]
    fn zeroth_order_gives_uniform_density() {
        let (rule, matrix) = setup(0, 48);
        let mu = MomentVector::new(BasisKind::ShiftedChebyshev, vec![1.0]).unwrap();
        let recon = solve(&mu, &matrix, &rule, &SolverConfig::default()).unwrap();
        assert!(recon.converged);
        assert!((recon.lambda[0] - 1.0).abs() < 1e-14);
        assert!(recon.rho.iter().all(|r| (r - 1.0).abs() < 1e-14));
        assert!((recon.partition_value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn more_moments_than_nodes() {
        let (rule, matrix) = setup(30, 24);
        let mu = TestFunction::Sqrt.analytic_moments(30).unwrap();
        let cfg = SolverConfig {
            max_iterations: 50,
            ..SolverConfig::default()
        };
        let recon = solve(&mu, &matrix, &rule, &cfg).unwrap();
        assert!(recon.rho.iter().all(|r| r.is_finite() && *r > 0.0));
        assert!(recon.objective.is_finite());
        assert!(recon.objective_history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn sqrt_reconstruction_reproduces_moments() {
        let (rule, matrix) = setup(30, 96);
        let mu = TestFunction::Sqrt.analytic_moments(30).unwrap();
        let cfg = SolverConfig::default();
        let recon = solve(&mu, &matrix, &rule, &cfg).unwrap();
        assert!(recon.delta1_achieved <= 1e-13, "{}", recon.delta1_achieved);
        let moments = recon.moments(&matrix).unwrap();
        for (a, b) in moments.iter().zip(mu.values()) {
            assert!((a - b).abs() <= 1e-12);
        }
        for w in recon.objective_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-15, "{} -> {}", w[0], w[1]);
        }
        assert!(recon.rho.iter().all(|&r| r > 0.0));
        for ((rt, r), w) in recon.rho_tilde.iter().zip(&recon.rho).zip(rule.weights()) {
            assert!((rt - w * r).abs() <= 1e-14 * rt.abs());
        }
        let gradient = dual_gradient(&recon.lambda, &matrix, &rule, &mu).unwrap();
        let bound = (30f64).sqrt() * 1e-13 * 10.0;
        assert!(gradient.iter().all(|g| g.abs() <= bound));
    }

    #[test]
    fn gradient_descent_makes_progress() {
        let (rule, matrix) = setup(4, 48);
        let mu = TestFunction::Sqrt.analytic_moments(4).unwrap();
        let cfg = SolverConfig {
            step_strategy: StepStrategy::GradientDescent,
            max_iterations: 200,
            ..SolverConfig::default()
        };
        let recon = solve(&mu, &matrix, &rule, &cfg).unwrap();
        assert!(recon.delta1_achieved < 1e-3);
        assert!(recon.objective < recon.objective_history[0]);
    }

    #[test]
    fn power_and_chebyshev_bases_agree() {
        // above M = 14 the power-basis problem is too ill-conditioned for
        // binary64 to pin the density down to 1e-6
        let rule = build_gauss_legendre(96).unwrap();
        let cfg = SolverConfig {
            delta1_target: 1e-14,
            ..SolverConfig::default()
        };
        for f in [TestFunction::Sqrt, TestFunction::DoubleStep] {
            for order in 1..=14 {
                let cheb = build_basis_matrix(BasisKind::ShiftedChebyshev, order, &rule).unwrap();
                let power = build_basis_matrix(BasisKind::Power, order, &rule).unwrap();
                let mu_c = f.analytic_moments(order).unwrap();
                let mu_p = f.analytic_moments_in(BasisKind::Power, order).unwrap();
                let rc = solve(&mu_c, &cheb, &rule, &cfg).unwrap();
                let rp = solve(&mu_p, &power, &rule, &cfg).unwrap();
                for (a, b) in rc.rho.iter().zip(&rp.rho) {
                    assert!((a - b).abs() <= 1e-6, "{f} M={order}: {a} vs {b}");
                }
            }
        }
    }

    fn random_setup() -> (QuadratureRule, BasisMatrix, MomentVector) {
        let (rule, matrix) = setup(8, 48);
        (
            rule,
            matrix,
            TestFunction::Sqrt.analytic_moments(8).unwrap(),
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn gradient_matches_finite_differences(
            lambda in prop::collection::vec(-0.5f64..0.5, 9)
        ) {
            let (rule, matrix, mu) = random_setup();
            let g = dual_gradient(&lambda, &matrix, &rule, &mu).unwrap();
            let h = 1e-6;
            for i in 0..lambda.len() {
                let mut plus = lambda.clone();
                let mut minus = lambda.clone();
                plus[i] += h;
                minus[i] -= h;
                let fd = (dual_objective(&plus, &matrix, &rule, &mu).unwrap()
                    - dual_objective(&minus, &matrix, &rule, &mu).unwrap())
                    / (2.0 * h);
                let scale = g[i].abs().max(1e-3);
                prop_assert!((fd - g[i]).abs() / scale <= 1e-6, "i={} fd={} g={}", i, fd, g[i]);
            }
        }

        #[test]
        fn objective_is_convex(
            lambda in prop::collection::vec(-0.5f64..0.5, 9),
            direction in prop::collection::vec(-1.0f64..1.0, 9),
        ) {
            let (rule, matrix, mu) = random_setup();
            let h = 1e-3;
            let at = |s: f64| {
                let l: Vec<f64> = lambda.iter().zip(&direction).map(|(l, v)| l + s * v).collect();
                dual_objective(&l, &matrix, &rule, &mu).unwrap()
            };
            let second = at(h) - 2.0 * at(0.0) + at(-h);
            prop_assert!(second >= -1e-10);
        }
    }
}
