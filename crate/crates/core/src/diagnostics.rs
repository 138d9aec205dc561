//! Quality measures for a reconstruction: moment and nodal RMS errors,
//! entropy, Kullback–Leibler and variation distances, and gap detection.

use crate::basis::{BasisMatrix, MomentVector};
use crate::error::{check_len, domain, Result};
use crate::quadrature::QuadratureRule;

/// Threshold below which a reconstructed value counts as part of a gap.
pub const DEFAULT_GAP_EPSILON: f64 = 5e-3;

/// Nodes considered by [`estimate_gap`].
pub const DEFAULT_GAP_WINDOW: (f64, f64) = (0.2, 0.8);

const RATIO_FLOOR: f64 = 1e-300;

/// `√((1/M) Σᵢ₌₁..M (aᵢ − bᵢ)²)`; index 0 is excluded.
pub fn moment_rms(exact: &[f64], approx: &[f64]) -> Result<f64> {
    check_len("moment sequences", exact.len(), approx.len())?;
    if exact.len() < 2 {
        return domain("delta1 needs at least one moment beyond mu_0");
    }
    let m = exact.len() - 1;
    let sum: f64 = exact[1..]
        .iter()
        .zip(&approx[1..])
        .map(|(a, b)| (a - b).powi(2))
        .sum();
    Ok((sum / m as f64).sqrt())
}

/// RMS deviation between the exact moments and the moments of the nodal
/// density `rho`.
pub fn delta1(
    mu_exact: &MomentVector,
    rho: &[f64],
    matrix: &BasisMatrix,
    rule: &QuadratureRule,
) -> Result<f64> {
    check_len("moments", matrix.rows(), mu_exact.values().len())?;
    check_len("nodal density", rule.size(), rho.len())?;
    let rho_tilde: Vec<f64> = rho.iter().zip(rule.weights()).map(|(r, w)| r * w).collect();
    moment_rms(mu_exact.values(), &matrix.apply(&rho_tilde)?)
}

/// RMS of `fⱼ − ρⱼ` over the nodes.
pub fn delta2(f_exact: &[f64], rho: &[f64]) -> Result<f64> {
    check_len("nodal density", f_exact.len(), rho.len())?;
    if rho.is_empty() {
        return domain("delta2 of an empty grid");
    }
    let sum: f64 = f_exact.iter().zip(rho).map(|(f, r)| (f - r).powi(2)).sum();
    Ok((sum / rho.len() as f64).sqrt())
}

/// `(D_KL, D_v)` between `f` and `ρ` by quadrature.
///
/// Both densities are first rescaled to unit quadrature mass, so the two
/// measures compare probability densities; `0 ln 0 = 0` and `ρ` is floored
/// at 1e-300 inside the logarithm.
pub fn kl_and_variation(f_exact: &[f64], rho: &[f64], rule: &QuadratureRule) -> Result<(f64, f64)> {
    check_len("nodal density", rule.size(), f_exact.len())?;
    check_len("nodal density", rule.size(), rho.len())?;
    if let Some(j) = f_exact.iter().position(|f| !(*f >= 0.0)) {
        return domain(format!("exact density is negative or NaN at node {j}"));
    }
    let f_mass = rule.integrate(f_exact)?;
    let rho_mass = rule.integrate(rho)?;
    if !(f_mass > 0.0 && rho_mass > 0.0) {
        return domain("densities must have positive mass");
    }
    let mut d_kl = 0.0;
    let mut d_v = 0.0;
    for ((f, r), w) in f_exact.iter().zip(rho).zip(rule.weights()) {
        let p = f / f_mass;
        let q = r / rho_mass;
        if p > 0.0 {
            d_kl += w * p * (p / q.max(RATIO_FLOOR)).ln();
        }
        d_v += w * (p - q).abs();
    }
    Ok((d_kl.max(0.0), d_v))
}

/// `D_v²/2 + D_v⁴/12`.
pub fn kullback_bound(d_v: f64) -> f64 {
    let v2 = d_v * d_v;
    v2 / 2.0 + v2 * v2 / 12.0
}

/// `−Σⱼ ωⱼ ρⱼ ln ρⱼ`, the entropy relative to the uniform density.
pub fn entropy_of(rho: &[f64], rule: &QuadratureRule) -> Result<f64> {
    check_len("nodal density", rule.size(), rho.len())?;
    Ok(-rho
        .iter()
        .zip(rule.weights())
        .filter(|(r, _)| **r > 0.0)
        .map(|(r, w)| w * r * r.ln())
        .sum::<f64>())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapEstimate {
    /// `ε` crossing at the left end of the run, linearly interpolated.
    pub left_edge: f64,
    pub right_edge: f64,
    /// `right_edge − left_edge`.
    pub width: f64,
    pub epsilon: f64,
    /// First and last node index of the run.
    pub nodes: Option<(usize, usize)>,
    /// Distance between the run's outermost nodes.
    pub node_width: f64,
    /// Extent of the quadrature cells of the run, each cell bounded by the
    /// midpoints to the neighbouring nodes.
    pub cell_width: f64,
}

impl GapEstimate {
    fn empty(epsilon: f64, window: (f64, f64)) -> Self {
        let centre = (window.0 + window.1) / 2.0;
        Self {
            left_edge: centre,
            right_edge: centre,
            width: 0.0,
            epsilon,
            nodes: None,
            node_width: 0.0,
            cell_width: 0.0,
        }
    }
}

/// Longest run of nodes in [`DEFAULT_GAP_WINDOW`] with `ρ < ε`.
pub fn estimate_gap(rho: &[f64], rule: &QuadratureRule, epsilon: f64) -> Result<GapEstimate> {
    estimate_gap_in(rho, rule.nodes(), epsilon, DEFAULT_GAP_WINDOW)
}

/// Longest run of consecutive nodes inside `window` whose value is below
/// `epsilon`. The first of equally long runs wins.
pub fn estimate_gap_in(
    values: &[f64],
    nodes: &[f64],
    epsilon: f64,
    window: (f64, f64),
) -> Result<GapEstimate> {
    check_len("gap values", nodes.len(), values.len())?;
    if !(epsilon > 0.0) {
        return domain(format!("gap epsilon must be positive, got {epsilon}"));
    }
    let inside = |j: usize| nodes[j] >= window.0 && nodes[j] <= window.1;
    let mut best: Option<(usize, usize)> = None;
    let mut start: Option<usize> = None;
    #[allow(clippy::needless_range_loop)]
    for j in 0..=nodes.len() {
        let below = j < nodes.len() && inside(j) && values[j] < epsilon;
        match (below, start) {
            (true, None) => start = Some(j),
            (false, Some(s)) => {
                let longer = best.is_none_or(|(a, b)| j - s > b - a + 1);
                if longer {
                    best = Some((s, j - 1));
                }
                start = None;
            }
            _ => {}
        }
    }
    let Some((a, b)) = best else {
        return Ok(GapEstimate::empty(epsilon, window));
    };

    let crossing = |inner: usize, outer: usize| {
        let (vi, vo) = (values[inner], values[outer]);
        if vo <= vi {
            return nodes[inner];
        }
        let t = (vo - epsilon) / (vo - vi);
        nodes[outer] + t * (nodes[inner] - nodes[outer])
    };
    let left_edge = if a > 0 { crossing(a, a - 1) } else { nodes[a] };
    let right_edge = if b + 1 < nodes.len() {
        crossing(b, b + 1)
    } else {
        nodes[b]
    };
    let cell_left = if a > 0 {
        (nodes[a - 1] + nodes[a]) / 2.0
    } else {
        0.0
    };
    let cell_right = if b + 1 < nodes.len() {
        (nodes[b] + nodes[b + 1]) / 2.0
    } else {
        1.0
    };
    Ok(GapEstimate {
        left_edge,
        right_edge,
        width: right_edge - left_edge,
        epsilon,
        nodes: Some((a, b)),
        node_width: nodes[b] - nodes[a],
        cell_width: cell_right - cell_left,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsReport {
    pub delta1: f64,
    pub delta2: f64,
    pub entropy: f64,
    pub d_kl: f64,
    pub d_v: f64,
    pub kl_lower_bound: f64,
    /// `d_kl + 1e-12 ≥ kl_lower_bound`.
    pub bound_satisfied: bool,
    pub gap: Option<GapEstimate>,
}

/// All measures for one reconstruction against the exact moments and nodal
/// values. The gap is estimated only when `gap_epsilon` is given.
pub fn diagnose(
    mu_exact: &MomentVector,
    f_exact: &[f64],
    rho: &[f64],
    matrix: &BasisMatrix,
    rule: &QuadratureRule,
    gap_epsilon: Option<f64>,
) -> Result<DiagnosticsReport> {
    let delta1 = if mu_exact.order() == 0 {
        0.0
    } else {
        delta1(mu_exact, rho, matrix, rule)?
    };
    let (d_kl, d_v) = kl_and_variation(f_exact, rho, rule)?;
    let kl_lower_bound = kullback_bound(d_v);
    let gap = gap_epsilon
        .map(|eps| estimate_gap(rho, rule, eps))
        .transpose()?;
    Ok(DiagnosticsReport {
        delta1,
        delta2: delta2(f_exact, rho)?,
        entropy: entropy_of(rho, rule)?,
        d_kl,
        d_v,
        kl_lower_bound,
        bound_satisfied: d_kl + 1e-12 >= kl_lower_bound,
        gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{build_basis_matrix, BasisKind};
    use crate::corpus::TestFunction;
    use crate::quadrature::build_gauss_legendre;
    use proptest::prelude::*;

    #[test]
    fn moment_rms_examples() {
        let exact = vec![0.0; 101];
        assert_eq!(moment_rms(&exact, &exact).unwrap(), 0.0);
        let mut approx = exact.clone();
        approx[37] += 1e-7;
        assert!((moment_rms(&exact, &approx).unwrap() - 1e-8).abs() < 1e-22);
        assert!(moment_rms(&[1.0], &[1.0]).is_err());
        assert!(moment_rms(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn delta1_of_exact_density_is_small() {
        let rule = build_gauss_legendre(96).unwrap();
        let matrix = build_basis_matrix(BasisKind::ShiftedChebyshev, 20, &rule).unwrap();
        let mu = TestFunction::Step.analytic_moments(20).unwrap();
        let d = delta1(&mu, &vec![1.0; 96], &matrix, &rule).unwrap();
        assert!(d < 1e-14);
    }

    #[test]
    fn delta2_examples() {
        let f = vec![0.3, 1.2, 2.5];
        assert_eq!(delta2(&f, &f).unwrap(), 0.0);
        let shifted: Vec<f64> = f.iter().map(|v| v + 0.25).collect();
        assert!((delta2(&f, &shifted).unwrap() - 0.25).abs() < 1e-15);
        assert!(delta2(&f, &[1.0]).is_err());
    }

    #[test]
    fn identical_densities_have_zero_distance() {
        let rule = build_gauss_legendre(64).unwrap();
        let f = rule.sample(|x| 1.5 * x.sqrt());
        let (kl, v) = kl_and_variation(&f, &f, &rule).unwrap();
        assert!(kl.abs() < 1e-15 && v.abs() < 1e-15);
    }

    #[test]
    fn small_perturbation_kl_is_second_order() {
        // ρ = 1 + δ on the left half, renormalized: direct summation oracle
        // and the expansion δ²/4 agree to leading order
        let rule = build_gauss_legendre(64).unwrap();
        let delta = 1e-3;
        let f = vec![1.0; 64];
        let raw: Vec<f64> = rule
            .nodes()
            .iter()
            .map(|&x| if x < 0.5 { 1.0 + delta } else { 1.0 })
            .collect();
        let mass = rule.integrate(&raw).unwrap();
        let rho: Vec<f64> = raw.iter().map(|r| r / mass).collect();
        let (kl, _) = kl_and_variation(&f, &rho, &rule).unwrap();
        let oracle: f64 = rho
            .iter()
            .zip(rule.weights())
            .map(|(r, w)| w * (1.0 / r).ln())
            .sum();
        assert!((kl - oracle).abs() < 1e-15);
        assert!((kl - delta * delta / 8.0).abs() < 0.01 * delta * delta);
    }

    #[test]
    fn kl_handles_zero_target_values() {
        let rule = build_gauss_legendre(32).unwrap();
        let f = TestFunction::default_double_parabola()
            .sample(&rule)
            .unwrap();
        let rho = vec![1.0; 32];
        let (kl, v) = kl_and_variation(&f, &rho, &rule).unwrap();
        assert!(kl.is_finite() && kl > 0.0);
        assert!(v > 0.0 && v <= 2.0);
        assert!(kl >= kullback_bound(v));
        assert!(kl_and_variation(&vec![-1.0; 32], &rho, &rule).is_err());
    }

    #[test]
    fn entropy_examples() {
        let rule = build_gauss_legendre(32).unwrap();
        assert!(entropy_of(&vec![1.0; 32], &rule).unwrap().abs() < 1e-15);
        let rho = rule.sample(|x| 1.5 * x.sqrt());
        assert!(entropy_of(&rho, &rule).unwrap() < 0.0);
    }

    #[test]
    fn gap_of_exact_double_parabola() {
        let f = TestFunction::default_double_parabola();
        for (n, cells) in [(96, 0.1941), (192, 0.1945)] {
            let rule = build_gauss_legendre(n).unwrap();
            let values = f.sample(&rule).unwrap();
            let gap = estimate_gap(&values, &rule, DEFAULT_GAP_EPSILON).unwrap();
            assert!(
                (gap.cell_width - cells).abs() < 5e-4,
                "n={n}: {}",
                gap.cell_width
            );
            assert!((gap.width - gap.right_edge + gap.left_edge).abs() < 1e-15);
            assert!(gap.node_width <= gap.width && gap.width <= gap.cell_width);
        }
    }

    #[test]
    fn gap_run_selection() {
        let nodes: Vec<f64> = (0..11).map(|k| k as f64 / 10.0).collect();
        let values = [1.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0];
        let gap = estimate_gap_in(&values, &nodes, 0.5, (0.2, 0.8)).unwrap();
        assert_eq!(gap.nodes, Some((4, 6)));
        assert!((gap.left_edge - 0.35).abs() < 1e-15);
        assert!((gap.right_edge - 0.65).abs() < 1e-15);
        let none = estimate_gap_in(&[1.0; 11], &nodes, 0.5, (0.2, 0.8)).unwrap();
        assert_eq!(none.width, 0.0);
        assert!(none.nodes.is_none());
        assert!(estimate_gap_in(&values, &nodes, 0.0, (0.2, 0.8)).is_err());
    }

    #[test]
    fn report_is_consistent() {
        let rule = build_gauss_legendre(48).unwrap();
        let matrix = build_basis_matrix(BasisKind::ShiftedChebyshev, 6, &rule).unwrap();
        let mu = TestFunction::Sqrt.analytic_moments(6).unwrap();
        let f = TestFunction::Sqrt.sample(&rule).unwrap();
        let rho = vec![1.0; 48];
        let report = diagnose(&mu, &f, &rho, &matrix, &rule, Some(DEFAULT_GAP_EPSILON)).unwrap();
        assert_eq!(
            report.bound_satisfied,
            report.d_kl + 1e-12 >= report.kl_lower_bound
        );
        assert!(report.d_v <= 2.0);
        assert_eq!(report.gap.unwrap().width, 0.0);
    }

    proptest! {
        #[test]
        fn kl_is_nonnegative_and_bounded_below(
            f in prop::collection::vec(0.0f64..3.0, 24),
            rho in prop::collection::vec(1e-6f64..3.0, 24),
        ) {
            let rule = build_gauss_legendre(24).unwrap();
            prop_assume!(rule.integrate(&f).unwrap() > 1e-3);
            let (kl, v) = kl_and_variation(&f, &rho, &rule).unwrap();
            prop_assert!(kl >= 0.0);
            prop_assert!(v <= 2.0 + 1e-12);
            prop_assert!(kl + 1e-12 >= kullback_bound(v));
        }
    }
}
