//! Power and shifted-Chebyshev bases, the node table `t_ij`, and moment
//! vectors.

use std::fmt;
use std::str::FromStr;

use crate::error::{check_len, domain, Error, Result};
use crate::quadrature::QuadratureRule;

/// Largest moment order accepted when assembling a [`BasisMatrix`].
pub const MAX_ORDER: usize = 2048;

/// Largest polynomial index accepted by [`eval_shifted_chebyshev`].
pub const MAX_CHEBYSHEV_INDEX: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum BasisKind {
    /// `xⁱ`
    Power,
    /// `T*ᵢ(x) = Tᵢ(2x − 1)`
    #[default]
    ShiftedChebyshev,
}

impl fmt::Display for BasisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisKind::Power => f.write_str("power"),
            BasisKind::ShiftedChebyshev => f.write_str("chebyshev"),
        }
    }
}

impl FromStr for BasisKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "power" => Ok(BasisKind::Power),
            "chebyshev" | "shifted-chebyshev" => Ok(BasisKind::ShiftedChebyshev),
            other => domain(format!(
                "unknown basis '{other}' (expected 'power' or 'chebyshev')"
            )),
        }
    }
}

/// A moment sequence `μ₀..μ_M` tagged with the basis it was taken in.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentVector {
    kind: BasisKind,
    values: Vec<f64>,
}

impl MomentVector {
    pub fn new(kind: BasisKind, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return domain("a moment vector needs at least mu_0");
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return domain(format!("moment {i} is not finite"));
        }
        Ok(Self { kind, values })
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    /// The highest moment index `M`.
    pub fn order(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize) -> Option<f64> {
        self.values.get(i).copied()
    }

    /// The leading `order + 1` moments.
    pub fn truncated(&self, order: usize) -> Result<Self> {
        if order > self.order() {
            return domain(format!(
                "cannot truncate order {} moments to order {order}",
                self.order()
            ));
        }
        Ok(Self {
            kind: self.kind,
            values: self.values[..=order].to_vec(),
        })
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// `T*ₙ(x) = Tₙ(2x − 1)`.
///
/// Uses the three-term recurrence in `u = 2x − 1` up to [`MAX_ORDER`]; for
/// larger `n` the cosine form is used, whose magnitude is bounded by one
/// regardless of round-off.
pub fn eval_shifted_chebyshev(n: usize, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return domain(format!("shifted Chebyshev argument {x} outside [0, 1]"));
    }
    if n > MAX_CHEBYSHEV_INDEX {
        return domain(format!("Chebyshev index {n} exceeds {MAX_CHEBYSHEV_INDEX}"));
    }
    let u = 2.0 * x - 1.0;
    if n > MAX_ORDER {
        return Ok((n as f64 * u.acos()).cos());
    }
    Ok(chebyshev_recurrence(n, u))
}

fn chebyshev_recurrence(n: usize, u: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => u,
        _ => {
            let (mut previous, mut current) = (1.0, u);
            for _ in 2..=n {
                let next = 2.0 * u * current - previous;
                previous = current;
                current = next;
            }
            current
        }
    }
}

/// Writes `basis_0(x)..basis_M(x)` into `out` (length `M + 1`).
pub fn fill_basis_values(kind: BasisKind, x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() == 1 {
        return;
    }
    match kind {
        BasisKind::Power => {
            for i in 1..out.len() {
                out[i] = out[i - 1] * x;
            }
        }
        BasisKind::ShiftedChebyshev => {
            let u = 2.0 * x - 1.0;
            out[1] = u;
            for i in 2..out.len() {
                out[i] = 2.0 * u * out[i - 1] - out[i - 2];
            }
        }
    }
}

/// The `(M + 1) × n_g` table `t_ij = basis_i(x_j)`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisMatrix {
    kind: BasisKind,
    order: usize,
    columns: usize,
    entries: Vec<f64>,
}

impl BasisMatrix {
    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn rows(&self) -> usize {
        self.order + 1
    }

    /// Number of quadrature nodes the matrix was built from.
    pub fn columns(&self) -> usize {
        self.columns
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.columns + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.columns..(i + 1) * self.columns]
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// `Σⱼ t_ij vⱼ` for every row.
    pub fn apply(&self, values: &[f64]) -> Result<Vec<f64>> {
        check_len("basis matrix columns", self.columns, values.len())?;
        Ok((0..self.rows())
            .map(|i| self.row(i).iter().zip(values).map(|(t, v)| t * v).sum())
            .collect())
    }
}

pub fn build_basis_matrix(
    kind: BasisKind,
    order: usize,
    rule: &QuadratureRule,
) -> Result<BasisMatrix> {
    if order > MAX_ORDER {
        return domain(format!("moment order {order} exceeds {MAX_ORDER}"));
    }
    let columns = rule.size();
    let rows = order + 1;
    let mut entries = vec![0.0; rows * columns];
    let mut column = vec![0.0; rows];
    for (j, &x) in rule.nodes().iter().enumerate() {
        fill_basis_values(kind, x, &mut column);
        for (i, &t) in column.iter().enumerate() {
            entries[i * columns + j] = t;
        }
    }
    Ok(BasisMatrix {
        kind,
        order,
        columns,
        entries,
    })
}

/// `μᵢ = Σⱼ wⱼ t_ij fⱼ` for `i = 0..M`.
pub fn compute_moments(
    f_values: &[f64],
    matrix: &BasisMatrix,
    rule: &QuadratureRule,
) -> Result<MomentVector> {
    check_len("basis matrix columns", rule.size(), matrix.columns())?;
    check_len("function values", rule.size(), f_values.len())?;
    let weighted: Vec<f64> = rule
        .weights()
        .iter()
        .zip(f_values)
        .map(|(w, f)| w * f)
        .collect();
    MomentVector::new(matrix.kind(), matrix.apply(&weighted)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{build_gauss_legendre, integrate_arcsine};
    use proptest::prelude::*;

    fn cosine_form(n: usize, x: f64) -> f64 {
        (n as f64 * (2.0 * x - 1.0).acos()).cos()
    }

    #[test]
    fn low_order_values() {
        assert_eq!(eval_shifted_chebyshev(0, 0.3).unwrap(), 1.0);
        assert_eq!(eval_shifted_chebyshev(1, 0.5).unwrap(), 0.0);
        assert_eq!(eval_shifted_chebyshev(2, 0.0).unwrap(), 1.0);
        assert!((cosine_form(2, 0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn argument_outside_unit_interval_is_rejected() {
        assert!(eval_shifted_chebyshev(3, -1e-9).is_err());
        assert!(eval_shifted_chebyshev(3, 1.0 + 1e-9).is_err());
        assert!(eval_shifted_chebyshev(MAX_CHEBYSHEV_INDEX + 1, 0.5).is_err());
    }

    #[test]
    fn huge_index_stays_bounded() {
        for x in [0.0, 1e-12, 0.25, 0.999_999, 1.0] {
            let v = eval_shifted_chebyshev(MAX_CHEBYSHEV_INDEX, x).unwrap();
            assert!(v.abs() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn power_matrix_at_midpoint() {
        let rule = build_gauss_legendre(1).unwrap();
        let m = build_basis_matrix(BasisKind::Power, 1, &rule).unwrap();
        assert_eq!(m.row(0), &[1.0]);
        assert_eq!(m.row(1), &[0.5]);
    }

    #[test]
    fn chebyshev_column_at_midpoint() {
        let rule = build_gauss_legendre(1).unwrap();
        let m = build_basis_matrix(BasisKind::ShiftedChebyshev, 2, &rule).unwrap();
        let column: Vec<f64> = (0..3).map(|i| m.get(i, 0)).collect();
        assert_eq!(column, vec![1.0, 0.0, -1.0]);
        assert!((cosine_form(2, 0.5) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn matrix_shape_and_invariants() {
        let rule = build_gauss_legendre(48).unwrap();
        for kind in [BasisKind::Power, BasisKind::ShiftedChebyshev] {
            let m = build_basis_matrix(kind, 30, &rule).unwrap();
            assert_eq!(m.columns(), 48);
            assert_eq!(m.rows(), 31);
            assert!(m.row(0).iter().all(|&t| t == 1.0));
            if kind == BasisKind::ShiftedChebyshev {
                assert!(m.entries().iter().all(|t| t.abs() <= 1.0 + 1e-12));
            }
        }
        assert!(build_basis_matrix(BasisKind::Power, MAX_ORDER + 1, &rule).is_err());
    }

    #[test]
    fn moments_of_the_constant_function() {
        let rule = build_gauss_legendre(96).unwrap();
        let m = build_basis_matrix(BasisKind::ShiftedChebyshev, 4, &rule).unwrap();
        let mu = compute_moments(&vec![1.0; 96], &m, &rule).unwrap();
        assert!((mu.values()[0] - 1.0).abs() < 1e-14);
        assert!(mu.values()[1].abs() < 1e-13);
        assert!((mu.values()[2] + 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn first_moment_of_square_root() {
        // oracle: ∫ 1.5√x (2x − 1) dx = 1.5 (4/5 − 2/3) = 1/5
        let rule = build_gauss_legendre(96).unwrap();
        let m = build_basis_matrix(BasisKind::ShiftedChebyshev, 1, &rule).unwrap();
        let f = rule.sample(|x| 1.5 * x.sqrt());
        let mu = compute_moments(&f, &m, &rule).unwrap();
        // √x limits Gauss–Legendre to algebraic convergence
        assert!((mu.values()[1] - 0.2).abs() < 1e-6);
    }

    #[test]
    fn compute_moments_checks_lengths() {
        let rule = build_gauss_legendre(8).unwrap();
        let m = build_basis_matrix(BasisKind::Power, 2, &rule).unwrap();
        assert!(compute_moments(&[1.0; 7], &m, &rule).is_err());
        let other = build_gauss_legendre(9).unwrap();
        assert!(compute_moments(&[1.0; 9], &m, &other).is_err());
    }

    #[test]
    fn moment_vector_validation() {
        assert!(MomentVector::new(BasisKind::Power, vec![]).is_err());
        assert!(MomentVector::new(BasisKind::Power, vec![1.0, f64::NAN]).is_err());
        let mu = MomentVector::new(BasisKind::Power, vec![1.0, 0.5, 0.25]).unwrap();
        assert_eq!(mu.order(), 2);
        assert_eq!(mu.truncated(1).unwrap().values(), &[1.0, 0.5]);
        assert!(mu.truncated(3).is_err());
    }

    #[test]
    fn basis_kind_parses() {
        assert_eq!("power".parse::<BasisKind>().unwrap(), BasisKind::Power);
        assert_eq!(
            "chebyshev".parse::<BasisKind>().unwrap(),
            BasisKind::ShiftedChebyshev
        );
        assert!("legendre".parse::<BasisKind>().is_err());
    }

    #[test]
    fn chebyshev_orthogonality_under_arcsine_weight() {
        for m in 0..12 {
            for n in 0..12 {
                let v = integrate_arcsine(64, |x| {
                    eval_shifted_chebyshev(m, x).unwrap() * eval_shifted_chebyshev(n, x).unwrap()
                })
                .unwrap();
                let expected = match (m, n) {
                    (0, 0) => 1.0,
                    _ if m == n => 0.5,
                    _ => 0.0,
                };
                assert!((v - expected).abs() < 1e-10, "m={m} n={n} v={v}");
            }
        }
    }

    proptest! {
        #[test]
        fn recurrence_matches_cosine_form(n in 0usize..=200, x in 0.0f64..=1.0) {
            let r = eval_shifted_chebyshev(n, x).unwrap();
            prop_assert!((r - cosine_form(n, x)).abs() <= 1e-10);
            prop_assert!(r.abs() <= 1.0 + 1e-12);
        }
    }
}
