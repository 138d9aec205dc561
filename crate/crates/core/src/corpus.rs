//! The reference densities used to exercise the reconstruction, with their
//! closed-form moments where they exist.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::basis::{fill_basis_values, BasisKind, MomentVector};
use crate::error::{domain, Error, Result};
use crate::quadrature::{arcsine_nodes, QuadratureRule};

/// Rule size used for the oscillatory function's moments.
pub const OSCILLATORY_RULE_SIZE: usize = 2048;

/// Smallest rule accepted for the oscillatory function's moments.
pub const OSCILLATORY_MIN_RULE_SIZE: usize = 1024;

/// `∫₀¹` of the unnormalized oscillatory function, in closed form.
fn oscillatory_integral() -> f64 {
    1.0 + (1.0 - 167f64.cos()) / 668.0 + 73f64.sin() / 292.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestFunction {
    /// `f(x) = 1`.
    Step,
    /// `f(x) = (3/2)√x`.
    Sqrt,
    /// `A x (x₁ − x)` below `x₁`, `B (x − x₂)(1 − x)` above `x₂`, zero in
    /// between.
    DoubleParabola { x1: f64, x2: f64 },
    /// `1/(π√(x − x²))`; every shifted-Chebyshev moment but the zeroth
    /// vanishes.
    UFunction,
    /// `1/2` up to `x = 1/2`, `3/2` beyond.
    DoubleStep,
    /// `¼(sin 167x + cos 73x) + 6(x − ½)² + ½`, rescaled to unit mass.
    Oscillatory,
}

impl TestFunction {
    /// Command-line vocabulary, in corpus order.
    pub const IDS: [&'static str; 6] = [
        "step",
        "sqrt",
        "double-parabola",
        "u-function",
        "double-step",
        "oscillatory",
    ];

    pub fn double_parabola(x1: f64, x2: f64) -> Result<Self> {
        if !(0.0 < x1 && x1 < x2 && x2 < 1.0) {
            return domain(format!(
                "double parabola needs 0 < x1 < x2 < 1, got x1={x1}, x2={x2}"
            ));
        }
        Ok(TestFunction::DoubleParabola { x1, x2 })
    }

    /// The double parabola with a gap of width 1/5 centred at 1/2.
    pub fn default_double_parabola() -> Self {
        TestFunction::DoubleParabola { x1: 0.4, x2: 0.6 }
    }

    pub fn all() -> Vec<Self> {
        Self::IDS.iter().map(|id| id.parse().unwrap()).collect()
    }

    pub fn id(&self) -> &'static str {
        match self {
            TestFunction::Step => "step",
            TestFunction::Sqrt => "sqrt",
            TestFunction::DoubleParabola { .. } => "double-parabola",
            TestFunction::UFunction => "u-function",
            TestFunction::DoubleStep => "double-step",
            TestFunction::Oscillatory => "oscillatory",
        }
    }

    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match *self {
            TestFunction::DoubleParabola { x1, x2 } => {
                let (a, b) = parabola_prefactors(x1, x2);
                vec![("x1", x1), ("x2", x2), ("A", a), ("B", b)]
            }
            TestFunction::DoubleStep => vec![("x1", 0.5)],
            _ => Vec::new(),
        }
    }

    pub fn has_closed_form_moments(&self) -> bool {
        !matches!(self, TestFunction::Oscillatory)
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return domain(format!("{} evaluated outside [0, 1] at {x}", self.id()));
        }
        let value = match *self {
            TestFunction::Step => 1.0,
            TestFunction::Sqrt => 1.5 * x.sqrt(),
            TestFunction::DoubleParabola { x1, x2 } => {
                let (a, b) = parabola_prefactors(x1, x2);
                if x <= x1 {
                    a * x * (x1 - x)
                } else if x >= x2 {
                    b * (x - x2) * (1.0 - x)
                } else {
                    0.0
                }
            }
            TestFunction::UFunction => {
                if x == 0.0 || x == 1.0 {
                    return domain(format!("u-function has a pole at x = {x}"));
                }
                1.0 / (PI * (x * (1.0 - x)).sqrt())
            }
            TestFunction::DoubleStep => {
                if x <= 0.5 {
                    0.5
                } else {
                    1.5
                }
            }
            TestFunction::Oscillatory => {
                let raw =
                    0.25 * ((167.0 * x).sin() + (73.0 * x).cos()) + 6.0 * (x - 0.5).powi(2) + 0.5;
                raw / oscillatory_integral()
            }
        };
        Ok(value)
    }

    /// Values at every node of `rule`.
    pub fn sample(&self, rule: &QuadratureRule) -> Result<Vec<f64>> {
        rule.nodes().iter().map(|&x| self.eval(x)).collect()
    }

    /// Closed-form shifted-Chebyshev moments `μ₀..μ_M`.
    pub fn analytic_moments(&self, order: usize) -> Result<MomentVector> {
        self.analytic_moments_in(BasisKind::ShiftedChebyshev, order)
    }

    /// Closed-form moments in either basis.
    pub fn analytic_moments_in(&self, kind: BasisKind, order: usize) -> Result<MomentVector> {
        let values = match kind {
            BasisKind::ShiftedChebyshev => (0..=order)
                .map(|n| self.chebyshev_moment(n))
                .collect::<Result<Vec<_>>>()?,
            BasisKind::Power => (0..=order)
                .map(|i| self.power_moment(i))
                .collect::<Result<Vec<_>>>()?,
        };
        MomentVector::new(kind, values)
    }

    fn chebyshev_moment(&self, n: usize) -> Result<f64> {
        let nf = n as f64;
        let value = match *self {
            TestFunction::Step => {
                if n == 1 {
                    0.0
                } else {
                    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
                    (1.0 + sign) / (2.0 - 2.0 * nf * nf)
                }
            }
            TestFunction::Sqrt => {
                let n2 = nf * nf;
                (9.0 - 12.0 * n2) / (9.0 - 40.0 * n2 + 16.0 * n2 * n2)
            }
            TestFunction::UFunction => {
                if n == 0 {
                    1.0
                } else {
                    0.0
                }
            }
            TestFunction::DoubleParabola { x1, x2 } => {
                let (a, b) = parabola_prefactors(x1, x2);
                let left = Piece {
                    from: 0.0,
                    to: x1,
                    coefficients: [0.0, a * x1, -a],
                };
                let right = Piece {
                    from: x2,
                    to: 1.0,
                    coefficients: [-b * x2, b * (1.0 + x2), -b],
                };
                left.chebyshev_moment(n) + right.chebyshev_moment(n)
            }
            TestFunction::DoubleStep => {
                let left = Piece {
                    from: 0.0,
                    to: 0.5,
                    coefficients: [0.5, 0.0, 0.0],
                };
                let right = Piece {
                    from: 0.5,
                    to: 1.0,
                    coefficients: [1.5, 0.0, 0.0],
                };
                left.chebyshev_moment(n) + right.chebyshev_moment(n)
            }
            TestFunction::Oscillatory => return no_closed_form(),
        };
        Ok(value)
    }

    fn power_moment(&self, i: usize) -> Result<f64> {
        let fi = i as f64;
        let value = match *self {
            TestFunction::Step => 1.0 / (fi + 1.0),
            TestFunction::Sqrt => 1.5 / (fi + 1.5),
            // C(2i, i) / 4^i
            TestFunction::UFunction => {
                (1..=i).fold(1.0, |acc, k| acc * (2 * k - 1) as f64 / (2 * k) as f64)
            }
            TestFunction::DoubleParabola { x1, x2 } => {
                let (a, b) = parabola_prefactors(x1, x2);
                power_piece(0.0, x1, [0.0, a * x1, -a], i)
                    + power_piece(x2, 1.0, [-b * x2, b * (1.0 + x2), -b], i)
            }
            TestFunction::DoubleStep => {
                power_piece(0.0, 0.5, [0.5, 0.0, 0.0], i)
                    + power_piece(0.5, 1.0, [1.5, 0.0, 0.0], i)
            }
            TestFunction::Oscillatory => return no_closed_form(),
        };
        Ok(value)
    }

    /// Shifted-Chebyshev moments by quadrature of the exact nodal values.
    pub fn numeric_moments(&self, order: usize, rule: &QuadratureRule) -> Result<MomentVector> {
        self.numeric_moments_in(BasisKind::ShiftedChebyshev, order, rule)
    }

    /// Moments by quadrature in either basis.
    ///
    /// The u-function is integrated with the Gauss–Chebyshev rule of the same
    /// size (the arcsine weight absorbs its endpoint poles) and the square
    /// root in the variable `t = √x`; the oscillatory
    /// function needs at least [`OSCILLATORY_MIN_RULE_SIZE`] nodes and is
    /// divided by its computed `μ₀`.
    pub fn numeric_moments_in(
        &self,
        kind: BasisKind,
        order: usize,
        rule: &QuadratureRule,
    ) -> Result<MomentVector> {
        let mut row = vec![0.0; order + 1];
        let mut sums = vec![0.0; order + 1];
        match self {
            TestFunction::UFunction => {
                let nodes = arcsine_nodes(rule.size());
                for &x in &nodes {
                    fill_basis_values(kind, x, &mut row);
                    for (s, t) in sums.iter_mut().zip(&row) {
                        *s += t;
                    }
                }
                for s in &mut sums {
                    *s /= nodes.len() as f64;
                }
            }
            // x = t² turns ∫ T(x) (3/2)√x dx into the polynomial ∫ T(t²) 3t² dt
            TestFunction::Sqrt => {
                for (&t, &w) in rule.nodes().iter().zip(rule.weights()) {
                    fill_basis_values(kind, t * t, &mut row);
                    for (s, b) in sums.iter_mut().zip(&row) {
                        *s += w * 3.0 * t * t * b;
                    }
                }
            }
            _ => {
                if *self == TestFunction::Oscillatory && rule.size() < OSCILLATORY_MIN_RULE_SIZE {
                    return domain(format!(
                        "oscillatory moments need a rule of at least {OSCILLATORY_MIN_RULE_SIZE} \
                         points, got {}",
                        rule.size()
                    ));
                }
                for (&x, &w) in rule.nodes().iter().zip(rule.weights()) {
                    let fx = w * self.eval(x)?;
                    fill_basis_values(kind, x, &mut row);
                    for (s, t) in sums.iter_mut().zip(&row) {
                        *s += t * fx;
                    }
                }
                if *self == TestFunction::Oscillatory {
                    let mu0 = sums[0];
                    for s in &mut sums {
                        *s /= mu0;
                    }
                    sums[0] = 1.0;
                }
            }
        }
        MomentVector::new(kind, sums)
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for TestFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "step" => Ok(TestFunction::Step),
            "sqrt" => Ok(TestFunction::Sqrt),
            "double-parabola" => Ok(TestFunction::default_double_parabola()),
            "u-function" => Ok(TestFunction::UFunction),
            "double-step" => Ok(TestFunction::DoubleStep),
            "oscillatory" => Ok(TestFunction::Oscillatory),
            other => domain(format!(
                "unknown function '{other}' (expected one of {})",
                Self::IDS.join(", ")
            )),
        }
    }
}

fn no_closed_form<T>() -> Result<T> {
    domain("the oscillatory function has no closed-form moments; use numeric_moments")
}

/// `(A, B)` normalizing both parabolae of the double parabola.
pub fn parabola_prefactors(x1: f64, x2: f64) -> (f64, f64) {
    let scale = 1.0 + x1 - x2;
    (6.0 / (x1 * x1 * scale), 6.0 / ((1.0 - x2).powi(2) * scale))
}

/// A quadratic `c₀ + c₁x + c₂x²` restricted to `[from, to]`.
struct Piece {
    from: f64,
    to: f64,
    coefficients: [f64; 3],
}

impl Piece {
    /// `∫ p(x) T*ₙ(x) dx` over the piece, exactly: the integrand is expanded
    /// as a Chebyshev series in `u = 2x − 1` and integrated term by term.
    fn chebyshev_moment(&self, n: usize) -> f64 {
        let mut power = vec![0.0; n + 3];
        power[n] = 1.0;
        let mut integrand = vec![0.0; n + 3];
        for (k, &c) in self.coefficients.iter().enumerate() {
            if k > 0 {
                power = multiply_by_x(&power);
            }
            if c != 0.0 {
                for (acc, p) in integrand.iter_mut().zip(&power) {
                    *acc += c * p;
                }
            }
        }
        let (ua, ub) = (2.0 * self.from - 1.0, 2.0 * self.to - 1.0);
        let integral: f64 = integrand
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(m, c)| c * (chebyshev_antiderivative(m, ub) - chebyshev_antiderivative(m, ua)))
            .sum();
        // dx = du / 2
        integral / 2.0
    }
}

/// Multiplies a Chebyshev series in `u` by `x = (1 + u)/2`, using
/// `u Tₘ = (Tₘ₊₁ + T|ₘ₋₁|)/2`. The input must have a spare trailing slot.
fn multiply_by_x(series: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = series.iter().map(|c| c / 2.0).collect();
    for (m, &c) in series.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        if m == 0 {
            out[1] += c / 2.0;
        } else {
            out[m + 1] += c / 4.0;
            out[m - 1] += c / 4.0;
        }
    }
    out
}

/// An antiderivative of `Tₘ(u)`:
/// `(Tₘ₊₁/(m+1) − Tₘ₋₁/(m−1))/2` for `m ≥ 2`.
fn chebyshev_antiderivative(m: usize, u: f64) -> f64 {
    match m {
        0 => u,
        1 => u * u / 2.0,
        _ => {
            let t = |k: usize| (k as f64 * u.clamp(-1.0, 1.0).acos()).cos();
            (t(m + 1) / (m + 1) as f64 - t(m - 1) / (m - 1) as f64) / 2.0
        }
    }
}

/// `∫ xⁱ (c₀ + c₁x + c₂x²) dx` over `[a, b]`.
fn power_piece(a: f64, b: f64, coefficients: [f64; 3], i: usize) -> f64 {
    coefficients
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let p = (i + k + 1) as i32;
            c * (b.powi(p) - a.powi(p)) / p as f64
        })
        .sum()
}
