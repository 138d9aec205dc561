"""Smoke test for the maxent extension module.

Build and install it first, e.g. `maturin develop --release -m crates/python/Cargo.toml`.
"""

import math
import sys

import maxent


def check(name, ok, detail=""):
    print(f"{'ok  ' if ok else 'FAIL'} {name} {detail}")
    return ok


def main():
    results = []
    rule = maxent.QuadratureRule(192)
    results.append(check("weights sum to one", abs(sum(rule.weights) - 1.0) < 1e-14))

    sqrt = maxent.TestFunction("sqrt")
    mu = sqrt.analytic_moments(20)
    matrix = maxent.BasisMatrix(20, rule)
    rec = maxent.solve(mu, matrix, rule)
    results.append(check("sqrt M=20 converges", rec.converged, f"delta1={rec.delta1:.2e}"))

    f = sqrt.sample(rule)
    report = maxent.diagnose(mu, f, rec.rho, matrix, rule)
    results.append(check("kullback bound holds", report["bound_satisfied"], f"d_kl={report['d_kl']:.2e}"))

    grad = maxent.dual_gradient(rec.lambda_, mu, matrix, rule)
    results.append(check("gradient vanishes at the optimum", max(map(abs, grad)) < 1e-10))
    results.append(check("partition value", abs(rec.partition_value - math.exp(1 - rec.lambda_[0])) < 1e-12))

    u = maxent.TestFunction("u-function").analytic_moments(40)
    results.append(check("u-function moments vanish", all(m == 0.0 for m in u[1:])))

    dp = maxent.TestFunction("double-parabola", x1=0.35, x2=0.65)
    results.append(check("double-parabola gap is zero", dp(0.5) == 0.0))

    try:
        maxent.TestFunction("cosine")
        results.append(check("unknown id rejected", False))
    except ValueError:
        results.append(check("unknown id rejected", True))

    cfg = maxent.LogisticConfig(gamma=4.0, ensemble_size=4, transient_steps=1000, sample_steps=100_000)
    lm = maxent.logistic_moments(cfg, 8)
    results.append(check("logistic mu0 is one", lm[0] == 1.0 and len(lm) == 9))
    edges, dens = maxent.logistic_histogram(cfg)
    mass = sum(d * (b - a) for a, b, d in zip(edges, edges[1:], dens))
    results.append(check("histogram mass", abs(mass - 1.0) < 1e-12))

    return 0 if all(results) else 1


if __name__ == "__main__":
    sys.exit(main())
