"""Shared fixtures for the unit and acceptance suites.

The property suites here are used twice: module tests assert zero
violations on the default corpus, and the acceptance harness re-runs
them under timing constraints.  Each suite returns (checks, violations)
so callers can assert both coverage and correctness.
"""

from __future__ import annotations

import numpy as np

from subweibull import orlicz as oz

NORM_TOL = 1e-6


def distribution_corpus(seed: int = 20260816, count: int = 50) -> list[np.ndarray]:
    """Deterministic corpus of random empirical distributions.

    Mixes light and heavy tails, asymmetric and symmetric laws, and a
    range of scales and sizes, so the Orlicz property suites see the
    families the norms are meant to distinguish.
    """
    rng = np.random.default_rng(seed)
    samples = []
    for i in range(count):
        m = int(rng.integers(40, 160))
        scale = float(rng.uniform(0.5, 3.0))
        kind = i % 6
        if kind == 0:
            x = rng.standard_normal(m)
        elif kind == 1:
            x = rng.standard_exponential(m)
        elif kind == 2:
            x = rng.lognormal(0.0, 1.0, m)
        elif kind == 3:
            x = rng.uniform(-1.0, 1.0, m)
        elif kind == 4:
            x = rng.standard_t(5, m)
        else:
            x = rng.weibull(0.7, m) * rng.choice([-1.0, 1.0], m)
        samples.append(scale * x)
    return samples


def sandwich_suite(samples, alphas=(0.5, 1.0, 2.0), scales=(0.5, 2.0), tol=NORM_TOL):
    """Norm sandwich: ||X||_psi <= ||X||_phi <= 2 ||X||_psi within 2 tol."""
    checks = violations = 0
    for x in samples:
        for alpha in alphas:
            for l in scales:
                n_psi = oz.empirical_norm(x, oz.OrliczSpec.gbo(alpha, l), tol).value
                n_phi = oz.empirical_norm(x, oz.OrliczSpec.gbo_phi(alpha, l), tol).value
                slack = 2.0 * tol * max(1.0, n_psi, n_phi)
                checks += 1
                if not (n_psi <= n_phi + slack and n_phi <= 2.0 * n_psi + slack):
                    violations += 1
    return checks, violations


def monotonicity_suite(samples, alphas=(0.5, 1.0, 2.0), tol=NORM_TOL):
    """Domination and scale monotonicity of the two-regime norm.

    Coordinatewise |A| >= |B| implies norm(A) >= norm(B), and the norm
    is nonincreasing in the second-regime scale L.
    """
    rng = np.random.default_rng(915)
    checks = violations = 0
    for x in samples:
        shrink = x * rng.uniform(0.0, 1.0, size=x.shape)
        for alpha in alphas:
            spec = oz.OrliczSpec.gbo(alpha, 1.0)
            big = oz.empirical_norm(x, spec, tol).value
            small = oz.empirical_norm(shrink, spec, tol).value
            checks += 1
            if not small <= big + 2.0 * tol * max(1.0, big):
                violations += 1
            norms = [
                oz.empirical_norm(x, oz.OrliczSpec.gbo(alpha, l), tol).value
                for l in (0.0, 0.7, 2.5)
            ]
            for lo_l, hi_l in zip(norms, norms[1:]):
                checks += 1
                if not hi_l <= lo_l + 2.0 * tol * max(1.0, lo_l):
                    violations += 1
    return checks, violations


def moment_sandwich_suite(samples, alphas=(0.5, 1.0, 2.0), scales=(0.5, 2.0), tol=NORM_TOL):
    """C_*(a) * moment functional <= two-regime norm <= C^*(a) * moment functional.

    The moment functional is evaluated on a grid, so the supremum is
    grown until doubling r_max moves it by under 0.1%; the upper-side
    check carries that same 0.1% as slack on top of the norm tolerance.
    """
    checks = violations = 0
    for x in samples:
        for alpha in alphas:
            for l in scales:
                r_max = 200.0
                mg = oz.gbo_moment_norm(x, alpha, l, r_max=r_max, grid_step=0.25)
                for _ in range(6):
                    wider = oz.gbo_moment_norm(x, alpha, l, r_max=2 * r_max, grid_step=0.25)
                    if wider <= mg * 1.001:
                        break
                    r_max *= 2
                    mg = wider
                norm = oz.empirical_norm(x, oz.OrliczSpec.gbo(alpha, l), tol).value
                lo = oz.moment_lower_constant(alpha) * mg
                hi = oz.moment_upper_constant(alpha) * mg
                slack = tol * max(1.0, norm) + 0.001 * hi
                checks += 1
                if not (lo <= norm + slack and norm <= hi + slack):
                    violations += 1
    return checks, violations


def quasi_norm_suite(samples, alphas=(0.5, 1.0, 2.0), tol=NORM_TOL):
    """||x + y|| <= Q_alpha (||x|| + ||y||) + 3 tol on paired samples."""
    checks = violations = 0
    for x, y in zip(samples[::2], samples[1::2]):
        m = min(x.size, y.size)
        a, b = x[:m], y[:m]
        for alpha in alphas:
            spec = oz.OrliczSpec.gbo(alpha, 1.0)
            n_sum = oz.empirical_norm(a + b, spec, tol).value
            n_a = oz.empirical_norm(a, spec, tol).value
            n_b = oz.empirical_norm(b, spec, tol).value
            q = oz.quasi_norm_constant(alpha)
            checks += 1
            if not n_sum <= q * (n_a + n_b) + 3.0 * tol * max(1.0, n_sum):
                violations += 1
    return checks, violations


def lasso_oracle_objective(x, y, lam, iterations=20000):
    """Independent slow-but-sure solver for the l1 objective.

    Accelerated projected gradient on the nonnegative split beta = u - v
    (smooth objective, clip-at-zero projection); returns the best
    objective value seen.  Deliberately shares no code with the
    coordinate descent path.
    """
    import math

    import numpy as np

    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = x.shape
    lipschitz = float(np.linalg.eigvalsh(x.T @ x / n)[-1])
    if lipschitz == 0.0:
        return float(y @ y) / (2.0 * n)
    step = 1.0 / lipschitz
    u = np.zeros(p)
    v = np.zeros(p)
    look_u, look_v = u.copy(), v.copy()
    momentum = 1.0
    best = float(y @ y) / (2.0 * n)
    for _ in range(iterations):
        gradient = x.T @ (y - x @ (look_u - look_v)) / n
        next_u = np.maximum(look_u - step * (lam - gradient), 0.0)
        next_v = np.maximum(look_v - step * (lam + gradient), 0.0)
        next_momentum = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * momentum**2))
        look_u = next_u + (momentum - 1.0) / next_momentum * (next_u - u)
        look_v = next_v + (momentum - 1.0) / next_momentum * (next_v - v)
        u, v, momentum = next_u, next_v, next_momentum
        residual = y - x @ (u - v)
        value = float(residual @ residual) / (2.0 * n) + lam * float(np.sum(u + v))
        best = min(best, value)
    return best
