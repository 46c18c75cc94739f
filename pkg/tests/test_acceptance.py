"""End-to-end acceptance gates, one summary line printed per check.

Each test exercises one user-facing guarantee at desk scale with fixed
streams, prints a single PASS/FAIL line with the measured numbers, and
asserts the stated tolerance window.  Run with -s to see the lines.
"""

from __future__ import annotations

import math
import time

import numpy as np

import helpers
from subweibull import covariance as cv
from subweibull import experiments as ex
from subweibull import hdclt as hc
from subweibull import lasso as ls
from subweibull import orlicz as oz
from subweibull import samplers as sp
from subweibull import tailbounds as tb

SEED = 20260816


def _line(tag: str, ok: bool, detail: str) -> None:
    print(f"[accept] {tag}: {'PASS' if ok else 'FAIL'} {detail}")


def test_exponential_norm_analytic_oracle():
    t0 = time.perf_counter()
    gen = sp.RngStream(1, 0).generator()
    x = sp.Exponential(1.0).sample(gen, 10**6)
    estimate = oz.empirical_norm(x, oz.OrliczSpec.psi(1.0)).value
    elapsed = time.perf_counter() - t0
    rel = abs(estimate / 2.0 - 1.0)
    ok = rel <= 0.02 and elapsed < 10.0
    _line("exponential psi1 norm oracle", ok,
          f"estimate={estimate:.5f} analytic=2.0 rel={rel:.4f} "
          f"time={elapsed:.1f}s")
    assert rel <= 0.02
    assert elapsed < 10.0


def test_norm_inequality_suites():
    t0 = time.perf_counter()
    samples = helpers.distribution_corpus(count=50)
    results = {
        "sandwich": helpers.sandwich_suite(samples),
        "monotonicity": helpers.monotonicity_suite(samples),
        "moment": helpers.moment_sandwich_suite(samples),
        "quasi_norm": helpers.quasi_norm_suite(samples),
    }
    elapsed = time.perf_counter() - t0
    checks = sum(c for c, _ in results.values())
    violations = sum(v for _, v in results.values())
    ok = violations == 0 and elapsed < 60.0
    _line("norm inequality suites", ok,
          f"checks={checks} violations={violations} time={elapsed:.1f}s")
    assert violations == 0, results
    assert elapsed < 60.0


def test_max_average_tail_domination():
    t0 = time.perf_counter()
    reps = 20_000
    constants = oz.BoundConstants()
    cells = violations = 0
    worst = -math.inf
    for ai, alpha in enumerate((0.5, 1.0, 2.0)):
        law = sp.SymmetricWeibull(alpha)
        for ni, n in enumerate((100, 1000)):
            for qi, q in enumerate((10, 100)):
                gen = sp.RngStream(SEED, 1000 * ai + 100 * ni + 10 * qi).generator()
                chunk = max(1, 4_000_000 // (n * q))
                maxima = np.empty(reps)
                done = 0
                while done < reps:
                    m = min(chunk, reps - done)
                    x = law.sample(gen, (m, n, q))
                    maxima[done:done + m] = np.max(np.abs(x.mean(axis=1)), axis=1)
                    done += m
                for t in (1.0, 2.0, 4.0):
                    threshold, prob = tb.max_average_threshold(
                        law.variance, law.psi_norm, n, q, alpha, t, constants)
                    freq = float(np.mean(maxima >= threshold))
                    se = math.sqrt(freq * (1.0 - freq) / reps)
                    worst = max(worst, freq - prob - 3.0 * se)
                    violations += freq > prob + 3.0 * se
                    cells += 1
    elapsed = time.perf_counter() - t0
    ok = violations == 0 and elapsed < 300.0
    _line("max-average tail domination", ok,
          f"cells={cells} violations={violations} worst_excess={worst:.4f} "
          f"time={elapsed:.0f}s")
    assert violations == 0
    assert elapsed < 300.0


def _median_gram_error(p, n, reps, base):
    law = sp.IidCoordinates(sp.SymmetricWeibull(1.0), p)
    target = np.diag(law.coordinate_variances)
    values = [
        cv.max_elementwise_error(
            cv.gram(sp.draw_matrix(law, n, sp.RngStream(SEED, base + 8 * rep))),
            target)
        for rep in range(reps)
    ]
    return float(np.median(values))


def test_gram_error_rate_and_dimension_scaling():
    t0 = time.perf_counter()
    ns = (250, 500, 1000, 2000, 4000)
    medians = [_median_gram_error(50, n, 200, 10_000_000 * i)
               for i, n in enumerate(ns)]
    slope, se = ex.fit_loglog(ns, medians)
    ratio = (_median_gram_error(1000, 2000, 200, 70_000_000)
             / _median_gram_error(10, 2000, 200, 60_000_000))
    target = math.sqrt(math.log(1000.0) / math.log(10.0))
    rel = abs(ratio / target - 1.0)
    elapsed = time.perf_counter() - t0
    ok = -0.60 <= slope <= -0.40 and rel <= 0.25 and elapsed < 300.0
    _line("gram error rate and dimension scaling", ok,
          f"slope={slope:.4f} (se {se:.4f}) ratio={ratio:.4f} "
          f"target={target:.4f} rel={rel:.3f} time={elapsed:.0f}s")
    assert -0.60 <= slope <= -0.40
    assert rel <= 0.25
    assert elapsed < 300.0


def test_sparse_operator_net_certificate_and_monotonicity():
    t0 = time.perf_counter()
    gen = np.random.default_rng(SEED)
    instances = cert_fail = mono_fail = 0
    for _ in range(100):
        p = int(gen.integers(6, 13))
        n = int(gen.integers(50, 400))
        k = int(gen.integers(1, 4))
        law = sp.IidCoordinates(sp.SymmetricWeibull(1.0), p)
        stream = sp.RngStream(SEED, 100_000 + 8 * instances)
        x = sp.draw_matrix(law, n, stream)
        deviation = cv.gram(x) - np.diag(law.coordinate_variances)
        net = cv.quarter_net(k, p, 200_000, sp.RngStream(SEED, 100_001 + 8 * instances))
        assert net.exhaustive
        exact = cv.rip_exact(deviation, k).value
        if exact > 2.0 * cv.rip_net(deviation, k, net).value + 1e-12:
            cert_fail += 1
        chain = [cv.rip_exact(deviation, kk).value for kk in (1, 2, 3)]
        if not (chain[0] <= chain[1] + 1e-12 and chain[1] <= chain[2] + 1e-12):
            mono_fail += 1
        instances += 1
    elapsed = time.perf_counter() - t0
    ok = cert_fail == 0 and mono_fail == 0 and elapsed < 60.0
    _line("sparse operator net certificate", ok,
          f"instances={instances} certificate_failures={cert_fail} "
          f"monotonicity_failures={mono_fail} time={elapsed:.1f}s")
    assert cert_fail == 0
    assert mono_fail == 0
    assert elapsed < 60.0


def test_sparse_operator_error_rate():
    t0 = time.perf_counter()
    law = sp.IidCoordinates(sp.SymmetricWeibull(1.0), 30)
    target = np.diag(law.coordinate_variances)
    ns = (500, 1000, 2000, 4000)
    medians = []
    for i, n in enumerate(ns):
        values = []
        for rep in range(100):
            x = sp.draw_matrix(law, n, sp.RngStream(SEED, 10_000_000 * i + 8 * rep))
            values.append(cv.rip_exact(cv.gram(x) - target, 2).value)
        medians.append(float(np.median(values)))
    slope, se = ex.fit_loglog(ns, medians)
    elapsed = time.perf_counter() - t0
    ok = -0.60 <= slope <= -0.40 and elapsed < 180.0
    _line("sparse operator error rate", ok,
          f"slope={slope:.4f} (se {se:.4f}) time={elapsed:.0f}s")
    assert -0.60 <= slope <= -0.40
    assert elapsed < 180.0


def test_restricted_eigenvalue_never_falsified():
    t0 = time.perf_counter()
    checked = satisfied = violations = 0
    stream_id = 200_000
    for alpha in (0.5, 1.0, 2.0):
        for p in (6, 12):
            for k in (2, 3):
                for n in (80, 400):
                    law = sp.IidCoordinates(sp.SymmetricWeibull(alpha), p)
                    for rep in range(5):
                        x = sp.draw_matrix(law, n, sp.RngStream(SEED, stream_id))
                        sigma = cv.gram(x)
                        lam_min = float(np.linalg.eigvalsh(sigma)[0])
                        for divisor in (2000.0, 5.0):
                            report = cv.re_check(sigma, lam_min / divisor, k)
                            checked += 1
                            if not report.satisfied:
                                continue
                            satisfied += 1
                            found = cv.cone_min_oracle(
                                sigma, range(k), 3.0, 10_000,
                                sp.RngStream(SEED, stream_id + 1))
                            if found < report.gamma_n - 1e-12:
                                violations += 1
                        stream_id += 8
    elapsed = time.perf_counter() - t0
    ok = violations == 0 and satisfied > 0 and elapsed < 120.0
    _line("restricted eigenvalue never falsified", ok,
          f"checked={checked} satisfied={satisfied} violations={violations} "
          f"time={elapsed:.0f}s")
    assert violations == 0
    assert satisfied > 0
    assert elapsed < 120.0


def test_lasso_deterministic_bound_conformance():
    t0 = time.perf_counter()
    law = sp.IidCoordinates(sp.SymmetricWeibull(1.0), 200)
    beta0 = np.zeros(200)
    beta0[:5] = 1.0
    cone_fail = bound_fail = re_passes = 0
    min_slack = math.inf
    for rep in range(200):
        data = sp.make_regression(law, beta0, sp.Gaussian(1.0), 2000,
                                  sp.RngStream(SEED, 8 * rep))
        problem = ls.LassoProblem(data.x, data.y)
        lam = ls.EmpiricalOracle(data.eps).resolve(problem)
        fit = ls.solve(problem, lam)
        nu = fit.beta - beta0
        if not ls.cone_membership(nu, range(5), beta0):
            cone_fail += 1
        sigma = cv.gram(data.x)
        report = cv.re_check(sigma, float(np.linalg.eigvalsh(sigma)[0]) / 2000.0, 5)
        if report.satisfied:
            re_passes += 1
            limit = 3.0 * math.sqrt(5.0) * lam / report.gamma_n
            l2 = float(np.linalg.norm(nu))
            min_slack = min(min_slack, limit - l2)
            if l2 > limit + 1e-12:
                bound_fail += 1
    elapsed = time.perf_counter() - t0
    ok = cone_fail == 0 and bound_fail == 0 and re_passes > 0 and elapsed < 300.0
    _line("lasso deterministic bound conformance", ok,
          f"replications=200 cone_failures={cone_fail} re_passes={re_passes} "
          f"bound_failures={bound_fail} min_slack={min_slack:.3f} "
          f"time={elapsed:.0f}s")
    assert cone_fail == 0
    assert bound_fail == 0
    assert re_passes > 0
    assert elapsed < 300.0


def _median_lasso_error(k, n, base, noise):
    law = sp.IidCoordinates(sp.SymmetricWeibull(1.0), 200)
    beta0 = np.zeros(200)
    beta0[:k] = 1.0
    values = []
    for rep in range(200):
        data = sp.make_regression(law, beta0, noise, n,
                                  sp.RngStream(SEED, base + 8 * rep))
        problem = ls.LassoProblem(data.x, data.y)
        lam = ls.EmpiricalOracle(data.eps).resolve(problem)
        fit = ls.solve(problem, lam)
        values.append(float(np.linalg.norm(fit.beta - beta0)))
    return float(np.median(values))


def test_lasso_error_rate_and_sparsity_scaling():
    t0 = time.perf_counter()
    ns = (500, 1000, 2000, 4000, 8000)
    gaussian = sp.Gaussian(1.0)
    medians = [_median_lasso_error(5, n, 100_000_000 * i, gaussian)
               for i, n in enumerate(ns)]
    slope, se = ex.fit_loglog(ns, medians)
    ratio = (_median_lasso_error(8, 4000, 700_000_000, gaussian)
             / _median_lasso_error(2, 4000, 600_000_000, gaussian))
    rel = abs(ratio / 2.0 - 1.0)
    pareto_medians = [
        _median_lasso_error(5, n, 800_000_000 + 10_000_000 * i, sp.Pareto(4.5))
        for i, n in enumerate(ns)
    ]
    pareto_slope, pareto_se = ex.fit_loglog(ns, pareto_medians)
    elapsed = time.perf_counter() - t0
    ok = (-0.60 <= slope <= -0.40 and rel <= 0.30
          and -0.60 <= pareto_slope <= -0.40 and elapsed < 600.0)
    _line("lasso error rate and sparsity scaling", ok,
          f"slope={slope:.4f} (se {se:.4f}) k_ratio={ratio:.4f} rel={rel:.3f} "
          f"pareto_slope={pareto_slope:.4f} (se {pareto_se:.4f}) "
          f"time={elapsed:.0f}s")
    assert -0.60 <= slope <= -0.40
    assert rel <= 0.30
    assert -0.60 <= pareto_slope <= -0.40
    assert elapsed < 600.0


def test_solver_matches_independent_oracle():
    t0 = time.perf_counter()
    gen = np.random.default_rng(SEED)
    tol = 1e-8
    worst_rel = worst_kkt = 0.0
    for _ in range(50):
        n = int(gen.integers(40, 121))
        p = int(gen.integers(8, 25))
        x = gen.standard_normal((n, p))
        beta = np.zeros(p)
        support = gen.choice(p, size=3, replace=False)
        beta[support] = gen.normal(0.0, 2.0, size=3)
        y = x @ beta + gen.standard_normal(n)
        lam = float(gen.uniform(0.05, 0.5))
        law = sp.IidCoordinates(sp.Gaussian(1.0), p)
        problem = ls.LassoProblem(sp.DataMatrix(n, p, x, law), y)
        fit = ls.solve(problem, lam, tol=tol)
        assert fit.converged
        objective = (0.5 * float(np.sum((y - x @ fit.beta) ** 2)) / n
                     + lam * float(np.sum(np.abs(fit.beta))))
        oracle = helpers.lasso_oracle_objective(x, y, lam)
        worst_rel = max(worst_rel,
                        abs(objective - oracle) / max(1.0, abs(oracle)))
        worst_kkt = max(worst_kkt, fit.kkt_residual)
    elapsed = time.perf_counter() - t0
    ok = worst_rel <= 1e-6 and worst_kkt <= 10.0 * tol and elapsed < 60.0
    _line("solver matches independent oracle", ok,
          f"problems=50 worst_rel={worst_rel:.2e} worst_kkt={worst_kkt:.2e} "
          f"time={elapsed:.1f}s")
    assert worst_rel <= 1e-6
    assert worst_kkt <= 10.0 * tol
    assert elapsed < 60.0


def test_bootstrap_coverage():
    t0 = time.perf_counter()
    law = sp.IidCoordinates(sp.SymmetricWeibull(1.0), 100)
    coverage, mc_se = hc.coverage_experiment(
        law, 500, 100, 0.90, 1000, 500, sp.RngStream(SEED, 0))
    gaussian_law = sp.IidCoordinates(sp.Gaussian(1.0), 1)
    coverage1, mc_se1 = hc.coverage_experiment(
        gaussian_law, 500, 1, 0.90, 1000, 500, sp.RngStream(SEED, 8))
    elapsed = time.perf_counter() - t0
    dev1 = abs(coverage1 - 0.90)
    ok = (abs(coverage - 0.90) <= 0.04 and dev1 <= 4.0 * mc_se1
          and elapsed < 600.0)
    _line("bootstrap coverage", ok,
          f"weibull_q100={coverage:.4f} (mc_se {mc_se:.4f}) "
          f"gaussian_q1={coverage1:.4f} (dev {dev1 / mc_se1:.2f} se) "
          f"time={elapsed:.0f}s")
    assert abs(coverage - 0.90) <= 0.04
    assert dev1 <= 4.0 * mc_se1
    assert elapsed < 600.0


def test_max_statistic_gaussian_distance_trend():
    t0 = time.perf_counter()
    law = sp.IidCoordinates(sp.Exponential(1.0), 50)
    sigma = np.diag(law.coordinate_variances)
    ns = (250, 500, 1000, 2000, 4000)
    medians = {}
    for ni, n in enumerate(ns):
        values = []
        for run in range(20):
            base = 10_000_000 * ni + 8 * run
            data = hc.data_max_sample(law, n, 2000, sp.RngStream(SEED, base))
            analog = hc.gaussian_analog_sample(sigma, n, 2000,
                                               sp.RngStream(SEED, base + 1))
            values.append(hc.rho_rectangle_proxy(data, analog, grid=4000))
        medians[n] = float(np.median(values))

    bound_fail = 0
    gen = np.random.default_rng(SEED)
    for _ in range(100):
        l_nq = float(gen.uniform(0.5, 4.0))
        k_nq = float(gen.uniform(0.5, 4.0))
        n = float(gen.uniform(1e3, 1e7))
        q = float(gen.uniform(2.0, 1e4))
        beta = float(gen.uniform(0.5, 2.0))
        big_b = float(gen.uniform(0.5, 2.0))
        base_bound, _ = hc.hdclt_bound(l_nq, k_nq, n, q, beta, big_b)
        up_n, _ = hc.hdclt_bound(l_nq, k_nq, 4.0 * n, q, beta, big_b)
        up_q, _ = hc.hdclt_bound(l_nq, k_nq, n, 2.0 * q, beta, big_b)
        up_l, _ = hc.hdclt_bound(2.0 * l_nq, k_nq, n, q, beta, big_b)
        up_k, _ = hc.hdclt_bound(l_nq, 2.0 * k_nq, n, q, beta, big_b)
        if not (up_n < base_bound and up_q > base_bound
                and up_l > base_bound and up_k > base_bound):
            bound_fail += 1
    elapsed = time.perf_counter() - t0
    sequence = " ".join(f"{n}:{medians[n]:.4f}" for n in ns)
    ok = medians[4000] < medians[250] and bound_fail == 0 and elapsed < 300.0
    _line("max statistic gaussian distance trend", ok,
          f"median rho {sequence} endpoint_decrease="
          f"{medians[4000] < medians[250]} bound_monotonicity_failures="
          f"{bound_fail} time={elapsed:.0f}s")
    assert medians[4000] < medians[250]
    assert bound_fail == 0
    assert elapsed < 300.0


_RERUN_CONFIGS = {
    "norms": "alpha = 1\nn = 100, 200\nreps = 3\n",
    "tailcheck": "alpha = 1\nn = 100\nq = 5\nt = 1, 2\nreps = 100\n",
    "covariance": "alpha = 1\np = 8\nn = 50, 100\nreps = 4\n",
    "rip": "alpha = 1\np = 8\nk = 2\nn = 100\nreps = 3\n",
    "re": "alpha = 1\np = 5\nk = 2\nn = 80\nreps = 3\ncone_trials = 50\n",
    "lasso": "alpha = 1\nk = 2\nn = 150\np = 12\nreps = 3\n",
    "clt": "q = 4\nn = 50\nreps = 2\nstat_reps = 100\n",
    "bootstrap": "q = 4\nn = 60\nreps = 30\ndraws = 60\n",
}


def test_rerun_determinism(tmp_path):
    t0 = time.perf_counter()
    assert set(_RERUN_CONFIGS) == set(ex.REGISTRY)
    mismatched = []
    for name, body in _RERUN_CONFIGS.items():
        text = f"experiment = {name}\nseed = 7\n" + body
        first = ex.parse_config(text + f"output_dir = {tmp_path / name / 'a'}\n")
        second = ex.parse_config(text + f"output_dir = {tmp_path / name / 'b'}\n")
        ex.run(first)
        ex.run(second)
        bytes_a = (tmp_path / name / "a" / "results.csv").read_bytes()
        bytes_b = (tmp_path / name / "b" / "results.csv").read_bytes()
        if bytes_a != bytes_b:
            mismatched.append(name)
    elapsed = time.perf_counter() - t0
    ok = not mismatched
    _line("rerun determinism", ok,
          f"experiments={len(_RERUN_CONFIGS)} mismatched={mismatched or 'none'} "
          f"time={elapsed:.0f}s")
    assert not mismatched
