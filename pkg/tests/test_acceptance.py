"""Acceptance criteria, one test per criterion at the stated tolerances.

Each test prints a single PASS/FAIL line (shown in the terminal summary) and
then asserts.  Run alone with ``pytest tests/test_acceptance.py -v``.
"""
import math
import time
from fractions import Fraction
from functools import lru_cache

import numpy as np
import pytest

from tubelab.spectral import experiments as ex

TAU = 1.0
EPS = 0.2
LINES = {}


def geometric(lo, hi, n=5):
    return ex.geometric_grid(lo, hi, n)


def report(number, title, passed, detail, runtime, limit):
    ok = bool(passed) and runtime < limit
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d} {title}: {detail} ({runtime:.1f}s, limit {limit:g}s)"
    LINES[number] = line
    print(line)
    return ok


@pytest.fixture(scope="module", autouse=True)
def summary(request):
    yield
    tr = request.config.pluginmanager.get_plugin("terminalreporter")
    if tr is None:
        return
    tr.write_line("")
    tr.write_line("acceptance summary")
    for k in sorted(LINES):
        tr.write_line(LINES[k])


def timed(fn, *args, **kw):
    start = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - start


def fmt(res):
    return ", ".join(f"{t.name}={t.value:.4g}" for t in res.thresholds)


@lru_cache(maxsize=1)
def metaplectic():
    return timed(ex.metaplectic_experiment, n_matrices=20, scale=0.8, radius=2.0, n_pairs=10, seed=0)


def test_criterion_01_metaplectic_consistency():
    res, rt = metaplectic()
    t = res.threshold("closed_vs_quadrature_rel_dev")
    assert report(1, "closed form vs Gaussian integral", t.passed and t.upper == 1e-6,
                  f"max rel dev {t.value:.2e} (tol 1e-6)", rt, 60)


def test_criterion_02_unitarity_composition():
    res, rt = metaplectic()
    u, c = res.threshold("unitarity_rel_dev"), res.threshold("composition_rel_dev")
    assert report(2, "unitarity and composition", u.passed and c.passed,
                  f"unitarity {u.value:.2e}, composition {c.value:.2e} (tol 1e-6)", rt, 60)


def test_criterion_03_phase_hessian():
    res, rt = timed(ex.phase_hessian_experiment, [Fraction(1, 2), 1, 2])
    assert report(3, "exact Hessian/inverse and critical point", res.passed,
                  "tau in {1/2, 1, 2} exact", rt, 1)


def test_criterion_04_diagonal_growth():
    res, rt = timed(ex.diagonal_growth_experiment, geometric(40, 160), tau=TAU, epsilon=EPS, tol=0.1)
    assert len(res.thresholds) == 3
    assert report(4, "on-diagonal growth slope 1 +- 0.1", res.passed, fmt(res), rt, 600)


def test_criterion_05_transverse_profile():
    res, rt = timed(ex.transverse_profile_experiment, 120.0, tau=TAU, epsilon=EPS, rel_tol=0.1)
    assert report(5, "transverse variance = tau within 10%", res.passed, fmt(res), rt, 300)


def test_criterion_06_off_diagonal_scaling():
    res, rt = timed(ex.scaling_experiment, 0.1, geometric(60, 160), tau=TAU, epsilon=EPS,
                    model="rotation", check_lambda=120.0, rel_tol=0.15)
    assert report(6, "off-diagonal match with rotation model (15%), decreasing", res.passed, fmt(res), rt, 600)


def test_criterion_07_tempered_growth():
    res, rt = timed(ex.tempered_experiment, geometric(40, 160), tau=TAU, epsilon=EPS, tol=0.1)
    assert report(7, "tempered slope 1/2 +- 0.1", res.passed, fmt(res), rt, 600)


def test_criterion_08_gaussian_decay():
    res, rt = timed(ex.decay_experiment, lam=120.0, tau=TAU, epsilon=EPS, tol=0.15)
    assert res.threshold("decay_slope").lower == 0.85 and res.threshold("decay_slope").upper == 1.15
    assert report(8, "decay slope in [0.85, 1.15], none along orbit", res.passed, fmt(res), rt, 300)


def test_criterion_09_operator_norm_exponents():
    start = time.perf_counter()
    parts = []
    for p, q in ((2.0, 4.0), (2.0, math.inf), (4.0, 4.0)):
        r = ex.opnorm_experiment(p, q, geometric(60, 240, 4), tau=TAU, epsilon=EPS, tol=0.07)
        parts.append((p, q, r))
    rt = time.perf_counter() - start
    detail = "; ".join(
        f"({p:g},{q:g}) target {r.fits['target']:.3f} majorant {r.fits['majorant_slope']:.3f} "
        f"witness {r.fits['witness_slope']:.3f}" for p, q, r in parts
    )
    assert report(9, "L^p->L^q exponents within 0.07", all(r.passed for *_, r in parts), detail, rt, 900)


def test_criterion_10_husimi_sharpness():
    res, rt = timed(ex.lp_norm_experiment, np.unique(np.round(geometric(40, 140))).astype(int),
                    (4.0, 8.0, math.inf), tau=TAU, tol=0.05, flat_tol=0.1)
    assert report(10, "L^p/L^2 slopes and L^2 envelope", res.passed, fmt(res), rt, 600)


def test_criterion_11_husimi_residual():
    res, rt = timed(ex.husimi_residual_experiment, [20, 35, 50, 70, 95, 120], tau=TAU, epsilon=EPS)
    vals = [v for _, v in res.series[0].points]
    detail = f"{fmt(res)}, r_N in [{min(vals):.4f}, {max(vals):.4f}]"
    assert report(11, "residual bounded without growth", res.passed, detail, rt, 300)


def test_criterion_12_short_window():
    res, rt = timed(ex.short_window_experiment, geometric(40, 160), tau=TAU, tol=0.15)
    assert report(12, "short-window slope 1 +- 0.15", res.passed, fmt(res), rt, 600)


def _property_tests():
    import test_bargmann_fock
    import test_harmonics
    import test_kernels
    import test_sphere_tube
    import test_symplectic
    import test_windows

    rng = lambda: np.random.default_rng(1234)
    return {
        "symplectic": [
            test_symplectic.test_complexified_action_matches_real,
            test_symplectic.test_block_group_law,
            test_symplectic.test_complexified_blocks_relations,
            test_bargmann_fock.test_closed_form_modulus_covariance,
        ],
        "quadric": [
            test_sphere_tube.test_quadric_and_tube_function,
            lambda: test_sphere_tube.test_tube_function_of_embed_many(rng()),
            test_sphere_tube.test_heisenberg_frame,
        ],
        "flow group law": [
            test_sphere_tube.test_flow_group_law,
            test_sphere_tube.test_jacobi_group_law,
            test_sphere_tube.test_liouville_measure_is_flow_invariant,
        ],
        "theta-equivariance": [test_harmonics.test_theta_equivariance],
        "Gram diagonality": [test_harmonics.test_gram_diagonal],
        "window invariants": [
            test_windows.test_window_even_and_nonnegative,
            *[(lambda k=k: test_windows.test_hat_normalisation_and_support(k)) for k in ("fejer", "fejer_squared", "bump")],
            test_kernels.test_hermitian_and_positive,
        ],
    }


def test_criterion_13_property_suites():
    start = time.perf_counter()
    failures = []
    for suite, fns in _property_tests().items():
        for fn in fns:
            try:
                fn()
            except Exception as e:  # collect every failing suite before reporting
                failures.append(f"{suite}: {getattr(fn, '__name__', 'case')}: {type(e).__name__}")
    rt = time.perf_counter() - start
    detail = "all suites pass" if not failures else "; ".join(failures)
    assert report(13, "property suites", not failures, detail, rt, 300)
