"""Experiment procedures: each returns an ExperimentResult holding the measured
series, fitted exponents and threshold comparisons."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..bargmann_fock import (
    bf_kernel,
    composed_kernel,
    fit_measure_constant,
    metaplectic_kernel_closed,
    metaplectic_kernel_quadrature,
    unitarity_integral,
)
from ..harmonics import (
    HarmonicMode,
    harmonic_log,
    log_tube_l2_norm,
    tube_lp_norm,
)
from ..numerics import LogLogFit, fit_linear, fit_loglog, random_symplectic, verify_phase_hessian
from ..sphere_tube import (
    TubePoint,
    displace,
    embed,
    from_angles,
    geodesic_flow,
    heisenberg_linearization,
    heisenberg_scale,
    jacobi_linearization,
    reduced_liouville_quadrature,
)
from .kernels import projector_kernel, short_window_kernel, tempered_kernel
from .windows import SpectralWindow, window_chi, window_hat


@dataclass
class KernelSeries:
    experiment_tag: str
    params: dict
    points: list  # (parameter, value)
    fit: LogLogFit | None = None

    def __post_init__(self):
        if not self.points:
            raise ValueError("a kernel series needs at least one point")

    def with_loglog_fit(self) -> "KernelSeries":
        vals = [v for _, v in self.points]
        if all(np.isreal(v) and np.real(v) > 0 for v in vals) and len(self.points) >= 3:
            self.fit = fit_loglog([(x, float(np.real(v))) for x, v in self.points])
        return self


@dataclass
class Threshold:
    name: str
    value: float
    lower: float = -np.inf
    upper: float = np.inf

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.value) and self.lower <= self.value <= self.upper)


@dataclass
class ExperimentResult:
    tag: str
    params: dict
    series: list = field(default_factory=list)
    fits: dict = field(default_factory=dict)
    thresholds: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(t.passed for t in self.thresholds)

    def threshold(self, name: str) -> Threshold:
        for t in self.thresholds:
            if t.name == name:
                return t
        raise KeyError(name)


def default_base_points(tau: float) -> list[TubePoint]:
    return [
        from_angles(0.2, 1.2, 0.5, tau),
        from_angles(2.0, 0.6, 2.5, tau),
        from_angles(-1.1, 2.3, -0.9, tau),
    ]


def geometric_grid(lo: float, hi: float, count: int) -> np.ndarray:
    return np.geomspace(lo, hi, count)


# ---------------------------------------------------------------------------
# model kernels


def metaplectic_experiment(
    n_matrices: int = 20, scale: float = 0.8, radius: float = 2.0, n_grid: int = 5,
    n_pairs: int = 10, seed: int = 0,
) -> ExperimentResult:
    """Closed form vs Gaussian-integral definition, unitarity and composition (k = 1)."""
    res = ExperimentResult("metaplectic-verify", dict(n_matrices=n_matrices, scale=scale,
                                                       radius=radius, n_grid=n_grid, n_pairs=n_pairs, seed=seed))
    c = fit_measure_constant(1)
    res.extra["measure_constant"] = c
    axis = np.linspace(-radius / np.sqrt(2), radius / np.sqrt(2), n_grid)
    grid = (axis[:, None] + 1j * axis[None, :]).ravel()
    grid = grid[np.abs(grid) <= radius + 1e-12]
    rng = np.random.default_rng(seed)
    worst, worst_printed = 0.0, 0.0
    pts = []
    for i in range(n_matrices):
        M = random_symplectic(1, seed + i, scale)
        zs = rng.choice(grid, 6)
        ws = rng.choice(grid, 6)
        dev = 0.0
        for z, w in zip(zs, ws):
            a = abs(metaplectic_kernel_closed(M, [z], [w]).value)
            b = abs(metaplectic_kernel_quadrature(M, [z], [w]))
            bp = abs(metaplectic_kernel_quadrature(M, [z], [w], prefactor="printed"))
            dev = max(dev, abs(b - a) / a)
            worst_printed = max(worst_printed, abs(bp - a) / a)
        worst = max(worst, dev)
        pts.append((i, dev))
    res.series.append(KernelSeries("closed-vs-quadrature", {}, pts))
    res.extra["printed_prefactor_max_deviation"] = worst_printed
    unit, comp = 0.0, 0.0
    upts, cpts = [], []
    for i in range(n_pairs):
        M1 = random_symplectic(1, 1000 + seed + i, 0.5)
        M2 = random_symplectic(1, 2000 + seed + i, 0.5)
        z = complex(*rng.uniform(-1.0, 1.0, 2))
        w = complex(*rng.uniform(-1.0, 1.0, 2))
        ref = abs(bf_kernel([z], [w]))
        u = abs(abs(unitarity_integral(M1, [z], [w])) - ref) / ref
        cm = abs(metaplectic_kernel_closed(M1 @ M2, [z], [w]).value)
        cc = abs(abs(composed_kernel(M1, M2, [z], [w])) - cm) / cm
        unit, comp = max(unit, u), max(comp, cc)
        upts.append((i, u))
        cpts.append((i, cc))
    res.series += [KernelSeries("unitarity", {}, upts), KernelSeries("composition", {}, cpts)]
    res.thresholds += [
        Threshold("closed_vs_quadrature_rel_dev", worst, upper=1e-6),
        Threshold("unitarity_rel_dev", unit, upper=1e-6),
        Threshold("composition_rel_dev", comp, upper=1e-6),
    ]
    return res


def phase_hessian_experiment(taus: Sequence = (0.5, 1, 2)) -> ExperimentResult:
    res = ExperimentResult("phase-hessian", dict(taus=[float(t) for t in taus]))
    for t in taus:
        data = verify_phase_hessian(t)
        res.extra[str(float(t))] = dict(hessian=data.hessian.tolist(), hessian_inverse=data.hessian_inverse.tolist(),
                                        critical_point=list(data.critical_point))
        res.thresholds.append(Threshold(f"exact_identity_tau_{float(t):g}", 0.0, upper=0.0))
    return res


# ---------------------------------------------------------------------------
# scaling asymptotics


def diagonal_growth_experiment(lambda_grid, points=None, tau: float = 1.0, epsilon: float = 0.2,
                               kind: str = "bump", tol: float = 0.1) -> ExperimentResult:
    pts = default_base_points(tau) if points is None else points
    res = ExperimentResult("diagonal-growth", dict(tau=tau, epsilon=epsilon, kind=kind))
    for i, p in enumerate(pts):
        vals = [(float(l), projector_kernel(SpectralWindow(epsilon, kind, l), p, p).real) for l in lambda_grid]
        s = KernelSeries("diagonal", {"point": i}, vals).with_loglog_fit()
        res.series.append(s)
        res.thresholds.append(Threshold(f"slope_point_{i}", s.fit.slope, 1 - tol, 1 + tol))
    return res


def transverse_profile_experiment(lam: float = 120.0, p: TubePoint | None = None, tau: float = 1.0,
                                  epsilon: float = 0.2, kind: str = "bump", u_max: float = 1.5,
                                  n_u: int = 8, rel_tol: float = 0.1) -> ExperimentResult:
    """Fit |Pi(p, displace(p,0,u))| / Pi(p,p) = exp(-|u|^2 / (2 var)) along e1 and J e1."""
    p = default_base_points(tau)[0] if p is None else p
    w = SpectralWindow(epsilon, kind, lam)
    ref = projector_kernel(w, p, p).real
    us = np.linspace(u_max / n_u, u_max, n_u)
    res = ExperimentResult("transverse-profile", dict(lam=lam, tau=p.tau, epsilon=epsilon, kind=kind))
    for label, direction in (("e1", 1.0), ("Je1", 1j)):
        ys = [-np.log(abs(projector_kernel(w, p, displace(p, 0.0, direction * u, lam))) / ref) for u in us]
        slope, _ = fit_linear(us**2, ys)
        var = 1.0 / (2 * slope)
        res.series.append(KernelSeries(f"profile-{label}", {}, list(zip(us.tolist(), np.exp(-np.array(ys)).tolist()))))
        res.fits[f"variance_{label}"] = var
        res.thresholds.append(Threshold(f"variance_{label}_over_tau", var / p.tau, 1 - rel_tol, 1 + rel_tol))
    return res


def model_modulus(M, u, v) -> float:
    """|Pi_{H,M}(u, v)| / |Pi_{H,M}(0, 0)|."""
    a = abs(metaplectic_kernel_closed(M, [u], [v]).value)
    return a / abs(metaplectic_kernel_closed(M, [0], [0]).value)


def flow_model(s: float, tau: float, model: str = "rotation"):
    """Symplectic matrix of the model kernel for base points p and gamma^s(p).

    The kernel concentrates where the second argument is the flowed first
    argument, i.e. at v = D gamma^s u.  The metaplectic kernel Pi_{H,M}(z, w)
    concentrates at z = M w, so the model uses the inverse flow derivative.
    """
    if model == "rotation":
        return jacobi_linearization(-s)
    if model == "heisenberg":
        return heisenberg_linearization(-s, tau)
    raise ValueError(f"unknown model {model!r}")


DEFAULT_OFFSETS = (
    (0.0, 0.8, 0.0, 0.8),
    (0.0, 0.3, 0.0, -0.4),
    (0.0, 0.5, 0.0, 0.5j),
    (0.5, 0.6, 0.0, 0.2),
)


def scaling_experiment(s: float, lambda_grid, offsets=DEFAULT_OFFSETS, p: TubePoint | None = None,
                       tau: float = 1.0, epsilon: float = 0.2, kind: str = "bump", model: str = "rotation",
                       check_lambda: float = 120.0, rel_tol: float = 0.15) -> ExperimentResult:
    """Normalised off-diagonal moduli against the metaplectic model kernel.

    For each lambda and offset (theta, u, phi, v) compute
    R = |Pi(displace(p, theta, u), displace(gamma^s p, phi, v))| / |Pi(p, gamma^s p)|
    and compare with |Pi_{H,M}(u/sqrt(tau), v/sqrt(tau))| / |Pi_{H,M}(0,0)|.
    """
    p = default_base_points(tau)[0] if p is None else p
    tau = p.tau
    q = geodesic_flow(p, s)
    M = flow_model(s, tau, model)
    res = ExperimentResult("scaling", dict(s=s, tau=tau, epsilon=epsilon, kind=kind, model=model,
                                           offsets=[[str(x) for x in o] for o in offsets]))
    dev_pts, ratio_pts = [], []
    lambdas = sorted(set([float(l) for l in lambda_grid] + [float(check_lambda)]))
    for lam in lambdas:
        w = SpectralWindow(epsilon, kind, lam)
        ref = abs(projector_kernel(w, p, q))
        worst = 0.0
        for theta, u, phi, v in offsets:
            a = displace(p, theta, u, lam)
            b = displace(q, phi, v, lam)
            r = abs(projector_kernel(w, a, b)) / ref
            target = model_modulus(M, complex(u) / np.sqrt(tau), complex(v) / np.sqrt(tau))
            worst = max(worst, abs(r - target) / target)
            ratio_pts.append((lam, r))
        dev_pts.append((lam, worst))
    res.series.append(KernelSeries("max-relative-deviation", {}, dev_pts))
    res.series.append(KernelSeries("normalized-modulus", {}, ratio_pts))
    grid_devs = [(l, d) for l, d in dev_pts if l in set(float(x) for x in lambda_grid)]
    dev_check = dict(dev_pts)[float(check_lambda)]
    res.thresholds.append(Threshold(f"deviation_at_lambda_{check_lambda:g}", dev_check, upper=rel_tol))
    increases = sum(1 for (_, a), (_, b) in zip(dev_pts, dev_pts[1:]) if b >= a)
    res.fits["deviation_increases"] = increases
    res.thresholds.append(Threshold("deviation_increases_along_grid", float(increases), upper=0.0))
    positive = [(l, d) for l, d in grid_devs if d > 0]
    if len(positive) >= 3:
        fit = fit_loglog(positive)
        res.fits["deviation_slope"] = fit.slope
        res.thresholds.append(Threshold("deviation_decay_slope", fit.slope, upper=0.0))
    return res


def tempered_experiment(lambda_grid, p: TubePoint | None = None, tau: float = 1.0, epsilon: float = 0.2,
                        kind: str = "bump", tol: float = 0.1) -> ExperimentResult:
    p = default_base_points(tau)[0] if p is None else p
    vals = [(float(l), tempered_kernel(SpectralWindow(epsilon, kind, l), p, p).real) for l in lambda_grid]
    s = KernelSeries("tempered-diagonal", {}, vals).with_loglog_fit()
    res = ExperimentResult("tempered", dict(tau=p.tau, epsilon=epsilon, kind=kind), series=[s])
    res.thresholds.append(Threshold("tempered_slope", s.fit.slope, 0.5 - tol, 0.5 + tol))
    return res


# ---------------------------------------------------------------------------
# decay


def decay_experiment(p: TubePoint | None = None, lam: float = 120.0, distance_grid=None, tau: float = 1.0,
                     epsilon: float = 0.2, kind: str = "bump", regime_constant: float = 1.0,
                     orbit_times=None, tol: float = 0.15) -> ExperimentResult:
    """-log(|Pi(p, w)| / Pi(p, p)) against lam d^2 / (2 tau) for w transverse to the orbit.

    d is the transverse distance in Heisenberg units (ambient distance in H
    divided by heisenberg_scale(tau)).  Points with d > C lam^{-1/3} are
    flagged and excluded from the fit.  Along-orbit points gamma^t(p) are
    measured separately with d taken as their ambient distance in the same
    units; they should show no Gaussian decay.
    """
    p = default_base_points(tau)[0] if p is None else p
    tau = p.tau
    w = SpectralWindow(epsilon, kind, lam)
    ref = projector_kernel(w, p, p).real
    d_max = regime_constant * lam ** (-1.0 / 3.0)
    if distance_grid is None:
        distance_grid = np.linspace(0.1 * d_max, d_max, 8)
    xs, ys, flagged = [], [], []
    pts = []
    for d in distance_grid:
        for direction in (1.0, 1j):
            q = displace(p, 0.0, direction * d * np.sqrt(lam), lam)
            y = -np.log(abs(projector_kernel(w, p, q)) / ref)
            x = lam * d * d / (2 * tau)
            pts.append((x, y))
            if d <= d_max + 1e-12:
                xs.append(x)
                ys.append(y)
            else:
                flagged.append(float(d))
    slope, intercept = fit_linear(xs, ys)
    res = ExperimentResult("decay", dict(lam=lam, tau=tau, epsilon=epsilon, kind=kind,
                                         regime_constant=regime_constant))
    res.series.append(KernelSeries("transverse-decay", {}, pts))
    res.fits["slope"] = slope
    res.fits["intercept"] = intercept
    res.extra["regime_violations"] = flagged
    res.thresholds.append(Threshold("decay_slope", slope, 1 - tol, 1 + tol))
    if orbit_times is None:
        orbit_times = np.array([0.25, 0.5]) * epsilon
    # Along the orbit a Gaussian law would make y grow linearly in lam.  Compare
    # y at lam and 2 lam: the measured growth is reported as a fraction of the
    # Gaussian growth lam d^2 / (2 tau).
    opts, growth = [], []
    for t in orbit_times:
        q = geodesic_flow(p, t)
        d = np.linalg.norm(q.zeta - p.zeta) / heisenberg_scale(tau)
        ys = []
        for lam_k in (lam, 2 * lam):
            wk = w.at(lam_k)
            ys.append(-np.log(abs(projector_kernel(wk, p, q)) / projector_kernel(wk, p, p).real))
        opts.append((lam * d * d / (2 * tau), ys[0]))
        growth.append((ys[1] - ys[0]) / (lam * d * d / (2 * tau)))
    res.series.append(KernelSeries("along-orbit", {"times": [float(t) for t in orbit_times]}, opts))
    res.fits["orbit_growth_fraction"] = float(max(growth))
    res.extra["orbit_ratio_over_window_hat"] = [
        float(np.exp(-y) / window_hat(w, t)) for (_, y), t in zip(opts, orbit_times)
    ]
    res.thresholds.append(Threshold("orbit_growth_fraction", float(max(growth)), upper=0.5))
    return res


# ---------------------------------------------------------------------------
# operator norms


def _rot(axis: int, ang: np.ndarray) -> np.ndarray:
    c, s = np.cos(ang), np.sin(ang)
    out = np.zeros(ang.shape + (3, 3))
    i, j = [(1, 2), (0, 2), (0, 1)][axis]
    out[..., axis, axis] = 1
    out[..., i, i] = c
    out[..., j, j] = c
    if axis == 1:
        out[..., i, j] = s
        out[..., j, i] = -s
    else:
        out[..., i, j] = -s
        out[..., j, i] = s
    return out


def near_orbit_rule(tau: float, lam: float, r: float, epsilon: float, n_orbit: int = 40, n_trans: int = 24,
                    width: float = 7.0, base: np.ndarray | None = None):
    """Quadrature for integrals of |K(z, w)|^r over w, concentrated near the orbit of z.

    With z's frame (x, v) = (e3, e1), a boundary point is R (e3, e1) for a
    rotation R = R_y(b) R_x(a) R_z(c); b is the flow time and (a, c) are
    transverse.  Liouville measure is tau cos(a) db da dc.  The transverse
    nodes cover +-width standard deviations of the Gaussian |K|^r.
    """
    C, S = np.cosh(tau), np.sinh(tau)
    sa = np.sqrt(np.sinh(2 * tau) / (r * lam * C * C))
    sc = np.sqrt(np.sinh(2 * tau) / (r * lam * S * S))
    yb, wb = np.polynomial.legendre.leggauss(n_orbit)
    yt, wt = np.polynomial.legendre.leggauss(n_trans)
    half = epsilon + 0.1
    b, a, c = (g.ravel() for g in np.meshgrid(half * yb, width * sa * yt, width * sc * yt, indexing="ij"))
    wts = np.einsum("i,j,k->ijk", half * wb, width * sa * wt, width * sc * wt).ravel() * tau * np.cos(a)
    R = _rot(1, b) @ _rot(0, a) @ _rot(2, c)
    if base is not None:
        R = base @ R
    return embed(R[..., :, 2], R[..., :, 0], tau), wts


def _reference_point(tau: float):
    return embed(np.array([0.0, 0.0, 1.0]), np.array([1.0, 0.0, 0.0]), tau)


def _kernel_lr_norm(w, z, tau, r, power=1, **rule_kw):
    nodes, wts = near_orbit_rule(tau, w.center, r, w.epsilon, **rule_kw)
    k = np.abs(projector_kernel(w, z, nodes, tau=tau, power=power))
    if np.isinf(r):
        return float(np.max(k))
    return float(np.sum(wts * k**r) ** (1.0 / r))


def opnorm_experiment(p_exp: float, q_exp: float, lambda_grid, tau: float = 1.0, epsilon: float = 0.2,
                      kind: str = "bump", n_base: int = 2, tol: float = 0.07, **rule_kw) -> ExperimentResult:
    """Schur-Young majorant and a lower-bound witness for ||Pi||_{L^p -> L^q}.

    The kernel depends only on zeta_z . conj(zeta_w) and the rotation group
    acts transitively on the boundary, so the supremum over z is attained
    everywhere; it is still taken over ``n_base`` rotated base points.
    The witness is f = Pi(., w): Pi f = Pi_{chi^2}(., w), so
    ||Pi_{chi^2}(., w)||_q / ||Pi(., w)||_p bounds the norm from below.
    """
    if not (2 <= p_exp <= q_exp):
        raise ValueError("need 2 <= p <= q")
    r = 1.0 / (1.0 - 1.0 / p_exp + 1.0 / q_exp)
    target = 1.0 / p_exp - (0.0 if np.isinf(q_exp) else 1.0 / q_exp)
    res = ExperimentResult("opnorm", dict(p=p_exp, q=q_exp, r=r, tau=tau, epsilon=epsilon, kind=kind))
    bases = [np.eye(3)] + [
        _rot(2, np.array(0.7 * i)) @ _rot(0, np.array(0.4 * i)) for i in range(1, n_base)
    ]
    maj_pts, wit_pts, repro = [], [], []
    for lam in lambda_grid:
        w = SpectralWindow(epsilon, kind, float(lam))
        vals = []
        for B in bases:
            z = embed(B[:, 2], B[:, 0], tau)
            nodes, wts = near_orbit_rule(tau, lam, r, epsilon, base=B, **rule_kw)
            k = np.abs(projector_kernel(w, z, nodes, tau=tau))
            vals.append(float(np.sum(wts * k**r) ** (1.0 / r)))
        maj_pts.append((float(lam), max(vals)))
        z = _reference_point(tau)
        num = (projector_kernel(w, z, z, tau=tau, power=2).real if np.isinf(q_exp)
               else _kernel_lr_norm(w, z, tau, q_exp, power=2, **rule_kw))
        den = _kernel_lr_norm(w, z, tau, p_exp, **rule_kw)
        wit_pts.append((float(lam), num / den))
        l2sq = _kernel_lr_norm(w, z, tau, 2.0, **rule_kw) ** 2
        repro.append(abs(l2sq / projector_kernel(w, z, z, tau=tau, power=2).real - 1))
    maj = KernelSeries("schur-young-majorant", {}, maj_pts).with_loglog_fit()
    wit = KernelSeries("witness", {}, wit_pts).with_loglog_fit()
    res.series += [maj, wit]
    res.fits.update(target=target, majorant_slope=maj.fit.slope, witness_slope=wit.fit.slope)
    res.extra["reproducing_identity_max_rel_error"] = max(repro)
    res.thresholds += [
        Threshold("majorant_slope", maj.fit.slope, target - tol, target + tol),
        Threshold("witness_slope", wit.fit.slope, target - tol, target + tol),
    ]
    return res


# ---------------------------------------------------------------------------
# Husimi functions


def lp_norm_experiment(N_grid, p_values=(4.0, 8.0, np.inf), tau: float = 1.0, tol: float = 0.05,
                       flat_tol: float = 0.1) -> ExperimentResult:
    """Slopes of log(||Y_N^N||_p / ||Y_N^N||_2) and flatness of N^{1/4} e^{-N tau} ||Y_N^N||_2."""
    Ns = [int(n) for n in N_grid]
    res = ExperimentResult("lp-norms", dict(tau=tau, p_values=[float(p) for p in p_values]))
    l2 = {N: tube_lp_norm(HarmonicMode(N, N, tau), 2.0) for N in Ns}
    for N in Ns:
        if abs(l2[N] - log_tube_l2_norm(N, tau)) > 1e-6:
            raise AssertionError("quadrature L2 norm disagrees with the closed form")
    for p in p_values:
        pts = [(N, float(np.exp(tube_lp_norm(HarmonicMode(N, N, tau), p) - l2[N]))) for N in Ns]
        s = KernelSeries(f"ratio-p-{p:g}", {"p": float(p)}, pts).with_loglog_fit()
        res.series.append(s)
        target = 0.5 - (0.0 if np.isinf(p) else 1.0 / p)
        res.fits[f"slope_p_{p:g}"] = s.fit.slope
        res.thresholds.append(Threshold(f"slope_p_{p:g}", s.fit.slope, target - tol, target + tol))
    env = [(N, float(np.exp(0.25 * np.log(N) - N * tau + l2[N]))) for N in Ns]
    vals = np.array([v for _, v in env])
    spread = float((vals.max() - vals.min()) / vals.mean())
    res.series.append(KernelSeries("l2-envelope", {}, env))
    res.thresholds.append(Threshold("l2_envelope_spread", spread, upper=flat_tol))
    return res


def husimi_residual_experiment(N_grid, tau: float = 1.0, epsilon: float = 0.2, kind: str = "bump",
                               neighbours: int = 4, slope_tol: float = 0.05) -> ExperimentResult:
    """r_N = ||Pi_{chi, mu_N} f - f|| for f the normalised continuation of Y_N^N.

    Pi f is expanded in normalised modes with the same m = N (other m are
    orthogonal by the theta-Fourier structure).  Inner products between
    degrees N..N+neighbours are measured by quadrature rather than assumed.
    """
    window = SpectralWindow(epsilon, kind)
    res = ExperimentResult("husimi-residual", dict(tau=tau, epsilon=epsilon, kind=kind, neighbours=neighbours))
    pts, offdiag = [], []
    for N in [int(n) for n in N_grid]:
        degs = list(range(N, N + neighbours + 1))
        n = int(max(8 * np.sqrt(N + neighbours), 24)) | 1
        rule = reduced_liouville_quadrature(tau, 2 * n + 1, 2 * n)
        cols = []
        for d in degs:
            lm, ph = harmonic_log(d, N, rule.zeta)
            cols.append(np.exp(lm - log_tube_l2_norm(d, tau) + 1j * ph))
        A = np.array(cols)
        G = (A * rule.weights) @ A.conj().T
        offdiag.append(float(np.max(np.abs(G - np.diag(np.diag(G))))))
        mu = np.sqrt(np.array(degs) * (np.array(degs) + 1.0))
        chi = window_chi(window, mu[0] - mu)
        coef = chi * G[:, 0]  # <f, e_d> e_d
        coef[0] -= 1.0
        r2 = np.real(coef.conj() @ G.T @ coef)
        pts.append((N, float(np.sqrt(max(r2, 0.0)))))
    s = KernelSeries("residual", {}, pts).with_loglog_fit()
    res.series.append(s)
    res.fits["slope"] = s.fit.slope if s.fit else float("nan")
    res.fits["chi0"] = float(window_chi(window, 0.0))
    res.extra["max_gram_offdiagonal"] = max(offdiag)
    res.extra["gram_assumption_degraded"] = max(offdiag) > 1e-3
    res.thresholds.append(Threshold("residual_slope", res.fits["slope"], -slope_tol, slope_tol))
    res.thresholds.append(Threshold("residual_max", max(v for _, v in pts), upper=2.0))
    return res


def short_window_experiment(lambda_grid, p: TubePoint | None = None, tau: float = 1.0, n_avg: int = 16,
                            tol: float = 0.15) -> ExperimentResult:
    """Average of Pi_{[l, l+1]}(p, p) over l in [lam, lam + 1) against lam."""
    p = default_base_points(tau)[0] if p is None else p
    pts = []
    for lam in lambda_grid:
        vals = [short_window_kernel(lam + k / n_avg, p, p).value.real for k in range(n_avg)]
        pts.append((float(lam), float(np.mean(vals))))
    s = KernelSeries("short-window-average", {}, pts).with_loglog_fit()
    res = ExperimentResult("short-window", dict(tau=p.tau, n_avg=n_avg), series=[s])
    res.thresholds.append(Threshold("short_window_slope", s.fit.slope, 1 - tol, 1 + tol))
    return res
