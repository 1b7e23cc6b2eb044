"""Command-line driver: ``tubelab run <experiment> [options]``.

Exit status: 0 all thresholds pass, 1 a threshold fails, 2 invalid
configuration, 3 a numerical resolution or truncation error.
"""
from __future__ import annotations

import os

# Cap BLAS/OpenMP pools before numpy is imported.
_THREADS = os.environ.get("TUBELAB_THREADS")
if _THREADS and _THREADS.isdigit() and int(_THREADS) > 0:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _THREADS)

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import InvalidArgument, ResolutionError, TruncationError
from .spectral import experiments as ex

EXPERIMENTS = (
    "metaplectic-verify",
    "phase-hessian",
    "scaling",
    "decay",
    "opnorm",
    "lp-norms",
    "husimi-residual",
    "short-window",
)

# (min, max, count) per experiment; lambda grids except where noted
DEFAULT_GRIDS = {
    "scaling": (40.0, 160.0, 5),
    "decay": (60.0, 240.0, 3),
    "opnorm": (60.0, 240.0, 4),
    "lp-norms": (40.0, 140.0, 5),  # degrees N
    "husimi-residual": (20.0, 120.0, 5),  # degrees N
    "short-window": (40.0, 160.0, 5),
}
DEGREE_GRIDS = ("lp-norms", "husimi-residual")
OPNORM_PAIRS = ((2.0, 4.0), (2.0, math.inf), (4.0, 4.0))


@dataclass
class ExperimentConfig:
    experiment: str
    tau: float = 1.0
    epsilon: float = 0.2
    grid_min: float | None = None
    grid_max: float | None = None
    count: int | None = None
    spacing: str = "geometric"
    s: float = 0.1
    lam: float = 120.0
    p: list = field(default_factory=list)
    q: float | None = None
    window: str = "bump"
    orbit_nodes: int = 40
    transverse_nodes: int = 24
    seed: int = 0
    output: str | None = None
    format: str = "json"
    omit_runtime: bool = False

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise InvalidArgument(f"unknown experiment {self.experiment!r}")
        if not (0 < self.tau <= 1):
            raise InvalidArgument("tau must lie in (0, 1]")
        if not (0 < self.epsilon <= 0.5):
            raise InvalidArgument("epsilon must lie in (0, 0.5]")
        if self.spacing not in ("linear", "geometric"):
            raise InvalidArgument("spacing must be linear or geometric")
        if self.format not in ("json", "csv"):
            raise InvalidArgument("format must be json or csv")
        lo, hi, n = self.grid()
        if n < 3:
            raise InvalidArgument("grid count must be at least 3")
        if not (1 <= lo < hi):
            raise InvalidArgument("grid needs 1 <= min < max")
        if any(not (pe >= 2) for pe in self.p):
            raise InvalidArgument("exponents p must be >= 2")
        if self.q is not None and self.p and any(self.q < pe for pe in self.p):
            raise InvalidArgument("need p <= q")
        if min(self.orbit_nodes, self.transverse_nodes) < 4:
            raise InvalidArgument("resolutions must be at least 4")

    def grid(self):
        lo, hi, n = DEFAULT_GRIDS.get(self.experiment, (40.0, 160.0, 5))
        return (
            lo if self.grid_min is None else float(self.grid_min),
            hi if self.grid_max is None else float(self.grid_max),
            n if self.count is None else int(self.count),
        )

    def grid_values(self) -> np.ndarray:
        lo, hi, n = self.grid()
        vals = np.geomspace(lo, hi, n) if self.spacing == "geometric" else np.linspace(lo, hi, n)
        if self.experiment in DEGREE_GRIDS:
            vals = np.unique(np.round(vals).astype(int))
            if len(vals) < 3:
                raise InvalidArgument("degree grid has fewer than 3 distinct values")
        return vals


def _merge(tag: str, params: dict, parts) -> ex.ExperimentResult:
    out = ex.ExperimentResult(tag, params)
    for r in parts:
        for s in r.series:
            out.series.append(ex.KernelSeries(f"{r.tag}/{s.experiment_tag}", s.params, s.points, s.fit))
        out.fits.update({f"{r.tag}/{k}": v for k, v in r.fits.items()})
        out.extra.update({f"{r.tag}/{k}": v for k, v in r.extra.items()})
        out.thresholds += [ex.Threshold(f"{r.tag}/{t.name}", t.value, t.lower, t.upper) for t in r.thresholds]
    return out


def execute(cfg: ExperimentConfig) -> ex.ExperimentResult:
    cfg.validate()
    name = cfg.experiment
    kw = dict(tau=cfg.tau, epsilon=cfg.epsilon, kind=cfg.window)
    if name == "metaplectic-verify":
        return ex.metaplectic_experiment(seed=cfg.seed)
    if name == "phase-hessian":
        return ex.phase_hessian_experiment([cfg.tau])
    if name == "scaling":
        grid = cfg.grid_values()
        check = 120.0 if grid[0] <= 120.0 <= grid[-1] else float(np.median(grid))
        return _merge(name, {"s": cfg.s}, [
            ex.diagonal_growth_experiment(grid, **kw),
            ex.transverse_profile_experiment(check, **kw),
            ex.scaling_experiment(cfg.s, grid, check_lambda=check, **kw),
            ex.tempered_experiment(grid, **kw),
        ])
    if name == "decay":
        return ex.decay_experiment(lam=cfg.lam, **kw)
    if name == "opnorm":
        if cfg.p:
            pairs = [(pe, cfg.q if cfg.q is not None else pe) for pe in cfg.p]
        else:
            pairs = list(OPNORM_PAIRS)
        parts = []
        for pe, qe in pairs:
            r = ex.opnorm_experiment(pe, qe, cfg.grid_values(), n_orbit=cfg.orbit_nodes,
                                     n_trans=cfg.transverse_nodes, **kw)
            r.tag = f"opnorm(p={pe:g},q={qe:g})"
            parts.append(r)
        return _merge(name, {}, parts)
    if name == "lp-norms":
        ps = cfg.p or [4.0, 8.0, math.inf]
        return ex.lp_norm_experiment(cfg.grid_values(), ps, tau=cfg.tau)
    if name == "husimi-residual":
        return ex.husimi_residual_experiment(cfg.grid_values(), **kw)
    if name == "short-window":
        return ex.short_window_experiment(cfg.grid_values(), tau=cfg.tau)
    raise InvalidArgument(name)


# ---------------------------------------------------------------------------
# serialisation


def _plain(x):
    """Convert numpy scalars/arrays and non-finite floats to JSON-ready objects."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_plain(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        return {"re": _plain(float(x.real)), "im": _plain(float(x.imag))}
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return _Float(x)
    return x


class _Float(float):
    def __repr__(self):
        return format(float(self), ".17g")


def _dump(obj, indent=0) -> str:
    pad = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_dump(v, indent + 1)}" for k, v in sorted(obj.items())]
        return "{\n" + ",\n".join(items) + "\n" + "  " * indent + "}"
    if isinstance(obj, list):
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_dump(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _dump(v, indent + 1) for v in obj) + "\n" + "  " * indent + "]"
    if isinstance(obj, _Float):
        return repr(obj)
    return json.dumps(obj)


def result_document(cfg: ExperimentConfig, res: ex.ExperimentResult, runtime: float | None) -> dict:
    series = []
    for s in res.series:
        entry = {"tag": s.experiment_tag, "params": s.params, "points": [[x, y] for x, y in s.points]}
        if s.fit is not None:
            entry["loglog_fit"] = asdict(s.fit)
        series.append(entry)
    fit = dict(res.fits)
    fit.update(res.extra)
    thresholds = [
        {"name": t.name, "value": t.value, "lower": t.lower, "upper": t.upper, "passed": t.passed}
        for t in res.thresholds
    ]
    config = asdict(cfg)
    config["grid"] = list(cfg.grid()) if cfg.experiment not in ("metaplectic-verify", "phase-hessian") else None
    return _plain({
        "config": config,
        "series": series,
        "fit": fit,
        "thresholds": thresholds,
        "passed": res.passed,
        "runtime_seconds": runtime,
    })


def to_json(doc: dict) -> str:
    return _dump(doc) + "\n"


def to_csv(doc: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["series", "x", "y"])
    for s in doc["series"]:
        for x, y in s["points"]:
            w.writerow([s["tag"], repr(x) if isinstance(x, float) else x, repr(y) if isinstance(y, float) else y])
    return buf.getvalue()


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tubelab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one experiment")
    run.add_argument("experiment", choices=EXPERIMENTS)
    run.add_argument("--tau", type=float, default=1.0)
    run.add_argument("--epsilon", type=float, default=0.2)
    run.add_argument("--window", choices=("bump", "fejer", "fejer_squared"), default="bump")
    for flag in ("lambda", "n"):
        run.add_argument(f"--{flag}-min", dest="grid_min", type=float)
        run.add_argument(f"--{flag}-max", dest="grid_max", type=float)
    run.add_argument("--count", type=int)
    run.add_argument("--spacing", choices=("linear", "geometric"), default="geometric")
    run.add_argument("--s", type=float, default=0.1, help="flow time between base points (scaling)")
    run.add_argument("--lambda", dest="lam", type=float, default=120.0, help="frequency for decay")
    run.add_argument("--p", type=float, action="append", default=[], help="Lebesgue exponent (repeatable)")
    run.add_argument("--q", type=float)
    run.add_argument("--orbit-nodes", type=int, default=40)
    run.add_argument("--transverse-nodes", type=int, default=24)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--output", "-o")
    run.add_argument("--format", choices=("json", "csv"), default="json")
    run.add_argument("--omit-runtime", action="store_true",
                     help="write runtime_seconds as null so repeated runs are byte-identical")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    opts = vars(args)
    opts.pop("command")
    cfg = ExperimentConfig(**opts)
    try:
        cfg.validate()
    except (InvalidArgument, ValueError) as e:
        print(f"tubelab: invalid configuration: {e}", file=sys.stderr)
        return 2
    start = time.perf_counter()
    try:
        res = execute(cfg)
    except (ResolutionError, TruncationError) as e:
        print(f"tubelab: {cfg.experiment} failed to resolve: {e}", file=sys.stderr)
        return 3
    except InvalidArgument as e:
        print(f"tubelab: invalid configuration: {e}", file=sys.stderr)
        return 2
    runtime = None if cfg.omit_runtime else time.perf_counter() - start
    doc = result_document(cfg, res, runtime)
    text = to_json(doc) if cfg.format == "json" else to_csv(doc)
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for t in doc["thresholds"]:
        print(f"{'PASS' if t['passed'] else 'FAIL'} {t['name']} = {t['value']!r}", file=sys.stderr)
    return 0 if res.passed else 1


if __name__ == "__main__":
    sys.exit(main())
