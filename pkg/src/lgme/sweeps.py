"""Figure-reproduction sweeps producing deterministic CSV rows."""

import csv
import io
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, List, Optional, Sequence, Tuple

from . import gaussian
from .fock import DEFAULT_EPSILON, build_fmsv_fock, photon_fmsv
from .measurement import DEFAULT_RESIDUAL_CAP, lgme_photon_counting

SCHEMA = "schema=1"
SYMMETRY_TOL = 1e-8
DOMINANCE_TOL = 1e-6
DEFAULT_LAMBDA_GRID = tuple(round(0.05 * i, 2) for i in range(1, 19))
DEFAULT_PAIRS = ((1, 3), (1, 2), (2, 4))
MIRROR = {1: 3, 2: 4, 3: 1, 4: 2}
LARGE_TOTAL_WARNING = 10


@dataclass
class SweepConfig:
    experiment: str
    lambda_grid: Sequence[float] = DEFAULT_LAMBDA_GRID
    photons: int = 4
    photon_spec: Optional[Tuple[str, Tuple[int, int, int, int]]] = None
    modes: Sequence[int] = (1, 2, 4)
    pairs: Sequence[Tuple[int, int]] = DEFAULT_PAIRS
    total: int = 6
    measured_mode: int = 4
    epsilon: float = DEFAULT_EPSILON
    residual_cap: float = DEFAULT_RESIDUAL_CAP
    timings: bool = False

    def __post_init__(self):
        if not self.lambda_grid:
            raise ValueError("lambda grid is empty")
        for lam in self.lambda_grid:
            if not 0.0 <= lam < 1.0:
                raise ValueError(f"lambda {lam} outside [0, 1)")
        if self.photons < 0 or self.total < 0:
            raise ValueError("photon counts must be nonnegative")
        if not 1 <= self.measured_mode <= 4:
            raise ValueError("measured mode must be 1..4")
        for i, j in self.pairs:
            if i == j or not (1 <= i <= 4 and 1 <= j <= 4):
                raise ValueError(f"invalid mode pair ({i}, {j})")
        for mode in self.modes:
            if not 1 <= mode <= 4:
                raise ValueError(f"invalid mode {mode}")


@dataclass
class SweepResult:
    experiment: str
    columns: List[str]
    rows: List[dict]
    convergence_failures: int = 0
    check_failures: int = 0
    notes: List[str] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        if self.convergence_failures:
            return 3
        if self.check_failures:
            return 2
        return 0


def photon_config(kind: str, m: Sequence[int]) -> str:
    if not any(m):
        return "fmsv"
    return f"{kind}:" + ",".join(str(v) for v in m)


@lru_cache(maxsize=4096)
def photon_lgme(lam: float, kind: str, m: Tuple[int, ...], mode: int, epsilon: float, cap: float):
    """Photon-counting LGME interval of the (photon-modified) FMSV state.

    Returns ``(LgmeResult, n_max, tail_bound)``.
    """
    r = math.atanh(lam)
    if any(m):
        state = photon_fmsv(r, kind, m, epsilon=epsilon)
    else:
        state = build_fmsv_fock(r, epsilon=epsilon)
    res = lgme_photon_counting(state, mode=mode, residual_cap=cap)
    return res, state.n_max, state.tail_bound


def _lgme_fields(res, n_max, cap) -> dict:
    converged = res.residual <= cap
    return {
        "lgme_lower": res.lower,
        "lgme_upper": res.upper,
        "residual": res.residual,
        "n_max": n_max,
        "flag": "ok" if converged else "unconverged",
    }


def _run_points(name: str, points: list, work: Callable, progress) -> list:
    """Evaluate ``work(point)`` for each point, preserving input order."""
    threads = max(1, int(os.environ.get("LGME_THREADS", "1") or 1))
    total = len(points)

    def timed(args):
        idx, point = args
        start = time.perf_counter()
        row = work(point)
        elapsed = time.perf_counter() - start
        if progress is not None:
            progress(f"[{name}] point {idx + 1}/{total} λ={point[0]:.17g} done in {elapsed:.3f}s")
        return row, elapsed

    if threads == 1:
        return [timed(p) for p in enumerate(points)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(timed, enumerate(points)))


def _finish(name, columns, timed_rows, config) -> SweepResult:
    rows = []
    for row, elapsed in timed_rows:
        if config.timings:
            row["wall_time"] = elapsed
        rows.append(row)
    if config.timings:
        columns = columns + ["wall_time"]
    result = SweepResult(name, columns, rows)
    result.convergence_failures = sum(1 for r in rows if r.get("flag") == "unconverged")
    return result


def run_fig1(config: SweepConfig, progress=None) -> SweepResult:
    """Gaussian (optimised and closed form) vs photon-counting LGME per lambda."""
    columns = ["experiment", "lambda", "config", "measured_mode", "gaussian_optimized",
               "gaussian_closed_form", "lgme_lower", "lgme_upper", "residual", "n_max",
               "dominance", "flag"]

    def work(point):
        (lam,) = point
        r = math.atanh(lam)
        g = gaussian.lgme_gaussian(r, mode=config.measured_mode)
        res, n_max, _ = photon_lgme(lam, "add", (0, 0, 0, 0), config.measured_mode,
                                    config.epsilon, config.residual_cap)
        row = {"experiment": "fig1", "lambda": lam, "config": "fmsv",
               "measured_mode": config.measured_mode,
               "gaussian_optimized": g.optimal_value, "gaussian_closed_form": g.closed_form}
        row.update(_lgme_fields(res, n_max, config.residual_cap))
        row["dominance"] = int(res.lower >= g.closed_form - DOMINANCE_TOL)
        return row

    points = [(lam,) for lam in config.lambda_grid]
    result = _finish("fig1", columns, _run_points("fig1", points, work, progress), config)
    result.check_failures = sum(1 for r in result.rows if not r["dominance"])
    return result


def _single_mode(mode, m):
    return tuple(m if i == mode else 0 for i in range(1, 5))


def run_fig2(config: SweepConfig, progress=None) -> SweepResult:
    """LGME vs photons added to / subtracted from a single mode."""
    columns = ["experiment", "lambda", "kind", "mode", "m", "config", "measured_mode",
               "lgme_lower", "lgme_upper", "residual", "n_max", "mirror_mode", "mirror_lower",
               "mirror_equal", "flag"]

    def lgme(lam, kind, m):
        return photon_lgme(lam, kind, m, config.measured_mode, config.epsilon, config.residual_cap)

    def work(point):
        lam, kind, mode, m = point
        photons = _single_mode(mode, m)
        res, n_max, _ = lgme(lam, kind, photons)
        mirror = MIRROR[mode]
        mres, _, _ = lgme(lam, kind, _single_mode(mirror, m))
        row = {"experiment": "fig2", "lambda": lam, "kind": kind, "mode": mode, "m": m,
               "config": photon_config(kind, photons), "measured_mode": config.measured_mode}
        row.update(_lgme_fields(res, n_max, config.residual_cap))
        row.update(mirror_mode=mirror, mirror_lower=mres.lower,
                   mirror_equal=int(abs(mres.lower - res.lower) <= SYMMETRY_TOL))
        return row

    points = [(lam, kind, mode, m)
              for lam in config.lambda_grid
              for kind in ("add", "subtract")
              for mode in config.modes
              for m in range(config.photons + 1)]
    return _finish("fig2", columns, _run_points("fig2", points, work, progress), config)


def _pair_photons(pair, m_i, m_j):
    m = [0, 0, 0, 0]
    m[pair[0] - 1] += m_i
    m[pair[1] - 1] += m_j
    return tuple(m)


def _pair_columns():
    return ["experiment", "lambda", "kind", "pair", "m_i", "m_j", "config", "measured_mode",
            "lgme_lower", "lgme_upper", "residual", "n_max", "curve_spread", "flag"]


def _pair_sweep(name, config, points, progress):
    def work(point):
        lam, kind, pair, m_i, m_j = point
        photons = _pair_photons(pair, m_i, m_j)
        res, n_max, _ = photon_lgme(lam, kind, photons, config.measured_mode,
                                    config.epsilon, config.residual_cap)
        row = {"experiment": name, "lambda": lam, "kind": kind, "pair": f"{pair[0]}{pair[1]}",
               "m_i": m_i, "m_j": m_j, "config": photon_config(kind, photons),
               "measured_mode": config.measured_mode}
        row.update(_lgme_fields(res, n_max, config.residual_cap))
        return row

    result = _finish(name, _pair_columns(), _run_points(name, points, work, progress), config)
    curves = {}
    for row in result.rows:
        curves.setdefault((row["lambda"], row["kind"], row["pair"]), []).append(row["lgme_lower"])
    for row in result.rows:
        values = curves[(row["lambda"], row["kind"], row["pair"])]
        row["curve_spread"] = max(values) - min(values)
    return result


def run_fig3(config: SweepConfig, progress=None) -> SweepResult:
    """LGME along ``m_i + m_j = total`` for each mode pair."""
    if config.total > LARGE_TOTAL_WARNING and progress is not None:
        progress(f"[fig3] warning: total={config.total} photons is slow at desk scale")
    points = [(lam, kind, tuple(pair), m_i, config.total - m_i)
              for lam in config.lambda_grid
              for kind in ("add", "subtract")
              for pair in config.pairs
              for m_i in range(config.total + 1)]
    return _pair_sweep("fig3", config, points, progress)


def run_fig4(config: SweepConfig, progress=None) -> SweepResult:
    """LGME with equal photon numbers on both modes of each pair."""
    points = [(lam, kind, tuple(pair), m, m)
              for lam in config.lambda_grid
              for kind in ("add", "subtract")
              for pair in config.pairs
              for m in range(config.photons + 1)]
    return _pair_sweep("fig4", config, points, progress)


def run_compute(config: SweepConfig, progress=None) -> SweepResult:
    """Photon-counting LGME (and, for the plain FMSV, the Gaussian optimum)."""
    kind, photons = config.photon_spec or ("add", (0, 0, 0, 0))
    columns = ["experiment", "lambda", "config", "measured_mode", "gaussian_closed_form",
               "lgme_lower", "lgme_upper", "residual", "n_max", "flag"]

    def work(point):
        (lam,) = point
        res, n_max, _ = photon_lgme(lam, kind, tuple(photons), config.measured_mode,
                                    config.epsilon, config.residual_cap)
        row = {"experiment": "compute", "lambda": lam, "config": photon_config(kind, photons),
               "measured_mode": config.measured_mode,
               "gaussian_closed_form": gaussian.lgme_closed_form(math.atanh(lam)) if not any(photons) else ""}
        row.update(_lgme_fields(res, n_max, config.residual_cap))
        return row

    points = [(lam,) for lam in config.lambda_grid]
    return _finish("compute", columns, _run_points("compute", points, work, progress), config)


RUNNERS = {"fig1": run_fig1, "fig2": run_fig2, "fig3": run_fig3, "fig4": run_fig4,
           "compute": run_compute}


def format_value(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def to_csv(result: SweepResult) -> str:
    buf = io.StringIO()
    buf.write(SCHEMA + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(result.columns)
    for row in result.rows:
        writer.writerow([format_value(row.get(col, "")) for col in result.columns])
    return buf.getvalue()
