"""Invariant suites run by ``lgme validate``.

Each check returns ``(passed, detail)``.  Checks look module functions up at
call time so the mutation harness can swap in a corrupted implementation.
"""

import contextlib
import itertools
import math
import time
from dataclasses import dataclass
from typing import Callable, Dict, List, Tuple

import numpy as np

from . import entanglement, fock, gaussian, measurement, reference, sweeps

Check = Callable[[], Tuple[bool, str]]


@dataclass
class CheckResult:
    suite: str
    name: str
    passed: bool
    detail: str


@dataclass
class SuiteReport:
    suite: str
    checks: List[CheckResult]
    wall_time: float

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


LAM = 0.5
R_HALF = math.atanh(LAM)


def _lgme(kind, m, lam=LAM, mode=4):
    state = fock.photon_fmsv(math.atanh(lam), kind, m) if any(m) else fock.build_fmsv_fock(math.atanh(lam))
    return measurement.lgme_photon_counting(state, mode=mode)


# gaussian_core ------------------------------------------------------------

def check_fmsv_purity():
    worst = 0.0
    for r in (0.0, 0.3, 1.0, 2.0):
        nus = gaussian.symplectic_eigenvalues(gaussian.build_fmsv_covariance(r))
        worst = max(worst, float(np.max(np.abs(nus - 0.5))))
    return worst <= 1e-9, f"max |nu - 1/2| = {worst:.3g}"


def check_conditioning_purity():
    cov = gaussian.build_fmsv_covariance(0.8)
    worst = 0.0
    for rp, phi in itertools.product((0.0, 0.7, 3.0), (0.0, 1.1, 4.0)):
        post = gaussian.condition_on_gaussian_measurement(cov, 4, gaussian.GaussianMeasurement(rp, phi))
        worst = max(worst, float(np.max(np.abs(gaussian.symplectic_eigenvalues(post) - 0.5))))
    for quad in ("x", "p"):
        post = gaussian.condition_on_homodyne(cov, 4, quad)
        worst = max(worst, float(np.max(np.abs(gaussian.symplectic_eigenvalues(post) - 0.5))))
    return worst <= 1e-8, f"max |nu - 1/2| = {worst:.3g}"


def check_monotone_optimality():
    cov = gaussian.build_fmsv_covariance(0.9)
    values = gaussian.conditioned_ggm_grid(cov, 4, np.arange(0, 10.01, 0.5), [0.0])[:, 0]
    homodyne = gaussian.ggm_pure_gaussian(gaussian.condition_on_homodyne(cov, 4, "p"))
    ok = bool(np.all(np.diff(values) >= -1e-12)) and abs(values[-1] - homodyne) < 1e-7
    return ok, f"last grid value {values[-1]:.12g} vs homodyne {homodyne:.12g}"


def check_branch_claim():
    r = np.linspace(0.05, 5.0, 100)
    ok = bool(np.all(2 / (1 + np.cosh(r)) > 2 / (1 + np.sqrt(np.cosh(2 * r)))))
    return ok, "2/(1+cosh r) > 2/(1+sqrt(cosh 2r)) on (0, 5]"


def check_relabel_commutes():
    cov = gaussian.build_fmsv_covariance(0.7)
    meas = gaussian.GaussianMeasurement(0.9, 0.4)
    swapped = gaussian.permute_modes(cov, [3, 4, 1, 2])
    a = gaussian.condition_on_gaussian_measurement(swapped, 2, meas)
    b = gaussian.condition_on_gaussian_measurement(cov, 4, meas)
    # remaining modes of ``swapped`` after removing its mode 2 are old (3, 1, 2)
    b = gaussian.permute_modes(b, [3, 1, 2])
    err = float(np.max(np.abs(a.matrix - b.matrix)))
    return err <= 1e-12, f"max deviation {err:.3g}"


def check_homodyne_limit():
    cov = gaussian.build_fmsv_covariance(1.0)
    finite = gaussian.condition_on_gaussian_measurement(cov, 4, gaussian.GaussianMeasurement(20.0, 0.0))
    limit = gaussian.condition_on_homodyne(cov, 4, "p")
    err = float(np.max(np.abs(finite.matrix - limit.matrix)))
    return err <= 1e-8, f"r'=20 vs homodyne: {err:.3g}"


def check_gaussian_closed_form():
    worst = 0.0
    for lam in (0.1, 0.5, 0.9):
        r = math.atanh(lam)
        res = gaussian.lgme_gaussian(r, gaussian.GridSearch(squeeze_points=11, angle_points=8, refine=False))
        worst = max(worst, abs(res.optimal_value - gaussian.lgme_closed_form(r)))
    return worst <= 1e-9, f"max |optimum - tanh^2(r/2)| = {worst:.3g}"


# fock_core ----------------------------------------------------------------

def check_fmsv_norm():
    state = fock.build_fmsv_fock(R_HALF, epsilon=1e-12)
    err = abs(state.squared_norm() - (1 - state.tail_bound))
    return err <= 1e-12 and state.n_max == 19, f"n_max={state.n_max}, norm error {err:.3g}"


def check_fmsv_exchange_symmetry():
    state = fock.build_fmsv_fock(0.8)
    swapped = state.permute_modes([3, 4, 1, 2])
    same = np.array_equal(state.occupations, swapped.occupations)
    err = float(np.max(np.abs(state.amplitudes - swapped.amplitudes))) if same else math.inf
    return err <= 1e-14, f"max deviation {err:.3g}"


def check_ops_commute():
    base = fock.build_fmsv_fock(R_HALF)
    worst = 0.0
    for kind in ("add", "subtract"):
        for a, b in itertools.combinations(range(1, 5), 2):
            x = fock.apply_photon_op(fock.apply_photon_op(base, fock.PhotonOp(a, 1, kind)), fock.PhotonOp(b, 2, kind))
            y = fock.apply_photon_op(fock.apply_photon_op(base, fock.PhotonOp(b, 2, kind)), fock.PhotonOp(a, 1, kind))
            if not np.array_equal(x.occupations, y.occupations):
                return False, f"support differs for {kind} on modes {a},{b}"
            worst = max(worst, float(np.max(np.abs(x.amplitudes - y.amplitudes))))
    return worst <= 1e-12, f"max deviation {worst:.3g}"


def check_closed_form_states(max_total=4):
    worst = 0.0
    for m in itertools.product(range(max_total + 1), repeat=4):
        if sum(m) > max_total:
            continue
        for kind, oracle in (("add", reference.added_state), ("subtract", reference.subtracted_state)):
            state = fock.normalize(fock.photon_fmsv(R_HALF, kind, m))
            expected = oracle(LAM, m, state.n_max)
            got = state.as_dict()
            if set(expected) != set(got):
                return False, f"support mismatch for {kind} {m}"
            worst = max(worst, max(abs(expected[k] - got[k]) for k in expected))
    return worst <= 1e-10, f"max entrywise deviation {worst:.3g}"


def check_log_gamma_finite():
    logs = fock.log_shell_weights("add", 0.5, (20, 20, 20, 20), 200)
    factors = fock.log_ladder_factor(np.arange(201), 20, "add")
    ok = bool(np.all(np.isfinite(logs)) and np.all(np.isfinite(factors)))
    return ok, "log-gamma coefficients finite for m=20, n_max=200"


def check_truncation_convergence():
    worst = 0.0
    eps = fock.DEFAULT_EPSILON
    for lam in (0.5, 0.9):
        r = math.atanh(lam)
        a = fock.build_fmsv_fock(r, epsilon=eps)
        b = fock.build_fmsv_fock(r, n_max=a.n_max + 5)
        la = measurement.lgme_photon_counting(a).lower
        lb = measurement.lgme_photon_counting(b).lower
        worst = max(worst, abs(la - lb))
    return worst < 10 * eps, f"max change {worst:.3g} (limit {10 * eps:.1g})"


# measurement ---------------------------------------------------------------

def check_completeness():
    worst = 0.0
    for kind, m in (("add", (0, 0, 0, 0)), ("add", (0, 0, 0, 2)), ("subtract", (1, 0, 1, 0))):
        state = fock.photon_fmsv(R_HALF, kind, m)
        dist = measurement.outcome_distribution(state, 4)
        worst = max(worst, abs(dist.total + dist.residual - 1.0))
    return worst <= 1e-9, f"max |sum p_k + residual - 1| = {worst:.3g}"


def check_subtracted_sum_dependence():
    worst = 0.0
    for total in (2, 3, 4):
        values = [_lgme("subtract", (a, 0, total - a, 0)).lower for a in range(total + 1)]
        values += [_lgme("subtract", (0, a, 0, total - a)).lower for a in range(total + 1)]
        worst = max(worst, max(values[: total + 1]) - min(values[: total + 1]),
                    max(values[total + 1:]) - min(values[total + 1:]))
    return worst <= 1e-8, f"max spread along fixed m1+m3 / m2+m4: {worst:.3g}"


def check_added_exchange_symmetry():
    worst = 0.0
    for m1, m3 in itertools.combinations_with_replacement(range(5), 2):
        if m1 == m3:
            continue
        a = _lgme("add", (m1, 0, m3, 0)).lower
        b = _lgme("add", (m3, 0, m1, 0)).lower
        worst = max(worst, abs(a - b))
    return worst <= 1e-8, f"max |LG(m1,m3) - LG(m3,m1)| = {worst:.3g}"


def check_symmetry_breaking():
    gaps = [_lgme("add", (0, m, 0, 0)).lower - _lgme("add", (0, 0, 0, m)).lower for m in (1, 2, 3)]
    return all(g > 0 for g in gaps), "gaps " + ", ".join(f"{g:.4g}" for g in gaps)


def check_subtraction_dominance():
    worst = math.inf
    for mode in range(1, 5):
        for m in range(1, 5):
            photons = tuple(m if i == mode else 0 for i in range(1, 5))
            worst = min(worst, _lgme("subtract", photons).lower - _lgme("add", photons).lower)
    return worst >= 0, f"min LG_sub - LG_add = {worst:.4g}"


def check_post_measurement_oracles():
    worst = 0.0
    for kind, m in (("subtract", (0, 0, 0, 1)), ("subtract", (2, 1, 0, 1)), ("add", (1, 0, 0, 2)),
                    ("add", (0, 2, 1, 0))):
        state = fock.photon_fmsv(R_HALF, kind, m)
        oracle = reference.subtracted_post_measurement if kind == "subtract" else reference.added_post_measurement
        for k in range(6):
            p, post = measurement.photon_count_project(state, 4, k)
            expected = oracle(LAM, m, k, state.n_max)
            if post is None:
                if expected:
                    return False, f"outcome {k} of {kind} {m} missing"
                continue
            got = post.as_dict()
            if set(got) != set(expected):
                return False, f"support mismatch at k={k} for {kind} {m}"
            worst = max(worst, max(abs(expected[q] - got[q]) for q in expected))
    return worst <= 1e-10, f"max entrywise deviation {worst:.3g}"


def check_fig1_dominance():
    worst = math.inf
    for lam in (0.1, 0.5, 0.9):
        res = _lgme("add", (0, 0, 0, 0), lam=lam)
        worst = min(worst, res.lower - gaussian.lgme_closed_form(math.atanh(lam)))
    return worst >= -1e-6, f"min photon-counting minus Gaussian: {worst:.4g}"


# entanglement --------------------------------------------------------------

def check_cross_engine():
    worst = 0.0
    ok = True
    for lam in (0.1, 0.4, 0.8):
        r = math.atanh(lam)
        state = fock.build_fmsv_fock(r)
        diff = abs(entanglement.ggm_pure_fock(fock.normalize(state)) - entanglement.ggm_fmsv_closed_form(r))
        ok &= diff <= max(1e-6, 3 * state.tail_bound)
        worst = max(worst, diff)
        gdiff = abs(gaussian.ggm_pure_gaussian(gaussian.build_fmsv_covariance(r)) - entanglement.ggm_fmsv_closed_form(r))
        ok &= gdiff <= 1e-10
    return ok, f"max Fock vs closed-form deviation {worst:.3g}"


def check_relabel_invariance():
    state = measurement.photon_count_project(fock.photon_fmsv(R_HALF, "add", (1, 0, 0, 1)), 4, 2)[1]
    base = entanglement.ggm_pure_fock(state)
    worst = max(abs(entanglement.ggm_pure_fock(state.permute_modes(p)) - base)
                for p in itertools.permutations([1, 2, 3]))
    return worst <= 1e-14, f"max deviation {worst:.3g}"


def check_svd_vs_rdm():
    state = measurement.photon_count_project(fock.photon_fmsv(R_HALF, "subtract", (1, 0, 0, 1)), 4, 1)[1]
    amps = state.as_dict()
    worst = 0.0
    for cut in entanglement.all_bipartitions(3):
        rows = sorted({tuple(k[m - 1] for m in cut.side_a) for k in amps})
        index = {row: i for i, row in enumerate(rows)}
        rho = np.zeros((len(rows), len(rows)))
        by_rest: Dict[tuple, list] = {}
        for key, amp in amps.items():
            rest = tuple(key[m - 1] for m in cut.side_b)
            by_rest.setdefault(rest, []).append((index[tuple(key[m - 1] for m in cut.side_a)], amp))
        for entries in by_rest.values():
            for i, a in entries:
                for j, b in entries:
                    rho[i, j] += a * b
        expected = float(np.linalg.eigvalsh(rho)[-1])
        worst = max(worst, abs(expected - entanglement.max_schmidt_sq(state, cut)))
    return worst <= 1e-10, f"max deviation {worst:.3g}"


def check_ggm_below_one():
    values = [entanglement.ggm_pure_fock(e.post_state)
              for e in measurement.outcome_distribution(fock.photon_fmsv(R_HALF, "subtract", (0, 2, 0, 0)), 4).entries]
    return max(values) < 1.0 and min(values) >= 0.0, f"GGM range [{min(values):.4g}, {max(values):.4g}]"


# cli -----------------------------------------------------------------------

def check_csv_determinism():
    config = sweeps.SweepConfig("fig1", lambda_grid=(0.2, 0.6))
    sweeps.photon_lgme.cache_clear()
    first = sweeps.to_csv(sweeps.run_fig1(config))
    sweeps.photon_lgme.cache_clear()
    second = sweeps.to_csv(sweeps.run_fig1(config))
    return first == second, f"{len(first)} bytes"


SUITES: Dict[str, List[Tuple[str, Check]]] = {
    "gaussian_core": [
        ("fmsv covariance is pure", check_fmsv_purity),
        ("conditioning preserves purity", check_conditioning_purity),
        ("GGM monotone in r' and converges to homodyne", check_monotone_optimality),
        ("cosh r < sqrt(cosh 2r) branch", check_branch_claim),
        ("Schur update commutes with relabeling", check_relabel_commutes),
        ("homodyne limit matches r'=20", check_homodyne_limit),
        ("optimum equals tanh^2(r/2)", check_gaussian_closed_form),
    ],
    "fock_core": [
        ("truncated FMSV norm equals 1 - tail", check_fmsv_norm),
        ("FMSV 1<->3, 2<->4 symmetry", check_fmsv_exchange_symmetry),
        ("photon operators on distinct modes commute", check_ops_commute),
        ("operator states match closed forms", check_closed_form_states),
        ("log-gamma coefficients finite", check_log_gamma_finite),
        ("LGME stable under n_max + 5", check_truncation_convergence),
    ],
    "measurement": [
        ("probability completeness", check_completeness),
        ("subtracted LGME depends on m1+m3, m2+m4", check_subtracted_sum_dependence),
        ("added LGME symmetric in m1<->m3", check_added_exchange_symmetry),
        ("LG_add(m2) > LG_add(m4)", check_symmetry_breaking),
        ("LG_sub >= LG_add", check_subtraction_dominance),
        ("post-measurement states match closed forms", check_post_measurement_oracles),
        ("photon counting beats Gaussian", check_fig1_dominance),
    ],
    "entanglement": [
        ("Fock GGM matches closed form", check_cross_engine),
        ("GGM invariant under relabeling", check_relabel_invariance),
        ("Schmidt matrix vs explicit reduced density matrix", check_svd_vs_rdm),
        ("0 <= GGM < 1", check_ggm_below_one),
    ],
    "cli": [
        ("CSV output is deterministic", check_csv_determinism),
    ],
}


def run_suites(names=None) -> List[SuiteReport]:
    reports = []
    for suite, checks in SUITES.items():
        if names and suite not in names:
            continue
        start = time.perf_counter()
        results = []
        for name, check in checks:
            try:
                passed, detail = check()
            except Exception as exc:  # a crashing check is a failed check
                passed, detail = False, f"{type(exc).__name__}: {exc}"
            results.append(CheckResult(suite, name, bool(passed), detail))
        reports.append(SuiteReport(suite, results, time.perf_counter() - start))
    return reports


def _corrupt_fmsv_covariance(original):
    def corrupted(r):
        cov = original(r).matrix.copy()
        cov[0:2, 2:4] *= 1.05
        cov[2:4, 0:2] *= 1.05
        return gaussian.CovarianceMatrix(cov)
    return corrupted


MUTATIONS = {"fmsv-covariance": (gaussian, "build_fmsv_covariance", _corrupt_fmsv_covariance)}


@contextlib.contextmanager
def mutated(name):
    """Temporarily replace a builder with a corrupted version."""
    if name is None:
        yield
        return
    module, attr, make = MUTATIONS[name]
    original = getattr(module, attr)
    setattr(module, attr, make(original))
    try:
        yield
    finally:
        setattr(module, attr, original)


def format_report(reports: List[SuiteReport]) -> str:
    lines = []
    for rep in reports:
        lines.append(f"== {rep.suite} ({rep.wall_time:.2f}s) {'PASS' if rep.passed else 'FAIL'}")
        for c in rep.checks:
            lines.append(f"  [{'PASS' if c.passed else 'FAIL'}] {c.name}: {c.detail}")
    total = sum(len(r.checks) for r in reports)
    failed = sum(1 for r in reports for c in r.checks if not c.passed)
    lines.append(f"{total - failed}/{total} checks passed")
    return "\n".join(lines)
