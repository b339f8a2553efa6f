"""Sparse truncated Fock-space states: the FMSV state and its photon-added or
photon-subtracted variants.

A :class:`FockState` stores occupation tuples as rows of an integer array,
sorted lexicographically, with one real amplitude per row.  Modes are labelled
from 1.  Truncation follows the FMSV shell index ``n`` (the summation index
of the Fock expansion): every shell up to ``n_max`` is kept in full and
``tail_bound`` is the squared norm that was discarded.  Stored amplitudes of
a truncated state therefore carry squared norm ``1 - tail_bound``.
"""

import io
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.special import gammaln, logsumexp

from . import _kernels
from .errors import EmptyStateError, ValidationError

DEFAULT_EPSILON = 1e-10
MAX_TANH = 1.0 - 1e-12


@dataclass(frozen=True)
class FockState:
    """Real amplitudes on occupation-number tuples."""

    occupations: np.ndarray
    amplitudes: np.ndarray
    n_max: Optional[int] = None
    tail_bound: float = 0.0
    diagnostics: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        occ = np.asarray(self.occupations, dtype=np.int64)
        amp = np.asarray(self.amplitudes, dtype=float)
        if occ.ndim != 2 or occ.shape[1] < 1:
            raise ValidationError("occupations must be a 2-D array with one column per mode")
        if amp.shape != (occ.shape[0],):
            raise ValidationError("need exactly one amplitude per occupation tuple")
        if np.any(occ < 0):
            raise ValidationError("occupation numbers must be nonnegative")
        if self.tail_bound < 0:
            raise ValidationError("tail_bound must be nonnegative")
        occ, amp = _canonical(occ, amp)
        occ.setflags(write=False)
        amp.setflags(write=False)
        object.__setattr__(self, "occupations", occ)
        object.__setattr__(self, "amplitudes", amp)

    @classmethod
    def from_dict(cls, mapping: Mapping[Tuple[int, ...], float], **kwargs) -> "FockState":
        if not mapping:
            raise EmptyStateError("cannot build a state from an empty map")
        keys = np.array(list(mapping.keys()), dtype=np.int64)
        vals = np.array(list(mapping.values()), dtype=float)
        if keys.ndim != 2:
            raise ValidationError("occupation tuples must all have the same length")
        return cls(keys, vals, **kwargs)

    @classmethod
    def basis(cls, *occupation: int) -> "FockState":
        """Single number state ``|n1, n2, ...>``."""
        return cls(np.array([occupation], dtype=np.int64), np.ones(1))

    @property
    def mode_count(self) -> int:
        return self.occupations.shape[1]

    @property
    def size(self) -> int:
        return self.amplitudes.size

    def as_dict(self) -> dict:
        return {tuple(int(v) for v in row): float(a) for row, a in zip(self.occupations, self.amplitudes)}

    def squared_norm(self) -> float:
        return float(np.dot(self.amplitudes, self.amplitudes))

    def max_occupation(self, mode: int) -> int:
        _check_mode(self, mode)
        return int(self.occupations[:, mode - 1].max()) if self.size else -1

    def with_amplitudes(self, amplitudes, **changes) -> "FockState":
        params = dict(n_max=self.n_max, tail_bound=self.tail_bound, diagnostics=dict(self.diagnostics))
        params.update(changes)
        return FockState(self.occupations, amplitudes, **params)

    def permute_modes(self, order: Sequence[int]) -> "FockState":
        """Relabel modes: new mode ``i`` carries old mode ``order[i-1]``."""
        order = [int(m) for m in order]
        if sorted(order) != list(range(1, self.mode_count + 1)):
            raise ValidationError(f"{order} is not a permutation of the modes")
        return FockState(
            self.occupations[:, [m - 1 for m in order]],
            self.amplitudes,
            n_max=self.n_max,
            tail_bound=self.tail_bound,
            diagnostics=dict(self.diagnostics),
        )

    def dumps(self) -> str:
        """One ``n1 n2 ... amplitude`` line per entry, 17 significant digits."""
        buf = io.StringIO()
        for row, a in zip(self.occupations, self.amplitudes):
            buf.write(" ".join(str(int(v)) for v in row))
            buf.write(f" {a:.17g}\n")
        return buf.getvalue()

    @classmethod
    def loads(cls, text: str) -> "FockState":
        rows = [line.split() for line in text.splitlines() if line.strip() and not line.startswith("#")]
        if not rows:
            raise EmptyStateError("no entries in state dump")
        occ = np.array([[int(v) for v in row[:-1]] for row in rows], dtype=np.int64)
        amp = np.array([float(row[-1]) for row in rows])
        return cls(occ, amp)


def _canonical(occ, amp):
    keep = amp != 0.0
    occ, amp = occ[keep], amp[keep]
    if occ.shape[0] == 0:
        return occ.reshape(0, occ.shape[1]), amp
    order = np.lexsort(occ.T[::-1])
    occ, amp = occ[order], amp[order]
    dup = np.all(occ[1:] == occ[:-1], axis=1)
    if np.any(dup):
        starts = np.concatenate([[True], ~dup])
        group = np.cumsum(starts) - 1
        amp = np.bincount(group, weights=amp)
        occ = occ[starts]
        keep = amp != 0.0
        occ, amp = occ[keep], amp[keep]
    return np.ascontiguousarray(occ), np.ascontiguousarray(amp)


def _check_mode(state: FockState, mode: int):
    if not 1 <= int(mode) <= state.mode_count:
        raise ValidationError(f"mode {mode} out of range 1..{state.mode_count}")


def norm(state: FockState) -> float:
    """Euclidean norm of the amplitude vector."""
    return math.sqrt(state.squared_norm())


def normalize(state: FockState, squared_norm: float = 1.0) -> FockState:
    """Rescale so the stored amplitudes have the given squared norm (default 1)."""
    current = state.squared_norm()
    if current <= 0.0:
        raise EmptyStateError("cannot normalize the zero state")
    return state.with_amplitudes(state.amplitudes * math.sqrt(squared_norm / current))


def fmsv_cutoff(lam: float, epsilon: float) -> int:
    """Smallest ``n_max`` with ``lam^(2 (n_max + 1)) < epsilon``."""
    if lam == 0.0:
        return 0
    n = max(0, math.ceil(math.log(epsilon) / (2.0 * math.log(lam))) - 1)
    while lam ** (2 * (n + 1)) >= epsilon:
        n += 1
    while n > 0 and lam ** (2 * n) < epsilon:
        n -= 1
    return n


def _check_squeezing(r: float) -> float:
    if not np.isfinite(r) or r < 0:
        raise ValidationError("squeezing must be finite and nonnegative")
    lam = math.tanh(r)
    if lam >= MAX_TANH:
        raise ValidationError(f"tanh r = {lam!r} too close to 1 for the truncation to converge")
    return lam


def build_fmsv_fock(r: float, epsilon: float = DEFAULT_EPSILON, n_max: Optional[int] = None) -> FockState:
    """Truncated Fock expansion of the four-mode squeezed vacuum.

    Amplitude ``(1/cosh r) (tanh r / 2)^n sqrt(C(n, r1) C(n, r2))`` on
    ``|n - r1, n - r2, r1, r2>`` for every shell ``n <= n_max``.  The stored
    amplitudes are exact, so their squared norm is ``1 - tail_bound`` with
    ``tail_bound = tanh(r)^(2 (n_max + 1))``.
    """
    lam = _check_squeezing(r)
    if epsilon <= 0:
        raise ValidationError("epsilon must be positive")
    if n_max is None:
        n_max = fmsv_cutoff(lam, epsilon)
    n_max = int(n_max)
    if n_max < 0:
        raise ValidationError("n_max must be nonnegative")
    occ, amp = _kernels.fmsv_support(lam, n_max)
    tail = lam ** (2 * (n_max + 1))
    return FockState(occ, amp, n_max=n_max, tail_bound=tail, diagnostics={"tanh_r": lam})


@dataclass(frozen=True)
class PhotonOp:
    """``a^dagger^count`` (add) or ``a^count`` (subtract) on one mode."""

    mode: int
    count: int
    kind: str = "add"

    def __post_init__(self):
        if self.kind not in ("add", "subtract"):
            raise ValidationError(f"kind must be 'add' or 'subtract', got {self.kind!r}")
        if int(self.count) < 1:
            raise ValidationError("photon count must be at least 1")
        if int(self.mode) < 1:
            raise ValidationError("mode labels start at 1")


def log_ladder_factor(occupation, count: int, kind: str):
    """``log`` of ``(j+m)!/j!`` (add) or ``j!/(j-m)!`` (subtract; -inf when j < m)."""
    j = np.asarray(occupation, dtype=float)
    if kind == "add":
        return gammaln(j + count + 1) - gammaln(j + 1)
    with np.errstate(invalid="ignore"):
        out = gammaln(j + 1) - gammaln(np.maximum(j - count, 0) + 1)
    return np.where(j >= count, out, -np.inf)


def apply_photon_op(state: FockState, op: PhotonOp, renormalize: bool = True) -> FockState:
    """Apply ``op`` and (by default) renormalise.

    After renormalisation the stored squared norm is ``1 - tail_bound``.  The
    new tail bound scales the old one by the largest ladder factor just beyond
    the stored support; it is an estimate recorded in
    ``diagnostics["tail_growth"]``, not a rigorous bound.  Use
    :func:`photon_fmsv` for exactly accounted tails.
    """
    _check_mode(state, op.mode)
    col = state.occupations[:, op.mode - 1]
    shift = op.count if op.kind == "add" else -op.count
    log_factor = log_ladder_factor(col, op.count, op.kind)
    alive = np.isfinite(log_factor)
    if not np.any(alive):
        raise EmptyStateError(f"subtracting {op.count} photons from mode {op.mode} annihilates the state")
    occ = state.occupations[alive].copy()
    occ[:, op.mode - 1] += shift
    amp = state.amplitudes[alive] * np.exp(0.5 * log_factor[alive])

    edge = col.max() + 1
    growth = float(np.exp(log_ladder_factor(edge, op.count, op.kind)))
    diagnostics = dict(state.diagnostics)
    diagnostics["tail_growth"] = diagnostics.get("tail_growth", 1.0) * growth
    diagnostics["ops"] = list(diagnostics.get("ops", [])) + [(op.mode, op.count, op.kind)]
    raw = FockState(occ, amp, n_max=state.n_max, tail_bound=state.tail_bound, diagnostics=diagnostics)
    if not renormalize:
        return raw
    kept = raw.squared_norm()
    lost = state.tail_bound * growth
    tail = lost / (kept + lost) if lost > 0 else 0.0
    return normalize(FockState(raw.occupations, raw.amplitudes, n_max=state.n_max, tail_bound=tail,
                               diagnostics=diagnostics), 1.0 - tail)


def _shell_pair_log(n: np.ndarray, m_a: int, m_b: int, kind: str) -> np.ndarray:
    """``log sum_j C(n, j) g(n - j, m_a) g(j, m_b)`` for each shell ``n``."""
    out = np.full(n.shape, -np.inf)
    for idx, nn in enumerate(n):
        j = np.arange(nn + 1)
        terms = (
            gammaln(nn + 1) - gammaln(j + 1) - gammaln(nn - j + 1)
            + log_ladder_factor(nn - j, m_a, kind)
            + log_ladder_factor(j, m_b, kind)
        )
        if np.any(np.isfinite(terms)):
            out[idx] = logsumexp(terms)
    return out


def log_shell_weights(kind: str, lam: float, m: Sequence[int], n_max: int) -> np.ndarray:
    """``log`` of each shell's contribution to the normalisation sum, ``n = 0..n_max``."""
    if kind not in ("add", "subtract"):
        raise ValidationError(f"kind must be 'add' or 'subtract', got {kind!r}")
    m1, m2, m3, m4 = (int(v) for v in m)
    n = np.arange(int(n_max) + 1)
    pair13 = _shell_pair_log(n, m1, m3, kind)
    pair24 = _shell_pair_log(n, m2, m4, kind)
    if lam == 0.0:
        base = np.where(n == 0, 0.0, -np.inf)
    else:
        base = 2.0 * n * (math.log(lam) - math.log(2.0))
    return base + pair13 + pair24


def normalization_constant(kind: str, r: float, m: Sequence[int], n_max: int) -> float:
    """Normalisation sum of the photon-added (``N^add``) or -subtracted
    (``N^sub``) FMSV state, truncated at shell ``n_max``.

    Every factorial ratio is accumulated in log space.
    """
    lam = _check_squeezing(r)
    logs = log_shell_weights(kind, lam, m, n_max)
    if not np.any(np.isfinite(logs)):
        raise EmptyStateError("photon subtraction annihilates every retained shell")
    return float(np.exp(logsumexp(logs)))


def shell_tails(kind: str, lam: float, m: Sequence[int], rtol: float = 1e-22, n_limit: int = 20000):
    """Relative tail mass beyond each shell of the photon-modified FMSV.

    Returns ``tails`` with ``tails[n]`` the fraction of the full
    normalisation sum carried by shells ``> n``.  Shells are summed until the
    newest one is below ``rtol`` of the running total while decreasing.
    """
    chunk = 64
    logs = np.empty(0)
    while True:
        n_hi = logs.size + chunk - 1
        logs = log_shell_weights(kind, lam, m, n_hi)
        finite = np.isfinite(logs)
        if lam == 0.0 and np.any(finite):
            break
        if np.any(finite):
            total = logsumexp(logs[finite])
            last, prev = logs[-1], logs[-2]
            if last < prev and last - total < math.log(rtol):
                break
        if logs.size >= n_limit:
            raise ValidationError("normalisation series did not converge; squeezing too large")
        chunk *= 2
    total = logsumexp(logs)
    weights = np.exp(logs - total)
    # summing from the far end keeps small tails accurate
    return np.append(np.cumsum(weights[::-1])[::-1][1:], 0.0)


def photon_fmsv(
    r: float,
    kind: str,
    m: Sequence[int],
    epsilon: float = DEFAULT_EPSILON,
    n_max: Optional[int] = None,
) -> FockState:
    """FMSV with ``m[i]`` photons added to (or subtracted from) mode ``i+1``.

    The shell cutoff is the smallest ``n_max`` whose exact relative tail mass
    is below ``epsilon`` (or the given ``n_max``), and the stored amplitudes
    are the exactly normalised ones on the kept shells.
    """
    lam = _check_squeezing(r)
    m = tuple(int(v) for v in m)
    if len(m) != 4 or any(v < 0 for v in m):
        raise ValidationError("photon counts must be four nonnegative integers")
    if kind not in ("add", "subtract"):
        raise ValidationError(f"kind must be 'add' or 'subtract', got {kind!r}")
    if kind == "subtract" and lam == 0.0 and any(m):
        raise EmptyStateError("subtracting photons from the vacuum annihilates it")
    tails = shell_tails(kind, lam, m)
    if n_max is None:
        below = np.nonzero(tails < epsilon)[0]
        n_max = int(below[0]) if below.size else tails.size - 1
    n_max = int(n_max)
    tail = float(tails[n_max]) if n_max < tails.size else 0.0

    state = build_fmsv_fock(r, n_max=n_max)
    for mode, count in enumerate(m, start=1):
        if count:
            state = apply_photon_op(state, PhotonOp(mode, count, kind), renormalize=False)
    if state.size == 0:
        raise EmptyStateError("photon subtraction annihilated every retained shell")
    diagnostics = dict(state.diagnostics)
    diagnostics.update(kind=kind, photons=m, tanh_r=lam)
    state = FockState(state.occupations, state.amplitudes, n_max=n_max, tail_bound=tail,
                      diagnostics=diagnostics)
    return normalize(state, 1.0 - tail)
