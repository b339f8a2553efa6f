"""Photon-counting measurement on one mode and the resulting LGME."""

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from .entanglement import ggm_pure_fock
from .errors import PreconditionError, ValidationError
from .fock import FockState

NORM_TOL = 1e-9
DEFAULT_RESIDUAL_CAP = 1e-8


@dataclass(frozen=True)
class Outcome:
    k: int
    probability: float
    post_state: FockState = field(repr=False)


@dataclass(frozen=True)
class OutcomeDistribution:
    """Photon-number outcomes on ``mode`` enumerated from ``k = 0`` upward.

    ``residual`` is the probability mass not covered by ``entries``,
    including whatever the parent lost to truncation.
    """

    mode: int
    entries: List[Outcome]
    residual: float
    parent_norm: float = 1.0

    @property
    def total(self) -> float:
        return float(sum(e.probability for e in self.entries))


@dataclass(frozen=True)
class LgmeResult:
    lower: float
    upper: float
    k_used: int
    residual: float
    per_outcome: List[Tuple[int, float, float]] = field(default_factory=list, repr=False)


def _check_parent(state: FockState, mode: int) -> float:
    if not 1 <= int(mode) <= state.mode_count:
        raise ValidationError(f"mode {mode} out of range 1..{state.mode_count}")
    if state.mode_count < 2:
        raise ValidationError("cannot measure a single-mode state")
    sq = state.squared_norm()
    if sq > 1.0 + NORM_TOL or sq < 1.0 - state.tail_bound - NORM_TOL:
        raise PreconditionError(
            f"state squared norm {sq!r} outside [1 - tail_bound, 1]; normalize it first"
        )
    return sq


def _post_state(state: FockState, mode: int, mask: np.ndarray) -> FockState:
    occ = np.delete(state.occupations[mask], mode - 1, axis=1)
    amp = state.amplitudes[mask]
    amp = amp / np.sqrt(np.dot(amp, amp))
    return FockState(occ, amp, n_max=state.n_max, diagnostics={"parent_mode": mode})


def photon_count_project(state: FockState, mode: int, k: int) -> Tuple[float, Optional[FockState]]:
    """Project ``mode`` onto ``|k>``.

    Returns ``(p_k, post_state)`` with the post state normalised on the
    remaining modes, or ``(0.0, None)`` when the outcome is impossible.
    """
    _check_parent(state, mode)
    mask = state.occupations[:, mode - 1] == int(k)
    p = float(np.dot(state.amplitudes[mask], state.amplitudes[mask]))
    if p == 0.0:
        return 0.0, None
    return p, _post_state(state, mode, mask)


def outcome_distribution(
    state: FockState, mode: int = 4, residual_cap: float = DEFAULT_RESIDUAL_CAP
) -> OutcomeDistribution:
    """Enumerate outcomes until their mass reaches ``1 - residual_cap`` or the
    stored support on ``mode`` is exhausted."""
    if not 0.0 < residual_cap < 1.0:
        raise ValidationError("residual_cap must lie in (0, 1)")
    sq = _check_parent(state, mode)
    col = state.occupations[:, mode - 1]
    order = np.argsort(col, kind="stable")
    counts = np.bincount(col)
    bounds = np.concatenate([[0], np.cumsum(counts)])

    entries = []
    accumulated = 0.0
    for k in range(counts.size):
        if accumulated >= 1.0 - residual_cap:
            break
        if counts[k] == 0:
            continue
        mask = np.zeros(col.size, dtype=bool)
        mask[order[bounds[k] : bounds[k + 1]]] = True
        amp = state.amplitudes[mask]
        p = float(np.dot(amp, amp))
        if p == 0.0:
            continue
        entries.append(Outcome(k, p, _post_state(state, mode, mask)))
        accumulated += p
    return OutcomeDistribution(mode=mode, entries=entries, residual=max(0.0, 1.0 - accumulated), parent_norm=sq)


def lgme_photon_counting(
    state: FockState,
    mode: int = 4,
    residual_cap: float = DEFAULT_RESIDUAL_CAP,
    ggm: Callable[[FockState], float] = ggm_pure_fock,
) -> LgmeResult:
    """Average post-measurement GGM under photon counting on ``mode``.

    ``lower`` sums ``p_k * GGM(psi_k)`` over the enumerated outcomes in
    ascending ``k``; ``upper`` adds the residual mass at the maximal GGM of 1.
    """
    dist = outcome_distribution(state, mode, residual_cap)
    per_outcome = []
    lower = 0.0
    for entry in dist.entries:
        g = float(ggm(entry.post_state))
        per_outcome.append((entry.k, entry.probability, g))
        lower += entry.probability * g
    upper = min(1.0, lower + dist.residual)
    return LgmeResult(lower=lower, upper=upper, k_used=len(dist.entries), residual=dist.residual,
                      per_outcome=per_outcome)
