"""Closed-form amplitude maps for photon-added/-subtracted FMSV states and their
post-measurement states on mode 4.

These are written as explicit loops over the shell indices with
``math.lgamma`` and share no code with the operator-application path in
:mod:`lgme.fock`; they exist to cross-check it.  Every map returned here is
normalised to unit squared norm over the shells it keeps (``n <= n_max``).
"""

import math
from typing import Dict, Sequence, Tuple

Amplitudes = Dict[Tuple[int, ...], float]


def _lfact(x: int) -> float:
    return math.lgamma(x + 1)


def _lbinom(n: int, k: int) -> float:
    return _lfact(n) - _lfact(k) - _lfact(n - k)


def _normalized(terms: Dict[Tuple[int, ...], float]) -> Amplitudes:
    """Exponentiate log-amplitudes relative to their maximum and normalise."""
    if not terms:
        return {}
    top = max(terms.values())
    amps = {key: math.exp(val - top) for key, val in terms.items()}
    total = math.sqrt(math.fsum(a * a for a in amps.values()))
    return {key: a / total for key, a in amps.items()}


def _log_half_lam(lam: float) -> float:
    return (math.log(lam) - math.log(2.0)) if lam > 0 else -math.inf


def added_state(lam: float, m: Sequence[int], n_max: int) -> Amplitudes:
    """Photon-added FMSV, ``m[i]`` photons added to mode ``i + 1``."""
    m1, m2, m3, m4 = m
    lh = _log_half_lam(lam)
    terms = {}
    for n in range(n_max + 1):
        if lam == 0 and n > 0:
            break
        base = n * lh if n else 0.0
        for r1 in range(n + 1):
            for r2 in range(n + 1):
                log_amp = base + 0.5 * (
                    _lbinom(n, r1) + _lbinom(n, r2)
                    + _lfact(n - r1 + m1) - _lfact(n - r1)
                    + _lfact(n - r2 + m2) - _lfact(n - r2)
                    + _lfact(r1 + m3) - _lfact(r1)
                    + _lfact(r2 + m4) - _lfact(r2)
                )
                terms[(n - r1 + m1, n - r2 + m2, r1 + m3, r2 + m4)] = log_amp
    return _normalized(terms)


def subtracted_state(lam: float, m: Sequence[int], n_max: int) -> Amplitudes:
    """Photon-subtracted FMSV; shells start at ``max(m1 + m3, m2 + m4)``."""
    m1, m2, m3, m4 = m
    big_m = max(m1 + m3, m2 + m4)
    lh = _log_half_lam(lam)
    terms = {}
    for n in range(big_m, n_max + 1):
        if lam == 0 and n > 0:
            break
        base = n * lh if n else 0.0
        for r1 in range(m3, n - m1 + 1):
            for r2 in range(m4, n - m2 + 1):
                log_amp = base + 0.5 * (
                    _lbinom(n, r1) + _lbinom(n, r2)
                    + _lfact(n - r1) - _lfact(n - r1 - m1)
                    + _lfact(n - r2) - _lfact(n - r2 - m2)
                    + _lfact(r1) - _lfact(r1 - m3)
                    + _lfact(r2) - _lfact(r2 - m4)
                )
                terms[(n - r1 - m1, n - r2 - m2, r1 - m3, r2 - m4)] = log_amp
    return _normalized(terms)


def subtracted_post_measurement(lam: float, m: Sequence[int], k: int, n_max: int) -> Amplitudes:
    """State of modes 1-3 after ``k`` photons are counted on mode 4 of the
    subtracted state.

    Shell offset ``n`` runs from ``max(0, k + m2 + m4 - M)`` with shell
    ``n + M <= n_max``; amplitudes are proportional to
    ``(lam/2)^n (n+M)! / sqrt(r1! k! (n+M-r1-m1-m3)! (n+M-k-m2-m4)!)``.
    """
    m1, m2, m3, m4 = m
    big_m = max(m1 + m3, m2 + m4)
    lh = _log_half_lam(lam)
    terms = {}
    for n in range(max(0, k + m2 + m4 - big_m), n_max - big_m + 1):
        if lam == 0 and n > 0:
            break
        shell = n + big_m
        base = (n * lh if n else 0.0) + _lfact(shell)
        for r1 in range(shell - m1 - m3 + 1):
            log_amp = base - 0.5 * (
                _lfact(r1) + _lfact(k) + _lfact(shell - r1 - m1 - m3) + _lfact(shell - k - m2 - m4)
            )
            terms[(shell - m1 - m3 - r1, shell - k - m4 - m2, r1)] = log_amp
    return _normalized(terms)


def subtracted_outcome_weight(lam: float, m: Sequence[int], k: int, n_max: int) -> float:
    """Unnormalised probability of ``k`` photons on mode 4 (subtracted state)."""
    m1, m2, m3, m4 = m
    big_m = max(m1 + m3, m2 + m4)
    total = []
    for n in range(max(0, k + m2 + m4 - big_m), n_max - big_m + 1):
        if lam == 0 and n + big_m > 0:
            break
        shell = n + big_m
        for r1 in range(shell - m1 - m3 + 1):
            log_term = (
                (2 * shell * (math.log(lam) - math.log(2.0)) if shell else 0.0)
                + 2 * _lfact(shell)
                - _lfact(r1) - _lfact(k)
                - _lfact(shell - r1 - m1 - m3) - _lfact(shell - k - m2 - m4)
            )
            total.append(math.exp(log_term))
    return math.fsum(total)


def added_post_measurement(lam: float, m: Sequence[int], k: int, n_max: int) -> Amplitudes:
    """State of modes 1-3 after ``k >= m4`` photons are counted on mode 4 of
    the added state.

    Shells ``n`` run from ``max(0, k - m4)``; the mode-4 binomial is
    ``C(n, k - m4)`` because mode 4 held ``k - m4`` photons before addition.
    """
    m1, m2, m3, m4 = m
    lh = _log_half_lam(lam)
    terms = {}
    if k < m4:
        return terms
    j = k - m4
    for n in range(j, n_max + 1):
        if lam == 0 and n > 0:
            break
        base = (n * lh if n else 0.0) + 0.5 * (
            _lbinom(n, j)
            + _lfact(n - j + m2) - _lfact(n - j)
            + _lfact(k) - _lfact(j)
        )
        for r1 in range(n + 1):
            log_amp = base + 0.5 * (
                _lbinom(n, r1)
                + _lfact(n + m1 - r1) - _lfact(n - r1)
                + _lfact(r1 + m3) - _lfact(r1)
            )
            terms[(n + m1 - r1, n - k + m2 + m4, r1 + m3)] = log_amp
    return _normalized(terms)


def added_outcome_weight(lam: float, m: Sequence[int], k: int, n_max: int) -> float:
    """Unnormalised probability of ``k`` photons on mode 4 (added state)."""
    m1, m2, m3, m4 = m
    if k < m4:
        return 0.0
    j = k - m4
    total = []
    for n in range(j, n_max + 1):
        if lam == 0 and n > 0:
            break
        for r1 in range(n + 1):
            log_term = (
                (2 * n * (math.log(lam) - math.log(2.0)) if n else 0.0)
                + _lbinom(n, r1) + _lbinom(n, j)
                + _lfact(n + m1 - r1) - _lfact(n - r1)
                + _lfact(n - j + m2) - _lfact(n - j)
                + _lfact(r1 + m3) - _lfact(r1)
                + _lfact(k) - _lfact(j)
            )
            total.append(math.exp(log_term))
    return math.fsum(total)


def fmsv_vacuum_outcome_probability(lam: float) -> float:
    """Probability of zero photons on mode 4 of the untruncated FMSV.

    ``(1 - lam^2) sum_n (lam^2 / 2)^n = (1 - lam^2) / (1 - lam^2 / 2)``.
    """
    return (1.0 - lam * lam) / (1.0 - lam * lam / 2.0)
