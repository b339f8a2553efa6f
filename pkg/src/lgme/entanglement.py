"""Generalized geometric measure (GGM) of pure multimode Fock states."""

from dataclasses import dataclass
from itertools import combinations
from typing import Sequence, Tuple

import numpy as np
from scipy.sparse import csr_matrix

from . import _kernels
from .errors import EmptyStateError, PreconditionError, ValidationError
from .fock import FockState

DENSE_LIMIT = 400
POWER_RTOL = 1e-12
POWER_MAX_ITER = 10_000


@dataclass(frozen=True)
class Bipartition:
    """Split of modes ``1..N`` into ``side_a | side_b``.

    Canonical form has ``|side_a| <= |side_b|``; equal halves put the
    lexicographically smaller half in ``side_a``.
    """

    side_a: Tuple[int, ...]
    side_b: Tuple[int, ...]

    @classmethod
    def of(cls, side_a: Sequence[int], mode_count: int) -> "Bipartition":
        a = tuple(sorted(int(m) for m in side_a))
        if len(set(a)) != len(a) or not a or any(not 1 <= m <= mode_count for m in a):
            raise ValidationError(f"invalid side {side_a} for {mode_count} modes")
        b = tuple(m for m in range(1, mode_count + 1) if m not in a)
        if not b:
            raise ValidationError("side_a must be a proper subset of the modes")
        if len(a) > len(b) or (len(a) == len(b) and b < a):
            a, b = b, a
        return cls(a, b)

    def __str__(self):
        return "".join(map(str, self.side_a)) + ":" + "".join(map(str, self.side_b))


def all_bipartitions(mode_count: int) -> list:
    """Every canonical bipartition, smaller sides first."""
    cuts = []
    for size in range(1, mode_count // 2 + 1):
        for side in combinations(range(1, mode_count + 1), size):
            cut = Bipartition.of(side, mode_count)
            if cut.side_a == side:
                cuts.append(cut)
    return cuts


def _encode(cols: np.ndarray) -> np.ndarray:
    """Mixed-radix integer key per row of a nonnegative integer array."""
    key = np.zeros(cols.shape[0], dtype=np.int64)
    for c in range(cols.shape[1]):
        radix = int(cols[:, c].max()) + 1
        key = key * radix + cols[:, c]
    return key


def schmidt_matrix(state: FockState, cut: Bipartition) -> csr_matrix:
    """Amplitudes reshaped to ``(side_a configurations) x (side_b configurations)``."""
    if state.size == 0:
        raise EmptyStateError("state has no amplitudes")
    occ = state.occupations
    _, rows = np.unique(_encode(occ[:, [m - 1 for m in cut.side_a]]), return_inverse=True)
    _, cols = np.unique(_encode(occ[:, [m - 1 for m in cut.side_b]]), return_inverse=True)
    shape = (int(rows.max()) + 1, int(cols.max()) + 1)
    return csr_matrix((state.amplitudes, (rows.ravel(), cols.ravel())), shape=shape)


def _top_gram_eigenvalue(mat: csr_matrix) -> float:
    small = mat if mat.shape[0] <= mat.shape[1] else mat.T.tocsr()
    gram = (small @ small.T).toarray()
    return float(np.linalg.eigvalsh(gram)[-1])


def top_singular_value_sq(
    mat: csr_matrix,
    dense_limit: int = DENSE_LIMIT,
    rtol: float = POWER_RTOL,
    max_iter: int = POWER_MAX_ITER,
) -> float:
    """Largest squared singular value of a sparse matrix.

    Small problems (smaller side at most ``dense_limit``) go straight to a
    dense symmetric eigensolver on the Gram matrix; larger ones use power
    iteration and fall back to the dense route if it fails to converge.
    """
    if min(mat.shape) <= dense_limit:
        return _top_gram_eigenvalue(mat)
    op = mat if mat.shape[1] <= mat.shape[0] else mat.T.tocsr()
    op.sort_indices()
    value, _, converged = _kernels.top_singular_sq(
        op.indptr.astype(np.int64), op.indices.astype(np.int64), op.data,
        op.shape[1], rtol, max_iter,
    )
    if not converged:
        return _top_gram_eigenvalue(mat)
    return float(value)


def max_schmidt_sq(state: FockState, cut: Bipartition, **solver) -> float:
    """Largest squared Schmidt coefficient across ``cut``.

    Equal to the largest eigenvalue of the reduced density matrix of
    ``cut.side_a``; the state's own norm is divided out.
    """
    sq = state.squared_norm()
    if sq <= 0.0:
        raise EmptyStateError("state has zero norm")
    return top_singular_value_sq(schmidt_matrix(state, cut), **solver) / sq


def ggm_pure_fock(state: FockState, return_cuts: bool = False, **solver):
    """``1 - max`` over all canonical bipartitions of the largest squared
    Schmidt coefficient.

    With ``return_cuts=True`` also returns ``{str(cut): lambda_cut}``.
    """
    if state.mode_count < 3:
        raise PreconditionError("GGM needs at least three modes")
    per_cut = {}
    best = 0.0
    for cut in all_bipartitions(state.mode_count):
        value = max_schmidt_sq(state, cut, **solver)
        per_cut[str(cut)] = value
        best = max(best, value)
    ggm = max(0.0, 1.0 - best)
    return (ggm, per_cut) if return_cuts else ggm


def ggm_fmsv_closed_form(r: float) -> float:
    """GGM of the FMSV state in closed form.

    ``1 - max{2/(1+cosh^2 r), 2/(1+cosh 2r), (2/(1+cosh r))^2}``
    """
    if r < 0:
        raise ValidationError("squeezing must be nonnegative")
    return float(
        1.0
        - max(
            2.0 / (1.0 + np.cosh(r) ** 2),
            2.0 / (1.0 + np.cosh(2 * r)),
            (2.0 / (1.0 + np.cosh(r))) ** 2,
        )
    )
