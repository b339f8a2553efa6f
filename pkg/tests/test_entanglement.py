import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.sparse import csr_matrix, random as sparse_random

from lgme import entanglement as ent
from lgme import fock, gaussian
from lgme.entanglement import Bipartition
from lgme.errors import EmptyStateError, PreconditionError, ValidationError
from lgme.fock import FockState
from lgme.measurement import photon_count_project

GHZ = FockState.from_dict({(0, 0, 0): 1 / math.sqrt(2), (1, 1, 1): 1 / math.sqrt(2)})


def test_bipartition_canonical_form():
    assert Bipartition.of([2, 3, 4], 4) == Bipartition((1,), (2, 3, 4))
    assert Bipartition.of([3, 4], 4) == Bipartition((1, 2), (3, 4))
    assert str(Bipartition.of([2, 4], 4)) == "13:24"
    for bad in ([], [1, 1], [5], [1, 2, 3, 4]):
        with pytest.raises(ValidationError):
            Bipartition.of(bad, 4)


def test_all_bipartitions_counts():
    assert [str(c) for c in ent.all_bipartitions(3)] == ["1:23", "2:13", "3:12"]
    cuts = ent.all_bipartitions(4)
    assert len(cuts) == 7
    assert {str(c) for c in cuts if len(c.side_a) == 2} == {"12:34", "13:24", "14:23"}


def test_product_state_has_unit_schmidt():
    state = FockState.basis(1, 2, 3)
    for cut in ent.all_bipartitions(3):
        assert ent.max_schmidt_sq(state, cut) == pytest.approx(1.0, abs=1e-15)
    assert ent.ggm_pure_fock(state) == pytest.approx(0.0, abs=1e-15)


def test_ghz_state():
    for cut in ent.all_bipartitions(3):
        assert ent.max_schmidt_sq(GHZ, cut) == pytest.approx(0.5, abs=1e-15)
    assert ent.ggm_pure_fock(GHZ) == pytest.approx(0.5, abs=1e-15)


def test_ggm_preconditions():
    with pytest.raises(PreconditionError):
        ent.ggm_pure_fock(FockState.basis(0, 0))
    with pytest.raises(EmptyStateError):
        ent.schmidt_matrix(FockState(np.zeros((0, 3), dtype=int), np.zeros(0)), Bipartition.of([1], 3))


def _dense_rdm_top(state: FockState, side_a) -> float:
    # explicit reduced density matrix on side_a, independent of schmidt_matrix
    idx_a = [m - 1 for m in side_a]
    idx_b = [m for m in range(state.mode_count) if m not in idx_a]
    keys_a = sorted({tuple(row[idx_a]) for row in state.occupations})
    pos = {k: i for i, k in enumerate(keys_a)}
    by_b = {}
    for row, amp in zip(state.occupations, state.amplitudes):
        by_b.setdefault(tuple(row[idx_b]), []).append((pos[tuple(row[idx_a])], amp))
    rho = np.zeros((len(keys_a), len(keys_a)))
    for entries in by_b.values():
        for i, a in entries:
            for j, b in entries:
                rho[i, j] += a * b
    return float(np.linalg.eigvalsh(rho)[-1]) / state.squared_norm()


@pytest.mark.parametrize("k", [0, 1, 3])
def test_post_measurement_cut_matches_dense_oracle(k):
    parent = fock.build_fmsv_fock(0.7, epsilon=1e-8)
    _, post = photon_count_project(parent, 4, k)
    for side in ([1], [2], [3]):
        value = ent.max_schmidt_sq(post, Bipartition.of(side, 3))
        assert value == pytest.approx(_dense_rdm_top(post, side), abs=1e-10)


def test_four_mode_cuts_match_dense_oracle():
    state = fock.photon_fmsv(0.5, "add", (1, 0, 0, 2), epsilon=1e-6)
    for cut in ent.all_bipartitions(4):
        assert ent.max_schmidt_sq(state, cut) == pytest.approx(_dense_rdm_top(state, cut.side_a), abs=1e-10)


@pytest.mark.parametrize("r", [0.3, 1.0, math.atanh(0.8)])
def test_fock_ggm_matches_closed_form(r):
    state = fock.build_fmsv_fock(r, epsilon=1e-12)
    tol = max(1e-6, 3 * state.tail_bound)
    assert ent.ggm_pure_fock(state) == pytest.approx(ent.ggm_fmsv_closed_form(r), abs=tol)


def test_closed_form_values():
    assert ent.ggm_fmsv_closed_form(0.0) == 0.0
    assert ent.ggm_fmsv_closed_form(1.0) == pytest.approx(0.3815000, abs=1e-7)
    with pytest.raises(ValidationError):
        ent.ggm_fmsv_closed_form(-0.1)


@given(st.floats(1e-3, 0.1))
def test_closed_form_small_r_series(r):
    # leading branch is (2/(1+cosh r))^2 = 1 - r^2/2 + 7 r^4/48 + ...
    value = ent.ggm_fmsv_closed_form(r)
    assert abs(value - r * r / 2) <= 0.2 * r ** 4
    sq_branch = (2 / (1 + math.cosh(r))) ** 2
    assert sq_branch >= 2 / (1 + math.cosh(r) ** 2)
    assert sq_branch >= 2 / (1 + math.cosh(2 * r))


@given(st.floats(0.0, 3.0))
def test_closed_form_matches_gaussian_engine(r):
    cov = gaussian.build_fmsv_covariance(r)
    assert gaussian.ggm_pure_gaussian(cov) == pytest.approx(ent.ggm_fmsv_closed_form(r), abs=1e-10)


def test_relabelling_leaves_ggm_unchanged():
    state = fock.photon_fmsv(0.6, "subtract", (1, 0, 2, 0), epsilon=1e-8)
    base, cuts = ent.ggm_pure_fock(state, return_cuts=True)
    swapped, swapped_cuts = ent.ggm_pure_fock(state.permute_modes([2, 4, 3, 1]), return_cuts=True)
    # permuted rows change eigensolver rounding, nothing more
    assert swapped == pytest.approx(base, abs=1e-14)
    assert sorted(cuts.values()) == pytest.approx(sorted(swapped_cuts.values()), abs=1e-14)


@settings(deadline=None, max_examples=20)
@given(st.floats(0.05, 0.85), st.sampled_from(["add", "subtract"]), st.integers(1, 3))
def test_ggm_strictly_below_one(lam, kind, m):
    state = fock.photon_fmsv(math.atanh(lam), kind, (m, 0, 0, 0), epsilon=1e-6)
    assert 0.0 <= ent.ggm_pure_fock(state) < 1.0


@pytest.mark.parametrize("shape", [(500, 450), (420, 900)])
def test_power_iteration_matches_dense(shape):
    mat = csr_matrix(sparse_random(*shape, density=0.01, random_state=7, format="csr"))
    mat.data = np.abs(mat.data)
    iterative = ent.top_singular_value_sq(mat, dense_limit=0)
    dense = np.linalg.svd(mat.toarray(), compute_uv=False)[0] ** 2
    assert iterative == pytest.approx(dense, rel=1e-9)


def test_power_iteration_falls_back_when_unconverged():
    mat = csr_matrix(np.diag([1.0, 1.0 - 1e-9, 0.5]))
    value = ent.top_singular_value_sq(mat, dense_limit=0, max_iter=1)
    assert value == pytest.approx(1.0, abs=1e-15)
