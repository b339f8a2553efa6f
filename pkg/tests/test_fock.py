import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lgme import fock, reference
from lgme.errors import EmptyStateError, ValidationError
from lgme.fock import FockState, PhotonOp

R_HALF = math.atanh(0.5)


def _max_diff(a: dict, b: dict) -> float:
    keys = set(a) | set(b)
    return max(abs(a.get(k, 0.0) - b.get(k, 0.0)) for k in keys)


def test_vacuum_fmsv():
    state = fock.build_fmsv_fock(0.0)
    assert state.as_dict() == {(0, 0, 0, 0): 1.0}
    assert state.tail_bound == 0.0


def test_cutoff_example():
    assert fock.fmsv_cutoff(0.5, 1e-12) == 19
    state = fock.build_fmsv_fock(R_HALF, epsilon=1e-12)
    assert state.n_max == 19
    assert state.tail_bound == pytest.approx(0.5 ** 40, rel=1e-12)


@given(st.floats(0.01, 0.9), st.sampled_from([1e-6, 1e-10, 1e-14]))
def test_cutoff_is_smallest(lam, eps):
    n = fock.fmsv_cutoff(lam, eps)
    assert lam ** (2 * (n + 1)) < eps
    assert n == 0 or lam ** (2 * n) >= eps


@settings(deadline=None, max_examples=25)
@given(st.floats(0.0, 0.85))
def test_fmsv_norm_is_one_minus_tail(lam):
    state = fock.build_fmsv_fock(math.atanh(lam), epsilon=1e-10)
    assert state.squared_norm() == pytest.approx(1 - state.tail_bound, abs=1e-12)


def test_fmsv_shell_weights_follow_binomial_identity():
    r = 0.8
    state = fock.build_fmsv_fock(r, n_max=12)
    occ, amp = state.occupations, state.amplitudes
    shell = occ[:, 0] + occ[:, 2]
    lam = math.tanh(r)
    for n in range(13):
        weight = np.sum(amp[shell == n] ** 2)
        assert weight == pytest.approx(lam ** (2 * n) / math.cosh(r) ** 2, rel=1e-12)


def test_fmsv_amplitude_formula():
    r = 0.6
    lam = math.tanh(r)
    state = fock.build_fmsv_fock(r, n_max=6).as_dict()
    for n in range(7):
        for r1, r2 in itertools.product(range(n + 1), repeat=2):
            expected = (lam / 2) ** n * math.sqrt(math.comb(n, r1) * math.comb(n, r2)) / math.cosh(r)
            assert state[(n - r1, n - r2, r1, r2)] == pytest.approx(expected, rel=1e-13)


def test_fmsv_rejects_unbounded_squeezing():
    with pytest.raises(ValidationError):
        fock.build_fmsv_fock(50.0)
    with pytest.raises(ValidationError):
        fock.build_fmsv_fock(0.5, epsilon=0.0)


def test_fmsv_exchange_symmetry():
    state = fock.build_fmsv_fock(0.9, epsilon=1e-8)
    swapped = state.permute_modes([3, 4, 1, 2])
    np.testing.assert_array_equal(swapped.occupations, state.occupations)
    # log-gamma sums run in a different order for mirrored entries
    np.testing.assert_allclose(swapped.amplitudes, state.amplitudes, rtol=1e-13, atol=0)


def test_state_canonicalisation():
    state = FockState.from_dict({(1, 0): 0.5, (0, 1): 0.5, (2, 2): 0.0})
    assert state.occupations.tolist() == [[0, 1], [1, 0]]
    merged = FockState(np.array([[1, 0], [1, 0]]), np.array([0.25, 0.5]))
    assert merged.as_dict() == {(1, 0): 0.75}
    with pytest.raises(ValidationError):
        FockState(np.array([[-1, 0]]), np.array([1.0]))
    with pytest.raises(EmptyStateError):
        FockState.from_dict({})


def test_norm_and_normalize():
    state = FockState.from_dict({(0, 1): 3.0, (1, 0): 4.0})
    assert fock.norm(state) == 5.0
    assert fock.norm(fock.normalize(state)) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(EmptyStateError):
        fock.normalize(FockState(np.zeros((0, 2), dtype=int), np.zeros(0)))


def test_dump_round_trip():
    state = fock.photon_fmsv(0.4, "add", (1, 0, 0, 1), epsilon=1e-6)
    text = state.dumps()
    lines = text.splitlines()
    assert len(lines) == state.size
    assert [tuple(map(int, ln.split()[:4])) for ln in lines] == sorted(state.as_dict())
    loaded = FockState.loads(text)
    np.testing.assert_array_equal(loaded.occupations, state.occupations)
    np.testing.assert_array_equal(loaded.amplitudes, state.amplitudes)


@pytest.mark.parametrize("m", [1, 3])
def test_add_on_vacuum_gives_number_state(m):
    vac = FockState.basis(0, 0, 0)
    out = fock.apply_photon_op(vac, PhotonOp(2, m, "add"))
    assert out.occupations.tolist() == [[0, m, 0]]
    assert out.amplitudes[0] == pytest.approx(1.0, abs=1e-15)


def test_subtract_from_vacuum_is_empty():
    with pytest.raises(EmptyStateError):
        fock.apply_photon_op(FockState.basis(0, 0, 0, 0), PhotonOp(1, 1, "subtract"))


def test_photon_op_validation():
    with pytest.raises(ValidationError):
        PhotonOp(1, 0)
    with pytest.raises(ValidationError):
        PhotonOp(1, 1, "squeeze")
    with pytest.raises(ValidationError):
        fock.apply_photon_op(FockState.basis(0, 0), PhotonOp(3, 1))


def test_ladder_factors():
    assert np.exp(fock.log_ladder_factor(3, 2, "add")) == pytest.approx(20.0)
    assert np.exp(fock.log_ladder_factor(3, 2, "subtract")) == pytest.approx(6.0)
    assert fock.log_ladder_factor(1, 2, "subtract") == -np.inf


def test_sequential_ops_match_closed_form():
    state = fock.build_fmsv_fock(R_HALF, epsilon=1e-12)
    for mode in (1, 3):
        state = fock.apply_photon_op(state, PhotonOp(mode, 1, "add"))
    oracle = reference.added_state(0.5, (1, 0, 1, 0), state.n_max)
    assert _max_diff(fock.normalize(state).as_dict(), oracle) < 1e-10


@pytest.mark.parametrize("kind", ["add", "subtract"])
def test_ops_on_distinct_modes_commute(kind):
    base = fock.build_fmsv_fock(0.7, epsilon=1e-8)
    a = fock.apply_photon_op(fock.apply_photon_op(base, PhotonOp(1, 2, kind)), PhotonOp(4, 1, kind))
    b = fock.apply_photon_op(fock.apply_photon_op(base, PhotonOp(4, 1, kind)), PhotonOp(1, 2, kind))
    np.testing.assert_array_equal(a.occupations, b.occupations)
    np.testing.assert_allclose(a.amplitudes, b.amplitudes, rtol=0, atol=1e-12)


def test_diagnostics_are_not_shared():
    base = fock.build_fmsv_fock(0.3, epsilon=1e-6)
    a = fock.apply_photon_op(base, PhotonOp(1, 1))
    b = fock.apply_photon_op(a, PhotonOp(2, 1))
    assert a.diagnostics["ops"] == [(1, 1, "add")]
    assert len(b.diagnostics["ops"]) == 2


def test_normalization_constant_plain_fmsv():
    r = 0.9
    n_max = 400
    value = fock.normalization_constant("add", r, (0, 0, 0, 0), n_max)
    assert value == pytest.approx(math.cosh(r) ** 2, rel=1e-12)
    assert fock.normalization_constant("subtract", r, (0, 0, 0, 0), n_max) == pytest.approx(value, rel=1e-15)


def test_normalization_constant_vacuum_add():
    assert fock.normalization_constant("add", 0.0, (1, 0, 0, 0), 10) == 1.0


def _brute_force_added_norm(lam, n_max):
    # a1^dagger on the FMSV, term by term
    total = 0.0
    for n in range(n_max + 1):
        for r1 in range(n + 1):
            for r2 in range(n + 1):
                amp = (lam / 2) ** n * math.sqrt(math.comb(n, r1) * math.comb(n, r2))
                total += amp * amp * (n - r1 + 1)
    return total


def test_normalization_constant_brute_force():
    n_max = 40
    value = fock.normalization_constant("add", R_HALF, (1, 0, 0, 0), n_max)
    assert value == pytest.approx(_brute_force_added_norm(0.5, n_max), rel=1e-9)


@pytest.mark.parametrize("kind, m", [("add", (1, 0, 0, 0)), ("add", (0, 2, 1, 0)), ("subtract", (0, 1, 0, 2)),
                                     ("subtract", (3, 0, 1, 0))])
def test_normalization_constant_matches_operator_output(kind, m):
    r = 0.7
    n_max = 30
    state = fock.build_fmsv_fock(r, n_max=n_max)
    for mode, count in enumerate(m, start=1):
        if count:
            state = fock.apply_photon_op(state, PhotonOp(mode, count, kind), renormalize=False)
    expected = fock.normalization_constant(kind, r, m, n_max) / math.cosh(r) ** 2
    assert state.squared_norm() == pytest.approx(expected, rel=1e-9)


def test_log_gamma_coefficients_are_finite():
    logs = fock.log_shell_weights("add", 0.9, (20, 20, 20, 20), 200)
    assert np.all(np.isfinite(logs))
    sub = fock.log_shell_weights("subtract", 0.9, (20, 0, 0, 20), 200)
    assert np.all(np.isfinite(sub[20:]))
    assert np.all(sub[:20] == -np.inf)


@pytest.mark.parametrize("kind, m", [("add", (2, 0, 0, 1)), ("subtract", (1, 1, 0, 0))])
def test_photon_fmsv_tail_accounting(kind, m):
    state = fock.photon_fmsv(0.8, kind, m, epsilon=1e-10)
    assert state.tail_bound < 1e-10
    assert state.squared_norm() == pytest.approx(1 - state.tail_bound, abs=1e-12)
    loose = fock.photon_fmsv(0.8, kind, m, n_max=state.n_max - 10)
    assert loose.tail_bound > state.tail_bound


def test_photon_fmsv_validation():
    with pytest.raises(ValidationError):
        fock.photon_fmsv(0.5, "add", (1, 0, 0))
    with pytest.raises(EmptyStateError):
        fock.photon_fmsv(0.0, "subtract", (1, 0, 0, 0))
