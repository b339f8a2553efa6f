"""Covariance-matrix machinery for Gaussian states.

Conventions: hbar = 1, quadratures ordered ``(q1, p1, q2, p2, ...)`` and the
vacuum covariance is ``I / 2``.  Modes are labelled from 1, as in the physics
literature, everywhere in the public API.
"""

from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .errors import (
    DegenerateMeasurementError,
    NumericalDegeneracyError,
    NumericalError,
    PreconditionError,
    ValidationError,
)

SYMMETRY_RTOL = 1e-12
PAIRING_TOL = 1e-8
PURITY_TOL = 1e-9
VACUUM_NU = 0.5


@dataclass(frozen=True)
class CovarianceMatrix:
    """Real symmetric ``2m x 2m`` covariance matrix of an m-mode Gaussian state."""

    matrix: np.ndarray

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] % 2:
            raise ValidationError(f"covariance must be square of even size, got {mat.shape}")
        if not np.all(np.isfinite(mat)):
            raise ValidationError("covariance has non-finite entries")
        scale = max(np.max(np.abs(mat)), 1.0)
        if np.max(np.abs(mat - mat.T)) > SYMMETRY_RTOL * scale:
            raise ValidationError("covariance matrix is not symmetric")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def mode_count(self) -> int:
        return self.matrix.shape[0] // 2

    def block(self, i: int, j: int) -> np.ndarray:
        """2x2 block coupling modes ``i`` and ``j`` (1-based)."""
        return self.matrix[2 * i - 2 : 2 * i, 2 * j - 2 : 2 * j]

    def is_physical(self, tol: float = PURITY_TOL) -> bool:
        return bool(np.all(symplectic_eigenvalues(self) >= VACUUM_NU - tol))

    def is_pure(self, tol: float = PURITY_TOL) -> bool:
        return bool(np.all(np.abs(symplectic_eigenvalues(self) - VACUUM_NU) <= tol))


def symplectic_form(mode_count: int) -> np.ndarray:
    """Block-diagonal J with 2x2 blocks ``[[0, 1], [-1, 0]]``."""
    if mode_count < 1:
        raise ValidationError("mode_count must be positive")
    return np.kron(np.eye(mode_count), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def vacuum_covariance(mode_count: int) -> CovarianceMatrix:
    return CovarianceMatrix(0.5 * np.eye(2 * mode_count))


def build_fmsv_covariance(r: float) -> CovarianceMatrix:
    """Covariance matrix of the four-mode squeezed vacuum with squeezing ``r``."""
    if not np.isfinite(r):
        raise ValidationError("squeezing must be finite")
    ident = np.eye(2)
    sigma_z = np.diag([1.0, -1.0])
    diag = np.cosh(r) ** 2 * ident
    nn = 0.5 * np.sinh(2 * r) * sigma_z
    nnn = np.sinh(r) ** 2 * ident
    blocks = [
        [diag, nn, nnn, nn],
        [nn, diag, nn, nnn],
        [nnn, nn, diag, nn],
        [nn, nnn, nn, diag],
    ]
    return CovarianceMatrix(0.5 * np.block(blocks))


def _quadrature_indices(modes: Sequence[int]) -> np.ndarray:
    return np.array([2 * m - 2 + q for m in modes for q in (0, 1)], dtype=int)


def _check_modes(cov: CovarianceMatrix, modes: Sequence[int]) -> list:
    modes = [int(m) for m in modes]
    if not modes:
        raise ValidationError("mode subset must be nonempty")
    if len(set(modes)) != len(modes):
        raise ValidationError(f"duplicate mode in {modes}")
    for m in modes:
        if not 1 <= m <= cov.mode_count:
            raise ValidationError(f"mode {m} out of range 1..{cov.mode_count}")
    return modes


def reduce(cov: CovarianceMatrix, modes: Sequence[int]) -> CovarianceMatrix:
    """Partial trace: keep the quadrature rows/columns of ``modes`` in order."""
    idx = _quadrature_indices(_check_modes(cov, modes))
    return CovarianceMatrix(cov.matrix[np.ix_(idx, idx)])


def permute_modes(cov: CovarianceMatrix, order: Sequence[int]) -> CovarianceMatrix:
    """Relabel modes so that new mode ``i`` is old mode ``order[i-1]``."""
    order = _check_modes(cov, order)
    if len(order) != cov.mode_count:
        raise ValidationError("permutation must list every mode once")
    return reduce(cov, order)


def _eigvals_hermitian(mat: np.ndarray, j: np.ndarray) -> np.ndarray:
    """Eigenvalues of ``J @ mat`` through the similar antisymmetric ``L^T J L``.

    Used when the general eigensolver fails to converge (it can on nearly
    diagonal inputs); ``mat = L L^T`` must be positive definite.
    """
    try:
        low = np.linalg.cholesky(mat)
    except np.linalg.LinAlgError:
        raise NumericalDegeneracyError("covariance matrix is not positive definite")
    return 1j * np.linalg.eigvalsh(1j * (low.T @ j @ low))


def _symplectic_eigs_batch(mats: np.ndarray) -> np.ndarray:
    """Symplectic spectra of a stack of covariance matrices, descending."""
    m = mats.shape[-1] // 2
    j = symplectic_form(m)
    try:
        eig = np.linalg.eigvals(j @ mats)
    except np.linalg.LinAlgError:
        eig = np.empty(mats.shape[:-1], dtype=complex)
        for idx in np.ndindex(mats.shape[:-2]):
            try:
                eig[idx] = np.linalg.eigvals(j @ mats[idx])
            except np.linalg.LinAlgError:
                eig[idx] = _eigvals_hermitian(mats[idx], j)
    scale = np.maximum(np.max(np.abs(mats), axis=(-2, -1)), 1.0)[..., None]
    im = np.sort(eig.imag, axis=-1)
    pos = im[..., m:][..., ::-1]
    neg = -im[..., :m]
    if np.any(np.abs(eig.real) > PAIRING_TOL * scale) or np.any(
        np.abs(pos - neg) > PAIRING_TOL * scale
    ):
        raise NumericalDegeneracyError("eigenvalues of J @ cov are not paired as +-i nu")
    return 0.5 * (pos + neg)


def symplectic_eigenvalues(cov: CovarianceMatrix) -> np.ndarray:
    """Williamson invariants of ``cov``, one per mode, sorted descending."""
    if not isinstance(cov, CovarianceMatrix):
        cov = CovarianceMatrix(cov)
    return _symplectic_eigs_batch(cov.matrix[None])[0]


def _ggm_pure_batch(mats: np.ndarray) -> np.ndarray:
    n_modes = mats.shape[-1] // 2
    best = np.zeros(mats.shape[0])
    for size in range(1, n_modes // 2 + 1):
        for subset in combinations(range(1, n_modes + 1), size):
            idx = _quadrature_indices(subset)
            nus = _symplectic_eigs_batch(mats[:, idx[:, None], idx[None, :]])
            overlap = np.prod(2.0 / (1.0 + 2.0 * nus), axis=-1)
            best = np.maximum(best, overlap)
    return 1.0 - best


def ggm_pure_gaussian(cov: CovarianceMatrix, purity_tol: float = PURITY_TOL) -> float:
    """Generalized geometric measure of a pure Gaussian state.

    One minus the largest product ``prod 2 / (1 + 2 nu_i)`` over every
    reduction to ``m = 1 .. N // 2`` modes.
    """
    if cov.mode_count < 3:
        raise PreconditionError("GGM needs at least three modes")
    if not cov.is_pure(purity_tol):
        raise PreconditionError("GGM formula applies only to pure Gaussian states")
    return float(_ggm_pure_batch(cov.matrix[None])[0])


@dataclass(frozen=True)
class GaussianMeasurement:
    """Single-mode Gaussian measurement.

    Either a squeezed-coherent projection with squeezing ``squeeze`` and
    quadrature angle ``angle``, or (``homodyne`` set) the infinite-squeezing
    limit that reads out the ``"x"`` or ``"p"`` quadrature.
    """

    squeeze: float = 0.0
    angle: float = 0.0
    homodyne: Optional[str] = None

    def __post_init__(self):
        if self.homodyne is not None:
            if self.homodyne not in ("x", "p"):
                raise ValidationError(f"homodyne quadrature must be 'x' or 'p', got {self.homodyne!r}")
            return
        if not np.isfinite(self.squeeze) or self.squeeze < 0:
            raise ValidationError("squeeze must be a finite nonnegative number")
        if not np.isfinite(self.angle):
            raise ValidationError("angle must be finite")
        object.__setattr__(self, "angle", float(self.angle) % (2 * np.pi))

    @classmethod
    def homodyne_x(cls) -> "GaussianMeasurement":
        return cls(homodyne="x")

    @classmethod
    def homodyne_p(cls) -> "GaussianMeasurement":
        return cls(homodyne="p")


def _measurement_matrix(squeeze, angle):
    ch = np.cosh(2 * squeeze)
    sh = np.sinh(2 * squeeze)
    c, s = np.cos(angle), np.sin(angle)
    return np.stack(
        [np.stack([ch + c * sh, s * sh], -1), np.stack([s * sh, ch - c * sh], -1)], -2
    )


def measurement_covariance(meas: GaussianMeasurement) -> np.ndarray:
    """Squeezed-coherent measurement matrix in unit-vacuum normalisation.

    Identity at zero squeezing.  The state-convention covariance of the
    projected state is half of this.
    """
    if meas.homodyne is not None:
        raise ValidationError("homodyne measurements have no finite covariance; use condition_on_homodyne")
    return _measurement_matrix(meas.squeeze, meas.angle)


def _split(cov: CovarianceMatrix, mode: int):
    _check_modes(cov, [mode])
    if cov.mode_count < 2:
        raise ValidationError("cannot condition a single-mode state")
    rest = [m for m in range(1, cov.mode_count + 1) if m != mode]
    keep = _quadrature_indices(rest)
    meas = _quadrature_indices([mode])
    mat = cov.matrix
    return mat[np.ix_(keep, keep)], mat[np.ix_(keep, meas)], mat[np.ix_(meas, meas)]


def _measurement_gain(b, squeeze, angle):
    """``(sigma_m / 2 + b)^-1`` for one or many ``(r', phi)``, cancellation-free.

    Works in the frame rotated by ``phi / 2`` where the measurement covariance
    is ``diag(e^{2r'}, e^{-2r'}) / 2`` and inverts the 2x2 sum analytically.
    """
    squeeze = np.asarray(squeeze, dtype=float)
    half = 0.5 * np.asarray(angle, dtype=float)
    cos, sin = np.cos(half), np.sin(half)
    rot = np.stack([np.stack([cos, -sin], -1), np.stack([sin, cos], -1)], -2)
    bt = np.swapaxes(rot, -1, -2) @ b @ rot
    s1 = 0.5 * np.exp(2 * squeeze) + bt[..., 0, 0]
    s2 = 0.5 * np.exp(-2 * squeeze) + bt[..., 1, 1]
    off = bt[..., 0, 1]
    det = s1 * s2 - off * off
    if np.any(~np.isfinite(det)) or np.any(det <= 0) or np.any(s2 - off * off / s1 <= 0):
        cond = np.max(np.abs(s1 / np.where(s2 > 0, s2, np.finfo(float).tiny)))
        raise NumericalError(f"sigma_m + sigma_mode is singular (condition number ~{cond:.3g})")
    inv = np.stack(
        [
            np.stack([1.0 / (s1 - off * off / s2), -off / det], -1),
            np.stack([-off / det, 1.0 / (s2 - off * off / s1)], -1),
        ],
        -2,
    )
    return rot @ inv @ np.swapaxes(rot, -1, -2)


def condition_on_gaussian_measurement(
    cov: CovarianceMatrix, mode: int, meas: GaussianMeasurement
) -> CovarianceMatrix:
    """Covariance of the unmeasured modes after a Gaussian measurement on ``mode``.

    Schur complement ``A - C (sigma_m / 2 + B)^-1 C^T``; the result does not
    depend on the outcome.
    """
    if meas.homodyne is not None:
        return condition_on_homodyne(cov, mode, meas.homodyne)
    a, c, b = _split(cov, mode)
    gain = _measurement_gain(b, meas.squeeze, meas.angle)
    return CovarianceMatrix(a - c @ gain @ c.T)


def condition_on_homodyne(cov: CovarianceMatrix, mode: int, quadrature: str) -> CovarianceMatrix:
    """Infinite-squeezing limit: ``A - C (pi B pi)^+ C^T`` with pi onto one quadrature."""
    if quadrature not in ("x", "p"):
        raise ValidationError(f"quadrature must be 'x' or 'p', got {quadrature!r}")
    a, c, b = _split(cov, mode)
    q = 0 if quadrature == "x" else 1
    var = b[q, q]
    if var <= 1e-14 * max(1.0, np.max(np.abs(b))):
        raise DegenerateMeasurementError(f"measured quadrature variance {var:.3g} is numerically zero")
    col = c[:, q]
    return CovarianceMatrix(a - np.outer(col, col) / var)


@dataclass(frozen=True)
class GridSearch:
    """Search over squeezed-coherent measurements ``(r', phi)``."""

    squeeze_max: float = 10.0
    squeeze_points: int = 41
    angle_points: int = 64
    refine: bool = True
    include_homodyne: bool = True

    def squeezes(self) -> np.ndarray:
        return np.linspace(0.0, self.squeeze_max, self.squeeze_points)

    def angles(self) -> np.ndarray:
        return np.arange(self.angle_points) * (2 * np.pi / max(self.angle_points, 1))


@dataclass(frozen=True)
class GaussianLgmeResult:
    optimal_value: float
    argmax: tuple  # (r', phi) or ("homodyne", quadrature)
    closed_form: float
    grid_max: float
    homodyne_value: float
    grid_values: np.ndarray = field(repr=False)


def lgme_closed_form(r: float) -> float:
    """Optimal Gaussian-measurement LGME of the FMSV state, ``tanh^2(r/2)``."""
    return float(np.tanh(r / 2.0) ** 2)


def conditioned_ggm_grid(cov: CovarianceMatrix, mode: int, squeezes, angles) -> np.ndarray:
    """GGM after a Gaussian measurement at every ``(r', phi)`` pair.

    Returns an array of shape ``(len(squeezes), len(angles))``.
    """
    a, c, b = _split(cov, mode)
    rr, pp = np.meshgrid(np.asarray(squeezes, float), np.asarray(angles, float), indexing="ij")
    post = a - c @ _measurement_gain(b, rr.ravel(), pp.ravel()) @ c.T
    return _ggm_pure_batch(post).reshape(rr.shape)


def lgme_gaussian(
    r: float,
    search: GridSearch = GridSearch(),
    mode: int = 4,
    cov: Optional[CovarianceMatrix] = None,
) -> GaussianLgmeResult:
    """Optimise the post-measurement GGM over single-mode Gaussian measurements."""
    if not np.isfinite(r) or r < 0:
        raise ValidationError("squeezing must be finite and nonnegative")
    if search.squeeze_points < 1 or search.angle_points < 1:
        raise ValidationError("search grid is empty")
    if cov is None:
        cov = build_fmsv_covariance(r)
    squeezes, angles = search.squeezes(), search.angles()
    grid = conditioned_ggm_grid(cov, mode, squeezes, angles)
    i, j = np.unravel_index(np.argmax(grid), grid.shape)
    best, arg = float(grid[i, j]), (float(squeezes[i]), float(angles[j]))

    if search.refine:
        def objective(x):
            return -conditioned_ggm_grid(cov, mode, [x[0]], [x[1]])[0, 0]

        res = minimize(
            objective,
            x0=np.array(arg),
            method="Nelder-Mead",
            bounds=[(0.0, search.squeeze_max), (-np.pi, 3 * np.pi)],
            options={"xatol": 1e-10, "fatol": 1e-15, "maxiter": 2000},
        )
        if -res.fun > best:
            best, arg = float(-res.fun), (float(res.x[0]), float(res.x[1] % (2 * np.pi)))

    homodyne_value = -np.inf
    if search.include_homodyne:
        for quad in ("x", "p"):
            value = ggm_pure_gaussian(condition_on_homodyne(cov, mode, quad), purity_tol=1e-8)
            homodyne_value = max(homodyne_value, value)
            if value > best:
                best, arg = value, ("homodyne", quad)

    return GaussianLgmeResult(
        optimal_value=best,
        argmax=arg,
        closed_form=lgme_closed_form(r),
        grid_max=float(grid.max()),
        homodyne_value=float(homodyne_value),
        grid_values=grid,
    )
