"""Dense complex-matrix primitives with explicit tolerance contracts.

Matrices are plain 2-D ``numpy.ndarray`` values of dtype complex128; every
operation validates shape and finiteness at the boundary and is a pure
function of its inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    DimensionError,
    NoSolutionError,
    NotCommutingError,
    NotPSDError,
    PreconditionError,
)

__all__ = [
    "Tolerances",
    "SubspaceBasis",
    "as_matrix",
    "operator_norm",
    "spectral_radius",
    "numerical_radius",
    "psd_sqrt",
    "commutator",
    "orthonormal_range",
    "compress",
    "joint_eigenvalues",
    "solve_sandwich",
]

# Seed for the random-combination Schur trick; fixed so joint spectra are
# reproducible across runs.
_SCHUR_SEED = 0x7E7AB10C


@dataclass(frozen=True)
class Tolerances:
    """Numerical contract knobs used across the library.

    eq_tol bounds equality residuals, psd_tol bounds eigenvalue/rank
    decisions, grid_points sizes circle grids, max_power_iters caps the
    power iteration for strong-operator limits.
    """

    eq_tol: float = 1e-9
    psd_tol: float = 1e-10
    grid_points: int = 512
    max_power_iters: int = 10000

    def __post_init__(self):
        if not (self.eq_tol > 0 and self.psd_tol > 0):
            raise ValueError("eq_tol and psd_tol must be positive")
        if self.grid_points < 8:
            raise ValueError("grid_points must be at least 8")
        if self.max_power_iters < 1:
            raise ValueError("max_power_iters must be positive")


DEFAULT_TOL = Tolerances()


@dataclass(frozen=True)
class SubspaceBasis:
    """Orthonormal basis of a subspace of C^ambient_dim, stored column-wise."""

    ambient_dim: int
    basis: np.ndarray = field(repr=False)

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=complex)
        if b.ndim != 2 or b.shape[0] != self.ambient_dim:
            raise DimensionError("basis must be ambient_dim x dim")
        object.__setattr__(self, "basis", b)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def check_orthonormal(self, tol: Tolerances = DEFAULT_TOL) -> float:
        """Return the orthonormality residual ||B*B - I||."""
        gram = self.basis.conj().T @ self.basis
        return float(np.linalg.norm(gram - np.eye(self.dim), 2)) if self.dim else 0.0


def as_matrix(m, *, square: bool = False, name: str = "matrix") -> np.ndarray:
    """Validate and coerce input to a finite 2-D complex array."""
    a = np.asarray(m, dtype=complex)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2:
        raise DimensionError(f"{name} must be two-dimensional, got ndim={a.ndim}")
    if a.size and not np.all(np.isfinite(a)):
        raise DimensionError(f"{name} has non-finite entries")
    if square and a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be square, got {a.shape}")
    return a


def _check_same_square(x: np.ndarray, y: np.ndarray) -> None:
    if x.shape != y.shape:
        raise DimensionError(f"size mismatch: {x.shape} vs {y.shape}")


def operator_norm(m) -> float:
    """Largest singular value of m.

    Raises DimensionError for an empty matrix; use 0-dim carriers upstream
    instead of passing degenerate blocks here.
    """
    a = as_matrix(m)
    if a.size == 0:
        raise DimensionError("operator_norm of an empty matrix")
    return float(np.linalg.norm(a, 2))


def _norm_or_zero(m: np.ndarray) -> float:
    """Operator norm that treats empty blocks as zero (internal use)."""
    return 0.0 if m.size == 0 else float(np.linalg.norm(m, 2))


def spectral_radius(m) -> float:
    """Largest eigenvalue modulus of a square matrix (0 for the empty matrix)."""
    a = as_matrix(m, square=True)
    if a.shape[0] == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(a))))


def _golden_max(f, lo: float, hi: float, iters: int = 60) -> float:
    """Golden-section maximization of a scalar function on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    best = max(fc, fd)
    for _ in range(iters):
        if fc < fd:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
        else:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        best = max(best, fc, fd)
        if b - a < 1e-13:
            break
    return best


def numerical_radius(m, tol: Tolerances = DEFAULT_TOL) -> float:
    """Numerical radius sup{|<Mx,x>| : ||x||=1} of a square matrix.

    Computed as the maximum over unimodular rotations of the top eigenvalue
    of the Hermitian part Re(e^{i theta} M), sampled on a theta grid and
    polished by golden-section refinement around the best grid point.  The
    returned value never exceeds the true radius; grid error after
    refinement is O(||M||/grid_points^2).
    """
    a = as_matrix(m, square=True)
    n = a.shape[0]
    if n == 0:
        return 0.0
    grid = tol.grid_points
    thetas = 2.0 * np.pi * np.arange(grid) / grid
    phases = np.exp(1j * thetas)
    herm = 0.5 * (phases[:, None, None] * a + np.conj(phases)[:, None, None] * a.conj().T)
    tops = np.linalg.eigvalsh(herm)[:, -1]
    k = int(np.argmax(tops))
    best = float(tops[k])

    def top_eig(theta: float) -> float:
        h = 0.5 * (np.exp(1j * theta) * a + np.exp(-1j * theta) * a.conj().T)
        return float(np.linalg.eigvalsh(h)[-1])

    step = 2.0 * np.pi / grid
    refined = _golden_max(top_eig, thetas[k] - step, thetas[k] + step)
    return max(best, refined, 0.0)


def psd_sqrt(m, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Hermitian PSD square root of a Hermitian PSD matrix.

    Eigenvalues in [-psd_tol*scale, 0) are clipped to zero; anything more
    negative raises NotPSDError.  Non-Hermitian input beyond eq_tol raises
    PreconditionError.
    """
    a = as_matrix(m, square=True)
    if a.shape[0] == 0:
        return a.copy()
    scale = 1.0 + _norm_or_zero(a)
    herm_res = _norm_or_zero(a - a.conj().T)
    if herm_res > tol.eq_tol * scale:
        raise PreconditionError(f"matrix is not Hermitian (residual {herm_res:.3e})")
    h = 0.5 * (a + a.conj().T)
    w, v = np.linalg.eigh(h)
    if w[0] < -tol.psd_tol * scale:
        raise NotPSDError(f"eigenvalue {w[0]:.3e} below -psd_tol*scale")
    w = np.clip(w, 0.0, None)
    root = (v * np.sqrt(w)) @ v.conj().T
    return 0.5 * (root + root.conj().T)


def commutator(x, y) -> np.ndarray:
    """Commutator XY - YX of two equal-size square matrices."""
    a = as_matrix(x, square=True)
    b = as_matrix(y, square=True)
    _check_same_square(a, b)
    return a @ b - b @ a


def orthonormal_range(m, tol: Tolerances = DEFAULT_TOL) -> SubspaceBasis:
    """Orthonormal basis of the column space of m.

    Rank is decided by singular values above psd_tol * sigma_max, so the
    zero matrix yields the empty basis.
    """
    a = as_matrix(m)
    if a.size == 0:
        return SubspaceBasis(a.shape[0], np.zeros((a.shape[0], 0), dtype=complex))
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        rank = 0
    else:
        rank = int(np.sum(s > tol.psd_tol * s[0]))
    return SubspaceBasis(a.shape[0], u[:, :rank])


def compress(m, s: SubspaceBasis) -> np.ndarray:
    """Matrix of the compression P_S M|_S in the basis of S."""
    a = as_matrix(m, square=True)
    if s.ambient_dim != a.shape[0]:
        raise DimensionError(
            f"ambient dim {s.ambient_dim} does not match matrix size {a.shape[0]}"
        )
    return s.basis.conj().T @ a @ s.basis


def joint_eigenvalues(
    family, tol: Tolerances = DEFAULT_TOL
) -> list[tuple[complex, ...]]:
    """Joint spectrum of a pairwise-commuting family of square matrices.

    A random linear combination (fixed seed) is Schur-triangularized and all
    members are conjugated into the same triangular basis; the diagonal
    tuples form the joint spectrum up to O(eq_tol) perturbation.  Output
    tuples are sorted lexicographically by (Re, Im) of their coordinates.

    Raises NotCommutingError if any pairwise commutator exceeds
    eq_tol * (1 + max_norm)^2.
    """
    mats = [as_matrix(f, square=True) for f in family]
    if not mats:
        raise DimensionError("empty family")
    n = mats[0].shape[0]
    for a in mats:
        if a.shape[0] != n:
            raise DimensionError("family members differ in size")
    if n == 0:
        return []
    max_norm = max(_norm_or_zero(a) for a in mats)
    comm_scale = tol.eq_tol * (1.0 + max_norm) ** 2
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            res = _norm_or_zero(commutator(mats[i], mats[j]))
            if res > comm_scale:
                raise NotCommutingError(
                    f"commutator of members {i},{j} has norm {res:.3e}"
                )

    rng = np.random.default_rng(_SCHUR_SEED)
    stacked = None
    for _ in range(4):
        coeffs = rng.standard_normal(len(mats)) + 1j * rng.standard_normal(len(mats))
        combo = sum(c * a for c, a in zip(coeffs, mats))
        _, z = scipy.linalg.schur(combo, output="complex")
        conjugated = [z.conj().T @ a @ z for a in mats]
        lower = max(
            _norm_or_zero(np.tril(c, -1)) for c in conjugated
        )
        if lower <= 10.0 * comm_scale * math.sqrt(n) or stacked is None:
            stacked = conjugated
        if lower <= 10.0 * comm_scale * math.sqrt(n):
            break
    tuples = [
        tuple(complex(c[i, i]) for c in stacked) for i in range(n)
    ]
    tuples.sort(key=lambda t: [(z.real, z.imag) for z in t])
    return tuples


def solve_sandwich(
    d_left, d_right, s, tol: Tolerances = DEFAULT_TOL
) -> np.ndarray:
    """Solve D_left @ X @ D_right = S for X supported on the defect carriers.

    X is returned in orthonormal-range coordinates: rows index the basis of
    closure Ran(D_left*), columns the basis of closure Ran(D_right), both as
    produced by orthonormal_range.  The solution is the unique minimizer on
    those carriers; if the equation is inconsistent beyond
    eq_tol * (1 + ||S||) a NoSolutionError carrying the residual is raised.
    """
    dl = as_matrix(d_left, name="d_left")
    dr = as_matrix(d_right, name="d_right")
    rhs = as_matrix(s, name="s")
    if rhs.shape != (dl.shape[0], dr.shape[1]):
        raise DimensionError(
            f"rhs shape {rhs.shape} incompatible with ({dl.shape[0]}, {dr.shape[1]})"
        )
    q_left = orthonormal_range(dl.conj().T, tol)
    q_right = orthonormal_range(dr, tol)
    lf = dl @ q_left.basis
    rf = q_right.basis.conj().T @ dr
    if q_left.dim == 0 or q_right.dim == 0:
        x = np.zeros((q_left.dim, q_right.dim), dtype=complex)
    else:
        x = np.linalg.pinv(lf) @ rhs @ np.linalg.pinv(rf)
    residual = _norm_or_zero(lf @ x @ rf - rhs)
    if residual > tol.eq_tol * (1.0 + _norm_or_zero(rhs)):
        raise NoSolutionError("sandwich equation is inconsistent", residual)
    return x
