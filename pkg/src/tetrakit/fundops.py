"""Fundamental operator pairs and the pencil algebra around them.

The fundamental pair of a triple (A, B, T) with contractive T is the
unique (X1, X2) on the defect space of T solving

    D_T A = X1 D_T + X2* D_T T,      D_T B = X2 D_T + X1* D_T T,

equivalently the unique pair with A - B*T = D_T X1 D_T and
B - A*T = D_T X2 D_T.  The pair built from (A*, B*, T*) drives the
functional models and is conventionally called (G1, G2).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .classify import OperatorTriple, is_commuting
from .errors import (
    InconsistentInputError,
    InternalConsistencyError,
    NotAContractionError,
    NotCommutingError,
    NotPSDError,
    PreconditionError,
)
from .matkernel import (
    DEFAULT_TOL,
    SubspaceBasis,
    Tolerances,
    as_matrix,
    commutator,
    numerical_radius,
    solve_sandwich,
)
from .matkernel import _golden_max, _norm_or_zero as _nrm

__all__ = [
    "FundamentalPair",
    "defect",
    "fundamental_pair",
    "is_special_pair",
    "pencil_contractive",
    "symbols_commute",
    "pencil_numerical_radius_max",
    "solve_quadratic_douglas",
]


@dataclass
class FundamentalPair:
    """Fundamental pair on a defect carrier, in carrier coordinates.

    pencil_nu_max is the observed supremum of the numerical radius of
    X1 + z X2 over the unit circle; for a genuine tetrablock contraction it
    does not exceed 1 (a violation is evidence against contractivity, and
    is recorded rather than raised).
    """

    carrier: SubspaceBasis
    x1: np.ndarray = field(repr=False)
    x2: np.ndarray = field(repr=False)
    pencil_nu_max: float
    is_special: bool
    residuals: dict[str, float] = field(default_factory=dict)


def defect(t_mat, adjoint: bool = False, tol: Tolerances = DEFAULT_TOL):
    """Defect operator D = (I - T*T)^{1/2} (or (I - TT*)^{1/2}) and its range.

    The carrier rank is decided on the eigenvalues of I - T*T at the
    natural scale 1 + ||T||^2, so a numerically unitary T gets the empty
    carrier instead of picking up rounding noise.  Raises
    NotAContractionError when ||T|| exceeds 1 beyond tolerance.
    """
    t = as_matrix(t_mat, square=True, name="T")
    norm_t = _nrm(t)
    if norm_t > 1.0 + tol.psd_tol * 10.0:
        raise NotAContractionError(f"||T|| = {norm_t:.6f} exceeds 1")
    n = t.shape[0]
    gram = t @ t.conj().T if adjoint else t.conj().T @ t
    herm = np.eye(n) - 0.5 * (gram + gram.conj().T)
    if n == 0:
        empty = np.zeros((0, 0), dtype=complex)
        return empty, SubspaceBasis(0, empty)
    w, v = np.linalg.eigh(herm)
    scale = 1.0 + norm_t**2
    if w.size and w[0] < -tol.psd_tol * scale:
        raise NotPSDError(f"I - T*T has eigenvalue {w[0]:.3e}")
    keep = w > tol.psd_tol * scale
    w = np.where(keep, w, 0.0)
    d = (v * np.sqrt(w)) @ v.conj().T
    d = 0.5 * (d + d.conj().T)
    return d, SubspaceBasis(n, v[:, keep])


def _realify_determining(m: np.ndarray, nmat: np.ndarray, c1: np.ndarray, c2: np.ndarray):
    """Assemble the real linear system for the determining equations.

    Unknowns are (X1, X2) on an r-dimensional carrier; the equations are
    X1 M + X2* N = C1 and X2 M + X1* N = C2 with M, N, C1, C2 of shape
    (r, n).  Conjugations force splitting into real and imaginary parts;
    the matrix is materialized column by column, which is cheap because r
    is a defect rank.
    """
    r = m.shape[0]

    def apply(x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
        e1 = x1 @ m + x2.conj().T @ nmat
        e2 = x2 @ m + x1.conj().T @ nmat
        return np.concatenate(
            [e1.real.ravel(), e1.imag.ravel(), e2.real.ravel(), e2.imag.ravel()]
        )

    zero = np.zeros((r, r), dtype=complex)
    cols = []
    for which in range(4):  # Re X1, Im X1, Re X2, Im X2
        for idx in range(r * r):
            basis = np.zeros((r, r), dtype=complex)
            basis.flat[idx] = 1.0 if which % 2 == 0 else 1.0j
            if which < 2:
                cols.append(apply(basis, zero))
            else:
                cols.append(apply(zero, basis))
    a_real = np.array(cols).T
    rhs = np.concatenate(
        [c1.real.ravel(), c1.imag.ravel(), c2.real.ravel(), c2.imag.ravel()]
    )
    return a_real, rhs


def fundamental_pair(
    triple: OperatorTriple, adjoint: bool = False, tol: Tolerances = DEFAULT_TOL
) -> FundamentalPair:
    """Solve the determining equations for the fundamental pair.

    With adjoint=True the pair of (A*, B*, T*) is computed, which is the
    (G1, G2) used by the functional model.  The solve is a stacked real
    least-squares problem on the defect carrier; afterwards the sandwich
    identities A - B*T = D X1 D and B - A*T = D X2 D are verified, and the
    pencil numerical radius sup over the circle of nu(X1 + z X2) is
    recorded together with the special-pair flag.
    """
    work = triple.adjoint() if adjoint else triple
    commuting, comm_res = is_commuting(work, tol)
    if not commuting:
        raise NotCommutingError(
            "fundamental pair requires a commuting triple: " + str(comm_res)
        )
    norm_t = _nrm(work.t)
    if norm_t > 1.0 + tol.eq_tol:
        raise NotAContractionError(f"||T|| = {norm_t:.6f} exceeds 1")

    d, carrier = defect(work.t, adjoint=False, tol=tol)
    r = carrier.dim
    scale = work.scale_norm()
    if r == 0:
        # Unitary T: the defect vanishes and the sandwich identities
        # degenerate to A = B*T, already certified by the caller's checks.
        res = {
            "sandwich_1": _nrm(work.a - work.b.conj().T @ work.t),
            "sandwich_2": _nrm(work.b - work.a.conj().T @ work.t),
        }
        empty = np.zeros((0, 0), dtype=complex)
        if max(res.values()) > tol.eq_tol * scale:
            raise InconsistentInputError(
                f"empty defect but A != B*T: residuals {res}"
            )
        return FundamentalPair(carrier, empty, empty, 0.0, True, res)

    q = carrier.basis
    m = q.conj().T @ d
    nmat = q.conj().T @ d @ work.t
    c1 = q.conj().T @ d @ work.a
    c2 = q.conj().T @ d @ work.b
    a_real, rhs = _realify_determining(m, nmat, c1, c2)
    sol, _, rank, _ = np.linalg.lstsq(a_real, rhs, rcond=None)
    x1 = (sol[: r * r] + 1j * sol[r * r : 2 * r * r]).reshape(r, r)
    x2 = (sol[2 * r * r : 3 * r * r] + 1j * sol[3 * r * r :]).reshape(r, r)

    residuals = {
        "determining_1": _nrm(x1 @ m + x2.conj().T @ nmat - c1),
        "determining_2": _nrm(x2 @ m + x1.conj().T @ nmat - c2),
        "sandwich_1": _nrm(work.a - work.b.conj().T @ work.t - d @ q @ x1 @ q.conj().T @ d),
        "sandwich_2": _nrm(work.b - work.a.conj().T @ work.t - d @ q @ x2 @ q.conj().T @ d),
        "system_rank_deficiency": float(4 * r * r - rank),
    }
    bound = tol.eq_tol * scale
    if max(residuals["sandwich_1"], residuals["sandwich_2"]) > bound:
        raise InconsistentInputError(
            "determining system inconsistent; input is not a tetrablock "
            f"contraction: residuals {residuals}"
        )
    nu_max = pencil_numerical_radius_max(x1, x2, tol)
    special, special_res = is_special_pair(x1, x2, tol)
    residuals.update(special_res)
    # A pencil radius beyond 1 with a consistent solve is evidence that the
    # input is not a tetrablock contraction, not a solver failure; record
    # the excess instead of raising.
    residuals["pencil_nu_excess"] = max(nu_max - 1.0, 0.0)
    return FundamentalPair(carrier, x1, x2, nu_max, special, residuals)


def is_special_pair(
    g1, g2, tol: Tolerances = DEFAULT_TOL
) -> tuple[bool, dict[str, float]]:
    """Commutativity conditions [G1, G2] = 0 and [G1*, G1] = [G2*, G2]."""
    a = as_matrix(g1, square=True, name="G1")
    b = as_matrix(g2, square=True, name="G2")
    if a.shape != b.shape:
        raise PreconditionError("G1, G2 must have equal size")
    if a.shape[0] == 0:
        return True, {"special_comm": 0.0, "special_balance": 0.0}
    scale = (1.0 + max(_nrm(a), _nrm(b))) ** 2
    res = {
        "special_comm": _nrm(commutator(a, b)),
        "special_balance": _nrm(
            a.conj().T @ a + b @ b.conj().T - a @ a.conj().T - b.conj().T @ b
        ),
    }
    bound = tol.eq_tol * scale
    return all(v <= bound for v in res.values()), res


def pencil_contractive(
    g1, g2, tol: Tolerances = DEFAULT_TOL
) -> tuple[bool, float]:
    """Check sup over the circle of ||G1* + z G2|| <= 1, returning the sup."""
    a = as_matrix(g1, square=True, name="G1")
    b = as_matrix(g2, square=True, name="G2")
    if a.shape != b.shape:
        raise PreconditionError("G1, G2 must have equal size")
    if a.shape[0] == 0:
        return True, 0.0
    grid = tol.grid_points
    thetas = 2.0 * np.pi * np.arange(grid) / grid
    phases = np.exp(1j * thetas)
    stack = a.conj().T[None, :, :] + phases[:, None, None] * b[None, :, :]
    norms = np.linalg.norm(stack, ord=2, axis=(1, 2))
    k = int(np.argmax(norms))

    def f(theta: float) -> float:
        return float(np.linalg.norm(a.conj().T + np.exp(1j * theta) * b, 2))

    step = 2.0 * np.pi / grid
    sup = max(float(norms[k]), _golden_max(f, thetas[k] - step, thetas[k] + step))
    return sup <= 1.0 + tol.eq_tol, sup


def symbols_commute(g1, g2, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Coefficient-wise commutation of the pencils G1* + z G2 and G2* + z G1.

    The product pencils commute iff the z^0, z^1 and z^2 coefficients agree:
    G1* G2* = G2* G1*, G1* G1 + G2 G2* = G1 G1* + G2* G2 and G1 G2 = G2 G1.
    The z^0 identity is the adjoint of the z^2 identity, so this agrees with
    the special-pair test; both are computed and cross-checked.
    """
    a = as_matrix(g1, square=True, name="G1")
    b = as_matrix(g2, square=True, name="G2")
    if a.shape[0] == 0:
        return True
    scale = (1.0 + max(_nrm(a), _nrm(b))) ** 2
    bound = tol.eq_tol * scale
    z0 = _nrm(commutator(a.conj().T, b.conj().T))
    z1 = _nrm(a.conj().T @ a + b @ b.conj().T - a @ a.conj().T - b.conj().T @ b)
    z2 = _nrm(commutator(a, b))
    agree = max(z0, z1, z2) <= bound
    special, _ = is_special_pair(a, b, tol)
    if agree != special:
        raise InternalConsistencyError(
            "symbols_commute disagrees with is_special_pair"
        )
    return agree


def pencil_numerical_radius_max(
    x1, x2, tol: Tolerances = DEFAULT_TOL
) -> float:
    """Supremum over the unit circle in z of nu(X1 + z X2).

    nu(X1 + z X2) = sup over beta of the top eigenvalue of
    Re(beta X1) + Re(beta z X2); the two circle parameters are scanned on
    a joint grid (batched Hermitian eigenvalues) and the best point is
    polished with golden-section sweeps in each variable.
    """
    a = as_matrix(x1, square=True, name="X1")
    b = as_matrix(x2, square=True, name="X2")
    if a.shape != b.shape:
        raise PreconditionError("X1, X2 must have equal size")
    if a.shape[0] == 0:
        return 0.0
    gu = gv = max(min(tol.grid_points // 8, 64), 32)
    us = 2.0 * np.pi * np.arange(gu) / gu
    vs = 2.0 * np.pi * np.arange(gv) / gv
    eu = np.exp(1j * us)
    ev = np.exp(1j * vs)
    ha = 0.5 * (eu[:, None, None] * a + np.conj(eu)[:, None, None] * a.conj().T)
    hb = 0.5 * (ev[:, None, None] * b + np.conj(ev)[:, None, None] * b.conj().T)
    stack = ha[:, None, :, :] + hb[None, :, :, :]
    tops = np.linalg.eigvalsh(stack.reshape(gu * gv, *a.shape))[:, -1]
    k = int(np.argmax(tops))
    ku, kv = divmod(k, gv)
    best = float(tops[k])

    def top(u: float, v: float) -> float:
        h = 0.5 * (np.exp(1j * u) * a + np.exp(-1j * u) * a.conj().T)
        h = h + 0.5 * (np.exp(1j * v) * b + np.exp(-1j * v) * b.conj().T)
        return float(np.linalg.eigvalsh(h)[-1])

    u0, v0 = us[ku], vs[kv]
    du, dv = 2.0 * np.pi / gu, 2.0 * np.pi / gv
    for _ in range(3):
        u0_best = _golden_max(lambda u: top(u, v0), u0 - du, u0 + du, iters=30)
        # golden returns the value; recover the argmax with a fine scan
        fine = u0 + np.linspace(-du, du, 33)
        u0 = float(fine[np.argmax([top(u, v0) for u in fine])])
        fine_v = v0 + np.linspace(-dv, dv, 33)
        v0 = float(fine_v[np.argmax([top(u0, v) for v in fine_v])])
        du, dv = du / 8.0, dv / 8.0
        best = max(best, top(u0, v0), u0_best)
    return max(best, 0.0)


def solve_quadratic_douglas(
    d, sigma, tol: Tolerances = DEFAULT_TOL
) -> np.ndarray:
    """Solve Sigma = D F D* for F on closure Ran D* with nu(F) <= 1.

    The premise D D* >= Re(alpha Sigma) for all unimodular alpha is checked
    on a 64-point alpha grid; under it the solution F, unique on the
    carrier, automatically has numerical radius at most one, which is
    re-verified and enforced.
    """
    dm = as_matrix(d, name="D")
    sg = as_matrix(sigma, name="Sigma")
    if sg.shape != (dm.shape[0], dm.shape[0]):
        raise PreconditionError("Sigma must be square of D's row dimension")
    gram = dm @ dm.conj().T
    scale = 1.0 + _nrm(gram) + _nrm(sg)
    alphas = np.exp(2j * np.pi * np.arange(64) / 64)
    if dm.shape[0]:
        stack = gram[None, :, :] - 0.5 * (
            alphas[:, None, None] * sg + np.conj(alphas)[:, None, None] * sg.conj().T
        )
        min_eig = float(np.min(np.linalg.eigvalsh(stack)))
        if min_eig < -tol.psd_tol * scale:
            raise PreconditionError(
                f"premise DD* >= Re(alpha Sigma) fails: min eigenvalue {min_eig:.3e}"
            )
    f = solve_sandwich(dm, dm.conj().T, sg, tol)
    nu = numerical_radius(f, tol)
    if nu > 1.0 + 10.0 * tol.eq_tol:
        raise InternalConsistencyError(
            f"premise held but nu(F) = {nu:.12f} exceeds 1"
        )
    return f
