"""Douglas-type functional model, characteristic function, and data sets.

The model for a triple (A, B, T) with contractive T lives on the truncated
analytic space C^{(N+1) d} (d = dim of the defect of T*) plus the residual
space where powers of T stay isometric.  The embedding stacks the
observability blocks D_{T*} T^{*n} over the residual projection; the lift
triple is block Toeplitz in the adjoint fundamental pair (G1, G2) on the
analytic part and the canonical residual tetrablock unitary on the rest.
All guarantees are expressed relative to the truncation tail
``||D_{T*} T^{*(N+1)}||``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from .classify import OperatorTriple
from .errors import (
    DimensionError,
    InconsistentInputError,
    InternalConsistencyError,
    PoleError,
    PreconditionError,
)
from .fundops import (
    defect,
    fundamental_pair,
    is_special_pair,
    pencil_contractive,
    symbols_commute,
)
from .matkernel import (
    DEFAULT_TOL,
    SubspaceBasis,
    Tolerances,
    as_matrix,
    commutator,
    compress,
    psd_sqrt,
)
from .matkernel import _norm_or_zero as _nrm

__all__ = [
    "QLimit",
    "ResidualTriple",
    "DouglasModel",
    "TetrablockDataSet",
    "CoincidenceReport",
    "compute_Q",
    "residual_triple",
    "auto_order",
    "observability_embedding",
    "build_lift",
    "verify_lift",
    "lift_is_strict",
    "char_function",
    "defect_of_theta",
    "theta_sample_points",
    "extract_data_set",
    "coincide",
    "validate_special_data_set",
    "omega_tau",
    "kernel_model_triple",
]

_MAX_ORDER = 512
_ORDER_TAIL_TARGET = 1e-10


@dataclass
class QLimit:
    """Strong limit of T^n T^{*n} together with its range.

    In finite dimensions the limit is the orthogonal projection onto the
    subspace where T acts unitarily; eigenvalues of the computed limit are
    snapped to {0, 1} and the snap distance is recorded as ``deviation``.
    """

    q: np.ndarray = field(repr=False)
    carrier: SubspaceBasis
    complement: SubspaceBasis
    deviation: float
    converged: bool


@dataclass
class ResidualTriple:
    """Canonical residual tetrablock unitary (R, S, W) in carrier coordinates.

    W is the unitary part of T; R and S are the matching compressions of A
    and B.  ``strict`` records whether R and S commute and are contractive,
    which upgrades the pseudo-commutative unitary to a strict one.
    """

    r: np.ndarray = field(repr=False)
    s: np.ndarray = field(repr=False)
    w: np.ndarray = field(repr=False)
    carrier: SubspaceBasis
    strict: bool
    residuals: dict[str, float] = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.carrier.dim


@dataclass
class DouglasModel:
    """Truncated functional model with its lift triple.

    The top-degree block of v3* v3 - I is nonzero by construction (the
    truncated shift loses the highest mode); every contract here excludes
    that block and is stated relative to ``tail``.
    """

    order_n: int
    defect_dim: int
    g1: np.ndarray = field(repr=False)
    g2: np.ndarray = field(repr=False)
    embedding: np.ndarray = field(repr=False)
    v1: np.ndarray = field(repr=False)
    v2: np.ndarray = field(repr=False)
    v3: np.ndarray = field(repr=False)
    residual: ResidualTriple
    tail: float
    deficiency: float
    warnings: list[str] = field(default_factory=list)


@dataclass
class TetrablockDataSet:
    """Sampled characteristic data: (Theta samples, (G1, G2), residual).

    theta_samples is a list of (z, matrix) pairs with matrices mapping the
    defect of T into the defect of T*; pure_flag records whether the sample
    at z = 0 is a strict contraction on the whole input defect.
    """

    theta_samples: list[tuple[complex, np.ndarray]]
    g1: np.ndarray = field(repr=False)
    g2: np.ndarray = field(repr=False)
    residual: ResidualTriple
    pure_flag: bool

    def __post_init__(self):
        shapes = {m.shape for _, m in self.theta_samples}
        if len(shapes) > 1:
            raise DimensionError(f"inconsistent Theta sample shapes: {shapes}")

    @property
    def defect_dims(self) -> tuple[int, int]:
        """(dim of input defect, dim of output defect)."""
        if not self.theta_samples:
            return (0, self.g1.shape[0])
        out_d, in_d = self.theta_samples[0][1].shape
        return (in_d, out_d)


@dataclass
class CoincidenceReport:
    coincide: bool
    phi: Optional[np.ndarray] = field(default=None, repr=False)
    phi_star: Optional[np.ndarray] = field(default=None, repr=False)
    omega: Optional[np.ndarray] = field(default=None, repr=False)
    residuals: dict[str, float] = field(default_factory=dict)
    undecided: bool = False
    note: str = ""


def compute_Q(t_mat, tol: Tolerances = DEFAULT_TOL) -> QLimit:
    """Limit projection Q^2 = lim T^n T^{*n} for a contraction T.

    The monotone-decreasing sequence is driven by power doubling
    (P_{2k} = T^k P_k T^{*k}), stopping when consecutive iterates differ by
    at most psd_tol or the equivalent power count exceeds max_power_iters.
    The limit's eigenvalues are snapped to {0, 1}; a snap distance above
    100 * psd_tol is reported as non-convergence rather than hidden.
    """
    t = as_matrix(t_mat, square=True, name="T")
    n = t.shape[0]
    if _nrm(t) > 1.0 + 10.0 * tol.psd_tol:
        raise PreconditionError(f"||T|| = {_nrm(t):.6f} exceeds 1")
    if n == 0:
        empty = SubspaceBasis(0, np.zeros((0, 0), dtype=complex))
        return QLimit(t.copy(), empty, empty, 0.0, True)
    power = t.copy()
    p_cur = power @ power.conj().T
    diff = math.inf
    steps = 0
    while steps < 64 and (1 << steps) < tol.max_power_iters:
        power = power @ power
        p_next = power @ power.conj().T
        diff = _nrm(p_next - p_cur)
        p_cur = p_next
        steps += 1
        if diff <= tol.psd_tol:
            break
    w, v = np.linalg.eigh(0.5 * (p_cur + p_cur.conj().T))
    deviation = float(np.max(np.minimum(np.abs(w), np.abs(w - 1.0)))) if n else 0.0
    mask = w >= 0.5
    q = (v[:, mask] @ v[:, mask].conj().T) if mask.any() else np.zeros((n, n), dtype=complex)
    carrier = SubspaceBasis(n, v[:, mask])
    complement = SubspaceBasis(n, v[:, ~mask])
    converged = diff <= 100.0 * tol.psd_tol and deviation <= 100.0 * tol.psd_tol
    return QLimit(q, carrier, complement, deviation, converged)


def residual_triple(
    triple: OperatorTriple, tol: Tolerances = DEFAULT_TOL
) -> ResidualTriple:
    """Compress (A, B, T) to the unitary part of T.

    On the carrier of Q the intertwining W* Q = Q T* defines W as the
    compression of T, and likewise for A, B; W must come out unitary (a
    failure means the input was not a tetrablock contraction).  The strict
    flag is set when R, S commute and are contractions.
    """
    ql = compute_Q(triple.t, tol)
    basis = ql.carrier
    rdim = basis.dim
    scale = triple.scale_norm()
    if rdim == 0:
        empty = np.zeros((0, 0), dtype=complex)
        return ResidualTriple(empty, empty, empty, basis, True, {"q_rank": 0.0})
    r = compress(triple.a, basis)
    s = compress(triple.b, basis)
    w = compress(triple.t, basis)
    eye = np.eye(rdim)
    res = {
        "w_isometry": _nrm(w.conj().T @ w - eye),
        "w_coisometry": _nrm(w @ w.conj().T - eye),
        "pc_rw": _nrm(commutator(r, w)),
        "pc_sw": _nrm(commutator(s, w)),
        "pc_r_eq_sstar_w": _nrm(r - s.conj().T @ w),
        "q_deviation": ql.deviation,
    }
    proj = basis.basis @ basis.basis.conj().T
    off = np.eye(triple.dim) - proj
    for name, m in (("a", triple.a), ("b", triple.b)):
        res[f"invariance_{name}"] = _nrm(proj @ m.conj().T @ off)
    bound = tol.eq_tol * scale
    if max(res["w_isometry"], res["w_coisometry"]) > bound:
        raise InconsistentInputError(
            f"residual compression of T is not unitary: {res}"
        )
    strict = (
        _nrm(commutator(r, s)) <= bound
        and _nrm(r) <= 1.0 + tol.eq_tol
        and _nrm(s) <= 1.0 + tol.eq_tol
    )
    return ResidualTriple(r, s, w, basis, strict, res)


def auto_order(
    t_mat, tol: Tolerances = DEFAULT_TOL, target: float = _ORDER_TAIL_TARGET
) -> tuple[int, bool]:
    """Smallest truncation order with tail <= target, capped at 512.

    Returns (order, capped); the cap is reported, not silently absorbed,
    because every model guarantee scales with the tail.
    """
    t = as_matrix(t_mat, square=True, name="T")
    d, _ = defect(t, adjoint=True, tol=tol)
    tstar = t.conj().T
    power = tstar.copy()
    order = 0
    while order < _MAX_ORDER:
        tail = _nrm(d @ power)
        if tail <= target:
            return order, False
        power = power @ tstar
        order += 1
    return _MAX_ORDER, True


def observability_embedding(
    triple: OperatorTriple, n_order: int, tol: Tolerances = DEFAULT_TOL
):
    """Stack the observability blocks over the residual projection.

    Returns (embedding, tail, defect_carrier, q_limit).  The embedding has
    shape ((N+1) d + r, n) and satisfies
    ||Pi* Pi - I|| <= ||T^{N+1}||^2; the tail ||D_{T*} T^{*(N+1)}|| governs
    all lift residuals downstream.
    """
    if n_order < 0:
        raise PreconditionError("truncation order must be nonnegative")
    d_op, d_carrier = defect(triple.t, adjoint=True, tol=tol)
    ql = compute_Q(triple.t, tol)
    n = triple.dim
    dd = d_carrier.dim
    tstar = triple.t.conj().T
    rows = []
    block = d_carrier.basis.conj().T @ d_op  # defect block in carrier coordinates
    power = np.eye(n, dtype=complex)
    for _ in range(n_order + 1):
        rows.append(block @ power)
        power = power @ tstar
    tail = _nrm(d_op @ power)
    bottom = ql.carrier.basis.conj().T
    pi = np.vstack(rows + [bottom]) if (dd or ql.carrier.dim) else np.zeros((0, n))
    return pi, tail, d_carrier, ql


def _block_toeplitz(diag_block: np.ndarray, sub_block: np.ndarray, count: int) -> np.ndarray:
    """Lower-bidiagonal block Toeplitz truncation with given blocks."""
    d = diag_block.shape[0]
    if d == 0 or count == 0:
        return np.zeros((count * d, count * d), dtype=complex)
    eye = np.eye(count)
    sub = np.eye(count, k=-1)
    return np.kron(eye, diag_block) + np.kron(sub, sub_block)


def build_lift(
    triple: OperatorTriple,
    n_order: Optional[int] = None,
    tol: Tolerances = DEFAULT_TOL,
) -> DouglasModel:
    """Assemble the truncated model and its lift triple.

    v3 is the truncated block shift extended by the residual unitary W;
    v1 and v2 are the block-Toeplitz truncations of the multiplication
    operators with symbols G1* + z G2 and G2* + z G1 extended by R and S.
    """
    warnings: list[str] = []
    if n_order is None:
        n_order, capped = auto_order(triple.t, tol)
        if capped:
            warnings.append(
                f"truncation order capped at {_MAX_ORDER}; tail target not met"
            )
    gpair = fundamental_pair(triple, adjoint=True, tol=tol)
    rt = residual_triple(triple, tol)
    pi, tail, d_carrier, _ = observability_embedding(triple, n_order, tol)
    d = d_carrier.dim
    blocks = n_order + 1
    g1, g2 = gpair.x1, gpair.x2

    shift = np.kron(np.eye(blocks, k=-1), np.eye(d)) if d else np.zeros((0, 0))
    v3 = scipy.linalg.block_diag(shift, rt.w)
    v1 = scipy.linalg.block_diag(_block_toeplitz(g1.conj().T, g2, blocks), rt.r)
    v2 = scipy.linalg.block_diag(_block_toeplitz(g2.conj().T, g1, blocks), rt.s)

    gram = pi.conj().T @ pi
    deficiency = _nrm(gram - np.eye(triple.dim))
    power_bound = _nrm(np.linalg.matrix_power(triple.t, n_order + 1)) ** 2
    if deficiency > power_bound + tol.eq_tol:
        raise InternalConsistencyError(
            f"embedding deficiency {deficiency:.3e} exceeds ||T^(N+1)||^2 = "
            f"{power_bound:.3e}"
        )
    return DouglasModel(
        order_n=n_order,
        defect_dim=d,
        g1=g1,
        g2=g2,
        embedding=pi,
        v1=v1,
        v2=v2,
        v3=v3,
        residual=rt,
        tail=tail,
        deficiency=deficiency,
        warnings=warnings,
    )


def verify_lift(
    model: DouglasModel, triple: OperatorTriple, tol: Tolerances = DEFAULT_TOL
) -> dict[str, float]:
    """Intertwining and compression-recovery residuals of a built model.

    Contract: each intertwining residual ||Vi* Pi - Pi Xi*|| is at most
    c * tail + eq_tol with c = 2 (1 + ||G1|| + ||G2||); truncation leaks
    only through the top-degree block.  Compression recovery
    ||Pi* Vi Pi - Xi|| obeys the same bound once the tail is small.
    """
    pi = model.embedding
    out = {}
    for name, v, x in (
        ("a", model.v1, triple.a),
        ("b", model.v2, triple.b),
        ("t", model.v3, triple.t),
    ):
        out[f"intertwine_{name}"] = _nrm(v.conj().T @ pi - pi @ x.conj().T)
        out[f"recover_{name}"] = _nrm(pi.conj().T @ (v @ pi) - x)
    out["bound"] = (
        2.0 * (1.0 + _nrm(model.g1) + _nrm(model.g2)) * model.tail + tol.eq_tol
    )
    return out


def lift_is_strict(model: DouglasModel, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Strictness of the lift: special (G1, G2) and a strict residual part."""
    special, _ = is_special_pair(model.g1, model.g2, tol)
    symbols = symbols_commute(model.g1, model.g2, tol)
    if special != symbols:
        raise InternalConsistencyError("special-pair and symbol tests disagree")
    return special and model.residual.strict


def _defect_carriers(t: np.ndarray, tol: Tolerances):
    d_in, c_in = defect(t, adjoint=False, tol=tol)
    d_out, c_out = defect(t, adjoint=True, tol=tol)
    return d_in, c_in, d_out, c_out


def char_function(
    t_mat,
    z: complex,
    tol: Tolerances = DEFAULT_TOL,
    carriers=None,
) -> np.ndarray:
    """Characteristic function sample Theta(z) : defect(T) -> defect(T*).

    Uses the resolvent form -T + z D_{T*} (I - z T*)^{-1} D_T compressed to
    the defect carriers (for a scalar t this is the Mobius map
    (z - t)/(1 - conj(t) z)).  A singular resolvent raises PoleError.
    """
    t = as_matrix(t_mat, square=True, name="T")
    n = t.shape[0]
    z = complex(z)
    if carriers is None:
        d_in, c_in, d_out, c_out = _defect_carriers(t, tol)
    else:
        d_in, c_in, d_out, c_out = carriers
    pencil = np.eye(n) - z * t.conj().T
    if n:
        small = np.linalg.svd(pencil, compute_uv=False)[-1]
        if small < 1e-12 * (1.0 + abs(z) * _nrm(t)):
            raise PoleError(f"resolvent singular at z = {z}")
        core = -t + z * (d_out @ np.linalg.solve(pencil, d_in))
    else:
        core = t
    return c_out.basis.conj().T @ core @ c_in.basis


def defect_of_theta(
    t_mat, zeta: complex, tol: Tolerances = DEFAULT_TOL
) -> np.ndarray:
    """Boundary defect (I - Theta(zeta)* Theta(zeta))^{1/2} of the sample."""
    theta = char_function(t_mat, zeta, tol)
    return psd_sqrt(np.eye(theta.shape[1]) - theta.conj().T @ theta, tol)


def theta_sample_points(interior: int, boundary: int) -> list[complex]:
    """Sampling grid: z = 0, an interior circle of radius 0.95, and the
    unit circle."""
    pts: list[complex] = [0.0 + 0.0j]
    pts += [0.95 * cmath.exp(2j * cmath.pi * k / interior) for k in range(interior)]
    pts += [cmath.exp(2j * cmath.pi * k / boundary) for k in range(boundary)]
    return pts


def extract_data_set(
    triple: OperatorTriple,
    grid: int,
    tol: Tolerances = DEFAULT_TOL,
    boundary: Optional[int] = None,
) -> TetrablockDataSet:
    """Characteristic data set of a triple, in defect-carrier coordinates.

    The unitary part of T carries the residual triple; Theta and the
    fundamental pair are computed from the completely non-unitary part
    (whose boundary samples are always regular in finite dimensions).
    """
    if grid < 1:
        raise PreconditionError("grid must be positive")
    boundary = 2 * grid if boundary is None else boundary
    rt = residual_triple(triple, tol)
    ql = compute_Q(triple.t, tol)
    if rt.dim:
        comp = ql.complement
        work = OperatorTriple(
            compress(triple.a, comp), compress(triple.b, comp), compress(triple.t, comp)
        )
    else:
        work = triple
    carriers = _defect_carriers(work.t, tol)
    samples = [
        (z, char_function(work.t, z, tol, carriers))
        for z in theta_sample_points(grid, boundary)
    ]
    gpair = fundamental_pair(work, adjoint=True, tol=tol)
    theta0 = samples[0][1]
    pure = theta0.shape[1] == 0 or _nrm(theta0) < 1.0 - tol.eq_tol
    return TetrablockDataSet(samples, gpair.x1, gpair.x2, rt, pure)


def _match_samples(d1: TetrablockDataSet, d2: TetrablockDataSet):
    lookup = {}
    for z, m in d2.theta_samples:
        lookup[(round(z.real, 10), round(z.imag, 10))] = m
    pairs = []
    for z, m in d1.theta_samples:
        key = (round(z.real, 10), round(z.imag, 10))
        if key in lookup:
            pairs.append((m, lookup[key]))
    return pairs


def _polar_unitary(m: np.ndarray) -> np.ndarray:
    u, _, vh = np.linalg.svd(m)
    return u @ vh


def _joint_intertwiner(
    pairs_left: list[tuple[np.ndarray, np.ndarray]],
    seed: int = 7,
) -> Optional[np.ndarray]:
    """Unitary X with X L = L' X for every pair (L, L'), found by nullspace.

    pairs_left contains (L, L') with L on the source space and L' on the
    target space; the homogeneous system is solved by SVD and the best
    candidates are polar-corrected.  Returns None when no near-unitary
    solution emerges.
    """
    if not pairs_left:
        return None
    rows_src = pairs_left[0][0].shape[0]
    rows_dst = pairs_left[0][1].shape[0]
    if rows_src != rows_dst:
        return None
    if rows_src == 0:
        return np.zeros((0, 0), dtype=complex)
    blocks = []
    for left, right in pairs_left:
        blocks.append(np.kron(left.T, np.eye(rows_dst)) - np.kron(np.eye(rows_src), right))
    system = np.vstack(blocks)
    _, svals, vh = np.linalg.svd(system)
    right = vh.conj()  # rows of vh are conjugated right singular vectors
    candidates = [right[-1]]
    null_dim = int(np.sum(svals <= 1e-8 * max(1.0, svals[0]))) if svals.size else 1
    if null_dim > 1:
        rng = np.random.default_rng(seed)
        basis = right[len(svals) - null_dim:]
        for _ in range(8):
            coeffs = rng.standard_normal(null_dim) + 1j * rng.standard_normal(null_dim)
            candidates.append(coeffs @ basis)
    best = None
    best_sigma = -1.0
    for cand in candidates:
        x = cand.reshape(rows_src, rows_src).T  # vec stacking is column-major here
        svx = np.linalg.svd(x, compute_uv=False)
        if svx[0] < 1e-12:
            continue
        ratio = svx[-1] / svx[0]
        if ratio > best_sigma:
            best_sigma = ratio
            best = x
    if best is None or best_sigma < 1e-6:
        return None
    return _polar_unitary(best)


def coincide(
    d1: TetrablockDataSet, d2: TetrablockDataSet, tol: Tolerances = DEFAULT_TOL
) -> CoincidenceReport:
    """Decide coincidence of two data sets up to defect-space unitaries.

    Searches for unitaries (phi, phi_star) intertwining all matched Theta
    samples and the fundamental pairs, and an independent unitary omega
    intertwining the residual triples; all candidates come from a joint
    least-squares nullspace with polar correction and are re-verified.
    A negative verdict carries residuals; residuals between tol and
    sqrt(tol) are flagged undecided.  Residual-space coordinates are only
    determined up to a fixed unitary, so omega is searched, not induced.
    """
    in1, out1 = d1.defect_dims
    in2, out2 = d2.defect_dims
    report = CoincidenceReport(False)
    if (in1, out1) != (in2, out2) or d1.residual.dim != d2.residual.dim:
        report.note = "dimension mismatch"
        return report
    pairs = _match_samples(d1, d2)
    if d1.theta_samples and len(pairs) < min(3, len(d1.theta_samples)):
        report.note = "sample grids do not overlap"
        return report

    scale = 1.0 + max(
        [_nrm(m) for m, _ in pairs]
        + [_nrm(d1.g1), _nrm(d1.g2), _nrm(d2.g1), _nrm(d2.g2)]
        + [0.0]
    )
    bound = tol.eq_tol * scale

    # Defect part: unknowns phi (in2 x in1) and phi_star (out2 x out1).
    phi = phi_star = None
    if in1 == 0 and out1 == 0:
        phi = np.zeros((0, 0), dtype=complex)
        phi_star = np.zeros((0, 0), dtype=complex)
        theta_res = 0.0
        fund_res = 0.0
    else:
        blocks = []
        for m1, m2 in pairs:
            blocks.append(
                np.hstack(
                    [
                        -np.kron(np.eye(in1), m2),  # acts on vec(phi), column-major
                        np.kron(m1.T, np.eye(out2)),  # acts on vec(phi_star)
                    ]
                )
            )
        for g_a, g_b in ((d1.g1, d2.g1), (d1.g2, d2.g2)):
            blocks.append(
                np.hstack(
                    [
                        np.zeros((out2 * out1, in2 * in1)),
                        np.kron(g_a.T, np.eye(out2)) - np.kron(np.eye(out1), g_b),
                    ]
                )
            )
        system = np.vstack(blocks)
        _, svals, vh = np.linalg.svd(system)
        right = vh.conj()  # rows of vh are conjugated right singular vectors
        candidates = [right[-1]]
        if svals.size:
            null_dim = int(np.sum(svals <= 1e-7 * max(1.0, svals[0])))
            if null_dim > 1:
                rng = np.random.default_rng(11)
                basis = right[len(svals) - null_dim:]
                for _ in range(8):
                    c = rng.standard_normal(null_dim) + 1j * rng.standard_normal(null_dim)
                    candidates.append(c @ basis)
        theta_res = math.inf
        fund_res = math.inf
        for cand in candidates:
            phi_c = cand[: in2 * in1].reshape(in1, in2).T
            star_c = cand[in2 * in1:].reshape(out1, out2).T
            if min(phi_c.shape) and np.linalg.svd(phi_c, compute_uv=False)[-1] < 1e-8:
                continue
            if min(star_c.shape) and np.linalg.svd(star_c, compute_uv=False)[-1] < 1e-8:
                continue
            phi_c = _polar_unitary(phi_c) if min(phi_c.shape) else phi_c
            star_c = _polar_unitary(star_c) if min(star_c.shape) else star_c
            t_res = max(
                (_nrm(star_c @ m1 - m2 @ phi_c) for m1, m2 in pairs), default=0.0
            )
            f_res = max(
                _nrm(star_c @ d1.g1 - d2.g1 @ star_c),
                _nrm(star_c @ d1.g2 - d2.g2 @ star_c),
            )
            if max(t_res, f_res) < max(theta_res, fund_res):
                theta_res, fund_res = t_res, f_res
                phi, phi_star = phi_c, star_c

    report.residuals["theta"] = theta_res
    report.residuals["fundamental"] = fund_res

    omega = _joint_intertwiner(
        [
            (d1.residual.r, d2.residual.r),
            (d1.residual.s, d2.residual.s),
            (d1.residual.w, d2.residual.w),
        ]
    )
    if omega is None and d1.residual.dim:
        report.residuals["residual"] = math.inf
        report.note = "no unitary intertwines the residual triples"
        return report
    res_res = 0.0
    if d1.residual.dim:
        res_res = max(
            _nrm(omega @ d1.residual.r - d2.residual.r @ omega),
            _nrm(omega @ d1.residual.s - d2.residual.s @ omega),
            _nrm(omega @ d1.residual.w - d2.residual.w @ omega),
        )
    report.residuals["residual"] = res_res

    worst = max(theta_res, fund_res, res_res)
    report.phi, report.phi_star, report.omega = phi, phi_star, omega
    if worst <= bound:
        report.coincide = True
    elif worst <= math.sqrt(tol.eq_tol) * scale:
        report.undecided = True
        report.note = "residuals between tol and sqrt(tol); verdict unreliable"
    return report


def _boundary_grid(d: TetrablockDataSet, modes: int):
    """Extract the 2*modes equispaced boundary samples, sorted by angle."""
    m = 2 * modes
    boundary = [
        (z, mat) for z, mat in d.theta_samples if abs(abs(z) - 1.0) <= 1e-9
    ]
    if len(boundary) < m:
        raise PreconditionError(
            f"need {m} boundary samples for {modes} Fourier modes, "
            f"found {len(boundary)}"
        )
    boundary.sort(key=lambda p: cmath.phase(p[0]) % (2.0 * math.pi))
    if len(boundary) != m:
        raise PreconditionError(
            f"boundary grid must be exactly 2*fourier_modes = {m} points"
        )
    for j, (z, _) in enumerate(boundary):
        want = cmath.exp(2j * math.pi * j / m)
        if abs(z - want) > 1e-8:
            raise PreconditionError("boundary samples are not an equispaced grid")
    return boundary


def validate_special_data_set(
    d: TetrablockDataSet, fourier_modes: int, tol: Tolerances = DEFAULT_TOL
) -> dict:
    """Check the two defining conditions of a special data set.

    (i) the pair (G1, G2) commutes, balances its self-commutators and has
    a contractive pencil; (ii) the graph of [Theta; D_Theta] over analytic
    polynomials of degree <= fourier_modes is invariant under the three
    lift operators, measured against the graph enlarged by one guard mode
    (a degree-1 pencil raises the mode index by at most one, so leakage is
    fully visible there).
    """
    special, special_res = is_special_pair(d.g1, d.g2, tol)
    pencil_ok, pencil_sup = pencil_contractive(d.g1, d.g2, tol)
    passes_i = special and pencil_ok

    boundary = _boundary_grid(d, fourier_modes)
    m = len(boundary)
    din, dout = d.defect_dims
    zs = np.array([z for z, _ in boundary])
    thetas = np.stack([mat for _, mat in boundary]) if din else np.zeros((m, dout, 0))

    # Per-point defect carriers; their total dimension must match the
    # residual carrier, which is ordered grid-major by convention.  Ranks
    # are decided on the eigenvalues of I - Theta*Theta at unit scale, so
    # inner samples contribute nothing.
    deltas = []
    carriers = []
    total_rank = 0
    for j in range(m):
        herm = np.eye(din) - thetas[j].conj().T @ thetas[j]
        w, v = np.linalg.eigh(0.5 * (herm + herm.conj().T))
        keep = w > tol.psd_tol * 2.0
        w = np.where(keep, w, 0.0)
        delta = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
        basis = SubspaceBasis(din, v[:, keep])
        deltas.append(delta)
        carriers.append(basis)
        total_rank += basis.dim
    if d.residual.dim != total_rank:
        raise PreconditionError(
            f"residual carrier dim {d.residual.dim} does not match boundary "
            f"defect rank {total_rank}"
        )

    def graph_vector(k: int, i: int) -> np.ndarray:
        top = (zs**k)[:, None] * thetas[:, :, i]
        parts = [top.ravel() / math.sqrt(m)]
        for j in range(m):
            if carriers[j].dim:
                comp = carriers[j].basis.conj().T @ (deltas[j][:, i] * zs[j] ** k)
                parts.append(comp / math.sqrt(m))
        return np.concatenate(parts) if parts else np.zeros(0, dtype=complex)

    if din == 0:
        return {
            "passes_i": passes_i,
            "passes_ii": True,
            "passes": passes_i,
            "pencil_sup": pencil_sup,
            "invariance_residual": 0.0,
            "residuals": special_res,
        }

    def basis_matrix(k_max: int) -> np.ndarray:
        cols = [graph_vector(k, i) for k in range(k_max + 1) for i in range(din)]
        mat = np.stack(cols, axis=1)
        q, _ = np.linalg.qr(mat)
        return q

    graph_cols = basis_matrix(fourier_modes)
    enlarged = basis_matrix(fourier_modes + 1)

    bottom_offsets = []
    off = m * dout
    for j in range(m):
        bottom_offsets.append(off)
        off += carriers[j].dim

    def apply_op(vec: np.ndarray, top_sym, bottom_mat: np.ndarray) -> np.ndarray:
        out = vec.copy()
        top = vec[: m * dout].reshape(m, dout)
        out_top = np.einsum("jab,jb->ja", top_sym, top)
        out[: m * dout] = out_top.ravel()
        if total_rank:
            comp = vec[m * dout:]
            out[m * dout:] = bottom_mat @ comp
        return out

    eye_out = np.eye(dout)
    sym_t = zs[:, None, None] * eye_out[None, :, :]
    sym_a = d.g1.conj().T[None, :, :] + zs[:, None, None] * d.g2[None, :, :]
    sym_b = d.g2.conj().T[None, :, :] + zs[:, None, None] * d.g1[None, :, :]
    w_empty = np.zeros((0, 0), dtype=complex)
    ops = [
        (sym_a, d.residual.r if total_rank else w_empty),
        (sym_b, d.residual.s if total_rank else w_empty),
        (sym_t, d.residual.w if total_rank else w_empty),
    ]
    worst = 0.0
    for sym, bottom in ops:
        for col in range(graph_cols.shape[1]):
            image = apply_op(graph_cols[:, col], sym, bottom)
            leak = image - enlarged @ (enlarged.conj().T @ image)
            worst = max(worst, float(np.linalg.norm(leak)))

    scale = 1.0 + max(_nrm(d.g1), _nrm(d.g2), 1.0)
    passes_ii = worst <= 100.0 * tol.eq_tol * scale
    return {
        "passes_i": passes_i,
        "passes_ii": passes_ii,
        "passes": passes_i and passes_ii,
        "pencil_sup": pencil_sup,
        "invariance_residual": worst,
        "residuals": special_res,
    }


def omega_tau(
    triple: OperatorTriple,
    triple2: OperatorTriple,
    tau,
    tol: Tolerances = DEFAULT_TOL,
) -> np.ndarray:
    """Residual-space unitary induced by an intertwiner of two triples.

    Given tau with tau (A, B, T) = (A', B', T') tau, maps W^n Q h to
    W'^n Q' tau h, orthonormalizes over a spanning set, and verifies the
    result is unitary and intertwines the residual triples.
    """
    tau = as_matrix(tau, square=True, name="tau")
    scale = triple.scale_norm()
    eye = np.eye(tau.shape[0])
    if _nrm(tau.conj().T @ tau - eye) > 10.0 * tol.eq_tol:
        raise PreconditionError("tau must be unitary")
    for name, m1, m2 in (
        ("a", triple.a, triple2.a),
        ("b", triple.b, triple2.b),
        ("t", triple.t, triple2.t),
    ):
        res = _nrm(tau @ m1 - m2 @ tau)
        if res > 10.0 * tol.eq_tol * scale:
            raise PreconditionError(
                f"tau does not intertwine component {name} (residual {res:.3e})"
            )
    rt1 = residual_triple(triple, tol)
    rt2 = residual_triple(triple2, tol)
    if rt1.dim != rt2.dim:
        raise InconsistentInputError(
            f"residual dimensions differ: {rt1.dim} vs {rt2.dim}"
        )
    r = rt1.dim
    if r == 0:
        return np.zeros((0, 0), dtype=complex)
    src_cols = []
    dst_cols = []
    base1 = rt1.carrier.basis.conj().T
    base2 = rt2.carrier.basis.conj().T @ tau
    w_pow1 = np.eye(r, dtype=complex)
    w_pow2 = np.eye(r, dtype=complex)
    for _ in range(r + 1):
        src_cols.append(w_pow1 @ base1)
        dst_cols.append(w_pow2 @ base2)
        w_pow1 = rt1.w @ w_pow1
        w_pow2 = rt2.w @ w_pow2
    x = np.hstack(src_cols)
    y = np.hstack(dst_cols)
    omega = _polar_unitary(y @ np.linalg.pinv(x))
    bound = 100.0 * tol.eq_tol * scale
    defining = _nrm(omega @ x - y)
    res = {
        "defining": defining,
        "r": _nrm(omega @ rt1.r - rt2.r @ omega),
        "s": _nrm(omega @ rt1.s - rt2.s @ omega),
        "w": _nrm(omega @ rt1.w - rt2.w @ omega),
    }
    if max(res.values()) > bound:
        raise InternalConsistencyError(
            f"omega_tau failed to intertwine the residual triples: {res}"
        )
    return omega


def kernel_model_triple(
    zeros: Sequence[complex], g1: complex, g2: complex
) -> OperatorTriple:
    """Model triple of a scalar inner function with the given zeros.

    The complement of Theta H^2 in H^2 for a finite Blaschke product is
    spanned by the reproducing kernels at the zeros; the compressed shift
    is computed exactly in that basis (Gram matrix 1/(1 - conj(a_j) a_i)),
    and the pencil compressions are ``conj(g1) I + g2 T`` and
    ``conj(g2) I + g1 T`` because compression is linear in a degree-one
    symbol.
    """
    alphas = np.asarray(list(zeros), dtype=complex)
    q = alphas.size
    if q == 0:
        raise PreconditionError("need at least one zero")
    if np.any(np.abs(alphas) >= 1.0):
        raise PreconditionError("zeros must lie in the open unit disk")
    gram = 1.0 / (1.0 - np.conj(alphas)[None, :] * alphas[:, None])
    # T* is diagonal in the kernel basis; move it to orthonormal coordinates.
    sqrt_g = psd_sqrt(gram)
    inv_sqrt = np.linalg.inv(sqrt_g)
    t_star = sqrt_g @ np.diag(np.conj(alphas)) @ inv_sqrt
    t = t_star.conj().T
    a = np.conj(g1) * np.eye(q) + g2 * t
    b = np.conj(g2) * np.eye(q) + g1 * t
    return OperatorTriple(a, b, t)
