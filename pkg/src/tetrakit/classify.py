"""Classification of commuting (and pseudo-commuting) operator triples.

Covers the algebraic classes attached to the tetrablock: unitaries and
isometries (A = B*T with T isometric and B contractive), their
pseudo-commutative relaxations (A, B commute with T but not necessarily
with each other), a one-sided necessary-condition certifier for tetrablock
contractions, and the canonical splitting into a unitary and a completely
non-unitary part.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import geometry
from .errors import DimensionError, NotCommutingError
from .matkernel import (
    DEFAULT_TOL,
    SubspaceBasis,
    Tolerances,
    as_matrix,
    commutator,
    compress,
    joint_eigenvalues,
)
from .matkernel import _norm_or_zero as _nrm

__all__ = [
    "OperatorTriple",
    "Certificate",
    "ClassificationReport",
    "DecompositionResult",
    "is_commuting",
    "check_e_isometry",
    "check_pc",
    "certify_e_contraction",
    "classify_triple",
    "canonical_decomposition",
]


@dataclass(frozen=True)
class OperatorTriple:
    """Ordered triple (A, B, T) of equal-size square complex matrices.

    Commutativity is not an invariant; the pseudo-commutative classes
    deliberately relax it.
    """

    a: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)
    t: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = as_matrix(self.a, square=True, name="A")
        b = as_matrix(self.b, square=True, name="B")
        t = as_matrix(self.t, square=True, name="T")
        if not (a.shape == b.shape == t.shape):
            raise DimensionError("triple members must share one size")
        for name, m in (("a", a), ("b", b), ("t", t)):
            m = m.copy()
            m.setflags(write=False)
            object.__setattr__(self, name, m)

    @property
    def dim(self) -> int:
        return self.a.shape[0]

    def adjoint(self) -> "OperatorTriple":
        return OperatorTriple(self.a.conj().T, self.b.conj().T, self.t.conj().T)

    def swapped(self) -> "OperatorTriple":
        return OperatorTriple(self.b, self.a, self.t)

    def conjugate_by(self, u: np.ndarray) -> "OperatorTriple":
        u = as_matrix(u, square=True, name="U")
        uh = u.conj().T
        return OperatorTriple(u @ self.a @ uh, u @ self.b @ uh, u @ self.t @ uh)

    def scale_norm(self) -> float:
        return 1.0 + max(_nrm(self.a), _nrm(self.b), _nrm(self.t))


class Certificate(enum.Enum):
    """Outcome of the necessary-condition certifier.

    There is deliberately no "certified yes": no finite procedure decides
    the spectral-set property, so the strongest positive verdict is that
    every necessary condition passed.
    """

    CERTIFIED_NOT = "CertifiedNot"
    PASSED_NECESSARY = "PassedNecessary"


@dataclass
class ClassificationReport:
    commuting: bool
    e_unitary: bool
    e_isometry: bool
    pc_isometry: bool
    pc_unitary: bool
    semi_strict: Optional[bool]
    contraction_certificate: Certificate
    residuals: dict[str, float]
    failed_checks: list[str] = field(default_factory=list)

    def __post_init__(self):
        assert not self.e_unitary or self.e_isometry
        assert not self.e_isometry or self.pc_isometry
        assert not self.e_unitary or self.pc_unitary


@dataclass
class DecompositionResult:
    h_u: SubspaceBasis
    h_cnu: SubspaceBasis
    unitary_part: OperatorTriple
    cnu_part: OperatorTriple
    residuals: dict[str, float]


def is_commuting(
    triple: OperatorTriple, tol: Tolerances = DEFAULT_TOL
) -> tuple[bool, dict[str, float]]:
    """Pairwise commutativity of (A, B, T) within eq_tol * (1 + max norm)."""
    res = {
        "comm_ab": _nrm(commutator(triple.a, triple.b)),
        "comm_at": _nrm(commutator(triple.a, triple.t)),
        "comm_bt": _nrm(commutator(triple.b, triple.t)),
    }
    bound = tol.eq_tol * triple.scale_norm()
    return all(v <= bound for v in res.values()), res


def check_e_isometry(
    triple: OperatorTriple, tol: Tolerances = DEFAULT_TOL
) -> dict:
    """Test the tetrablock isometry/unitary criteria.

    Isometry: the triple commutes, A = B*T, B is a contraction and T is an
    isometry; unitary additionally requires T to be co-isometric.  The
    equivalent formulation B = A*T with A contractive is evaluated as well
    and disagreement is reported rather than resolved.
    """
    n = triple.dim
    eye = np.eye(n)
    commuting, comm_res = is_commuting(triple, tol)
    bound = tol.eq_tol * triple.scale_norm()
    res = dict(comm_res)
    res["a_minus_bstar_t"] = _nrm(triple.a - triple.b.conj().T @ triple.t)
    res["b_minus_astar_t"] = _nrm(triple.b - triple.a.conj().T @ triple.t)
    res["isometry_t"] = _nrm(triple.t.conj().T @ triple.t - eye)
    res["coisometry_t"] = _nrm(triple.t @ triple.t.conj().T - eye)
    norm_a = _nrm(triple.a)
    norm_b = _nrm(triple.b)

    t_isometry = res["isometry_t"] <= bound
    t_unitary = t_isometry and res["coisometry_t"] <= bound
    via_iii = (
        commuting
        and res["a_minus_bstar_t"] <= bound
        and norm_b <= 1.0 + tol.eq_tol
        and t_isometry
    )
    via_iv = (
        commuting
        and res["b_minus_astar_t"] <= bound
        and norm_a <= 1.0 + tol.eq_tol
        and t_isometry
    )
    return {
        "e_isometry": via_iii,
        "e_unitary": via_iii and t_unitary,
        "forms_agree": via_iii == via_iv,
        "residuals": res,
    }


def check_pc(triple: OperatorTriple, tol: Tolerances = DEFAULT_TOL) -> dict:
    """Test the pseudo-commutative isometry/unitary criteria.

    Requires T isometric, A and B commuting with T, and A = B*T; the
    equivalent formulation B = A*T is cross-checked.  For the unitary case
    the identities A*A = BB* and AA* = B*B are verified as a consistency
    check.
    """
    n = triple.dim
    eye = np.eye(n)
    bound = tol.eq_tol * triple.scale_norm()
    res = {
        "comm_at": _nrm(commutator(triple.a, triple.t)),
        "comm_bt": _nrm(commutator(triple.b, triple.t)),
        "a_minus_bstar_t": _nrm(triple.a - triple.b.conj().T @ triple.t),
        "b_minus_astar_t": _nrm(triple.b - triple.a.conj().T @ triple.t),
        "isometry_t": _nrm(triple.t.conj().T @ triple.t - eye),
        "coisometry_t": _nrm(triple.t @ triple.t.conj().T - eye),
    }
    pc_iso_1 = (
        res["isometry_t"] <= bound
        and res["comm_at"] <= bound
        and res["comm_bt"] <= bound
        and res["a_minus_bstar_t"] <= bound
    )
    pc_iso_2 = (
        res["isometry_t"] <= bound
        and res["comm_at"] <= bound
        and res["comm_bt"] <= bound
        and res["b_minus_astar_t"] <= bound
    )
    pc_unitary = pc_iso_1 and res["coisometry_t"] <= bound
    if pc_unitary:
        res["pc_identity_1"] = _nrm(
            triple.a.conj().T @ triple.a - triple.b @ triple.b.conj().T
        )
        res["pc_identity_2"] = _nrm(
            triple.a @ triple.a.conj().T - triple.b.conj().T @ triple.b
        )
        pc_unitary = res["pc_identity_1"] <= bound and res["pc_identity_2"] <= bound
    return {
        "pc_isometry": pc_iso_1,
        "pc_unitary": pc_unitary,
        "forms_agree": pc_iso_1 == pc_iso_2,
        "residuals": res,
    }


def _random_polynomials(rng: np.random.Generator, count: int):
    """Random 3-variable polynomials of total degree <= 3 as coefficient maps."""
    exponents = [
        (i, j, k)
        for i, j, k in itertools.product(range(4), repeat=3)
        if i + j + k <= 3
    ]
    polys = []
    for _ in range(count):
        coeffs = rng.standard_normal(len(exponents)) + 1j * rng.standard_normal(
            len(exponents)
        )
        polys.append(list(zip(exponents, coeffs)))
    return polys


def _poly_on_matrices(poly, powers_a, powers_b, powers_t) -> np.ndarray:
    n = powers_a[0].shape[0]
    acc = np.zeros((n, n), dtype=complex)
    for (i, j, k), c in poly:
        acc += c * (powers_a[i] @ powers_b[j] @ powers_t[k])
    return acc


def _poly_on_points(poly, pts: np.ndarray) -> np.ndarray:
    acc = np.zeros(pts.shape[0], dtype=complex)
    for (i, j, k), c in poly:
        acc += c * pts[:, 0] ** i * pts[:, 1] ** j * pts[:, 2] ** k
    return acc


def certify_e_contraction(
    triple: OperatorTriple,
    tol: Tolerances = DEFAULT_TOL,
    mc_samples: int = 64,
    seed: int = 0,
    boundary_samples: int = 2048,
) -> dict:
    """One-sided certifier for the tetrablock-contraction property.

    Returns CERTIFIED_NOT as soon as any necessary condition fails:

      (a) pairwise commutativity;
      (b) ||A||, ||B||, ||T|| <= 1 + eq_tol;
      (c) contractivity of the operator Mobius maps (A - zT)(I - zB)^{-1}
          and the swapped variant on circles of radius 0.9, 0.99 and 1
          (unit-circle points with numerically singular I - zB are skipped);
      (d) every joint eigenvalue tuple lies in the closed tetrablock;
      (e) a randomized polynomial von Neumann test of total degree <= 3
          against a sampled distinguished-boundary supremum augmented with
          the joint eigenvalue tuples, with an additive margin
          10 * eq_tol * (coefficient mass).

    Passing everything yields PASSED_NECESSARY, never a certified yes.
    """
    residuals: dict[str, float] = {}
    failed: list[str] = []
    n = triple.dim
    eye = np.eye(n)

    commuting, comm_res = is_commuting(triple, tol)
    residuals.update(comm_res)
    if not commuting:
        failed.append("commutativity")

    norms = {"norm_a": _nrm(triple.a), "norm_b": _nrm(triple.b), "norm_t": _nrm(triple.t)}
    residuals.update(norms)
    if any(v > 1.0 + tol.eq_tol for v in norms.values()):
        failed.append("norm_bound")

    if commuting:
        worst = 0.0
        for radius in (0.9, 0.99, 1.0):
            count = max(tol.grid_points // 4, 64)
            for k in range(count):
                z = radius * np.exp(2j * np.pi * k / count)
                for first, second in ((triple.a, triple.b), (triple.b, triple.a)):
                    pencil = eye - z * second
                    small = np.linalg.svd(pencil, compute_uv=False)[-1]
                    if small < 1e-8 * (1.0 + _nrm(second)):
                        continue
                    val = _nrm(np.linalg.solve(pencil.T, (first - z * triple.t).T).T)
                    worst = max(worst, val)
        residuals["mobius_sup"] = worst
        if worst > 1.0 + 100.0 * tol.eq_tol:
            failed.append("mobius_contractivity")

        try:
            tuples = joint_eigenvalues([triple.a, triple.b, triple.t], tol)
        except NotCommutingError:
            tuples = []
            failed.append("joint_spectrum")
        spectrum_margin = 0.0
        for tup in tuples:
            verdict = geometry.in_tetrablock(geometry.Point3(*tup), tol)
            if not verdict.in_closure:
                failed.append("joint_spectrum")
            gap = max(verdict.sup_psi_ab, verdict.sup_psi_ba) - 1.0
            spectrum_margin = max(spectrum_margin, gap)
        residuals["joint_spectrum_excess"] = max(spectrum_margin, 0.0)

        if "norm_bound" not in failed and tuples:
            rng = np.random.default_rng(seed)
            b_pts = geometry.sample_bE(boundary_samples, seed + 1)
            pts = np.array(
                [[q.a, q.b, q.t] for q in b_pts]
                + [list(tup) for tup in tuples if
                   geometry.in_tetrablock(geometry.Point3(*tup), tol).in_closure],
                dtype=complex,
            )
            powers_a = [np.linalg.matrix_power(triple.a, i) for i in range(4)]
            powers_b = [np.linalg.matrix_power(triple.b, i) for i in range(4)]
            powers_t = [np.linalg.matrix_power(triple.t, i) for i in range(4)]
            worst_violation = 0.0
            for poly in _random_polynomials(rng, mc_samples):
                mass = sum(abs(c) for _, c in poly)
                op_norm = _nrm(_poly_on_matrices(poly, powers_a, powers_b, powers_t))
                sup = float(np.max(np.abs(_poly_on_points(poly, pts))))
                violation = op_norm - sup - 10.0 * tol.eq_tol * mass
                worst_violation = max(worst_violation, violation)
            residuals["von_neumann_excess"] = max(worst_violation, 0.0)
            if worst_violation > 0.0:
                failed.append("von_neumann")

    failed = list(dict.fromkeys(failed))
    certificate = Certificate.CERTIFIED_NOT if failed else Certificate.PASSED_NECESSARY
    return {"certificate": certificate, "residuals": residuals, "failed": failed}


def classify_triple(
    triple: OperatorTriple,
    tol: Tolerances = DEFAULT_TOL,
    mc_samples: int = 64,
    seed: int = 0,
) -> ClassificationReport:
    """Run every classification check and assemble one report.

    semi_strict is None for raw triples: deciding it requires the Wold
    split of a model-built lift, so it is only meaningful for triples that
    come out of the model machinery.
    """
    commuting, comm_res = is_commuting(triple, tol)
    iso = check_e_isometry(triple, tol)
    pc = check_pc(triple, tol)
    cert = certify_e_contraction(triple, tol, mc_samples=mc_samples, seed=seed)
    residuals = dict(comm_res)
    residuals.update({f"iso_{k}": v for k, v in iso["residuals"].items()})
    residuals.update({f"pc_{k}": v for k, v in pc["residuals"].items()})
    residuals.update({f"cert_{k}": v for k, v in cert["residuals"].items()})
    return ClassificationReport(
        commuting=commuting,
        e_unitary=iso["e_unitary"],
        e_isometry=iso["e_isometry"],
        pc_isometry=pc["pc_isometry"],
        pc_unitary=pc["pc_unitary"],
        semi_strict=None,
        contraction_certificate=cert["certificate"],
        residuals=residuals,
        failed_checks=cert["failed"],
    )


def canonical_decomposition(
    triple: OperatorTriple, tol: Tolerances = DEFAULT_TOL
) -> DecompositionResult:
    """Split the space into the maximal T-unitary part and its complement.

    H_u is computed as the joint kernel of I - T^{*k} T^k and
    I - T^k T^{*k} for k = 1..n (stabilization is guaranteed at the
    dimension).  For genuine tetrablock contractions this subspace reduces
    A and B as well; the reduction residuals are reported, not assumed.
    """
    n = triple.dim
    eye = np.eye(n)
    blocks = []
    tk = eye
    for _ in range(n):
        tk = tk @ triple.t
        blocks.append(eye - tk.conj().T @ tk)
        blocks.append(eye - tk @ tk.conj().T)
    stacked = np.vstack(blocks) if blocks else np.zeros((0, n))
    if stacked.shape[0] == 0 or n == 0:
        u_basis = np.eye(n, dtype=complex)
        c_basis = np.zeros((n, 0), dtype=complex)
    else:
        _, s, vh = np.linalg.svd(stacked)
        cutoff = tol.psd_tol * max(1.0, s[0] if s.size else 0.0)
        rank = int(np.sum(s > cutoff))
        right = vh.conj().T
        u_basis = right[:, rank:]
        c_basis = right[:, :rank]
    h_u = SubspaceBasis(n, u_basis)
    h_cnu = SubspaceBasis(n, c_basis)

    unitary_part = OperatorTriple(
        compress(triple.a, h_u), compress(triple.b, h_u), compress(triple.t, h_u)
    )
    cnu_part = OperatorTriple(
        compress(triple.a, h_cnu), compress(triple.b, h_cnu), compress(triple.t, h_cnu)
    )

    residuals: dict[str, float] = {}
    if h_u.dim:
        tu = unitary_part.t
        eye_u = np.eye(h_u.dim)
        residuals["t_unitary_on_hu"] = max(
            _nrm(tu.conj().T @ tu - eye_u), _nrm(tu @ tu.conj().T - eye_u)
        )
    else:
        residuals["t_unitary_on_hu"] = 0.0
    # Off-diagonal blocks measure failure of H_u to reduce each operator.
    for name, m in (("a", triple.a), ("b", triple.b), ("t", triple.t)):
        if h_u.dim and h_cnu.dim:
            off1 = h_cnu.basis.conj().T @ m @ h_u.basis
            off2 = h_u.basis.conj().T @ m @ h_cnu.basis
            residuals[f"reduce_{name}"] = max(_nrm(off1), _nrm(off2))
        else:
            residuals[f"reduce_{name}"] = 0.0
    return DecompositionResult(h_u, h_cnu, unitary_part, cnu_part, residuals)
