"""Affine slice models and the exact-containment test.

A ``CompressionModel`` is an affine slice x0 + range(U) of the ambient space,
with U's columns the directions appended so far and cached orthonormal bases
Q (for range(U)) and Qperp (for its complement).  The central operation is
``contains_optimal_face``: decide whether the full optimal face of (p, c)
lies inside the slice, and if not, produce a vertex of the face that sticks
out.  Exactness of a slice for cost c means exactly this containment, so a
reduced LP over the slice reproduces the full optimal value and a subset of
its optimizers, vertices included.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lp_core import (
    DEFAULT_TOL,
    InternalError,
    Polytope,
    SolveResult,
    SolveStatus,
    ToleranceSet,
    solve_lp,
    solve_on_optimal_face,
)
from . import linalg

__all__ = [
    "RankError",
    "CompressionModel",
    "ContainmentResult",
    "in_range",
    "append_direction",
    "contains_optimal_face",
    "check_exact",
    "build_reduced_lp",
    "lift",
    "solve_via_compression",
    "model_to_json",
    "model_from_json",
]


class RankError(ValueError):
    """Attempted to append a direction already inside the slice."""


def _ro(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(np.asarray(a, dtype=float))
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class CompressionModel:
    """Affine slice x0 + range(U) with cached orthonormal complements.

    Invariants: U has full column rank; Q is an orthonormal basis of
    range(U) and Qperp of its orthogonal complement (both produced by the
    deterministic Gram-Schmidt in :mod:`lpslice.linalg`, so equal inputs give
    bitwise equal models).  Instances are frozen; mutation goes through
    ``append_direction`` which returns a new model.
    """

    x0: np.ndarray
    U: np.ndarray
    Q: np.ndarray
    Qperp: np.ndarray
    tol: ToleranceSet = DEFAULT_TOL
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "x0", _ro(self.x0))
        object.__setattr__(self, "U", _ro(self.U))
        object.__setattr__(self, "Q", _ro(self.Q))
        object.__setattr__(self, "Qperp", _ro(self.Qperp))
        d = self.x0.shape[0]
        if self.U.ndim != 2 or self.U.shape[0] != d:
            raise ValueError("U must be d x r")
        if self.Q.shape != self.U.shape or self.Qperp.shape != (d, d - self.U.shape[1]):
            raise ValueError("cached bases have inconsistent shapes")
        if not (linalg.check_orthonormal(self.Q) and linalg.check_orthonormal(self.Qperp)):
            raise ValueError("cached bases are not orthonormal")

    @property
    def d(self) -> int:
        return self.x0.shape[0]

    @property
    def rank(self) -> int:
        return self.U.shape[1]

    @classmethod
    def empty(cls, x0: np.ndarray, tol: ToleranceSet = DEFAULT_TOL, provenance: dict | None = None):
        """Rank-0 model anchored at x0 (the slice is the single point x0)."""
        x0 = np.asarray(x0, dtype=float)
        d = x0.shape[0]
        U = np.zeros((d, 0))
        return cls(x0, U, np.zeros((d, 0)), np.eye(d), tol, provenance or {})

    @classmethod
    def create(cls, x0: np.ndarray, U: np.ndarray, tol: ToleranceSet = DEFAULT_TOL, provenance: dict | None = None):
        """Build a model from raw directions, recomputing the cached bases.

        Raises ValueError if U is column-rank-deficient at tolerance tau_rank.
        """
        x0 = np.asarray(x0, dtype=float)
        U = np.asarray(U, dtype=float)
        Q = linalg.orthonormal_columns(U, rank_tol=tol.tau_rank)
        if Q.shape[1] != U.shape[1]:
            raise ValueError("U does not have full column rank")
        return cls(x0, U, Q, linalg.complete_basis(Q), tol, provenance or {})


@dataclass(frozen=True)
class ContainmentResult:
    """Outcome of a face-containment test.

    When ``contained`` is False, ``witness`` is a vertex of the optimal face
    (hence of X) outside the slice, and ``functional_index`` is the index of
    the violated column of Qperp.
    """

    contained: bool
    witness: np.ndarray | None = None
    functional_index: int | None = None


def in_range(model: CompressionModel, w: np.ndarray) -> bool:
    """Is w in range(U)?  ||Qperp^T w|| <= tau_range * (1 + ||w||)."""
    w = np.asarray(w, dtype=float)
    if w.shape != (model.d,):
        raise ValueError("direction has wrong dimension")
    if model.rank == model.d:
        return True
    resid = float(np.linalg.norm(model.Qperp.T @ w))
    return resid <= model.tol.tau_range * (1.0 + float(np.linalg.norm(w)))


def append_direction(model: CompressionModel, x: np.ndarray) -> CompressionModel:
    """New model whose slice also spans x - x0.

    Precondition: x - x0 is outside the current range (RankError otherwise).
    The first rank(U) columns of the new Q equal the old Q bitwise, which is
    what makes replays of the learner reproduce models exactly.
    """
    x = np.asarray(x, dtype=float)
    w = x - model.x0
    if in_range(model, w):
        raise RankError("direction already lies in the slice")
    try:
        Q = linalg.append_orthonormal(model.Q, w, rank_tol=model.tol.tau_rank)
    except ValueError as e:  # between tau_rank and tau_range: treat as rank failure
        raise RankError(str(e)) from e
    U = np.column_stack([model.U, w])
    return CompressionModel(model.x0, U, Q, linalg.complete_basis(Q), model.tol, dict(model.provenance))


def contains_optimal_face(
    model: CompressionModel,
    p: Polytope,
    c: np.ndarray,
    shortcut: bool = True,
) -> ContainmentResult:
    """Does the slice contain the whole optimal face of min c.x over X?

    One full solve gives the value v; then for each complement functional
    a_j (column of Qperp, in index order) the face maximum and minimum of
    a_j . (x - x0) must vanish to tolerance tau_contain * (1 + ||x0||); the
    first violation returns that face vertex as witness.  When the full
    solve's terminal basis has d rows with strictly positive multipliers the
    face is provably the single returned vertex (strict complementarity), so
    with ``shortcut`` enabled the functionals are evaluated on it directly,
    skipping the auxiliary solves.  The auxiliary route works on the
    eps_face-thickened face, so on badly conditioned geometry (an edge
    leaving the optimum nearly orthogonal to c) it can conservatively report
    a violation the certified-singleton route does not; a True from it
    always implies a True from the shortcut, never the reverse.
    """
    tol = model.tol
    c = np.asarray(c, dtype=float)
    if p.d != model.d:
        raise ValueError("model and polytope dimensions differ")
    res = solve_lp(p, c, tol)
    if res.status is not SolveStatus.OPTIMAL:
        raise ValueError(f"containment requires a feasible bounded LP, got {res.status.value}")
    if model.rank == model.d:
        return ContainmentResult(True)
    tau = tol.tau_contain * (1.0 + float(np.linalg.norm(model.x0)))

    if shortcut and res.basis_id is not None and len(res.basis_id) == model.d:
        lam = res.y[list(res.basis_id)]
        if float(np.min(lam)) > 1e-7 * (1.0 + float(np.max(np.abs(res.y)))):
            t = model.Qperp.T @ (res.x - model.x0)
            bad = np.flatnonzero(np.abs(t) > tau)
            if bad.size:
                return ContainmentResult(False, res.x, int(bad[0]))
            return ContainmentResult(True)

    for j in range(model.Qperp.shape[1]):
        a = model.Qperp[:, j]
        base = float(a @ model.x0)
        for sense in ("max", "min"):
            fr = solve_on_optimal_face(p, c, res.value, a, sense, tol)
            if fr.status is not SolveStatus.OPTIMAL:
                raise InternalError("optimal-face restriction reported infeasible")
            if abs(fr.value - base) > tau:
                return ContainmentResult(False, fr.x, j)
    return ContainmentResult(True)


def check_exact(model: CompressionModel, p: Polytope, c: np.ndarray) -> bool:
    """True iff solving over the slice is exact for cost c (face containment)."""
    return contains_optimal_face(model, p, c).contained


def build_reduced_lp(model: CompressionModel, p: Polytope, c: np.ndarray):
    """Reduced data over slice coordinates: ({z : (A U) z <= b - A x0}, U^T c, c . x0).

    For rank 0 the reduced polytope has zero variables; solve_lp handles that
    case directly (value 0 when feasible), so the identity
    full value = offset + reduced value still holds.
    """
    c = np.asarray(c, dtype=float)
    if p.d != model.d:
        raise ValueError("model and polytope dimensions differ")
    reduced = Polytope(
        p.A @ model.U,
        p.b - p.A @ model.x0,
        meta={"reduced_from": p.meta.get("name", ""), "rank": model.rank},
    )
    return reduced, model.U.T @ c, float(c @ model.x0)


def lift(model: CompressionModel, z: np.ndarray) -> np.ndarray:
    """Map slice coordinates to the ambient space: x0 + U z."""
    z = np.asarray(z, dtype=float)
    if z.shape != (model.rank,):
        raise ValueError("slice point has wrong dimension")
    return model.x0 + model.U @ z


def solve_via_compression(model: CompressionModel, p: Polytope, c: np.ndarray) -> SolveResult:
    """Solve the reduced LP and lift: value = offset + reduced value, x = x0 + U z.

    The reduced problem is feasible whenever x0 is feasible (z = 0) and
    bounded whenever X is bounded, so any other status is an internal error.
    The returned multipliers are those of the reduced solve; its rows are in
    one-to-one correspondence with the rows of p.
    """
    reduced, c_red, offset = build_reduced_lp(model, p, c)
    r = solve_lp(reduced, c_red, model.tol)
    if r.status is not SolveStatus.OPTIMAL:
        raise InternalError(f"reduced LP reported {r.status.value} though the anchor is feasible")
    x = lift(model, r.x)
    return SolveResult(SolveStatus.OPTIMAL, offset + r.value, x, r.basis_id, r.y)


# ---------------------------------------------------------------------------
# JSON interface
# ---------------------------------------------------------------------------


def model_to_json(model: CompressionModel) -> dict:
    """Model document: U stored column-major (a list of columns)."""
    return {
        "x0": [float(v) for v in model.x0],
        "U": [[float(v) for v in model.U[:, k]] for k in range(model.rank)],
        "tol": model.tol.to_dict(),
        "provenance": model.provenance,
    }


def model_from_json(doc: dict) -> CompressionModel:
    x0 = np.array(doc["x0"], dtype=float)
    cols = doc.get("U", [])
    U = np.array(cols, dtype=float).T if cols else np.zeros((x0.shape[0], 0))
    tol = ToleranceSet.from_dict(doc["tol"]) if "tol" in doc else DEFAULT_TOL
    return CompressionModel.create(x0, U, tol, dict(doc.get("provenance", {})))
