"""Cumulative slice learning from a stream of cost vectors.

``learn`` processes costs in order and keeps one anchored slice model.  For
each cost it tests whether the current slice contains the entire optimal
face; while it does not, a face vertex outside the slice is appended as a
new direction.  Samples that trigger at least one append form the hard set,
and the model is a deterministic function of the hard subsequence alone:
replaying it (or deleting any non-hard samples) reproduces the model
bitwise.  The size of the hard set feeds a distribution-free certificate of
out-of-sample exactness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .compression import CompressionModel, append_direction, contains_optimal_face
from .lp_core import DEFAULT_TOL, InternalError, Polytope, SolveStatus, ToleranceSet, solve_lp

__all__ = [
    "LearnTrace",
    "Certificate",
    "make_anchor",
    "learn",
    "replay_on_hard_subsequence",
    "certificate_bound",
    "trace_to_json",
    "trace_from_json",
]


@dataclass
class LearnTrace:
    """Processing record of one learn run.

    processed            ids in processing order (1-based by default)
    hard                 ordered ids of samples that triggered >= 1 append
    appends_per_sample   append count aligned with ``processed``
    final_rank           rank of the returned model
    anchor_provenance    free-form note on how the anchor point was obtained
    """

    processed: list = field(default_factory=list)
    hard: list = field(default_factory=list)
    appends_per_sample: list = field(default_factory=list)
    final_rank: int = 0
    anchor_provenance: str = ""


@dataclass(frozen=True)
class Certificate:
    """Distribution-free lower bound on out-of-sample exactness probability.

    lower_bound = max(0, 1 - (4/n) * (6 t + log(e/delta))), valid with
    probability at least 1 - delta over an i.i.d. sample of size n when t is
    the size of the learner's hard set.
    """

    n: int
    t: int
    delta: float
    lower_bound: float


def make_anchor(p: Polytope, c0: np.ndarray, tol: ToleranceSet = DEFAULT_TOL) -> np.ndarray:
    """Vertex optimizer for the anchor cost; the slice is anchored here."""
    r = solve_lp(p, np.asarray(c0, dtype=float), tol)
    if r.status is not SolveStatus.OPTIMAL:
        raise ValueError(f"anchor solve is {r.status.value}; need a feasible bounded LP")
    return r.x


def learn(
    p: Polytope,
    x0: np.ndarray,
    costs,
    tol: ToleranceSet = DEFAULT_TOL,
    ids=None,
    provenance: dict | None = None,
    anchor_provenance: str = "",
):
    """Run the cumulative learner over an iterable of costs.

    Returns (model, trace).  ``costs`` is consumed lazily; ``ids`` optionally
    relabels samples (default 1-based positions).  Appends across the whole
    run are capped at d; exceeding the cap means the containment test and
    the range test disagree, which is reported as InternalError rather than
    looping.  Tolerances are calibrated for desk-scale data (coordinates up
    to roughly 1e3).
    """
    x0 = np.asarray(x0, dtype=float)
    if not p.contains(x0, tol):
        raise ValueError("anchor point is not feasible")
    model = CompressionModel.empty(x0, tol, dict(provenance or {}))
    trace = LearnTrace(anchor_provenance=anchor_provenance)
    d = p.d
    total_appends = 0
    for pos, c in enumerate(costs, start=1):
        sid = ids[pos - 1] if ids is not None else pos
        n_app = 0
        while True:
            res = contains_optimal_face(model, p, c)
            if res.contained:
                break
            model = append_direction(model, res.witness)
            n_app += 1
            total_appends += 1
            if total_appends > d:
                raise InternalError("append count exceeded the ambient dimension")
        trace.processed.append(sid)
        trace.appends_per_sample.append(n_app)
        if n_app:
            trace.hard.append(sid)
    trace.final_rank = model.rank
    model.provenance.setdefault("hard_indices", list(trace.hard))
    return model, trace


def replay_on_hard_subsequence(p: Polytope, x0: np.ndarray, trace: LearnTrace, costs) -> CompressionModel:
    """Re-run the learner on the ordered hard subsequence only.

    ``costs`` must be the full indexable sequence the original run saw, with
    positions matching ``trace.processed``.  The result reproduces the
    original model bitwise (sample compression property).
    """
    pos_of = {sid: k for k, sid in enumerate(trace.processed)}
    sub = [costs[pos_of[sid]] for sid in trace.hard]
    model, _ = replay_learn_raw(p, x0, sub)
    return model


def replay_learn_raw(p: Polytope, x0: np.ndarray, costs, tol: ToleranceSet = DEFAULT_TOL):
    """learn() without provenance side channels; helper for replay paths."""
    return learn(p, x0, costs, tol)


def certificate_bound(n: int, t: int, delta: float) -> Certificate:
    """Exactness certificate from sample size n, hard-set size t, failure budget delta.

    n = 0 is allowed and yields the vacuous bound 0 (nothing was observed).
    """
    if n < 0 or t < 0 or t > max(n, 0):
        raise ValueError("need 0 <= n and 0 <= t <= n")
    if not (0.0 < delta < 1.0):
        raise ValueError("delta must be in (0, 1)")
    if n == 0:
        return Certificate(n=0, t=t, delta=delta, lower_bound=0.0)
    raw = 1.0 - (4.0 / n) * (6.0 * t + 1.0 - math.log(delta))
    return Certificate(n=n, t=t, delta=delta, lower_bound=max(0.0, min(1.0, raw)))


def trace_to_json(trace: LearnTrace) -> dict:
    return {
        "processed": list(trace.processed),
        "hard": list(trace.hard),
        "appends_per_sample": list(trace.appends_per_sample),
        "final_rank": trace.final_rank,
        "anchor_provenance": trace.anchor_provenance,
    }


def trace_from_json(doc: dict) -> LearnTrace:
    return LearnTrace(
        processed=list(doc["processed"]),
        hard=list(doc["hard"]),
        appends_per_sample=list(doc["appends_per_sample"]),
        final_rank=int(doc["final_rank"]),
        anchor_provenance=doc.get("anchor_provenance", ""),
    )
