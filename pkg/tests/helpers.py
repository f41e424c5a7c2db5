"""Shared test utilities: a small random LP builder and independent
binomial oracles computed by direct summation (math.comb + fsum), so the
package's log-space tail code is checked against arithmetic it does not
share."""

from __future__ import annotations

import math

import numpy as np

from lpslice import Polytope


def small_lp(rng: np.random.Generator, d: int, m_struct: int) -> Polytope:
    """Bounded nonempty polytope: m_struct random unit rows with positive
    slack at a random interior point, plus a box that caps every coordinate."""
    xbar = rng.standard_normal(d)
    A = rng.standard_normal((m_struct, d))
    A /= np.linalg.norm(A, axis=1, keepdims=True)
    b = A @ xbar + rng.uniform(0.1, 1.0, m_struct)
    L = float(np.max(np.abs(xbar))) + 2.0
    eye = np.eye(d)
    box_rows = np.vstack([r for j in range(d) for r in (eye[j : j + 1], -eye[j : j + 1])])
    return Polytope(np.vstack([A, box_rows]), np.concatenate([b, np.full(2 * d, L)]))


def binom_tail(m: int, q: float, k: int) -> float:
    """P[Bin(m, q) >= k] by direct summation of exact-integer binomials."""
    if k <= 0:
        return 1.0
    if k > m:
        return 0.0
    terms = [math.comb(m, j) * q**j * (1.0 - q) ** (m - j) for j in range(k, m + 1)]
    return math.fsum(terms)


def cutoff_oracle(m: int, rho: float, delta0: float) -> int:
    """Smallest k in 1..m with P[Bin(m, 1-rho) >= k] <= delta0, else m + 1."""
    if m == 0:
        return 1
    for k in range(1, m + 1):
        if binom_tail(m, 1.0 - rho, k) <= delta0:
            return k
    return m + 1
