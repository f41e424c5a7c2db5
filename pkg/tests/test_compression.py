import numpy as np
import pytest

from helpers import small_lp
from lpslice import (
    CompressionModel,
    Polytope,
    RankError,
    SolveStatus,
    check_exact,
    contains_optimal_face,
    solve_lp,
)
from lpslice.compression import (
    append_direction,
    build_reduced_lp,
    in_range,
    lift,
    model_from_json,
    model_to_json,
    solve_via_compression,
)
from lpslice.linalg import check_orthonormal


def vertical_slice() -> CompressionModel:
    """Rank-1 model through (1, 0) spanning the x2 axis."""
    return CompressionModel.create(np.array([1.0, 0.0]), np.array([[0.0], [1.0]]))


def test_create_rejects_rank_deficient_directions():
    with pytest.raises(ValueError):
        CompressionModel.create(np.zeros(2), np.array([[1.0, 2.0], [1.0, 2.0]]))


def test_in_range_basic():
    m = vertical_slice()
    assert in_range(m, np.array([0.0, 0.5]))
    assert not in_range(m, np.array([0.5, 0.0]))
    assert in_range(m, np.zeros(2))
    with pytest.raises(ValueError):
        in_range(m, np.zeros(3))


def test_in_range_full_rank_model_accepts_everything():
    m = CompressionModel.create(np.zeros(2), np.eye(2))
    assert in_range(m, np.array([3.0, -4.0]))


def test_append_direction_growth_and_refusal():
    m0 = CompressionModel.empty(np.array([1.0, 0.0]))
    assert m0.rank == 0
    m1 = append_direction(m0, np.array([1.0, 1.0]))  # direction (0, 1)
    assert m1.rank == 1
    assert np.allclose(m1.Q[:, 0], [0.0, 1.0])
    with pytest.raises(RankError):
        append_direction(m1, np.array([1.0, 0.0]))  # zero displacement
    with pytest.raises(RankError):
        append_direction(m1, np.array([1.0, -3.0]))  # already spanned
    m2 = append_direction(m1, np.array([0.0, 0.0]))  # direction (-1, 0)
    assert m2.rank == 2
    # prefix of Q survives the append bitwise
    assert np.array_equal(m2.Q[:, :1], m1.Q)
    assert check_orthonormal(m2.Q)
    with pytest.raises(RankError):
        append_direction(m2, np.array([5.0, 5.0]))


def test_complement_basis_invariant():
    m = vertical_slice()
    assert m.Qperp.shape == (2, 1)
    assert np.max(np.abs(m.Q.T @ m.Qperp)) < 1e-12
    assert check_orthonormal(np.column_stack([m.Q, m.Qperp]))


def test_contains_optimal_face_on_square(square):
    m = vertical_slice()
    res = contains_optimal_face(m, square, np.array([-1.0, 0.5]))
    assert res.contained and res.witness is None
    res2 = contains_optimal_face(m, square, np.array([0.5, -1.0]))
    assert not res2.contained
    assert np.allclose(res2.witness, [-1.0, 1.0], atol=1e-7)
    assert res2.functional_index == 0
    assert square.contains(res2.witness)


def test_contains_optimal_face_degenerate_cost(square):
    # c = (-1, 0): the whole right edge is optimal and lies in the slice
    m = vertical_slice()
    assert contains_optimal_face(m, square, np.array([-1.0, 0.0])).contained
    # but a rank-0 model sees only its anchor point
    m0 = CompressionModel.empty(np.array([1.0, 0.0]))
    r = contains_optimal_face(m0, square, np.array([-1.0, 0.0]))
    assert not r.contained


def test_contains_optimal_face_rank_zero_unique_optimizer(square):
    m0 = CompressionModel.empty(np.array([1.0, -1.0]))
    assert contains_optimal_face(m0, square, np.array([-1.0, 0.5])).contained
    assert check_exact(m0, square, np.array([-1.0, 0.5]))


def test_contains_optimal_face_shortcut_vs_slow_path(square):
    # the auxiliary-LP route is conservative on ill-conditioned geometry, so
    # slow True must imply fast True; the default route must match the
    # enumeration oracle outright
    from lpslice.oracle import exact_check_bruteforce

    rng = np.random.default_rng(7)
    n_equal = 0
    for _ in range(40):
        d = int(rng.integers(2, 5))
        p = small_lp(rng, d, int(rng.integers(d + 1, 8)))
        x0 = solve_lp(p, rng.standard_normal(d)).x
        m = CompressionModel.empty(x0)
        for _ in range(int(rng.integers(0, d))):
            x = solve_lp(p, rng.standard_normal(d)).x
            if not in_range(m, x - x0):
                m = append_direction(m, x)
        c = p.A[int(rng.integers(0, p.m))] if rng.random() < 0.3 else rng.standard_normal(d)
        fast = contains_optimal_face(m, p, c, shortcut=True)
        slow = contains_optimal_face(m, p, c, shortcut=False)
        if slow.contained:
            assert fast.contained
        n_equal += fast.contained == slow.contained
        assert fast.contained == exact_check_bruteforce(m, p, c)
    assert n_equal >= 30  # routes coincide away from tolerance boundaries


def test_contains_optimal_face_requires_bounded_problem():
    half = Polytope(np.array([[-1.0, 0.0]]), np.array([0.0]))
    m = CompressionModel.empty(np.zeros(2))
    with pytest.raises(ValueError):
        contains_optimal_face(m, half, np.array([-1.0, 0.0]))


def test_build_reduced_lp_one_variable(square):
    m = vertical_slice()
    red, c_red, offset = build_reduced_lp(m, square, np.array([-1.2, 0.4]))
    assert red.d == 1 and red.m == 4
    assert c_red == pytest.approx([0.4])
    assert offset == pytest.approx(-1.2)
    r = solve_lp(red, c_red)
    assert r.value + offset == pytest.approx(-1.6)
    assert solve_lp(square, np.array([-1.2, 0.4])).value == pytest.approx(-1.6)


def test_build_reduced_lp_identity_is_the_original(square):
    m = CompressionModel.create(np.zeros(2), np.eye(2))
    red, c_red, offset = build_reduced_lp(m, square, np.array([-1.5, 0.3]))
    assert np.array_equal(red.A, square.A) and np.array_equal(red.b, square.b)
    assert offset == 0.0


def test_lift_and_rank_zero_slice(square):
    m = vertical_slice()
    assert np.allclose(lift(m, np.array([-1.0])), [1.0, -1.0])
    m0 = CompressionModel.empty(np.array([0.25, -0.5]))
    r = solve_via_compression(m0, square, np.array([1.0, 1.0]))
    assert r.status is SolveStatus.OPTIMAL
    assert np.allclose(r.x, [0.25, -0.5])
    assert r.value == pytest.approx(-0.25)


def test_solve_via_compression_exact_and_restricted(square):
    m = vertical_slice()
    c = np.array([-1.2, 0.4])
    assert solve_via_compression(m, square, c).value == pytest.approx(solve_lp(square, c).value)
    # an inexact cost still solves, but only over the slice {(1, t)}
    c2 = np.array([0.5, -1.0])
    red_val = solve_via_compression(m, square, c2).value
    assert red_val == pytest.approx(-0.5)
    assert red_val > solve_lp(square, c2).value


def test_restriction_exactness_and_monotonicity_properties():
    rng = np.random.default_rng(11)
    for _ in range(25):
        d = int(rng.integers(2, 5))
        p = small_lp(rng, d, int(rng.integers(d + 1, 7)))
        x0 = solve_lp(p, rng.standard_normal(d)).x
        models = [CompressionModel.empty(x0)]
        while models[-1].rank < d:
            x = solve_lp(p, rng.standard_normal(d)).x
            if not in_range(models[-1], x - x0):
                models.append(append_direction(models[-1], x))
        c = rng.standard_normal(d)
        full = solve_lp(p, c).value
        vals = [solve_via_compression(m, p, c).value for m in models]
        for v_prev, v_next in zip(vals, vals[1:]):
            assert v_next <= v_prev + 1e-9  # growing the slice never hurts
        for m, v in zip(models, vals):
            assert v >= full - 1e-9 * (1.0 + abs(full))
            if check_exact(m, p, c):
                assert v == pytest.approx(full, rel=1e-9, abs=1e-9)
        # the full-rank end of the chain is always exact
        assert vals[-1] == pytest.approx(full, rel=1e-9, abs=1e-9)


def test_model_json_round_trip(square):
    m = append_direction(vertical_slice(), np.array([0.0, 0.0]))
    doc = model_to_json(m)
    m2 = model_from_json(doc)
    assert np.array_equal(m2.U, m.U)
    assert np.allclose(m2.x0, m.x0)
    assert m2.rank == m.rank
    assert model_to_json(m2) == doc
