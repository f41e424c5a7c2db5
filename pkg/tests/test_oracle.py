import numpy as np
import pytest

from lpslice import Polytope, make_preset
from lpslice.compression import CompressionModel
from lpslice.oracle import (
    PriorSpec,
    ScaleError,
    dir_star,
    enumerate_vertices,
    exact_check_bruteforce,
    prior_spec_from_dict,
    reachable_vertices,
)


def test_enumerate_vertices_square(square):
    vs = enumerate_vertices(square)
    assert len(vs) == 4
    # subset-lexicographic order over the row pairs (0,2), (0,3), (1,2), (1,3)
    expect = np.array([[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]])
    assert np.allclose(vs.vertices, expect)
    assert vs.active_sets == ((0, 2), (0, 3), (1, 2), (1, 3))


def test_enumerate_vertices_simplex():
    A = np.vstack([-np.eye(3), np.ones((1, 3))])
    p = Polytope(A, np.array([0.0, 0.0, 0.0, 1.0]))
    vs = enumerate_vertices(p)
    assert len(vs) == 4
    got = {tuple(np.round(v, 9)) for v in vs.vertices}
    assert got == {(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)}


def test_enumerate_vertices_dedupes_degenerate_corner(square):
    # an extra row active exactly at (1, 1): three subsets, one vertex
    A = np.vstack([square.A, [[1.0, 1.0]]])
    b = np.concatenate([square.b, [2.0]])
    vs = enumerate_vertices(Polytope(A, b))
    assert len(vs) == 4
    corner = [i for i in range(4) if np.allclose(vs.vertices[i], [1.0, 1.0])]
    assert len(corner) == 1
    assert vs.active_sets[corner[0]] == (0, 2, 4)


def test_enumerate_vertices_empty_for_strip():
    # a strip has no vertices; every 2-subset of parallel rows is singular
    p = Polytope(np.array([[1.0, 0.0], [-1.0, 0.0]]), np.array([1.0, 1.0]))
    vs = enumerate_vertices(p)
    assert len(vs) == 0


def test_scale_guard():
    with pytest.raises(ScaleError):
        enumerate_vertices(Polytope(np.eye(7), np.ones(7)))
    rng = np.random.default_rng(0)
    A = np.vstack([np.eye(2), -np.eye(2), rng.standard_normal((21, 2))])
    with pytest.raises(ScaleError):
        enumerate_vertices(Polytope(A, np.full(25, 5.0)))


def test_reachable_vertices_example1():
    inst = make_preset("example1")
    spec = prior_spec_from_dict(inst.polytope.meta["prior"])
    vs = reachable_vertices(inst.polytope, spec)
    got = {tuple(np.round(v, 9)) for v in vs.vertices}
    assert got == {(1.0, 1.0), (1.0, -1.0)}


def test_dir_star_example1():
    inst = make_preset("example1")
    spec = prior_spec_from_dict(inst.polytope.meta["prior"])
    B, k = dir_star(inst.polytope, spec)
    assert k == 1
    assert np.allclose(B[:, 0], [0.0, -1.0])


def test_dir_star_big_box_prior_spans_everything(square):
    spec = PriorSpec(shape="box", lo=np.array([-2.0, -2.0]), hi=np.array([2.0, 2.0]))
    B, k = dir_star(square, spec)
    assert k == 2


def test_dir_star_tight_ball_prior_is_zero(square):
    spec = PriorSpec(shape="ball", center=np.array([-1.0, -0.4]), radius=0.05)
    vs = reachable_vertices(square, spec)
    assert len(vs) == 1
    assert np.allclose(vs.vertices[0], [1.0, 1.0])
    B, k = dir_star(square, spec)
    assert k == 0 and B.shape == (2, 0)


def test_reachable_dimension_mismatch(square):
    spec = PriorSpec(shape="box", lo=np.zeros(3), hi=np.ones(3))
    with pytest.raises(ValueError):
        reachable_vertices(square, spec)


def test_exact_check_bruteforce_full_rank_always_true(square):
    m = CompressionModel.create(np.zeros(2), np.eye(2))
    for c in ([-1.0, 0.0], [0.3, 0.7], [0.0, 0.0]):
        assert exact_check_bruteforce(m, square, np.array(c))


def test_exact_check_bruteforce_detects_missing_face_vertex(square):
    c = np.array([-1.0, 0.0])  # optimal face is the whole right edge
    m0 = CompressionModel.empty(np.array([1.0, 1.0]))
    assert not exact_check_bruteforce(m0, square, c)
    slice_m = CompressionModel.create(np.array([1.0, 0.0]), np.array([[0.0], [1.0]]))
    assert exact_check_bruteforce(slice_m, square, c)


def test_exact_check_bruteforce_needs_vertices():
    p = Polytope(np.array([[1.0, 0.0], [-1.0, 0.0]]), np.array([1.0, 1.0]))
    m = CompressionModel.create(np.zeros(2), np.eye(2))
    with pytest.raises(ValueError):
        exact_check_bruteforce(m, p, np.array([1.0, 0.0]))


def test_prior_spec_validation_and_parsing():
    with pytest.raises(ValueError):
        PriorSpec(shape="box", lo=np.array([1.0]), hi=np.array([0.0]))
    with pytest.raises(ValueError):
        PriorSpec(shape="ball", center=np.zeros(2), radius=0.0)
    with pytest.raises(ValueError):
        PriorSpec(shape="hexagon")
    box = prior_spec_from_dict({"shape": "box", "lo": [-1.0, 0.0], "hi": [1.0, 2.0]})
    assert box.shape == "box" and box.d == 2
    ball = prior_spec_from_dict({"shape": "ball", "center": [0.5, 0.5, 0.5], "radius": 0.25})
    assert ball.shape == "ball" and ball.d == 3 and ball.radius == 0.25
    with pytest.raises(ValueError):
        prior_spec_from_dict({"shape": "simplex"})
