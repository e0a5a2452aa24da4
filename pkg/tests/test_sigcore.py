import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sigtext.sigcore import (MAX_DEPTH, Signature, SignatureError, chen_concat, inverse_check, path_signature,
                             segment_signature, signature_size)

from _support import quad_level2, random_path

coord = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
paths = st.lists(st.tuples(coord, coord), min_size=1, max_size=10).map(np.array)


def test_zero_segment_is_identity():
    sig = segment_signature((0, 0), 3)
    assert sig.flat().tolist() == [1.0] + [0.0] * 14


def test_segment_closed_form():
    sig = segment_signature((3, 4), 2)
    assert sig.levels[1].tolist() == [3, 4]
    assert sig.levels[2].tolist() == [4.5, 6, 6, 8]


def test_segment_level3_term():
    assert segment_signature((1, 2), 3).term(1, 1, 1) == pytest.approx(1 / 6, abs=1e-15)


def test_segment_rejects_non_finite():
    with pytest.raises(SignatureError):
        segment_signature((np.nan, 0), 2)
    with pytest.raises(SignatureError):
        segment_signature((np.inf, 0), 2)


def test_depth_limits():
    assert signature_size(3) == 15
    with pytest.raises(SignatureError):
        segment_signature((1, 1), -1)
    with pytest.raises(SignatureError):
        segment_signature((1, 1), MAX_DEPTH + 1)


def test_level_sizes():
    sig = path_signature([(0, 0), (1, 2), (3, 1)], 4)
    assert [lv.size for lv in sig.levels] == [1, 2, 4, 8, 16]
    assert sig.levels[0][0] == 1.0


def test_identity_is_neutral():
    b = path_signature(random_path(np.random.default_rng(0)), 3)
    assert chen_concat(Signature.identity(3), b).allclose(b, atol=0)
    assert chen_concat(b, Signature.identity(3)).allclose(b, atol=0)


def test_hand_tensor_product():
    sig = chen_concat(segment_signature((1, 0), 2), segment_signature((0, 1), 2))
    assert sig.levels[1].tolist() == [1, 1]
    assert sig.levels[2].tolist() == [0.5, 1, 0, 0.5]
    assert sig.levy_area() == 0.5


def test_depth_mismatch_rejected():
    with pytest.raises(SignatureError):
        chen_concat(segment_signature((1, 0), 2), segment_signature((1, 0), 3))


@pytest.mark.parametrize("lam", [0.1, 0.5, 0.73])
def test_collinear_split(lam):
    d = np.array([2.0, -1.5])
    joined = chen_concat(segment_signature(lam * d, 3), segment_signature((1 - lam) * d, 3))
    assert joined.allclose(segment_signature(d, 3), atol=1e-14)


def test_path_single_point_and_empty():
    assert path_signature([(4, 5)], 3).allclose(Signature.identity(3), atol=0)
    with pytest.raises(SignatureError):
        path_signature([], 2)


def test_path_matches_hand_product():
    fold = path_signature([(0, 0), (1, 0), (1, 1)], 2)
    hand = chen_concat(segment_signature((1, 0), 2), segment_signature((0, 1), 2))
    assert fold.allclose(hand, atol=0)


@pytest.mark.parametrize("loop, sign", [([(0, 0), (1, 0), (1, 1), (0, 1), (0, 0)], 1),
                                        ([(0, 0), (0, 1), (1, 1), (1, 0), (0, 0)], -1)])
def test_square_loop_area(loop, sign):
    sig = path_signature(loop, 2)
    assert np.abs(sig.levels[1]).max() == 0
    oracle = quad_level2(np.array(loop, float))
    assert abs(0.5 * (oracle[0, 1] - oracle[1, 0]) - sign) < 1e-10
    assert abs(sig.levy_area() - sign) < 1e-10


def test_level2_matches_quadrature():
    rng = np.random.default_rng(3)
    for _ in range(20):
        pts = random_path(rng)
        assert np.allclose(path_signature(pts, 2).levels[2].reshape(2, 2), quad_level2(pts), atol=1e-10)


def test_inverse_examples():
    rng = np.random.default_rng(1)
    assert inverse_check([(0, 0), (2, 3)], 3).allclose(Signature.identity(3), atol=1e-15)
    assert inverse_check([(1, 1)], 3).allclose(Signature.identity(3), atol=0)
    assert inverse_check(random_path(rng, 20), 3).allclose(Signature.identity(3), atol=1e-10)


@settings(max_examples=200, deadline=None)
@given(paths, st.floats(-3, 3).filter(lambda x: abs(x) > 1e-3))
def test_scaling_property(pts, lam):
    a, b = path_signature(pts, 3), path_signature(lam * pts, 3)
    for k in range(4):
        expect = lam ** k * a.levels[k]
        assert np.allclose(b.levels[k], expect, rtol=1e-12, atol=1e-12 * max(1.0, np.abs(expect).max()))


@settings(max_examples=200, deadline=None)
@given(paths)
def test_shuffle_identities(pts):
    s = path_signature(pts, 2)
    scale = max(1.0, np.abs(s.levels[2]).max())
    assert abs(s.term(1) * s.term(2) - s.term(1, 2) - s.term(2, 1)) <= 1e-12 * scale
    assert abs(s.term(1) ** 2 - 2 * s.term(1, 1)) <= 1e-12 * scale


@settings(max_examples=200, deadline=None)
@given(paths, paths, paths)
def test_chen_associativity(p, q, r):
    a, b, c = (path_signature(x / 10, 3) for x in (p, q, r))
    left = chen_concat(chen_concat(a, b), c)
    right = chen_concat(a, chen_concat(b, c))
    assert left.allclose(right, atol=1e-14)


@settings(max_examples=200, deadline=None)
@given(paths, st.integers(0, 8), st.floats(0.05, 0.95))
def test_collinear_insertion(pts, where, lam):
    if len(pts) < 2:
        return
    i = where % (len(pts) - 1)
    mid = pts[i] + lam * (pts[i + 1] - pts[i])
    longer = np.insert(pts, i + 1, mid, axis=0)
    a, b = path_signature(pts, 3), path_signature(longer, 3)
    scale = max(1.0, max(np.abs(lv).max() for lv in a.levels))
    assert a.allclose(b, atol=1e-12 * scale)


@settings(max_examples=100, deadline=None)
@given(paths, coord, coord)
def test_translation_invariance(pts, dx, dy):
    a = path_signature(pts, 3)
    b = path_signature(pts + np.array([dx, dy]), 3)
    scale = max(1.0, max(np.abs(lv).max() for lv in a.levels))
    assert a.allclose(b, atol=1e-12 * scale)


def test_signature_validates_levels():
    with pytest.raises(SignatureError):
        Signature((np.ones(1), np.zeros(3)))
    with pytest.raises(SignatureError):
        segment_signature((1, 1), 2).term(3)
