import numpy as np
import pytest

from sigtext.rfgeom import (LayerSpec, centers_aligned, enlargement, format_table, layer_table, receptive_field,
                            receptive_field_2d, stride_product, with_kernel)


def random_stack(rng, n=None):
    n = int(rng.integers(1, 7)) if n is None else n
    return [LayerSpec(int(rng.integers(1, 8)), int(rng.integers(1, 4)), int(rng.integers(0, 4))) for _ in range(n)]


def test_single_layer():
    rf = receptive_field([LayerSpec(3, 1, 1)], 0)
    assert rf.size == 3 and rf.center == 0


def test_two_stride_two_layers():
    assert receptive_field([LayerSpec(3, 2, 1), LayerSpec(3, 2, 1)]).size == 7


def test_center_preserving_stack_keeps_coordinate():
    stack = [LayerSpec(k, 1, (k - 1) // 2) for k in (3, 5, 7, 1, 9)]
    for x in (0, 3, 17.5):
        assert receptive_field(stack, x).center == x


def test_layer_spec_validation():
    for bad in ((0, 1, 0), (3, 0, 0), (3, 1, -1)):
        with pytest.raises(ValueError):
            LayerSpec(*bad)
    assert LayerSpec(3, 2, 1).output_size(7) == 4


def test_empty_stack_rejected():
    with pytest.raises(ValueError):
        receptive_field([])


def test_clipping_reported():
    stack = [LayerSpec(5, 1, 2)]
    assert receptive_field(stack, 0, input_size=10).clipped
    assert not receptive_field(stack, 5, input_size=10).clipped


def test_enlargement_examples():
    stack = [LayerSpec(3, 2, 1), LayerSpec(3, 1, 1), LayerSpec(3, 1, 1)]
    assert enlargement(stack, 2, 2) == 4
    assert enlargement(stack, 1, 0) == 0
    with pytest.raises(IndexError):
        enlargement(stack, 3, 1)
    with pytest.raises(IndexError):
        enlargement(stack, -1, 1)


def test_enlargement_matches_recursion():
    rng = np.random.default_rng(0)
    for _ in range(100):
        stack = random_stack(rng)
        layer = int(rng.integers(len(stack)))
        dk = int(rng.integers(0, 5))
        grown = receptive_field(with_kernel(stack, layer, dk)).size - receptive_field(stack).size
        assert grown == enlargement(stack, layer, dk)


def test_enlargement_linear():
    stack = [LayerSpec(3, 2), LayerSpec(2, 2), LayerSpec(3, 1)]
    assert enlargement(stack, 2, 6) == 3 * enlargement(stack, 2, 2)


def test_size_monotone_in_kernel_and_stride():
    rng = np.random.default_rng(1)
    for _ in range(100):
        stack = random_stack(rng)
        i = int(rng.integers(len(stack)))
        base = receptive_field(stack).size
        s = stack[i]
        bigger_k = stack[:i] + [LayerSpec(s.kernel + 1, s.stride, s.padding)] + stack[i + 1:]
        bigger_m = stack[:i] + [LayerSpec(s.kernel, s.stride + 1, s.padding)] + stack[i + 1:]
        assert receptive_field(bigger_k).size >= base
        assert receptive_field(bigger_m).size >= base


def test_alignment_examples():
    trunk = [LayerSpec(3, 1, 1), LayerSpec(2, 2, 0), LayerSpec(3, 1, 1)]
    branches = [trunk + [LayerSpec(k, 1, (k - 1) // 2, f"b{k}")] for k in (3, 5, 7)]
    assert centers_aligned(branches)
    assert centers_aligned([branches[0], list(branches[0])])
    bad = branches + [trunk + [LayerSpec(3, 2, 1, "strided")]]
    report = centers_aligned(bad)
    assert not report and any("strided" in p for p in report.problems)


def test_alignment_accepts_exactly_center_preserving_families():
    rng = np.random.default_rng(2)
    trunk = random_stack(rng, 3)
    for _ in range(300):
        specs = [LayerSpec(int(rng.integers(1, 8)), int(rng.integers(1, 3)), int(rng.integers(0, 4)))
                 for _ in range(3)]
        branches = [trunk + [s] for s in specs]
        differs = len({(s.kernel, s.stride, s.padding) for s in specs}) > 1
        expected = not differs or all(s.center_preserving for s in specs)
        assert bool(centers_aligned(branches)) == expected


def test_table_and_helpers():
    stack = [LayerSpec(3, 1, 1, "c0"), LayerSpec(2, 2, 0, "p1")]
    rows = layer_table(stack)
    assert [r.size for r in rows] == [4, 2]
    text = format_table(stack)
    assert "c0" in text and "x = 2*x' + (0.5)" in text
    assert stride_product(stack) == 2
    rx, ry = receptive_field_2d(stack, [LayerSpec(1)], (1, 0))
    assert rx.size == 4 and ry.size == 1
