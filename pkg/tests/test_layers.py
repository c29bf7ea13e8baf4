import numpy as np
import pytest

from pegsol.boards import make_geometry
from pegsol.layers import (
    RAW,
    REDUCED,
    LayerSet,
    PartitionConfig,
    backward_layers,
    complement_image,
    dedup_partitioned,
    descendants,
    descendants_codes,
    forward_layers,
    losing_layers,
    winning_layers,
)

from conftest import assert_sorted_unique


def test_partition_config_validation(tmp_path):
    PartitionConfig(p=1)
    PartitionConfig(p=7, scratch=str(tmp_path))
    with pytest.raises(ValueError):
        PartitionConfig(p=0)
    with pytest.raises(ValueError):
        PartitionConfig(p=6)
    with pytest.raises(ValueError):
        PartitionConfig(memory_budget=10)


def test_descendants_of_central_start(e33):
    start = e33.full_code - (1 << 16)
    raw = descendants_codes(np.array([start], dtype=np.uint64), e33, RAW)
    assert raw.size == 4
    reduced = descendants_codes(np.array([start], dtype=np.uint64), e33, REDUCED)
    assert reduced.size == 1


def test_descendants_of_single_peg_layer(t5):
    layer = LayerSet("F", 1, np.array([1], dtype=np.uint64), REDUCED, "triangle5")
    assert descendants(layer, t5).count == 0


def test_triangle5_first_layers(t5):
    start = t5.mincode(t5.full_code - 1)
    f = forward_layers(t5, [start], down_to=7)
    assert f[14].count == 1
    assert f[12].count == 4
    assert f[7].count == 344
    raw = forward_layers(t5, [t5.full_code - 1], down_to=7, reduction=RAW)
    assert raw[7].count == 679


def test_backward_layers_from_english_center(e33):
    b = backward_layers(e33, [1 << 16], up_to=2)
    assert b[2].codes.tolist() == [528]
    braw = backward_layers(e33, [1 << 16], up_to=2, reduction=RAW)
    assert braw[2].count == 4
    assert int(braw[2].codes.min()) == 528


def test_backward_equals_complemented_forward(t5):
    # complement problems: B_n is the complement image of F_(N-n)
    start = t5.mincode(t5.full_code - 1)
    f = forward_layers(t5, [start], down_to=10)
    b = backward_layers(t5, [1], up_to=5)
    for n in range(1, 6):
        expected = complement_image(f[15 - n].codes, t5, REDUCED)
        assert np.array_equal(b[n].codes, expected)


def test_dedup_partitioned_matches_memory(tmp_path):
    rng = np.random.default_rng(5)
    chunks = [rng.integers(0, 1 << 45, size=5000, dtype=np.uint64) for _ in range(6)]
    base = dedup_partitioned(list(chunks), PartitionConfig(p=1))
    assert_sorted_unique(base)
    for p in (3, 7, 11):
        got = dedup_partitioned(list(chunks), PartitionConfig(p=p, scratch=str(tmp_path)))
        assert np.array_equal(got, base)


def test_dedup_identity_on_unique_input():
    arr = np.arange(100, dtype=np.uint64) * np.uint64(3)
    assert np.array_equal(dedup_partitioned(arr.copy(), PartitionConfig()), arr)


def test_dedup_parallel_workers(tmp_path):
    rng = np.random.default_rng(11)
    chunk = rng.integers(0, 1 << 33, size=20000, dtype=np.uint64)
    base = dedup_partitioned(chunk.copy(), PartitionConfig(p=1))
    got = dedup_partitioned(
        chunk.copy(), PartitionConfig(p=5, scratch=str(tmp_path), jobs=2)
    )
    assert np.array_equal(got, base)


def test_layer_expansion_independent_of_p(t5, tmp_path):
    start = t5.mincode(t5.full_code - 1)
    for p in (1, 3):
        cfg = PartitionConfig(p=p, scratch=str(tmp_path))
        f = forward_layers(t5, [start], down_to=5, config=cfg)
        if p == 1:
            baseline = f
        else:
            for n in baseline:
                assert np.array_equal(f[n].codes, baseline[n].codes)


def test_raw_layers_are_orbit_union_of_reduced(t5):
    # seed the raw run with the whole symmetry orbit of the start position
    starts = t5.symmetry_images(t5.full_code - 1)
    raw = forward_layers(t5, list(starts), down_to=6, reduction=RAW)
    red = forward_layers(t5, [t5.mincode(t5.full_code - 1)], down_to=6)
    for n in range(6, 15):
        orbit_union = set()
        for code in red[n].codes.tolist():
            orbit_union.update(t5.symmetry_images(code))
        assert orbit_union == set(raw[n].codes.tolist())
        assert raw[n].count >= red[n].count


def test_layer_invariants_validate(t5):
    start = t5.mincode(t5.full_code - 1)
    for layer in forward_layers(t5, [start], down_to=4).values():
        layer.validate(t5)


def test_winning_layers_meet_route_matches_complement_route(t5):
    # the corner complement problem through the generic meet machinery
    start = t5.mincode(t5.full_code - 1)
    fast = winning_layers(t5, [start])
    meet = winning_layers(
        t5, [start], [1], complement_pair=False, meet=7
    )
    for n in range(1, 15):
        assert np.array_equal(
            meet.stored[n].codes, fast.w_layer(n, t5).codes
        ), f"n={n}"


def test_winning_layers_meet_route_other_meets(t5):
    start = t5.mincode(t5.full_code - 1)
    fast = winning_layers(t5, [start])
    for k in (4, 10):
        meet = winning_layers(t5, [start], [1], complement_pair=False, meet=k)
        for n in range(1, 15):
            assert np.array_equal(meet.stored[n].codes, fast.w_layer(n, t5).codes)


def test_unsolvable_problem_empty_layers(t4):
    # corner complement on the 10-hole board has no winning positions
    start = t4.mincode(t4.full_code - 1)
    res = winning_layers(t4, [start])
    assert not res.solvable
    assert all(l.count == 0 for l in res.stored.values())


def test_losing_layers_structure(t5):
    start = t5.mincode(t5.full_code - 1)
    res = winning_layers(t5, [start])
    losing = losing_layers(res, t5)
    assert losing[14].count == 0
    assert losing[12].count == 2
    assert sum(l.count for l in losing.values()) == 425
    # losing sets never intersect winning sets
    for n in range(1, 15):
        both = np.intersect1d(losing[n].codes, res.w_layer(n, t5).codes)
        assert both.size == 0


def test_english33_head_layers(e33):
    start = e33.full_code - (1 << 16)
    f = forward_layers(e33, [start], down_to=28)
    assert [f[n].count for n in range(32, 27, -1)] == [1, 1, 2, 8, 39]


def test_wiegleb_head_layers():
    geom = make_geometry("wiegleb45")
    start = geom.full_code ^ (1 << geom.hole_index(4, 4))
    f = forward_layers(geom, [geom.mincode(start)], down_to=40)
    assert [f[n].count for n in range(44, 39, -1)] == [1, 1, 3, 11, 60]
