import numpy as np
import pytest

from pegsol.boards import make_geometry
from pegsol.layers import REDUCED, complement_image
from pegsol.posclass import get_problem, ksym_for
from pegsol.windb import (
    FINISH_ANYWHERE,
    FINISH_COMPLEMENT,
    SolvabilityOracle,
    board_is_solvable,
    build_complement_db,
    problem_is_solvable,
)

W2_PUBLISHED = {
    1: [1],
    2: [10],
    3: [28, 112],
    4: [23, 58, 85, 120, 1108, 1616, 2076, 2210, 2272],
    5: [31, 93, 115, 601, 1054, 1138, 1140, 1562, 1648, 2183, 2218,
        2245, 2280, 2348, 2472, 2616, 2728, 2819],
    6: [125, 633, 1086, 1111, 1594, 1621, 2191, 2253, 2275, 2289, 2343,
        2467, 2589, 2723, 2785, 2841, 2889, 3126, 3250, 3298, 3428, 3634,
        3845, 4220, 4270, 4282, 4691, 4728, 4817],
    7: [1567, 1651, 2235, 2365, 2413, 2537, 2731, 2793, 3159, 3196, 3320,
        3374, 3388, 3607, 3642, 3667, 3669, 3704, 3859, 3921, 4215, 4339,
        4341, 4469, 4701, 4849, 5302, 5350, 5746, 5810, 6881, 6985, 10053,
        10065, 12065],
}


def test_corner_complement_sets(t5_type):
    _, cdbs, _ = t5_type
    corner = cdbs[2]
    for n, want in W2_PUBLISHED.items():
        assert corner.layers[n].tolist() == want


def test_eq8_complement_mirror(t5, t5_type):
    _, cdbs, _ = t5_type
    for db in cdbs.values():
        for n in range(1, 8):
            upper = db.w_layer(t5.N - n, t5)
            back = complement_image(upper, t5, "raw" if db.raw else REDUCED)
            assert np.array_equal(np.sort(back), np.sort(db.layers[n]))


def test_unsolvable_problem_flagged(t5_type):
    _, cdbs, _ = t5_type
    assert not cdbs[4].solvable
    assert cdbs[4].stored_total == 0
    assert cdbs[1].solvable and cdbs[2].solvable and cdbs[3].solvable


def test_degenerate_db_is_raw(t5, t5_type):
    _, cdbs, _ = t5_type
    db = cdbs[1]
    assert db.raw
    # raw storage: the one-peg layer is the canonical (0,3) orientation
    assert db.layers[1].tolist() == [1 << t5.hole_index(0, 3)]
    # raw sets may hold two members of one symmetry class
    for n in range(1, 8):
        mins = t5.mincode_array(db.layers[n])
        if np.unique(mins).size < db.layers[n].size:
            break
    else:
        pytest.fail("expected at least one duplicated symmetry class in raw sets")


def test_indexed_layout_anchors(t5_type):
    db, _, _ = t5_type
    idb = db.indexed
    assert idb.p == 4 and idb.degen == 1 and idb.topindex == 16
    assert idb.codes[1].tolist() == [16, 64, 1, 8]
    assert idb.ends[1].tolist() == [1, 2, 3, 3] + [4] * 12
    assert idb.total() == 437


def test_indexed_runs_sorted_by_code(t5_type):
    db, _, _ = t5_type
    idb = db.indexed
    for n in idb.codes:
        for j in range(idb.topindex):
            run = idb.run(n, j)
            if run.size > 1:
                assert np.all(np.diff(run.view(np.int64)) > 0)


def test_degenerate_duplicates_total_ten(t5, t5_type):
    # ten symmetry classes appear twice, all through the raw problem-1 codes
    db, _, _ = t5_type
    dup = 0
    for n in db.indexed.codes:
        codes = db.indexed.codes[n]
        dup += codes.size - np.unique(t5.mincode_array(codes)).size
    assert dup == 10
    assert db.indexed.total() - sum(a.size for a in db.plain.values()) == 10


def test_problem_is_solvable_anchors(t5, t5_type):
    _, cdbs, _ = t5_type
    corner = cdbs[2]
    assert problem_is_solvable(28, corner, t5)
    # any 3-peg position whose mincode is 28
    for image in t5.symmetry_images(28):
        assert problem_is_solvable(image, corner, t5)
    assert problem_is_solvable(t5.full_code - 1, corner, t5)  # the start itself
    assert not problem_is_solvable(1480, corner, t5)  # mincode 181, index 0
    assert t5.mincode(1480) == 181


def test_board_is_solvable_examples(t5, t5_type):
    db, _, _ = t5_type
    idb = db.indexed
    assert board_is_solvable(1480, idb, t5, finish=FINISH_ANYWHERE)
    for i in range(1, 5):
        assert not board_is_solvable(
            1480, idb, t5, problem_number=i, ksym=0, finish=FINISH_COMPLEMENT
        )
    # mincode 115 sits in index 6: corner (0,0) and mid-edge (2,4) complements
    p2, p3 = get_problem(t5, 1, 2), get_problem(t5, 1, 3)
    assert board_is_solvable(115, idb, t5, problem_number=2, ksym=0, finish=FINISH_COMPLEMENT)
    k = ksym_for(t5, p3, t5.hole_index(2, 4))
    assert board_is_solvable(115, idb, t5, problem_number=3, ksym=k, finish=FINISH_COMPLEMENT)
    assert not board_is_solvable(115, idb, t5, problem_number=1, ksym=0, finish=FINISH_COMPLEMENT)


def test_degenerate_mirror_pair(t5, t5_type):
    # identical mincodes, opposite verdicts in the canonical orientation
    db, _, _ = t5_type
    idb = db.indexed
    assert t5.mincode(28) == t5.mincode(50) == 28
    assert not board_is_solvable(28, idb, t5, problem_number=1, ksym=0, finish=FINISH_COMPLEMENT)
    assert board_is_solvable(50, idb, t5, problem_number=1, ksym=0, finish=FINISH_COMPLEMENT)
    # a game started at the mirrored vacancy (3,3) sees the same pair
    # through its aligning transform
    p1 = get_problem(t5, 1, 1)
    k = ksym_for(t5, p1, t5.hole_index(3, 3))
    inv = _inverse(t5, k)
    assert board_is_solvable(
        t5.apply_symmetry(50, inv), idb, t5,
        problem_number=1, ksym=k, finish=FINISH_COMPLEMENT,
    )
    assert not board_is_solvable(
        t5.apply_symmetry(28, inv), idb, t5,
        problem_number=1, ksym=k, finish=FINISH_COMPLEMENT,
    )


def _inverse(geom, k):
    perm = geom.symmetries[k]
    inverse = tuple(sorted(range(geom.N), key=lambda i: perm[i]))
    return geom.symmetries.index(inverse)


def test_winning_layer_closure(t5, t5_type):
    # every winning code has a winning descendant, per problem semantics
    _, cdbs, _ = t5_type
    for db in cdbs.values():
        if not db.solvable:
            continue
        for n in range(2, t5.N):
            layer = db.w_layer(n, t5)
            below = set(db.w_layer(n - 1, t5).tolist())
            for code in layer.tolist():
                succs = [s for _, s in t5.legal_jumps(code)]
                if not db.raw:
                    succs = [t5.mincode(s) for s in succs]
                assert any(s in below for s in succs), (db.problem.number, n, code)


def test_winning_layer_upward_reachability(t5, t5_type):
    # every winning code below the start is some winning position's child
    _, cdbs, _ = t5_type
    for db in cdbs.values():
        if not db.solvable:
            continue
        for n in range(1, t5.N - 1):
            parents = db.w_layer(n + 1, t5)
            children = set()
            for code in parents.tolist():
                for _, s in t5.legal_jumps(code):
                    children.add(s if db.raw else t5.mincode(s))
            for code in db.w_layer(n, t5).tolist():
                assert code in children


def test_superset_consistency(t5, t5_type):
    # problem layers are contained in the type superset, classwise
    _, cdbs, superset = t5_type
    for db in cdbs.values():
        for n in range(1, 8):
            classes = np.unique(t5.mincode_array(db.layers[n]))
            assert np.setdiff1d(classes, superset.layers[n]).size == 0


def test_triangle5_superset_draft_totals(t5_type):
    # reduced finish-anywhere sets, by layer
    db, _, _ = t5_type
    assert [db.plain[n].size for n in range(1, 8)] == [4, 4, 12, 33, 77, 129, 168]


def test_good_jumps_closure(t5, t5_type):
    db, cdbs, _ = t5_type
    oracle = SolvabilityOracle(db.indexed, t5, problem_number=2, ksym=0)
    start = t5.full_code - 1
    verdicts = oracle.good_jumps(start)
    assert any(v.good for v in verdicts)
    # from an unsolvable position every jump is bad
    dead = 1480
    assert not problem_is_solvable(dead, cdbs[2], t5)
    dead_oracle = SolvabilityOracle(cdbs[2], t5)
    assert all(not v.good for v in dead_oracle.good_jumps(dead))


def test_english33_problem_bundle_shape(e33):
    problem = get_problem(e33, 1, 1)
    assert problem.number == 1 and e33.holes[problem.start_hole] == (3, 3)
