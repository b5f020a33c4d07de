"""Relation extraction against independent brute-force oracles."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from actiongraph.geometry import (
    AABB3,
    RelationConfig,
    centroid,
    dynamic_relation_matrix,
    evaluate_dynamic_relations,
    evaluate_static_relations,
    static_relation_matrix,
)
from actiongraph.vocab import RELATIONS

from tests.conftest import box_strategy, dyadic_box_strategy, dyadic_shift_strategy, random_boxes

CFG = RelationConfig()


# ---------------------------------------------------------------------------
# Oracles: written from the relation definitions, axis by axis, without
# sharing code with the implementation.


def oracle_static(a: AABB3, b: AABB3, cfg: RelationConfig) -> set[str]:
    rels = set()
    half = cfg.contact_tolerance / 2.0
    expanded_disjoint = False
    for k in range(3):
        if a.max[k] + half < b.min[k] - half or b.max[k] + half < a.min[k] - half:
            expanded_disjoint = True
    if not expanded_disjoint:
        rels.add("contact")

    if all(b.min[k] <= a.min[k] and a.max[k] <= b.max[k] for k in range(3)):
        rels.add("inside")
    if all(a.min[k] <= b.min[k] and b.max[k] <= a.max[k] for k in range(3)):
        rels.add("surround")

    names = {0: ("left", "right"), 1: ("below", "above"), 2: ("front", "behind")}
    for k in range(3):
        other_axes = [j for j in range(3) if j != k]
        touching = True
        for j in other_axes:
            lo = max(a.min[j], b.min[j])
            hi = min(a.max[j], b.max[j])
            if hi - lo <= 0.0:
                touching = False
        if not touching:
            continue
        low_side, high_side = names[k]
        if a.max[k] < b.min[k] and (b.min[k] - a.max[k]) > cfg.dir_gap:
            rels.add(low_side)
        if b.max[k] < a.min[k] and (a.min[k] - b.max[k]) > cfg.dir_gap:
            rels.add(high_side)
    return rels


def oracle_dynamic(traj_a: list[AABB3], traj_b: list[AABB3], dt: float, cfg: RelationConfig) -> set[str]:
    traj_a = traj_a[-cfg.dyn_window :]
    traj_b = traj_b[-cfg.dyn_window :]
    span = (len(traj_a) - 1) * dt
    ca = [(box.min + box.max) / 2.0 for box in traj_a]
    cb = [(box.min + box.max) / 2.0 for box in traj_b]
    va = (ca[-1] - ca[0]) / span
    vb = (cb[-1] - cb[0]) / span
    sa, sb = np.linalg.norm(va), np.linalg.norm(vb)

    rels = set()
    if "contact" in oracle_static(traj_a[-1], traj_b[-1], cfg):
        if sa > cfg.v_min and sb > cfg.v_min and np.linalg.norm(va - vb) < cfg.eps_rel:
            rels.add("moving_together")
            base = ca[0] - cb[0]
            drift = max(np.linalg.norm((p - q) - base) for p, q in zip(ca, cb))
            if drift < cfg.eps_fixed:
                rels.add("fixed_moving_together")
        elif sa <= cfg.v_min and sb <= cfg.v_min:
            rels.add("halting_together")
    else:
        delta = np.linalg.norm(ca[-1] - cb[-1]) - np.linalg.norm(ca[0] - cb[0])
        if delta < -cfg.eps_dist:
            rels.add("getting_close")
        elif delta > cfg.eps_dist:
            rels.add("moving_apart")
        else:
            rels.add("stable")
    return rels


def box(mins, maxs) -> AABB3:
    return AABB3(np.asarray(mins, dtype=float), np.asarray(maxs, dtype=float))


def linear_trajectory(start_box: AABB3, velocity, dt: float, n: int) -> list[AABB3]:
    v = np.asarray(velocity, dtype=float)
    return [start_box.translated(v * dt * k) for k in range(n)]


# ---------------------------------------------------------------------------
# Static relations


def test_centroid_examples():
    assert np.array_equal(centroid(box((0, 0, 0), (2, 4, 6))), [1, 2, 3])
    assert np.array_equal(centroid(box((-10, -10, -10), (10, 10, 10))), [0, 0, 0])
    assert np.array_equal(centroid(box((5, 5, 5), (5, 5, 5))), [5, 5, 5])


def test_identical_boxes_contact_inside_surround():
    a = box((0, 0, 0), (50, 50, 50))
    assert evaluate_static_relations(a, a, CFG) == {"contact", "inside", "surround"}


def test_stacked_boxes_touching_faces():
    # Touching z-faces: contact holds, but no directional relation because the
    # boundary gap (0) does not exceed dir_gap.
    cfg = RelationConfig(contact_tolerance=2, dir_gap=10)
    a = box((0, 0, 100), (50, 50, 150))
    b = box((0, 0, 0), (50, 50, 100))
    expected = oracle_static(a, b, cfg)
    assert expected == {"contact"}
    assert evaluate_static_relations(a, b, cfg) == expected


def test_lateral_gap_yields_right():
    cfg = RelationConfig(dir_gap=10)
    a = box((200, 0, 0), (250, 50, 50))
    b = box((0, 0, 0), (50, 50, 50))
    expected = oracle_static(a, b, cfg)
    assert expected == {"right"}
    assert evaluate_static_relations(a, b, cfg) == expected
    assert evaluate_static_relations(b, a, cfg) == {"left"}


def test_vertical_separation_yields_above():
    a = box((0, 200, 0), (50, 260, 50))
    b = box((10, 0, 10), (40, 50, 40))
    assert evaluate_static_relations(a, b, CFG) == {"above"}
    assert evaluate_static_relations(b, a, CFG) == {"below"}


def test_depth_separation_yields_front():
    a = box((0, 0, 0), (50, 50, 50))
    b = box((0, 0, 100), (50, 50, 150))
    assert evaluate_static_relations(a, b, CFG) == {"front"}
    assert evaluate_static_relations(b, a, CFG) == {"behind"}


def test_diagonal_offset_needs_projection_overlap():
    # Disjoint on x and y: neither direction fires because the off-axis
    # projections do not overlap.
    a = box((0, 0, 0), (50, 50, 50))
    b = box((100, 100, 0), (150, 150, 50))
    assert evaluate_static_relations(a, b, CFG) == set()


def test_contact_with_tolerance_bridges_small_gap():
    a = box((0, 0, 0), (50, 50, 50))
    b = box((54, 0, 0), (100, 50, 50))
    assert "contact" in evaluate_static_relations(a, b, RelationConfig(contact_tolerance=10))
    assert "contact" not in evaluate_static_relations(a, b, RelationConfig(contact_tolerance=2))


@settings(max_examples=300, deadline=None)
@given(box_strategy(), box_strategy())
def test_static_matches_oracle(a, b):
    assert evaluate_static_relations(a, b, CFG) == oracle_static(a, b, CFG)


@settings(max_examples=200, deadline=None)
@given(box_strategy(), box_strategy())
def test_static_symmetry_dualities(a, b):
    ab = evaluate_static_relations(a, b, CFG)
    ba = evaluate_static_relations(b, a, CFG)
    for one, other in (("left", "right"), ("above", "below"), ("front", "behind"), ("inside", "surround")):
        assert (one in ab) == (other in ba)
    assert ("contact" in ab) == ("contact" in ba)


@settings(max_examples=200, deadline=None)
@given(dyadic_box_strategy(), dyadic_box_strategy(), dyadic_shift_strategy())
def test_static_translation_invariance(a, b, shift):
    off = np.array(shift)
    assert evaluate_static_relations(a, b, CFG) == evaluate_static_relations(
        a.translated(off), b.translated(off), CFG
    )


def test_static_mutual_exclusions_fuzzed(rng):
    for _ in range(40):
        mins, maxs = random_boxes(rng, 2, max_size=400.0)
        rels = evaluate_static_relations(box(mins[0], maxs[0]), box(mins[1], maxs[1]), CFG)
        for one, other in (("above", "below"), ("left", "right"), ("front", "behind")):
            assert not (one in rels and other in rels)


def test_static_matrix_agrees_with_pairwise(rng):
    for _ in range(20):
        n = int(rng.integers(2, 9))
        mins, maxs = random_boxes(rng, n, lo=-300.0, hi=300.0, max_size=220.0)
        mat = static_relation_matrix(mins, maxs, CFG)
        for i in range(n):
            for j in range(n):
                if i == j:
                    assert not mat[i, j].any()
                    continue
                expected = evaluate_static_relations(box(mins[i], maxs[i]), box(mins[j], maxs[j]), CFG)
                got = {RELATIONS[s] for s in np.flatnonzero(mat[i, j])}
                assert got == expected


def test_invalid_box_rejected():
    with pytest.raises(ValueError):
        box((0, 0, 0), (-1, 0, 0))
    with pytest.raises(ValueError):
        AABB3(np.array([0.0, 0.0, np.nan]), np.array([1.0, 1.0, 1.0]))


# ---------------------------------------------------------------------------
# Dynamic relations


DT = 1.0 / 30.0


def test_dynamic_stationary_pair_is_stable():
    a = linear_trajectory(box((0, 0, 0), (50, 50, 50)), (0, 0, 0), DT, 8)
    b = linear_trajectory(box((300, 0, 0), (350, 50, 50)), (0, 0, 0), DT, 8)
    expected = oracle_dynamic(a, b, DT, CFG)
    assert expected == {"stable"}
    assert evaluate_dynamic_relations(a, b, DT, CFG) == expected


def test_dynamic_joint_translation_moves_together():
    a = linear_trajectory(box((0, 0, 0), (50, 50, 50)), (100, 0, 0), DT, 8)
    b = linear_trajectory(box((20, 0, 0), (70, 50, 50)), (100, 0, 0), DT, 8)
    expected = oracle_dynamic(a, b, DT, CFG)
    assert expected == {"moving_together", "fixed_moving_together"}
    assert evaluate_dynamic_relations(a, b, DT, CFG) == expected


def test_dynamic_approach_is_getting_close():
    a = linear_trajectory(box((0, 0, 0), (50, 50, 50)), (0, 0, 0), DT, 8)
    b = linear_trajectory(box((500, 0, 0), (550, 50, 50)), (-200, 0, 0), DT, 8)
    expected = oracle_dynamic(a, b, DT, CFG)
    assert expected == {"getting_close"}
    assert evaluate_dynamic_relations(a, b, DT, CFG) == expected
    assert evaluate_dynamic_relations(b, a, DT, CFG) == {"getting_close"}


def test_dynamic_separation_is_moving_apart():
    a = linear_trajectory(box((0, 0, 0), (50, 50, 50)), (0, 0, 0), DT, 8)
    b = linear_trajectory(box((200, 0, 0), (250, 50, 50)), (250, 0, 0), DT, 8)
    assert evaluate_dynamic_relations(a, b, DT, CFG) == {"moving_apart"}


def test_dynamic_static_contact_halts_together():
    a = linear_trajectory(box((0, 0, 0), (50, 50, 50)), (0, 0, 0), DT, 8)
    b = linear_trajectory(box((30, 0, 0), (80, 50, 50)), (0, 0, 0), DT, 8)
    assert evaluate_dynamic_relations(a, b, DT, CFG) == {"halting_together"}


def test_dynamic_sliding_contact_with_drift_not_fixed():
    # Boxes stay overlapped but their offset drifts beyond eps_fixed.
    a = linear_trajectory(box((0, 0, 0), (100, 50, 50)), (100, 0, 0), DT, 8)
    b = [
        box((20 + 100 * DT * k + 60 * np.sin(k / 3.0), 0, 0), (120 + 100 * DT * k + 60 * np.sin(k / 3.0), 50, 50))
        for k in range(8)
    ]
    rels = evaluate_dynamic_relations(a, b, DT, CFG)
    assert "fixed_moving_together" not in rels


def test_dynamic_insufficient_history():
    a = [box((0, 0, 0), (50, 50, 50))]
    with pytest.raises(ValueError, match="insufficient history"):
        evaluate_dynamic_relations(a, a, DT, CFG)
    b = linear_trajectory(box((0, 0, 0), (50, 50, 50)), (0, 0, 0), DT, 3)
    with pytest.raises(ValueError, match="insufficient history"):
        evaluate_dynamic_relations(b, b[:2], DT, CFG)


def test_dynamic_short_prefix_accepted():
    a = linear_trajectory(box((0, 0, 0), (50, 50, 50)), (0, 0, 0), DT, 2)
    b = linear_trajectory(box((300, 0, 0), (350, 50, 50)), (0, 0, 0), DT, 2)
    assert evaluate_dynamic_relations(a, b, DT, CFG) == {"stable"}


def test_dynamic_trichotomy_exhaustive_for_non_contact(rng):
    for _ in range(50):
        start_a = box(*random_boxes(rng, 1, max_size=80.0))
        start_b = box(*(arr[0] + 600 for arr in random_boxes(rng, 1, max_size=80.0)))
        va, vb = rng.uniform(-150, 150, 3), rng.uniform(-150, 150, 3)
        a = linear_trajectory(start_a, va, DT, 8)
        b = linear_trajectory(start_b, vb, DT, 8)
        if "contact" in evaluate_static_relations(a[-1], b[-1], CFG):
            continue
        rels = evaluate_dynamic_relations(a, b, DT, CFG)
        assert len(rels & {"getting_close", "moving_apart", "stable"}) == 1
        assert rels == oracle_dynamic(a, b, DT, CFG)


def test_dynamic_translation_invariance(rng):
    a = linear_trajectory(box((0, 0, 0), (60, 60, 60)), (120, 30, 0), DT, 8)
    b = linear_trajectory(box((40, 0, 0), (100, 60, 60)), (120, 30, 0), DT, 8)
    off = np.array([500.0, -250.0, 125.0])
    shifted_a = [bx.translated(off) for bx in a]
    shifted_b = [bx.translated(off) for bx in b]
    assert evaluate_dynamic_relations(a, b, DT, CFG) == evaluate_dynamic_relations(shifted_a, shifted_b, DT, CFG)


def test_dynamic_matrix_agrees_with_pairwise(rng):
    for _ in range(15):
        n = int(rng.integers(2, 7))
        mins, maxs = random_boxes(rng, n, lo=-300.0, hi=300.0, max_size=150.0)
        vels = rng.uniform(-180, 180, size=(n, 3))
        trajs = [linear_trajectory(box(mins[i], maxs[i]), vels[i], DT, 8) for i in range(n)]
        cent_hist = np.stack([[centroid(t[k]) for t in trajs] for k in range(8)])
        last_mins = np.stack([t[-1].min for t in trajs])
        last_maxs = np.stack([t[-1].max for t in trajs])
        contact_now = static_relation_matrix(last_mins, last_maxs, CFG)[:, :, RELATIONS.index("contact")]
        np.fill_diagonal(contact_now, True)
        mat = dynamic_relation_matrix(cent_hist, np.full(n, 8), contact_now, DT, CFG)
        for i in range(n):
            for j in range(n):
                if i == j:
                    assert not mat[i, j].any()
                    continue
                expected = evaluate_dynamic_relations(trajs[i], trajs[j], DT, CFG)
                got = {RELATIONS[s] for s in np.flatnonzero(mat[i, j])}
                assert got == expected
