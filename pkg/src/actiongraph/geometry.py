"""Pairwise spatial relations between axis-aligned 3D boxes.

Coordinates are camera-centric millimeters: x grows to the camera's right,
y grows upward, z grows away from the camera. All relations are evaluated
for an ordered pair and describe the first box relative to the second
(``left(a, b)`` means "a is left of b").

Relation semantics:

* ``contact``: the boxes, each expanded by ``contact_tolerance / 2`` on
  every face, intersect (closed test, so touching counts).
* directional (``left/right``, ``below/above``, ``front/behind``): the
  interval projections on one axis are separated by a gap strictly greater
  than ``dir_gap`` while the projections on the other two axes each overlap
  by a positive amount. ``front`` is the smaller-z side.
* ``inside``: closed containment of the first box in the second;
  ``surround`` is the converse. Identical boxes satisfy both.
* dynamic relations use centroid trajectories over the last
  ``dyn_window`` frames. For pairs in contact at the window end:
  ``moving_together`` (both faster than ``v_min`` with relative velocity
  magnitude below ``eps_rel``), ``halting_together`` (both at most
  ``v_min``), and ``fixed_moving_together`` (moving together with the
  relative centroid offset drifting less than ``eps_fixed`` within the
  window). For non-contact pairs the window's centroid-distance change
  classifies exactly one of ``getting_close`` / ``moving_apart`` /
  ``stable`` via ``eps_dist``.

All functions are pure and safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .vocab import N_RELATIONS, RELATION_INDEX


@dataclass(frozen=True)
class AABB3:
    """Axis-aligned box in camera coordinates (mm), stored as corner vectors."""

    min: np.ndarray
    max: np.ndarray

    def __post_init__(self) -> None:
        lo = np.asarray(self.min, dtype=np.float64).reshape(3)
        hi = np.asarray(self.max, dtype=np.float64).reshape(3)
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValueError("box corners must be finite")
        if np.any(lo > hi):
            raise ValueError(f"box min exceeds max: {lo} > {hi}")
        object.__setattr__(self, "min", lo)
        object.__setattr__(self, "max", hi)

    def translated(self, offset: np.ndarray) -> "AABB3":
        off = np.asarray(offset, dtype=np.float64)
        return AABB3(self.min + off, self.max + off)


@dataclass(frozen=True)
class RelationConfig:
    """Thresholds for relation extraction. Units: mm, mm/s, frames."""

    contact_tolerance: float = 10.0
    dir_gap: float = 10.0
    dyn_window: int = 8
    v_min: float = 20.0
    eps_rel: float = 30.0
    eps_dist: float = 5.0
    eps_fixed: float = 10.0

    def __post_init__(self) -> None:
        for name in ("contact_tolerance", "dir_gap", "v_min", "eps_rel", "eps_dist", "eps_fixed"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.dyn_window < 2:
            raise ValueError("dyn_window must be >= 2")


def centroid(a: AABB3) -> np.ndarray:
    """Component-wise midpoint of the box corners."""
    return (a.min + a.max) / 2.0


# axis -> (name when a sits on the smaller side, name when a sits on the larger side)
_AXIS_RELATIONS = ((0, "left", "right"), (1, "below", "above"), (2, "front", "behind"))


def _contact(a: AABB3, b: AABB3, tolerance: float) -> bool:
    return bool(np.all(a.max - b.min >= -tolerance) and np.all(b.max - a.min >= -tolerance))


def evaluate_static_relations(a: AABB3, b: AABB3, cfg: RelationConfig) -> frozenset[str]:
    """Single-frame relations of ``a`` relative to ``b``."""
    rels: set[str] = set()
    if _contact(a, b, cfg.contact_tolerance):
        rels.add("contact")
    if np.all(b.min <= a.min) and np.all(a.max <= b.max):
        rels.add("inside")
    if np.all(a.min <= b.min) and np.all(b.max <= a.max):
        rels.add("surround")
    overlap = np.minimum(a.max, b.max) - np.maximum(a.min, b.min)
    for axis, low_name, high_name in _AXIS_RELATIONS:
        others = [k for k in range(3) if k != axis]
        if not all(overlap[k] > 0.0 for k in others):
            continue
        if b.min[axis] - a.max[axis] > cfg.dir_gap:
            rels.add(low_name)
        elif a.min[axis] - b.max[axis] > cfg.dir_gap:
            rels.add(high_name)
    return frozenset(rels)


def evaluate_dynamic_relations(
    history_a: Sequence[AABB3],
    history_b: Sequence[AABB3],
    dt: float,
    cfg: RelationConfig,
) -> frozenset[str]:
    """Window-based relations of ``a`` relative to ``b``.

    Both histories must cover the same frames, oldest first. Histories
    longer than ``cfg.dyn_window`` are truncated to the newest frames.
    """
    if len(history_a) != len(history_b) or len(history_a) < 2:
        raise ValueError("insufficient history")
    if dt <= 0:
        raise ValueError("dt must be positive")
    history_a = history_a[-cfg.dyn_window :]
    history_b = history_b[-cfg.dyn_window :]
    ca = np.stack([centroid(box) for box in history_a])
    cb = np.stack([centroid(box) for box in history_b])
    elapsed = (len(ca) - 1) * dt

    rels: set[str] = set()
    vel_a = (ca[-1] - ca[0]) / elapsed
    vel_b = (cb[-1] - cb[0]) / elapsed
    speed_a = float(np.linalg.norm(vel_a))
    speed_b = float(np.linalg.norm(vel_b))

    if _contact(history_a[-1], history_b[-1], cfg.contact_tolerance):
        if speed_a > cfg.v_min and speed_b > cfg.v_min and np.linalg.norm(vel_a - vel_b) < cfg.eps_rel:
            rels.add("moving_together")
            rel_offsets = (ca - cb) - (ca[0] - cb[0])
            if float(np.max(np.linalg.norm(rel_offsets, axis=1))) < cfg.eps_fixed:
                rels.add("fixed_moving_together")
        elif speed_a <= cfg.v_min and speed_b <= cfg.v_min:
            rels.add("halting_together")
    else:
        dist_change = float(np.linalg.norm(ca[-1] - cb[-1]) - np.linalg.norm(ca[0] - cb[0]))
        if dist_change < -cfg.eps_dist:
            rels.add("getting_close")
        elif dist_change > cfg.eps_dist:
            rels.add("moving_apart")
        else:
            rels.add("stable")
    return frozenset(rels)


def static_relation_matrix(mins: np.ndarray, maxs: np.ndarray, cfg: RelationConfig) -> np.ndarray:
    """All-pairs static relations for one frame.

    ``mins`` / ``maxs`` are (N, 3); returns a boolean (N, N, 15) tensor where
    ``out[i, j, slot]`` states the relation of box i relative to box j. The
    diagonal is left all-false.
    """
    n = mins.shape[0]
    out = np.zeros((n, n, N_RELATIONS), dtype=bool)
    if n == 0:
        return out

    # gap[i, j, k] > 0 means box i starts beyond box j's end on axis k
    gap = mins[:, None, :] - maxs[None, :, :]
    overlap = np.minimum(maxs[:, None, :], maxs[None, :, :]) - np.maximum(mins[:, None, :], mins[None, :, :])

    out[:, :, RELATION_INDEX["contact"]] = np.all(gap <= cfg.contact_tolerance, axis=2) & np.all(
        gap.transpose(1, 0, 2) <= cfg.contact_tolerance, axis=2
    )
    inside = np.all(mins[None, :, :] <= mins[:, None, :], axis=2) & np.all(
        maxs[:, None, :] <= maxs[None, :, :], axis=2
    )
    out[:, :, RELATION_INDEX["inside"]] = inside
    out[:, :, RELATION_INDEX["surround"]] = inside.T

    beyond = gap > cfg.dir_gap  # i past j on axis k, seen from the high side
    for axis, low_name, high_name in _AXIS_RELATIONS:
        others = [k for k in range(3) if k != axis]
        others_overlap = (overlap[:, :, others] > 0.0).all(axis=2)
        out[:, :, RELATION_INDEX[high_name]] = beyond[:, :, axis] & others_overlap
        out[:, :, RELATION_INDEX[low_name]] = beyond[:, :, axis].T & others_overlap

    idx = np.arange(n)
    out[idx, idx, :] = False
    return out


def dynamic_relation_matrix(
    cent_hist: np.ndarray,
    window_len: np.ndarray,
    contact_now: np.ndarray,
    dt: float,
    cfg: RelationConfig,
) -> np.ndarray:
    """All-pairs dynamic relations for one frame.

    ``cent_hist`` is (W, N, 3), newest frame last, padded arbitrarily where a
    history is shorter than W; ``window_len[i]`` gives the usable suffix
    length for instance i (1 means no usable motion history yet). The pair
    window is ``min(window_len[i], window_len[j])`` and pairs whose window is
    shorter than 2 frames produce no dynamic relations. ``contact_now`` is
    the (N, N) contact mask of the newest frame.
    """
    w, n, _ = cent_hist.shape
    out = np.zeros((n, n, N_RELATIONS), dtype=bool)
    if n == 0:
        return out
    pair_len = np.minimum(window_len[:, None], window_len[None, :])
    current = cent_hist[-1]

    for length in np.unique(pair_len):
        if length < 2:
            continue
        sel = pair_len == length
        start = cent_hist[-length]
        elapsed = (length - 1) * dt
        vel = (current - start) / elapsed
        speed = np.linalg.norm(vel, axis=1)
        rel_speed = np.linalg.norm(vel[:, None, :] - vel[None, :, :], axis=2)

        both_moving = (speed[:, None] > cfg.v_min) & (speed[None, :] > cfg.v_min)
        both_halting = (speed[:, None] <= cfg.v_min) & (speed[None, :] <= cfg.v_min)
        moving_together = contact_now & both_moving & (rel_speed < cfg.eps_rel) & sel
        halting_together = contact_now & both_halting & sel

        # drift of the pair offset vector relative to the window start
        offsets = cent_hist[-length:, :, None, :] - cent_hist[-length:, None, :, :]
        drift = np.linalg.norm(offsets - offsets[0], axis=3).max(axis=0)
        fixed = moving_together & (drift < cfg.eps_fixed)

        dist_now = np.linalg.norm(current[:, None, :] - current[None, :, :], axis=2)
        dist_start = np.linalg.norm(start[:, None, :] - start[None, :, :], axis=2)
        change = dist_now - dist_start
        non_contact = sel & ~contact_now
        out[:, :, RELATION_INDEX["getting_close"]] |= non_contact & (change < -cfg.eps_dist)
        out[:, :, RELATION_INDEX["moving_apart"]] |= non_contact & (change > cfg.eps_dist)
        out[:, :, RELATION_INDEX["stable"]] |= non_contact & (np.abs(change) <= cfg.eps_dist)

        out[:, :, RELATION_INDEX["moving_together"]] |= moving_together
        out[:, :, RELATION_INDEX["halting_together"]] |= halting_together
        out[:, :, RELATION_INDEX["fixed_moving_together"]] |= fixed

    idx = np.arange(n)
    out[idx, idx, :] = False
    return out
