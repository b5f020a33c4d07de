"""Instance tracking and causal Gaussian box smoothing.

Detections are matched to existing tracks per class by greedy
nearest-centroid association under a distance gate; unmatched detections
spawn tracks with fresh globally unique ids, and tracks unseen for too many
consecutive frames are retired. Each track's box parameters are smoothed
with a causal Gaussian kernel over its past observations.

A tracker instance is single-writer state for one recording; run one
tracker per recording (independent recordings can be processed in
parallel).
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .geometry import AABB3, centroid
from .vocab import OBJECT_INDEX


@dataclass(frozen=True)
class Detection:
    object_class: str
    box: AABB3
    confidence: float = 1.0

    def __post_init__(self) -> None:
        if self.object_class not in OBJECT_INDEX:
            raise ValueError(f"unknown object class {self.object_class!r}")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError("confidence must lie in [0, 1]")


@dataclass(frozen=True)
class SmoothingConfig:
    """``three_sigma`` is the kernel's 3-sigma width in seconds."""

    three_sigma: float = 0.250
    gate_distance: float = 300.0
    max_lost_frames: int = 15

    def __post_init__(self) -> None:
        if self.three_sigma <= 0:
            raise ValueError("three_sigma must be positive")
        if self.gate_distance <= 0:
            raise ValueError("gate_distance must be positive")
        if self.max_lost_frames < 0:
            raise ValueError("max_lost_frames must be >= 0")


@dataclass
class TrackedObject:
    instance_id: int
    object_class: str
    raw_history: deque = field(default_factory=deque)  # (frame, AABB3), newest last
    smoothed_box: AABB3 | None = None
    frames_since_seen: int = 0

    def last_frame(self) -> int:
        return self.raw_history[-1][0]

    def last_centroid(self) -> np.ndarray:
        return centroid(self.raw_history[-1][1])


def kernel_reach(fps: float, cfg: SmoothingConfig) -> int:
    """Largest frame offset inside the truncated kernel (3 sigma into the past)."""
    return int(math.floor(cfg.three_sigma * fps))


def smooth(track: TrackedObject, fps: float, cfg: SmoothingConfig) -> AABB3:
    """Normalized Gaussian-weighted average of the track's past boxes.

    The kernel has sigma = three_sigma/3 seconds converted to frames via
    ``fps``, is truncated at 3 sigma into the past, and is renormalized over
    whatever observations exist, so a single-sample history is returned
    unchanged. Only frames at or before the newest observation contribute.
    """
    if not track.raw_history:
        raise ValueError("raw_history is empty")
    sigma_frames = cfg.three_sigma * fps / 3.0
    reach = kernel_reach(fps, cfg)
    now, newest = track.raw_history[-1]
    anchor = np.concatenate([newest.min, newest.max])

    weights = []
    deltas = []
    for frame, box in track.raw_history:
        offset = now - frame
        if offset > reach:
            continue
        weights.append(math.exp(-(offset * offset) / (2.0 * sigma_frames * sigma_frames)))
        deltas.append(np.concatenate([box.min, box.max]) - anchor)
    w = np.asarray(weights) / np.sum(weights)
    # anchored form: exact identity for constant histories
    blended = anchor + w @ np.stack(deltas)
    return AABB3(blended[:3], blended[3:])


def associate(
    tracks: list[TrackedObject],
    detections: list[Detection],
    frame: int,
    cfg: SmoothingConfig,
    next_id: int,
) -> tuple[list[TrackedObject], list[tuple[int, int]], int]:
    """One association step.

    Matches detections to same-class tracks greedily in ascending centroid
    distance (ties: lower instance id, then lower detection index), gated at
    ``gate_distance``. Returns the surviving track list, the
    (detection index, instance id) assignments covering every detection, and
    the next fresh id. ``frame`` must be strictly past every track's last
    observation.
    """
    for track in tracks:
        if frame <= track.last_frame():
            raise ValueError("frame must advance beyond all track observations")

    det_centroids = [centroid(d.box) for d in detections]
    candidates = []
    for track in tracks:
        ref = track.last_centroid()
        for det_idx, det in enumerate(detections):
            if det.object_class != track.object_class:
                continue
            dist = float(np.linalg.norm(det_centroids[det_idx] - ref))
            if dist <= cfg.gate_distance:
                candidates.append((dist, track.instance_id, det_idx, track))
    candidates.sort(key=lambda c: (c[0], c[1], c[2]))

    assigned_tracks: set[int] = set()
    assigned_dets: set[int] = set()
    assignments: list[tuple[int, int]] = []
    for _, instance_id, det_idx, track in candidates:
        if instance_id in assigned_tracks or det_idx in assigned_dets:
            continue
        assigned_tracks.add(instance_id)
        assigned_dets.add(det_idx)
        track.raw_history.append((frame, detections[det_idx].box))
        track.frames_since_seen = 0
        assignments.append((det_idx, instance_id))

    for det_idx, det in enumerate(detections):
        if det_idx in assigned_dets:
            continue
        track = TrackedObject(instance_id=next_id, object_class=det.object_class)
        track.raw_history.append((frame, det.box))
        tracks.append(track)
        assignments.append((det_idx, next_id))
        next_id += 1

    kept = []
    for track in tracks:
        if track.last_frame() != frame:
            track.frames_since_seen += 1
            if track.frames_since_seen > cfg.max_lost_frames:
                continue
        kept.append(track)
    assignments.sort()
    return kept, assignments, next_id


class Tracker:
    """Stateful per-recording tracker; feed frames in strictly increasing order."""

    def __init__(self, cfg: SmoothingConfig, fps: float):
        if fps <= 0:
            raise ValueError("fps must be positive")
        self.cfg = cfg
        self.fps = fps
        self.tracks: list[TrackedObject] = []
        self.next_id = 0
        self._reach = kernel_reach(fps, cfg)

    def step(self, frame: int, detections: list[Detection]) -> list[TrackedObject]:
        """Ingest one frame; returns this frame's detected tracks by ascending id."""
        self.tracks, _, self.next_id = associate(self.tracks, detections, frame, self.cfg, self.next_id)
        current = []
        for track in self.tracks:
            if track.last_frame() != frame:
                continue
            while track.raw_history and frame - track.raw_history[0][0] > self._reach:
                track.raw_history.popleft()
            track.smoothed_box = smooth(track, self.fps, self.cfg)
            current.append(track)
        current.sort(key=lambda t: t.instance_id)
        return current
