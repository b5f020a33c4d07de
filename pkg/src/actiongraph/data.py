"""Frame-stream file format and deterministic synthetic scenario generation.

Frame files are line-delimited JSON: a header line with format version and
fps, then one frame record per line. Class and action names are lowercase
snake_case tokens from the canonical vocabularies.

The generator turns a scenario script (timed per-hand action phases over an
object inventory) into frame records with jittered boxes and per-hand
ground-truth labels. Hands follow simple trajectory primitives; a grasped
object moves rigidly with its hand during manipulation phases. Everything
is seeded, so identical inputs reproduce identical recordings.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from .geometry import AABB3
from .tracking import Detection
from .vocab import ACTION_INDEX, LEFT_HAND, OBJECT_INDEX, RIGHT_HAND

FRAMES_FORMAT_VERSION = 1

HAND_SIZE = np.array([85.0, 85.0, 85.0])
REST_POSITIONS = {"right": np.array([320.0, 170.0, 820.0]), "left": np.array([-320.0, 170.0, 820.0])}

# actions during which the phase target is carried by the hand
ATTACHING_ACTIONS = frozenset(
    {"lift", "place", "hold", "stir", "pour", "wipe", "hammer", "saw", "cut", "screw", "drink"}
)


class DataError(Exception):
    """Malformed frame files or scenario scripts."""


@dataclass(frozen=True)
class FrameRecord:
    recording_id: str
    subject: int
    task: int
    repetition: int
    frame: int
    timestamp: float
    detections: list[Detection]
    truth_right: str
    truth_left: str


@dataclass(frozen=True)
class Recording:
    recording_id: str
    subject: int
    task: int
    repetition: int
    fps: float
    frames: list[FrameRecord]


# ---------------------------------------------------------------------------
# Frame file IO


def _record_to_line(r: FrameRecord) -> str:
    det_rows = [
        [d.object_class, d.confidence] + [float(v) for v in d.box.min] + [float(v) for v in d.box.max]
        for d in r.detections
    ]
    return json.dumps(
        {
            "rec": r.recording_id,
            "subject": r.subject,
            "task": r.task,
            "rep": r.repetition,
            "frame": r.frame,
            "ts": r.timestamp,
            "right": r.truth_right,
            "left": r.truth_left,
            "det": det_rows,
        },
        sort_keys=True,
    )


def _record_from_obj(obj: dict, line_no: int) -> FrameRecord:
    for key in ("right", "left"):
        token = obj[key]
        if token not in ACTION_INDEX:
            raise DataError(f"line {line_no}: unknown action token {token!r}")
    detections = []
    for row in obj["det"]:
        cls = row[0]
        if cls not in OBJECT_INDEX:
            raise DataError(f"line {line_no}: unknown class token {cls!r}")
        detections.append(Detection(cls, AABB3(np.array(row[2:5]), np.array(row[5:8])), row[1]))
    return FrameRecord(
        recording_id=obj["rec"],
        subject=int(obj["subject"]),
        task=int(obj["task"]),
        repetition=int(obj["rep"]),
        frame=int(obj["frame"]),
        timestamp=float(obj["ts"]),
        detections=detections,
        truth_right=obj["right"],
        truth_left=obj["left"],
    )


def save_frames(path, records: Iterable[FrameRecord], fps: float) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"format": "actiongraph-frames", "version": FRAMES_FORMAT_VERSION, "fps": fps}))
        fh.write("\n")
        for r in records:
            fh.write(_record_to_line(r))
            fh.write("\n")


def load_frames(path) -> tuple[float, Iterator[FrameRecord]]:
    """Header fps plus a streaming record iterator (validates as it goes)."""
    fh = open(path, encoding="utf-8")
    try:
        header_line = fh.readline()
        if not header_line.strip():
            fh.close()
            return 0.0, iter(())
        header = json.loads(header_line)
        if header.get("format") != "actiongraph-frames" or header.get("version") != FRAMES_FORMAT_VERSION:
            raise DataError(f"unsupported frames header: {header_line.strip()}")
    except json.JSONDecodeError as err:
        fh.close()
        raise DataError(f"line 1: malformed header ({err.msg})") from err
    except DataError:
        fh.close()
        raise

    def generate() -> Iterator[FrameRecord]:
        expected: dict[str, int] = {}
        last_ts: dict[str, float] = {}
        with fh:
            for line_no, line in enumerate(fh, start=2):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as err:
                    raise DataError(f"line {line_no}: malformed record ({err.msg})") from err
                record = _record_from_obj(obj, line_no)
                want = expected.get(record.recording_id, 0)
                if record.frame != want:
                    raise DataError(
                        f"line {line_no}: frame {record.frame} of {record.recording_id!r}, expected {want}"
                    )
                if record.timestamp < last_ts.get(record.recording_id, -math.inf):
                    raise DataError(f"line {line_no}: timestamps must be non-decreasing")
                expected[record.recording_id] = want + 1
                last_ts[record.recording_id] = record.timestamp
                yield record

    return float(header["fps"]), generate()


def save_recording(path, recording: Recording) -> None:
    save_frames(path, recording.frames, recording.fps)


def load_recording(path) -> Recording:
    fps, stream = load_frames(path)
    frames = list(stream)
    if not frames:
        raise DataError(f"{path}: recording is empty")
    first = frames[0]
    return Recording(first.recording_id, first.subject, first.task, first.repetition, fps, frames)


# ---------------------------------------------------------------------------
# Scenario scripts


@dataclass(frozen=True)
class SceneObjectSpec:
    name: str
    object_class: str
    size: tuple[float, float, float]
    position: tuple[float, float, float]  # initial centroid, mm


@dataclass(frozen=True)
class Phase:
    """``target`` is the object the hand manipulates (and carries during
    attaching actions); ``reference`` is the motion anchor for hover/orbit
    primitives (e.g. the cup that a carried bottle pours into)."""

    action: str
    primitive: str
    start: float
    end: float
    target: str | None = None
    reference: str | None = None


PRIMITIVES = frozenset(
    {"rest", "hold_pose", "line_to_grasp", "line_to_rest", "raise", "lower", "hover_above", "orbit", "swing_y", "swing_x"}
)


@dataclass(frozen=True)
class ScenarioScript:
    name: str
    fps: float
    duration: float
    noise_sigma: float
    objects: list[SceneObjectSpec]
    phases: dict[str, list[Phase]] = field(default_factory=dict)

    def validate(self) -> None:
        if self.fps <= 0 or self.duration <= 0 or self.noise_sigma < 0:
            raise DataError("fps and duration must be positive, noise_sigma non-negative")
        names = [o.name for o in self.objects]
        if len(set(names)) != len(names):
            raise DataError("object names must be unique")
        for o in self.objects:
            if o.object_class not in OBJECT_INDEX or o.object_class in (LEFT_HAND, RIGHT_HAND):
                raise DataError(f"unknown object class {o.object_class!r}")
        for hand in ("right", "left"):
            phases = self.phases.get(hand, [])
            if not phases:
                raise DataError(f"no phases for {hand} hand")
            cursor = 0.0
            for p in phases:
                if p.action not in ACTION_INDEX:
                    raise DataError(f"unknown action token {p.action!r}")
                if p.primitive not in PRIMITIVES:
                    raise DataError(f"unknown primitive {p.primitive!r}")
                if abs(p.start - cursor) > 1e-9 or p.end <= p.start:
                    raise DataError(f"phases of {hand} hand must tile [0, duration] without overlap")
                for ref in (p.target, p.reference):
                    if ref is not None and ref not in names:
                        raise DataError(f"phase references unknown object {ref!r}")
                cursor = p.end
            if abs(cursor - self.duration) > 1e-9:
                raise DataError(f"phases of {hand} hand must cover the full duration")


def script_to_dict(script: ScenarioScript) -> dict:
    return {
        "name": script.name,
        "fps": script.fps,
        "duration": script.duration,
        "noise_sigma": script.noise_sigma,
        "objects": [
            {"name": o.name, "class": o.object_class, "size": list(o.size), "position": list(o.position)}
            for o in script.objects
        ],
        "phases": {
            hand: [
                {
                    "action": p.action,
                    "primitive": p.primitive,
                    "start": p.start,
                    "end": p.end,
                    "target": p.target,
                    "reference": p.reference,
                }
                for p in phases
            ]
            for hand, phases in script.phases.items()
        },
    }


def script_from_dict(obj: dict) -> ScenarioScript:
    try:
        script = ScenarioScript(
            name=obj["name"],
            fps=float(obj["fps"]),
            duration=float(obj["duration"]),
            noise_sigma=float(obj["noise_sigma"]),
            objects=[
                SceneObjectSpec(o["name"], o["class"], tuple(o["size"]), tuple(o["position"]))
                for o in obj["objects"]
            ],
            phases={
                hand: [
                    Phase(p["action"], p["primitive"], p["start"], p["end"], p.get("target"), p.get("reference"))
                    for p in phases
                ]
                for hand, phases in obj["phases"].items()
            },
        )
    except (KeyError, TypeError, ValueError) as err:
        raise DataError(f"malformed scenario script: {err}") from err
    script.validate()
    return script


def load_scripts(path) -> list[ScenarioScript]:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    return [script_from_dict(entry) for entry in payload["scripts"]]


def save_scripts(path, scripts: list[ScenarioScript]) -> None:
    payload = {"scripts": [script_to_dict(s) for s in scripts]}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Trajectory simulation


def _grasp_point(obj_center: np.ndarray, obj_size: np.ndarray) -> np.ndarray:
    # hand centered on the object's top face: boxes overlap for any object
    # shallower than the hand
    return obj_center + np.array([0.0, obj_size[1] / 2.0, 0.0])


class _HandState:
    def __init__(self, hand: str):
        self.position = REST_POSITIONS[hand].copy()
        self.phase_anchor = self.position.copy()
        self.current_phase: Phase | None = None


def _phase_at(phases: list[Phase], t: float) -> Phase:
    for p in phases:
        if p.start <= t < p.end:
            return p
    return phases[-1]


def generate(script: ScenarioScript, seed: int) -> list[FrameRecord]:
    """Simulate one recording. Metadata fields are filled with zeros; callers
    embedding the recording in a suite override them via ``relabel``."""
    script.validate()
    rng = np.random.default_rng(seed)
    n_frames = int(round(script.duration * script.fps))
    dt = 1.0 / script.fps

    objects = {o.name: np.asarray(o.position, dtype=float) for o in script.objects}
    sizes = {o.name: np.asarray(o.size, dtype=float) for o in script.objects}
    classes = {o.name: o.object_class for o in script.objects}
    hands = {"right": _HandState("right"), "left": _HandState("left")}

    records = []
    for frame in range(n_frames):
        t = frame * dt
        labels = {}
        for hand_name, state in hands.items():
            phase = _phase_at(script.phases[hand_name], t)
            if phase is not state.current_phase:
                state.current_phase = phase
                state.phase_anchor = state.position.copy()
            progress = (t - phase.start) / (phase.end - phase.start)
            state.position = _primitive_position(phase, progress, state, objects, sizes, hand_name)
            if phase.action in ATTACHING_ACTIONS and phase.target is not None:
                objects[phase.target] = state.position - np.array([0.0, sizes[phase.target][1] / 2.0, 0.0])
            labels[hand_name] = phase.action

        detections = []
        for name in objects:
            detections.append(_jittered_detection(classes[name], objects[name], sizes[name], script.noise_sigma, rng))
        detections.append(_jittered_detection(LEFT_HAND, hands["left"].position, HAND_SIZE, script.noise_sigma, rng))
        detections.append(_jittered_detection(RIGHT_HAND, hands["right"].position, HAND_SIZE, script.noise_sigma, rng))

        records.append(
            FrameRecord(
                recording_id=script.name,
                subject=0,
                task=0,
                repetition=0,
                frame=frame,
                timestamp=frame * dt,
                detections=detections,
                truth_right=labels["right"],
                truth_left=labels["left"],
            )
        )
    return records


def _primitive_position(phase, progress, state, objects, sizes, hand_name) -> np.ndarray:
    anchor = state.phase_anchor
    if phase.primitive in ("rest", "hold_pose"):
        return anchor.copy()
    if phase.primitive == "line_to_rest":
        return anchor + (REST_POSITIONS[hand_name] - anchor) * progress
    if phase.primitive == "line_to_grasp":
        goal = _grasp_point(objects[phase.target], sizes[phase.target])
        return anchor + (goal - anchor) * progress
    if phase.primitive == "raise":
        return anchor + np.array([0.0, 160.0, 0.0]) * progress
    if phase.primitive == "lower":
        return anchor - np.array([0.0, 160.0, 0.0]) * progress
    if phase.primitive == "hover_above":
        ref = phase.reference or phase.target
        goal = objects[ref] + np.array([0.0, sizes[ref][1] / 2.0 + 180.0, 0.0])
        move_in = min(progress / 0.25, 1.0)
        base = anchor + (goal - anchor) * move_in
        bob = 12.0 * math.sin(2.0 * math.pi * 1.5 * progress) if progress > 0.25 else 0.0
        return base + np.array([0.0, bob, 0.0])
    if phase.primitive == "orbit":
        radius, turns = 55.0, 3
        ref = phase.reference or phase.target
        center = objects[ref] + np.array([0.0, sizes[ref][1] / 2.0 + 70.0, 0.0])
        entry = center + np.array([radius, 0.0, 0.0])
        if progress < 0.2:
            return anchor + (entry - anchor) * (progress / 0.2)
        angle = 2.0 * math.pi * turns * (progress - 0.2) / 0.8
        return center + np.array([radius * math.cos(angle), 0.0, radius * math.sin(angle)])
    if phase.primitive == "swing_y":
        cycles = 4
        drop = 70.0 * (1.0 - math.cos(2.0 * math.pi * cycles * progress)) / 2.0
        return anchor - np.array([0.0, drop, 0.0])
    if phase.primitive == "swing_x":
        cycles = 4
        sweep = 90.0 * (1.0 - math.cos(2.0 * math.pi * cycles * progress)) / 2.0
        return anchor + np.array([sweep, 0.0, 0.0])
    raise DataError(f"unknown primitive {phase.primitive!r}")


def _jittered_detection(cls, center, size, sigma, rng) -> Detection:
    lo = center - size / 2.0
    hi = center + size / 2.0
    if sigma > 0:
        lo = lo + rng.normal(0.0, sigma, 3)
        hi = hi + rng.normal(0.0, sigma, 3)
    return Detection(cls, AABB3(np.minimum(lo, hi), np.maximum(lo, hi)), 1.0)


def relabel(records: list[FrameRecord], recording_id: str, subject: int, task: int, repetition: int):
    return [
        FrameRecord(recording_id, subject, task, repetition, r.frame, r.timestamp, r.detections, r.truth_right, r.truth_left)
        for r in records
    ]


# ---------------------------------------------------------------------------
# Task archetypes and suite construction


TASK_ARCHETYPES = ("pour_water", "cook_stir", "wipe_table", "hammer_nail", "saw_wood", "pour_bowl")


def _phase_plan(plan: list[tuple], duration: float) -> list[Phase]:
    """Rows are (action, primitive, length, target[, reference]); a trailing
    idle phase absorbs whatever remains of the duration."""
    phases = []
    cursor = 0.0
    for row in plan:
        action, primitive, length, target = row[:4]
        reference = row[4] if len(row) > 4 else None
        phases.append(Phase(action, primitive, cursor, cursor + length, target, reference))
        cursor += length
    phases.append(Phase("idle", "rest", cursor, duration, None))
    return phases


def make_task_script(
    task: str,
    fps: float = 10.0,
    speed: float = 1.0,
    offset: np.ndarray | None = None,
    noise_sigma: float = 2.0,
    rng: np.random.Generator | None = None,
    name: str | None = None,
) -> ScenarioScript:
    """One scripted recording of a task archetype.

    ``speed`` scales phase durations; ``offset`` shifts the whole workspace;
    ``rng`` adds small per-repetition timing and placement variation.
    """
    if task not in TASK_ARCHETYPES:
        raise DataError(f"unknown task archetype {task!r}")
    off = np.zeros(3) if offset is None else np.asarray(offset, dtype=float)
    rng = rng or np.random.default_rng(0)

    def pos(x, y, z):
        jitter = rng.uniform(-20.0, 20.0, 3) * np.array([1.0, 0.0, 1.0])
        return tuple(np.array([x, y, z]) + off + jitter)

    def d(base):  # seconds, subject-speed scaled with mild repetition jitter
        return round(base / speed * rng.uniform(0.93, 1.07), 3)

    if task == "pour_water":
        objects = [
            SceneObjectSpec("bottle", "bottle", (60, 220, 60), pos(-160, 110, 640)),
            SceneObjectSpec("cup", "cup", (70, 90, 70), pos(70, 45, 590)),
            SceneObjectSpec("bowl", "bowl", (160, 70, 160), pos(230, 35, 760)),
        ]
        right = [
            ("idle", "rest", d(0.9), None),
            ("approach", "line_to_grasp", d(1.1), "bottle"),
            ("lift", "raise", d(0.7), "bottle"),
            ("pour", "hover_above", d(2.2), "bottle"),
            ("place", "lower", d(0.7), "bottle"),
            ("retreat", "line_to_rest", d(1.1), None),
        ]
        left = [
            ("idle", "rest", d(1.3), None),
            ("approach", "line_to_grasp", d(1.1), "cup"),
            ("hold", "hold_pose", d(3.3), "cup"),
            ("retreat", "line_to_rest", d(1.1), None),
        ]
        pour_target = {"pour": "cup"}
    elif task == "cook_stir":
        objects = [
            SceneObjectSpec("bowl", "bowl", (170, 80, 170), pos(0, 40, 640)),
            SceneObjectSpec("whisk", "whisk", (40, 180, 40), pos(170, 90, 520)),
            SceneObjectSpec("bottle", "bottle", (60, 220, 60), pos(-210, 110, 700)),
        ]
        right = [
            ("idle", "rest", d(0.8), None),
            ("approach", "line_to_grasp", d(1.1), "whisk"),
            ("lift", "raise", d(0.6), "whisk"),
            ("stir", "orbit", d(2.6), "whisk"),
            ("place", "lower", d(0.6), "whisk"),
            ("retreat", "line_to_rest", d(1.1), None),
        ]
        left = [
            ("idle", "rest", d(1.0), None),
            ("approach", "line_to_grasp", d(1.1), "bottle"),
            ("lift", "raise", d(0.6), "bottle"),
            ("pour", "hover_above", d(2.0), "bottle"),
            ("place", "lower", d(0.6), "bottle"),
            ("retreat", "line_to_rest", d(1.1), None),
        ]
        pour_target = {"stir": "bowl", "pour": "bowl"}
    elif task == "wipe_table":
        objects = [
            SceneObjectSpec("sponge", "sponge", (90, 40, 90), pos(110, 20, 540)),
            SceneObjectSpec("board", "cutting_board", (250, 20, 180), pos(-110, 10, 660)),
        ]
        right = [
            ("idle", "rest", d(0.9), None),
            ("approach", "line_to_grasp", d(1.1), "sponge"),
            ("lift", "raise", d(0.6), "sponge"),
            ("wipe", "orbit", d(2.4), "sponge"),
            ("place", "lower", d(0.6), "sponge"),
            ("retreat", "line_to_rest", d(1.1), None),
        ]
        left = [
            ("idle", "rest", d(1.2), None),
            ("approach", "line_to_grasp", d(1.1), "board"),
            ("hold", "hold_pose", d(3.0), "board"),
            ("retreat", "line_to_rest", d(1.1), None),
        ]
        pour_target = {"wipe": "board"}
    elif task == "hammer_nail":
        objects = [
            SceneObjectSpec("hammer", "hammer", (200, 60, 60), pos(160, 30, 590)),
            SceneObjectSpec("wood", "wood", (200, 60, 130), pos(-90, 30, 650)),
        ]
        right = [
            ("idle", "rest", d(0.9), None),
            ("approach", "line_to_grasp", d(1.1), "hammer"),
            ("lift", "raise", d(0.6), "hammer"),
            ("hammer", "swing_y", d(2.4), "hammer"),
            ("place", "lower", d(0.6), "hammer"),
            ("retreat", "line_to_rest", d(1.1), None),
        ]
        left = [
            ("idle", "rest", d(1.2), None),
            ("approach", "line_to_grasp", d(1.1), "wood"),
            ("hold", "hold_pose", d(3.0), "wood"),
            ("retreat", "line_to_rest", d(1.1), None),
        ]
        pour_target = {}
    elif task == "saw_wood":
        objects = [
            SceneObjectSpec("saw", "saw", (250, 70, 40), pos(150, 35, 540)),
            SceneObjectSpec("wood", "wood", (200, 60, 130), pos(-90, 30, 650)),
        ]
        right = [
            ("idle", "rest", d(0.9), None),
            ("approach", "line_to_grasp", d(1.1), "saw"),
            ("lift", "raise", d(0.6), "saw"),
            ("saw", "swing_x", d(2.4), "saw"),
            ("place", "lower", d(0.6), "saw"),
            ("retreat", "line_to_rest", d(1.1), None),
        ]
        left = [
            ("idle", "rest", d(1.2), None),
            ("approach", "line_to_grasp", d(1.1), "wood"),
            ("hold", "hold_pose", d(3.0), "wood"),
            ("retreat", "line_to_rest", d(1.1), None),
        ]
        pour_target = {}
    else:  # pour_bowl
        objects = [
            SceneObjectSpec("cup", "cup", (70, 90, 70), pos(150, 45, 540)),
            SceneObjectSpec("bowl", "bowl", (180, 80, 180), pos(-70, 40, 680)),
            SceneObjectSpec("banana", "banana", (140, 40, 50), pos(260, 20, 700)),
        ]
        right = [
            ("idle", "rest", d(0.9), None),
            ("approach", "line_to_grasp", d(1.1), "cup"),
            ("lift", "raise", d(0.7), "cup"),
            ("pour", "hover_above", d(2.1), "cup"),
            ("place", "lower", d(0.7), "cup"),
            ("retreat", "line_to_rest", d(1.1), None),
        ]
        left = [
            ("idle", "rest", d(1.3), None),
            ("approach", "line_to_grasp", d(1.1), "bowl"),
            ("hold", "hold_pose", d(3.1), "bowl"),
            ("retreat", "line_to_rest", d(1.1), None),
        ]
        pour_target = {"pour": "bowl"}

    duration = round(max(sum(p[2] for p in right), sum(p[2] for p in left)) + d(0.8), 3)
    phases = {
        "right": _retarget(_phase_plan(right, duration), pour_target),
        "left": _retarget(_phase_plan(left, duration), pour_target),
    }
    script = ScenarioScript(
        name=name or task,
        fps=fps,
        duration=duration,
        noise_sigma=noise_sigma,
        objects=objects,
        phases=phases,
    )
    script.validate()
    return script


def _retarget(phases: list[Phase], over: dict[str, str]) -> list[Phase]:
    """Point hover/orbit primitives at their reference object (the grasped
    object itself still follows the hand via the attach rule)."""
    out = []
    for p in phases:
        if p.action in over and p.primitive in ("hover_above", "orbit"):
            out.append(Phase(p.action, p.primitive, p.start, p.end, p.target))
        out.append(p)
    return [p for i, p in enumerate(out) if i == len(out) - 1 or p.end > p.start]


def build_suite(
    n_subjects: int = 4,
    tasks: tuple[str, ...] = TASK_ARCHETYPES,
    reps: int = 4,
    seed: int = 0,
    fps: float = 10.0,
    noise_sigma: float = 2.0,
) -> list[Recording]:
    """Deterministic LOSO-ready dataset: per-subject speed and workspace
    offsets, per-repetition timing jitter."""
    if n_subjects < 2:
        raise DataError("leave-one-subject-out needs at least 2 subjects")
    recordings = []
    for subject in range(n_subjects):
        subject_rng = np.random.default_rng(np.random.SeedSequence((seed, 17, subject)))
        speed = 0.85 + 0.35 * subject_rng.random()
        offset = np.array([subject_rng.uniform(-80, 80), 0.0, subject_rng.uniform(-60, 60)])
        for task_idx, task in enumerate(tasks):
            for rep in range(reps):
                rec_seed = np.random.SeedSequence((seed, subject, task_idx, rep))
                rec_rng = np.random.default_rng(rec_seed)
                rec_id = f"s{subject}_t{task_idx}_r{rep}"
                script = make_task_script(
                    task,
                    fps=fps,
                    speed=speed,
                    offset=offset,
                    noise_sigma=noise_sigma,
                    rng=rec_rng,
                    name=rec_id,
                )
                frames = relabel(
                    generate(script, seed=int(rec_rng.integers(0, 2**31))),
                    rec_id,
                    subject,
                    task_idx,
                    rep,
                )
                recordings.append(Recording(rec_id, subject, task_idx, rep, fps, frames))
    return recordings
