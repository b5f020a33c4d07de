"""Canonical label vocabularies and one-hot index assignments.

Every serialized artifact (frame files, graph files, weight manifests)
refers to these orderings, so they must never be reordered.
"""

from __future__ import annotations

ACTIONS: tuple[str, ...] = (
    "idle",
    "approach",
    "retreat",
    "lift",
    "place",
    "hold",
    "stir",
    "pour",
    "cut",
    "drink",
    "wipe",
    "hammer",
    "saw",
    "screw",
)

OBJECT_CLASSES: tuple[str, ...] = (
    "cup",
    "bowl",
    "whisk",
    "bottle",
    "banana",
    "cutting_board",
    "knife",
    "sponge",
    "hammer",
    "saw",
    "wood",
    "screwdriver",
    "left_hand",
    "right_hand",
)

# Spatial relations in slot order; the temporal marker takes the last slot
# of the edge attribute vector and is mutually exclusive with all of them.
RELATIONS: tuple[str, ...] = (
    "contact",
    "above",
    "below",
    "left",
    "right",
    "front",
    "behind",
    "inside",
    "surround",
    "moving_together",
    "halting_together",
    "fixed_moving_together",
    "getting_close",
    "moving_apart",
    "stable",
)

ACTION_INDEX = {name: i for i, name in enumerate(ACTIONS)}
OBJECT_INDEX = {name: i for i, name in enumerate(OBJECT_CLASSES)}
RELATION_INDEX = {name: i for i, name in enumerate(RELATIONS)}

N_ACTIONS = len(ACTIONS)
N_OBJECT_CLASSES = len(OBJECT_CLASSES)
N_RELATIONS = len(RELATIONS)

TEMPORAL_SLOT = N_RELATIONS
EDGE_DIM = N_RELATIONS + 1
NODE_DIM = N_OBJECT_CLASSES
GLOBAL_DIM = N_ACTIONS

LEFT_HAND = "left_hand"
RIGHT_HAND = "right_hand"
LEFT_HAND_IDX = OBJECT_INDEX[LEFT_HAND]
RIGHT_HAND_IDX = OBJECT_INDEX[RIGHT_HAND]
LEFT_REL_IDX = RELATION_INDEX["left"]
RIGHT_REL_IDX = RELATION_INDEX["right"]

STATIC_RELATIONS = frozenset(RELATIONS[:9])
DYNAMIC_RELATIONS = frozenset(RELATIONS[9:])

# Default timeline colors, one per action (RGB). Overridable via config.
ACTION_COLORS: dict[str, tuple[int, int, int]] = {
    "idle": (204, 204, 204),
    "approach": (255, 123, 116),
    "retreat": (255, 12, 0),
    "lift": (153, 255, 149),
    "place": (0, 255, 9),
    "hold": (246, 235, 135),
    "stir": (0, 88, 255),
    "pour": (151, 0, 255),
    "cut": (0, 158, 115),
    "drink": (255, 134, 0),
    "wipe": (86, 180, 233),
    "hammer": (140, 86, 75),
    "saw": (227, 119, 194),
    "screw": (120, 120, 0),
}
