from __future__ import annotations

import numpy as np
import pytest
from hypothesis import strategies as st

from actiongraph.geometry import AABB3


def box_strategy(lo=-500.0, hi=500.0, max_size=250.0):
    coord = st.floats(lo, hi, allow_nan=False, allow_infinity=False, width=32)
    size = st.floats(0.0, max_size, allow_nan=False, allow_infinity=False, width=32)
    return st.builds(
        lambda mins, sizes: AABB3(np.array(mins), np.array(mins) + np.array(sizes)),
        st.tuples(coord, coord, coord),
        st.tuples(size, size, size),
    )


def dyadic_box_strategy(scale=1.0 / 64.0):
    """Boxes on a dyadic grid: translations by grid values stay exact in f64."""
    coord = st.integers(-32000, 32000).map(lambda v: v * scale)
    size = st.integers(0, 16000).map(lambda v: v * scale)
    return st.builds(
        lambda mins, sizes: AABB3(np.array(mins), np.array(mins) + np.array(sizes)),
        st.tuples(coord, coord, coord),
        st.tuples(size, size, size),
    )


def dyadic_shift_strategy(scale=1.0 / 64.0):
    coord = st.integers(-64000, 64000).map(lambda v: v * scale)
    return st.tuples(coord, coord, coord)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_scene_graph(rng, n_frames=3, max_instances=4, edge_prob=0.5):
    """A structurally valid random graph spanning a few frames."""
    from actiongraph import vocab
    from actiongraph.graphs import SceneGraph, canonicalize

    instances = list(range(int(rng.integers(1, max_instances + 1))))
    classes = {i: int(rng.integers(0, vocab.N_OBJECT_CLASSES)) for i in instances}
    node_rows, node_inst, node_frame = [], [], []
    index_of = {}
    for frame in range(n_frames):
        for inst in instances:
            if rng.random() < 0.8:
                row = np.zeros(vocab.NODE_DIM)
                row[classes[inst]] = 1.0
                index_of[(frame, inst)] = len(node_rows)
                node_rows.append(row)
                node_inst.append(inst)
                node_frame.append(frame)
    if not node_rows:
        row = np.zeros(vocab.NODE_DIM)
        row[classes[0]] = 1.0
        index_of[(0, 0)] = 0
        node_rows, node_inst, node_frame = [row], [0], [0]

    senders, receivers, attrs = [], [], []
    for (frame, inst), idx in index_of.items():
        for (frame2, inst2), idx2 in index_of.items():
            if idx == idx2 or frame != frame2 or rng.random() > edge_prob:
                continue
            slots = rng.random(vocab.N_RELATIONS) < 0.25
            if not slots.any():
                slots[int(rng.integers(0, vocab.N_RELATIONS))] = True
            row = np.zeros(vocab.EDGE_DIM)
            row[: vocab.N_RELATIONS] = slots
            senders.append(idx)
            receivers.append(idx2)
            attrs.append(row)
    for (frame, inst), idx in index_of.items():
        nxt = (frame + 1, inst)
        if nxt in index_of:
            row = np.zeros(vocab.EDGE_DIM)
            row[vocab.TEMPORAL_SLOT] = 1.0
            senders.append(idx)
            receivers.append(index_of[nxt])
            attrs.append(row)

    g = SceneGraph(
        u=np.zeros(vocab.GLOBAL_DIM),
        node_attrs=np.stack(node_rows),
        node_instances=np.asarray(node_inst, dtype=np.int64),
        node_frames=np.asarray(node_frame, dtype=np.int64),
        edge_attrs=np.stack(attrs) if attrs else np.zeros((0, vocab.EDGE_DIM)),
        senders=np.asarray(senders, dtype=np.int64),
        receivers=np.asarray(receivers, dtype=np.int64),
    )
    return canonicalize(g)


def random_boxes(rng, n, lo=-500.0, hi=500.0, max_size=250.0):
    mins = rng.uniform(lo, hi, size=(n, 3))
    sizes = rng.uniform(0.0, max_size, size=(n, 3))
    return mins, mins + sizes
