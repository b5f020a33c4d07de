"""Attributed scene graphs: construction, temporal concatenation, mirroring.

A scene graph is a directed attributed graph. Nodes carry a one-hot object
class vector (optionally extended with extra feature columns), the object's
instance id, and the frame the node belongs to. Each edge carries a 16-wide
attribute: 15 multi-hot spatial relation slots plus one temporal slot that
is mutually exclusive with all spatial slots. The graph-level attribute
``u`` is an action one-hot (training target) or all zeros (network input).

Edges are directed and describe the sender relative to the receiver, so an
interacting pair contributes two edges. Temporal edges link the nodes of
one instance across consecutive frames, oldest to newest.

Graphs are immutable values; all operations return new graphs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

from .geometry import AABB3, centroid
from .vocab import (
    ACTION_INDEX,
    EDGE_DIM,
    GLOBAL_DIM,
    LEFT_HAND_IDX,
    LEFT_REL_IDX,
    N_RELATIONS,
    NODE_DIM,
    OBJECT_INDEX,
    RELATION_INDEX,
    RIGHT_HAND_IDX,
    RIGHT_REL_IDX,
    TEMPORAL_SLOT,
)

GRAPH_FORMAT_VERSION = 1


class TrackedBox(NamedTuple):
    instance_id: int
    object_class: str
    box: AABB3


@dataclass(frozen=True)
class SceneGraph:
    u: np.ndarray               # (GLOBAL_DIM,)
    node_attrs: np.ndarray      # (n, >=NODE_DIM); first NODE_DIM columns are the class one-hot
    node_instances: np.ndarray  # (n,) int
    node_frames: np.ndarray     # (n,) int
    edge_attrs: np.ndarray      # (m, EDGE_DIM)
    senders: np.ndarray         # (m,) int node indices
    receivers: np.ndarray       # (m,) int node indices
    node_centroids: np.ndarray | None = None  # (n, 3) mm, kept for the centroid ablation

    @property
    def n_nodes(self) -> int:
        return self.node_attrs.shape[0]

    @property
    def n_edges(self) -> int:
        return self.edge_attrs.shape[0]

    @property
    def node_dim(self) -> int:
        return self.node_attrs.shape[1]

    def validate(self) -> None:
        """Raise if any structural invariant is violated."""
        n, m = self.n_nodes, self.n_edges
        if self.u.shape != (GLOBAL_DIM,):
            raise ValueError("u has wrong shape")
        u_sum = self.u.sum()
        if not (u_sum == 0.0 or (u_sum == 1.0 and np.all((self.u == 0) | (self.u == 1)))):
            raise ValueError("u must be all-zero or one-hot")
        if self.node_instances.shape != (n,) or self.node_frames.shape != (n,):
            raise ValueError("node table shapes disagree")
        classes = self.node_attrs[:, :NODE_DIM]
        if not np.all((classes == 0) | (classes == 1)) or not np.all(classes.sum(axis=1) == 1):
            raise ValueError("node class block must be one-hot")
        if self.edge_attrs.shape != (m, EDGE_DIM):
            raise ValueError("edge attrs have wrong shape")
        if m:
            endpoints = np.concatenate([self.senders, self.receivers])
            if endpoints.min() < 0 or endpoints.max() >= n:
                raise ValueError("edge endpoint out of range")
            if np.any(self.senders == self.receivers):
                raise ValueError("self-edges are not allowed")
            temporal = self.edge_attrs[:, TEMPORAL_SLOT] == 1
            if np.any(self.edge_attrs[temporal, :N_RELATIONS] != 0):
                raise ValueError("temporal edges must carry no spatial slots")
        if self.node_centroids is not None and self.node_centroids.shape != (n, 3):
            raise ValueError("node centroids have wrong shape")


def encode_action(action: str) -> np.ndarray:
    out = np.zeros(GLOBAL_DIM)
    out[ACTION_INDEX[action]] = 1.0
    return out


def encode_object(object_class: str) -> np.ndarray:
    out = np.zeros(NODE_DIM)
    out[OBJECT_INDEX[object_class]] = 1.0
    return out


def encode_relations(relations: Iterable[str], temporal: bool = False) -> np.ndarray:
    out = np.zeros(EDGE_DIM)
    relations = tuple(relations)
    if temporal:
        if relations:
            raise ValueError("temporal edges carry no spatial relations")
        out[TEMPORAL_SLOT] = 1.0
        return out
    for name in relations:
        out[RELATION_INDEX[name]] = 1.0
    return out


RelationEvaluator = Callable[[Sequence[TrackedBox]], np.ndarray]


def build_frame_graph(
    tracked: Sequence[TrackedBox],
    evaluator: RelationEvaluator,
    frame: int = 0,
) -> SceneGraph:
    """One node per tracked object; one edge per ordered pair with relations.

    ``evaluator`` maps the tracked list to a boolean (N, N, 15) tensor giving
    the relations of object i relative to object j; pairs whose relation set
    is empty produce no edge. ``u`` is zeroed.
    """
    ids = [t.instance_id for t in tracked]
    if len(set(ids)) != len(ids):
        raise ValueError("instance ids must be distinct")
    n = len(tracked)
    node_attrs = np.zeros((n, NODE_DIM))
    for i, t in enumerate(tracked):
        node_attrs[i, OBJECT_INDEX[t.object_class]] = 1.0
    cents = (
        np.stack([centroid(t.box) for t in tracked]) if n else np.zeros((0, 3))
    )

    rel = evaluator(tracked) if n else np.zeros((0, 0, N_RELATIONS), dtype=bool)
    senders_list, receivers_list, attrs_list = [], [], []
    pairs = np.argwhere(rel.any(axis=2))
    for i, j in pairs:
        attrs = np.zeros(EDGE_DIM)
        attrs[:N_RELATIONS] = rel[i, j]
        senders_list.append(i)
        receivers_list.append(j)
        attrs_list.append(attrs)

    return canonicalize(
        SceneGraph(
            u=np.zeros(GLOBAL_DIM),
            node_attrs=node_attrs,
            node_instances=np.asarray(ids, dtype=np.int64),
            node_frames=np.full(n, frame, dtype=np.int64),
            edge_attrs=np.stack(attrs_list) if attrs_list else np.zeros((0, EDGE_DIM)),
            senders=np.asarray(senders_list, dtype=np.int64),
            receivers=np.asarray(receivers_list, dtype=np.int64),
            node_centroids=cents,
        )
    )


def temporal_concat(graphs: Sequence[SceneGraph], window: int = 10) -> SceneGraph:
    """Merge consecutive frame graphs into one, adding temporal edges.

    Nodes and spatial edges of all inputs are preserved; each instance that
    appears in two consecutive input graphs gains a temporal edge from its
    older node to its newer node. ``u`` is adopted from the newest graph.
    """
    if not graphs:
        raise ValueError("temporal_concat needs at least one graph")
    if len(graphs) > window:
        raise ValueError(f"window holds at most {window} graphs, got {len(graphs)}")

    offsets = np.cumsum([0] + [g.n_nodes for g in graphs])
    node_attrs = np.concatenate([g.node_attrs for g in graphs], axis=0)
    node_instances = np.concatenate([g.node_instances for g in graphs])
    node_frames = np.concatenate([g.node_frames for g in graphs])
    senders = np.concatenate([g.senders + off for g, off in zip(graphs, offsets)])
    receivers = np.concatenate([g.receivers + off for g, off in zip(graphs, offsets)])
    edge_attrs = np.concatenate([g.edge_attrs for g in graphs], axis=0)

    temporal_attr = np.zeros(EDGE_DIM)
    temporal_attr[TEMPORAL_SLOT] = 1.0
    t_senders, t_receivers = [], []
    for older, newer, off_old, off_new in zip(graphs, graphs[1:], offsets, offsets[1:]):
        newer_pos = {inst: k for k, inst in enumerate(newer.node_instances)}
        for k, inst in enumerate(older.node_instances):
            if inst in newer_pos:
                t_senders.append(off_old + k)
                t_receivers.append(off_new + newer_pos[inst])
    if t_senders:
        senders = np.concatenate([senders, np.asarray(t_senders, dtype=np.int64)])
        receivers = np.concatenate([receivers, np.asarray(t_receivers, dtype=np.int64)])
        edge_attrs = np.concatenate([edge_attrs, np.tile(temporal_attr, (len(t_senders), 1))])

    cents = None
    if all(g.node_centroids is not None for g in graphs):
        cents = np.concatenate([g.node_centroids for g in graphs], axis=0)

    return canonicalize(
        SceneGraph(
            u=graphs[-1].u.copy(),
            node_attrs=node_attrs,
            node_instances=node_instances,
            node_frames=node_frames,
            edge_attrs=edge_attrs,
            senders=senders,
            receivers=receivers,
            node_centroids=cents,
        )
    )


def mirror(g: SceneGraph) -> SceneGraph:
    """Swap the left/right hand classes and the left/right relation slots."""
    node_attrs = g.node_attrs.copy()
    node_attrs[:, [LEFT_HAND_IDX, RIGHT_HAND_IDX]] = node_attrs[:, [RIGHT_HAND_IDX, LEFT_HAND_IDX]]
    edge_attrs = g.edge_attrs.copy()
    edge_attrs[:, [LEFT_REL_IDX, RIGHT_REL_IDX]] = edge_attrs[:, [RIGHT_REL_IDX, LEFT_REL_IDX]]
    return replace(g, node_attrs=node_attrs, edge_attrs=edge_attrs)


def canonicalize(g: SceneGraph) -> SceneGraph:
    """Reorder nodes by (frame, instance) and edges by (receiver, sender).

    Gives one canonical layout for any node numbering of the same graph, so
    downstream floating-point aggregations sum in a numbering-independent
    order.
    """
    node_order = np.lexsort((g.node_instances, g.node_frames))
    remap = np.empty(g.n_nodes, dtype=np.int64)
    remap[node_order] = np.arange(g.n_nodes)
    senders = remap[g.senders] if g.n_edges else g.senders
    receivers = remap[g.receivers] if g.n_edges else g.receivers
    edge_order = np.lexsort((senders, receivers))
    return SceneGraph(
        u=g.u,
        node_attrs=g.node_attrs[node_order],
        node_instances=g.node_instances[node_order],
        node_frames=g.node_frames[node_order],
        edge_attrs=g.edge_attrs[edge_order],
        senders=senders[edge_order],
        receivers=receivers[edge_order],
        node_centroids=None if g.node_centroids is None else g.node_centroids[node_order],
    )


def permute_nodes(g: SceneGraph, perm: np.ndarray) -> SceneGraph:
    """Relabel nodes by ``perm`` (new index of each old node); same graph."""
    perm = np.asarray(perm, dtype=np.int64)
    inverse = np.empty_like(perm)
    inverse[perm] = np.arange(g.n_nodes)
    return SceneGraph(
        u=g.u,
        node_attrs=g.node_attrs[inverse],
        node_instances=g.node_instances[inverse],
        node_frames=g.node_frames[inverse],
        edge_attrs=g.edge_attrs,
        senders=perm[g.senders] if g.n_edges else g.senders,
        receivers=perm[g.receivers] if g.n_edges else g.receivers,
        node_centroids=None if g.node_centroids is None else g.node_centroids[inverse],
    )


def graphs_equal(a: SceneGraph, b: SceneGraph) -> bool:
    if a.node_dim != b.node_dim or a.n_nodes != b.n_nodes or a.n_edges != b.n_edges:
        return False
    same = (
        np.array_equal(a.u, b.u)
        and np.array_equal(a.node_attrs, b.node_attrs)
        and np.array_equal(a.node_instances, b.node_instances)
        and np.array_equal(a.node_frames, b.node_frames)
        and np.array_equal(a.edge_attrs, b.edge_attrs)
        and np.array_equal(a.senders, b.senders)
        and np.array_equal(a.receivers, b.receivers)
    )
    if not same:
        return False
    if (a.node_centroids is None) != (b.node_centroids is None):
        return False
    return a.node_centroids is None or np.array_equal(a.node_centroids, b.node_centroids)


# ---------------------------------------------------------------------------
# Line-delimited serialization: one JSON record per graph. Node rows are
# [class_slot, instance, frame]; edge rows are [sender, receiver, slots...].


def graph_to_record(g: SceneGraph) -> dict:
    g.validate()
    record: dict = {
        "u": [int(v) for v in g.u],
        "nodes": [
            [int(np.argmax(g.node_attrs[i, :NODE_DIM])), int(g.node_instances[i]), int(g.node_frames[i])]
            for i in range(g.n_nodes)
        ],
        "edges": [
            [int(g.senders[k]), int(g.receivers[k])] + [int(s) for s in np.flatnonzero(g.edge_attrs[k])]
            for k in range(g.n_edges)
        ],
    }
    if g.node_centroids is not None:
        record["centroids"] = [[float(v) for v in row] for row in g.node_centroids]
    return record


def graph_from_record(record: dict) -> SceneGraph:
    nodes = record["nodes"]
    n = len(nodes)
    node_attrs = np.zeros((n, NODE_DIM))
    node_instances = np.zeros(n, dtype=np.int64)
    node_frames = np.zeros(n, dtype=np.int64)
    for i, (slot, inst, frame) in enumerate(nodes):
        node_attrs[i, slot] = 1.0
        node_instances[i] = inst
        node_frames[i] = frame
    edges = record["edges"]
    edge_attrs = np.zeros((len(edges), EDGE_DIM))
    senders = np.zeros(len(edges), dtype=np.int64)
    receivers = np.zeros(len(edges), dtype=np.int64)
    for k, row in enumerate(edges):
        senders[k], receivers[k] = row[0], row[1]
        for slot in row[2:]:
            edge_attrs[k, slot] = 1.0
    u = np.asarray(record["u"], dtype=np.float64)
    cents = None
    if "centroids" in record:
        cents = np.asarray(record["centroids"], dtype=np.float64).reshape(n, 3)
    return SceneGraph(
        u=u,
        node_attrs=node_attrs,
        node_instances=node_instances,
        node_frames=node_frames,
        edge_attrs=edge_attrs,
        senders=senders,
        receivers=receivers,
        node_centroids=cents,
    )


def save_graphs(path, graphs: Sequence[SceneGraph], fps: float) -> None:
    lines = [json.dumps({"format": "actiongraph-graphs", "version": GRAPH_FORMAT_VERSION, "fps": fps})]
    lines.extend(json.dumps(graph_to_record(g), sort_keys=True) for g in graphs)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_graphs(path) -> tuple[list[SceneGraph], float]:
    with open(path, encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        if header.get("format") != "actiongraph-graphs" or header.get("version") != GRAPH_FORMAT_VERSION:
            raise ValueError(f"unsupported graph file header: {header}")
        graphs = [graph_from_record(json.loads(line)) for line in fh if line.strip()]
    return graphs, float(header["fps"])
