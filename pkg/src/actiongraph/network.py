"""Encode-process-decode graph network with hand-written reverse-mode gradients.

The network is three graph blocks plus a linear output head:

* encoder: independent block (per-attribute MLPs, no aggregation),
* core: full block, run for a fixed number of processing steps; each step
  consumes the feature-wise concatenation of the encoder output and the
  previous core output,
* decoder: independent block; only its updated global attribute feeds the
  output head, the decoded edge/node attributes are computed and discarded.

Every update function is a 2-layer MLP with ReLU after both layers; all
aggregations are sums. Graphs are processed in canonical order (nodes by
(frame, instance), edges by (receiver, sender)), so sums run in a
numbering-independent order and logits are bitwise reproducible under node
permutations.

Batching concatenates graphs into one disjoint union with per-row graph
ids; a single graph is the one-graph batch, so both paths share one
implementation. All math is numpy; float64 by default.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Sequence

import numpy as np

from .graphs import SceneGraph, canonicalize, mirror
from .vocab import ACTIONS, EDGE_DIM, GLOBAL_DIM, N_ACTIONS, NODE_DIM, OBJECT_CLASSES, RELATIONS

WEIGHTS_FORMAT_VERSION = 1


@dataclass(frozen=True)
class NetworkConfig:
    hidden: int = 256
    steps: int = 10
    node_dim: int = NODE_DIM
    edge_dim: int = EDGE_DIM
    global_dim: int = GLOBAL_DIM
    n_actions: int = N_ACTIONS
    dtype: str = "float64"

    def __post_init__(self) -> None:
        if self.hidden < 1 or self.steps < 1:
            raise ValueError("hidden and steps must be positive")
        if self.dtype not in ("float64", "float32"):
            raise ValueError("dtype must be float64 or float32")

    @property
    def np_dtype(self):
        return np.float64 if self.dtype == "float64" else np.float32


class MLP(NamedTuple):
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray


class BlockParams(NamedTuple):
    edge: MLP
    node: MLP
    glob: MLP


def _mlp_input_widths(cfg: NetworkConfig) -> dict[str, int]:
    h = cfg.hidden
    return {
        "encoder.edge": cfg.edge_dim,
        "encoder.node": cfg.node_dim,
        "encoder.global": cfg.global_dim,
        # core inputs concatenate encoder output and previous core output,
        # so every attribute is 2h wide before the update functions run
        "core.edge": 8 * h,
        "core.node": 5 * h,
        "core.global": 4 * h,
        "decoder.edge": h,
        "decoder.node": h,
        "decoder.global": h,
    }


def tensor_names() -> list[str]:
    names = []
    for block in ("encoder", "core", "decoder"):
        for fn in ("edge", "node", "global"):
            for tensor in ("w1", "b1", "w2", "b2"):
                names.append(f"{block}.{fn}.{tensor}")
    names.extend(["head.w", "head.b"])
    return names


@dataclass
class GraphNetWeights:
    """All network parameters as named tensors in canonical order."""

    config: NetworkConfig
    params: dict[str, np.ndarray] = field(default_factory=dict)

    def mlp(self, key: str) -> MLP:
        p = self.params
        return MLP(p[f"{key}.w1"], p[f"{key}.b1"], p[f"{key}.w2"], p[f"{key}.b2"])

    def block(self, name: str) -> BlockParams:
        return BlockParams(self.mlp(f"{name}.edge"), self.mlp(f"{name}.node"), self.mlp(f"{name}.global"))

    def copy(self) -> "GraphNetWeights":
        return GraphNetWeights(self.config, {k: v.copy() for k, v in self.params.items()})

    def validate_shapes(self) -> None:
        expected = expected_shapes(self.config)
        for name, shape in expected.items():
            if name not in self.params:
                raise ValueError(f"missing tensor {name}")
            if tuple(self.params[name].shape) != shape:
                raise ValueError(f"tensor {name} has shape {self.params[name].shape}, expected {shape}")
        for name, value in self.params.items():
            if name not in expected:
                raise ValueError(f"unexpected tensor {name}")
            if not np.all(np.isfinite(value)):
                raise ValueError(f"tensor {name} contains non-finite values")


def expected_shapes(cfg: NetworkConfig) -> dict[str, tuple[int, ...]]:
    h = cfg.hidden
    widths = _mlp_input_widths(cfg)
    shapes: dict[str, tuple[int, ...]] = {}
    for key, w_in in widths.items():
        shapes[f"{key}.w1"] = (w_in, h)
        shapes[f"{key}.b1"] = (h,)
        shapes[f"{key}.w2"] = (h, h)
        shapes[f"{key}.b2"] = (h,)
    shapes["head.w"] = (h, cfg.n_actions)
    shapes["head.b"] = (cfg.n_actions,)
    return shapes


def init_weights(cfg: NetworkConfig, seed: int) -> GraphNetWeights:
    """Glorot-uniform weight matrices, zero biases, seeded."""
    rng = np.random.default_rng(seed)
    params: dict[str, np.ndarray] = {}
    for name in tensor_names():
        shape = expected_shapes(cfg)[name]
        if name.endswith((".b1", ".b2")) or name == "head.b":
            params[name] = np.zeros(shape, dtype=cfg.np_dtype)
        else:
            fan_in, fan_out = shape
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            params[name] = rng.uniform(-limit, limit, size=shape).astype(cfg.np_dtype)
    return GraphNetWeights(cfg, params)


def zero_grads(w: GraphNetWeights) -> dict[str, np.ndarray]:
    return {name: np.zeros_like(value) for name, value in w.params.items()}


# ---------------------------------------------------------------------------
# Batched graph container


@dataclass
class GraphBatch:
    node_attrs: np.ndarray  # (sum_n, node_dim)
    edge_attrs: np.ndarray  # (sum_m, edge_dim)
    u: np.ndarray           # (B, global_dim)
    senders: np.ndarray
    receivers: np.ndarray
    node_graph: np.ndarray  # graph id per node, non-decreasing
    edge_graph: np.ndarray  # graph id per edge, non-decreasing
    n_graphs: int

    @property
    def n_nodes(self) -> int:
        return self.node_attrs.shape[0]


def batch_graphs(graphs: Sequence[SceneGraph], cfg: NetworkConfig) -> GraphBatch:
    """Disjoint union of canonicalized graphs, in input order."""
    if not graphs:
        raise ValueError("cannot batch zero graphs")
    dtype = cfg.np_dtype
    canon = [canonicalize(g) for g in graphs]
    for g in canon:
        if g.node_dim != cfg.node_dim:
            raise ValueError(f"graph node width {g.node_dim} does not match network ({cfg.node_dim})")
    n_counts = [g.n_nodes for g in canon]
    m_counts = [g.n_edges for g in canon]
    offsets = np.cumsum([0] + n_counts)
    return GraphBatch(
        node_attrs=np.concatenate([g.node_attrs for g in canon], axis=0).astype(dtype),
        edge_attrs=np.concatenate([g.edge_attrs for g in canon], axis=0).astype(dtype),
        u=np.stack([g.u for g in canon]).astype(dtype),
        senders=np.concatenate([g.senders + off for g, off in zip(canon, offsets)]),
        receivers=np.concatenate([g.receivers + off for g, off in zip(canon, offsets)]),
        node_graph=np.repeat(np.arange(len(canon)), n_counts),
        edge_graph=np.repeat(np.arange(len(canon)), m_counts),
        n_graphs=len(canon),
    )


def _segment_sum(values: np.ndarray, sorted_ids: np.ndarray, n_out: int) -> np.ndarray:
    """Sum rows of ``values`` by non-decreasing ``sorted_ids``; absent ids give zeros."""
    out = np.zeros((n_out, values.shape[1]), dtype=values.dtype)
    if values.shape[0]:
        starts = np.flatnonzero(np.r_[True, sorted_ids[1:] != sorted_ids[:-1]])
        out[sorted_ids[starts]] = np.add.reduceat(values, starts, axis=0)
    return out


# ---------------------------------------------------------------------------
# MLP primitives


def _mlp_forward(p: MLP, x: np.ndarray):
    if x.shape[1] != p.w1.shape[0]:
        raise ValueError(f"shape mismatch: input width {x.shape[1]}, expected {p.w1.shape[0]}")
    z1 = x @ p.w1 + p.b1
    a1 = np.maximum(z1, 0.0)
    z2 = a1 @ p.w2 + p.b2
    out = np.maximum(z2, 0.0)
    return out, (x, z1 > 0, a1, z2 > 0)


def _mlp_backward(p: MLP, cache, dout: np.ndarray, grads: dict, key: str) -> np.ndarray:
    x, m1, a1, m2 = cache
    dz2 = dout * m2
    grads[f"{key}.w2"] += a1.T @ dz2
    grads[f"{key}.b2"] += dz2.sum(axis=0)
    dz1 = (dz2 @ p.w2.T) * m1
    grads[f"{key}.w1"] += x.T @ dz1
    grads[f"{key}.b1"] += dz1.sum(axis=0)
    return dz1 @ p.w1.T


# ---------------------------------------------------------------------------
# Graph network blocks (batched internals)


def _independent_forward(block: BlockParams, e, v, u):
    e1, ce = _mlp_forward(block.edge, e)
    v1, cv = _mlp_forward(block.node, v)
    u1, cu = _mlp_forward(block.glob, u)
    return (e1, v1, u1), (ce, cv, cu)


def _core_forward(block: BlockParams, ecat, vcat, ucat, batch: GraphBatch):
    edge_in = np.concatenate(
        [ecat, vcat[batch.senders], vcat[batch.receivers], ucat[batch.edge_graph]], axis=1
    )
    e1, ce = _mlp_forward(block.edge, edge_in)
    ebar = _segment_sum(e1, batch.receivers, batch.n_nodes)
    node_in = np.concatenate([ebar, vcat, ucat[batch.node_graph]], axis=1)
    v1, cv = _mlp_forward(block.node, node_in)
    esum = _segment_sum(e1, batch.edge_graph, batch.n_graphs)
    vsum = _segment_sum(v1, batch.node_graph, batch.n_graphs)
    u_in = np.concatenate([esum, vsum, ucat], axis=1)
    u1, cu = _mlp_forward(block.glob, u_in)
    return (e1, v1, u1), (ce, cv, cu)


def forward_batch(w: GraphNetWeights, batch: GraphBatch, steps: int | None = None):
    """Logits for every graph in the batch plus the activation cache."""
    cfg = w.config
    steps = cfg.steps if steps is None else steps
    latent0, enc_cache = _independent_forward(w.block("encoder"), batch.edge_attrs, batch.node_attrs, batch.u)

    core = w.block("core")
    latent = latent0
    core_caches = []
    for _ in range(steps):
        ecat = np.concatenate([latent0[0], latent[0]], axis=1)
        vcat = np.concatenate([latent0[1], latent[1]], axis=1)
        ucat = np.concatenate([latent0[2], latent[2]], axis=1)
        latent, caches = _core_forward(core, ecat, vcat, ucat, batch)
        core_caches.append(caches)

    decoded, dec_cache = _independent_forward(w.block("decoder"), *latent)
    logits = decoded[2] @ w.params["head.w"] + w.params["head.b"]
    cache = {
        "batch": batch,
        "steps": steps,
        "enc": enc_cache,
        "core": core_caches,
        "dec": dec_cache,
        "dec_u_out": decoded[2],
        "logits": logits,
    }
    return logits, cache


def backward_batch(w: GraphNetWeights, cache: dict, dlogits: np.ndarray) -> dict[str, np.ndarray]:
    """Gradients of a scalar loss with given d loss / d logits."""
    cfg = w.config
    h = cfg.hidden
    batch: GraphBatch = cache["batch"]
    grads = zero_grads(w)

    grads["head.w"] += cache["dec_u_out"].T @ dlogits
    grads["head.b"] += dlogits.sum(axis=0)
    d_dec_u = dlogits @ w.params["head.w"].T

    # decoder edge/node outputs never reach the loss: their params keep zero
    # gradients and contribute nothing upstream
    d_u = _mlp_backward(w.block("decoder").glob, cache["dec"][2], d_dec_u, grads, "decoder.global")
    d_e = np.zeros((batch.edge_attrs.shape[0], h), dtype=d_u.dtype)
    d_v = np.zeros((batch.n_nodes, h), dtype=d_u.dtype)

    core = w.block("core")
    d_e0 = np.zeros_like(d_e)
    d_v0 = np.zeros_like(d_v)
    d_u0 = np.zeros_like(d_u)
    for ce, cv, cu in reversed(cache["core"]):
        du_in = _mlp_backward(core.glob, cu, d_u, grads, "core.global")
        desum, dvsum, ducat = du_in[:, :h], du_in[:, h : 2 * h], du_in[:, 2 * h :]
        d_v = d_v + dvsum[batch.node_graph]
        d_e = d_e + desum[batch.edge_graph]

        dnode_in = _mlp_backward(core.node, cv, d_v, grads, "core.node")
        debar, dvcat = dnode_in[:, :h], dnode_in[:, h : 3 * h]
        ducat = ducat + _segment_sum(dnode_in[:, 3 * h :], batch.node_graph, batch.n_graphs)
        d_e = d_e + debar[batch.receivers]

        dedge_in = _mlp_backward(core.edge, ce, d_e, grads, "core.edge")
        decat = dedge_in[:, : 2 * h]
        np.add.at(dvcat, batch.senders, dedge_in[:, 2 * h : 4 * h])
        np.add.at(dvcat, batch.receivers, dedge_in[:, 4 * h : 6 * h])
        ducat = ducat + _segment_sum(dedge_in[:, 6 * h :], batch.edge_graph, batch.n_graphs)

        d_e0 += decat[:, :h]
        d_v0 += dvcat[:, :h]
        d_u0 += ducat[:, :h]
        d_e = decat[:, h:]
        d_v = dvcat[:, h:]
        d_u = ducat[:, h:]

    # the step-1 "previous" latent is the encoder output itself
    d_e0 += d_e
    d_v0 += d_v
    d_u0 += d_u

    enc = w.block("encoder")
    _mlp_backward(enc.edge, cache["enc"][0], d_e0, grads, "encoder.edge")
    _mlp_backward(enc.node, cache["enc"][1], d_v0, grads, "encoder.node")
    _mlp_backward(enc.glob, cache["enc"][2], d_u0, grads, "encoder.global")
    return grads


# ---------------------------------------------------------------------------
# Loss


def softmax(logits: np.ndarray) -> np.ndarray:
    """Stable softmax over the last axis."""
    shifted = logits - np.max(logits, axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def cross_entropy(probabilities: np.ndarray, target_one_hot: np.ndarray) -> float:
    """Negative log-probability of the target class."""
    p = float(probabilities[np.argmax(target_one_hot)])
    with np.errstate(divide="ignore"):
        return float(-np.log(p))


def batch_loss_from_logits(logits: np.ndarray, targets: np.ndarray) -> float:
    """Mean cross-entropy of softmax(logits) against integer targets."""
    shifted = logits - np.max(logits, axis=1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=1))
    picked = shifted[np.arange(len(targets)), targets]
    return float(np.mean(lse - picked))


def loss_and_grads(w: GraphNetWeights, batch: GraphBatch, targets: np.ndarray):
    """Mean cross-entropy over the batch and its parameter gradients."""
    logits, cache = forward_batch(w, batch)
    loss = batch_loss_from_logits(logits, targets)
    dlogits = softmax(logits)
    dlogits[np.arange(len(targets)), targets] -= 1.0
    dlogits /= len(targets)
    grads = backward_batch(w, cache, dlogits)
    return loss, grads, logits


# ---------------------------------------------------------------------------
# Single-graph API


@dataclass(frozen=True)
class LatentGraph:
    """Graph-shaped attribute bundle with dense real vectors."""

    edge_attrs: np.ndarray
    node_attrs: np.ndarray
    u: np.ndarray
    senders: np.ndarray
    receivers: np.ndarray


def as_latent(g: SceneGraph) -> LatentGraph:
    return LatentGraph(
        edge_attrs=np.asarray(g.edge_attrs, dtype=np.float64),
        node_attrs=np.asarray(g.node_attrs, dtype=np.float64),
        u=np.asarray(g.u, dtype=np.float64),
        senders=g.senders,
        receivers=g.receivers,
    )


def independent_block_forward(g: LatentGraph | SceneGraph, block: BlockParams) -> LatentGraph:
    """Per-attribute MLP update; no aggregation, topology unchanged."""
    if isinstance(g, SceneGraph):
        g = as_latent(g)
    (e1, v1, u1), _ = _independent_forward(block, g.edge_attrs, g.node_attrs, g.u[None, :])
    return replace(g, edge_attrs=e1, node_attrs=v1, u=u1[0])


def full_block_forward(g: LatentGraph | SceneGraph, block: BlockParams) -> LatentGraph:
    """Edge, node, and global updates with sum aggregations."""
    if isinstance(g, SceneGraph):
        g = as_latent(g)
    n, m = g.node_attrs.shape[0], g.edge_attrs.shape[0]
    batch = GraphBatch(
        node_attrs=g.node_attrs,
        edge_attrs=g.edge_attrs,
        u=g.u[None, :],
        senders=g.senders,
        receivers=g.receivers,
        node_graph=np.zeros(n, dtype=np.int64),
        edge_graph=np.zeros(m, dtype=np.int64),
        n_graphs=1,
    )
    (e1, v1, u1), _ = _core_forward(block, g.edge_attrs, g.node_attrs, g.u[None, :], batch)
    return replace(g, edge_attrs=e1, node_attrs=v1, u=u1[0])


def encode_process_decode_forward(g: SceneGraph, w: GraphNetWeights, steps: int | None = None):
    """Action logits for one scene graph plus the cache for ``backward``."""
    batch = batch_graphs([g], w.config)
    logits, cache = forward_batch(w, batch, steps=steps)
    return logits[0], cache


def backward(cache: dict, target: int | np.ndarray, w: GraphNetWeights) -> dict[str, np.ndarray]:
    """Gradients of the cross-entropy loss at the cached forward pass."""
    logits = cache["logits"]
    targets = np.atleast_1d(target if np.ndim(target) == 0 else np.argmax(target))
    dlogits = softmax(logits)
    dlogits[np.arange(logits.shape[0]), targets] -= 1.0
    dlogits /= logits.shape[0]
    return backward_batch(w, cache, dlogits)


def predict_bimanual(g: SceneGraph, w: GraphNetWeights) -> tuple[np.ndarray, np.ndarray]:
    """Per-hand action distributions: the graph as-is scores the right hand,
    its mirror scores the left."""
    right_logits, _ = encode_process_decode_forward(g, w)
    left_logits, _ = encode_process_decode_forward(mirror(g), w)
    return softmax(right_logits), softmax(left_logits)


def predict_proba(graphs: Sequence[SceneGraph], w: GraphNetWeights, chunk: int = 512) -> np.ndarray:
    """Batched softmax outputs for many graphs."""
    outputs = []
    for start in range(0, len(graphs), chunk):
        batch = batch_graphs(graphs[start : start + chunk], w.config)
        logits, _ = forward_batch(w, batch)
        outputs.append(softmax(logits))
    return np.concatenate(outputs, axis=0)


# ---------------------------------------------------------------------------
# Serialization


def save_weights(path, w: GraphNetWeights) -> None:
    w.validate_shapes()
    manifest = {
        "format": "actiongraph-weights",
        "version": WEIGHTS_FORMAT_VERSION,
        "hidden": w.config.hidden,
        "steps": w.config.steps,
        "node_dim": w.config.node_dim,
        "edge_dim": w.config.edge_dim,
        "global_dim": w.config.global_dim,
        "n_actions": w.config.n_actions,
        "dtype": w.config.dtype,
        "actions": list(ACTIONS),
        "objects": list(OBJECT_CLASSES),
        "relations": list(RELATIONS),
        "tensors": tensor_names(),
    }
    arrays = {f"param:{name}": w.params[name] for name in tensor_names()}
    np.savez(path, manifest=np.array(json.dumps(manifest, sort_keys=True)), **arrays)


def load_weights(path) -> GraphNetWeights:
    with np.load(path, allow_pickle=False) as data:
        manifest = json.loads(str(data["manifest"]))
        if manifest.get("format") != "actiongraph-weights":
            raise ValueError("manifest mismatch: not a weights file")
        if manifest.get("version") != WEIGHTS_FORMAT_VERSION:
            raise ValueError(f"manifest mismatch: unsupported version {manifest.get('version')}")
        for key, expected in (("actions", ACTIONS), ("objects", OBJECT_CLASSES), ("relations", RELATIONS)):
            if tuple(manifest.get(key, ())) != expected:
                raise ValueError(f"manifest mismatch: {key} ordering differs from this build")
        cfg = NetworkConfig(
            hidden=manifest["hidden"],
            steps=manifest["steps"],
            node_dim=manifest["node_dim"],
            edge_dim=manifest["edge_dim"],
            global_dim=manifest["global_dim"],
            n_actions=manifest["n_actions"],
            dtype=manifest["dtype"],
        )
        params = {name: data[f"param:{name}"] for name in manifest["tensors"]}
    w = GraphNetWeights(cfg, params)
    w.validate_shapes()
    return w
