"""Central finite-difference verification of the analytic gradients.

Checks every parameter against the per-graph losses of a fixed set of
random graphs. The analytic side stacks one backward pass per graph; the
finite-difference side perturbs one parameter at a time and recovers all
per-graph difference quotients from two batched forward passes, which keeps
a full sweep over every (parameter, graph) pair fast.

The relative-error denominator is floored: central differences of a float64
loss carry ~1e-11 absolute noise at h=1e-5, so gradients far below the
floor are compared absolutely rather than relatively.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import SceneGraph, canonicalize
from .network import (
    GraphNetWeights,
    NetworkConfig,
    batch_graphs,
    forward_batch,
    init_weights,
    loss_and_grads,
)
from .vocab import EDGE_DIM, GLOBAL_DIM, N_OBJECT_CLASSES, N_RELATIONS, NODE_DIM, TEMPORAL_SLOT


@dataclass(frozen=True)
class GradCheckReport:
    n_graphs: int
    n_params: int
    max_rel_err: float
    worst_param: str
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_rel_err < self.tolerance


def random_check_graph(rng: np.random.Generator, min_nodes: int = 2, max_nodes: int = 6) -> SceneGraph:
    """Small random graph with mixed spatial and temporal edges."""
    n = int(rng.integers(min_nodes, max_nodes + 1))
    node_attrs = np.zeros((n, NODE_DIM))
    node_attrs[np.arange(n), rng.integers(0, N_OBJECT_CLASSES, n)] = 1.0
    frames = np.sort(rng.integers(0, 3, n))
    instances = np.arange(n)

    senders, receivers, attrs = [], [], []
    for i in range(n):
        for j in range(n):
            if i == j or rng.random() > 0.5:
                continue
            row = np.zeros(EDGE_DIM)
            if rng.random() < 0.2:
                row[TEMPORAL_SLOT] = 1.0
            else:
                slots = rng.random(N_RELATIONS) < 0.3
                if not slots.any():
                    slots[int(rng.integers(0, N_RELATIONS))] = True
                row[:N_RELATIONS] = slots
            senders.append(i)
            receivers.append(j)
            attrs.append(row)

    return canonicalize(
        SceneGraph(
            u=np.zeros(GLOBAL_DIM),
            node_attrs=node_attrs,
            node_instances=instances,
            node_frames=frames,
            edge_attrs=np.stack(attrs) if attrs else np.zeros((0, EDGE_DIM)),
            senders=np.asarray(senders, dtype=np.int64),
            receivers=np.asarray(receivers, dtype=np.int64),
        )
    )


def random_check_weights(cfg: NetworkConfig, rng: np.random.Generator) -> GraphNetWeights:
    """Glorot weights plus random biases so bias gradients are exercised."""
    w = init_weights(cfg, seed=int(rng.integers(0, 2**31)))
    for name, value in w.params.items():
        if name.endswith((".b1", ".b2")) or name == "head.b":
            w.params[name] = rng.uniform(-0.3, 0.3, size=value.shape)
    return w


def _per_graph_losses(w: GraphNetWeights, batch, targets: np.ndarray) -> np.ndarray:
    logits, _ = forward_batch(w, batch)
    shifted = logits - logits.max(axis=1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=1))
    return lse - shifted[np.arange(len(targets)), targets]


def check_gradients(
    w: GraphNetWeights,
    graphs: list[SceneGraph],
    targets: np.ndarray,
    h: float = 1e-5,
    tolerance: float = 1e-4,
    denom_floor: float = 1e-6,
) -> GradCheckReport:
    """Compare every parameter's analytic gradient of every graph's loss
    against central differences."""
    analytic = []
    for g, target in zip(graphs, targets):
        _, grads, _ = loss_and_grads(w, batch_graphs([g], w.config), np.array([target]))
        analytic.append(np.concatenate([grads[name].ravel() for name in grads]))
    analytic_mat = np.stack(analytic)  # (n_graphs, n_params)

    batch = batch_graphs(graphs, w.config)
    max_rel, worst = 0.0, ""
    col = 0
    for name in w.params:
        flat = w.params[name].ravel()
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            plus = _per_graph_losses(w, batch, targets)
            flat[i] = orig - h
            minus = _per_graph_losses(w, batch, targets)
            flat[i] = orig
            fd = (plus - minus) / (2.0 * h)
            a = analytic_mat[:, col]
            rel = np.abs(a - fd) / np.maximum(np.maximum(np.abs(a), np.abs(fd)), denom_floor)
            worst_here = float(rel.max())
            if worst_here > max_rel:
                max_rel, worst = worst_here, f"{name}[{i}]"
            col += 1
    return GradCheckReport(
        n_graphs=len(graphs),
        n_params=col,
        max_rel_err=max_rel,
        worst_param=worst,
        tolerance=tolerance,
    )


def run_suite(
    seed: int = 0,
    n_graphs: int = 100,
    hidden: int = 8,
    steps: int = 2,
    h: float = 1e-5,
    tolerance: float = 1e-4,
) -> GradCheckReport:
    """The full seeded sweep used by the acceptance gate and the CLI."""
    rng = np.random.default_rng(seed)
    cfg = NetworkConfig(hidden=hidden, steps=steps)
    w = random_check_weights(cfg, rng)
    graphs = [random_check_graph(rng) for _ in range(n_graphs)]
    targets = rng.integers(0, cfg.n_actions, n_graphs)
    return check_gradients(w, graphs, targets, h=h, tolerance=tolerance)
