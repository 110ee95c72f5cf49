"""Decentralized localization baselines: neighborhood diffusion and
sink-box intersection. Both use only information a node could gather
locally (neighbor estimates, sinks heard directly)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import NodeId, Point

Box = tuple[float, float, float, float]  # x_min, x_max, y_min, y_max


@dataclass(frozen=True)
class BaselineConfig:
    """Diffusion iteration budget and early-stop movement threshold."""

    iterations: int = 50
    eps: float = 0.01

    def __post_init__(self) -> None:
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.eps < 0:
            raise ValueError("eps must be nonnegative")


def diffusion(state, cfg: BaselineConfig = BaselineConfig()) -> dict[NodeId, Point]:
    """Synchronous neighborhood-centroid iteration.

    Anchors stay at their true positions; every other node starts at the
    area center and repeatedly moves to the centroid of its neighbors'
    previous-round positions, until movement drops below eps or the
    iteration budget runs out. Isolated nodes never move.
    """
    ids = sorted(state.nodes)
    index = {nid: i for i, nid in enumerate(ids)}
    anchor = np.array([nid in state.anchor_ids for nid in ids])
    center = state.area_center()
    pos = np.array(
        [
            [state.nodes[nid].true_position.x, state.nodes[nid].true_position.y]
            if nid in state.anchor_ids
            else [center.x, center.y]
            for nid in ids
        ]
    )
    neighbor_idx = [
        [index[v] for v in state.graph.neighbors(nid)] if nid in state.graph else []
        for nid in ids
    ]
    for _ in range(cfg.iterations):
        new_pos = pos.copy()
        for i, nbrs in enumerate(neighbor_idx):
            if anchor[i] or not nbrs:
                continue
            new_pos[i] = pos[nbrs].mean(axis=0)
        moved = float(np.max(np.hypot(*(new_pos - pos).T))) if len(ids) else 0.0
        pos = new_pos
        if moved < cfg.eps:
            break
    return {
        nid: Point(float(pos[index[nid]][0]), float(pos[index[nid]][1]))
        for nid in ids
        if nid not in state.anchor_ids
    }


def intersect_boxes(boxes: list[Box]) -> tuple[Box, bool]:
    """Intersect axis-aligned boxes; returns (box, fell_back).

    When the full intersection is empty, falls back to the pair of boxes
    with the smallest consistent (nonempty) intersection, ties broken by
    input order; if no pair is consistent, the first box wins.
    """
    if not boxes:
        raise ValueError("need at least one box")

    def meet(a: Box, b: Box) -> Box | None:
        x_min, x_max = max(a[0], b[0]), min(a[1], b[1])
        y_min, y_max = max(a[2], b[2]), min(a[3], b[3])
        if x_min > x_max or y_min > y_max:
            return None
        return (x_min, x_max, y_min, y_max)

    full = boxes[0]
    for b in boxes[1:]:
        nxt = meet(full, b)
        if nxt is None:
            full = None
            break
        full = nxt
    if full is not None:
        return full, False

    best: Box | None = None
    best_area = np.inf
    for i in range(len(boxes)):
        for j in range(i + 1, len(boxes)):
            cand = meet(boxes[i], boxes[j])
            if cand is None:
                continue
            area = (cand[1] - cand[0]) * (cand[3] - cand[2])
            if area < best_area:
                best, best_area = cand, area
    return (best if best is not None else boxes[0]), True


def bounding_box(state) -> tuple[dict[NodeId, Point], dict[str, int]]:
    """Estimate each node as the center of the intersection of the square
    ranging boxes (half-width = comm_range) of the sinks it hears directly.

    Nodes hearing no sink sit at the area center and are counted in the
    returned flags as "uncovered"; inconsistent box sets (possible only
    with degenerate inputs) fall back per intersect_boxes and are counted
    as "fallbacks".
    """
    cr = state.comm_range
    flags = {"uncovered": 0, "fallbacks": 0}
    estimates: dict[NodeId, Point] = {}
    for nid in state.unknown_ids():
        heard = [
            s
            for s in (state.graph.neighbors(nid) if nid in state.graph else ())
            if s in state.anchor_ids
        ]
        if not heard:
            flags["uncovered"] += 1
            estimates[nid] = state.area_center()
            continue
        boxes = []
        for s in sorted(heard):
            p = state.nodes[s].true_position
            boxes.append((p.x - cr, p.x + cr, p.y - cr, p.y + cr))
        box, fell_back = intersect_boxes(boxes)
        if fell_back:
            flags["fallbacks"] += 1
        estimates[nid] = Point((box[0] + box[1]) / 2.0, (box[2] + box[3]) / 2.0)
    return estimates, flags
