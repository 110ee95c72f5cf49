"""Centralized localization baseline: classical multidimensional scaling.

Pipeline: assemble the pairwise range matrix from measured links, fill the
missing entries with shortest-path distance sums, recover a relative map by
classical scaling of the completed matrix, then pin the map to absolute
coordinates with a least-squares rigid fit (reflection allowed) over the
nodes whose positions are known.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from .core import NodeId, Point


class GraphDisconnectedError(ValueError):
    """Raised when range links do not connect all nodes."""


class DegenerateGeometryError(ValueError):
    """Raised when the distance matrix does not support a 2-D embedding."""


class ReflectionAmbiguityError(ValueError):
    """Raised when anchors cannot disambiguate the map's orientation."""


@dataclass(eq=False)
class DistanceMatrix:
    """Symmetric pairwise distances; NaN marks an unmeasured pair."""

    node_ids: tuple[NodeId, ...]
    values: np.ndarray

    def __post_init__(self) -> None:
        self.node_ids = tuple(self.node_ids)
        v = np.asarray(self.values, dtype=np.float64)
        n = len(self.node_ids)
        if v.shape != (n, n):
            raise ValueError(f"matrix shape {v.shape} does not match {n} nodes")
        if np.any(np.diagonal(v) != 0.0):
            raise ValueError("diagonal must be zero")
        present = ~np.isnan(v)
        if np.any(present != present.T) or not np.allclose(
            v[present & present.T], v.T[present & present.T], equal_nan=True
        ):
            raise ValueError("matrix must be symmetric")
        if np.any(v[present] < 0):
            raise ValueError("distances must be nonnegative")
        self.values = v

    @property
    def n(self) -> int:
        return len(self.node_ids)

    @property
    def is_complete(self) -> bool:
        return not np.any(np.isnan(self.values))


@dataclass(eq=False)
class LocalMap:
    """Relative 2-D coordinates, defined only up to rigid motion."""

    node_ids: tuple[NodeId, ...]
    coords: np.ndarray  # (n, 2)


def complete_distances(d: DistanceMatrix) -> DistanceMatrix:
    """Fill unmeasured pairs with shortest-path sums over measured links.

    Measured entries are kept exactly as given, even where a multi-hop path
    is shorter. Raises GraphDisconnectedError (naming the components) when
    some pairs have no connecting path.
    """
    present = ~np.isnan(d.values)
    np.fill_diagonal(present, False)
    rows, cols = np.nonzero(present)
    graph = csr_matrix((d.values[rows, cols], (rows, cols)), shape=d.values.shape)
    n_comp, labels = connected_components(graph, directed=False)
    if n_comp > 1:
        groups = [
            [d.node_ids[i] for i in np.flatnonzero(labels == c)]
            for c in range(n_comp)
        ]
        raise GraphDisconnectedError(
            f"range graph splits into {n_comp} components: "
            + "; ".join(str(g) for g in groups)
        )
    sp = shortest_path(graph, method="D", directed=False)
    filled = np.where(np.isnan(d.values), sp, d.values)
    return DistanceMatrix(d.node_ids, filled)


def classical_mds(d: DistanceMatrix) -> LocalMap:
    """Embed a complete distance matrix in the plane by classical scaling.

    Double-centers the squared distances, takes the top two eigenpairs, and
    scales eigenvectors by root eigenvalues. Eigenvalues below 1e-9 of the
    centered matrix's trace count as zero; fewer than two positive ones
    means the geometry has no 2-D spread (e.g. collinear nodes).
    """
    if not d.is_complete:
        raise ValueError("distance matrix has missing entries; complete it first")
    n = d.n
    if n < 3:
        raise DegenerateGeometryError(f"need at least 3 nodes, got {n}")
    sq = d.values * d.values
    centering = np.eye(n) - np.full((n, n), 1.0 / n)
    b = -0.5 * (centering @ sq @ centering)
    evals, evecs = np.linalg.eigh(b)
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]
    tol = 1e-9 * max(float(np.trace(b)), 0.0)
    if evals[1] <= tol:
        raise DegenerateGeometryError(
            f"only {int(np.sum(evals > tol))} positive eigenvalues; "
            "nodes have no 2-D spread"
        )
    coords = evecs[:, :2] * np.sqrt(evals[:2])
    # canonical sign per axis so equal inputs embed identically
    for k in range(2):
        pivot = int(np.argmax(np.abs(coords[:, k])))
        if coords[pivot, k] < 0:
            coords[:, k] = -coords[:, k]
    return LocalMap(d.node_ids, coords)


def align_to_anchors(local: LocalMap, anchors: dict[NodeId, Point]) -> dict[NodeId, Point]:
    """Pin a relative map to absolute coordinates using known positions.

    Solves least-squares for rotation+translation with reflection allowed.
    Anchors that do not span two dimensions (fewer than three, or collinear)
    leave a mirror orientation unresolved and raise ReflectionAmbiguityError.
    """
    idx = {nid: i for i, nid in enumerate(local.node_ids)}
    common = [nid for nid in anchors if nid in idx]
    if not common:
        raise ValueError("no anchors present in the map")
    a = np.array([local.coords[idx[nid]] for nid in common])
    b = np.array([[anchors[nid].x, anchors[nid].y] for nid in common])
    a_mean, b_mean = a.mean(axis=0), b.mean(axis=0)
    m = (b - b_mean).T @ (a - a_mean)
    u, s, vt = np.linalg.svd(m)
    if len(common) < 3 or s[0] <= 0.0 or s[1] <= 1e-9 * s[0]:
        raise ReflectionAmbiguityError(
            f"{len(common)} anchors do not span 2 dimensions; "
            "orientation of the map is ambiguous"
        )
    rot = u @ vt
    shift = b_mean - rot @ a_mean
    placed = local.coords @ rot.T + shift
    return {nid: Point(float(x), float(y)) for nid, (x, y) in zip(local.node_ids, placed)}


def mds_map_positions(
    node_ids: list[NodeId] | tuple[NodeId, ...],
    edge_ranges: dict[tuple[NodeId, NodeId], float],
    anchors: dict[NodeId, Point],
) -> dict[NodeId, Point]:
    """Full pipeline from measured links to absolute position estimates.

    ``edge_ranges`` maps unordered id pairs (stored as sorted tuples) to
    measured distances. Returns estimates for every node, anchors included.
    """
    ids = tuple(sorted(node_ids))
    pos = {nid: i for i, nid in enumerate(ids)}
    values = np.full((len(ids), len(ids)), np.nan)
    np.fill_diagonal(values, 0.0)
    for (u, v), r in edge_ranges.items():
        if u in pos and v in pos:
            values[pos[u], pos[v]] = r
            values[pos[v], pos[u]] = r
    complete = complete_distances(DistanceMatrix(ids, values))
    return align_to_anchors(classical_mds(complete), anchors)


def localize_centralized(state) -> dict[NodeId, Point]:
    """Estimate every non-anchor node from the network's measured links.

    Anchors are the deploy-time sinks; their known positions pin the map.
    Estimation failures (disconnected graph, degenerate geometry, ambiguous
    anchors) propagate as the corresponding exceptions.
    """
    anchors = {nid: state.nodes[nid].true_position for nid in sorted(state.anchor_ids)}
    placed = mds_map_positions(sorted(state.nodes), state.edge_ranges, anchors)
    return {nid: p for nid, p in placed.items() if nid not in state.anchor_ids}
