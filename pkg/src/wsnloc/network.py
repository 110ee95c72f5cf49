"""Network model: deployment, connectivity, measurement logs, sub-regions,
sink routing, and the round-based energy/failover state machine.

A network is built once per run: sinks on a regular lattice (positions
known), unknown nodes scattered over the area, one super-sink co-located
with the lattice-center sink, and one backup designated per sub-region.
Beacon logs and per-link range measurements are synthesized while every
node is awake; backups then sleep and the round loop models log collection
at the region computing units (CUs), database mirroring to backups, energy
debits, and sink failover.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .bayes import point_estimate, process_log_with_stats
from .core import (
    BeaconLogRow,
    GridSpec,
    NodeId,
    Point,
    RangeMeasurement,
    RngSeed,
    euclidean,
    substream,
)

# Length below which a synthesized range mean is clamped: radios report no
# useful distance under a decimeter.
MIN_MEASURED_RANGE = 0.1

# Synthesized rows store at least this many grid cells of stdev so that a
# noiseless run still yields a likelihood the grid can sample.
MIN_STDEV_CELLS = 0.25


class NodeRole(str, Enum):
    UNKNOWN = "unknown"
    SINK = "sink"
    BACKUP = "backup"
    SUPER_SINK = "super_sink"


class PowerState(str, Enum):
    AWAKE = "awake"
    SLEEP = "sleep"


class MessageKind(str, Enum):
    BEACON = "beacon"
    ALERT = "alert"
    STATE_CMD = "state_cmd"
    MIRROR_SYNC = "mirror_sync"


class EnergyModel(BaseModel):
    """Per-node energy budget and per-message costs."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    initial: float = 1.0
    tx_cost: float = 1e-3
    rx_cost: float = 5e-4
    threshold: float = 0.2

    @model_validator(mode="after")
    def _check(self) -> "EnergyModel":
        if not (0 < self.threshold < self.initial):
            raise ValueError("threshold must satisfy 0 < threshold < initial")
        if self.tx_cost <= 0 or self.rx_cost <= 0:
            raise ValueError("message costs must be positive")
        return self


@dataclass
class Message:
    kind: MessageKind
    src: NodeId
    dst: NodeId
    payload: object = None


@dataclass
class NodeState:
    id: NodeId
    true_position: Point
    role: NodeRole
    power: PowerState = PowerState.AWAKE
    energy: float = 1.0
    log: list[BeaconLogRow] = field(default_factory=list)
    # originating sink of each log row, parallel to `log`
    log_origins: list[NodeId] = field(default_factory=list)

    @property
    def is_awake(self) -> bool:
        return self.power is PowerState.AWAKE


@dataclass(frozen=True)
class SubRegion:
    """One sink plus its one-hop neighborhood; regions may overlap."""

    sink: NodeId
    backup: NodeId | None
    members: frozenset[NodeId]


@dataclass
class RoutingTable:
    """Next hop and hop count for every ordered pair of awake sinks.

    ``entries[(s, t)]`` is ``(next_hop, hops)`` or None when unreachable;
    ``next_hop`` is the smallest-id neighbor of s that lies on a shortest
    path to t (relays may be non-sink nodes).
    """

    entries: dict[tuple[NodeId, NodeId], tuple[NodeId, int] | None]
    sinks: tuple[NodeId, ...]
    version: int


class Graph:
    """Undirected connectivity over a fixed node set, id-sorted throughout."""

    def __init__(self, ids, edges) -> None:
        self.ids: tuple[NodeId, ...] = tuple(sorted(ids))
        self._pos = {nid: i for i, nid in enumerate(self.ids)}
        sets: dict[NodeId, set[NodeId]] = {nid: set() for nid in self.ids}
        for u, v in edges:
            if u == v:
                continue
            sets[u].add(v)
            sets[v].add(u)
        self._sets = sets
        self._sorted = {nid: tuple(sorted(s)) for nid, s in sets.items()}
        self.n_edges = sum(len(s) for s in sets.values()) // 2

    def __contains__(self, nid: NodeId) -> bool:
        return nid in self._pos

    def neighbors(self, nid: NodeId) -> tuple[NodeId, ...]:
        return self._sorted[nid]

    def has_edge(self, u: NodeId, v: NodeId) -> bool:
        return v in self._sets[u]

    def index_of(self, nid: NodeId) -> int:
        return self._pos[nid]

    def adjacency(self) -> np.ndarray:
        """Boolean adjacency matrix in id-sorted order."""
        n = len(self.ids)
        adj = np.zeros((n, n), dtype=bool)
        for u, nbrs in self._sorted.items():
            i = self._pos[u]
            for v in nbrs:
                adj[i, self._pos[v]] = True
        return adj

    def hop_depths(self, sources: list[NodeId]) -> np.ndarray:
        """Hop counts from each source to every node (inf if unreachable)."""
        n = len(self.ids)
        if n == 0 or not sources:
            return np.full((len(sources), n), np.inf)
        graph = csr_matrix(self.adjacency())
        idx = [self._pos[s] for s in sources]
        return shortest_path(graph, method="D", directed=False, unweighted=True, indices=idx)


@dataclass
class NetworkState:
    width: float
    height: float
    comm_range: float
    energy_model: EnergyModel
    nodes: dict[NodeId, NodeState]
    anchor_ids: frozenset[NodeId]
    supersink: NodeId
    graph: Graph
    regions: list[SubRegion] = field(default_factory=list)
    region_cu: dict[int, NodeId | None] = field(default_factory=dict)
    orphaned: set[int] = field(default_factory=set)
    routing: RoutingTable | None = None
    edge_ranges: dict[tuple[NodeId, NodeId], float] = field(default_factory=dict)
    # databases[cu][node] = beacon rows collected for `node` at `cu`
    databases: dict[NodeId, dict[NodeId, list[BeaconLogRow]]] = field(default_factory=dict)
    alerts_sent: int = 0
    wake_transitions: int = 0

    def area_center(self) -> Point:
        return Point(self.width / 2.0, self.height / 2.0)

    def awake_ids(self) -> list[NodeId]:
        return [nid for nid in sorted(self.nodes) if self.nodes[nid].is_awake]

    def awake_sink_ids(self) -> list[NodeId]:
        return [
            nid
            for nid in sorted(self.nodes)
            if self.nodes[nid].is_awake
            and self.nodes[nid].role in (NodeRole.SINK, NodeRole.SUPER_SINK)
        ]

    def unknown_ids(self) -> list[NodeId]:
        """Localization targets: every node that is not a deploy-time sink."""
        return [nid for nid in sorted(self.nodes) if nid not in self.anchor_ids]


def _as_rng(seed: RngSeed | np.random.Generator) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return substream(int(seed))


def sink_lattice(width: float, height: float, k: int) -> list[Point]:
    """Sink positions: ceil(sqrt(k)) columns, rows filled in row-major order,
    inset from the border by half a lattice step on each axis."""
    cols = math.ceil(math.sqrt(k))
    rows = math.ceil(k / cols)
    step_x = width / cols
    step_y = height / rows
    out = []
    for i in range(k):
        r, c = divmod(i, cols)
        out.append(Point(c * step_x + step_x / 2.0, r * step_y + step_y / 2.0))
    return out


def connectivity(state: NetworkState, range_m: float) -> Graph:
    """Unit-disk graph over awake nodes: edge iff distance <= range."""
    if range_m <= 0:
        raise ValueError("communication range must be positive")
    ids = state.awake_ids()
    pts = np.array([[state.nodes[i].true_position.x, state.nodes[i].true_position.y] for i in ids])
    edges = []
    if len(ids) > 1:
        diff = pts[:, None, :] - pts[None, :, :]
        dist = np.hypot(diff[..., 0], diff[..., 1])
        for a, b in zip(*np.nonzero(np.triu(dist <= range_m, k=1))):
            edges.append((ids[a], ids[b]))
    return Graph(ids, edges)


def partition(state: NetworkState, graph: Graph) -> list[SubRegion]:
    """One sub-region per awake sink: the sink plus its one-hop neighbors.

    The region's backup is the sink's nearest awake non-sink neighbor
    (ties to the smallest id), or None for an isolated sink.
    """
    regions = []
    for sid in state.awake_sink_ids():
        members = frozenset((sid, *graph.neighbors(sid)))
        candidates = [
            nid
            for nid in graph.neighbors(sid)
            if state.nodes[nid].role not in (NodeRole.SINK, NodeRole.SUPER_SINK)
            and state.nodes[nid].is_awake
        ]
        backup = min(
            candidates,
            key=lambda nid: (euclidean(state.nodes[sid].true_position, state.nodes[nid].true_position), nid),
            default=None,
        )
        regions.append(SubRegion(sink=sid, backup=backup, members=members))
    return regions


def uncovered_nodes(state: NetworkState) -> list[NodeId]:
    """Localization targets that belong to no sub-region."""
    covered: set[NodeId] = set()
    for region in state.regions:
        covered |= region.members
    return [nid for nid in state.unknown_ids() if nid not in covered]


def deploy(cfg, seed: RngSeed | np.random.Generator) -> NetworkState:
    """Build the initial network: positions, roles, connectivity, regions.

    Sinks take lattice ids 0..sink_count-1; the lattice cell nearest the
    area center becomes the super-sink. Unknown nodes are placed uniformly
    at random (or on a jittered lattice for placement="grid"). Backups are
    designated per region but stay awake until the round loop starts, so
    measurement synthesis sees the full topology.
    """
    rng = _as_rng(seed)
    width, height = float(cfg.area[0]), float(cfg.area[1])
    k, n = int(cfg.sink_count), int(cfg.node_count)
    if k < 1:
        raise ValueError("sink_count must be >= 1")
    if n < k:
        raise ValueError(f"node_count ({n}) must be >= sink_count ({k})")

    sinks = sink_lattice(width, height, k)
    m = n - k
    if getattr(cfg, "placement", "random") == "grid":
        base = sink_lattice(width, height, m) if m else []
        cols = math.ceil(math.sqrt(m)) if m else 1
        rows = math.ceil(m / cols) if m else 1
        jitter = rng.uniform(-0.25, 0.25, size=(m, 2)) * np.array(
            [width / cols, height / rows]
        )
        xs = np.clip([p.x for p in base] + jitter[:, 0], 0.0, width)
        ys = np.clip([p.y for p in base] + jitter[:, 1], 0.0, height)
        unknown_pts = [Point(float(x), float(y)) for x, y in zip(xs, ys)]
    else:
        raw = rng.uniform(size=(m, 2)) * np.array([width, height])
        unknown_pts = [Point(float(x), float(y)) for x, y in raw]

    center = Point(width / 2.0, height / 2.0)
    supersink = min(range(k), key=lambda i: (euclidean(sinks[i], center), i))

    energy = cfg.energy if getattr(cfg, "energy", None) is not None else EnergyModel()
    nodes: dict[NodeId, NodeState] = {}
    for i, p in enumerate(sinks):
        role = NodeRole.SUPER_SINK if i == supersink else NodeRole.SINK
        nodes[i] = NodeState(i, p, role, energy=energy.initial)
    for j, p in enumerate(unknown_pts):
        nodes[k + j] = NodeState(k + j, p, NodeRole.UNKNOWN, energy=energy.initial)

    state = NetworkState(
        width=width,
        height=height,
        comm_range=float(cfg.comm_range),
        energy_model=energy,
        nodes=nodes,
        anchor_ids=frozenset(range(k)),
        supersink=supersink,
        graph=None,  # type: ignore[arg-type]  # set just below
    )
    state.graph = connectivity(state, state.comm_range)
    state.regions = partition(state, state.graph)
    state.region_cu = {i: r.sink for i, r in enumerate(state.regions)}
    for i, region in enumerate(state.regions):
        if region.backup is not None:
            state.nodes[region.backup].role = NodeRole.BACKUP
    return state


def measure_edges(state: NetworkState, cfg, seed: RngSeed | np.random.Generator) -> None:
    """Draw one noisy range per connectivity edge (input to centralized MDS).

    Gaussian noise with sigma = noise_fraction * comm_range, means clamped
    to at least 0.1 m; edges iterated in sorted (u, v) order so draws are
    reproducible.
    """
    rng = _as_rng(seed)
    sigma = float(cfg.noise_fraction) * state.comm_range
    ranges: dict[tuple[NodeId, NodeId], float] = {}
    for u in state.graph.ids:
        for v in state.graph.neighbors(u):
            if v <= u:
                continue
            true_d = euclidean(state.nodes[u].true_position, state.nodes[v].true_position)
            measured = true_d + float(rng.normal(0.0, sigma)) if sigma > 0 else true_d
            ranges[(u, v)] = max(measured, MIN_MEASURED_RANGE)
    state.edge_ranges = ranges


def _min_id_parents(graph: Graph, depths: np.ndarray) -> np.ndarray:
    """parents[v] = smallest-id neighbor of v one hop closer to the source."""
    adj = graph.adjacency()
    closer = adj & (depths[None, :] == depths[:, None] - 1.0)
    has = closer.any(axis=1)
    parents = np.where(has, np.argmax(closer, axis=1), -1)
    return parents


def synthesize_logs(state: NetworkState, graph: Graph, cfg, seed: RngSeed | np.random.Generator) -> None:
    """Populate every localization target's beacon log.

    For each target u and each sink s within cfg.max_hops of u, one row is
    appended whose hop measurements follow the (smallest-id) shortest path
    s -> ... -> u: mean = true hop distance + N(0, sigma_r) clamped to
    >= 0.1 m, sigma_r = noise_fraction * comm_range. Stored stdev is
    sigma_r, floored at a quarter grid cell so zero-noise runs still carry
    a usable ring width.
    """
    rng = _as_rng(seed)
    sigma = float(cfg.noise_fraction) * state.comm_range
    stored_stdev = max(sigma, MIN_STDEV_CELLS * float(cfg.grid_resolution))
    max_hops = int(cfg.max_hops)

    sink_ids = [nid for nid in sorted(state.anchor_ids) if nid in graph]
    depths = graph.hop_depths(sink_ids)
    parents = {s: _min_id_parents(graph, depths[i]) for i, s in enumerate(sink_ids)}

    for u in state.unknown_ids():
        node = state.nodes[u]
        node.log.clear()
        node.log_origins.clear()
        if u not in graph:
            continue
        ui = graph.index_of(u)
        for i, s in enumerate(sink_ids):
            d = depths[i, ui]
            if not (1 <= d <= max_hops):
                continue
            # walk u back to s, then flip to sink-to-node order
            path = [u]
            while path[-1] != s:
                path.append(graph.ids[parents[s][graph.index_of(path[-1])]])
            path.reverse()
            hops = []
            for a, b in zip(path[:-1], path[1:]):
                true_d = euclidean(state.nodes[a].true_position, state.nodes[b].true_position)
                mean = true_d + float(rng.normal(0.0, sigma)) if sigma > 0 else true_d
                hops.append(RangeMeasurement(max(mean, MIN_MEASURED_RANGE), stored_stdev))
            node.log.append(BeaconLogRow(state.nodes[s].true_position, tuple(hops)))
            node.log_origins.append(s)


def rebuild_routing_table(state: NetworkState) -> RoutingTable:
    """Recompute all-pairs sink routes over the current awake topology.

    Hop counts are BFS-shortest over the full graph (non-sink relays
    allowed); the next hop is the smallest-id neighbor on a shortest path.
    Stores the table on the state with a bumped version and returns it.
    """
    graph = connectivity(state, state.comm_range)
    sinks = state.awake_sink_ids()
    entries: dict[tuple[NodeId, NodeId], tuple[NodeId, int] | None] = {}
    if sinks:
        depths = graph.hop_depths(sinks)
        adj = graph.adjacency()
        for ti, t in enumerate(sinks):
            d_t = depths[ti]
            # candidate first hops from s: neighbors one hop closer to t
            closer = adj & (d_t[None, :] == d_t[:, None] - 1.0)
            for s in sinks:
                if s == t:
                    continue
                si = graph.index_of(s)
                if not np.isfinite(d_t[si]):
                    entries[(s, t)] = None
                    continue
                hop_idx = int(np.argmax(closer[si]))
                entries[(s, t)] = (graph.ids[hop_idx], int(d_t[si]))
    version = (state.routing.version if state.routing else 0) + 1
    state.routing = RoutingTable(entries=entries, sinks=tuple(sinks), version=version)
    return state.routing


def mirror_sync(state: NetworkState, region_index: int) -> Message | None:
    """Copy the region CU's database to its backup; returns the sync message.

    No-op (None) when the region has no usable backup or the CU is down.
    The backup may be asleep: mirroring uses its standby receiver.
    """
    region = state.regions[region_index]
    cu = state.region_cu.get(region_index)
    backup = region.backup
    if cu is None or backup is None or backup == cu:
        return None
    cu_node = state.nodes[cu]
    if not cu_node.is_awake or cu_node.energy <= 0:
        return None
    src_db = state.databases.get(cu, {})
    dst_db = state.databases.setdefault(backup, {})
    for nid, rows in src_db.items():
        dst_db[nid] = list(rows)
    return Message(MessageKind.MIRROR_SYNC, src=cu, dst=backup)


def _validate_message(state: NetworkState, msg: Message) -> None:
    if msg.kind is MessageKind.ALERT:
        if state.nodes[msg.src].role is not NodeRole.SUPER_SINK:
            raise ValueError("ALERT may only be sent by the super-sink")
        if state.nodes[msg.dst].role is not NodeRole.BACKUP:
            raise ValueError("ALERT may only target a backup node")
    if msg.kind is MessageKind.STATE_CMD:
        if state.nodes[msg.src].role is not NodeRole.SUPER_SINK:
            raise ValueError("STATE_CMD may only be sent by the super-sink")
        if state.nodes[msg.dst].role not in (NodeRole.SINK, NodeRole.SUPER_SINK):
            raise ValueError("STATE_CMD may only target a sink")


def _debit(state: NetworkState, messages: list[Message]) -> None:
    """Apply tx/rx costs to awake endpoints. BEACON rows are broadcast: one
    tx per sender per batch however many CUs hear it. Receivers that are
    asleep (mirror/alert standby wake-ups) are not debited."""
    em = state.energy_model
    beacon_txed: set[NodeId] = set()
    for msg in messages:
        src, dst = state.nodes[msg.src], state.nodes[msg.dst]
        if src.is_awake and src.energy > 0:
            if msg.kind is MessageKind.BEACON:
                if msg.src not in beacon_txed:
                    beacon_txed.add(msg.src)
                    src.energy = max(0.0, src.energy - em.tx_cost)
            else:
                src.energy = max(0.0, src.energy - em.tx_cost)
        if dst.is_awake and dst.energy > 0:
            dst.energy = max(0.0, dst.energy - em.rx_cost)


def step_energy_and_roles(
    state: NetworkState,
    messages: list[Message],
    forced_failures: tuple[NodeId, ...] = (),
) -> list[Message]:
    """Apply one round's energy debits, then detect and handle CU failures.

    A CU fails when its energy drops below the threshold or it is in
    ``forced_failures``. Failover: the super-sink ALERTs the region's
    backup, which wakes, assumes the sink role (super-sink role if the
    super-sink itself failed) and serves the region with its mirrored
    database; the failed sink sleeps. Regions whose backup is unavailable
    are orphaned. Any power change rebuilds the routing table.
    """
    for msg in messages:
        _validate_message(state, msg)
    _debit(state, messages)

    em = state.energy_model
    forced = set(forced_failures)
    failing = [
        nid
        for nid in state.awake_sink_ids()
        if state.nodes[nid].energy < em.threshold or nid in forced
    ]
    emitted: list[Message] = []
    topology_changed = False

    for cu in failing:
        serving = [i for i, holder in sorted(state.region_cu.items()) if holder == cu]
        was_supersink = cu == state.supersink
        for i in serving:
            region = state.regions[i]
            backup = region.backup
            usable = (
                backup is not None
                and backup != cu
                and state.nodes[backup].energy >= em.threshold
            )
            if not usable:
                state.orphaned.add(i)
                state.region_cu[i] = None
                continue
            b = state.nodes[backup]
            if b.role is NodeRole.BACKUP:
                # normal path: standby backup is alerted and wakes
                alert = Message(MessageKind.ALERT, src=state.supersink, dst=backup)
                _validate_message(state, alert)
                emitted.append(alert)
                state.alerts_sent += 1
                if not b.is_awake:
                    b.power = PowerState.AWAKE
                    state.wake_transitions += 1
                    topology_changed = True
            if was_supersink:
                b.role = NodeRole.SUPER_SINK
                state.nodes[cu].role = NodeRole.SINK
                state.supersink = backup
            elif b.role is not NodeRole.SUPER_SINK:
                b.role = NodeRole.SINK
            state.region_cu[i] = backup
        state.nodes[cu].power = PowerState.SLEEP
        topology_changed = True

    duty = getattr(state, "duty_cycle_fraction", 1.0)
    if duty < 1.0:
        awake_sinks = state.awake_sink_ids()
        keep = max(1, math.ceil(duty * len(awake_sinks)))
        ordered = sorted(awake_sinks, key=lambda nid: (nid != state.supersink, nid))
        for nid in ordered[keep:]:
            cmd = Message(MessageKind.STATE_CMD, src=state.supersink, dst=nid, payload="sleep")
            _validate_message(state, cmd)
            emitted.append(cmd)
            state.nodes[nid].power = PowerState.SLEEP
            topology_changed = True

    _debit(state, emitted)
    if topology_changed:
        rebuild_routing_table(state)
    return emitted


def commission_backups(state: NetworkState) -> None:
    """Put designated backups into standby sleep before the round loop."""
    for region in state.regions:
        if region.backup is not None:
            state.nodes[region.backup].power = PowerState.SLEEP


def simulate_rounds(state: NetworkState, cfg, trace: list | None = None) -> dict:
    """Run the synchronous round loop until every log row has been collected
    and every scheduled failure has fired.

    Per round: each target node broadcasts its next log row to the CU of
    every region covering it and to the super-sink (the global database);
    CUs mirror to backups every ``sync_every`` rounds; energy debits, then
    failure detection and failover.
    """
    state.duty_cycle_fraction = float(getattr(cfg, "duty_cycle_fraction", 1.0))
    sync_every = int(getattr(cfg, "sync_every", 1))
    injections = list(getattr(cfg, "failure_injections", ()) or ())

    commission_backups(state)
    rebuild_routing_table(state)

    covering: dict[NodeId, list[int]] = {nid: [] for nid in state.unknown_ids()}
    for i, region in enumerate(state.regions):
        for nid in region.members:
            if nid in covering:
                covering[nid].append(i)

    total_rounds = max(
        max((len(state.nodes[nid].log) for nid in state.unknown_ids()), default=0),
        max((rd for _, rd in injections), default=0),
        1,
    )

    for rnd in range(1, total_rounds + 1):
        messages: list[Message] = []
        for u in state.unknown_ids():
            node = state.nodes[u]
            if rnd > len(node.log) or node.energy <= 0:
                continue
            row = node.log[rnd - 1]
            dests = []
            for i in covering[u]:
                cu = state.region_cu.get(i)
                if cu is not None and state.nodes[cu].is_awake and state.nodes[cu].energy > 0:
                    dests.append(cu)
            ss = state.supersink
            if state.nodes[ss].is_awake and state.nodes[ss].energy > 0:
                dests.append(ss)
            for cu in sorted(set(dests)):
                state.databases.setdefault(cu, {}).setdefault(u, []).append(row)
                messages.append(Message(MessageKind.BEACON, src=u, dst=cu, payload=rnd - 1))
        if sync_every > 0 and rnd % sync_every == 0:
            for i in range(len(state.regions)):
                msg = mirror_sync(state, i)
                if msg is not None:
                    messages.append(msg)
        forced = tuple(nid for nid, rd in injections if rd == rnd)
        emitted = step_energy_and_roles(state, messages, forced_failures=forced)
        if trace is not None:
            events = [f"{m.kind.value}:{m.src}->{m.dst}" for m in emitted]
            for nid in sorted(state.nodes):
                node = state.nodes[nid]
                trace.append(
                    {
                        "round": rnd,
                        "node": nid,
                        "role": node.role.value,
                        "power": node.power.value,
                        "energy": round(node.energy, 9),
                        "events": events if nid == state.supersink else [],
                    }
                )

    return {
        "rounds": total_rounds,
        "alerts_sent": state.alerts_sent,
        "wake_transitions": state.wake_transitions,
        "orphaned_regions": len(state.orphaned),
    }


def localize_hybrid(state: NetworkState, cfg) -> tuple[dict[NodeId, Point], dict[str, int]]:
    """Estimate every localization target from the databases the CUs built.

    Each target is served by the first covering region (ascending sink id)
    whose CU is up, falling back to the super-sink's global database. A
    target with no collected rows gets the area center and an "uncovered"
    flag; rows whose constraints contradict the accumulated posterior are
    skipped and counted.
    """
    spec = GridSpec(state.width, state.height, float(cfg.grid_resolution))
    flags = {"uncovered": 0, "contradictions": 0, "orphaned": len(state.orphaned)}
    covering: dict[NodeId, list[int]] = {nid: [] for nid in state.unknown_ids()}
    for i, region in enumerate(state.regions):
        for nid in region.members:
            if nid in covering:
                covering[nid].append(i)

    estimates: dict[NodeId, Point] = {}
    for u in state.unknown_ids():
        cu = None
        for i in covering[u]:
            holder = state.region_cu.get(i)
            if holder is not None and state.nodes[holder].is_awake:
                cu = holder
                break
        if cu is None and state.nodes[state.supersink].is_awake:
            cu = state.supersink
        rows = state.databases.get(cu, {}).get(u, []) if cu is not None else []
        if not rows:
            flags["uncovered"] += 1
            estimates[u] = state.area_center()
            continue
        posterior, skipped = process_log_with_stats(spec, rows)
        flags["contradictions"] += skipped
        estimates[u] = point_estimate(posterior)
    return estimates, flags
