"""Shared test helpers: a SimConfig-shaped stub and a hand-built network."""

from dataclasses import dataclass, field

from wsnloc.core import Point
from wsnloc.network import EnergyModel, Graph, NetworkState, NodeRole, NodeState


@dataclass
class Cfg:
    """Duck-typed stand-in for the full run configuration."""

    area: tuple = (100.0, 100.0)
    node_count: int = 85
    sink_count: int = 9
    comm_range: float = 30.0
    placement: str = "random"
    grid_resolution: float = 2.0
    noise_fraction: float = 0.05
    max_hops: int = 3
    energy: EnergyModel = field(default_factory=EnergyModel)
    duty_cycle_fraction: float = 1.0
    sync_every: int = 1
    failure_injections: tuple = ()


def tiny_state(positions, anchors, edges, w=100.0, h=100.0, cr=30.0):
    """Minimal NetworkState with explicit positions and edges."""
    nodes = {
        i: NodeState(
            i,
            Point(*p),
            NodeRole.SINK if i in anchors else NodeRole.UNKNOWN,
        )
        for i, p in positions.items()
    }
    return NetworkState(
        width=w,
        height=h,
        comm_range=cr,
        energy_model=EnergyModel(),
        nodes=nodes,
        anchor_ids=frozenset(anchors),
        supersink=min(anchors),
        graph=Graph(list(positions), edges),
    )
