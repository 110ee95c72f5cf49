"""Run and sweep harness: builds a network per (value, rep), runs the
requested localization schemes on the same instance, reduces per-node
errors to records, and renders the stable CSV contract consumed by the
plotting frontend."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import yaml
from joblib import Parallel, delayed
from pydantic import BaseModel, ConfigDict, model_validator

from . import baselines, mdsmap, network
from .core import NodeId, Point, euclidean, substream, substream_token
from .network import EnergyModel

Scheme = Literal["centralized", "diffusion", "bounding_box", "hybrid"]
SCHEME_ORDER: tuple[Scheme, ...] = ("centralized", "diffusion", "bounding_box", "hybrid")
SweptParameter = Literal["sink_count", "comm_range", "node_count"]

CSV_HEADER = "scheme,param,value,rep,seed,mean_err_norm,mean_err_m,std_err_norm,n_unknown,n_sink,comm_range,flags"


class SimConfig(BaseModel):
    """One simulated deployment plus everything the schemes need to run.

    Doubles as the config-file schema: unknown keys are rejected by name.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    area: tuple[float, float] = (100.0, 100.0)
    node_count: int = 85
    sink_count: int = 9
    comm_range: float = 30.0
    placement: Literal["random", "grid"] = "random"
    grid_resolution: float = 2.0
    noise_fraction: float = 0.05
    max_hops: int = 3
    reps: int = 20
    seed: int = 42
    schemes: tuple[Scheme, ...] = SCHEME_ORDER
    energy: EnergyModel = EnergyModel()
    duty_cycle_fraction: float = 1.0
    sync_every: int = 1
    failure_injections: tuple[tuple[int, int], ...] = ()

    @model_validator(mode="after")
    def _check(self) -> "SimConfig":
        if self.area[0] <= 0 or self.area[1] <= 0:
            raise ValueError("area sides must be positive")
        for name in ("node_count", "sink_count", "max_hops", "reps", "sync_every"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.node_count < self.sink_count:
            raise ValueError(
                f"node_count ({self.node_count}) must be >= sink_count ({self.sink_count})"
            )
        if self.comm_range <= 0:
            raise ValueError("comm_range must be positive")
        if not (0 <= self.noise_fraction < 1):
            raise ValueError("noise_fraction must be in [0, 1)")
        if self.grid_resolution <= 0:
            raise ValueError("grid_resolution must be positive")
        if not (0 < self.duty_cycle_fraction <= 1):
            raise ValueError("duty_cycle_fraction must be in (0, 1]")
        if not self.schemes:
            raise ValueError("schemes must not be empty")
        return self


class SweepSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    swept_parameter: SweptParameter
    values: tuple[float, ...]

    @model_validator(mode="after")
    def _check(self) -> "SweepSpec":
        if not self.values:
            raise ValueError("sweep needs at least one value")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ValueError("sweep values must be strictly increasing")
        return self


PRESETS: dict[str, SweepSpec] = {
    "fig4": SweepSpec(swept_parameter="sink_count", values=(4, 9, 16, 25, 30, 49, 100)),
    "fig5": SweepSpec(swept_parameter="comm_range", values=tuple(range(20, 101, 10))),
    "fig6": SweepSpec(swept_parameter="node_count", values=(50, 60, 70, 80, 90)),
}


@dataclass
class ErrorRecord:
    """Per-(scheme, value, rep) outcome; per-node detail kept in memory,
    aggregate fields rendered to CSV."""

    scheme: str
    swept_parameter: str
    value: float
    rep: int
    seed: int
    per_node_err_norm: dict[NodeId, float]
    mean_err_norm: float
    mean_err_m: float
    std_err_norm: float
    n_unknown: int
    n_sink: int
    comm_range: float
    flags: dict[str, int] = field(default_factory=dict)
    error: str | None = None


@dataclass
class SweepResult:
    records: list[ErrorRecord]
    csv: str


def localization_error(true: Point, est: Point, cr: float) -> float:
    """Position error normalized by the communication range."""
    if cr <= 0:
        raise ValueError("communication range must be positive")
    return euclidean(true, est) / cr


def derive_config(base: SimConfig, param: SweptParameter, value: float) -> SimConfig:
    """Clone the base config with one swept parameter changed.

    Sweeping sink_count keeps the number of unknown nodes constant (the
    base's node_count - sink_count), so the population being localized is
    comparable across sweep points.
    """
    if param == "sink_count":
        unknowns = base.node_count - base.sink_count
        return base.model_copy(
            update={"sink_count": int(value), "node_count": unknowns + int(value)}
        )
    if param == "comm_range":
        return base.model_copy(update={"comm_range": float(value)})
    if param == "node_count":
        return base.model_copy(update={"node_count": int(value)})
    raise ValueError(f"unknown swept parameter {param!r}")


def _canonical_flags(flags: dict[str, int]) -> dict[str, int]:
    out = {"uncovered": 0, "contradictions": 0, "orphaned": 0}
    out.update(flags)
    return out


def _run_scheme(scheme: Scheme, state: network.NetworkState, cfg: SimConfig):
    if scheme == "centralized":
        return mdsmap.localize_centralized(state), {}
    if scheme == "diffusion":
        estimates = baselines.diffusion(state)
        isolated = sum(
            1
            for nid in state.unknown_ids()
            if nid not in state.graph or not state.graph.neighbors(nid)
        )
        return estimates, {"uncovered": isolated}
    if scheme == "bounding_box":
        estimates, flags = baselines.bounding_box(state)
        if not flags.get("fallbacks"):
            flags.pop("fallbacks", None)
        return estimates, flags
    if scheme == "hybrid":
        return network.localize_hybrid(state, cfg)
    raise ValueError(f"unknown scheme {scheme!r}")


def run_once(
    cfg: SimConfig,
    *,
    swept_parameter: str = "none",
    value: float | None = None,
    value_index: int = 0,
    rep: int = 0,
    trace: list | None = None,
    stats_out: dict | None = None,
) -> list[ErrorRecord]:
    """Simulate one network instance and run every requested scheme on it.

    Substreams for deployment, edge measurement, and log noise derive from
    (seed, value_index, rep), so records are reproducible regardless of
    sweep order or parallelism. Scheme failures become records with an
    error tag and NaN means instead of aborting the run.
    """
    state = network.deploy(cfg, substream(cfg.seed, value_index, rep, 0))
    network.measure_edges(state, cfg, substream(cfg.seed, value_index, rep, 1))
    network.synthesize_logs(state, state.graph, cfg, substream(cfg.seed, value_index, rep, 2))
    stats = network.simulate_rounds(state, cfg, trace=trace)
    if stats_out is not None:
        stats_out.update(stats)

    token = substream_token(cfg.seed, value_index, rep)
    unknowns = state.unknown_ids()
    records = []
    for scheme in SCHEME_ORDER:
        if scheme not in cfg.schemes:
            continue
        try:
            estimates, flags = _run_scheme(scheme, state, cfg)
            per_node = {
                nid: localization_error(state.nodes[nid].true_position, estimates[nid], cfg.comm_range)
                for nid in unknowns
            }
            errs = np.array(list(per_node.values()))
            record = ErrorRecord(
                scheme=scheme,
                swept_parameter=swept_parameter,
                value=float(value) if value is not None else float("nan"),
                rep=rep,
                seed=token,
                per_node_err_norm=per_node,
                mean_err_norm=float(errs.mean()) if errs.size else float("nan"),
                mean_err_m=float(errs.mean() * cfg.comm_range) if errs.size else float("nan"),
                std_err_norm=float(errs.std()) if errs.size else float("nan"),
                n_unknown=len(unknowns),
                n_sink=cfg.sink_count,
                comm_range=cfg.comm_range,
                flags=_canonical_flags(flags),
            )
        except ValueError as exc:
            record = ErrorRecord(
                scheme=scheme,
                swept_parameter=swept_parameter,
                value=float(value) if value is not None else float("nan"),
                rep=rep,
                seed=token,
                per_node_err_norm={},
                mean_err_norm=float("nan"),
                mean_err_m=float("nan"),
                std_err_norm=float("nan"),
                n_unknown=len(unknowns),
                n_sink=cfg.sink_count,
                comm_range=cfg.comm_range,
                flags=_canonical_flags({}),
                error=type(exc).__name__,
            )
        records.append(record)
    return records


def _fmt(x: float) -> str:
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return f"{x:.6g}"


def record_to_csv_row(rec: ErrorRecord) -> str:
    flag_parts = [f"{k}={rec.flags[k]}" for k in ("uncovered", "contradictions", "orphaned")]
    for k in sorted(rec.flags):
        if k not in ("uncovered", "contradictions", "orphaned"):
            flag_parts.append(f"{k}={rec.flags[k]}")
    if rec.error:
        flag_parts.append(f"error={rec.error}")
    return ",".join(
        [
            rec.scheme,
            rec.swept_parameter,
            _fmt(rec.value),
            str(rec.rep),
            str(rec.seed),
            _fmt(rec.mean_err_norm),
            _fmt(rec.mean_err_m),
            _fmt(rec.std_err_norm),
            str(rec.n_unknown),
            str(rec.n_sink),
            _fmt(rec.comm_range),
            ";".join(flag_parts),
        ]
    )


def render_csv(records: list[ErrorRecord]) -> str:
    lines = [CSV_HEADER]
    lines.extend(record_to_csv_row(r) for r in records)
    return "\n".join(lines) + "\n"


def run_sweep(
    base: SimConfig, sweep: SweepSpec, *, workers: int = 1, trace: list | None = None
) -> SweepResult:
    """Run every (value, rep) pair and collect rows in deterministic
    (value, rep, scheme) order regardless of execution order or workers.

    When trace is given it receives one round-loop summary dict per
    (value, rep) pair, in the same deterministic order.
    """
    tasks = [
        (vi, value, rep)
        for vi, value in enumerate(sweep.values)
        for rep in range(base.reps)
    ]

    def one(vi: int, value: float, rep: int) -> tuple[list[ErrorRecord], dict]:
        cfg = derive_config(base, sweep.swept_parameter, value)
        stats: dict = {}
        recs = run_once(
            cfg,
            swept_parameter=sweep.swept_parameter,
            value=value,
            value_index=vi,
            rep=rep,
            stats_out=stats,
        )
        return recs, stats

    if workers > 1:
        chunks = Parallel(n_jobs=workers)(delayed(one)(*t) for t in tasks)
    else:
        chunks = [one(*t) for t in tasks]
    records = []
    for (vi, value, rep), (recs, stats) in zip(tasks, chunks):
        records.extend(recs)
        if trace is not None:
            trace.append(
                {
                    "param": sweep.swept_parameter,
                    "value": float(value),
                    "rep": rep,
                    "seed": substream_token(base.seed, vi, rep),
                    **stats,
                }
            )
    return SweepResult(records=records, csv=render_csv(records))


def config_from_dict(data: dict | None) -> SimConfig:
    """Validate a parsed config file; unknown keys are named in the error."""
    return SimConfig.model_validate(data or {})


def load_config(path: str) -> SimConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return config_from_dict(yaml.safe_load(fh))


def default_config_yaml() -> str:
    """Render every SimConfig field with its default, as a loadable file."""
    cfg = SimConfig()
    data = cfg.model_dump()
    data["schemes"] = list(data["schemes"])
    data["area"] = list(data["area"])
    data["failure_injections"] = [list(p) for p in data["failure_injections"]]
    return (
        "# Default simulation configuration. Every key is optional; unknown keys\n"
        "# are rejected. failure_injections is a list of [node_id, round] pairs.\n"
        + yaml.safe_dump(data, sort_keys=False)
    )
