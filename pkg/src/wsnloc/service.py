"""HTTP service exposing the simulation harness.

The CLI talks to this app in process through an ASGI transport, and the
same app can be served over the network; either way the request and
response schemas below are the contract.
"""

from __future__ import annotations

import math

from fastapi import FastAPI
from pydantic import BaseModel, ConfigDict, model_validator

from . import __version__
from .experiments import (
    PRESETS,
    ErrorRecord,
    SimConfig,
    SweepSpec,
    default_config_yaml,
    render_csv,
    run_once,
    run_sweep,
)


class RecordModel(BaseModel):
    """One CSV row as structured data; NaN means become null."""

    scheme: str
    param: str
    value: float | None
    rep: int
    seed: int
    mean_err_norm: float | None
    mean_err_m: float | None
    std_err_norm: float | None
    n_unknown: int
    n_sink: int
    comm_range: float
    flags: dict[str, int]
    error: str | None = None

    @classmethod
    def from_record(cls, rec: ErrorRecord) -> "RecordModel":
        def clean(x: float) -> float | None:
            return None if math.isnan(x) else x

        return cls(
            scheme=rec.scheme,
            param=rec.swept_parameter,
            value=clean(rec.value),
            rep=rec.rep,
            seed=rec.seed,
            mean_err_norm=clean(rec.mean_err_norm),
            mean_err_m=clean(rec.mean_err_m),
            std_err_norm=clean(rec.std_err_norm),
            n_unknown=rec.n_unknown,
            n_sink=rec.n_sink,
            comm_range=rec.comm_range,
            flags=rec.flags,
            error=rec.error,
        )


class RunRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    config: SimConfig = SimConfig()
    include_trace: bool = False


class RunResponse(BaseModel):
    records: list[RecordModel]
    csv: str
    stats: dict
    trace: list[dict] | None = None


class SweepRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    config: SimConfig = SimConfig()
    preset: str | None = None
    sweep: SweepSpec | None = None
    workers: int = 1
    include_trace: bool = False

    @model_validator(mode="after")
    def _check(self) -> "SweepRequest":
        if (self.preset is None) == (self.sweep is None):
            raise ValueError("exactly one of preset or sweep must be given")
        if self.preset is not None and self.preset not in PRESETS:
            raise ValueError(f"unknown preset {self.preset!r}; choose from {sorted(PRESETS)}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        return self

    def resolved_sweep(self) -> SweepSpec:
        return PRESETS[self.preset] if self.preset is not None else self.sweep


class SweepResponse(BaseModel):
    records: list[RecordModel]
    csv: str
    trace: list[dict] | None = None


class DefaultConfigResponse(BaseModel):
    config: SimConfig
    yaml: str


app = FastAPI(title="wsnloc", version=__version__)


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.get("/presets")
def presets() -> dict[str, SweepSpec]:
    return PRESETS


@app.get("/config/default")
def config_default() -> DefaultConfigResponse:
    return DefaultConfigResponse(config=SimConfig(), yaml=default_config_yaml())


@app.post("/run")
def run(req: RunRequest) -> RunResponse:
    trace: list | None = [] if req.include_trace else None
    stats: dict = {}
    records = run_once(req.config, trace=trace, stats_out=stats)
    return RunResponse(
        records=[RecordModel.from_record(r) for r in records],
        csv=render_csv(records),
        stats=stats,
        trace=trace,
    )


@app.post("/sweep")
def sweep(req: SweepRequest) -> SweepResponse:
    trace: list | None = [] if req.include_trace else None
    result = run_sweep(
        req.config, req.resolved_sweep(), workers=req.workers, trace=trace
    )
    return SweepResponse(
        records=[RecordModel.from_record(r) for r in result.records],
        csv=result.csv,
        trace=trace,
    )
