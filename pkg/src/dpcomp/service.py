"""Stateless HTTP JSON service exposing the accountant.

Epsilon/delta values cross the wire as decimal strings and are parsed to
exact rationals; JSON numbers would silently truncate them to doubles.
"""

from __future__ import annotations

import dataclasses
import os
import threading
from typing import List, Optional

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__
from .api import (
    ComputeOptions,
    allocate_document,
    compose_document,
    curve_rows,
)
from .numerics import PrecisionConfig
from .parameters import (
    DEFAULT_ENUMERATION_LIMIT,
    METHOD_AUTO,
    ApproxSizeError,
    EnumerationLimitError,
    InfeasibleDeltaError,
    ZeroBudgetError,
)


@dataclasses.dataclass(frozen=True)
class ServiceSettings:
    port: int = 8080
    enumeration_limit: int = DEFAULT_ENUMERATION_LIMIT
    max_k_approx: Optional[int] = None
    max_concurrency: int = 4
    precision_bits: int = 128

    @classmethod
    def from_env(cls, options: Optional[ComputeOptions] = None) -> "ServiceSettings":
        base = cls()
        if options is not None:
            base = dataclasses.replace(
                base,
                enumeration_limit=options.enumeration_limit,
                max_k_approx=options.max_k_approx,
                precision_bits=options.precision.precision_bits,
            )
        env = os.environ
        if "DPCOMP_PORT" in env:
            base = dataclasses.replace(base, port=int(env["DPCOMP_PORT"]))
        if "DPCOMP_ENUM_LIMIT" in env:
            base = dataclasses.replace(base, enumeration_limit=int(env["DPCOMP_ENUM_LIMIT"]))
        if "DPCOMP_MAX_K_APPROX" in env:
            base = dataclasses.replace(base, max_k_approx=int(env["DPCOMP_MAX_K_APPROX"]))
        if "DPCOMP_MAX_CONCURRENCY" in env:
            base = dataclasses.replace(base, max_concurrency=int(env["DPCOMP_MAX_CONCURRENCY"]))
        return base

    def replace(self, **kwargs) -> "ServiceSettings":
        return dataclasses.replace(self, **kwargs)

    def compute_options(self) -> ComputeOptions:
        return ComputeOptions(
            precision=PrecisionConfig(precision_bits=self.precision_bits),
            enumeration_limit=self.enumeration_limit,
            max_k_approx=self.max_k_approx,
        )


class ParamModel(BaseModel):
    epsilon: str
    delta: str = "0"


class ComposeBody(BaseModel):
    params: List[ParamModel] = Field(min_length=1)
    delta_g: Optional[str] = None
    epsilon_g: Optional[str] = None
    method: str = METHOD_AUTO
    eta: Optional[str] = None
    delta_prime: Optional[str] = None


class StatisticModel(BaseModel):
    name: str
    weight: str
    delta: str = "0"


class AllocateBody(BaseModel):
    statistics: List[StatisticModel] = Field(min_length=1)
    epsilon_g: str
    delta_g: str
    method: str = METHOD_AUTO
    eta: Optional[str] = None


def create_app(settings: Optional[ServiceSettings] = None) -> FastAPI:
    settings = settings or ServiceSettings.from_env()
    options = settings.compute_options()
    # Approx jobs can allocate megabyte-scale table rows; bound how many run
    # at once without serializing the cheap endpoints.
    heavy_jobs = threading.BoundedSemaphore(settings.max_concurrency)
    app = FastAPI(title="dpcomp", version=__version__)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(RequestValidationError)
    async def malformed(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"error": "malformed_request", "detail": exc.errors()},
        )

    @app.exception_handler(ValueError)
    async def bad_value(request: Request, exc: ValueError):
        return JSONResponse(
            status_code=400,
            content={"error": "bad_request", "detail": str(exc)},
        )

    @app.exception_handler(InfeasibleDeltaError)
    async def infeasible(request: Request, exc: InfeasibleDeltaError):
        return JSONResponse(
            status_code=422,
            content={
                "reason": "infeasible_delta",
                "delta_threshold": float(exc.threshold),
                "detail": str(exc),
            },
        )

    @app.exception_handler(ZeroBudgetError)
    async def zero_budget(request: Request, exc: ZeroBudgetError):
        return JSONResponse(
            status_code=422,
            content={"reason": "zero_budget", "detail": str(exc)},
        )

    @app.exception_handler(EnumerationLimitError)
    async def too_large(request: Request, exc: EnumerationLimitError):
        return JSONResponse(
            status_code=413,
            content={"reason": "k_too_large", "detail": str(exc)},
        )

    @app.exception_handler(ApproxSizeError)
    async def table_too_large(request: Request, exc: ApproxSizeError):
        return JSONResponse(
            status_code=413,
            content={"reason": "table_too_large", "detail": str(exc)},
        )

    @app.post("/v1/compose")
    def compose(body: ComposeBody) -> dict:
        with heavy_jobs:
            return compose_document(
                [p.epsilon for p in body.params],
                [p.delta for p in body.params],
                delta_g=body.delta_g,
                epsilon_g=body.epsilon_g,
                method=body.method,
                eta=body.eta,
                delta_prime=body.delta_prime,
                options=options,
            )

    @app.post("/v1/allocate")
    def allocate(body: AllocateBody) -> dict:
        with heavy_jobs:
            return allocate_document(
                [s.model_dump() for s in body.statistics],
                epsilon_g=body.epsilon_g,
                delta_g=body.delta_g,
                method=body.method,
                eta=body.eta,
                options=options,
            )

    @app.get("/v1/curve")
    def curve(
        eps: str,
        delta_g: str,
        k_range: str,
        methods: str,
        delta: str = "0",
        eta: Optional[str] = None,
        delta_prime: Optional[str] = None,
    ) -> list:
        with heavy_jobs:
            return curve_rows(
                eps,
                delta,
                delta_g,
                _parse_k_range(k_range),
                [m.strip() for m in methods.split(",") if m.strip()],
                eta=eta,
                delta_prime=delta_prime,
                options=options,
            )

    @app.get("/v1/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    return app


def _parse_k_range(spec: str) -> List[int]:
    parts = [int(p) for p in spec.split(":")]
    if len(parts) == 1:
        return parts
    if len(parts) == 2:
        start, stop, step = parts[0], parts[1], 1
    elif len(parts) == 3:
        start, stop, step = parts
    else:
        raise ValueError(f"k_range {spec!r}: expected start:stop[:step]")
    if step < 1 or stop < start:
        raise ValueError(f"k_range {spec!r}: need stop >= start and step >= 1")
    return list(range(start, stop + 1, step))
