"""Stateless HTTP/JSON facade over the library.

Every endpoint is a thin adapter to one library operation. There are no
server-side sessions: identical POST bodies yield identical result payloads
(runtime diagnostics aside), and every response echoes a hash of the request
body so clients can cache and audit by parameter set. Long searches accept a
`budget_ms` and answer 202 with progress instead of holding the connection.

Error mapping: 400 schema violation, 422 model validation failure,
500 numerical failure. Errors never carry partial results.

Run with `python -m wolbachia.service`; PORT and WOLBACHIA_CORS_ORIGIN
control the listener and the allowed UI origin.
"""

from __future__ import annotations

import hashlib
import json
import os
import time

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field, model_validator

from .model import (
    DomainError,
    ModelParameters,
    ModelValidationError,
    PopulationState,
    classify_stability,
    equilibria,
    load_parameters,
    nullclines,
    validate_params,
)
from .integrate import IntegrationOptions, NumericalError, integrate
from .threshold import (
    minimal_viable_w,
    separatrix_backward,
    separatrix_bisection,
    unstable_manifold,
)
from .planner import (
    BudgetExceeded,
    ReleaseSchedule,
    minimal_release_size,
    simulate_impulsive,
    simulate_release_list,
)

__all__ = ["create_app", "app"]


class ParamsIn(BaseModel):
    """Inline rates or a named preset; exactly one form."""

    preset: str | None = None
    rho_n: float | None = None
    rho_w: float | None = None
    alpha_n: float | None = None
    alpha_w: float | None = None
    beta_n: float | None = None
    beta_w: float | None = None

    @model_validator(mode="after")
    def _one_form(self):
        rates = (self.rho_n, self.rho_w, self.alpha_n, self.alpha_w, self.beta_n, self.beta_w)
        if self.preset is not None:
            if any(v is not None for v in rates):
                raise ValueError("give either a preset or the six rates, not both")
        elif any(v is None for v in rates):
            raise ValueError("either preset or all six rate fields are required")
        return self

    def resolve(self) -> ModelParameters:
        if self.preset is not None:
            try:
                return load_parameters(self.preset)
            except ValueError as exc:
                raise ModelValidationError(str(exc)) from exc
        return ModelParameters(
            rho_n=self.rho_n,
            rho_w=self.rho_w,
            alpha_n=self.alpha_n,
            alpha_w=self.alpha_w,
            beta_n=self.beta_n,
            beta_w=self.beta_w,
        )


class OptionsIn(BaseModel):
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    t_max: float = 5000.0

    def resolve(self) -> IntegrationOptions:
        try:
            return IntegrationOptions(
                rel_tol=self.rel_tol, abs_tol=self.abs_tol, t_max=self.t_max
            )
        except ValueError as exc:
            raise ModelValidationError(str(exc)) from exc


class EquilibriaRequest(BaseModel):
    parameters: ParamsIn


class SimulateRequest(BaseModel):
    parameters: ParamsIn
    n0: float
    w0: float
    options: OptionsIn = Field(default_factory=OptionsIn)
    capture_radius: float | None = None


class SeparatrixRequest(BaseModel):
    parameters: ParamsIn
    method: str = "backward"
    grid_points: int = 33
    tol: float = 1e-6
    include_unstable_manifold: bool = True


class MinReleaseRequest(BaseModel):
    parameters: ParamsIn
    n0_grid: list[float]
    tol: float = 1e-6
    budget_ms: float | None = None


class PlanRequest(BaseModel):
    parameters: ParamsIn
    n0: float
    tau: float
    max_releases: int
    tol: float = 1e-3
    budget_ms: float | None = None


class ScheduleIn(BaseModel):
    lambda_size: float
    tau: float
    max_releases: int
    stop_rule: str = "on-separatrix-crossing"


class ReleaseIn(BaseModel):
    t: float
    size: float


class SimulateImpulsiveRequest(BaseModel):
    """Either a periodic schedule or an explicit what-if release list."""

    parameters: ParamsIn
    n0: float
    w0: float = 0.0
    schedule: ScheduleIn | None = None
    releases: list[ReleaseIn] | None = None
    options: OptionsIn = Field(default_factory=OptionsIn)

    @model_validator(mode="after")
    def _one_form(self):
        if (self.schedule is None) == (self.releases is None):
            raise ValueError("give exactly one of schedule or releases")
        return self


def _request_hash(payload: BaseModel) -> str:
    canonical = json.dumps(
        payload.model_dump(mode="json"), sort_keys=True, separators=(",", ":")
    )
    return hashlib.sha256(canonical.encode()).hexdigest()


def _envelope(request_hash: str, result: dict, started: float, tolerances: dict) -> dict:
    return {
        "request_hash": request_hash,
        "result": result,
        "diagnostics": {
            "runtime_ms": (time.perf_counter() - started) * 1e3,
            # decimal strings so tolerance values round-trip exactly
            "tolerances": {k: repr(float(v)) for k, v in tolerances.items()},
        },
    }


def _error_response(status: int, code: str, detail: str, request_hash: str | None = None):
    body = {"error": {"code": code, "detail": detail}}
    if request_hash is not None:
        body["request_hash"] = request_hash
    return JSONResponse(status_code=status, content=body)


def _polyline(arr) -> list[dict]:
    return [{"n": float(a), "w": float(b)} for a, b in arr]


def _deadline(budget_ms: float | None) -> float | None:
    return None if budget_ms is None else time.monotonic() + budget_ms / 1e3


def create_app() -> FastAPI:
    app = FastAPI(
        title="wolbachia release-planning service",
        version="0.1.0",
        description=(
            "Stateless JSON analyses of a two-population mosquito competition "
            "model: equilibria, trajectories, basin-threshold curves, and "
            "minimal release campaigns."
        ),
    )
    origin = os.environ.get("WOLBACHIA_CORS_ORIGIN", "*")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=[origin],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(RequestValidationError)
    async def schema_violation(request: Request, exc: RequestValidationError):
        return _error_response(400, "schema_violation", str(exc.errors()))

    @app.exception_handler(ModelValidationError)
    async def model_invalid(request: Request, exc: ModelValidationError):
        return _error_response(422, "model_validation", str(exc))

    @app.exception_handler(DomainError)
    async def domain_invalid(request: Request, exc: DomainError):
        return _error_response(422, "model_validation", str(exc))

    @app.exception_handler(NumericalError)
    async def numerical_failure(request: Request, exc: NumericalError):
        return _error_response(500, "numerical_failure", str(exc))

    @app.exception_handler(BudgetExceeded)
    async def budget_exceeded(request: Request, exc: BudgetExceeded):
        return JSONResponse(
            status_code=202,
            content={
                "error": {"code": "budget_exceeded", "detail": str(exc)},
                "progress": {"cells_done": exc.done, "cells_total": exc.total},
            },
        )

    @app.post("/equilibria")
    def post_equilibria(req: EquilibriaRequest):
        started = time.perf_counter()
        p = req.parameters.resolve()
        report = validate_params(p)
        eq = equilibria(p)
        stability = classify_stability(p)
        records = []
        for rec in (stability.e0, stability.e_n, stability.e_w, stability.e_c):
            if rec is None:
                continue
            records.append(
                {
                    "label": rec.label,
                    "state": {"n": rec.state.n, "w": rec.state.w},
                    "classification": rec.classification,
                    "eigenvalues": None
                    if rec.eigenvalues is None
                    else [{"re": v.real, "im": v.imag} for v in rec.eigenvalues],
                    "by_rule": rec.by_rule,
                }
            )
        curves = nullclines(p)
        result = {
            "n_sharp": eq.n_sharp,
            "w_sharp": eq.w_sharp,
            "coexistence_feasible": eq.e_c is not None,
            "equilibria": records,
            "nullclines": {
                name: [{"n": a, "w": b} for a, b in pts]
                for name, pts in curves.items()
            },
            "validation": {
                "ok": report.ok,
                "feasible": report.feasible,
                "violations": list(report.violations),
            },
        }
        return _envelope(_request_hash(req), result, started, {})

    @app.post("/simulate")
    def post_simulate(req: SimulateRequest):
        started = time.perf_counter()
        p = req.parameters.resolve()
        opts = req.options.resolve()
        traj = integrate(
            p,
            PopulationState(req.n0, req.w0),
            opts,
            capture_radius=req.capture_radius,
        )
        return _envelope(
            _request_hash(req),
            traj.to_json_dict(),
            started,
            {"rel_tol": opts.rel_tol, "abs_tol": opts.abs_tol},
        )

    @app.post("/separatrix")
    def post_separatrix(req: SeparatrixRequest):
        started = time.perf_counter()
        p = req.parameters.resolve()
        if req.method not in ("backward", "bisection"):
            raise ModelValidationError(f"unknown method: {req.method!r}")
        if req.method == "backward":
            curve = separatrix_backward(p)
        else:
            import numpy as np

            curve = separatrix_bisection(
                p, np.linspace(0.0, p.n_sharp, req.grid_points), tol=req.tol
            )
        result = curve.to_json_dict()
        if req.include_unstable_manifold:
            pair = unstable_manifold(p)
            result["unstable_manifold"] = {
                "to_en": _polyline(pair.to_en),
                "to_ew": _polyline(pair.to_ew),
            }
        return _envelope(_request_hash(req), result, started, {"tol": req.tol})

    @app.post("/min-release")
    def post_min_release(req: MinReleaseRequest):
        started = time.perf_counter()
        p = req.parameters.resolve()
        if not req.n0_grid:
            raise ModelValidationError("n0_grid must be nonempty")
        deadline = _deadline(req.budget_ms)
        rows = []
        for idx, n0 in enumerate(req.n0_grid):
            if deadline is not None and time.monotonic() > deadline:
                raise BudgetExceeded(
                    "min-release sweep ran past its budget", idx, len(req.n0_grid)
                )
            if n0 < 0.0:
                raise DomainError(f"n0 must be nonnegative, got {n0}")
            w_min = minimal_viable_w(p, n0, tol=req.tol)
            rows.append({"n0": n0, "w_min": w_min, "w_min_frac": w_min / p.n_sharp})
        return _envelope(_request_hash(req), {"rows": rows}, started, {"tol": req.tol})

    @app.post("/plan")
    def post_plan(req: PlanRequest):
        started = time.perf_counter()
        p = req.parameters.resolve()
        if req.n0 < 0.0:
            raise DomainError(f"n0 must be nonnegative, got {req.n0}")
        try:
            sched_probe = ReleaseSchedule(0.0, req.tau, req.max_releases)
        except ValueError as exc:
            raise ModelValidationError(str(exc)) from exc
        del sched_probe
        result = minimal_release_size(
            p,
            req.n0,
            req.tau,
            req.max_releases,
            tol=req.tol,
            deadline=_deadline(req.budget_ms),
        )
        payload = {
            "n0": result.n0,
            "tau": result.tau,
            "lambda_hat": result.lambda_hat,
            "lambda_hat_frac": result.lambda_hat / p.n_sharp,
            "releases_used": result.releases_used,
            "total_released": result.total_released,
            "duration_days": result.duration_days,
            "single_release_size": result.single_release_size,
        }
        return _envelope(_request_hash(req), payload, started, {"tol": req.tol})

    @app.post("/simulate-impulsive")
    def post_simulate_impulsive(req: SimulateImpulsiveRequest):
        started = time.perf_counter()
        p = req.parameters.resolve()
        if req.n0 < 0.0 or req.w0 < 0.0:
            raise DomainError(
                f"initial state must be nonnegative, got ({req.n0}, {req.w0})"
            )
        opts = req.options.resolve()
        if req.schedule is not None:
            try:
                sched = ReleaseSchedule(
                    lambda_size=req.schedule.lambda_size,
                    tau=req.schedule.tau,
                    max_releases=req.schedule.max_releases,
                    stop_rule=req.schedule.stop_rule,
                )
            except ValueError as exc:
                raise ModelValidationError(str(exc)) from exc
            sep = None
            if sched.stop_rule == "on-separatrix-crossing":
                sep = separatrix_backward(p)
            sim = simulate_impulsive(p, req.n0, sched, sep, opts)
        else:
            try:
                sim = simulate_release_list(
                    p,
                    req.n0,
                    req.w0,
                    [(r.t, r.size) for r in req.releases],
                    opts,
                )
            except ValueError as exc:
                raise ModelValidationError(str(exc)) from exc
        return _envelope(
            _request_hash(req),
            sim.to_json_dict(),
            started,
            {"rel_tol": opts.rel_tol, "abs_tol": opts.abs_tol},
        )

    return app


app = create_app()


def _main() -> None:
    import uvicorn

    port = int(os.environ.get("PORT", "8000"))
    uvicorn.run(app, host="0.0.0.0", port=port)


if __name__ == "__main__":
    _main()
