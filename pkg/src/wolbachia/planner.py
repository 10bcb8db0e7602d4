"""Impulsive periodic-release simulation and minimal release-size search.

A release campaign starts with W(0) = release size and adds the same amount
every tau days. The default stop rule suspends releases at the first jump
that leaves the state strictly above the threshold curve (with a small
margin); the orbit then continues impulse-free. The smooth flow cannot cross
the invariant threshold curve between jumps, so checking right after each
jump is sufficient.

The verdict is always decided by actual attractor capture, never by the
crossing check alone: the crossing check only gates further releases.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .model import ModelParameters, PopulationState
from .integrate import (
    CONVERGED,
    IntegrationOptions,
    Trajectory,
    default_capture_radius,
    integrate,
)
from .threshold import SeparatrixCurve, minimal_viable_w, separatrix_backward
from .parallel import sweep_map

__all__ = [
    "ON_SEPARATRIX_CROSSING",
    "FIXED_COUNT",
    "REPLACEMENT",
    "FAILURE",
    "BUDGET_EXHAUSTED",
    "BudgetExceeded",
    "ReleaseSchedule",
    "JumpEvent",
    "ImpulsiveTrajectory",
    "PlanResult",
    "simulate_impulsive",
    "simulate_release_list",
    "minimal_release_size",
    "tradeoff_table",
]

ON_SEPARATRIX_CROSSING = "on-separatrix-crossing"
FIXED_COUNT = "fixed-count"

REPLACEMENT = "replacement"
FAILURE = "failure"
BUDGET_EXHAUSTED = "budget-exhausted"

# How far above the threshold curve a post-jump state must sit before further
# releases are suspended, as a fraction of w_sharp.
CROSSING_MARGIN_FRACTION = 1e-3


class BudgetExceeded(RuntimeError):
    """A deadline-limited sweep ran out of time; carries progress, no results."""

    def __init__(self, message: str, done: int, total: int):
        super().__init__(message)
        self.done = done
        self.total = total


@dataclass(frozen=True)
class ReleaseSchedule:
    """Periodic releases of lambda_size individuals every tau days.

    The release at t = 0 counts toward max_releases. Under the
    on-separatrix-crossing stop rule further releases are suspended once a
    jump lands strictly above the threshold curve; under fixed-count all
    max_releases jumps happen regardless.
    """

    lambda_size: float
    tau: float
    max_releases: int
    stop_rule: str = ON_SEPARATRIX_CROSSING

    def __post_init__(self) -> None:
        if self.lambda_size < 0.0:
            raise ValueError("lambda_size must be nonnegative")
        if not self.tau > 0.0:
            raise ValueError("tau must be positive")
        if self.max_releases < 1:
            raise ValueError("max_releases must be at least 1")
        if self.stop_rule not in (ON_SEPARATRIX_CROSSING, FIXED_COUNT):
            raise ValueError(f"unknown stop_rule: {self.stop_rule!r}")


@dataclass(frozen=True)
class JumpEvent:
    t: float
    dw: float
    w_before: float
    w_after: float


@dataclass
class ImpulsiveTrajectory:
    """Piecewise-smooth orbit of a release campaign.

    `segments` are the smooth arcs between jumps (the last one runs
    impulse-free to attractor capture or t_max); `jumps` record the
    instantaneous W increments, including the initial condition W(0) = size.
    """

    segments: list[Trajectory]
    jumps: list[JumpEvent]
    outcome: str
    releases_used: int
    crossed_at: float | None = None
    _abs_tol: float = field(default=1e-12, repr=False)

    @property
    def final_state(self) -> PopulationState:
        return self.segments[-1].final_state

    def concatenated(self) -> tuple[np.ndarray, np.ndarray]:
        """(t, states) with duplicated rows at jump instants (left then right limit)."""
        ts = [seg.t for seg in self.segments]
        ys = [seg.states for seg in self.segments]
        return np.concatenate(ts), np.vstack(ys)

    def to_csv(self, stream) -> None:
        stream.write("t,N,W\n")
        t, states = self.concatenated()
        for ti, (n, w) in zip(t, states):
            stream.write(f"{float(ti)!r},{float(n)!r},{float(w)!r}\n")

    def to_json_dict(self) -> dict:
        t, states = self.concatenated()
        return {
            "t": [float(v) for v in t],
            "n": [float(v) for v in states[:, 0]],
            "w": [float(v) for v in states[:, 1]],
            "jumps": [
                {
                    "t": j.t,
                    "dw": j.dw,
                    "w_before": j.w_before,
                    "w_after": j.w_after,
                }
                for j in self.jumps
            ],
            "outcome": self.outcome,
            "releases_used": self.releases_used,
            "crossed_at": self.crossed_at,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


@dataclass(frozen=True)
class PlanResult:
    """Minimal campaign for one (n0, tau) cell."""

    n0: float
    tau: float
    lambda_hat: float
    releases_used: int
    total_released: float
    duration_days: float
    single_release_size: float
    error: str | None = None


def _above_curve(sep: SeparatrixCurve, n: float, w: float, margin: float) -> bool:
    return w > float(sep.w_of_n(n)) + margin


def simulate_impulsive(
    p: ModelParameters,
    n0: float,
    sched: ReleaseSchedule,
    sep: SeparatrixCurve | None = None,
    opts: IntegrationOptions | None = None,
) -> ImpulsiveTrajectory:
    """Run a release campaign from wild-population size n0.

    The initial condition is (n0, lambda_size): the t = 0 release is the
    first jump and counts toward max_releases. Releases then occur every tau
    days until the stop rule suspends them or the budget is exhausted, after
    which the orbit runs impulse-free to attractor capture. Outcome is
    REPLACEMENT on capture at e_w, FAILURE on capture at e_n, and
    BUDGET_EXHAUSTED only when t_max passes without capture.
    """
    opts = opts or IntegrationOptions()
    if n0 < 0.0:
        raise ValueError(f"n0 must be nonnegative, got {n0}")
    uses_crossing = sched.stop_rule == ON_SEPARATRIX_CROSSING
    if uses_crossing and sep is None:
        raise ValueError(
            "the on-separatrix-crossing stop rule needs a separatrix curve"
        )
    margin = CROSSING_MARGIN_FRACTION * p.w_sharp
    radius = default_capture_radius(p)

    lam = sched.lambda_size
    jumps = [JumpEvent(t=0.0, dw=lam, w_before=0.0, w_after=lam)]
    releases = 1
    state = (float(n0), float(lam))
    t_now = 0.0
    crossed_at: float | None = None
    if uses_crossing and _above_curve(sep, state[0], state[1], margin):
        crossed_at = 0.0

    segments: list[Trajectory] = []
    while crossed_at is None and releases < sched.max_releases:
        seg = integrate(
            p,
            PopulationState(state[0], state[1]),
            opts,
            t0=t_now,
            t_end=t_now + sched.tau,
        )
        segments.append(seg)
        t_now += sched.tau
        end = seg.final_state
        w_after = end.w + lam
        jumps.append(JumpEvent(t=t_now, dw=lam, w_before=end.w, w_after=w_after))
        releases += 1
        state = (end.n, w_after)
        if uses_crossing and _above_curve(sep, state[0], state[1], margin):
            crossed_at = t_now

    tail = integrate(
        p,
        PopulationState(state[0], state[1]),
        opts,
        t0=t_now,
        capture_radius=radius,
    )
    segments.append(tail)
    if tail.terminal == CONVERGED:
        outcome = REPLACEMENT if tail.attractor == "e_w" else FAILURE
    else:
        outcome = BUDGET_EXHAUSTED

    return ImpulsiveTrajectory(
        segments=segments,
        jumps=jumps,
        outcome=outcome,
        releases_used=releases,
        crossed_at=crossed_at,
        _abs_tol=opts.abs_tol,
    )


def simulate_release_list(
    p: ModelParameters,
    n0: float,
    w0: float,
    releases: list[tuple[float, float]],
    opts: IntegrationOptions | None = None,
) -> ImpulsiveTrajectory:
    """Run an explicit what-if schedule: releases as (day, size) pairs.

    Unlike the periodic system there is no stop rule: the user placed each
    release deliberately, so all of them fire and the verdict comes from
    attractor capture after the last one. A release at t = 0 adds to w0.
    """
    opts = opts or IntegrationOptions()
    if n0 < 0.0 or w0 < 0.0:
        raise ValueError(f"initial state must be nonnegative, got ({n0}, {w0})")
    events = sorted((float(t), float(dw)) for t, dw in releases)
    if events and events[0][0] < 0.0:
        raise ValueError("release times must be nonnegative")
    if any(dw < 0.0 for _, dw in events):
        raise ValueError("release sizes must be nonnegative")

    radius = default_capture_radius(p)
    segments: list[Trajectory] = []
    jumps: list[JumpEvent] = []
    state = (float(n0), float(w0))
    t_now = 0.0
    for t_release, dw in events:
        if t_release > t_now:
            seg = integrate(
                p,
                PopulationState(state[0], state[1]),
                opts,
                t0=t_now,
                t_end=t_release,
            )
            segments.append(seg)
            end = seg.final_state
            state = (end.n, end.w)
            t_now = t_release
        jumps.append(
            JumpEvent(t=t_now, dw=dw, w_before=state[1], w_after=state[1] + dw)
        )
        state = (state[0], state[1] + dw)

    tail = integrate(
        p,
        PopulationState(state[0], state[1]),
        opts,
        t0=t_now,
        capture_radius=radius,
    )
    segments.append(tail)
    if tail.terminal == CONVERGED:
        outcome = REPLACEMENT if tail.attractor == "e_w" else FAILURE
    else:
        outcome = BUDGET_EXHAUSTED
    return ImpulsiveTrajectory(
        segments=segments,
        jumps=jumps,
        outcome=outcome,
        releases_used=len(jumps),
        crossed_at=None,
        _abs_tol=opts.abs_tol,
    )


def minimal_release_size(
    p: ModelParameters,
    n0: float,
    tau: float,
    max_releases: int,
    tol: float = 1e-3,
    sep: SeparatrixCurve | None = None,
    single_release_size: float | None = None,
    opts: IntegrationOptions | None = None,
    deadline: float | None = None,
) -> PlanResult:
    """Smallest per-release size achieving replacement within max_releases.

    Bisection on the release size over [0, single-release size]; the upper
    bracket is the minimal viable size for one release, which succeeds by
    construction, so the search is well-posed. `tol` is relative. `deadline`
    (time.monotonic seconds) aborts long searches with BudgetExceeded.

    When the release budget binds, the search converges to the cheapest size
    that fits the budget and `releases_used` equals max_releases: that is the
    (size, count) tradeoff frontier. With a generous budget the size
    approaches the absolute critical value instead, near which the number of
    releases until crossing grows without bound, so the reported count then
    reflects the search tolerance rather than a robust property of the model.
    """
    if sep is None:
        sep = separatrix_backward(p, opts=opts)
    if single_release_size is None:
        single_release_size = minimal_viable_w(p, n0, opts=opts)

    checked = 0

    def succeeds(lam: float) -> ImpulsiveTrajectory | None:
        nonlocal checked
        if deadline is not None and time.monotonic() > deadline:
            raise BudgetExceeded(
                "release-size search ran past its deadline", checked, -1
            )
        sched = ReleaseSchedule(
            lambda_size=lam,
            tau=tau,
            max_releases=max_releases,
            stop_rule=ON_SEPARATRIX_CROSSING,
        )
        sim = simulate_impulsive(p, n0, sched, sep, opts)
        checked += 1
        return sim if sim.outcome == REPLACEMENT else None

    hi = single_release_size
    best = succeeds(hi)
    if best is None:
        raise RuntimeError(
            "single-release size failed as upper bracket; threshold data and "
            "impulsive simulation disagree"
        )
    lo = 0.0
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        sim = succeeds(mid)
        if sim is not None:
            hi, best = mid, sim
        else:
            lo = mid

    return PlanResult(
        n0=n0,
        tau=tau,
        lambda_hat=hi,
        releases_used=best.releases_used,
        total_released=best.releases_used * hi,
        duration_days=best.releases_used * tau,
        single_release_size=single_release_size,
    )


def tradeoff_table(
    p: ModelParameters,
    n0_grid,
    tau_grid,
    budget: int,
    tol: float = 1e-3,
    opts: IntegrationOptions | None = None,
    deadline: float | None = None,
) -> list[PlanResult]:
    """Minimal campaigns over an (n0, tau) grid; per-cell errors are recorded
    in the row rather than aborting the sweep."""
    n0_grid = [float(v) for v in n0_grid]
    tau_grid = [float(v) for v in tau_grid]
    if not n0_grid or not tau_grid:
        raise ValueError("n0 and tau grids must be nonempty")

    sep = separatrix_backward(p, opts=opts)
    singles: dict[float, float | Exception] = {}
    for n0 in sorted(set(n0_grid)):
        try:
            singles[n0] = minimal_viable_w(p, n0, opts=opts)
        except Exception as exc:  # surfaces in every cell sharing this n0
            singles[n0] = exc
    cells = [(n0, tau) for n0 in n0_grid for tau in tau_grid]

    def failed_cell(n0: float, tau: float, message: str) -> PlanResult:
        return PlanResult(
            n0=n0,
            tau=tau,
            lambda_hat=math.nan,
            releases_used=0,
            total_released=math.nan,
            duration_days=math.nan,
            single_release_size=math.nan,
            error=message,
        )

    def run_cell(cell: tuple[float, float]) -> PlanResult:
        n0, tau = cell
        single = singles[n0]
        if isinstance(single, Exception):
            return failed_cell(n0, tau, str(single))
        try:
            return minimal_release_size(
                p,
                n0,
                tau,
                budget,
                tol=tol,
                sep=sep,
                single_release_size=single,
                opts=opts,
                deadline=deadline,
            )
        except BudgetExceeded:
            raise
        except Exception as exc:  # recorded per-cell, sweep continues
            return failed_cell(n0, tau, str(exc))

    if deadline is None:
        return sweep_map(run_cell, cells)
    results: list[PlanResult] = []
    for idx, cell in enumerate(cells):
        if time.monotonic() > deadline:
            raise BudgetExceeded("tradeoff sweep ran past its deadline", idx, len(cells))
        results.append(run_cell(cell))
    return results
