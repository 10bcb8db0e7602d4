"""Adaptive integration of the smooth system and long-run basin classification.

Integration uses an embedded Runge-Kutta 4(5) pair with adaptive step and
dense output (scipy's RK45). The vector field is smooth and non-stiff at the
scales of interest, both attractors are hyperbolic nodes, and the axes are
invariant, so trajectories are classified by entry into a small capture ball
around an attractor rather than by any limit-set analysis.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .model import (
    DomainError,
    ModelParameters,
    PopulationState,
    equilibria,
)

__all__ = [
    "NumericalError",
    "IntegrationOptions",
    "Trajectory",
    "BasinLabel",
    "REACHED_T_MAX",
    "CONVERGED",
    "LEFT_DOMAIN",
    "default_capture_radius",
    "integrate",
    "classify_basin",
]

REACHED_T_MAX = "reached t_max"
CONVERGED = "converged to attractor"
LEFT_DOMAIN = "left domain"


class NumericalError(RuntimeError):
    """Solver failure (e.g. step-size underflow); carries the last valid state."""

    def __init__(self, message: str, last_state: PopulationState | None = None):
        super().__init__(message)
        self.last_state = last_state


class BasinLabel(enum.Enum):
    TO_EN = "ToEN"
    TO_EW = "ToEW"
    UNDECIDED = "Undecided"


@dataclass(frozen=True)
class IntegrationOptions:
    """Solver controls. Defaults suit the day-scale dynamics of this model."""

    rel_tol: float = 1e-9
    abs_tol: float = 1e-12          # individuals; also the axis-clamping window
    max_step: float = math.inf      # days
    t_max: float = 5000.0           # days
    dense_output: bool = True

    def __post_init__(self) -> None:
        if not (self.rel_tol > 0.0 and self.abs_tol > 0.0):
            raise ValueError("tolerances must be positive")
        if not self.t_max > 0.0:
            raise ValueError("t_max must be positive")


@dataclass
class Trajectory:
    """Time-stamped states at the solver's accepted steps.

    `terminal` says why integration stopped; `attractor` names the capture
    ball ("e_n" or "e_w") when terminal is CONVERGED. When dense output was
    requested, `at(times)` evaluates the continuous interpolant (clamped to
    the nonnegative quadrant like the stored samples).
    """

    t: np.ndarray
    states: np.ndarray              # shape (len(t), 2), columns N, W
    terminal: str
    attractor: str | None = None
    _dense: object | None = field(default=None, repr=False)
    _abs_tol: float = field(default=1e-12, repr=False)

    @property
    def final_state(self) -> PopulationState:
        return PopulationState(
            float(self.states[-1, 0]), float(self.states[-1, 1]), t=float(self.t[-1])
        )

    def at(self, times) -> np.ndarray:
        """Dense-output states at the requested times, shape (len(times), 2)."""
        if self._dense is None:
            raise ValueError("trajectory was integrated without dense output")
        out = np.asarray(self._dense(np.asarray(times, dtype=float))).T
        return _clamp_axes(out, self._abs_tol)

    def to_csv(self, stream) -> None:
        """Rows `t,N,W` with round-trip float formatting."""
        stream.write("t,N,W\n")
        for ti, (n, w) in zip(self.t, self.states):
            stream.write(f"{float(ti)!r},{float(n)!r},{float(w)!r}\n")

    def to_json_dict(self) -> dict:
        return {
            "t": [float(v) for v in self.t],
            "n": [float(v) for v in self.states[:, 0]],
            "w": [float(v) for v in self.states[:, 1]],
            "terminal": self.terminal,
            "attractor": self.attractor,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


def _clamp_axes(states: np.ndarray, abs_tol: float) -> np.ndarray:
    """Zero out roundoff-negative components within abs_tol of an axis.

    The axes are invariant; without this, a tiny negative W would reintroduce
    an extinct population on re-entry into the field.
    """
    clamped = np.array(states, dtype=float, copy=True)
    mask = (clamped < 0.0) & (clamped >= -abs_tol)
    clamped[mask] = 0.0
    return clamped


def _rhs(p: ModelParameters):
    rho_n, rho_w = p.rho_n, p.rho_w
    alpha_n, alpha_w = p.alpha_n, p.alpha_w
    beta_n, beta_w = p.beta_n, p.beta_w

    def fun(t, y):
        n, w = y
        total = n + w
        freq = n / total if total > 0.0 else 0.0
        return (
            rho_n * n * freq - alpha_n * n - beta_n * n * total,
            rho_w * w - alpha_w * w - beta_w * w * total,
        )

    return fun


def default_capture_radius(p: ModelParameters) -> float:
    """Capture-ball radius around each attractor, individuals.

    Both attractors are hyperbolic nodes, so convergence inside any fixed
    small ball is exponential and a fixed radius is safe.
    """
    return 1e-3 * max(p.n_sharp, p.w_sharp)


def _capture_events(p: ModelParameters, radius: float):
    eq = equilibria(p)
    centers = {"e_n": eq.e_n.as_pair(), "e_w": eq.e_w.as_pair()}

    events = []
    for name, (cn, cw) in centers.items():
        def make(cn=cn, cw=cw):
            def event(t, y):
                return math.hypot(y[0] - cn, y[1] - cw) - radius
            event.terminal = True
            event.direction = -1.0
            return event
        ev = make()
        ev.attractor = name  # type: ignore[attr-defined]
        events.append(ev)
    return events, centers


def integrate(
    p: ModelParameters,
    s0: PopulationState,
    opts: IntegrationOptions | None = None,
    *,
    t0: float = 0.0,
    t_end: float | None = None,
    capture_radius: float | None = None,
) -> Trajectory:
    """Integrate forward from s0.

    With `capture_radius` set, integration stops on entry into a ball of that
    radius around e_n or e_w and the trajectory is marked CONVERGED. The
    result is deterministic: identical inputs give bit-identical outputs.
    """
    opts = opts or IntegrationOptions()
    if s0.n < 0.0 or s0.w < 0.0:
        raise DomainError(f"initial state must be nonnegative, got ({s0.n}, {s0.w})")
    if t_end is None:
        t_end = t0 + opts.t_max

    events = None
    if capture_radius is not None:
        events, centers = _capture_events(p, capture_radius)
        for name, (cn, cw) in centers.items():
            if math.hypot(s0.n - cn, s0.w - cw) <= capture_radius:
                return Trajectory(
                    t=np.array([t0]),
                    states=np.array([[s0.n, s0.w]]),
                    terminal=CONVERGED,
                    attractor=name,
                    _abs_tol=opts.abs_tol,
                )

    sol = solve_ivp(
        _rhs(p),
        (t0, t_end),
        [s0.n, s0.w],
        method="RK45",
        rtol=opts.rel_tol,
        atol=opts.abs_tol,
        max_step=opts.max_step,
        dense_output=opts.dense_output,
        events=events,
    )
    if sol.status == -1:
        last = PopulationState(float(sol.y[0, -1]), float(sol.y[1, -1]), t=float(sol.t[-1]))
        raise NumericalError(f"integration failed: {sol.message}", last_state=last)

    states = _clamp_axes(sol.y.T, opts.abs_tol)
    terminal = REACHED_T_MAX
    attractor = None
    if sol.status == 1 and events is not None:
        terminal = CONVERGED
        for ev, t_hits in zip(events, sol.t_events):
            if len(t_hits):
                attractor = ev.attractor  # type: ignore[attr-defined]
    if np.any(states < -opts.abs_tol):
        terminal = LEFT_DOMAIN

    return Trajectory(
        t=sol.t.copy(),
        states=states,
        terminal=terminal,
        attractor=attractor,
        _dense=sol.sol if opts.dense_output else None,
        _abs_tol=opts.abs_tol,
    )


def classify_basin(
    p: ModelParameters,
    s0: PopulationState,
    opts: IntegrationOptions | None = None,
    *,
    capture_radius: float | None = None,
) -> BasinLabel:
    """Which attractor the orbit from s0 reaches.

    Integrates until the state enters the capture ball around e_n or e_w;
    returns UNDECIDED when t_max is hit first (starts near the threshold
    manifold can legitimately stay unresolved within the time budget).
    """
    radius = capture_radius if capture_radius is not None else default_capture_radius(p)
    traj = integrate(p, s0, opts, capture_radius=radius)
    if traj.terminal == CONVERGED:
        return BasinLabel.TO_EN if traj.attractor == "e_n" else BasinLabel.TO_EW
    return BasinLabel.UNDECIDED
