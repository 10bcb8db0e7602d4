"""Threshold manifold of the saddle, heteroclinics, and minimal viable sizes.

The coexistence saddle e_c splits the quadrant into the two attraction
basins; its stable manifold is the dividing curve. Two independent
constructions are provided and cross-validated against each other:

  - backward integration: seed a small offset from e_c along the stable
    eigenvector and follow the time-reversed field. In reversed time the
    curve attracts nearby trajectories transversally, so tracing it this way
    is numerically stable. Fast, resolves the whole curve at once.
  - bisection: for each wild-population size n0, bisect on w with the basin
    classifier as oracle. Slow but makes no use of the linearization, so it
    is the independent check (and the definition of the minimal viable
    infected-population size for a single release).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import PchipInterpolator

from .model import (
    SADDLE,
    ModelParameters,
    ModelValidationError,
    PopulationState,
    classify_stability,
    equilibria,
    _field_eval,
)
from .integrate import (
    BasinLabel,
    IntegrationOptions,
    NumericalError,
    classify_basin,
    default_capture_radius,
    integrate,
)
from .parallel import sweep_map

__all__ = [
    "AmbiguousIntervalError",
    "SeparatrixCurve",
    "ManifoldPair",
    "minimal_viable_w",
    "separatrix_backward",
    "separatrix_bisection",
    "unstable_manifold",
]

BACKWARD = "backward-integration"
BISECTION = "bisection"

# Seed offset off the saddle as a fraction of its norm: below the local
# linearization error, above roundoff.
SEED_FRACTION = 1e-6


class AmbiguousIntervalError(NumericalError):
    """Basin oracle stayed Undecided across the bracketing interval."""

    def __init__(self, message: str, lo: float, hi: float):
        super().__init__(message)
        self.lo = lo
        self.hi = hi


@dataclass(frozen=True)
class SeparatrixCurve:
    """Polyline approximation of the basin-dividing curve, increasing in n.

    The curve is unordered with respect to the cone order: along it, larger n
    always comes with larger w, which is exactly what `w_of_n` interpolates
    (monotone piecewise-cubic, so interpolation preserves the property).
    """

    n: np.ndarray
    w: np.ndarray
    provenance: str

    def __post_init__(self) -> None:
        n = np.asarray(self.n, dtype=float)
        w = np.asarray(self.w, dtype=float)
        if n.ndim != 1 or n.shape != w.shape or len(n) < 2:
            raise ValueError("curve needs matching 1-d n and w arrays, >= 2 points")
        if np.any(np.diff(n) <= 0.0):
            raise ValueError("curve n values must be strictly increasing")
        if np.any(np.diff(w) < 0.0):
            raise NumericalError("curve is not cone-unordered: w decreases along n")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "_interp", PchipInterpolator(n, w, extrapolate=True))

    def w_of_n(self, n) -> float | np.ndarray:
        """Threshold infected-population size above the given wild size."""
        out = self._interp(n)  # type: ignore[attr-defined]
        return float(out) if np.isscalar(n) else np.asarray(out)

    @property
    def n_range(self) -> tuple[float, float]:
        return (float(self.n[0]), float(self.n[-1]))

    def to_json_dict(self) -> dict:
        return {
            "points": [{"n": float(a), "w": float(b)} for a, b in zip(self.n, self.w)],
            "provenance": self.provenance,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    def to_csv(self, stream) -> None:
        stream.write("n,w\n")
        for a, b in zip(self.n, self.w):
            stream.write(f"{float(a)!r},{float(b)!r}\n")


@dataclass(frozen=True)
class ManifoldPair:
    """The two heteroclinic branches leaving the saddle.

    Each branch is a polyline (k, 2) from e_c to within capture radius of its
    attractor, monotone in both coordinates.
    """

    to_en: np.ndarray
    to_ew: np.ndarray


def _saddle_with_eigensplit(p: ModelParameters):
    """Saddle state plus unit stable/unstable eigenvectors, or raise."""
    report = classify_stability(p)
    if report.e_c is None or report.e_c.classification != SADDLE:
        raise ModelValidationError(
            "no coexistence saddle: the threshold manifold is undefined "
            "(requires n_sharp > w_sharp)"
        )
    lam = report.e_c.eigenvalues
    vecs = report.e_c.eigenvectors
    assert lam is not None and vecs is not None
    stable_idx = 0 if lam[0].real < 0 else 1
    v_stable = np.array(vecs[stable_idx], dtype=float)
    v_unstable = np.array(vecs[1 - stable_idx], dtype=float)
    # Orient along increasing n so branch bookkeeping is sign-stable.
    if v_stable[0] < 0:
        v_stable = -v_stable
    if v_unstable[0] < 0:
        v_unstable = -v_unstable
    return report.e_c.state, v_stable, v_unstable


def minimal_viable_w(
    p: ModelParameters,
    n0: float,
    tol: float = 1e-6,
    opts: IntegrationOptions | None = None,
) -> float:
    """Smallest infected-population size whose release from wild size n0
    lands in the basin of the infected-only attractor.

    Bisection on w with the basin classifier as oracle; the returned value is
    the upper end of the final bracket, so it is itself a verified success.
    `tol` is relative. n0 = 0 returns 0: on the invariant w-axis any positive
    release succeeds.

    Raises AmbiguousIntervalError when the oracle stays Undecided on the
    bracket, and ModelValidationError for infeasible parameters.
    """
    if n0 < 0.0:
        raise ValueError(f"n0 must be nonnegative, got {n0}")
    eq = equilibria(p)
    if eq.e_c is None:
        raise ModelValidationError(
            "minimal viable size undefined without the coexistence saddle "
            "(requires n_sharp > w_sharp)"
        )
    if n0 == 0.0:
        return 0.0

    def oracle(w: float) -> BasinLabel:
        return classify_basin(p, PopulationState(n0, w), opts)

    hi = eq.w_sharp
    hi_label = oracle(hi)
    doublings = 0
    while hi_label is not BasinLabel.TO_EW:
        if doublings >= 10:
            raise AmbiguousIntervalError(
                f"no succeeding release size found up to {hi} (last label "
                f"{hi_label.value})",
                lo=0.0,
                hi=hi,
            )
        hi *= 2.0
        hi_label = oracle(hi)
        doublings += 1

    lo = 0.0
    lo_label = BasinLabel.TO_EN  # w = 0 lies on the invariant n-axis
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        label = oracle(mid)
        if label is BasinLabel.TO_EW:
            hi = mid
        else:
            lo, lo_label = mid, label
    if lo_label is BasinLabel.UNDECIDED:
        raise AmbiguousIntervalError(
            f"basin oracle undecided just below the threshold near w={hi}",
            lo=lo,
            hi=hi,
        )
    return hi


def _reversed_rhs(p: ModelParameters):
    def fun(t, y):
        dn, dw = _field_eval(p, max(y[0], 0.0), max(y[1], 0.0))
        return (-dn, -dw, math.hypot(dn, dw))

    return fun


def _trace_backward(
    p: ModelParameters,
    seed: np.ndarray,
    arc_budget: float,
    step: float,
    n_exit: float,
    w_exit: float,
    speed_floor: float,
    t_back_max: float,
    rel_tol: float,
) -> np.ndarray:
    """One separatrix branch as (k, 2) points ordered along the reversed flow."""

    def hit_n_high(t, y):
        return y[0] - n_exit
    hit_n_high.terminal = True
    hit_n_high.direction = 1.0

    def hit_w_high(t, y):
        return y[1] - w_exit
    hit_w_high.terminal = True
    hit_w_high.direction = 1.0

    def arc_spent(t, y):
        return y[2] - arc_budget
    arc_spent.terminal = True
    arc_spent.direction = 1.0

    def stalled(t, y):
        dn, dw = _field_eval(p, max(y[0], 0.0), max(y[1], 0.0))
        return math.hypot(dn, dw) - speed_floor
    stalled.terminal = True
    stalled.direction = -1.0

    sol = solve_ivp(
        _reversed_rhs(p),
        (0.0, t_back_max),
        [seed[0], seed[1], 0.0],
        method="RK45",
        rtol=rel_tol,
        atol=1e-12,
        dense_output=True,
        events=[hit_n_high, hit_w_high, arc_spent, stalled],
    )
    if sol.status == -1:
        raise NumericalError(f"backward trace failed: {sol.message}")

    # Densify so consecutive points are at most `step` apart in phase space.
    pts: list[tuple[float, float]] = [(float(sol.y[0, 0]), float(sol.y[1, 0]))]
    for i in range(len(sol.t) - 1):
        ta, tb = sol.t[i], sol.t[i + 1]
        a = sol.y[:2, i]
        b = sol.y[:2, i + 1]
        chord = math.hypot(b[0] - a[0], b[1] - a[1])
        pieces = max(1, int(math.ceil(chord / step)))
        for j in range(1, pieces + 1):
            y = sol.sol(ta + (tb - ta) * j / pieces)
            pts.append((float(y[0]), float(y[1])))
    return np.array(pts)


def separatrix_backward(
    p: ModelParameters,
    arc_budget: float | None = None,
    step: float | None = None,
    opts: IntegrationOptions | None = None,
) -> SeparatrixCurve:
    """Trace the basin-dividing curve by time-reversed integration from e_c.

    Seeds at e_c +/- delta along the unit stable eigenvector with
    delta = 1e-6 * (n_c + w_c). The descending branch runs into the origin
    (which belongs to the threshold set and is appended as the limit
    endpoint); the ascending branch runs until n exceeds 2*n_sharp, so
    release plans can be evaluated beyond the wild carrying capacity.
    """
    opts = opts or IntegrationOptions()
    saddle, v_stable, _ = _saddle_with_eigensplit(p)
    scale = max(p.n_sharp, p.w_sharp)
    if arc_budget is None:
        arc_budget = 40.0 * scale
    if step is None:
        step = scale / 400.0

    delta = SEED_FRACTION * (saddle.n + saddle.w)
    center = np.array([saddle.n, saddle.w])
    # The curve climbs past w = 2*w_sharp well before n = 2*n_sharp, so the
    # w-exit is set far above the box that bounds the dynamics; only the
    # n-exit and arc budget are meant to bind.
    common = dict(
        arc_budget=arc_budget,
        step=step,
        n_exit=2.0 * p.n_sharp,
        w_exit=50.0 * scale,
        speed_floor=1e-9 * scale,
        t_back_max=500.0,
        rel_tol=opts.rel_tol,
    )
    up = _trace_backward(p, center + delta * v_stable, **common)
    down = _trace_backward(p, center - delta * v_stable, **common)

    points: list[tuple[float, float]] = []
    tail = down[-1]
    if math.hypot(tail[0], tail[1]) < 1e-3:
        points.append((0.0, 0.0))  # the origin is the curve's limit endpoint
    points.extend((float(a), float(b)) for a, b in down[::-1])
    points.append((saddle.n, saddle.w))
    points.extend((float(a), float(b)) for a, b in up)

    arr = np.array(points)
    keep = np.concatenate(([True], np.diff(arr[:, 0]) > 0.0))
    arr = arr[keep]
    return SeparatrixCurve(n=arr[:, 0], w=arr[:, 1], provenance=BACKWARD)


def separatrix_bisection(
    p: ModelParameters,
    n_grid: np.ndarray | None = None,
    tol: float = 1e-6,
    opts: IntegrationOptions | None = None,
) -> SeparatrixCurve:
    """Independent curve construction: minimal viable size on a grid of n.

    Grid points are independent bisections and run through the shared sweep
    pool (capped by WOLBACHIA_THREADS).
    """
    if n_grid is None:
        n_grid = np.linspace(0.0, p.n_sharp, 33)
    n_grid = np.asarray(n_grid, dtype=float)
    ws = sweep_map(lambda n0: minimal_viable_w(p, float(n0), tol, opts), n_grid)
    return SeparatrixCurve(n=n_grid, w=np.array(ws), provenance=BISECTION)


def unstable_manifold(
    p: ModelParameters,
    opts: IntegrationOptions | None = None,
    capture_radius: float | None = None,
) -> ManifoldPair:
    """Forward-time heteroclinics from the saddle to each attractor."""
    saddle, _, v_unstable = _saddle_with_eigensplit(p)
    radius = capture_radius if capture_radius is not None else default_capture_radius(p)
    delta = SEED_FRACTION * (saddle.n + saddle.w)
    center = np.array([saddle.n, saddle.w])

    branches: dict[str, np.ndarray] = {}
    for sign in (+1.0, -1.0):
        seed = center + sign * delta * v_unstable
        traj = integrate(
            p,
            PopulationState(float(seed[0]), float(seed[1])),
            opts,
            capture_radius=radius,
        )
        if traj.terminal != "converged to attractor" or traj.attractor is None:
            raise NumericalError(
                f"unstable-manifold branch did not reach an attractor "
                f"(terminal: {traj.terminal})"
            )
        polyline = np.vstack([[saddle.n, saddle.w], traj.states])
        branches[traj.attractor] = polyline
    if set(branches) != {"e_n", "e_w"}:
        raise NumericalError(
            f"expected one branch per attractor, got {sorted(branches)}"
        )
    return ManifoldPair(to_en=branches["e_n"], to_ew=branches["e_w"])
