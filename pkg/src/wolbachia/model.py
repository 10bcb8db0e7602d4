"""Planar competition model of wild vs. Wolbachia-infected mosquito populations.

State is a point (N, W) in the nonnegative quadrant: N wild (uninfected)
adults, W Wolbachia-carrying adults, both in individuals. The dynamics are

    dN/dt = rho_n * N * (N / (N + W)) - alpha_n * N - beta_n * N * (N + W)
    dW/dt = rho_w * W              - alpha_w * W - beta_w * W * (N + W)

The frequency factor N/(N+W) encodes cytoplasmic incompatibility (matings of
wild females with infected males are sterile), and the absence of any
N-source in dW/dt encodes maternal transmission (only infected females
produce infected offspring). Each population alone follows a logistic law
with carrying capacity (rho - alpha) / beta.

This module holds the parameter/state types, the vector field and its
Jacobian, the closed-form equilibria, spectral stability classification,
and the cone order under which the flow is monotone.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

__all__ = [
    "DomainError",
    "ModelValidationError",
    "ModelParameters",
    "PopulationState",
    "EquilibriumSet",
    "EquilibriumReport",
    "StabilityReport",
    "ValidationReport",
    "NODAL_ATTRACTOR",
    "SADDLE",
    "SOURCE",
    "DEGENERATE",
    "load_parameters",
    "params_hash",
    "validate_params",
    "vector_field",
    "jacobian",
    "cooperative_jacobian",
    "equilibria",
    "classify_stability",
    "nullclines",
    "order_leq_cone",
    "order_lt_cone",
    "order_ll_cone",
]

RATE_FIELDS = ("rho_n", "rho_w", "alpha_n", "alpha_w", "beta_n", "beta_w")

NODAL_ATTRACTOR = "nodal attractor"
SADDLE = "saddle"
SOURCE = "source"
DEGENERATE = "degenerate"


class DomainError(ValueError):
    """Input lies outside the domain of the requested operation."""


class ModelValidationError(ValueError):
    """Parameters violate a condition the operation requires."""


@dataclass(frozen=True)
class ModelParameters:
    """The six positive rates of the model.

    rho_n, rho_w: fecundity rates of uninfected / infected insects (1/day).
    alpha_n, alpha_w: natural mortality rates (1/day).
    beta_n, beta_w: competition coefficients (1/(individual*day)).

    The model is meaningful when all six rates are positive and each
    population can sustain itself alone (rho > alpha). Construction does not
    enforce these so that `validate_params` can report violations; operations
    that need a condition check it themselves. Whether a coexistence steady
    state exists (n_sharp > w_sharp) is exposed as the `feasible` flag, never
    enforced, so infeasible regimes can still be explored.
    """

    rho_n: float
    rho_w: float
    alpha_n: float
    alpha_w: float
    beta_n: float
    beta_w: float

    @property
    def n_sharp(self) -> float:
        """Carrying capacity of the wild population, individuals."""
        return (self.rho_n - self.alpha_n) / self.beta_n

    @property
    def w_sharp(self) -> float:
        """Carrying capacity of the infected population, individuals."""
        return (self.rho_w - self.alpha_w) / self.beta_w

    @property
    def feasible(self) -> bool:
        """True when a strictly positive coexistence equilibrium exists."""
        return self.n_sharp > self.w_sharp

    def as_dict(self) -> dict[str, float]:
        return {name: float(getattr(self, name)) for name in RATE_FIELDS}


@dataclass(frozen=True)
class PopulationState:
    """A point (n, w) in the phase plane, optionally time-stamped (days)."""

    n: float
    w: float
    t: float | None = None

    def as_pair(self) -> tuple[float, float]:
        return (self.n, self.w)


@dataclass(frozen=True)
class ValidationReport:
    """Which of the model's standing conditions hold for a parameter set."""

    positivity: bool
    wild_survival: bool
    infected_survival: bool
    feasible: bool
    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        """Positivity and both survival conditions; feasibility is a flag only."""
        return self.positivity and self.wild_survival and self.infected_survival


@dataclass(frozen=True)
class EquilibriumSet:
    """The model's steady states, all from closed forms.

    e0 (extinction), e_n (wild-only at capacity), e_w (infected-only at
    capacity) always exist. e_c, the unique strictly positive coexistence
    state, exists iff n_sharp > w_sharp and satisfies n_c + w_c = w_sharp.
    """

    e0: PopulationState
    e_n: PopulationState
    e_w: PopulationState
    e_c: PopulationState | None
    n_sharp: float
    w_sharp: float


@dataclass(frozen=True)
class EquilibriumReport:
    """Spectral data and classification for one equilibrium.

    eigenvalues is None for e0, where the linearization does not exist (the
    frequency term N/(N+W) has no limit at the origin) and the "source"
    classification is assigned by rule: arbitrarily small populations on
    either axis grow away from extinction.

    Theory predicts real spectra at e_n, e_w, e_c; a complex pair is still
    reported, classified by the sign of its real part, and flagged
    `unexpected_complex`.
    """

    label: str
    state: PopulationState
    classification: str
    eigenvalues: tuple[complex, complex] | None = None
    eigenvectors: tuple[tuple[float, float], tuple[float, float]] | None = None
    unexpected_complex: bool = False
    by_rule: bool = False


@dataclass(frozen=True)
class StabilityReport:
    e0: EquilibriumReport
    e_n: EquilibriumReport
    e_w: EquilibriumReport
    e_c: EquilibriumReport | None


def load_parameters(source: str | Path | dict) -> ModelParameters:
    """Build parameters from a dict, a JSON file path, or a preset name.

    A bare name without a path separator or .json suffix (e.g. "wmelpop")
    resolves against the presets shipped with the package.

    Raises ValueError for unreadable files, malformed JSON, or missing fields.
    """
    if isinstance(source, dict):
        data = source
    else:
        text = _read_parameter_text(source)
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValueError(f"malformed parameter JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ValueError("parameter JSON must be an object with the six rate fields")
    missing = [name for name in RATE_FIELDS if name not in data]
    if missing:
        raise ValueError(f"parameter file missing fields: {', '.join(missing)}")
    try:
        values = {name: float(data[name]) for name in RATE_FIELDS}
    except (TypeError, ValueError) as exc:
        raise ValueError(f"parameter fields must be numbers: {exc}") from exc
    return ModelParameters(**values)


def _read_parameter_text(source: str | Path) -> str:
    path = Path(source)
    name = str(source)
    if path.suffix != ".json" and "/" not in name and "\\" not in name:
        preset = resources.files("wolbachia").joinpath("presets").joinpath(f"{name}.json")
        if preset.is_file():
            return preset.read_text()
        raise ValueError(f"unknown parameter preset: {name!r}")
    try:
        return path.read_text()
    except OSError as exc:
        raise ValueError(f"cannot read parameter file {name!r}: {exc}") from exc


def params_hash(p: ModelParameters) -> str:
    """Stable sha256 over the canonical JSON form of the six rates."""
    canonical = json.dumps(p.as_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def validate_params(p: ModelParameters) -> ValidationReport:
    """Report which standing conditions hold; never raises, never mutates."""
    violations: list[str] = []
    nonpositive = [name for name in RATE_FIELDS if not getattr(p, name) > 0.0]
    positivity = not nonpositive
    if nonpositive:
        violations.append(f"nonpositive rates: {', '.join(nonpositive)}")
    wild_survival = p.rho_n > p.alpha_n
    if not wild_survival:
        violations.append("wild population cannot persist: rho_n <= alpha_n")
    infected_survival = p.rho_w > p.alpha_w
    if not infected_survival:
        violations.append("infected population cannot persist: rho_w <= alpha_w")
    feasible = positivity and wild_survival and infected_survival and p.feasible
    if positivity and wild_survival and infected_survival and not feasible:
        violations.append(
            "coexistence equilibrium infeasible: n_sharp <= w_sharp"
        )
    return ValidationReport(
        positivity=positivity,
        wild_survival=wild_survival,
        infected_survival=infected_survival,
        feasible=feasible,
        violations=tuple(violations),
    )


def _require_survival(p: ModelParameters) -> None:
    report = validate_params(p)
    if not report.ok:
        raise ModelValidationError("; ".join(report.violations))


def vector_field(p: ModelParameters, s: PopulationState) -> tuple[float, float]:
    """Growth rates (dN/dt, dW/dt) at a state, individuals/day.

    The frequency term N/(N+W) is defined as 0 at N+W=0 so the origin is a
    genuine fixed point of the implemented field.
    """
    n, w = s.n, s.w
    if n < 0.0 or w < 0.0:
        raise DomainError(f"state must be nonnegative, got ({n}, {w})")
    return _field_eval(p, n, w)


def _field_eval(p: ModelParameters, n: float, w: float) -> tuple[float, float]:
    total = n + w
    freq = n / total if total > 0.0 else 0.0
    dn = p.rho_n * n * freq - p.alpha_n * n - p.beta_n * n * total
    dw = p.rho_w * w - p.alpha_w * w - p.beta_w * w * total
    return (dn, dw)


def jacobian(p: ModelParameters, s: PopulationState) -> np.ndarray:
    """2x2 Jacobian of the vector field at a state, entries in 1/day.

    Undefined at the origin: the frequency term N/(N+W) has no limit there,
    so extinction cannot be classified spectrally (see `classify_stability`,
    which labels e0 by rule instead).
    """
    n, w = s.n, s.w
    if n < 0.0 or w < 0.0:
        raise DomainError(f"state must be nonnegative, got ({n}, {w})")
    total = n + w
    if total <= 0.0:
        raise DomainError(
            "Jacobian is undefined at the origin: the frequency term N/(N+W) "
            "has no limit there; extinction is classified dynamically, not "
            "spectrally"
        )
    ratio_w = w / total
    ratio_n = n / total
    j11 = p.rho_n * (1.0 - ratio_w * ratio_w) - p.alpha_n - p.beta_n * (w + 2.0 * n)
    j12 = -n * (p.beta_n + p.rho_n * ratio_n / total)
    j21 = -p.beta_w * w
    j22 = p.rho_w - p.alpha_w - p.beta_w * (n + 2.0 * w)
    return np.array([[j11, j12], [j21, j22]], dtype=float)


def cooperative_jacobian(p: ModelParameters, s: PopulationState) -> np.ndarray:
    """Jacobian conjugated by diag(1, -1).

    In the flipped coordinates (N, -W) the system is cooperative: this matrix
    has nonnegative off-diagonal entries (is Metzler) everywhere in the
    nonnegative quadrant, which is what makes the flow order-preserving.
    """
    flip = np.array([[1.0, 0.0], [0.0, -1.0]])
    return flip @ jacobian(p, s) @ flip


def equilibria(p: ModelParameters) -> EquilibriumSet:
    """All steady states from closed forms; no root-finding.

    Raises ModelValidationError when a survival condition fails (a capacity
    would be nonpositive and the only attractor is extinction).
    """
    _require_survival(p)
    n_sharp = p.n_sharp
    w_sharp = p.w_sharp
    e_c = None
    if n_sharp > w_sharp:
        w_c = w_sharp * (p.beta_n / p.rho_n) * (n_sharp - w_sharp)
        n_c = w_sharp - w_c
        e_c = PopulationState(n_c, w_c)
    return EquilibriumSet(
        e0=PopulationState(0.0, 0.0),
        e_n=PopulationState(n_sharp, 0.0),
        e_w=PopulationState(0.0, w_sharp),
        e_c=e_c,
        n_sharp=n_sharp,
        w_sharp=w_sharp,
    )


def _classify_pair(lam1: complex, lam2: complex) -> tuple[str, bool]:
    """Map an eigenvalue pair to a classification label.

    Returns (classification, unexpected_complex).
    """
    imag_scale = max(abs(lam1), abs(lam2), 1e-300)
    is_complex = max(abs(lam1.imag), abs(lam2.imag)) > 1e-12 * imag_scale
    if is_complex:
        re1, re2 = lam1.real, lam2.real
        if re1 < 0.0 and re2 < 0.0:
            return NODAL_ATTRACTOR, True
        if re1 > 0.0 and re2 > 0.0:
            return SOURCE, True
        return DEGENERATE, True
    r1, r2 = lam1.real, lam2.real
    if r1 == 0.0 or r2 == 0.0:
        return DEGENERATE, False
    if r1 < 0.0 and r2 < 0.0:
        return NODAL_ATTRACTOR, False
    if r1 > 0.0 and r2 > 0.0:
        return SOURCE, False
    return SADDLE, False


def _spectral_report(p: ModelParameters, label: str, state: PopulationState) -> EquilibriumReport:
    mat = jacobian(p, state)
    values, vectors = np.linalg.eig(mat)
    order = np.argsort(values.real)
    values = values[order]
    vectors = vectors[:, order]
    classification, unexpected = _classify_pair(complex(values[0]), complex(values[1]))
    eigenvectors = None
    if not unexpected:
        cols = np.real(vectors)
        norms = np.linalg.norm(cols, axis=0)
        cols = cols / norms
        eigenvectors = (
            (float(cols[0, 0]), float(cols[1, 0])),
            (float(cols[0, 1]), float(cols[1, 1])),
        )
    return EquilibriumReport(
        label=label,
        state=state,
        classification=classification,
        eigenvalues=(complex(values[0]), complex(values[1])),
        eigenvectors=eigenvectors,
        unexpected_complex=unexpected,
    )


def classify_stability(p: ModelParameters) -> StabilityReport:
    """Eigen-data and classification for every equilibrium.

    Under the survival conditions plus feasibility, e_n and e_w are nodal
    attractors, e_c is a saddle (det J < 0, real eigenvalues of opposite
    signs), and e0 is a source. e0 is classified by rule, not spectrum.
    """
    eq = equilibria(p)
    e0_report = EquilibriumReport(
        label="e0",
        state=eq.e0,
        classification=SOURCE,
        by_rule=True,
    )
    e_c_report = None
    if eq.e_c is not None:
        e_c_report = _spectral_report(p, "e_c", eq.e_c)
    return StabilityReport(
        e0=e0_report,
        e_n=_spectral_report(p, "e_n", eq.e_n),
        e_w=_spectral_report(p, "e_w", eq.e_w),
        e_c=e_c_report,
    )


def nullclines(p: ModelParameters, samples: int = 200) -> dict[str, list[tuple[float, float]]]:
    """Interior zero-growth curves as polylines, for plotting.

    The wild nullcline (dN/dt = 0, N > 0) is parameterized by the total
    population s = N + W: N = s*(alpha_n + beta_n*s)/rho_n for s in
    (0, n_sharp]; it joins the origin to e_n, passing through e_c when that
    exists. The infected nullcline (dW/dt = 0, W > 0) is the line
    N + W = w_sharp. The invariant axes are nullclines too but are left to
    the caller.
    """
    _require_survival(p)
    n_sharp = p.n_sharp
    w_sharp = p.w_sharp
    wild: list[tuple[float, float]] = []
    for s in np.linspace(0.0, n_sharp, samples):
        n = s * (p.alpha_n + p.beta_n * s) / p.rho_n
        wild.append((float(n), float(s - n)))
    infected = [(0.0, float(w_sharp)), (float(w_sharp), 0.0)]
    return {"dn_zero": wild, "dw_zero": infected}


def order_leq_cone(a: PopulationState, b: PopulationState) -> bool:
    """Componentwise cone order: a <= b iff a.n <= b.n and a.w >= b.w.

    This is the partial order (more wild insects, fewer infected ones) under
    which the flow is monotone. Under it the infected-only state (0, w_sharp)
    is *below* the wild-only state (n_sharp, 0).
    """
    return a.n <= b.n and a.w >= b.w


def order_lt_cone(a: PopulationState, b: PopulationState) -> bool:
    """Strict variant: ordered and not equal as phase points."""
    return order_leq_cone(a, b) and (a.n != b.n or a.w != b.w)


def order_ll_cone(a: PopulationState, b: PopulationState) -> bool:
    """Strong variant: both component inequalities strict."""
    return a.n < b.n and a.w > b.w


def field_speed(p: ModelParameters, n: float, w: float) -> float:
    """Euclidean norm of the vector field, individuals/day."""
    dn, dw = _field_eval(p, n, w)
    return math.hypot(dn, dw)
