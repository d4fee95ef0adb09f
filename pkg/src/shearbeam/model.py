"""Constitutive parameters, run configuration, initial data, and validation.

The simulated structure is a one-dimensional shear beam (the roadbed)
suspended from an elastic cable through a distributed bed of springs, with
a rate-type thermal field damping the transverse motion.  Four fields live
on (0, L): the cable displacement u, the deck deflection phi, the
cross-section rotation psi, and the integrated thermal displacement w
(the temperature is recovered as w_t).  Every constitutive constant is
strictly positive; this is what makes the coupled system dissipative and
the implicit step matrix invertible, so validation rejects anything else.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

ScalarField = Callable[[np.ndarray], np.ndarray]


# --------------------------------------------------------------------------
# Errors
# --------------------------------------------------------------------------

class ValidationError(ValueError):
    """A parameter set or configuration violates a well-posedness precondition."""


class NonPositiveParameter(ValidationError):
    """A constitutive constant is zero, negative, or not a number."""

    def __init__(self, name: str, value: float | int | None = None):
        self.name = name
        msg = f"parameter '{name}' must be strictly positive"
        if value is not None:
            msg += f" (got {value!r})"
        super().__init__(msg)


class InvalidMesh(ValidationError):
    """The element count does not define a usable mesh."""


class InvalidTimeStep(ValidationError):
    """dt and T do not define a usable uniform time grid."""


class InvalidProbe(ValidationError):
    """A probe point lies outside the open interval (0, L)."""


class ConfigError(Exception):
    """A configuration file is missing, unreadable, or malformed."""


class SingularSystem(RuntimeError):
    """A linear system factorization hit a zero pivot (invalid inputs)."""


class SolverFailure(RuntimeError):
    """A linear solve failed or its residual exceeded tolerance."""


class DegenerateWindow(ValueError):
    """Too few usable samples in a fitting window."""


# --------------------------------------------------------------------------
# Domain types
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PhysicalParams:
    """The twelve constitutive constants plus the beam length, all > 0."""

    rho: float      # cable mass density
    alpha: float    # elastic modulus of the cable string
    lam: float      # suspender stiffness (config key "lambda")
    mu: float       # cable damping
    rho1: float     # beam mass density
    K: float        # shear modulus
    gamma: float    # beam damping
    beta: float     # thermoelastic coupling
    b: float        # bending stiffness
    rho3: float     # thermal inertia
    delta: float    # thermal conductivity
    kappa: float    # rate-type thermal dissipation
    L: float = 1.0  # beam length


@dataclass(frozen=True)
class SimulationConfig:
    """Discretization and output settings for one run."""

    M: int                                  # number of elements, >= 2
    dt: float                               # time step
    T: float                                # final time
    probe_points: tuple[float, ...] = ()    # x locations for time series
    snapshot_stride: int = 1                # steps between field snapshots
    output_dir: str = "."


@dataclass(frozen=True)
class InitialData:
    """Initial fields for the integrated-variable formulation.

    All seven functions must vanish at x = 0 and x = L so they are
    compatible with the homogeneous Dirichlet boundary conditions.
    """

    u0: ScalarField     # cable displacement
    u1: ScalarField     # cable velocity
    phi0: ScalarField   # deck deflection
    phi1: ScalarField   # deck velocity
    psi0: ScalarField   # rotation
    w0: ScalarField     # integrated thermal displacement
    w1: ScalarField     # its rate (= initial temperature)


@dataclass(frozen=True)
class ThermalData:
    """Temperature initial data (theta, theta_t at t=0) for the raw
    temperature formulation; converted to `InitialData.w0/w1` through the
    elliptic pre-solve in `shearbeam.transform`."""

    theta0: ScalarField
    theta1: ScalarField


# Config-file key -> PhysicalParams field.  "lambda" is a Python keyword,
# hence the one rename.
PARAM_KEYS = {
    "rho": "rho", "alpha": "alpha", "lambda": "lam", "mu": "mu",
    "rho1": "rho1", "K": "K", "gamma": "gamma", "beta": "beta",
    "b": "b", "rho3": "rho3", "delta": "delta", "kappa": "kappa", "L": "L",
}
CONFIG_KEYS = tuple(PARAM_KEYS) + ("M", "dt", "T", "probes",
                                   "snapshot_stride", "output_dir")


# --------------------------------------------------------------------------
# Validation
# --------------------------------------------------------------------------

def num_steps(config: SimulationConfig) -> int:
    """Number of implicit steps: round(T/dt).  The run reports results at
    N*dt, which by validation lies within one dt of the requested T."""
    return int(round(config.T / config.dt))


def validate(params: PhysicalParams,
             config: SimulationConfig) -> tuple[PhysicalParams, SimulationConfig]:
    """Return (params, config) unchanged iff every invariant holds.

    Raises NonPositiveParameter / InvalidMesh / InvalidTimeStep /
    InvalidProbe naming the offending field.  Idempotent.
    """
    for key, attr in PARAM_KEYS.items():
        value = getattr(params, attr)
        if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
            raise NonPositiveParameter(key, value)

    if not isinstance(config.M, int) or config.M < 2:
        raise InvalidMesh(f"M must be an integer >= 2 (got {config.M!r})")

    if not (math.isfinite(config.dt) and config.dt > 0):
        raise InvalidTimeStep(f"dt must be > 0 (got {config.dt!r})")
    if not (math.isfinite(config.T) and config.T > 0):
        raise InvalidTimeStep(f"T must be > 0 (got {config.T!r})")
    n = num_steps(config)
    if n < 1 or abs(n * config.dt - config.T) > config.dt:
        raise InvalidTimeStep(
            f"T = {config.T} is not within one dt of a whole number of steps of {config.dt}")

    if config.snapshot_stride < 1:
        raise NonPositiveParameter("snapshot_stride", config.snapshot_stride)

    for x in config.probe_points:
        if not (0.0 < x < params.L):
            raise InvalidProbe(f"probe point {x} outside (0, {params.L})")

    return params, config


def validate_initial_data(init: InitialData, L: float, atol: float = 1e-9) -> InitialData:
    """Check that all seven initial functions vanish at both endpoints."""
    ends = np.array([0.0, L])
    for name in ("u0", "u1", "phi0", "phi1", "psi0", "w0", "w1"):
        vals = np.asarray(getattr(init, name)(ends), dtype=float)
        if np.max(np.abs(vals)) > atol:
            raise ValidationError(
                f"initial function {name} does not vanish at the endpoints "
                f"(|{name}(0)|={abs(vals[0]):.2e}, |{name}(L)|={abs(vals[1]):.2e})")
    return init


# --------------------------------------------------------------------------
# Stock data
# --------------------------------------------------------------------------

def baseline_params() -> PhysicalParams:
    """Stiffly coupled benchmark constants: alpha=6, rho1=2, K=365, rest 1."""
    return PhysicalParams(rho=1.0, alpha=6.0, lam=1.0, mu=1.0, rho1=2.0,
                          K=365.0, gamma=1.0, beta=1.0, b=1.0, rho3=1.0,
                          delta=1.0, kappa=1.0, L=1.0)


def sine_initial_data(L: float = 1.0) -> InitialData:
    """All seven initial fields equal to sin(pi x / L)."""
    s = lambda x: np.sin(np.pi * np.asarray(x) / L)
    return InitialData(u0=s, u1=s, phi0=s, phi1=s, psi0=s, w0=s, w1=s)


# --------------------------------------------------------------------------
# Config file parsing
# --------------------------------------------------------------------------

def _parse_float(key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"key '{key}': cannot parse '{raw}' as a number") from None


def _parse_int(key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"key '{key}': cannot parse '{raw}' as an integer") from None


def parse_config(path: str | Path) -> tuple[PhysicalParams, SimulationConfig]:
    """Read a `key = value` configuration file.

    Recognized keys: rho, alpha, lambda, mu, rho1, K, gamma, beta, b, rho3,
    delta, kappa, L, M, dt, T, probes (comma-separated), snapshot_stride,
    output_dir.  Blank lines and lines starting with '#' are ignored;
    unknown keys are errors.  The returned pair is not yet validated.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror or exc}") from None

    values: dict[str, str] = {}
    for ln, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{ln}: expected 'key = value', got '{line}'")
        key, _, raw = line.partition("=")
        key, raw = key.strip(), raw.strip()
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{path}:{ln}: unknown key '{key}'")
        if key in values:
            raise ConfigError(f"{path}:{ln}: duplicate key '{key}'")
        values[key] = raw

    required = tuple(PARAM_KEYS) + ("M", "dt", "T")
    missing = [k for k in required if k not in values]
    if missing:
        raise ConfigError(f"{path}: missing keys: {', '.join(missing)}")

    params = PhysicalParams(**{PARAM_KEYS[k]: _parse_float(k, values[k])
                               for k in PARAM_KEYS})

    probes: tuple[float, ...] = ()
    if values.get("probes", "").strip():
        probes = tuple(_parse_float("probes", p)
                       for p in values["probes"].split(",") if p.strip())

    config = SimulationConfig(
        M=_parse_int("M", values["M"]),
        dt=_parse_float("dt", values["dt"]),
        T=_parse_float("T", values["T"]),
        probe_points=probes,
        snapshot_stride=_parse_int("snapshot_stride", values.get("snapshot_stride", "1")),
        output_dir=values.get("output_dir", "."),
    )
    return params, config
