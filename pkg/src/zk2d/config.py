"""Domain, grid, initial-data and run-configuration types.

Everything here is immutable after construction and safe to share across
workers.  Initial data comes in three flavours: the canonical analytic
family A*x(L-x)^2*sin(j*pi*y/B) (which satisfies the compatibility
conditions u0 = 0 on the boundary and d_x u0(L,y) = 0 by construction),
tabulated grid values (interpreted by bicubic interpolation), and an
arbitrary callable for library use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import RectBivariateSpline


class ConfigError(ValueError):
    """Invalid configuration value, key, or file."""


@dataclass(frozen=True)
class DomainSpec:
    """Rectangle (0,L) x (0,B)."""

    L: float
    B: float

    def __post_init__(self):
        for name in ("L", "B"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ConfigError(f"{name} must be a finite positive real, got {v!r}")


@dataclass(frozen=True)
class GridSpec:
    """Discretization parameters.

    N  : number of sine modes in y
    M  : number of x-intervals (nodes x_i = i*L/M, i = 0..M)
    K  : number of y-quadrature points, K >= 2N (cubic dealiasing floor)
    dt : time step
    T  : final time (T = 0 is allowed and produces only the initial record)
    """

    N: int
    M: int
    K: int
    dt: float
    T: float

    def __post_init__(self):
        if not (isinstance(self.N, int) and self.N >= 1):
            raise ConfigError(f"N must be a positive integer, got {self.N!r}")
        if not (isinstance(self.M, int) and self.M >= 8):
            raise ConfigError(f"M must be an integer >= 8, got {self.M!r}")
        if not (isinstance(self.K, int) and self.K >= 2 * self.N):
            raise ConfigError(f"K = {self.K!r} violates the dealiasing floor K >= 2N = {2 * self.N}")
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ConfigError(f"dt must be a finite positive real, got {self.dt!r}")
        if not (math.isfinite(self.T) and self.T >= 0):
            raise ConfigError(f"T must be a finite nonnegative real, got {self.T!r}")

    def x_nodes(self, domain: DomainSpec) -> np.ndarray:
        return np.linspace(0.0, domain.L, self.M + 1)

    @property
    def n_steps_per_unit(self) -> float:
        return 1.0 / self.dt


class InitialData:
    """Base class for initial data u0(x,y)."""

    family = "abstract"

    def sample(self, domain: DomainSpec, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Values on the tensor grid, shape (len(y), len(x))."""
        raise NotImplementedError

    def dx_at_right_edge(self, domain: DomainSpec, y: np.ndarray) -> np.ndarray:
        """d_x u0(L, y), one-sided second-order difference by default."""
        d = 1e-5 * domain.L
        xs = np.array([domain.L, domain.L - d, domain.L - 2 * d])
        vals = self.sample(domain, xs, y)
        return (3 * vals[:, 0] - 4 * vals[:, 1] + vals[:, 2]) / (2 * d)

    def default_tolerance(self) -> float:
        return 1e-6


@dataclass(frozen=True)
class CanonicalData(InitialData):
    """u0(x,y) = A * x(L-x)^2 * sin(j*pi*y/B).

    Vanishes on all four edges; d_x u0(L,y) = 0 through the double root at
    x = L.  Grid samples scale exactly linearly in A.
    """

    A: float
    j: int = 1
    family = "canonical"

    def __post_init__(self):
        if not math.isfinite(self.A):
            raise ConfigError(f"amplitude A must be finite, got {self.A!r}")
        if not (isinstance(self.j, int) and self.j >= 1):
            raise ConfigError(f"mode index j must be a positive integer, got {self.j!r}")

    def profile(self, x, L):
        return x * (L - x) ** 2

    def dprofile(self, x, L):
        return (L - x) * (L - 3.0 * x)

    def sample(self, domain, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        px = self.A * self.profile(x, domain.L)
        sy = np.sin(self.j * np.pi * y / domain.B)
        return np.outer(sy, px)

    def dx_at_right_edge(self, domain, y):
        return np.zeros_like(np.asarray(y, dtype=float))

    def default_tolerance(self) -> float:
        return 1e-12


@dataclass(frozen=True)
class TabulatedData(InitialData):
    """Initial data given as grid values; bicubic interpolation onto the
    solver grid preserves the H^2 smoothness class the theory assumes."""

    x: np.ndarray
    y: np.ndarray
    values: np.ndarray  # shape (len(y), len(x))
    family = "tabulated"
    _spline: RectBivariateSpline = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if v.shape != (y.size, x.size):
            raise ConfigError(f"values shape {v.shape} does not match (len(y), len(x)) = {(y.size, x.size)}")
        if x.size < 4 or y.size < 4:
            raise ConfigError("tabulated data needs at least 4 points per axis for bicubic interpolation")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "_spline", RectBivariateSpline(y, x, v, kx=3, ky=3))

    def sample(self, domain, x, y):
        return self._spline(np.asarray(y, dtype=float), np.asarray(x, dtype=float))

    def dx_at_right_edge(self, domain, y):
        d = max(1e-4 * domain.L, np.diff(self.x).min() * 1e-2)
        xs = np.array([domain.L, domain.L - d, domain.L - 2 * d])
        vals = self.sample(domain, xs, y)
        return (3 * vals[:, 0] - 4 * vals[:, 1] + vals[:, 2]) / (2 * d)


@dataclass(frozen=True)
class CallableData(InitialData):
    """Initial data from an arbitrary vectorized function fn(X, Y)."""

    fn: object
    family = "callable"

    def sample(self, domain, x, y):
        X, Y = np.meshgrid(np.asarray(x, float), np.asarray(y, float))
        return np.asarray(self.fn(X, Y), dtype=float)


def make_canonical_u0(domain: DomainSpec, A: float, j: int = 1) -> CanonicalData:
    """Member of the admissible analytic family for the given rectangle."""
    if not isinstance(domain, DomainSpec):
        raise ConfigError("domain must be a DomainSpec")
    return CanonicalData(A=float(A), j=j)


@dataclass(frozen=True)
class CompatibilityReport:
    ok: bool
    max_edge_value: float
    max_right_dx: float
    sup_u0: float
    tol: float
    worst_edge: str

    def __bool__(self):
        return self.ok


def validate_compatibility(u0: InitialData, domain: DomainSpec, tol: float | None = None,
                           n_probe: int = 257) -> CompatibilityReport:
    """Check u0 = 0 on all four edges and d_x u0 = 0 at x = L.

    Pure check: returns a report, never raises.  Thresholds are relative to
    sup |u0| over the rectangle; the zero datum passes trivially.
    """
    if tol is None:
        tol = u0.default_tolerance()
    L, B = domain.L, domain.B
    xs = np.linspace(0.0, L, n_probe)
    ys = np.linspace(0.0, B, n_probe)
    interior = u0.sample(domain, xs, ys)
    sup = float(np.abs(interior).max())
    edges = {
        "x=0": np.abs(u0.sample(domain, np.array([0.0]), ys)).max(),
        "x=L": np.abs(u0.sample(domain, np.array([L]), ys)).max(),
        "y=0": np.abs(u0.sample(domain, xs, np.array([0.0]))).max(),
        "y=B": np.abs(u0.sample(domain, xs, np.array([B]))).max(),
    }
    worst_edge = max(edges, key=edges.get)
    max_edge = float(edges[worst_edge])
    max_dx = float(np.abs(u0.dx_at_right_edge(domain, ys)).max())
    if sup == 0.0:
        return CompatibilityReport(True, max_edge, max_dx, sup, tol, worst_edge)
    ok = (max_edge <= tol * sup) and (max_dx <= tol * sup)
    return CompatibilityReport(ok, max_edge, max_dx, sup, tol, worst_edge)


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce a run."""

    domain: DomainSpec
    grid: GridSpec
    u0: InitialData
    forcing: str | None = None  # None or "manufactured"
    cadence: int = 1
    out_dir: str = "out"

    def __post_init__(self):
        if not (isinstance(self.cadence, int) and self.cadence >= 1):
            raise ConfigError(f"cadence must be a positive integer, got {self.cadence!r}")
        if self.forcing not in (None, "manufactured"):
            raise ConfigError(f"forcing must be 'none' or 'manufactured', got {self.forcing!r}")
        if isinstance(self.u0, CanonicalData) and self.u0.j > self.grid.N:
            raise ConfigError(f"u0.j = {self.u0.j} exceeds the mode count N = {self.grid.N}")


# --- key = value configuration files -------------------------------------

CONFIG_KEYS = ("L", "B", "N", "M", "K", "dt", "T",
               "u0.family", "u0.A", "u0.j", "forcing", "cadence", "out_dir")

_DEFAULTS = {
    "L": 1.0, "B": 1.0, "N": 16, "M": 256, "K": None,  # K defaults to 2N
    "dt": 1e-3, "T": 5.0,
    "u0.family": "canonical", "u0.A": 0.01, "u0.j": 1,
    "forcing": "none", "cadence": 1, "out_dir": "out",
}

_INT_KEYS = {"N", "M", "K", "u0.j", "cadence"}
_FLOAT_KEYS = {"L", "B", "dt", "T", "u0.A"}


def parse_config(path) -> RunConfig:
    """Parse a line-oriented ``key = value`` file into a validated RunConfig.

    Unknown keys, duplicate keys and malformed values are errors carrying the
    offending line number; missing keys take the documented defaults
    (N=16, M=256, K=2N, dt=1e-3, T=5, L=B=1).
    """
    path = Path(path)
    raw: dict[str, str] = {}
    lines: dict[str, int] = {}
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key '{key}'")
        if key in raw:
            raise ConfigError(f"{path}:{lineno}: duplicate key '{key}' (first at line {lines[key]})")
        raw[key] = value
        lines[key] = lineno

    def where(key):
        return f"{path}:{lines[key]}" if key in lines else str(path)

    values = dict(_DEFAULTS)
    for key, text in raw.items():
        try:
            if key in _INT_KEYS:
                values[key] = int(text)
            elif key in _FLOAT_KEYS:
                values[key] = float(text)
            else:
                values[key] = text
        except ValueError:
            raise ConfigError(f"{where(key)}: cannot parse value {text!r} for key '{key}'") from None
    if values["K"] is None:
        values["K"] = 2 * values["N"]

    try:
        domain = DomainSpec(L=values["L"], B=values["B"])
        grid = GridSpec(N=values["N"], M=values["M"], K=values["K"],
                        dt=values["dt"], T=values["T"])
        family = values["u0.family"]
        if family == "canonical":
            u0 = CanonicalData(A=values["u0.A"], j=values["u0.j"])
        elif family == "zero":
            u0 = CanonicalData(A=0.0, j=1)
        else:
            raise ConfigError(f"{where('u0.family')}: unknown u0.family '{family}' "
                              "(config files support 'canonical' and 'zero')")
        forcing = None if values["forcing"] in ("none", "", None) else values["forcing"]
        return RunConfig(domain=domain, grid=grid, u0=u0, forcing=forcing,
                         cadence=values["cadence"], out_dir=values["out_dir"])
    except ConfigError as err:
        raise ConfigError(f"{path}: {err}") from None


def config_lines(config: RunConfig) -> list[str]:
    """Fully resolved ``key = value`` lines; floats round-trip exactly."""
    u0 = config.u0
    if not isinstance(u0, CanonicalData):
        raise ConfigError(f"only analytic u0 families are expressible in config files, got {u0.family}")
    return [
        f"L = {config.domain.L!r}",
        f"B = {config.domain.B!r}",
        f"N = {config.grid.N}",
        f"M = {config.grid.M}",
        f"K = {config.grid.K}",
        f"dt = {config.grid.dt!r}",
        f"T = {config.grid.T!r}",
        "u0.family = canonical",
        f"u0.A = {u0.A!r}",
        f"u0.j = {u0.j}",
        f"forcing = {config.forcing or 'none'}",
        f"cadence = {config.cadence}",
        f"out_dir = {config.out_dir}",
    ]


def write_config(config: RunConfig, path) -> None:
    """Write the fully resolved configuration; parse_config round-trips it."""
    Path(path).write_text("\n".join(config_lines(config)) + "\n")
