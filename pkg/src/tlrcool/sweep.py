"""Parameter grids and deterministic optimization of the cooling figures.

A :class:`Model` is one fully specified operating point in natural units.
Sweeps evaluate the pipeline on a rectangular grid of at most two swept
parameters; the optimizer runs a coarse scan followed by golden-section
refinement along each free axis.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .cooling import CoolingReport, Tolerances, evaluate_point
from .params import DriveParams, InvalidParameterError, SystemParams
from .stability import Verdict
from .steady import WorkingPoint, solve_working_point

SWEEPABLE = ("delta", "delta0", "kappa", "temperature", "gamma_b", "q_b", "epsilon", "g0", "omega_a")
OBJECTIVES = ("n_bf_exact", "n_bf_approx", "n_ca")
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class NoFeasiblePointError(RuntimeError):
    """Every candidate point is unstable, has Delta <= 0 or breaks a constraint."""


@dataclass(frozen=True)
class Model:
    """Operating point: system parameters, drive amplitude and detuning.

    Exactly one of ``delta`` (effective) and ``delta0`` (bare) is used;
    ``delta`` wins when both are set.
    """

    params: SystemParams = field(default_factory=SystemParams)
    epsilon: complex = 2.5e3
    delta: float | None = 1.0
    delta0: float | None = None

    def with_values(self, **values) -> Model:
        p = {}
        m = {}
        for name, value in values.items():
            if name == "q_b":
                p["gamma_b"] = self.params.omega_b / value
            elif name in ("kappa", "temperature", "gamma_b", "g0", "omega_a"):
                p[name] = value
            elif name == "epsilon":
                m["epsilon"] = value
            elif name == "delta":
                m["delta"], m["delta0"] = value, None
            elif name == "delta0":
                m["delta0"], m["delta"] = value, None
            else:
                raise InvalidParameterError(f"unknown parameter {name!r}")
        params = self.params.replace(**p) if p else self.params
        return dataclasses.replace(self, params=params, **m)

    def drive(self) -> DriveParams:
        return DriveParams(epsilon=self.epsilon, delta0=self.delta0)

    def working_point(self) -> WorkingPoint:
        return solve_working_point(self.params, self.drive(), delta=self.delta)

    def evaluate(self, tol: Tolerances | None = None, exact: bool = True) -> CoolingReport:
        return evaluate_point(self.params, self.working_point(), tol, self.epsilon, exact=exact)


@dataclass(frozen=True)
class Axis:
    name: str
    start: float
    stop: float
    count: int = 1
    scale: str = "linear"

    def __post_init__(self):
        if self.name not in SWEEPABLE:
            raise InvalidParameterError(f"cannot sweep {self.name!r}; choose from {', '.join(SWEEPABLE)}")
        if self.count < 1:
            raise InvalidParameterError("axis count must be >= 1")
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise InvalidParameterError("axis range must be finite")
        if self.scale not in ("linear", "log"):
            raise InvalidParameterError("axis scale is 'linear' or 'log'")
        if self.scale == "log" and not (self.start > 0 and self.stop > 0):
            raise InvalidParameterError("log axis needs positive bounds")

    def values(self) -> np.ndarray:
        if self.count == 1:
            return np.array([float(self.start)])
        if self.scale == "log":
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class SweepSpec:
    axes: tuple[Axis, ...]
    base: Model = field(default_factory=Model)
    tolerances: Tolerances = field(default_factory=Tolerances)
    exact: bool = True

    def __post_init__(self):
        if not 1 <= len(self.axes) <= 2:
            raise InvalidParameterError("a sweep has one or two axes")
        names = [a.name for a in self.axes]
        if len(set(names)) != len(names):
            raise InvalidParameterError("duplicate sweep axis")

    def grid(self) -> list[tuple[float, ...]]:
        values = [a.values() for a in self.axes]
        if len(values) == 1:
            return [(float(v),) for v in values[0]]
        return [(float(u), float(v)) for u in values[0] for v in values[1]]


@dataclass(frozen=True)
class Cell:
    coords: tuple[float, ...]
    status: str  # "ok", "unstable", "marginal" or "error"
    report: CoolingReport | None = None
    error: str = ""


@dataclass(frozen=True)
class SweepTable:
    axes: tuple[str, ...]
    cells: tuple[Cell, ...]
    metadata: dict

    def column(self, name: str) -> np.ndarray:
        out = []
        for c in self.cells:
            v = getattr(c.report, name, math.nan) if c.report is not None else math.nan
            out.append(v if c.status == "ok" or name not in _N_FIELDS else math.nan)
        return np.array(out, dtype=float)


_N_FIELDS = {"n_bf_exact", "n_bf_approx", "t_eff", "var_x", "var_p", "var_x_approx", "var_p_approx"}


def _evaluate_cell(args) -> Cell:
    model, names, coords, tol, exact = args
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            point = model.with_values(**dict(zip(names, coords)))
            report = point.evaluate(tol, exact=exact)
    except Exception as exc:  # recorded in the cell, never aborts the sweep
        return Cell(coords=coords, status="error", error=f"{type(exc).__name__}: {exc}")
    status = "ok" if report.verdict == Verdict.STABLE.value else report.verdict
    return Cell(coords=coords, status=status, report=report)


def run_sweep(spec: SweepSpec, workers: int = 1) -> SweepTable:
    """Evaluate every grid point; results are ordered by grid index."""
    names = tuple(a.name for a in spec.axes)
    jobs = [(spec.base, names, coords, spec.tolerances, spec.exact) for coords in spec.grid()]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(_evaluate_cell, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        cells = [_evaluate_cell(j) for j in jobs]
    meta = {
        "tool": "tlrcool",
        "version": __version__,
        "axes": [dataclasses.asdict(a) for a in spec.axes],
        "tolerances": dataclasses.asdict(spec.tolerances),
        "exact": spec.exact,
    }
    return SweepTable(axes=names, cells=tuple(cells), metadata=meta)


@dataclass(frozen=True)
class Optimum:
    point: dict
    value: float
    report: CoolingReport
    evaluations: int


def _objective_value(report: CoolingReport, objective: str) -> float:
    return float(getattr(report, objective))


def optimize(
    base: Model,
    free: tuple[str, ...] | list[str] = ("delta",),
    bounds: dict | None = None,
    objective: str = "n_bf_exact",
    *,
    constraints: tuple[str, ...] = (),
    grid: int = 41,
    xtol: float = 1e-4,
    tolerances: Tolerances | None = None,
    max_cycles: int = 20,
) -> Optimum:
    """Minimize ``objective`` over the ``free`` parameters within ``bounds``.

    Points that are not stable, have Delta <= 0, or fail any flag named in
    ``constraints`` are infeasible.  Ties go to the lowest parameter value.
    """
    free = tuple(free)
    if not 1 <= len(free) <= 2:
        raise InvalidParameterError("optimize over one or two parameters")
    if objective not in OBJECTIVES:
        raise InvalidParameterError(f"objective must be one of {OBJECTIVES}")
    bounds = dict(bounds or {})
    for name in free:
        if name not in bounds:
            raise InvalidParameterError(f"missing bounds for {name!r}")
        lo, hi = bounds[name]
        if not lo <= hi:
            raise InvalidParameterError(f"empty bounds for {name!r}")
    if "delta" in free and bounds["delta"][0] <= 0:
        if bounds["delta"][1] <= 0:
            raise NoFeasiblePointError("the detuning range contains no Delta > 0")
        bounds["delta"] = (1e-9, bounds["delta"][1])
    tol = tolerances or Tolerances()
    exact = objective == "n_bf_exact"
    cache: dict[tuple, tuple[float, CoolingReport | None]] = {}

    def evaluate(x: tuple[float, ...]):
        key = tuple(float(v) for v in x)
        if key in cache:
            return cache[key][0]
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                report = base.with_values(**dict(zip(free, key))).evaluate(tol, exact=exact)
        except Exception:
            cache[key] = (math.inf, None)
            return math.inf
        feasible = (
            report.verdict == Verdict.STABLE.value
            and report.delta > 0
            and all(getattr(report.flags, c) for c in constraints)
        )
        value = _objective_value(report, objective) if feasible else math.inf
        if not math.isfinite(value):
            value = math.inf
        cache[key] = (value, report)
        return value

    axes = [np.linspace(bounds[n][0], bounds[n][1], grid if bounds[n][1] > bounds[n][0] else 1) for n in free]
    steps = [(a[1] - a[0]) if len(a) > 1 else 0.0 for a in axes]
    best = None
    best_val = math.inf
    for idx in np.ndindex(*[len(a) for a in axes]):
        x = tuple(float(axes[k][i]) for k, i in enumerate(idx))
        v = evaluate(x)
        if v < best_val:
            best, best_val = x, v
    if best is None:
        raise NoFeasiblePointError("no feasible point in the search region")

    x = list(best)
    for _ in range(max_cycles):
        moved = 0.0
        for k, name in enumerate(free):
            if steps[k] == 0.0:
                continue
            lo = max(bounds[name][0], x[k] - steps[k])
            hi = min(bounds[name][1], x[k] + steps[k])

            def line(t, k=k):
                y = list(x)
                y[k] = t
                return evaluate(tuple(y))

            t = _golden(line, lo, hi, xtol, x[k])
            moved = max(moved, abs(t - x[k]))
            x[k] = t
        if len(free) == 1 or moved <= xtol:
            break

    # final pick among everything evaluated, lowest coordinates on ties
    feasible = [(v, key) for key, (v, _) in cache.items() if math.isfinite(v)]
    value, key = min(feasible)
    return Optimum(point=dict(zip(free, key)), value=value, report=cache[key][1], evaluations=len(cache))


def _golden(f, lo, hi, xtol, start):
    """Golden-section search on [lo, hi]; keeps the left bracket on ties."""
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > xtol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    candidates = [(f(start), start), (fc, c), (fd, d)]
    return min(candidates)[1]
