"""Run configuration: TOML sections with unit-aware values.

Values are numbers or strings.  Strings may carry a unit suffix ("4MHz",
"10mK", "1.5e-13kg", "1fF") or be arithmetic over the names ``omega_b``,
``m``, ``hbar``, ``k_B``, ``pi`` and ``sqrt`` ("0.1*omega_b",
"3e-5*omega_b*sqrt(m*omega_b/hbar)").  Frequency suffixes (Hz, kHz, MHz,
GHz) denote angular rates in s^-1.

The ``system`` block declares ``units = "natural"`` or ``"si"``; the
``drive`` and ``bath`` blocks follow it.  Suffixed SI values inside a
natural block are rejected.  The ``hardware`` block is always SI.
"""

from __future__ import annotations

import ast
import math
import operator
import re
from dataclasses import dataclass, field

import tomli

from .cooling import Tolerances
from .params import (
    HBAR_SI,
    KB_SI,
    HardwareParams,
    SystemParams,
    derive_coupling,
    drive_from_power,
    to_natural_units,
    to_si_units,
)
from .sweep import OBJECTIVES, Axis, Model


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


_PREFIX = {"a": 1e-18, "f": 1e-15, "p": 1e-12, "n": 1e-9, "u": 1e-6, "µ": 1e-6, "m": 1e-3, "": 1.0, "k": 1e3, "M": 1e6, "G": 1e9, "T": 1e12}
_BASE = {"Hz": "rate", "K": "temperature", "g": "mass", "F": "capacitance", "H": "inductance", "m": "length", "W": "power", "s": "time"}


def _unit_table():
    table = {}
    for base, dim in _BASE.items():
        for pre, f in _PREFIX.items():
            factor = f * (1e-3 if base == "g" else 1.0)
            table[pre + base] = (factor, dim)
    return table


UNITS = _unit_table()
_NUMBER_UNIT = re.compile(
    r"(?<![A-Za-z_\d.])(\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)(?![eE][+-]?\d)\s*([A-Za-zµ]+)(?![\w(])"
)

EXPECTED_DIM = {
    "m": "mass",
    "omega_b": "rate",
    "gamma_b": "rate",
    "omega_a": "rate",
    "kappa": "rate",
    "temperature": "temperature",
    "cavity_temperature": "temperature",
    "epsilon": "rate",
    "delta": "rate",
    "delta0": "rate",
    "cg0": "capacitance",
    "ca": "capacitance",
    "la": "inductance",
    "d": "length",
    "power": "power",
}

SECTIONS = {
    "system": {"units", "m", "omega_b", "gamma_b", "q_b", "omega_a", "kappa", "g0", "temperature", "cavity_temperature"},
    "drive": {"epsilon", "delta", "delta0", "power"},
    "hardware": {"cg0", "d", "ca", "la", "power"},
    "bath": {"temperature", "cavity_temperature"},
    "tolerances": {"rel_tol", "max_evals", "uv_cutoff", "stability_margin", "much_greater", "much_less", "white_thermal"},
    "sweep": {"axes", "exact"},
    "optimize": {"free", "bounds", "objective", "constraints", "grid", "xtol"},
    "spectrum": {"omega_min", "omega_max", "points"},
    "output": {"path", "format", "workers"},
}

# variance-vs-detuning reference set, natural units
DEFAULTS = {
    "system": {
        "units": "natural",
        "m": 1.0,
        "omega_b": 1.0,
        "gamma_b": 2.5e-5,
        "omega_a": 2.0e4,
        "kappa": 1.0,
        "g0": 3.0e-5,
        "temperature": 6.0e3,
    },
    "drive": {"epsilon": 2.5e3, "delta": 1.0},
    "tolerances": {},
    "spectrum": {"omega_min": -3.0, "omega_max": 3.0, "points": 601},
    "output": {"format": "json", "workers": 1},
}

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}
_FUNCS = {"sqrt": math.sqrt, "exp": math.exp, "log": math.log}


def _eval_node(node, names):
    if isinstance(node, ast.Expression):
        return _eval_node(node.body, names)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return float(node.value)
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_node(node.left, names), _eval_node(node.right, names))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
        return _UNARY[type(node.op)](_eval_node(node.operand, names))
    if isinstance(node, ast.Name):
        if node.id not in names:
            raise ConfigError(f"unknown name {node.id!r} in expression")
        return names[node.id]
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS and len(node.args) == 1:
        return _FUNCS[node.func.id](_eval_node(node.args[0], names))
    raise ConfigError("unsupported expression")


def parse_quantity(value, key: str = "", names: dict | None = None, allow_units: bool = True) -> float:
    """Resolve a config value to a float in the block's unit system."""
    if isinstance(value, bool):
        raise ConfigError(f"{key}: expected a number")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(f"{key}: expected a number or expression")
    text = value.strip()
    units_seen = []

    def repl(match):
        number, suffix = match.group(1), match.group(2)
        if suffix not in UNITS:
            raise ConfigError(f"{key}: unknown unit {suffix!r}")
        factor, dim = UNITS[suffix]
        units_seen.append(dim)
        return f"({number}*{factor!r})"

    expr = _NUMBER_UNIT.sub(repl, text)
    if units_seen and not allow_units:
        raise ConfigError(f"{key}: SI unit suffix in a natural-unit block (units must not be mixed)")
    if len(units_seen) == 1 and _NUMBER_UNIT.fullmatch(text) and key in EXPECTED_DIM:
        if units_seen[0] != EXPECTED_DIM[key]:
            raise ConfigError(f"{key}: expected a {EXPECTED_DIM[key]}, got a {units_seen[0]}")
    try:
        tree = ast.parse(expr, mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"{key}: cannot parse {value!r}") from exc
    result = _eval_node(tree, dict(names or {}, pi=math.pi))
    if not math.isfinite(result):
        raise ConfigError(f"{key}: value is not finite")
    return result


@dataclass
class RunConfig:
    model: Model
    tolerances: Tolerances
    raw: dict
    axes: tuple[Axis, ...] = ()
    sweep_exact: bool = True
    optimize: dict = field(default_factory=dict)
    spectrum: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)

    def resolved(self) -> dict:
        """Full post-default configuration in natural units, for embedding.

        The result is itself a valid configuration."""
        p = self.model.params
        out = {
            "system": {
                "units": "natural",
                "gamma_b": p.gamma_b,
                "omega_a": p.omega_a,
                "kappa": p.kappa,
                "g0": p.g0,
                "temperature": p.temperature,
            },
            "drive": {"epsilon": _jsonable(self.model.epsilon)},
            "tolerances": {
                "rel_tol": self.tolerances.rel_tol,
                "max_evals": self.tolerances.max_evals,
                "uv_cutoff": self.tolerances.uv_cutoff,
                "stability_margin": self.tolerances.stability_margin,
                "much_greater": self.tolerances.much_greater,
                "much_less": self.tolerances.much_less,
                "white_thermal": self.tolerances.white_thermal,
            },
        }
        if p.cavity_temperature is not None:
            out["system"]["cavity_temperature"] = p.cavity_temperature
        if self.model.delta is not None:
            out["drive"]["delta"] = self.model.delta
        else:
            out["drive"]["delta0"] = self.model.delta0
        if self.axes:
            out["sweep"] = {"axes": [a.__dict__.copy() for a in self.axes], "exact": self.sweep_exact}
        if self.optimize:
            out["optimize"] = self.optimize
        return out

    def si_echo(self) -> dict | None:
        """The model parameters converted back to SI, when the input was SI."""
        p = self.model.params
        if p.reference is None:
            return None
        m, wb = p.reference
        si = to_si_units(p)
        out = {
            "m": si.m,
            "omega_b": si.omega_b,
            "gamma_b": si.gamma_b,
            "omega_a": si.omega_a,
            "kappa": si.kappa,
            "g0": si.g0,
            "temperature": si.temperature,
            "epsilon": abs(complex(self.model.epsilon)) * wb,
        }
        if self.model.delta is not None:
            out["delta"] = self.model.delta * wb
        else:
            out["delta0"] = self.model.delta0 * wb
        return out


def _jsonable(z):
    z = complex(z)
    return z.real if z.imag == 0 else [z.real, z.imag]


def _merge(base: dict, over: dict) -> dict:
    out = {k: dict(v) if isinstance(v, dict) else v for k, v in base.items()}
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def validate_keys(data: dict) -> None:
    for section, body in data.items():
        if section not in SECTIONS:
            raise ConfigError(f"unknown section {section!r}")
        if not isinstance(body, dict):
            raise ConfigError(f"section {section!r} must be a table")
        for key in body:
            if key not in SECTIONS[section]:
                raise ConfigError(f"unknown key {section}.{key}")


def apply_overrides(data: dict, overrides) -> dict:
    """Apply ``section.key=value`` overrides; values parse as TOML scalars
    when possible, otherwise stay strings."""
    data = _merge({}, data)
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        path, text = item.split("=", 1)
        parts = path.strip().split(".")
        if len(parts) != 2:
            raise ConfigError(f"override key {path!r} must be section.key")
        try:
            value = tomli.loads(f"v = {text.strip()}")["v"]
        except tomli.TOMLDecodeError:
            value = text.strip()
        section = data.setdefault(parts[0], {})
        section[parts[1]] = value
        # a prescribed detuning replaces the other kind
        if parts[0] == "drive" and parts[1] in ("delta", "delta0"):
            section.pop("delta0" if parts[1] == "delta" else "delta", None)
    return data


def load(path=None, overrides=(), text: str | None = None, extra: dict | None = None) -> RunConfig:
    """Read, validate and resolve a configuration.

    ``extra`` is merged over the file before the ``section.key=value``
    ``overrides`` are applied."""
    user = {}
    try:
        if text is not None:
            user = tomli.loads(text)
        elif path is not None:
            with open(path, "rb") as fh:
                user = tomli.load(fh)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML: {exc}") from exc
    validate_keys(user)
    if extra:
        user = _merge(user, extra)
    user = apply_overrides(user, overrides)
    validate_keys(user)
    return build(user)


def build(user: dict) -> RunConfig:
    units = user.get("system", {}).get("units", "natural")
    if units not in ("natural", "si"):
        raise ConfigError("system.units must be 'natural' or 'si'")
    if units == "si":
        base = {k: v for k, v in DEFAULTS.items() if k not in ("system", "drive")}
        required = {"m", "omega_b"}
        missing = required - set(user.get("system", {}))
        if missing:
            raise ConfigError(f"SI system block needs {', '.join(sorted(missing))}")
    else:
        base = DEFAULTS
    data = _merge(base, user)
    sysb = dict(data.get("system", {}))
    drive = dict(data.get("drive", {}))
    bath = data.get("bath", {})
    if "delta" in user.get("drive", {}) and "delta0" in user.get("drive", {}):
        raise ConfigError("give drive.delta or drive.delta0, not both")
    if "delta0" in user.get("drive", {}):
        drive.pop("delta", None)
    if "gamma_b" in sysb and "q_b" in user.get("system", {}):
        if "gamma_b" in user.get("system", {}):
            raise ConfigError("give system.gamma_b or system.q_b, not both")
        sysb.pop("gamma_b")

    si = units == "si"
    names = {"hbar": HBAR_SI if si else 1.0, "k_B": KB_SI if si else 1.0}

    def q(block, key, value):
        return parse_quantity(value, f"{block}.{key}", names, allow_units=si)

    m = q("system", "m", sysb.get("m", 1.0))
    names["m"] = m
    omega_b = q("system", "omega_b", sysb.get("omega_b", 1.0))
    names["omega_b"] = omega_b
    if not si and (m != 1.0 or omega_b != 1.0):
        raise ConfigError("natural units fix m = omega_b = 1")

    hw = None
    if "hardware" in data:
        h = data["hardware"]
        try:
            hw = HardwareParams(**{k: parse_quantity(v, f"hardware.{k}", names) for k, v in h.items()})
        except TypeError as exc:
            raise ConfigError(f"hardware block incomplete: {exc}") from exc
        if not si:
            raise ConfigError("the hardware block requires an SI system block")

    values = {}
    for key in ("gamma_b", "omega_a", "kappa", "g0", "temperature", "cavity_temperature"):
        if key in sysb:
            values[key] = q("system", key, sysb[key])
    for key in ("temperature", "cavity_temperature"):
        if key in bath:
            values[key] = q("bath", key, bath[key])
    if "q_b" in sysb:
        values["gamma_b"] = omega_b / q("system", "q_b", sysb["q_b"])
    if hw is not None:
        values.setdefault("g0", derive_coupling(hw))
        values.setdefault("omega_a", hw.omega_a)
    for key in ("gamma_b", "omega_a", "kappa", "g0", "temperature"):
        if key not in values:
            raise ConfigError(f"system.{key} is required")

    if "epsilon" in drive:
        epsilon = q("drive", "epsilon", drive["epsilon"])
    elif "power" in drive or (hw is not None and hw.power > 0):
        if hw is None:
            raise ConfigError("drive.power needs a hardware block for omega_a'")
        power = q("drive", "power", drive["power"]) if "power" in drive else hw.power
        epsilon = drive_from_power(power, values["kappa"], hw.omega_a_bare)
    else:
        raise ConfigError("drive.epsilon (or a drive power) is required")
    delta = q("drive", "delta", drive["delta"]) if "delta" in drive else None
    delta0 = q("drive", "delta0", drive["delta0"]) if "delta0" in drive else None
    if delta is None and delta0 is None:
        raise ConfigError("drive.delta or drive.delta0 is required")

    try:
        params = SystemParams(m=m, omega_b=omega_b, units=units, **values)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if si:
        params = to_natural_units(params)
        epsilon /= omega_b
        delta = None if delta is None else delta / omega_b
        delta0 = None if delta0 is None else delta0 / omega_b
    model = Model(params=params, epsilon=epsilon, delta=delta, delta0=delta0)

    tol_block = data.get("tolerances", {})
    tol_kwargs = {}
    for key, value in tol_block.items():
        if key == "white_thermal":
            tol_kwargs[key] = bool(value)
        elif key == "max_evals":
            tol_kwargs[key] = int(value)
        else:
            tol_kwargs[key] = parse_quantity(value, f"tolerances.{key}")
    tolerances = Tolerances(**tol_kwargs)

    axes = ()
    sweep = data.get("sweep", {})
    if "axes" in sweep:
        try:
            axes = tuple(_axis(a, names, si, omega_b) for a in sweep["axes"])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"sweep.axes: {exc}") from exc

    opt = dict(data.get("optimize", {}))
    if opt:
        opt.setdefault("free", ["delta"])
        opt.setdefault("objective", "n_bf_exact")
        if opt["objective"] not in OBJECTIVES:
            raise ConfigError(f"optimize.objective must be one of {OBJECTIVES}")
        bounds = {}
        for name, pair in opt.get("bounds", {}).items():
            lo, hi = (_natural(name, parse_quantity(v, f"optimize.bounds.{name}", names, si), si, omega_b) for v in pair)
            bounds[name] = [lo, hi]
        opt["bounds"] = bounds

    return RunConfig(
        model=model,
        tolerances=tolerances,
        raw=data,
        axes=axes,
        sweep_exact=bool(sweep.get("exact", True)),
        optimize=opt,
        spectrum=dict(data.get("spectrum", {})),
        output=dict(data.get("output", {})),
    )


_RATE_NAMES = {"delta", "delta0", "kappa", "gamma_b", "epsilon", "omega_a"}


def _natural(name, value, si, omega_b, m=None):
    """Convert a swept or bounded SI quantity to natural units."""
    if not si:
        return value
    if name in _RATE_NAMES:
        return value / omega_b
    if name == "temperature":
        return KB_SI * value / (HBAR_SI * omega_b)
    if name == "g0":
        raise ConfigError("sweeping g0 requires a natural-unit system block")
    return value


def _axis(spec: dict, names, si, omega_b) -> Axis:
    extra = set(spec) - {"name", "start", "stop", "count", "scale"}
    if extra:
        raise ConfigError(f"unknown key sweep.axes.{sorted(extra)[0]}")
    name = spec["name"]
    start = _natural(name, parse_quantity(spec["start"], f"sweep.{name}.start", names, si), si, omega_b)
    stop = _natural(name, parse_quantity(spec.get("stop", spec["start"]), f"sweep.{name}.stop", names, si), si, omega_b)
    return Axis(name=name, start=start, stop=stop, count=int(spec.get("count", 1)), scale=spec.get("scale", "linear"))
