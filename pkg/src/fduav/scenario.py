"""Scenario data model, unit conversion and the scenario file parser.

Everything downstream works in linear SI units (W, m, s, Hz). Decibel
quantities only exist at the configuration boundary handled here.
"""

from __future__ import annotations

import math
import re
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Union

import numpy as np

__all__ = [
    "ScenarioError",
    "EnergyParams",
    "Scenario",
    "DerivedConstants",
    "db_to_linear",
    "linear_to_db",
    "dbm_to_watts",
    "watts_to_dbm",
    "derive",
    "load_scenario",
    "read_scenario",
    "default_scenario",
]


class ScenarioError(ValueError):
    """Raised for unparseable or physically invalid scenarios."""


def _finite(x: float, what: str) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise ScenarioError(f"{what}: non-finite value {x!r}")
    return x


def db_to_linear(x: float) -> float:
    return 10.0 ** (_finite(x, "db_to_linear") / 10.0)


def linear_to_db(x: float) -> float:
    x = _finite(x, "linear_to_db")
    if x <= 0.0:
        raise ScenarioError(f"linear_to_db: non-positive value {x!r}")
    return 10.0 * math.log10(x)


def dbm_to_watts(x: float) -> float:
    return 10.0 ** (_finite(x, "dbm_to_watts") / 10.0) * 1e-3


def watts_to_dbm(p: float) -> float:
    """dBm of a power in watts; zero power maps to ``-inf``."""
    p = float(p)
    if p <= 0.0:
        return -math.inf
    return 10.0 * math.log10(p * 1e3)


@dataclass(frozen=True)
class EnergyParams:
    """Rotary-wing propulsion constants.

    The defaults are the commonly used example rotorcraft profile from the
    rotary-wing energy-model literature; they are an editable profile, not
    fitted values.
    """

    p0_blade: float = 79.86
    pi_induced: float = 88.63
    v0_rotor: float = 4.03
    u_tip: float = 120.0
    drag_ratio: float = 0.6
    solidity: float = 0.05
    disc_area: float = 0.503
    air_density: float = 1.225

    def __post_init__(self) -> None:
        for name, value in asdict(self).items():
            if not (math.isfinite(value) and value > 0.0):
                raise ScenarioError(f"energy parameter {name} must be > 0, got {value!r}")

    @property
    def hover_power(self) -> float:
        return self.p0_blade + self.pi_induced


@dataclass(frozen=True)
class Scenario:
    """A complete mission description in SI units.

    The ground source sits at the origin. ``q0``/``qf`` are the fixed
    horizontal start and end points of the UAV, ``eve_pos`` the
    eavesdropper location. Powers are in watts, ``rho0`` is the linear
    channel gain at 1 m.
    """

    eve_pos: tuple = (200.0, 0.0)
    altitude: float = 100.0
    period: float = 40.0
    slot_len: float = 0.5
    n_slots: int = 80
    q0: tuple = (50.0, -800.0)
    qf: tuple = (50.0, 800.0)
    v_max: float = 40.0
    rho0: float = 1e-6
    sigma2: float = 1e-14
    sigma_rsi2: float = 1e-11
    kappa: float = 3.0
    pbar_s: float = 0.1
    pmax_s: float = 10.0 ** 2.6 * 1e-3
    pbar_u: float = 0.01
    pmax_u: float = 10.0 ** 1.6 * 1e-3
    bandwidth: float = 1e6
    energy: EnergyParams = field(default_factory=EnergyParams)
    tol: float = 1e-4

    def __post_init__(self) -> None:
        for name in ("eve_pos", "q0", "qf"):
            v = tuple(float(c) for c in getattr(self, name))
            if len(v) != 2 or not all(math.isfinite(c) for c in v):
                raise ScenarioError(f"{name} must be a finite 2-vector")
            object.__setattr__(self, name, v)
        if int(self.n_slots) != self.n_slots or self.n_slots < 1:
            raise ScenarioError(f"n_slots must be a positive integer, got {self.n_slots!r}")
        object.__setattr__(self, "n_slots", int(self.n_slots))
        positive = ("altitude", "period", "slot_len", "v_max", "rho0", "sigma2",
                    "pbar_s", "pmax_s", "pbar_u", "pmax_u", "bandwidth", "tol")
        for name in positive:
            value = float(getattr(self, name))
            if not (math.isfinite(value) and value > 0.0):
                raise ScenarioError(f"{name} must be strictly positive, got {value!r}")
        if not (math.isfinite(self.sigma_rsi2) and self.sigma_rsi2 >= 0.0):
            raise ScenarioError(f"sigma_rsi2 must be >= 0, got {self.sigma_rsi2!r}")
        if not self.kappa >= 2.0:
            raise ScenarioError(f"kappa must be >= 2, got {self.kappa!r}")
        if not math.isclose(self.period, self.slot_len * self.n_slots, rel_tol=1e-12):
            raise ScenarioError(
                f"period T={self.period} != slot_len*n_slots={self.slot_len * self.n_slots}")
        if self.pbar_s > self.pmax_s:
            raise ScenarioError("pbar_s must not exceed pmax_s")
        if self.pbar_u > self.pmax_u:
            raise ScenarioError("pbar_u must not exceed pmax_u")
        if math.hypot(*self.eve_pos) < 1.0:
            raise ScenarioError("eavesdropper must be at least 1 m from the source (||w_E|| >= 1)")
        dist = math.dist(self.q0, self.qf)
        if dist > self.v_max * self.period * (1.0 + 1e-12):
            raise ScenarioError(
                f"mission infeasible: ||qf - q0|| = {dist:.6g} m exceeds "
                f"v_max*T = {self.v_max * self.period:.6g} m")

    @property
    def source_pos(self) -> np.ndarray:
        return np.zeros(2)

    @property
    def w_e(self) -> np.ndarray:
        return np.asarray(self.eve_pos, dtype=float)

    @property
    def start(self) -> np.ndarray:
        return np.asarray(self.q0, dtype=float)

    @property
    def end(self) -> np.ndarray:
        return np.asarray(self.qf, dtype=float)

    @property
    def omega(self) -> float:
        return self.v_max * self.slot_len

    def replace(self, **changes) -> "Scenario":
        return replace(self, **changes)

    def with_period(self, period: float, slot_len: float | None = None) -> "Scenario":
        """Same scenario with a new flight period (and optionally slot length)."""
        dt = self.slot_len if slot_len is None else float(slot_len)
        n = period / dt
        if abs(n - round(n)) > 1e-9 * max(1.0, n) or round(n) < 1:
            raise ScenarioError(f"period {period} s is not a multiple of slot_len {dt} s")
        return replace(self, period=float(period), slot_len=dt, n_slots=int(round(n)))

    def with_lil_dbm(self, lil_dbm: float) -> "Scenario":
        return replace(self, sigma_rsi2=dbm_to_watts(lil_dbm))

    def as_dict(self) -> dict:
        d = asdict(self)
        d["eve_pos"] = list(self.eve_pos)
        d["q0"] = list(self.q0)
        d["qf"] = list(self.qf)
        return d


@dataclass(frozen=True)
class DerivedConstants:
    gamma0: float
    beta0: float
    omega: float


def derive(s: Scenario) -> DerivedConstants:
    """Reference SNR, LIL-to-noise ratio and per-slot travel budget."""
    return DerivedConstants(
        gamma0=s.rho0 / s.sigma2,
        beta0=s.sigma_rsi2 / s.sigma2,
        omega=s.v_max * s.slot_len,
    )


def default_scenario() -> Scenario:
    """The reference mission shipped as ``data/reference.cfg``."""
    return read_scenario(Path(__file__).with_name("data") / "reference.cfg")


# --- scenario file parsing -------------------------------------------------

_LENGTH = {"m": 1.0, "km": 1e3}
_TIME = {"s": 1.0, "ms": 1e-3, "min": 60.0}
_SPEED = {"m/s": 1.0, "km/h": 1.0 / 3.6}
_FREQ = {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9}
_AREA = {"m^2": 1.0, "m2": 1.0}
_DENSITY = {"kg/m^3": 1.0, "kg/m3": 1.0}

# key -> (field, kind)
_KEYS = {
    "eve_pos": ("eve_pos", "vec"), "w_e": ("eve_pos", "vec"),
    "h": ("altitude", "length"), "altitude": ("altitude", "length"),
    "t": ("period", "time"), "period": ("period", "time"),
    "dt": ("slot_len", "time"), "delta_t": ("slot_len", "time"),
    "slot_len": ("slot_len", "time"),
    "n": ("n_slots", "int"), "n_slots": ("n_slots", "int"),
    "q0": ("q0", "vec"), "qf": ("qf", "vec"),
    "v_max": ("v_max", "speed"), "vmax": ("v_max", "speed"),
    "rho0": ("rho0", "gain"),
    "sigma2": ("sigma2", "power"), "noise": ("sigma2", "power"),
    "sigma_rsi2": ("sigma_rsi2", "power"), "lil": ("sigma_rsi2", "power"),
    "kappa": ("kappa", "scalar"),
    "pbar_s": ("pbar_s", "power"), "pmax_s": ("pmax_s", "power"),
    "pbar_u": ("pbar_u", "power"), "pmax_u": ("pmax_u", "power"),
    "b": ("bandwidth", "freq"), "bandwidth": ("bandwidth", "freq"),
    "eps": ("tol", "scalar"), "tol": ("tol", "scalar"),
    "p0": ("p0_blade", "watts"), "p0_blade": ("p0_blade", "watts"),
    "pi": ("pi_induced", "watts"), "pi_induced": ("pi_induced", "watts"),
    "v0": ("v0_rotor", "speed"), "v0_rotor": ("v0_rotor", "speed"),
    "u_tip": ("u_tip", "speed"),
    "d0": ("drag_ratio", "scalar"), "drag_ratio": ("drag_ratio", "scalar"),
    "solidity": ("solidity", "scalar"),
    "disc_area": ("disc_area", "area"), "a": ("disc_area", "area"),
    "air_density": ("air_density", "density"), "rho": ("air_density", "density"),
}

_ENERGY_FIELDS = {f for f in EnergyParams.__dataclass_fields__}

_LINE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*?)\s*$")
_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_VALUE = re.compile(rf"^({_NUM}(?:\s*,\s*{_NUM})*)\s*(\S*)$")


def _convert(kind: str, nums: list, unit: str, where: str):
    u = unit.lower()

    def scale(table):
        if u not in table:
            raise ScenarioError(f"{where}: unit {unit!r} not valid here "
                                f"(expected one of {sorted(table)})")
        return table[u]

    if kind == "vec":
        if len(nums) != 2:
            raise ScenarioError(f"{where}: expected a 2-vector 'x,y'")
        k = scale(_LENGTH)
        return (nums[0] * k, nums[1] * k)
    if len(nums) != 1:
        raise ScenarioError(f"{where}: expected a scalar")
    x = nums[0]
    if kind in ("scalar", "int"):
        if u:
            raise ScenarioError(f"{where}: dimensionless key takes no unit, got {unit!r}")
        if kind == "int":
            if x != int(x):
                raise ScenarioError(f"{where}: expected an integer")
            return int(x)
        return x
    if kind == "length":
        return x * scale(_LENGTH)
    if kind == "time":
        return x * scale(_TIME)
    if kind == "speed":
        return x * scale(_SPEED)
    if kind == "freq":
        return x * scale(_FREQ)
    if kind == "area":
        return x * scale(_AREA)
    if kind == "density":
        return x * scale(_DENSITY)
    if kind == "gain":
        if u == "db":
            return db_to_linear(x)
        if u in ("", "lin"):
            return x
        raise ScenarioError(f"{where}: gain takes 'dB' or 'lin', got {unit!r}")
    if kind in ("power", "watts"):
        if u == "dbm":
            return dbm_to_watts(x)
        if u == "dbw":
            return db_to_linear(x)
        if u == "w":
            return x
        if u == "mw":
            return x * 1e-3
        raise ScenarioError(f"{where}: power takes dBm, dBW, W or mW, got {unit!r}")
    raise AssertionError(kind)


def load_scenario(text: str, source: str = "<scenario>") -> Scenario:
    """Parse a scenario document and return a validated :class:`Scenario`.

    The format is one ``key = value [unit]`` per line, ``#`` starts a
    comment, keys are case-insensitive and vectors are written ``x,y``.
    Exactly two of ``t``, ``dt``, ``n`` must be present; the third is
    derived (all three may be given if they agree).
    """
    values: dict = {}
    energy: dict = {}
    seen: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}: {raw.strip()!r}"
        m = _LINE.match(line)
        if not m:
            raise ScenarioError(f"{where}: expected 'key = value [unit]'")
        key = m.group(1).lower()
        if key not in _KEYS:
            raise ScenarioError(f"{where}: unknown key {key!r}")
        fname, kind = _KEYS[key]
        if fname in seen:
            raise ScenarioError(f"{where}: {fname} already set on line {seen[fname]}")
        seen[fname] = lineno
        vm = _VALUE.match(m.group(2))
        if not vm:
            raise ScenarioError(f"{where}: cannot parse value {m.group(2)!r}")
        nums = [float(t) for t in vm.group(1).split(",")]
        val = _convert(kind, nums, vm.group(2), where)
        (energy if fname in _ENERGY_FIELDS else values)[fname] = val

    timing = {k: values.pop(k) for k in ("period", "slot_len", "n_slots") if k in values}
    if len(timing) < 2:
        raise ScenarioError(f"{source}: give at least two of t, dt, n (got {sorted(timing)})")
    if "n_slots" not in timing:
        n = timing["period"] / timing["slot_len"]
        if abs(n - round(n)) > 1e-9 * max(1.0, n) or round(n) < 1:
            raise ScenarioError(
                f"{source}: T={timing['period']} is not a positive multiple of dt={timing['slot_len']}")
        timing["n_slots"] = int(round(n))
    elif "period" not in timing:
        timing["period"] = timing["slot_len"] * timing["n_slots"]
    elif "slot_len" not in timing:
        timing["slot_len"] = timing["period"] / timing["n_slots"]
    elif not math.isclose(timing["period"], timing["slot_len"] * timing["n_slots"], rel_tol=1e-12):
        raise ScenarioError(f"{source}: T, dt and n are inconsistent (T must equal dt*n)")
    values.update(timing)
    return Scenario(energy=EnergyParams(**energy), **values)


def read_scenario(path: Union[str, Path]) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file {path}: {exc}") from exc
    return load_scenario(text, source=str(path))
