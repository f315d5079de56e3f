"""Structural and numeric plant models.

A structural model stores the sparsity patterns ``[A]``, ``[B]``, ``[C]`` of
the plant ``x(k+1) = A x(k) + B u(k)``, ``y(k) = C x(k)``.  Every actuator
drives exactly one state and every sensor measures exactly one state, so
``[B]`` and ``[C]`` are stored as target-state lists.  Sensors are ordered
with the unprotected ones first and the protected ones last.

Indices are 0-based everywhere in code and on disk; human-readable labels
(``u1``, ``x1``, ``y1``) are 1-based.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple

import numpy as np


class ModelError(ValueError):
    """Raised when a model file or model object violates a structural invariant."""


class ParseError(ModelError):
    """An input file is not well-formed JSON."""


class _Infinity(enum.Enum):
    """Index value of an actuator that cannot be attacked undetectably."""

    INF = "inf"

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True

    def __add__(self, other):
        return self

    __radd__ = __add__

    def __sub__(self, other):
        if other is self:
            raise ArithmeticError("inf - inf is undefined")
        return self

    def __str__(self):
        return "inf"

    def __repr__(self):
        return "INF"


INF = _Infinity.INF


def value_to_json(value):
    return "inf" if value is INF else int(value)


class Component(NamedTuple):
    """An attackable component: ``kind`` is ``"u"`` (actuator) or ``"y"`` (sensor)."""

    kind: str
    index: int

    def __str__(self):
        return f"{self.kind}{self.index + 1}"


def u(index: int) -> Component:
    return Component("u", index)


def y(index: int) -> Component:
    return Component("y", index)


@dataclass(frozen=True)
class ComponentSet:
    """Attacked actuators and sensors, by 0-based id."""

    actuators: frozenset = frozenset()
    sensors: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "actuators", frozenset(int(i) for i in self.actuators))
        object.__setattr__(self, "sensors", frozenset(int(i) for i in self.sensors))

    @classmethod
    def of(cls, components: Iterable[Component]) -> "ComponentSet":
        comps = list(components)
        return cls(
            frozenset(c.index for c in comps if c.kind == "u"),
            frozenset(c.index for c in comps if c.kind == "y"),
        )

    @classmethod
    def from_columns(cls, columns: Iterable[int], n_u: int) -> "ComponentSet":
        cols = list(columns)
        return cls(
            frozenset(c for c in cols if c < n_u),
            frozenset(c - n_u for c in cols if c >= n_u),
        )

    def components(self) -> list[Component]:
        return [u(i) for i in sorted(self.actuators)] + [y(l) for l in sorted(self.sensors)]

    def columns(self, n_u: int) -> list[int]:
        """Column indices into the attack vector (actuators first, then sensors)."""
        return sorted(self.actuators) + [n_u + l for l in sorted(self.sensors)]

    def __len__(self):
        return len(self.actuators) + len(self.sensors)

    def __contains__(self, comp):
        if comp.kind == "u":
            return comp.index in self.actuators
        return comp.index in self.sensors

    def __or__(self, other: "ComponentSet") -> "ComponentSet":
        return ComponentSet(self.actuators | other.actuators, self.sensors | other.sensors)

    def without(self, comp: Component) -> "ComponentSet":
        if comp.kind == "u":
            return ComponentSet(self.actuators - {comp.index}, self.sensors)
        return ComponentSet(self.actuators, self.sensors - {comp.index})

    def label(self) -> str:
        return "{" + ",".join(str(c) for c in self.components()) + "}"

    def to_json(self) -> dict:
        return {"actuators": sorted(self.actuators), "sensors": sorted(self.sensors)}

    def check(self, model: "StructuralModel", attack_set: bool = True) -> None:
        for i in self.actuators:
            if not 0 <= i < model.n_u:
                raise ModelError(f"actuator id {i} out of range")
        limit = model.n_y if attack_set else model.n_sensors
        for l in self.sensors:
            if not 0 <= l < limit:
                if attack_set and l < model.n_sensors:
                    raise ModelError(f"sensor y{l + 1} is protected and cannot be attacked")
                raise ModelError(f"sensor id {l} out of range")


@dataclass(frozen=True)
class StructuralModel:
    n_x: int
    b_target: tuple
    c_target: tuple = ()
    protected: tuple = ()
    a_pattern: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "b_target", tuple(int(t) for t in self.b_target))
        object.__setattr__(self, "c_target", tuple(int(t) for t in self.c_target))
        prot = tuple(bool(p) for p in self.protected) or (False,) * len(self.c_target)
        object.__setattr__(self, "protected", prot)
        object.__setattr__(
            self, "a_pattern", frozenset((int(i), int(j)) for i, j in self.a_pattern)
        )
        self.validate()

    def validate(self) -> None:
        if self.n_x < 1:
            raise ModelError("n_x must be positive")
        for t in self.b_target + self.c_target:
            if not 0 <= t < self.n_x:
                raise ModelError(f"target state {t} out of range")
        if len(set(self.b_target)) != len(self.b_target):
            raise ModelError("B not full column rank: two actuators share a target state")
        if len(self.protected) != len(self.c_target):
            raise ModelError("protected flags must match the sensor list")
        seen_protected = False
        for p in self.protected:
            if seen_protected and not p:
                raise ModelError("protected sensors must follow all unprotected sensors")
            seen_protected = seen_protected or p
        for i, j in self.a_pattern:
            if not (0 <= i < self.n_x and 0 <= j < self.n_x):
                raise ModelError(f"a_pattern entry {(i, j)} out of range")

    @property
    def n_u(self) -> int:
        return len(self.b_target)

    @property
    def n_sensors(self) -> int:
        return len(self.c_target)

    @property
    def n_e(self) -> int:
        return sum(self.protected)

    @property
    def n_y(self) -> int:
        return self.n_sensors - self.n_e

    def a_matrix(self) -> np.ndarray:
        a = np.zeros((self.n_x, self.n_x), dtype=int)
        for i, j in self.a_pattern:
            a[i, j] = 1
        return a

    def b_matrix(self) -> np.ndarray:
        b = np.zeros((self.n_x, self.n_u), dtype=int)
        for j, t in enumerate(self.b_target):
            b[t, j] = 1
        return b

    def c_matrix(self) -> np.ndarray:
        c = np.zeros((self.n_sensors, self.n_x), dtype=int)
        for l, t in enumerate(self.c_target):
            c[l, t] = 1
        return c

    def actuator_at(self, state: int):
        """Id of the actuator driving ``state``, or None."""
        try:
            return self.b_target.index(state)
        except ValueError:
            return None

    def sensors_on(self, state: int) -> list[int]:
        return [l for l, t in enumerate(self.c_target) if t == state]

    @classmethod
    def from_matrices(cls, a, b, c, n_e: int = 0) -> "StructuralModel":
        """Build from 0/1 (or numeric) matrices; nonzeros are structural ones."""
        a = np.atleast_2d(np.asarray(a))
        b = np.asarray(b).reshape(a.shape[0], -1)
        c = np.asarray(c).reshape(-1, a.shape[0]) if np.size(c) else np.zeros((0, a.shape[0]))
        b_target = []
        for j in range(b.shape[1]):
            rows = np.flatnonzero(b[:, j])
            if len(rows) != 1:
                raise ModelError(f"actuator u{j + 1} must drive exactly one state")
            b_target.append(int(rows[0]))
        c_target = []
        for l in range(c.shape[0]):
            cols = np.flatnonzero(c[l])
            if len(cols) != 1:
                raise ModelError(f"sensor y{l + 1} must measure exactly one state")
            c_target.append(int(cols[0]))
        n_s = len(c_target)
        protected = [l >= n_s - n_e for l in range(n_s)]
        pattern = {(int(i), int(j)) for i, j in zip(*np.nonzero(a))}
        return cls(a.shape[0], tuple(b_target), tuple(c_target), tuple(protected), frozenset(pattern))


def _readonly(arr) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Realization:
    """Numeric ``A``, ``B``, ``C``; the last ``n_e`` rows of ``C`` are protected sensors."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    n_e: int = 0

    def __post_init__(self):
        a = _readonly(np.atleast_2d(self.a))
        n_x = a.shape[0]
        b = _readonly(np.asarray(self.b, dtype=float).reshape(n_x, -1))
        c_raw = np.asarray(self.c, dtype=float)
        c = _readonly(c_raw.reshape(-1, n_x) if c_raw.size else np.zeros((0, n_x)))
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        if a.shape != (n_x, n_x):
            raise ModelError("A must be square")
        if not 0 <= self.n_e <= c.shape[0]:
            raise ModelError("n_e exceeds the sensor count")
        if b.shape[1] and np.linalg.matrix_rank(b) < b.shape[1]:
            raise ModelError("B not full column rank")

    @property
    def n_x(self) -> int:
        return self.a.shape[0]

    @property
    def n_u(self) -> int:
        return self.b.shape[1]

    @property
    def n_y(self) -> int:
        return self.c.shape[0] - self.n_e

    def b_attack(self) -> np.ndarray:
        """``B_a = [B 0]``."""
        return np.hstack([self.b, np.zeros((self.n_x, self.n_y))])

    def d_attack(self) -> np.ndarray:
        """``D_a``: identity block on the unprotected sensor rows."""
        d = np.zeros((self.c.shape[0], self.n_u + self.n_y))
        d[: self.n_y, self.n_u :] = np.eye(self.n_y)
        return d

    def replace(self, **changes) -> "Realization":
        fields = {"a": self.a, "b": self.b, "c": self.c, "n_e": self.n_e}
        fields.update(changes)
        return Realization(**fields)

    def pattern(self) -> StructuralModel:
        """Structural model induced by the nonzeros of this realization."""
        return StructuralModel.from_matrices(self.a, self.b, self.c, self.n_e)


def check_realization(m: StructuralModel, r: Realization) -> None:
    """Raise ModelError unless ``r`` is a realization of ``m``."""
    if r.a.shape != (m.n_x, m.n_x) or r.b.shape != (m.n_x, m.n_u) or r.c.shape != (m.n_sensors, m.n_x):
        raise ModelError("realization dimensions do not match the structural model")
    if r.n_e != m.n_e:
        raise ModelError("realization protected-sensor count does not match the model")
    if np.any((m.a_matrix() == 0) & (r.a != 0)):
        raise ModelError("A has a nonzero where [A] is structurally zero")
    bm = m.b_matrix()
    if np.any((bm == 0) & (r.b != 0)):
        raise ModelError("B has a nonzero where [B] is structurally zero")
    if np.any((bm == 1) & (r.b == 0)):
        raise ModelError("B has a zero where [B] is structurally one")
    if np.any((m.c_matrix() == 0) & (r.c != 0)):
        raise ModelError("C has a nonzero where [C] is structurally zero")


DEAD_ZONE = 0.05


def _sample_entries(rng: np.random.Generator, size: int) -> np.ndarray:
    mag = rng.uniform(DEAD_ZONE, 1.0, size)
    return mag * rng.choice((-1.0, 1.0), size)


def random_realization(
    m: StructuralModel, seed: int = 0, *, max_spectral_radius: float | None = None
) -> Realization:
    """Sample a realization of ``m``.

    Structural ones are drawn from ``[-1, -0.05] U [0.05, 1]``.  When
    ``max_spectral_radius`` is given, ``A`` is rescaled so its spectral radius
    does not exceed it (long simulations stay bounded).
    """
    rng = np.random.default_rng(seed)
    a = m.a_matrix().astype(float)
    idx = np.nonzero(a)
    a[idx] = _sample_entries(rng, len(idx[0]))
    if max_spectral_radius is not None and m.a_pattern:
        rho = max(abs(np.linalg.eigvals(a)))
        if rho > max_spectral_radius:
            a *= max_spectral_radius / rho
    b = m.b_matrix().astype(float)
    idx = np.nonzero(b)
    b[idx] = _sample_entries(rng, len(idx[0]))
    c = m.c_matrix().astype(float)
    idx = np.nonzero(c)
    c[idx] = _sample_entries(rng, len(idx[0]))
    return Realization(a, b, c, m.n_e)


def random_structure(
    seed,
    *,
    max_states: int = 6,
    max_actuators: int = 3,
    max_sensors: int = 4,
    density: float = 0.35,
    p_protected: float = 0.25,
) -> StructuralModel:
    """Random structural model for property checks."""
    rng = np.random.default_rng(seed)
    n_x = int(rng.integers(1, max_states + 1))
    n_u = int(rng.integers(1, min(max_actuators, n_x) + 1))
    n_s = int(rng.integers(0, max_sensors + 1))
    b_target = rng.choice(n_x, size=n_u, replace=False)
    c_target = rng.integers(0, n_x, size=n_s)
    n_e = int(rng.binomial(n_s, p_protected))
    protected = [l >= n_s - n_e for l in range(n_s)]
    mask = rng.random((n_x, n_x)) < density
    pattern = {(int(i), int(j)) for i, j in zip(*np.nonzero(mask))}
    return StructuralModel(n_x, tuple(b_target), tuple(c_target), tuple(protected), frozenset(pattern))


def add_sensor(m: StructuralModel, state: int, protected: bool = False) -> StructuralModel:
    """Return a copy of ``m`` with one more sensor on ``state``.

    Unprotected sensors are inserted after the last unprotected sensor and
    protected sensors are appended, so existing unprotected ids are unchanged.
    """
    if not 0 <= state < m.n_x:
        raise ModelError(f"state {state} out of range")
    pos = m.n_sensors if protected else m.n_y
    c_target = m.c_target[:pos] + (state,) + m.c_target[pos:]
    prot = m.protected[:pos] + (bool(protected),) + m.protected[pos:]
    return StructuralModel(m.n_x, m.b_target, c_target, prot, m.a_pattern)


def sensor_insert_position(m: StructuralModel, protected: bool) -> int:
    return m.n_sensors if protected else m.n_y


def remove_sensor(m: StructuralModel, sensor: int) -> StructuralModel:
    c_target = m.c_target[:sensor] + m.c_target[sensor + 1 :]
    prot = m.protected[:sensor] + m.protected[sensor + 1 :]
    return StructuralModel(m.n_x, m.b_target, c_target, prot, m.a_pattern)


def add_actuator(m: StructuralModel, state: int) -> StructuralModel:
    if not 0 <= state < m.n_x:
        raise ModelError(f"state {state} out of range")
    if state in m.b_target:
        raise ModelError(f"B not full column rank: state x{state + 1} already has an actuator")
    return StructuralModel(m.n_x, m.b_target + (state,), m.c_target, m.protected, m.a_pattern)


def remove_actuator(m: StructuralModel, actuator: int) -> StructuralModel:
    b_target = m.b_target[:actuator] + m.b_target[actuator + 1 :]
    return StructuralModel(m.n_x, b_target, m.c_target, m.protected, m.a_pattern)


def extend_realization_sensor(
    r: Realization, m: StructuralModel, state: int, protected: bool, gain: float
) -> Realization:
    """Realization matching ``add_sensor(m, state, protected)`` with the new row ``gain * e_state``."""
    pos = sensor_insert_position(m, protected)
    row = np.zeros((1, r.n_x))
    row[0, state] = gain
    c = np.vstack([r.c[:pos], row, r.c[pos:]])
    return Realization(r.a, r.b, c, r.n_e + int(protected))


def extend_realization_actuator(r: Realization, state: int, gain: float) -> Realization:
    col = np.zeros((r.n_x, 1))
    col[state, 0] = gain
    return Realization(r.a, np.hstack([r.b, col]), r.c, r.n_e)


# -- on-disk format ---------------------------------------------------------

_TOP_KEYS = {"n_x", "actuators", "sensors", "a_pattern", "realization"}


def _require(cond, msg):
    if not cond:
        raise ModelError(f"schema violation: {msg}")


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def model_from_dict(data: dict) -> tuple[StructuralModel, Realization | None]:
    _require(isinstance(data, dict), "top level must be an object")
    unknown = set(data) - _TOP_KEYS
    _require(not unknown, f"unknown keys {sorted(unknown)}")
    for key in ("n_x", "actuators", "a_pattern"):
        _require(key in data, f"missing key '{key}'")
    _require(_is_int(data["n_x"]), "n_x must be an integer")
    acts = data["actuators"]
    _require(isinstance(acts, list), "actuators must be a list")
    for a in acts:
        _require(isinstance(a, dict) and set(a) == {"target"} and _is_int(a["target"]),
                 "actuator entries must be {target: int}")
    sensors = data.get("sensors", [])
    _require(isinstance(sensors, list), "sensors must be a list")
    for s in sensors:
        _require(isinstance(s, dict) and _is_int(s.get("target")), "sensor entries need an integer target")
        _require(set(s) <= {"target", "protected"}, "sensor entries may only carry target and protected")
        _require(isinstance(s.get("protected", False), bool), "sensor protected flag must be a boolean")
    pattern = data["a_pattern"]
    _require(isinstance(pattern, list), "a_pattern must be a list")
    for p in pattern:
        _require(isinstance(p, list) and len(p) == 2 and all(_is_int(v) for v in p),
                 "a_pattern entries must be [row, col] integer pairs")

    model = StructuralModel(
        n_x=data["n_x"],
        b_target=tuple(a["target"] for a in acts),
        c_target=tuple(s["target"] for s in sensors),
        protected=tuple(s.get("protected", False) for s in sensors),
        a_pattern=frozenset(tuple(p) for p in pattern),
    )
    real = None
    if "realization" in data:
        rd = data["realization"]
        _require(isinstance(rd, dict) and set(rd) == {"a", "b", "c"}, "realization needs exactly a, b, c")
        try:
            a = np.array(rd["a"], dtype=float).reshape(model.n_x, model.n_x)
            b = np.array(rd["b"], dtype=float).reshape(model.n_x, model.n_u)
            c = np.array(rd["c"], dtype=float).reshape(model.n_sensors, model.n_x)
        except (ValueError, TypeError) as exc:
            raise ModelError(f"schema violation: realization matrices malformed ({exc})") from None
        real = Realization(a, b, c, model.n_e)
        check_realization(model, real)
    return model, real


def model_to_dict(m: StructuralModel, r: Realization | None = None) -> dict:
    data: dict = {"n_x": m.n_x}
    data["actuators"] = [{"target": t} for t in m.b_target]
    data["sensors"] = [{"target": t, "protected": p} for t, p in zip(m.c_target, m.protected)]
    data["a_pattern"] = [list(p) for p in sorted(m.a_pattern)]
    if r is not None:
        data["realization"] = {"a": r.a.tolist(), "b": r.b.tolist(), "c": r.c.tolist()}
    return data


def load_model(path) -> tuple[StructuralModel, Realization | None]:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not valid JSON ({exc})") from None
    return model_from_dict(data)


def dumps_model(m: StructuralModel, r: Realization | None = None) -> str:
    return json.dumps(model_to_dict(m, r), indent=2) + "\n"


def save_model(path, m: StructuralModel, r: Realization | None = None) -> None:
    Path(path).write_text(dumps_model(m, r), encoding="utf-8")


def state_label(j: int) -> str:
    return f"x{j + 1}"
