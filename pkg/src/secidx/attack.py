"""Perfectly undetectable attacks: synthesis and closed-loop simulation.

Three attacker types are modelled:

* ``type1`` knows the full realization and computes its signals offline
  (feedforward state cancellation).  Decoupled from ``x(0)`` and ``u`` but
  fragile to model errors.
* ``type2`` knows only the rows of ``A``/``B`` for states it actuates and
  reads those states and their in-neighbours online.  It holds the
  cancelled states and the attacked sensors at their values at attack
  onset, so it needs a steady state.
* ``type3`` knows only the structure and replays recorded sensor values.
"""

from __future__ import annotations

import csv
import enum
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .model import ComponentSet, ModelError, ParseError, Realization, StructuralModel, load_model, random_realization
from .robust_index import attack_separator, build_extended_graph, is_separator, reachable

DEFAULT_WARMUP = 20


class AttackKind(str, enum.Enum):
    TYPE1 = "type1"
    TYPE2 = "type2"
    TYPE3 = "type3"


@dataclass
class AttackPolicy:
    kind: AttackKind
    attacked: ComponentSet
    active_actuator: int
    payload: np.ndarray
    believed_realization: Realization | None = None
    model: StructuralModel | None = None
    # type1: precomputed signals, one row per step after onset
    actuator_signals: np.ndarray | None = None
    sensor_signals: np.ndarray | None = None
    # type3: recorded outputs (rows = steps, columns = all sensors)
    recorded: np.ndarray | None = None
    warmup: int = DEFAULT_WARMUP

    def __post_init__(self):
        if self.active_actuator not in self.attacked.actuators:
            raise ValueError("the active actuator must be in the attacked set")
        self.payload = np.asarray(self.payload, dtype=float).ravel()

    @property
    def is_active(self) -> bool:
        return bool(np.any(self.payload != 0))


@dataclass
class AttackTrace:
    horizon: int
    x: np.ndarray  # (horizon, n_x)
    y_received: np.ndarray  # (horizon, n_sensors)
    y_expected: np.ndarray
    residual: np.ndarray  # y_expected - y_received
    attack: np.ndarray = field(default=None)  # (horizon, n_u + n_y)

    @property
    def max_residual(self) -> float:
        return float(np.max(np.abs(self.residual))) if self.residual.size else 0.0


def make_payload(shape, horizon: int) -> np.ndarray:
    """Payload samples from a shape: ``"ramp"``, ``"step"``, ``"zero"``, a dict, or a list."""
    if isinstance(shape, str):
        shape = {"kind": shape}
    if isinstance(shape, (list, tuple, np.ndarray)):
        out = np.zeros(horizon)
        vals = np.asarray(shape, dtype=float)[:horizon]
        out[: len(vals)] = vals
        return out
    kind = shape.get("kind")
    k = np.arange(horizon, dtype=float)
    if kind == "ramp":
        return shape.get("slope", -1.0) * k + shape.get("offset", 0.0)
    if kind == "step":
        return np.full(horizon, float(shape.get("amplitude", 1.0)))
    if kind == "zero":
        return np.zeros(horizon)
    raise ValueError(f"unknown payload kind {kind!r}")


def _check_set(m: StructuralModel, attacked: ComponentSet, i: int) -> None:
    attacked.check(m)
    if i not in attacked.actuators:
        raise ValueError(f"active actuator u{i + 1} must be attacked")


def synth_type1(r_believed: Realization, attacked: ComponentSet, i: int, payload) -> AttackPolicy:
    """Feedforward attack from the believed realization.

    The attacker simulates the attack-only response ``xh`` from ``xh(0) = 0``
    and cancels it: each other attacked actuator zeroes its state,
    ``a_j(k) = -A(p,:) xh(k) / B(p,j)``, and each attacked sensor subtracts
    its reading, ``a_l(k) = -C(l,:) xh(k)``.
    """
    m = r_believed.pattern()
    _check_set(m, attacked, i)
    if not is_separator(build_extended_graph(m), i, attack_separator(m, i, attacked)):
        warnings.warn("attacked set does not separate the actuator from the sensors; "
                      "the attack may be detected", stacklevel=2)
    payload = np.asarray(payload, dtype=float).ravel()
    a, b, c = r_believed.a, r_believed.b, r_believed.c
    helpers = sorted(attacked.actuators - {i})
    targets = {j: m.b_target[j] for j in helpers}
    for j, p in targets.items():
        if b[p, j] == 0:
            raise ModelError(f"believed B has a zero entry for actuator u{j + 1}")
    sensors = sorted(attacked.sensors)
    n = len(payload)
    act = np.zeros((n, r_believed.n_u))
    sens = np.zeros((n, r_believed.n_y))
    xh = np.zeros(r_believed.n_x)
    for k in range(n):
        act[k, i] = payload[k]
        for j, p in targets.items():
            act[k, j] = -(a[p] @ xh) / b[p, j]
        for l in sensors:
            sens[k, l] = -(c[l] @ xh)
        xh = a @ xh + b @ act[k]
    return AttackPolicy(AttackKind.TYPE1, attacked, i, payload, believed_realization=r_believed,
                        model=m, actuator_signals=act, sensor_signals=sens)


def synth_type2(m: StructuralModel, attacked: ComponentSet, i: int, payload) -> AttackPolicy:
    """Local-feedback attack; refuses sets that do not separate ``u_i`` from ``t``."""
    _check_set(m, attacked, i)
    if not is_separator(build_extended_graph(m), i, attack_separator(m, i, attacked)):
        raise ValueError("attacked set is not a vertex separator of the actuator and the sink; "
                         "a local attacker cannot stay undetected")
    return AttackPolicy(AttackKind.TYPE2, attacked, i, payload, model=m)


def synth_type3(attacked: ComponentSet, i: int, payload, recorded=None,
                model: StructuralModel | None = None, warmup: int = DEFAULT_WARMUP) -> AttackPolicy:
    """Replay attack: attacked sensors repeat recorded values, no model knowledge used."""
    if model is not None:
        _check_set(model, attacked, i)
        seen = reachable(build_extended_graph(model), ("u", i))
        exposed = [l for l in range(model.n_sensors) if ("y", l) in seen and l not in attacked.sensors]
        if exposed:
            names = ",".join(f"y{l + 1}" for l in exposed)
            warnings.warn(f"sensors {names} are reachable from u{i + 1} but not replayed; "
                          "the attack may be detected", stacklevel=2)
    rec = None if recorded is None else np.atleast_2d(np.asarray(recorded, dtype=float))
    return AttackPolicy(AttackKind.TYPE3, attacked, i, payload, model=model, recorded=rec, warmup=warmup)


def _input_sequence(u_op, horizon: int, n_u: int) -> np.ndarray:
    arr = np.zeros((horizon, n_u)) if u_op is None else np.asarray(u_op, dtype=float)
    if arr.ndim == 1:
        arr = np.tile(arr, (horizon, 1))
    if arr.shape != (horizon, n_u):
        raise ModelError(f"operator input must be ({n_u},) or ({horizon}, {n_u}), got {arr.shape}")
    return arr


def _nominal(r: Realization, x0: np.ndarray, u_seq: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    horizon = len(u_seq)
    xs = np.zeros((horizon, r.n_x))
    ys = np.zeros((horizon, r.c.shape[0]))
    x = x0.copy()
    for k in range(horizon):
        xs[k] = x
        ys[k] = r.c @ x
        x = r.a @ x + r.b @ u_seq[k]
    return xs, ys


def _local_rows(r_true: Realization, policy: AttackPolicy) -> dict:
    """The only realization knowledge a type2 attacker holds: in-neighbour gains of its states."""
    m = policy.model
    rows = {}
    for j in sorted(policy.attacked.actuators - {policy.active_actuator}):
        p = m.b_target[j]
        neigh = sorted(q for (row, q) in m.a_pattern if row == p)
        rows[j] = (p, neigh, r_true.a[p, neigh].copy(), r_true.b[p, j])
    return rows


def simulate(r_true: Realization, policy: AttackPolicy, x0, u_op, horizon: int,
             k_start: int = 0) -> AttackTrace:
    """Run the plant under attack and compare with the attack-free prediction."""
    x0 = np.asarray(x0, dtype=float).ravel()
    if x0.shape != (r_true.n_x,):
        raise ModelError(f"x0 must have {r_true.n_x} entries")
    if policy.attacked.actuators and max(policy.attacked.actuators) >= r_true.n_u:
        raise ModelError("attacked actuator outside the realization")
    if policy.attacked.sensors and max(policy.attacked.sensors) >= r_true.n_y:
        raise ModelError("attacked sensor outside the unprotected sensors of the realization")
    u_seq = _input_sequence(u_op, horizon, r_true.n_u)
    _, y_expected = _nominal(r_true, x0, u_seq)

    n_u, n_y = r_true.n_u, r_true.n_y
    i = policy.active_actuator
    sensors = sorted(policy.attacked.sensors)
    recorded = policy.recorded
    if policy.kind is AttackKind.TYPE3 and recorded is None:
        warm = np.tile(u_seq[0], (max(policy.warmup, 1), 1))
        recorded = _nominal(r_true, x0, warm)[1]
    local = _local_rows(r_true, policy) if policy.kind is AttackKind.TYPE2 else {}

    xs = np.zeros((horizon, r_true.n_x))
    y_recv = np.zeros((horizon, r_true.c.shape[0]))
    attack = np.zeros((horizon, n_u + n_y))
    x = x0.copy()
    x_ref = y_ref = None
    for k in range(horizon):
        xs[k] = x
        y_true = r_true.c @ x
        a_u = np.zeros(n_u)
        a_y = np.zeros(n_y)
        if k >= k_start:
            s = k - k_start
            if x_ref is None:
                x_ref, y_ref = x.copy(), y_true.copy()
            pay = policy.payload[s] if s < len(policy.payload) else 0.0
            if policy.kind is AttackKind.TYPE1:
                if s < len(policy.actuator_signals):
                    a_u = policy.actuator_signals[s].copy()
                    a_y = policy.sensor_signals[s].copy()
            elif policy.kind is AttackKind.TYPE2:
                a_u[i] = pay
                for j, (p, neigh, gains, b_pj) in local.items():
                    a_u[j] = -(gains @ (x[neigh] - x_ref[neigh])) / b_pj
                for l in sensors:
                    a_y[l] = y_ref[l] - y_true[l]
            else:
                a_u[i] = pay
                row = recorded[s % len(recorded)]
                for l in sensors:
                    a_y[l] = row[l] - y_true[l]
        attack[k, :n_u] = a_u
        attack[k, n_u:] = a_y
        y_recv[k] = y_true
        y_recv[k, :n_y] += a_y
        x = r_true.a @ x + r_true.b @ (u_seq[k] + a_u)
    return AttackTrace(horizon, xs, y_recv, y_expected, y_expected - y_recv, attack)


def _parse_node(node):
    if isinstance(node, str):
        return (node[0], int(node[1:]) - 1)
    return tuple(node)


def adversarial_realization(m: StructuralModel, path, seed: int = 0) -> Realization:
    """Realization in which an attack along ``path`` must show up at its last sensor.

    ``path`` is ``u_i, x_{i0}, ..., x_{in}, y_l`` (node tuples or labels like
    ``"x2"``).  The first state has its ``A`` row zeroed, every later state
    is driven only by its predecessor, and all gains on the path are at
    least 0.5 in magnitude.
    """
    nodes = [_parse_node(n) for n in path]
    if len(nodes) > m.n_x + 2 or len(set(nodes)) != len(nodes):
        raise ValueError("path is not a simple path")
    if len(nodes) < 3 or nodes[0][0] != "u" or nodes[-1][0] != "y" or any(n[0] != "x" for n in nodes[1:-1]):
        raise ValueError("path must run actuator, states..., sensor")
    edges = set(build_extended_graph(m).edges)
    for a, b in zip(nodes, nodes[1:]):
        if (a, b) not in edges:
            raise ValueError(f"no edge {a} -> {b} in the extended graph")
    rng = np.random.default_rng(seed)

    def strong():
        return float(rng.uniform(0.5, 1.0) * rng.choice((-1.0, 1.0)))

    base = random_realization(m, seed)
    a, b, c = base.a.copy(), base.b.copy(), base.c.copy()
    i = nodes[0][1]
    states = [n[1] for n in nodes[1:-1]]
    a[states[0], :] = 0.0
    b[states[0], i] = strong()
    for prev, cur in zip(states, states[1:]):
        a[cur, :] = 0.0
        a[cur, prev] = strong()
    c[nodes[-1][1], states[-1]] = strong()
    return Realization(a, b, c, base.n_e)


def write_trace_csv(trace: AttackTrace, path) -> None:
    n_x = trace.x.shape[1]
    n_s = trace.y_received.shape[1]
    header = (["k"] + [f"x_{j + 1}" for j in range(n_x)]
              + [f"y_received_{l + 1}" for l in range(n_s)]
              + [f"y_expected_{l + 1}" for l in range(n_s)]
              + [f"residual_{l + 1}" for l in range(n_s)])
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for k in range(trace.horizon):
            row = [k, *trace.x[k], *trace.y_received[k], *trace.y_expected[k], *trace.residual[k]]
            writer.writerow([v if isinstance(v, int) else repr(float(v)) for v in row])


@dataclass
class Scenario:
    model: StructuralModel
    realization: Realization
    x0: np.ndarray
    u_op: np.ndarray  # (horizon, n_u)
    horizon: int
    k_start: int
    policies: list  # (name, AttackPolicy)


_SCENARIO_KEYS = {"model", "x0", "u0", "u_changes", "horizon", "k_start", "policies"}
_POLICY_KEYS = {"name", "kind", "attacked", "active_actuator", "payload", "believed", "warmup"}


def _scenario_error(msg: str) -> ModelError:
    return ModelError(f"scenario: {msg}")


def _believed(r: Realization, overrides: dict) -> Realization:
    mats = {}
    for key in ("a", "b", "c"):
        if key in overrides:
            mats[key] = np.asarray(overrides[key], dtype=float)
    extra = set(overrides) - {"a", "b", "c"}
    if extra:
        raise _scenario_error(f"believed realization has unknown keys {sorted(extra)}")
    try:
        return r.replace(**mats)
    except ValueError as exc:
        raise _scenario_error(f"believed realization invalid ({exc})") from None


def load_scenario(path) -> Scenario:
    """Read a scenario file; the model path is resolved relative to the scenario."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"scenario is not valid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise _scenario_error("top level must be an object")
    unknown = set(data) - _SCENARIO_KEYS
    if unknown:
        raise _scenario_error(f"unknown keys {sorted(unknown)}")
    for key in ("model", "x0", "horizon", "policies"):
        if key not in data:
            raise _scenario_error(f"missing key '{key}'")
    m, r = load_model(path.parent / data["model"])
    if r is None:
        raise _scenario_error("the model file carries no realization")
    horizon = int(data["horizon"])
    x0 = np.asarray(data["x0"], dtype=float)
    if x0.shape != (m.n_x,):
        raise _scenario_error(f"x0 must have {m.n_x} entries")
    u0 = np.asarray(data.get("u0", [0.0] * m.n_u), dtype=float)
    if u0.shape != (m.n_u,):
        raise _scenario_error(f"u0 must have {m.n_u} entries")
    u_op = np.tile(u0, (horizon, 1))
    for change in data.get("u_changes", []):
        k, j = int(change["k"]), int(change["actuator"])
        if not 0 <= j < m.n_u:
            raise _scenario_error(f"input change on unknown actuator {j}")
        u_op[k:, j] += float(change["delta"])

    policies = []
    for n, entry in enumerate(data["policies"]):
        try:
            policies.append(_load_policy(n, entry, m, r, horizon))
        except (KeyError, TypeError) as exc:
            raise _scenario_error(f"policy {n + 1} is malformed ({exc!r})") from None
    return Scenario(m, r, x0, u_op, horizon, int(data.get("k_start", 0)), policies)


def _load_policy(n: int, entry: dict, m: StructuralModel, r: Realization, horizon: int):
    extra = set(entry) - _POLICY_KEYS
    if extra:
        raise _scenario_error(f"policy has unknown keys {sorted(extra)}")
    attacked = ComponentSet(frozenset(entry["attacked"].get("actuators", [])),
                            frozenset(entry["attacked"].get("sensors", [])))
    i = int(entry["active_actuator"])
    payload = make_payload(entry.get("payload", "zero"), horizon)
    kind = AttackKind(entry["kind"])
    if kind is AttackKind.TYPE1:
        believed = _believed(r, entry.get("believed", {}))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            policy = synth_type1(believed, attacked, i, payload)
    elif kind is AttackKind.TYPE2:
        policy = synth_type2(m, attacked, i, payload)
    else:
        policy = synth_type3(attacked, i, payload, warmup=int(entry.get("warmup", DEFAULT_WARMUP)))
    return entry.get("name", f"policy{n + 1}"), policy
