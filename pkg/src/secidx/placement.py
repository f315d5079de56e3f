"""Sensor placement for raising robust indices.

A new sensor on a state of ``X_{u_i}`` (states reachable from ``u_i``
without passing a state driven by another actuator) raises the robust index
of ``u_i`` by one, or to infinity when the sensor is protected.  Both
placement problems below are covered by submodular gains, so greedy
selection carries the classical guarantees: a ``H(d)`` factor for the
min-cardinality cover of unprotected sensors and ``1 - 1/e`` for the
budgeted protected placement.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from pathlib import Path

from .model import ModelError, ParseError, StructuralModel
from .robust_index import build_extended_graph

BRUTE_FORCE_MAX_CANDIDATES = 16


class InfeasiblePlacement(ValueError):
    """The full candidate set cannot reach the requested total gain."""


@dataclass(frozen=True)
class XSet:
    actuator: int
    states: frozenset

    def label(self) -> str:
        return "{" + ",".join(f"x{j + 1}" for j in sorted(self.states)) + "}"


def x_set(m: StructuralModel, actuator: int) -> XSet:
    if not 0 <= actuator < m.n_u:
        raise ValueError(f"actuator id {actuator} out of range")
    blocked = {t for j, t in enumerate(m.b_target) if j != actuator}
    succ = build_extended_graph(m).successors()
    seen: set = set()
    stack = [("u", actuator)]
    while stack:
        node = stack.pop()
        for nxt in succ[node]:
            if nxt[0] == "x" and nxt[1] not in blocked and nxt[1] not in seen:
                seen.add(nxt[1])
                stack.append(nxt)
    return XSet(actuator, frozenset(seen))


def default_candidates(m: StructuralModel) -> tuple:
    """One candidate sensor per state that lies in some ``X_{u_i}``."""
    states: set = set()
    for i in range(m.n_u):
        states |= x_set(m, i).states
    return tuple(sorted(states))


@dataclass
class PlacementInstance:
    model: StructuralModel
    candidates: tuple  # state measured by each candidate sensor
    k: dict = field(default_factory=dict)  # actuator -> required increase (unprotected)
    u_p: tuple = ()  # actuators to make unattackable (protected)
    k_max: int = 0

    def __post_init__(self):
        self.candidates = tuple(int(c) for c in self.candidates)
        self.k = {int(a): int(v) for a, v in self.k.items()}
        self.u_p = tuple(int(a) for a in self.u_p)
        for c in self.candidates:
            if not 0 <= c < self.model.n_x:
                raise ModelError(f"candidate state {c} out of range")
        for a in list(self.k) + list(self.u_p):
            if not 0 <= a < self.model.n_u:
                raise ModelError(f"actuator id {a} out of range")
        if any(v < 0 for v in self.k.values()) or self.k_max < 0:
            raise ModelError("required increases and k_max must be nonnegative")
        self.x_sets = {i: x_set(self.model, i).states for i in range(self.model.n_u)}

    @property
    def target(self) -> int:
        return sum(self.k.values())


def gain_unprotected(inst: PlacementInstance, chosen) -> int:
    """Total capped gain of placing the candidate sensors with indices ``chosen``."""
    total = 0
    states = [inst.candidates[c] for c in chosen]
    for a, need in inst.k.items():
        xs = inst.x_sets[a]
        total += min(sum(1 for s in states if s in xs), need)
    return total


def gain_protected(inst: PlacementInstance, states) -> int:
    """Number of actuators in ``u_p`` whose ``X`` set meets ``states``."""
    chosen = set(states)
    return sum(1 for a in inst.u_p if chosen & inst.x_sets[a])


def harmonic(d: int) -> float:
    return float(sum(Fraction(1, i) for i in range(1, d + 1)))


@dataclass(frozen=True)
class UnprotectedPlacement:
    placement: tuple  # candidate indices, in selection order
    states: tuple
    gain: int
    max_single_gain: int
    certificate: float  # H(max_single_gain): |placement| <= certificate * OPT


def greedy_unprotected(inst: PlacementInstance) -> UnprotectedPlacement:
    everything = range(len(inst.candidates))
    if gain_unprotected(inst, everything) < inst.target:
        raise InfeasiblePlacement(
            f"candidates reach total gain {gain_unprotected(inst, everything)} < required {inst.target}"
        )
    d = max((gain_unprotected(inst, [c]) for c in everything), default=0)
    chosen: list = []
    current = 0
    while current < inst.target:
        best, best_gain = None, current
        for c in everything:
            if c in chosen:
                continue
            g = gain_unprotected(inst, chosen + [c])
            if g > best_gain:
                best, best_gain = c, g
        chosen.append(best)
        current = best_gain
    return UnprotectedPlacement(
        tuple(chosen), tuple(inst.candidates[c] for c in chosen), current, d, harmonic(d)
    )


def greedy_protected(inst: PlacementInstance) -> tuple:
    """Greedy protected placement: ``(states, value)`` with at most ``k_max`` states."""
    pool = sorted(set(inst.candidates))
    chosen: list = []
    value = 0
    while len(chosen) < inst.k_max:
        best, best_value = None, value
        for s in pool:
            if s in chosen:
                continue
            v = gain_protected(inst, chosen + [s])
            if v > best_value:
                best, best_value = s, v
        if best is None:
            break
        chosen.append(best)
        value = best_value
    return tuple(chosen), value


def brute_force_optimum(inst: PlacementInstance, which: int):
    """Exact optimum by enumeration; ``which`` selects the problem.

    ``which=7`` (fewest unprotected sensors) returns ``(min size, candidate
    indices)``; ``which=8`` (protected budget) returns ``(max value, states)``.
    """
    if which == 7:
        n = len(inst.candidates)
        if n > BRUTE_FORCE_MAX_CANDIDATES:
            raise ValueError(f"brute force limited to {BRUTE_FORCE_MAX_CANDIDATES} candidates")
        for size in range(n + 1):
            for combo in combinations(range(n), size):
                if gain_unprotected(inst, combo) >= inst.target:
                    return size, combo
        raise InfeasiblePlacement("no subset of candidates reaches the required gain")
    if which == 8:
        pool = sorted(set(inst.candidates))
        if len(pool) > BRUTE_FORCE_MAX_CANDIDATES:
            raise ValueError(f"brute force limited to {BRUTE_FORCE_MAX_CANDIDATES} candidates")
        best = (0, ())
        for size in range(min(inst.k_max, len(pool)) + 1):
            for combo in combinations(pool, size):
                v = gain_protected(inst, combo)
                if v > best[0]:
                    best = (v, combo)
        return best
    raise ValueError("which must be 7 or 8")


def load_request(path, model: StructuralModel) -> tuple[PlacementInstance, bool]:
    """Read a placement request file; returns the instance and its ``protected`` flag."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"placement request is not valid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ModelError("schema violation: request must be an object")
    unknown = set(data) - {"k", "candidates", "protected", "k_max", "u_p"}
    if unknown:
        raise ModelError(f"schema violation: unknown keys {sorted(unknown)}")
    candidates = data.get("candidates")
    if candidates is None:
        candidates = default_candidates(model)
    try:
        k = {int(a): int(v) for a, v in data.get("k", {}).items()}
    except (TypeError, ValueError, AttributeError):
        raise ModelError("schema violation: k must map actuator ids to integers") from None
    inst = PlacementInstance(model, tuple(candidates), k, tuple(data.get("u_p", ())), int(data.get("k_max", 0)))
    return inst, bool(data.get("protected", False))
