"""Robust security index from the structural model.

The robust index of actuator ``u_i`` is the smallest ``|U_a| + |Y_a|``
(with ``u_i`` in ``U_a``) such that the states driven by ``U_a \\ u_i`` and
the unprotected sensors ``Y_a`` together cut every directed path from
``u_i`` to the sink ``t`` of the extended graph.  It is computed as one
plus a minimum ``u_i``-``t`` cut in a node-split flow network.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import combinations

from .model import INF, ComponentSet, StructuralModel, u

SINK = ("t",)
ORACLE_MAX_COMPONENTS = 16


def node_label(node) -> str:
    kind = node[0]
    if kind == "t":
        return "t"
    if kind in ("x_in", "x_out"):
        return f"x{node[1] + 1}_{kind[2:]}"
    return f"{kind}{node[1] + 1}"


@dataclass(frozen=True)
class ExtendedGraph:
    """Directed graph over actuators, states, sensors and the sink ``t``."""

    model: StructuralModel
    e_ux: tuple
    e_xx: tuple
    e_xy: tuple
    e_t: tuple

    @property
    def nodes(self) -> list:
        m = self.model
        return ([("u", j) for j in range(m.n_u)] + [("x", j) for j in range(m.n_x)]
                + [("y", l) for l in range(m.n_sensors)] + [SINK])

    @property
    def edges(self) -> tuple:
        return self.e_ux + self.e_xx + self.e_xy + self.e_t

    def successors(self) -> dict:
        succ: dict = {n: [] for n in self.nodes}
        for a, b in self.edges:
            succ[a].append(b)
        return succ


def build_extended_graph(m: StructuralModel) -> ExtendedGraph:
    e_ux = tuple((("u", j), ("x", t)) for j, t in enumerate(m.b_target))
    e_xx = tuple((("x", j), ("x", i)) for i, j in sorted(m.a_pattern))
    e_xy = tuple((("x", t), ("y", l)) for l, t in enumerate(m.c_target))
    e_t = tuple((("y", l), SINK) for l in range(m.n_sensors))
    return ExtendedGraph(m, e_ux, e_xx, e_xy, e_t)


def reachable(g: ExtendedGraph, start, removed=frozenset()) -> set:
    succ = g.successors()
    seen = {start}
    stack = [start]
    while stack:
        n = stack.pop()
        for nxt in succ[n]:
            if nxt not in seen and nxt not in removed:
                seen.add(nxt)
                stack.append(nxt)
    return seen


def is_separator(g: ExtendedGraph, actuator: int, removed) -> bool:
    """True iff deleting ``removed`` cuts every path from ``u_actuator`` to ``t``."""
    return SINK not in reachable(g, ("u", actuator), frozenset(removed))


def escape_path(g: ExtendedGraph, actuator: int, removed=frozenset()):
    """Shortest path ``u_i, x.., y_l`` avoiding ``removed``, or None when they separate."""
    succ = g.successors()
    start = ("u", actuator)
    parent = {start: None}
    queue = deque([start])
    while queue:
        n = queue.popleft()
        if n[0] == "y":
            path = []
            while n is not None:
                path.append(n)
                n = parent[n]
            return path[::-1]
        for nxt in succ[n]:
            if nxt not in parent and nxt not in removed and nxt != SINK:
                parent[nxt] = n
                queue.append(nxt)
    return None


def attack_separator(m: StructuralModel, actuator: int, attacked: ComponentSet) -> set:
    """States driven by the other attacked actuators plus the attacked sensors."""
    states = {("x", m.b_target[j]) for j in attacked.actuators if j != actuator}
    return states | {("y", l) for l in attacked.sensors}


@dataclass
class FlowNetwork:
    """Capacitated network ``G_{u_i}``; arcs at ``sentinel`` are infinite."""

    actuator: int
    nodes: list
    arcs: list  # (src, dst, capacity)
    sentinel: int
    type1: frozenset = field(default_factory=frozenset)

    @property
    def source(self):
        return ("u", self.actuator)

    @property
    def sink(self):
        return SINK

    def is_infinite(self, capacity: int) -> bool:
        return capacity >= self.sentinel

    def dump(self) -> str:
        """Edge list, one ``src dst capacity`` line per arc."""
        lines = []
        for a, b, cap in self.arcs:
            shown = "inf" if self.is_infinite(cap) else str(cap)
            lines.append(f"{node_label(a)} {node_label(b)} {shown}")
        return "\n".join(lines) + "\n"


def build_flow_network(g: ExtendedGraph, actuator: int) -> FlowNetwork:
    m = g.model
    if not 0 <= actuator < m.n_u:
        raise ValueError(f"actuator id {actuator} out of range")
    type1 = frozenset(t for j, t in enumerate(m.b_target) if j != actuator)

    def in_node(j):
        return ("x_in", j) if j in type1 else ("x", j)

    def out_node(j):
        return ("x_out", j) if j in type1 else ("x", j)

    nodes = [("u", actuator), SINK]
    for j in range(m.n_x):
        nodes += [("x_in", j), ("x_out", j)] if j in type1 else [("x", j)]

    infinite_arcs = [(("u", actuator), in_node(m.b_target[actuator]))]
    for src, dst in g.e_xx:
        if src != dst:  # self-loops never help a path escape a removed node
            infinite_arcs.append((out_node(src[1]), in_node(dst[1])))
    finite = [(("x_in", j), ("x_out", j), 1) for j in sorted(type1)]
    to_sink_infinite = []
    for j in range(m.n_x):
        sensors = m.sensors_on(j)
        if not sensors:
            continue
        if any(m.protected[l] for l in sensors):
            to_sink_infinite.append((out_node(j), SINK))
        else:
            finite.append((out_node(j), SINK, len(sensors)))
    sentinel = 1 + sum(c for _, _, c in finite)
    arcs = [(a, b, sentinel) for a, b in infinite_arcs + to_sink_infinite] + finite
    return FlowNetwork(actuator, nodes, arcs, sentinel, type1)


def max_flow(net: FlowNetwork):
    """Maximum source-sink flow by shortest augmenting paths.

    Returns ``(value, cut)``: ``value`` is an int or INF, ``cut`` the arcs
    leaving the set of nodes reachable from the source in the final residual
    network (the minimum cut nearest the source).
    """
    src, snk = net.source, net.sink
    residual: dict = {n: {} for n in net.nodes}
    for a, b, cap in net.arcs:
        residual[a][b] = residual[a].get(b, 0) + cap
        residual[b].setdefault(a, 0)
    flow = 0
    while flow < net.sentinel:
        parent = {src: None}
        queue = deque([src])
        while queue and snk not in parent:
            n = queue.popleft()
            for nxt, cap in residual[n].items():
                if cap > 0 and nxt not in parent:
                    parent[nxt] = n
                    queue.append(nxt)
        if snk not in parent:
            break
        path = []
        n = snk
        while parent[n] is not None:
            path.append((parent[n], n))
            n = parent[n]
        push = min(residual[a][b] for a, b in path)
        for a, b in path:
            residual[a][b] -= push
            residual[b][a] += push
        flow += push

    side = {src}
    queue = deque([src])
    while queue:
        n = queue.popleft()
        for nxt, cap in residual[n].items():
            if cap > 0 and nxt not in side:
                side.add(nxt)
                queue.append(nxt)
    cut = [(a, b, c) for a, b, c in net.arcs if a in side and b not in side]
    value = INF if flow >= net.sentinel else flow
    return value, cut


@dataclass(frozen=True)
class RobustReport:
    component: object
    value: object  # int or INF
    witness: ComponentSet | None = None
    separator: frozenset | None = None

    def describe(self) -> str:
        if self.value is INF:
            return "inf"
        return f"{self.value} {self.witness.label()}"

    def separator_label(self) -> str:
        if self.separator is None:
            return "-"
        order = {"x": 0, "y": 1}
        nodes = sorted(self.separator, key=lambda n: (order[n[0]], n[1]))
        return "{" + ",".join(node_label(n) for n in nodes) + "}"


def delta_r(m: StructuralModel, actuator: int) -> RobustReport:
    """Robust index of ``actuator`` with a witness recovered from the minimum cut."""
    g = build_extended_graph(m)
    net = build_flow_network(g, actuator)
    value, cut = max_flow(net)
    if value is INF:
        return RobustReport(u(actuator), INF)
    acts = {actuator}
    sensors: set = set()
    for a, b, _ in cut:
        if a[0] == "x_in" and b[0] == "x_out":
            acts.add(m.actuator_at(a[1]))
        elif b == SINK:
            sensors.update(m.sensors_on(a[1]))
    witness = ComponentSet(frozenset(acts), frozenset(sensors))
    return RobustReport(u(actuator), value + 1, witness, frozenset(attack_separator(m, actuator, witness)))


def delta_r_all(m: StructuralModel) -> list[RobustReport]:
    return [delta_r(m, i) for i in range(m.n_u)]


def delta_r_oracle(m: StructuralModel, actuator: int):
    """Robust index by enumerating every admissible attack set (small models only)."""
    if m.n_u + m.n_sensors > ORACLE_MAX_COMPONENTS:
        raise ValueError(f"oracle limited to {ORACLE_MAX_COMPONENTS} components")
    if not 0 <= actuator < m.n_u:
        raise ValueError(f"actuator id {actuator} out of range")
    g = build_extended_graph(m)
    pool = [("u", j) for j in range(m.n_u) if j != actuator] + [("y", l) for l in range(m.n_y)]
    for size in range(len(pool) + 1):
        for chosen in combinations(pool, size):
            removed = {("x", m.b_target[j]) if kind == "u" else ("y", j) for kind, j in chosen}
            if is_separator(g, actuator, removed):
                return size + 1
    return INF
