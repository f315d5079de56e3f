"""Regenerate the bundled model, scenario and placement-request fixtures."""

import json
from pathlib import Path

import numpy as np

from secidx.model import Realization, StructuralModel, dumps_model

OUT = Path(__file__).resolve().parent.parent / "src" / "secidx" / "data"

# IEEE 14-bus grid: lines, generator buses, load-actuator buses, PMU buses
LINES = [(1, 2), (1, 5), (2, 3), (2, 4), (2, 5), (3, 4), (4, 5), (4, 7), (4, 9), (5, 6),
         (6, 11), (6, 12), (6, 13), (7, 8), (7, 9), (9, 10), (9, 14), (10, 11), (12, 13), (13, 14)]
GEN_BUSES = [1, 2, 3, 6, 8]
LOAD_BUSES = [2, 5, 9, 14]
PMU_BUSES = [1, 3, 5, 7, 9, 11, 13]


def ieee14() -> StructuralModel:
    """Linearized swing model: rotor angle and frequency per generator, one angle per bus.

    States: phi_g, omega_g for each generator (in bus order), then theta_1..theta_14.
    Generators drive their frequency; the controllable loads drive their bus angle.
    """
    phi = {g: 2 * n for n, g in enumerate(GEN_BUSES)}
    omega = {g: 2 * n + 1 for n, g in enumerate(GEN_BUSES)}
    theta = {b: 2 * len(GEN_BUSES) + b - 1 for b in range(1, 15)}
    pattern = set()
    for g in GEN_BUSES:
        p, w, t = phi[g], omega[g], theta[g]
        pattern |= {(p, p), (p, w), (w, w), (w, p), (w, t), (t, p)}
    for b in range(1, 15):
        pattern.add((theta[b], theta[b]))
    for a, b in LINES:
        pattern |= {(theta[a], theta[b]), (theta[b], theta[a])}
    b_target = tuple(omega[g] for g in GEN_BUSES) + tuple(theta[b] for b in LOAD_BUSES)
    c_target = tuple(theta[b] for b in PMU_BUSES)
    return StructuralModel(2 * len(GEN_BUSES) + 14, b_target, c_target,
                           (False,) * len(c_target), frozenset(pattern))


def write(name: str, text: str) -> None:
    (OUT / name).write_text(text, encoding="utf-8")


def write_json(name: str, data: dict) -> None:
    write(name, json.dumps(data, indent=2) + "\n")


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    ex1 = StructuralModel(2, (0,), (1,), (True,), frozenset({(0, 0), (1, 0), (1, 1)}))
    a1 = np.array([[0.1, 0.0], [0.01, 0.1]])
    b1 = np.array([[1.0], [0.0]])
    c1 = np.array([[0.0, 1.0]])
    write("example1.json", dumps_model(ex1, Realization(a1, b1, c1, 1)))
    a1m = a1.copy()
    a1m[1, 0] = 0.0
    write("example1_modified.json", dumps_model(ex1, Realization(a1m, b1, c1, 1)))

    chain3 = frozenset({(0, 1), (1, 0), (1, 2), (2, 1)})
    write("example3.json", dumps_model(StructuralModel(3, (0, 1), (0, 2), (False, True), chain3)))
    write("example4.json", dumps_model(StructuralModel(2, (0,), (1,), (False,), frozenset({(1, 0), (1, 1)}))))

    full2 = frozenset({(0, 0), (0, 1), (1, 0), (1, 1)})
    platoon = StructuralModel(2, (0, 1), (1,), (False,), full2)
    a_p = np.array([[0.8, 0.1], [0.1, 0.8]])
    write("platoon.json", dumps_model(platoon, Realization(a_p, np.eye(2), np.array([[0.0, 1.0]]))))
    write("ieee14.json", dumps_model(ieee14()))

    # placement instances: X-sets {x1},{x2} and {x1,x2},{x3,x2}
    write("disjoint.json", dumps_model(StructuralModel(2, (0, 1))))
    write("shared.json", dumps_model(StructuralModel(3, (0, 2), (), (), frozenset({(1, 0), (1, 2)}))))
    write_json("disjoint_request.json", {"k": {"0": 1, "1": 1}, "candidates": [0, 1]})
    write_json("shared_request.json", {"k": {"0": 1, "1": 1}, "candidates": [0, 1, 2]})
    write_json("shared_protected_request.json",
               {"protected": True, "u_p": [0, 1], "k_max": 1, "candidates": [0, 1, 2]})
    write_json("zero_request.json", {"k": {"0": 0, "1": 0}, "candidates": [0, 1]})

    believed = a_p.copy()
    believed[1] = [0.11, 0.78]
    attacked = {"actuators": [0], "sensors": [0]}
    ramp = {"kind": "ramp", "slope": -1.0}
    for n, extra in enumerate(({}, {"believed": {"a": believed.tolist()}}, {}), start=1):
        policies = [
            {"name": "type1", "kind": "type1", "attacked": attacked, "active_actuator": 0,
             "payload": ramp, **extra},
            {"name": "type2", "kind": "type2", "attacked": attacked, "active_actuator": 0,
             "payload": ramp},
        ]
        scenario = {"model": "platoon.json", "x0": [0.0, 10.0], "u0": [-1.0, 2.0],
                    "horizon": 50, "k_start": 0, "policies": policies}
        if n == 3:
            scenario["u_changes"] = [{"k": 2, "actuator": 1, "delta": 0.1}]
        write_json(f"case{n}.scenario.json", scenario)


if __name__ == "__main__":
    main()
