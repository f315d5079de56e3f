"""Command-line front end.

Human output names components 1-based (``u1``, ``x2``, ``y1``); ``--json``
output uses 0-based ids.  Exit codes: 0 success, 2 unreadable input or bad
arguments, 3 validation failure, 4 infeasible placement target.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .attack import load_scenario, simulate, write_trace_csv
from .exact_index import delta_all
from .model import INF, ModelError, ParseError, load_model, value_to_json
from .placement import (
    InfeasiblePlacement,
    greedy_protected,
    greedy_unprotected,
    load_request,
    x_set,
)
from .robust_index import build_extended_graph, build_flow_network, delta_r

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_INFEASIBLE = 4


@dataclass
class RunReport:
    command: list
    input_sha256: str
    results: list = field(default_factory=list)
    lines: list = field(default_factory=list)  # human-readable rendering
    version: str = __version__
    elapsed_s: float | None = None

    def to_json(self) -> dict:
        data = {"command": self.command, "input_sha256": self.input_sha256,
                "results": self.results, "version": self.version}
        if self.elapsed_s is not None:
            data["elapsed_s"] = self.elapsed_s
        return data

    def render(self, as_json: bool) -> str:
        if as_json:
            return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"
        lines = list(self.lines)
        if self.elapsed_s is not None:
            lines.append(f"elapsed: {self.elapsed_s:.3f}s")
        return "\n".join(lines) + "\n"


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _set_json(cs) -> dict | None:
    return None if cs is None else cs.to_json()


def _states_label(states) -> str:
    return "{" + ",".join(f"x{j + 1}" for j in sorted(states)) + "}"


def _actuators(args, m) -> list:
    if args.actuator is None:
        return list(range(m.n_u))
    text = args.actuator.lower().lstrip("u")
    try:
        i = int(text) - 1
    except ValueError:
        raise ModelError(f"bad actuator {args.actuator!r}; use 1-based ids like 2 or u2") from None
    if not 0 <= i < m.n_u:
        raise ModelError(f"actuator {args.actuator} out of range (model has {m.n_u})")
    return [i]


def _seed(args) -> int:
    env = os.environ.get("SECIDX_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ModelError(f"SECIDX_SEED must be an integer, got {env!r}") from None
    return args.seed


def cmd_index_exact(args, report: RunReport) -> None:
    m, r = load_model(args.model)
    if r is None:
        raise ModelError("the model file carries no realization; the exact index needs numeric matrices")
    wanted = set(_actuators(args, m))
    reports = [rep for rep in delta_all(r, args.budget, _seed(args), args.jobs) if rep.component.index in wanted]
    for rep in reports:
        report.results.append({"actuator": rep.component.index, "value": value_to_json(rep.value),
                               "witness": _set_json(rep.witness), "borderline": rep.borderline,
                               "truncated": rep.truncated})
        note = "  (rank decision near tolerance)" if rep.borderline else ""
        report.lines.append(f"{rep.component}: {rep.describe()}{note}")


def _flow_dump(m, i) -> str:
    return build_flow_network(build_extended_graph(m), i).dump()


def cmd_index_robust(args, report: RunReport) -> None:
    m, _ = load_model(args.model)
    ids = _actuators(args, m)
    with ThreadPoolExecutor(max_workers=max(args.jobs, 1)) as pool:
        reports = list(pool.map(lambda i: delta_r(m, i), ids))
    for rep in reports:
        sep = None
        if rep.separator is not None:
            sep = {"states": sorted(j for k, j in rep.separator if k == "x"),
                   "sensors": sorted(j for k, j in rep.separator if k == "y")}
        report.results.append({"actuator": rep.component.index, "value": value_to_json(rep.value),
                               "witness": _set_json(rep.witness), "separator": sep})
        line = f"{rep.component}: {rep.describe()}"
        if rep.value is not INF:
            line += f"  separator {rep.separator_label()}"
        report.lines.append(line)
    if args.dump_graph:
        for i in ids:
            report.lines.append(f"# flow network for u{i + 1}")
            report.lines.append(_flow_dump(m, i).rstrip("\n"))


def cmd_dump_graph(args, report: RunReport) -> None:
    m, _ = load_model(args.model)
    for i in _actuators(args, m):
        net = build_flow_network(build_extended_graph(m), i)
        arcs = [{"src": list(a), "dst": list(b), "capacity": "inf" if net.is_infinite(c) else c}
                for a, b, c in net.arcs]
        report.results.append({"actuator": i, "arcs": arcs})
        report.lines.append(f"# flow network for u{i + 1}")
        report.lines.append(net.dump().rstrip("\n"))


def cmd_xset(args, report: RunReport) -> None:
    m, _ = load_model(args.model)
    for i in _actuators(args, m):
        xs = x_set(m, i)
        report.results.append({"actuator": i, "states": sorted(xs.states)})
        report.lines.append(f"u{i + 1}: {xs.label()}")


def cmd_place(args, report: RunReport) -> None:
    m, _ = load_model(args.model)
    inst, protected = load_request(args.request, m)
    if protected:
        states, value = greedy_protected(inst)
        report.results.append({"problem": "protected", "states": list(states), "value": value,
                               "k_max": inst.k_max, "u_p": list(inst.u_p)})
        report.lines += [f"protected sensors: {_states_label(states)}",
                         f"actuators covered: {value} of {len(inst.u_p)}",
                         "guarantee: value >= (1 - 1/e) * optimum"]
        return
    res = greedy_unprotected(inst)
    report.results.append({"problem": "unprotected", "placement": list(res.placement),
                           "states": list(res.states), "gain": res.gain, "target": inst.target,
                           "max_single_gain": res.max_single_gain, "certificate": res.certificate})
    report.lines += [f"sensors: {len(res.states)}",
                     f"placement: {_states_label(res.states)}",
                     f"gain: {res.gain} of {inst.target}",
                     f"certificate: size <= H({res.max_single_gain})={res.certificate:.6g} * optimum"]


def cmd_simulate(args, report: RunReport) -> None:
    scen = load_scenario(args.scenario)
    out = Path(args.out) if args.out else None
    for name, policy in scen.policies:
        trace = simulate(scen.realization, policy, scen.x0, scen.u_op, scen.horizon, scen.k_start)
        csv_path = None
        if out is not None:
            csv_path = out if len(scen.policies) == 1 else out.with_name(f"{out.stem}.{name}{out.suffix}")
            write_trace_csv(trace, csv_path)
        report.results.append({"policy": name, "kind": policy.kind.value,
                               "max_residual": trace.max_residual,
                               "csv": None if csv_path is None else str(csv_path)})
        report.lines.append(f"{name}: max |residual| = {trace.max_residual:.3e}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable report (0-based ids)")
    common.add_argument("--timing", action="store_true", help="include wall-clock time in the report")

    parser = argparse.ArgumentParser(prog="secidx", description="Actuator security indices.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index-exact", parents=[common], help="exact index from a realization")
    p.add_argument("model")
    p.add_argument("--actuator", help="1-based actuator id (default: all)")
    p.add_argument("--budget", type=int, help="largest attack set to try")
    p.add_argument("--seed", type=int, default=0, help="seed for rank sample points (SECIDX_SEED overrides)")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_index_exact, input="model")

    p = sub.add_parser("index-robust", parents=[common], help="robust index from the structure")
    p.add_argument("model")
    p.add_argument("--actuator")
    p.add_argument("--dump-graph", action="store_true", help="also print each flow network")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_index_robust, input="model")

    p = sub.add_parser("dump-graph", parents=[common], help="print the flow network of each actuator")
    p.add_argument("model")
    p.add_argument("--actuator")
    p.set_defaults(func=cmd_dump_graph, input="model")

    p = sub.add_parser("xset", parents=[common], help="states where a new sensor raises the robust index")
    p.add_argument("model")
    p.add_argument("--actuator")
    p.set_defaults(func=cmd_xset, input="model")

    p = sub.add_parser("place", parents=[common], help="greedy sensor placement")
    p.add_argument("model")
    p.add_argument("request")
    p.set_defaults(func=cmd_place, input="model")

    p = sub.add_parser("simulate", parents=[common], help="simulate attack scenarios")
    p.add_argument("scenario")
    p.add_argument("--out", help="CSV trace path (suffixed by policy name when several)")
    p.set_defaults(func=cmd_simulate, input="scenario")
    return parser


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    start = time.perf_counter()
    try:
        report = RunReport(argv, _sha256(getattr(args, args.input)))
        args.func(args, report)
    except (OSError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except InfeasiblePlacement as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ValueError as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if args.timing:
        report.elapsed_s = round(time.perf_counter() - start, 6)
    sys.stdout.write(report.render(args.json))
    return EXIT_OK
