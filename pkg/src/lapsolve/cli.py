"""Command-line interface: ``lapsolve {solve,certify,bench}``.

Exit status: 0 on success, 1 when the accuracy target or an audit is not
met, 2 for invalid input or configuration, 3 when the solver fails.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import audit
from .chebyshev import ChebyshevError
from .elimination import FactorizationError
from .generators import FAMILIES, bench_instance
from .graph import GraphError, laplacian_of
from .mmio import MatrixMarketError, read_matrix_market
from .reductions import NotPSDDDError, RangeError, reduce
from .solver import (ONE_SHOT_GAMMA, RECURSIVE_GAMMA, PlanError, RecursionPlan, SolverError,
                     _plain, recursive_solve)
from .support import DEFAULT_ORACLE_CAP, kappa_f_oracle

EXIT_OK, EXIT_TARGET, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2, 3
LOG_LEVELS = {"off": logging.CRITICAL + 1, "info": logging.INFO, "audit": logging.DEBUG}

log = logging.getLogger("lapsolve")


@dataclass
class RunConfig:
    command: str
    input: str = None
    rhs: str = None
    eps: float = 1e-8
    gamma: float = None
    depth: int = 1
    t: int = None
    oracle_cap: int = DEFAULT_ORACLE_CAP
    seed: int = 0
    format: str = "human"
    out: str = None
    timing: bool = True
    family: str = "grid2d"
    sizes: tuple = (10, 20, 30)

    def __post_init__(self):
        if not 0 < self.eps <= 0.5:
            raise ValueError(f"--eps must lie in (0, 0.5], got {self.eps}")
        if self.depth < 1:
            raise ValueError("--depth must be at least 1")
        if self.gamma is None:
            self.gamma = ONE_SHOT_GAMMA if self.depth == 1 else RECURSIVE_GAMMA
        if not 0 < self.gamma < 1:
            raise ValueError("--gamma must lie in (0, 1)")
        if self.t is not None and self.t < 1:
            raise ValueError("--t must be positive")

    def plan(self) -> RecursionPlan:
        return RecursionPlan(depth=self.depth, gamma=self.gamma, t=self.t,
                             oracle_cap=self.oracle_cap)


class Emitter:
    """Writes records as JSON lines or as indented ``key: value`` text."""

    def __init__(self, fmt, stream):
        self.fmt = fmt
        self.stream = stream

    def emit(self, record: dict):
        if self.fmt == "json-lines":
            self.stream.write(json.dumps(record, default=_plain) + "\n")
        else:
            self.stream.write(_human(record) + "\n")
        self.stream.flush()


def _human(record, indent=0) -> str:
    pad = "  " * indent
    lines = []
    for k, v in record.items():
        if isinstance(v, dict):
            lines.append(f"{pad}{k}:")
            lines.append(_human(v, indent + 1))
        elif isinstance(v, list) and v and isinstance(v[0], dict):
            lines.append(f"{pad}{k}:")
            for i, item in enumerate(v):
                lines.append(f"{pad}  [{i}]")
                lines.append(_human(item, indent + 2))
        elif isinstance(v, list) and len(v) > 8:
            head = ", ".join(_fmt(x) for x in v[:3])
            tail = ", ".join(_fmt(x) for x in v[-3:])
            lines.append(f"{pad}{k}: [{head}, ... {tail}] ({len(v)} values)")
        else:
            lines.append(f"{pad}{k}: {_fmt(v)}")
    return "\n".join(lines)


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, list):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def _error_record(command, code, exc):
    rec = {"record": "error", "command": command, "code": code, "message": str(exc)}
    line = getattr(exc, "line", None)
    if line is not None:
        rec["line"] = line
    return rec


def _load(cfg: RunConfig):
    if cfg.input is None:
        raise MatrixMarketError("<none>", 0, "--input is required")
    a, b, source = read_matrix_market(cfg.input, cfg.rhs, seed=cfg.seed)
    log.info("read %s: n=%d nnz=%d %s, rhs from %s", cfg.input, a.n, a.nnz,
             a.classification, source)
    return a, b


def _audit_levels(levels):
    for lvl in levels:
        for sub in lvl.levels():
            pre = sub.pre
            found = audit.size_budget(pre) + audit.edge_reduction(pre.records) + audit.dilation(pre)
            log.debug("audit level %d: |S|=%d budget=%g bound=%.6g violations=%d", sub.index,
                      len(pre.extra), pre.size_budget, pre.certificate.bound, len(found))
            for v in found:
                log.debug("audit violation: %s", v)


def solve_command(cfg: RunConfig, emit: Emitter) -> int:
    a, b = _load(cfg)
    keep = []
    start = time.perf_counter()
    x, report = recursive_solve(a, b, cfg.eps, cfg.plan(), keep=keep)
    wall = time.perf_counter() - start
    if log.isEnabledFor(logging.DEBUG):
        _audit_levels(keep)
    rec = {"record": "solve", "input": cfg.input, "status": "ok" if report.target_met else "target-not-met"}
    rec.update(report.to_dict())
    emit.emit(rec)
    if cfg.timing:
        emit.emit({"record": "timing", "wall_time": wall})
    return EXIT_OK if report.target_met else EXIT_TARGET


def certify_command(cfg: RunConfig, emit: Emitter) -> int:
    a, b = _load(cfg)
    systems, plan = reduce(a, b)
    from .precondition import precondition
    from .reductions import is_gremban_cover
    import math
    failed = False
    for k, s in enumerate(systems):
        if s.graph.m == 0:
            continue
        t = cfg.t or int(math.ceil(s.graph.m ** cfg.gamma))
        t = min(max(t, 1), s.n)
        cover = plan.gremban_applied and is_gremban_cover(s.graph)
        pre = precondition(s.graph, t, gremban=cover)
        checks = {
            "size_budget": audit.size_budget(pre),
            "edge_reduction": audit.edge_reduction(pre.records),
            "path_bound": audit.path_bound(pre.records, seed=cfg.seed),
            "dilation": audit.dilation(pre),
            "tau_sum": audit.tau_sum(pre.params),
        }
        rec = {"record": "certificate", "system": k}
        rec.update(pre.summary())
        rec["size_budget"] = pre.size_budget
        rec["gremban_cover_mode"] = bool(cover)
        rec["per_level"] = [{"level": st.level, "trees": st.trees, "settled": st.settled,
                             "sets": st.sets, "added": st.added, "phi_floored": st.phi_floored}
                            for st in pre.levels]
        if s.n <= cfg.oracle_cap:
            kf = kappa_f_oracle(laplacian_of(s.graph), pre.matrix(), cfg.oracle_cap)
            rec["oracle_kappa_f"] = kf
            checks["soundness"] = audit.certificate(pre, cfg.oracle_cap)
        else:
            rec["oracle_kappa_f"] = None
        rec["audits"] = {name: ("pass" if not v else v[:5]) for name, v in checks.items()}
        failed |= any(checks.values())
        emit.emit(rec)
    return EXIT_TARGET if failed else EXIT_OK


def bench_command(cfg: RunConfig, emit: Emitter) -> int:
    failed = False
    for size in cfg.sizes:
        a, b = bench_instance(cfg.family, size, seed=cfg.seed)
        keep = []
        row = {"record": "bench", "family": cfg.family, "size": size, "seed": cfg.seed}
        try:
            x, report = recursive_solve(a, b, cfg.eps, cfg.plan(), keep=keep)
        except (SolverError, PlanError, ChebyshevError, FactorizationError) as exc:
            row.update({"status": "solver-failure", "message": str(exc)})
            emit.emit(row)
            failed = True
            continue
        top = max(keep, key=lambda lv: lv.graph.n) if keep else None
        oracle = None
        if top is not None and top.graph.n <= cfg.oracle_cap:
            oracle = kappa_f_oracle(top.matrix, top.b, cfg.oracle_cap)
        row.update({
            "n": a.n,
            "m": int((a.nnz - a.n) // 2),
            "t": top.report.t if top else None,
            "extra_edges": report.extra_edges,
            "certificate_bound": report.certificate_bound,
            "oracle_kappa_f": oracle,
            "iterations": report.iterations,
            "residual": report.final_relative_residual,
            "target_met": report.target_met,
        })
        failed |= not report.target_met
        emit.emit(row)
    return EXIT_TARGET if failed else EXIT_OK


COMMANDS = {"solve": solve_command, "certify": certify_command, "bench": bench_command}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lapsolve", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--eps", type=float, default=1e-8, help="relative error target")
        sp.add_argument("--gamma", type=float, default=None,
                        help="t = ceil(m**gamma); default 3/13 for depth 1, (3-sqrt 5)/2 otherwise")
        sp.add_argument("--depth", type=int, default=1, help="recursion depth (1 = one-shot)")
        sp.add_argument("--t", type=int, default=None, help="override t at the top level")
        sp.add_argument("--oracle-cap", type=int, default=DEFAULT_ORACLE_CAP,
                        help="largest dimension for dense eigen-oracles")
        sp.add_argument("--seed", type=int, default=0, help="seed for random rhs and instances")
        sp.add_argument("--format", choices=("human", "json-lines"), default="human",
                        help="output record format")
        sp.add_argument("--out", default=None, help="write records here instead of stdout")

    s = sub.add_parser("solve", help="solve A x = b for a Matrix Market file")
    s.add_argument("--input", required=True, help="Matrix Market file")
    s.add_argument("--rhs", default=None, help="rhs file (default: <input stem>.rhs or random)")
    s.add_argument("--no-timing", dest="timing", action="store_false",
                   help="omit the wall-time record")
    common(s)
    c = sub.add_parser("certify", help="build preconditioners and audit their certificates")
    c.add_argument("--input", required=True, help="Matrix Market file")
    c.add_argument("--rhs", default=None)
    common(c)
    b = sub.add_parser("bench", help="solve generated instances and tabulate")
    b.add_argument("--family", choices=sorted(FAMILIES), default="grid2d")
    b.add_argument("--sizes", default="10,20,30", help="comma-separated instance sizes")
    common(b)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = os.environ.get("LAPSOLVE_LOG", "off").lower()
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    log.addHandler(handler)
    log.setLevel(LOG_LEVELS.get(level, LOG_LEVELS["off"]))
    stream = open(args.out, "w") if args.out else sys.stdout
    emit = Emitter(args.format, stream)
    try:
        kw = {k: getattr(args, k) for k in ("input", "rhs", "eps", "gamma", "depth", "t",
                                            "oracle_cap", "seed", "format", "out", "timing",
                                            "family") if hasattr(args, k)}
        if hasattr(args, "sizes"):
            kw["sizes"] = tuple(int(x) for x in args.sizes.split(",") if x.strip())
        try:
            cfg = RunConfig(command=args.command, **kw)
        except ValueError as exc:
            emit.emit(_error_record(args.command, "invalid-config", exc))
            return EXIT_INPUT
        try:
            return COMMANDS[args.command](cfg, emit)
        except NotPSDDDError as exc:
            emit.emit(_error_record(args.command, "not-psddd", exc))
            return EXIT_INPUT
        except RangeError as exc:
            emit.emit(_error_record(args.command, "rhs-not-in-range", exc))
            return EXIT_INPUT
        except MatrixMarketError as exc:
            emit.emit(_error_record(args.command, "malformed-input", exc))
            return EXIT_INPUT
        except (PlanError, GraphError, FileNotFoundError) as exc:
            emit.emit(_error_record(args.command, "invalid-input", exc))
            return EXIT_INPUT
        except (SolverError, ChebyshevError, FactorizationError) as exc:
            emit.emit(_error_record(args.command, "solver-failure", exc))
            return EXIT_SOLVER
    except BrokenPipeError:
        # reader went away (e.g. piped into head)
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 0
    finally:
        log.removeHandler(handler)
        if args.out:
            stream.close()


if __name__ == "__main__":
    sys.exit(main())
