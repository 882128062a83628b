"""Command-line interface.

Exit codes: 0 success, 1 failed verification, 2 configuration error.
"""
from __future__ import annotations

import argparse
import csv
import inspect
import io
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import suites
from .characters import character_kernel, enumerate_characters, find_character
from .coxeter import generate_group, group_csv_rows, load_family
from .errors import ConfigError, ReflectKernelError
from .ibvp import INITIAL_DATA, initial_datum, solve_heat
from .kernels import (BaseKernel, SymmetrizedKernel, fill_grid, polar_grid, symmetrized_eval,
                      tensor_grid)

SEED_ENV = "REFLECT_KERNEL_SEED"


# --- parsing helpers ------------------------------------------------------------


def parse_floats(text, what="value"):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse {what} {text!r} as comma-separated numbers") from None


def parse_ints(text, what="value"):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse {what} {text!r} as comma-separated integers") from None


def load_json_text(text, source="<inline>"):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {source} at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def system_document(args):
    """The root-system JSON document selected by the flags."""
    if args.system:
        src = args.system.strip()
        if src.startswith("{"):
            doc = load_json_text(src)
        else:
            path = Path(src)
            if not path.is_file():
                raise ConfigError(f"system file {src!r} not found")
            doc = load_json_text(path.read_text(), src)
        if not isinstance(doc, dict):
            raise ConfigError("system document must be a JSON object")
        return doc
    if args.family == "dihedral":
        ns = parse_ints(args.n, "--n") if args.n else []
        if len(ns) != 1:
            raise ConfigError("--family dihedral needs a single --n")
        return {"family": "dihedral", "n": ns[0]}
    if args.family in ("orthogonal", "trivial"):
        if args.d is None:
            raise ConfigError(f"--family {args.family} needs --d")
        doc = {"family": args.family, "d": args.d}
        if args.family == "orthogonal" and args.J:
            doc["J"] = parse_ints(args.J, "--J")
        return doc
    return None


def build_group(args, required=True):
    doc = system_document(args)
    if doc is None:
        if required:
            raise ConfigError("select a system with --system or --family")
        return None
    return generate_group(load_family(doc))


def resolve_seed(value):
    if value is not None:
        return value
    env = os.environ.get(SEED_ENV)
    if env is None or env == "":
        return 0
    try:
        return int(env)
    except ValueError:
        raise ConfigError(f"{SEED_ENV}={env!r} is not an integer") from None


def parse_params(text):
    """``name:key=v;key=v`` into ``(name, {key: value})``; vectors stay comma-separated."""
    name, _, rest = text.partition(":")
    params = {}
    for item in filter(None, rest.split(";")):
        key, eq, val = item.partition("=")
        if not eq:
            raise ConfigError(f"bad parameter {item!r}; expected key=value")
        vals = parse_floats(val, key)
        params[key.strip()] = vals[0] if len(vals) == 1 else vals
    return name.strip(), params


def grid_nodes(group, spec):
    """``tensor:lo:hi:count`` (same axis for every coordinate) or ``polar:r0:r1:nr:nangles``."""
    parts = spec.split(":")
    try:
        if parts[0] == "tensor" and len(parts) == 4:
            lo, hi, cnt = float(parts[1]), float(parts[2]), int(parts[3])
            axis = np.linspace(lo, hi, cnt)
            return tensor_grid(group.root_system, [axis] * group.dimension)
        if parts[0] == "polar" and len(parts) == 5:
            r0, r1, nr, na = float(parts[1]), float(parts[2]), int(parts[3]), int(parts[4])
            return polar_grid(group.root_system, np.linspace(r0, r1, nr), na)
    except ValueError:
        pass
    raise ConfigError(f"bad grid spec {spec!r}; use tensor:lo:hi:count or polar:r0:r1:nr:nangles")


def emit(text, args):
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def dump_json(obj):
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _rows_to_csv(rows):
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


# --- subcommands ------------------------------------------------------------------


def cmd_group(args):
    group = build_group(args)
    rows = group_csv_rows(group)
    if args.format == "json":
        keys = rows[0]
        emit(dump_json([dict(zip(keys, r)) for r in rows[1:]]), args)
    else:
        emit(_rows_to_csv(rows), args)
    return 0


def cmd_homs(args):
    group = build_group(args)
    chars = enumerate_characters(group)
    if args.format == "json":
        emit(dump_json([{"name": c.name, "simple_values": list(c.simple_values),
                         "kernel_size": int(len(character_kernel(c))),
                         "values": [int(v) for v in c.values]} for c in chars]), args)
    else:
        rows = [["name", "simple_values", "kernel_size"]]
        rows += [[c.name, " ".join(f"{v:+d}" for v in c.simple_values), str(len(character_kernel(c)))]
                 for c in chars]
        emit(_rows_to_csv(rows), args)
    return 0


def _kernel(args, group):
    chi = find_character(group, args.character)
    if args.base == "heat":
        if args.t is None:
            raise ConfigError("--t is required for the heat kernel")
        base = BaseKernel("heat", group.dimension, args.t)
    else:
        if args.lam is None:
            raise ConfigError("--lam is required for the resolvent kernel")
        base = BaseKernel("resolvent3d", group.dimension, args.lam)
    return SymmetrizedKernel(base, group, chi), chi


def _point(text, group, flag):
    p = np.array(parse_floats(text, flag))
    if p.shape != (group.dimension,):
        raise ConfigError(f"{flag} needs {group.dimension} coordinates")
    return p


def cmd_kernel(args):
    group = build_group(args)
    kernel, chi = _kernel(args, group)
    x = _point(args.x, group, "--x")
    y = _point(args.y, group, "--y")
    value = symmetrized_eval(kernel, x, y)
    if args.format == "json":
        emit(dump_json({"character": chi.name, "base": args.base, "parameter": kernel.base.parameter,
                        "x": x.tolist(), "y": y.tolist(), "value": float(value)}), args)
    else:
        emit(f"{float(value)!r}\n", args)
    return 0


def _field_output(field, args):
    emit(dump_json(field.to_json()) if args.format == "json" else field.to_csv(), args)


def cmd_grid(args):
    group = build_group(args)
    kernel, chi = _kernel(args, group)
    y = _point(args.y, group, "--y")
    nodes = grid_nodes(group, args.grid)
    meta = {"system": suites.system_label(group.root_system), "character": chi.name,
            "base": args.base, "parameter": repr(kernel.base.parameter), "y": args.y,
            "seed": str(args.seed)}
    field = fill_grid(nodes, lambda p: symmetrized_eval(kernel, p, y), meta, threads=args.threads)
    _field_output(field, args)
    return 0


def cmd_solve(args):
    group = build_group(args)
    chi = find_character(group, args.character)
    name, params = parse_params(args.f)
    f = initial_datum(name, group.dimension, **params)
    nodes = grid_nodes(group, args.grid)
    meta = {"system": suites.system_label(group.root_system), "character": chi.name, "t": repr(args.t),
            "f": args.f, "seed": str(args.seed)}

    def u(points):
        return np.array([solve_heat(group, chi, f, args.t, p) for p in points])

    _field_output(fill_grid(nodes, u, meta, threads=args.threads), args)
    return 0


def _suite_kwargs(fn, args, group):
    accepted = inspect.signature(fn).parameters
    kw = {"seed": args.seed}
    if group is not None and "systems" in accepted:
        kw["systems"] = [group]
    if args.n and "orders" in accepted:
        kw["orders"] = tuple(parse_ints(args.n, "--n"))
    for name in ("samples", "steps", "count"):
        val = getattr(args, name, None)
        if val is not None and name in accepted:
            kw[name] = val
    if "threads" in accepted:
        kw["threads"] = args.threads
    return kw


def _run_suites(args, table):
    names = args.suite or list(table)
    unknown = [s for s in names if s not in table]
    if unknown:
        raise ConfigError(f"unknown suite(s) {unknown}; available: {', '.join(table)}")
    group = build_group(args, required=False)
    entries = []
    for name in names:
        fn = table[name]
        for e in fn(**_suite_kwargs(fn, args, group)):
            entries.append(dict(e, suite=name))
    ok = all(e["pass"] for e in entries)
    report = {"suites": names, "seed": args.seed, "threads": args.threads, "results": entries, "pass": ok}
    emit(dump_json(report), args)
    return 0 if ok else 1


def cmd_verify(args):
    return _run_suites(args, suites.VERIFY_SUITES)


def cmd_checks(args):
    return _run_suites(args, suites.CHECK_SUITES)


# --- parser ---------------------------------------------------------------------


def _system_flags(p):
    g = p.add_argument_group("system")
    g.add_argument("--system", help="root-system JSON file or inline JSON object")
    g.add_argument("--family", choices=("dihedral", "orthogonal", "trivial"))
    g.add_argument("--n", help="dihedral order (comma list for suites)")
    g.add_argument("--d", type=int, help="dimension")
    g.add_argument("--J", help="comma-separated mirror axes (1-based) for orthogonal systems")


def _common(p, fmt=("csv", "json")):
    p.add_argument("--format", choices=fmt, default=fmt[0])
    p.add_argument("--output", help="write to this file instead of stdout")
    p.add_argument("--seed", type=int, default=None, help=f"random seed (default ${SEED_ENV} or 0)")
    p.add_argument("--threads", type=int, default=1)


def _kernel_flags(p):
    p.add_argument("--character", default="trivial")
    p.add_argument("--base", choices=("heat", "resolvent3d"), default="heat")
    p.add_argument("--t", type=float)
    p.add_argument("--lam", type=float)


def build_parser():
    parser = argparse.ArgumentParser(prog="reflect-kernel",
                                     description="Reflection groups, chamber heat kernels and their checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("group", help="dump the reflection group")
    _system_flags(p)
    _common(p)
    p.set_defaults(func=cmd_group)

    p = sub.add_parser("homs", help="list the sign characters")
    _system_flags(p)
    _common(p)
    p.set_defaults(func=cmd_homs)

    p = sub.add_parser("kernel", help="evaluate a symmetrized kernel at (x, y)")
    _system_flags(p)
    _common(p)
    _kernel_flags(p)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("grid", help="kernel K(., y) on a chamber grid")
    _system_flags(p)
    _common(p)
    _kernel_flags(p)
    p.add_argument("--y", required=True)
    p.add_argument("--grid", required=True, help="tensor:lo:hi:count or polar:r0:r1:nr:nangles")
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("solve", help="heat solution u(t, .) on a chamber grid")
    _system_flags(p)
    _common(p)
    p.add_argument("--character", default="trivial")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--f", required=True, help=f"initial datum name[:key=v;...], one of {', '.join(INITIAL_DATA)}")
    p.add_argument("--grid", required=True)
    p.set_defaults(func=cmd_solve)

    for name, table, func in (("verify", suites.VERIFY_SUITES, cmd_verify),
                              ("checks", suites.CHECK_SUITES, cmd_checks)):
        p = sub.add_parser(name, help=f"run {name} suites and print a JSON report")
        _system_flags(p)
        _common(p, fmt=("json",))
        p.add_argument("--suite", action="append", help=f"suite name (repeatable): {', '.join(table)}")
        p.add_argument("--samples", type=int, help="Monte-Carlo sample count")
        p.add_argument("--steps", type=int, help="time steps for killed paths")
        p.add_argument("--count", type=int, help="random configurations per case")
        p.set_defaults(func=func)
    return parser


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.seed = resolve_seed(args.seed)
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        return args.func(args)
    except ReflectKernelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
