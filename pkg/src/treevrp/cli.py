"""Command-line front end: gen, solve, verify, compare, check-cr.

Exit codes are a stable contract:
  0  success (check-cr: witness found)
  1  check-cr found no witness / compare saw a ratio above 1+epsilon
  2  parameter error or infeasible request
  3  I/O error (missing or unwritable file)
  4  parse error in an input file
With --format structured, every command prints a JSON run record with the
fields command, instance_digest, parameters, results, exit_status.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time

from . import instances, oracle
from .dp_capacity import CapacityParams, decide_capacity, ptas_capacity
from .dp_makespan import SolverParams, decide, ptas
from .solution import load_solution, save_solution, solution_to_dict
from .tree_model import InstanceError, load_instance, save_instance

EXIT_OK = 0
EXIT_NO_WITNESS = 1
EXIT_PARAM = 2
EXIT_IO = 3
EXIT_PARSE = 4


def _digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _read(path: str) -> bytes:
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise _CliError(EXIT_IO, f"cannot read {path}: {exc}") from exc


def _write(path: str, text: str):
    try:
        if path == "-":
            sys.stdout.write(text)
        else:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
    except OSError as exc:
        raise _CliError(EXIT_IO, f"cannot write {path}: {exc}") from exc


class _CliError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _emit_record(args, command, digest, parameters, results, status):
    if getattr(args, "format", "text") == "structured":
        record = {
            "command": command,
            "instance_digest": digest,
            "parameters": parameters,
            "results": results,
            "exit_status": status,
        }
        print(json.dumps(record, indent=2))


def _load_tree(path):
    data = _read(path)
    try:
        return load_instance(data), _digest(data)
    except InstanceError as exc:
        raise _CliError(EXIT_PARSE, f"cannot parse {path}: {exc}") from exc


def cmd_gen(args) -> int:
    try:
        if args.kind == "counterexample":
            params = instances.CounterexampleParams(
                l=args.l,
                path_len=args.path_len,
                side_len=args.side_len,
                main_len=args.main_len,
                tau=args.tau,
            )
            tree = instances.gen_counterexample(params)
        else:
            tree = instances.gen_random(
                seed=args.seed, n_clients=args.n, max_len=args.max_len, shape=args.kind
            )
    except ValueError as exc:
        raise _CliError(EXIT_PARAM, str(exc)) from exc
    text = save_instance(tree)
    _write(args.out, text)
    _emit_record(
        args,
        "gen",
        _digest(text.encode()),
        {k: v for k, v in vars(args).items() if k != "func"},
        {"vertices": len(tree.children), "clients": len(tree.clients)},
        EXIT_OK,
    )
    return EXIT_OK


def cmd_solve(args) -> int:
    tree, digest = _load_tree(args.instance)
    t0 = time.perf_counter()
    try:
        if args.capacity is not None:
            if args.budget is not None:
                params = CapacityParams.make(
                    args.epsilon,
                    args.capacity,
                    k_length=args.budget,
                    eps_hat=args.eps_hat,
                    delta=args.delta,
                    theta_q=args.theta,
                )
                sol = decide_capacity(tree, params)
            else:
                sol = ptas_capacity(
                    tree,
                    args.capacity,
                    args.epsilon,
                    eps_hat=args.eps_hat,
                    delta=args.delta,
                    theta_q=args.theta,
                )
        else:
            if args.k is None:
                raise ValueError("makespan mode needs -k")
            if args.load_bound is not None:
                params = SolverParams.make(
                    args.epsilon,
                    args.k,
                    args.load_bound,
                    eps_hat=args.eps_hat,
                    delta=args.delta,
                    theta=args.theta,
                )
                sol = decide(tree, params)
            else:
                sol = ptas(
                    tree,
                    args.k,
                    args.epsilon,
                    eps_hat=args.eps_hat,
                    delta=args.delta,
                    theta=args.theta,
                )
    except ValueError as exc:
        raise _CliError(EXIT_PARAM, str(exc)) from exc
    elapsed = time.perf_counter() - t0
    if sol is None:
        print("infeasible: no solution under the given bounds", file=sys.stderr)
        _emit_record(args, "solve", digest, _solve_params(args), {"feasible": False}, EXIT_PARAM)
        return EXIT_PARAM
    sol.counters["time_s"] = round(elapsed, 6)
    _write(args.out, save_solution(sol))
    _emit_record(
        args,
        "solve",
        digest,
        _solve_params(args),
        {"feasible": True, "makespan": sol.makespan, "total_length": sol.total_length},
        EXIT_OK,
    )
    return EXIT_OK


def _solve_params(args) -> dict:
    keys = ("k", "epsilon", "theta", "delta", "eps_hat", "capacity", "budget", "load_bound")
    return {k: getattr(args, k, None) for k in keys}


def cmd_verify(args) -> int:
    tree, digest = _load_tree(args.instance)
    data = _read(args.solution)
    try:
        sol = load_solution(data)
    except (ValueError, KeyError) as exc:
        raise _CliError(EXIT_PARSE, f"cannot parse {args.solution}: {exc}") from exc
    report = oracle.verify(tree, sol, k=args.k, capacity=args.capacity)
    status = EXIT_OK if report.ok else EXIT_PARAM
    if not report.ok:
        print(f"verification failed: {report.first_violation}", file=sys.stderr)
    else:
        print("ok")
    _emit_record(
        args,
        "verify",
        digest,
        {"k": args.k, "capacity": args.capacity},
        {"ok": report.ok, "violations": report.violations},
        status,
    )
    return status


def cmd_compare(args) -> int:
    rows = []
    worst_ratio = 0.0
    eps = float(args.epsilon)
    for seed in range(args.seeds):
        tree = instances.gen_random(seed=seed, n_clients=args.n, max_len=args.max_len)
        t0 = time.perf_counter()
        sol = ptas(tree, args.k, args.epsilon)
        elapsed = time.perf_counter() - t0
        base = oracle.greedy_baseline(tree, args.k)
        if len(tree.clients) <= oracle.MAX_EXACT_CLIENTS:
            exact = oracle.exact_makespan(tree, args.k).value
            ratio = sol.makespan / exact if exact else 1.0
            worst_ratio = max(worst_ratio, ratio)
            exact_s, ratio_s = str(exact), f"{ratio:.4f}"
        else:
            exact_s, ratio_s = "-", "-"
        roundups = max((t.roundups for t in sol.tours), default=0)
        rows.append(
            (
                seed,
                exact_s,
                sol.makespan,
                ratio_s,
                base.makespan,
                roundups,
                f"{elapsed*1000:.1f}ms",
            )
        )
    header = ("seed", "exact", "ptas", "ratio", "greedy", "roundups", "time")
    widths = [max(len(str(r[i])) for r in rows + [header]) for i in range(len(header))]
    print("  ".join(h.ljust(w) for h, w in zip(header, widths)))
    for r in rows:
        print("  ".join(str(v).ljust(w) for v, w in zip(r, widths)))
    status = EXIT_OK if worst_ratio <= 1 + eps + 1e-12 else EXIT_NO_WITNESS
    _emit_record(
        args,
        "compare",
        "",
        {"seeds": args.seeds, "n": args.n, "k": args.k, "epsilon": str(args.epsilon)},
        {"worst_ratio": worst_ratio},
        status,
    )
    return status


def cmd_check_cr(args) -> int:
    tree, digest = _load_tree(args.instance)
    try:
        witness = instances.check_cr(tree, args.tau)
    except ValueError as exc:
        raise _CliError(EXIT_PARAM, str(exc)) from exc
    if witness is None:
        print("no CR set exists for this threshold")
        status = EXIT_NO_WITNESS
        results = {"witness": None}
    else:
        members = [m.describe() for m in witness.members]
        print("witness: " + "; ".join(members))
        status = EXIT_OK
        results = {"witness": members}
    _emit_record(args, "check-cr", digest, {"tau": args.tau}, results, status)
    return status


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="treevrp", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate an instance")
    g.add_argument("--kind", choices=["random", "caterpillar", "star", "counterexample"],
                   default="random")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--n", type=int, default=8, help="number of clients")
    g.add_argument("--max-len", type=int, default=20, dest="max_len")
    g.add_argument("--l", type=int, default=5)
    g.add_argument("--path-len", type=int, default=1, dest="path_len")
    g.add_argument("--side-len", type=int, default=4, dest="side_len")
    g.add_argument("--main-len", type=int, default=10, dest="main_len")
    g.add_argument("--tau", type=int, default=10)
    g.add_argument("-o", "--out", default="-")
    g.add_argument("--format", choices=["text", "structured"], default="text")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="solve an instance")
    s.add_argument("instance")
    s.add_argument("-k", type=int, default=None, help="number of vehicles (makespan mode)")
    s.add_argument("--epsilon", default="0.25")
    s.add_argument("--theta", default=None, help="bucket width fraction override")
    s.add_argument("--delta", default=None)
    s.add_argument("--eps-hat", default=None, dest="eps_hat")
    s.add_argument("--capacity", type=int, default=None, help="per-tour client bound Q")
    s.add_argument("--budget", type=int, default=None, help="total-length budget (capacity mode)")
    s.add_argument("--load-bound", type=int, default=None, dest="load_bound",
                   help="fixed D: run the decision procedure instead of the search")
    s.add_argument("-o", "--out", default="-")
    s.add_argument("--format", choices=["text", "structured"], default="text")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="verify a solution file against an instance")
    v.add_argument("instance")
    v.add_argument("solution")
    v.add_argument("-k", type=int, default=None)
    v.add_argument("--capacity", type=int, default=None)
    v.add_argument("--format", choices=["text", "structured"], default="text")
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("compare", help="ptas vs greedy vs exact over seeded instances")
    c.add_argument("--seeds", type=int, default=10)
    c.add_argument("--n", type=int, default=8)
    c.add_argument("--max-len", type=int, default=20, dest="max_len")
    c.add_argument("-k", type=int, default=2)
    c.add_argument("--epsilon", default="0.25")
    c.add_argument("--format", choices=["text", "structured"], default="text")
    c.set_defaults(func=cmd_compare)

    cc = sub.add_parser("check-cr", help="search for a cover-partition witness")
    cc.add_argument("instance")
    cc.add_argument("--tau", type=int, required=True)
    cc.add_argument("--format", choices=["text", "structured"], default="text")
    cc.set_defaults(func=cmd_check_cr)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
