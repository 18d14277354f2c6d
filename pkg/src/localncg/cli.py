"""Command-line front end.

Exit codes: 0 success (or every concept holds), 1 a concept is violated or a
replay fails, 2 bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import constructions as C
from .cost import GameConfig, Mode
from .dynamics import MoveRegime, Outcome, Scheduler, Trace, best_responses, run, verify_cycle
from .equilibrium import ALL_CONCEPTS, Concept, certify
from .errors import NCGError
from .experiments import EXPERIMENTS, to_csv
from .formulas import check_all
from .formulas import to_csv as formulas_csv
from .graph import Network


class InputError(Exception):
    pass


FAMILIES = ["line", "star", "clique", "balanced-clique", "cycle", "binary-tree", "h-tree",
            "tree-star", "gk-nontree", "ds-reduction", "kne-tree"]


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise InputError(f"family {args.family} needs --{' --'.join(missing)}")


def _build(args) -> tuple[Network, dict]:
    f = args.family
    meta: dict = {}
    if f in ("line", "star", "clique", "balanced-clique", "cycle"):
        _need(args, "n")
        fn = {"line": C.line, "star": C.star, "clique": C.clique,
              "balanced-clique": C.balanced_clique, "cycle": C.directed_cycle}[f]
        return fn(args.n), meta
    if f == "binary-tree":
        _need(args, "d")
        return C.complete_binary_tree(args.d), meta
    if f == "h-tree":
        _need(args, "d", "l")
        h = C.h_tree(args.d, args.l)
        return h.network, {"u": h.u, "v": h.v, "root": h.root}
    if f == "tree-star":
        _need(args, "d", "l")
        ts = C.tree_star(args.d, args.l)
        return ts.network, {"leaf": ts.leaf, "bridge": ts.bridge, "center": ts.center}
    if f == "gk-nontree":
        _need(args, "k")
        g = C.gk_nontree(args.k)
        meta = {"u": g.u}
        if g.alpha is not None:
            meta["alpha"] = f"{g.alpha.numerator}/{g.alpha.denominator}"
        return g.network, meta
    if f == "ds-reduction":
        _need(args, "graph")
        data = json.loads(Path(args.graph).read_text())
        r = C.ds_reduction((data["n"], [tuple(e) for e in data["edges"]]))
        return r.network, {"hub": r.hub, "alpha": "3/2"}
    _need(args, "d", "k")
    net, cfg = C.kne_tree_instance(args.d, args.k)
    return net, {"alpha": f"{cfg.alpha.numerator}/{cfg.alpha.denominator}", "k": cfg.k}


def _write(path: str | None, text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _load_network(path: str) -> Network:
    try:
        return Network.from_json(Path(path).read_text())
    except OSError as exc:
        raise InputError(str(exc)) from exc


def _config(args) -> GameConfig:
    try:
        return GameConfig(args.alpha, args.k, Mode(args.mode))
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise InputError(f"bad game parameters: {exc}") from exc


def cmd_generate(args) -> int:
    net, meta = _build(args)
    text = json.dumps(net.to_dict() | ({"meta": meta} if meta and args.meta else {}),
                      separators=(",", ":")) + "\n"
    _write(args.out, text)
    if args.dot:
        Path(args.dot).write_text(net.to_dot())
    if meta and args.out not in (None, "-"):
        print(json.dumps(meta), file=sys.stderr)
    return 0


def cmd_certify(args) -> int:
    net = _load_network(args.network)
    cfg = _config(args)
    concepts = [Concept(c) for c in args.concepts.split(",")] if args.concepts else list(ALL_CONCEPTS)
    report = certify(net, cfg, concepts, budget=args.budget)
    _write(args.out, report.to_json() + "\n")
    for v in report.verdicts.values():
        if not v.holds:
            print(f"{v.concept.value} violated: agent {v.agent}: {v.witness}", file=sys.stderr)
    return 0 if report.all_hold else 1


def _scheduler(args) -> Scheduler:
    if args.scheduler == "random":
        return Scheduler.random(args.seed)
    if args.scheduler == "script":
        if not args.script:
            raise InputError("--scheduler script needs --script")
        return Scheduler.from_script(int(x) for x in args.script.split(","))
    if args.scheduler == "max-gain":
        return Scheduler.max_gain()
    return Scheduler.round_robin()


def _replay_ok(trace: Trace) -> bool:
    if trace.outcome is Outcome.CYCLE:
        return verify_cycle(trace)
    net = trace.start
    for s in trace.steps:
        nxt = s.apply(net)
        if not any(r.apply(net) == nxt for r in best_responses(net, trace.config, trace.regime, s.agent)):
            return False
        net = nxt
    return True


def cmd_dynamics(args) -> int:
    if args.replay:
        try:
            trace = Trace.from_jsonl(Path(args.replay).read_text())
        except (OSError, ValueError, KeyError, IndexError) as exc:
            raise InputError(f"cannot read trace: {exc}") from exc
        ok = _replay_ok(trace)
        print("replay ok" if ok else "replay FAILED")
        return 0 if ok else 1
    if not args.network:
        raise InputError("dynamics needs a network file or --replay")
    net = _load_network(args.network)
    trace = run(net, _config(args), MoveRegime(args.regime), _scheduler(args), max_steps=args.budget)
    _write(args.out, trace.to_jsonl())
    print(f"{trace.outcome.value} after {len(trace.steps)} moves", file=sys.stderr)
    return 0


def cmd_experiment(args) -> int:
    if args.name not in EXPERIMENTS:
        raise InputError(f"unknown experiment {args.name!r}; choose from {', '.join(EXPERIMENTS)}")
    header, rows = EXPERIMENTS[args.name]()
    _write(args.out, to_csv(header, rows))
    return 0


def cmd_formulas(args) -> int:
    rows = check_all()
    _write(args.out, formulas_csv(rows))
    return 0


def _game_flags(p):
    p.add_argument("--alpha", default="3/1", help="edge price as p/q")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--mode", choices=["sum", "max"], default="sum")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="localncg", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="emit a named network family as JSON")
    g.add_argument("--family", required=True, choices=FAMILIES)
    for name in ("n", "d", "l", "k"):
        g.add_argument(f"--{name}", type=int)
    g.add_argument("--graph", help="plain graph JSON for ds-reduction")
    g.add_argument("--meta", action="store_true", help="embed role metadata in the JSON")
    g.add_argument("--out")
    g.add_argument("--dot", help="also write a DOT rendering here")
    g.set_defaults(fn=cmd_generate)

    c = sub.add_parser("certify", help="check equilibrium concepts")
    c.add_argument("network")
    _game_flags(c)
    c.add_argument("--concepts", help="comma list of NE,kNE,GE,kGE,ASE")
    c.add_argument("--budget", type=int, default=24)
    c.add_argument("--out")
    c.set_defaults(fn=cmd_certify)

    d = sub.add_parser("dynamics", help="run or replay improving-response dynamics")
    d.add_argument("network", nargs="?")
    _game_flags(d)
    d.add_argument("--regime", choices=[r.value for r in MoveRegime], default="k-bg")
    d.add_argument("--scheduler", choices=["round-robin", "random", "script", "max-gain"], default="round-robin")
    d.add_argument("--script", help="comma-separated agent order")
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--budget", type=int, default=10_000, help="maximum number of moves")
    d.add_argument("--replay", help="trace file to re-verify")
    d.add_argument("--out")
    d.set_defaults(fn=cmd_dynamics)

    e = sub.add_parser("experiment", help="run a canned scan and write CSV")
    e.add_argument("name")
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--out")
    e.set_defaults(fn=cmd_experiment)

    f = sub.add_parser("formulas", help="closed forms vs engine")
    f.add_argument("--check-all", action="store_true", required=True)
    f.add_argument("--out")
    f.set_defaults(fn=cmd_formulas)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (InputError, NCGError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
