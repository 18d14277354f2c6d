"""Canned experiment scans producing CSV-ready rows.

Each experiment is a list of independent points evaluated by a module-level
function, so scans can fan out over processes; rows are sorted before output.
"""

from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from fractions import Fraction

from .constructions import directed_cycle, kne_tree_instance, line, star
from .cost import GameConfig, Mode, format_alpha, poa_ratio
from .dynamics import (
    EIGHT_AGENT_PATTERN,
    SIX_AGENT_PATTERN,
    MoveRegime,
    caption_seeds,
    find_br_cycle,
    verify_cycle,
)
from .equilibrium import check_ball_growth, is_k_ne
from .errors import BudgetExhausted
from .formulas import check_all


def threads() -> int:
    try:
        return max(1, int(os.environ.get("NCG_THREADS", "1")))
    except ValueError:
        return 1


def parallel_map(fn, items: list) -> list:
    workers = min(threads(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# --- points ----------------------------------------------------------------------


def _line_point(args):
    n, alpha = args
    net, cfg = line(n), GameConfig(alpha, 1)
    return [n, format_alpha(cfg.alpha), 1, int(is_k_ne(net, cfg).holds), _ratio(poa_ratio(net, cfg))]


def _tree_point(args):
    d, k = args
    net, cfg = kne_tree_instance(d, k)
    return [d, k, net.n, format_alpha(cfg.alpha), int(is_k_ne(net, cfg).holds), _ratio(poa_ratio(net, cfg))]


def _cycle_point(args):
    name, n, k, alpha, regime, budget = args
    cfg = GameConfig(alpha, k)
    pattern = {"six": SIX_AGENT_PATTERN, "eight": EIGHT_AGENT_PATTERN}[name]
    try:
        res = find_br_cycle(n, cfg, MoveRegime(regime), budget, seeds=caption_seeds(pattern),
                            hint=pattern.script, max_depth=2 * len(pattern.script), per_seed_budget=2000)
    except BudgetExhausted:
        res = None
    if res is None:
        return [n, k, format_alpha(cfg.alpha), regime, 0, "", "", "", 0]
    return [n, k, format_alpha(cfg.alpha), regime, 1, res.seed_index, res.explored,
            res.trace.period, int(verify_cycle(res.trace))]


def _ball_point(args):
    label, net, cfg = args
    v = is_k_ne(net, cfg, budget=32)
    if not v.holds:
        return [label, net.n, format_alpha(cfg.alpha), cfg.k, 0, 0, 0, ""]
    rep = check_ball_growth(net, cfg, certified=True)
    passed = sum(c.holds for c in rep.checks)
    dich = ";".join(f"d={d}:{int(a)}{int(b)}" for d, (a, b) in sorted(rep.dichotomy.items()))
    return [label, net.n, format_alpha(cfg.alpha), cfg.k, 1, len(rep.checks), passed, dich]


def _ratio(x: Fraction) -> str:
    return f"{format_alpha(x)}"


# --- experiments -------------------------------------------------------------------


def poa_line_scan(ns=range(4, 15), alphas=("3/1",)):
    header = ["n", "alpha", "k", "is_k_ne", "poa"]
    pts = [(n, a) for n in ns for a in alphas]
    return header, parallel_map(_line_point, pts)


def poa_binary_tree_scan(depths=range(3, 7), ks=(2, 3)):
    header = ["d", "k", "n", "alpha", "is_k_ne", "poa"]
    pts = [(d, k) for d in depths for k in ks if k <= d]
    return header, parallel_map(_tree_point, pts)


def formula_grid():
    header = ["formula", "params", "closed_form", "oracle", "match"]
    rows = [[r.name, " ".join(map(str, r.params)), r.closed_form, r.oracle, int(r.match)] for r in check_all()]
    return header, rows


def br_cycle_hunt(budget: int = 1_000_000):
    header = ["n", "k", "alpha", "regime", "found", "seed_index", "explored", "period", "verified"]
    pts = [("six", 6, 2, "5/2", "k-bg", budget), ("six", 6, 2, "5/2", "k-gbg", budget),
           ("eight", 8, 3, "7/2", "k-gbg", budget)]
    return header, parallel_map(_cycle_point, pts)


def ball_growth_scan():
    header = ["instance", "n", "alpha", "k", "is_k_ne", "checks", "passed", "dichotomy"]
    pts = []
    for n in (6, 10, 16):
        for k in (2, 4, 6):
            pts.append((f"star-{n}", star(n), GameConfig("3/2", k)))
    for d, k in ((3, 2), (3, 3), (4, 4)):
        net, cfg = kne_tree_instance(d, k)
        pts.append((f"binary-tree-{d}", net, cfg))
    for n in (5, 7):
        pts.append((f"cycle-{n}", directed_cycle(n), GameConfig("3/2", 2, Mode.SUM)))
    return header, parallel_map(_ball_point, pts)


EXPERIMENTS = {
    "poa-line-scan": poa_line_scan,
    "poa-binary-tree-scan": poa_binary_tree_scan,
    "formula-grid": formula_grid,
    "br-cycle-hunt": br_cycle_hunt,
    "ball-lemma-scan": ball_growth_scan,
}


def _row_key(row):
    return [(0, x, "") if isinstance(x, int) else (1, 0, str(x)) for x in row]


def to_csv(header, rows, timestamp: bool = True) -> str:
    buf = io.StringIO()
    if timestamp:
        buf.write(f"# generated {datetime.now(timezone.utc).isoformat(timespec='seconds')}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in sorted(rows, key=_row_key):
        w.writerow(row)
    return buf.getvalue()
