"""Acceptance checks, one test per criterion.

Each test prints a ``criterion N PASS/FAIL`` line (also collected into the
terminal summary).  Runtime limits are asserted where a criterion states one.
"""

import random
import time
from fractions import Fraction

import networkx as nx
from corpus import corpus, min_dominating_set_size, random_network, random_tree

from conftest import criterion
from localncg.cli import main
from localncg.constructions import balanced_clique, clique, directed_cycle, ds_reduction, kne_tree_instance, tree_star
from localncg.cost import GameConfig, Mode, agent_cost, distance_cost, opt_cost, poa_ratio, social_cost
from localncg.dynamics import (
    EIGHT_AGENT_PATTERN,
    SIX_AGENT_PATTERN,
    MoveRegime,
    Outcome,
    caption_seeds,
    find_br_cycle,
    run,
    verify_cycle,
)
from localncg.equilibrium import Scope, approx_factor, is_ge, is_k_ge, is_k_ne, is_ne
from localncg.formulas import CLOSED_FORMS, after_buy_uz_dist_oracle, check_all, delta_oracle, within_diam_bound
from localncg.graph import diameter
from localncg.moves import MoveKind, _current_scaled, best_greedy_move, best_k_local_response, greedy_move_costs

CHAIN_ALPHAS = ("1/2", "3/2", "5/2")
APPROX_ALPHAS = ("1/2", "3/2", "5/2", "4")
CYCLE_BUDGET = 10**7

# certified k-NE networks (k >= 2) collected by criteria 2 and 4 for criterion 9
_CERTIFIED: dict[int, list] = {}


def _certified_kne_trees():
    out = []
    for d in (3, 4):
        for k in (2, 3):
            net, cfg = kne_tree_instance(d, k)
            out.append((net, cfg, bool(is_k_ne(net, cfg))))
    return out


_VERDICTS: list = []


def corpus_verdicts():
    """Every connected annotated network on at most five agents with its verdicts (cached)."""
    if _VERDICTS:
        return _VERDICTS
    rows = _VERDICTS
    for net in corpus(5):
        for a in CHAIN_ALPHAS:
            ne, ge = is_ne(net, a).holds, is_ge(net, a).holds
            ks = {}
            for k in (1, 2, 3):
                cfg = GameConfig(a, k)
                ks[k] = (is_k_ne(net, cfg).holds, is_k_ge(net, cfg).holds)
            rows.append((net, a, ne, ge, ks))
    return rows


def test_criterion_01_formula_oracles():
    with criterion(1, "closed forms and purchase-gain oracle match the BFS engine"):
        t0 = time.perf_counter()
        rows = check_all(depths=(2, 4, 6), with_delta=True)
        elapsed = time.perf_counter() - t0
        names = {r.name for r in rows}
        assert set(CLOSED_FORMS) <= names
        bad = [r for r in rows if r.name in CLOSED_FORMS and not r.match]
        assert not bad, bad
        special = [r for r in rows if r.name == "delta_special"]
        # two grid points per depth have l >= 2^(d+1); k=2 at every depth, k=3 for d >= 4
        assert len(special) == 10
        for r in special:
            d, k, l = r.params
            n = 2 ** (d + 1) + l + 1
            assert r.oracle == (n - 3 if k == 2 else 2 * (n - 7))
        assert elapsed < 10, f"took {elapsed:.1f}s"


def test_criterion_02_binary_tree_equilibria(tmp_path):
    with criterion(2, "binary-tree instances certify k-NE and PoA rises with depth"):
        t0 = time.perf_counter()
        trees = _certified_kne_trees()
        assert all(ok for _, _, ok in trees)
        _CERTIFIED[2] = [(net, cfg) for net, cfg, ok in trees if ok]
        for net, cfg, _ in trees:
            path = tmp_path / f"t{net.n}-{cfg.k}.json"
            path.write_text(net.to_json())
            code = main(["certify", str(path), "--alpha", str(cfg.alpha),
                         "--k", str(cfg.k), "--concepts", "kNE", "--out", str(tmp_path / "r.json")])
            assert code == 0
        ratios = [poa_ratio(*kne_tree_instance(d, 2)) for d in (3, 4, 5)]
        assert ratios[0] < ratios[1] < ratios[2], ratios
        assert time.perf_counter() - t0 < 300


def test_criterion_03_tree_star_locality_gap():
    with criterion(3, "tree-star is k-GE at alpha = Delta, improving global purchase, factor grows"):
        t0 = time.perf_counter()
        factors = {}
        for d in (4, 6):
            ts = tree_star(d, 3**d)
            delta = delta_oracle(ts, 2)
            cfg = GameConfig(delta, 2)
            assert is_k_ge(ts.network, cfg)
            cur = agent_cost(ts.network, cfg, ts.leaf)
            after = cfg.alpha + after_buy_uz_dist_oracle(d, 3**d)
            assert after < cur
            move, cost = best_greedy_move(ts.network, cfg, ts.leaf, None)
            assert move.kind is MoveKind.BUY and move.target == ts.center and cost == after
            factors[d] = approx_factor(ts.network, cfg, Scope.GLOBAL_GREEDY)
        assert factors[6] > factors[4] > 1, factors
        assert time.perf_counter() - t0 < 300


def test_criterion_04_inclusion_chain():
    with criterion(4, "NE => kNE => kGE and NE => GE => kGE on every network with n <= 5"):
        t0 = time.perf_counter()
        rows = corpus_verdicts()
        elapsed = time.perf_counter() - t0
        violations = []
        certified = []
        for net, a, ne, ge, ks in rows:
            for k, (kne, kge) in ks.items():
                if (ne and not kne) or (kne and not kge) or (ne and not ge) or (ge and not kge):
                    violations.append((net, a, k))
                if kne and k >= 2:
                    certified.append((net, GameConfig(a, k)))
        _CERTIFIED[4] = certified
        assert len(rows) == 3 * 55894
        assert not violations, violations[:5]
        assert elapsed < 30 * 60


def _approx_violations(nets):
    bad, checked = [], 0
    for net in nets:
        for a in APPROX_ALPHAS:
            for k in (1, 2, 3):
                cfg = GameConfig(a, k)
                for u in range(net.n):
                    if best_greedy_move(net, cfg, u) is None:
                        checked += 1
                        if agent_cost(net, cfg, u) > 3 * best_k_local_response(net, cfg, u)[1]:
                            bad.append((net, a, k, u))
    return bad, checked


def test_criterion_05_greedy_three_approximation():
    with criterion(5, "greedy-stable agents are within 3x of their best k-local response"):
        rng = random.Random(2005)
        randoms = [random_network(rng.randint(2, 8), rng, p=rng.choice([0.1, 0.3, 0.5])) for _ in range(500)]
        bad, checked = _approx_violations(list(corpus(5)) + randoms)
        assert checked > 100_000
        assert not bad, bad[:5]


def _random_connected_graph(rng):
    while True:
        n = rng.randint(1, 7)
        g = nx.gnp_random_graph(n, rng.uniform(0.2, 0.8), seed=rng.randint(0, 10**9))
        if nx.is_connected(g):
            return g


def test_criterion_06_dominating_set_reduction():
    with criterion(6, "hub best response size equals minimum dominating set size"):
        rng = random.Random(2006)
        mismatches = []
        for _ in range(200):
            g = _random_connected_graph(rng)
            red = ds_reduction(g)
            want = min_dominating_set_size(g.number_of_nodes(), list(g.edges()))
            for k in (1, 2):
                s, _ = best_k_local_response(red.network, GameConfig(red.alpha, k), red.hub)
                if len(s.targets) != want:
                    mismatches.append((sorted(g.edges()), k, len(s.targets), want))
        assert not mismatches, mismatches[:5]


def _is_star(net):
    return len(net.edges) == net.n - 1 and max(net.degree(u) for u in range(net.n)) == net.n - 1


def test_criterion_07_dynamics():
    with criterion(7, "dynamics: star collapse, quadratic greedy runs, tree swap convergence, BR cycles"):
        # (a) one-local buy game from a clique
        for n in range(4, 8):
            tr = run(balanced_clique(n), GameConfig(3, 1), MoveRegime.K_BG)
            assert tr.outcome is Outcome.CONVERGED and len(tr.steps) <= n and _is_star(tr.final), n
        # (b) one-local greedy buy game: quadratic step counts
        counts = {}
        for n in (10, 20):
            tr = run(clique(n), GameConfig(3, 1), MoveRegime.K_GBG, max_steps=10 * n * n)
            assert tr.outcome is Outcome.CONVERGED
            counts[n] = len(tr.steps)
        assert 3 <= counts[20] / counts[10] <= 5, counts
        # (c) swap games on trees
        rng = random.Random(2007)
        for _ in range(100):
            n = rng.randint(2, 12)
            tree = random_tree(n, rng)
            for regime in (MoveRegime.K_ASG, MoveRegime.K_SG):
                tr = run(tree, GameConfig(3, 2), regime, max_steps=n**3)
                assert tr.outcome is Outcome.CONVERGED and len(tr.steps) <= n**3
                pot = [sum(distance_cost(s, u) for u in range(n)) for s in tr.states()]
                assert all(b < a for a, b in zip(pot, pot[1:]))
        # (d) best-response cycles within the stated search budget
        for n, k, alpha, regime, pattern in ((6, 2, "5/2", MoveRegime.K_BG, SIX_AGENT_PATTERN),
                                             (8, 3, "7/2", MoveRegime.K_GBG, EIGHT_AGENT_PATTERN)):
            res = find_br_cycle(n, GameConfig(alpha, k), regime, CYCLE_BUDGET, seeds=caption_seeds(pattern),
                                hint=pattern.script, max_depth=2 * len(pattern.script), per_seed_budget=2000)
            assert res is not None and res.explored <= CYCLE_BUDGET
            assert res.trace.outcome is Outcome.CYCLE and verify_cycle(res.trace)


def test_criterion_08_locality_and_social_bounds():
    with criterion(8, "improving swap/buy ratio <= diameter; social/OPT <= beta (3 + diam)"):
        rng = random.Random(2008)
        bad = []
        for _ in range(500):
            net = random_network(rng.randint(2, 12), rng, p=rng.choice([0.05, 0.15, 0.3, 0.5]))
            diam = diameter(net)
            for a in ("3/2", "3", "8"):
                cfg = GameConfig(a)
                for u in range(net.n):
                    cur = _current_scaled(net, cfg, u)
                    for move, c in greedy_move_costs(net, cfg, u, None):
                        if move.kind is not MoveKind.DELETE and c < cur and cur > diam * c:
                            bad.append(("ratio", net, a, move))
                if cfg.alpha >= 2:
                    beta = approx_factor(net, cfg, Scope.GLOBAL_FULL)
                    if social_cost(net, cfg) / opt_cost(net.n, cfg) > beta * (3 + diam):
                        bad.append(("social", net, a, beta))
        assert not bad, bad[:5]


def test_criterion_09_diameter_bound():
    with criterion(9, "certified k-NE networks respect the diameter bound"):
        certified = list(_CERTIFIED.get(2) or [(n, c) for n, c, ok in _certified_kne_trees() if ok])
        if 4 in _CERTIFIED:
            certified += _CERTIFIED[4]
        else:
            rows = corpus_verdicts()
            certified += [(net, GameConfig(a, k)) for net, a, _, _, ks in rows for k, (kne, _) in ks.items()
                          if kne and k >= 2]
        assert len(certified) > 100
        bad = [(net, cfg) for net, cfg in certified if not within_diam_bound(diameter(net), cfg.alpha, cfg.k)]
        assert not bad, bad[:5]


def test_criterion_10_odd_cycles_under_max():
    with criterion(10, "odd directed cycles are 2-NE in the max game at alpha = 3/2"):
        t0 = time.perf_counter()
        for n in (5, 7):
            assert is_k_ne(directed_cycle(n), GameConfig(Fraction(3, 2), 2, Mode.MAX))
        assert time.perf_counter() - t0 < 60
