"""End-to-end acceptance gate.

One test per acceptance criterion; each prints a single pass/fail line.
The random-instance property suites (criterion 2) and the implication
lattice (criterion 3) share one audit cache so every (instance, mu,
outcome) triple is examined by all eight axiom checkers exactly once.
"""
import random
import time
from contextlib import contextmanager
from fractions import Fraction

from conftest import make_instance, random_outcome
from oracles import max_load_oracle, naive_ejr_passes
from pbprop.axioms import AXIOM_CHECKERS, audit_all, check_ejr, check_pjrx
from pbprop.pricing import (
    extract_from_maximin_trace,
    extract_from_mes_trace,
    extract_from_phragmen_trace,
    verify_price_system,
)
from pbprop.repro import run_all
from pbprop.rules import (
    balance_loads,
    run_gcr,
    run_maximin_support,
    run_mes,
    run_seq_phragmen,
)
from pbprop.satisfaction import (
    cardinality_sat,
    cc_sat,
    cost_sat,
    is_dns,
    log_cost_sat,
    sqrt_cost_sat,
    table_sat,
    dns_counterexample_instance,
)

POOL_SIZE = 500

MU_FACTORIES = {
    "cost": cost_sat,
    "card": cardinality_sat,
    "sqrt": sqrt_cost_sat,
    "log": log_cost_sat,
    "cc": lambda inst: cc_sat(),
}
DNS_KEYS = ("cost", "card", "sqrt", "log")


@contextmanager
def criterion(num, desc):
    try:
        yield
    except BaseException:
        print(f"[acceptance {num}] FAIL: {desc}")
        raise
    print(f"[acceptance {num}] PASS: {desc}")


# ---------------------------------------------------------------------------
# shared state, built lazily so criteria 2 and 3 audit each triple once

_pool = None
_tables = {}
_audits = {}
_suite2 = None


def pool():
    global _pool
    if _pool is None:
        _pool = [make_instance(seed) for seed in range(POOL_SIZE)]
    return _pool


def random_table(idx):
    """A random additive value table, nudged off the DNS conditions."""
    if idx not in _tables:
        inst = pool()[idx]
        rng = random.Random(idx * 31 + 7)
        values = {
            p: Fraction(rng.randint(1, 16), 4) for p in sorted(inst.projects)
        }
        mu = table_sat(values)
        if inst.m >= 2 and is_dns(mu, inst):
            # a huge value on the priciest project breaks the value-per-cost
            # monotonicity, so the table is certainly not DNS
            worst = max(sorted(inst.projects), key=lambda p: inst.costs[p])
            values[worst] *= 100
            mu = table_sat(values)
        _tables[idx] = mu
    return _tables[idx]


def audited(idx, mu_key, w):
    """Full eight-axiom audit of one triple, cached across criteria."""
    key = (idx, mu_key, frozenset(w))
    if key not in _audits:
        inst = pool()[idx]
        mu = random_table(idx) if mu_key == "table" else MU_FACTORIES[mu_key](inst)
        _audits[key] = audit_all(inst, mu, w)
    return _audits[key]


def suite2():
    """Runs all six theorem property suites once; returns failure lists."""
    global _suite2
    if _suite2 is not None:
        return _suite2
    fails = {name: [] for name in (
        "gcr-ejr", "mes-ejrx", "mes-ejr1plus", "mescard-pjrx",
        "loads-pjrx-extraction", "priceable-pjrx",
    )}
    premise_count = 0
    nondns_tables = 0
    for idx, inst in enumerate(pool()):
        # GCR[mu] satisfies exact representation for its own mu
        for key in ("cost", "card", "sqrt", "cc"):
            w = run_gcr(inst, MU_FACTORIES[key](inst))
            if not audited(idx, key, w).passed("ejr"):
                fails["gcr-ejr"].append((idx, key))

        # MES[mu] for DNS mu: up-to-any representation
        mes_w = {}
        for key in DNS_KEYS:
            w, _ = run_mes(inst, MU_FACTORIES[key](inst))
            mes_w[key] = w
            if not audited(idx, key, w).passed("ejrx"):
                fails["mes-ejrx"].append((idx, key))

        # MES[mu] for any additive mu: up-to-one-from-the-demand
        table = random_table(idx)
        if not is_dns(table, inst):
            nondns_tables += 1
        w_table, _ = run_mes(inst, table)
        for key, w in (("cost", mes_w["cost"]), ("card", mes_w["card"]),
                       ("table", w_table)):
            if not audited(idx, key, w).passed("ejr1plus"):
                fails["mes-ejr1plus"].append((idx, key))

        # MES[card] satisfies PJR up-to-any for every DNS built-in
        for key in DNS_KEYS:
            if not audited(idx, key, mes_w["card"]).passed("pjrx"):
                fails["mescard-pjrx"].append((idx, key))

        # load-balancing rules: PJR up-to-any for every DNS built-in, and
        # their price extractions pass all six conditions when blocked
        systems = []
        for rule, extract in (
            (run_seq_phragmen, extract_from_phragmen_trace),
            (run_maximin_support, extract_from_maximin_trace),
        ):
            w, tr = rule(inst)
            for key in DNS_KEYS:
                if not audited(idx, key, w).passed("pjrx"):
                    fails["loads-pjrx-extraction"].append((idx, rule.__name__, key))
            if tr.blocking is not None:
                ps = extract(inst, tr)
                rep = verify_price_system(inst, w, ps)
                if not (rep.ok(require_c6=True, require_b_strict=True)
                        and ps.budget > inst.budget):
                    fails["loads-pjrx-extraction"].append(
                        (idx, rule.__name__, "extraction"))
                systems.append((w, rep))

        # priced outcomes: C1-C5 with B > b forces PJR up-to-any under cost,
        # and additionally C6 forces it for every DNS built-in
        for key in ("cost", "card"):
            w, tr = run_mes(inst, MU_FACTORIES[key](inst))
            ps = extract_from_mes_trace(inst, tr)
            systems.append((w, verify_price_system(inst, w, ps)))
        for w, rep in systems:
            if rep.ok(require_b_strict=True):
                premise_count += 1
                if not audited(idx, "cost", w).passed("pjrx"):
                    fails["priceable-pjrx"].append((idx, "cost"))
                if rep.ok(require_c6=True, require_b_strict=True):
                    for key in DNS_KEYS:
                        if not audited(idx, key, w).passed("pjrx"):
                            fails["priceable-pjrx"].append((idx, key))
    assert premise_count > 100, "too few priced premises to test the theorem"
    assert nondns_tables > 300, "too few non-DNS random tables"
    _suite2 = fails
    return fails


# ---------------------------------------------------------------------------
# criteria


def test_criterion_1_worked_example_suite():
    with criterion(1, "worked-example suite passes in under 5 s"):
        start = time.perf_counter()
        results = run_all()
        elapsed = time.perf_counter() - start
        assert len(results) >= 8
        bad = [r.case_id for r in results if not r.passed]
        assert not bad, bad
        assert elapsed < 5, f"repro suite took {elapsed:.2f}s"


def test_criterion_2_theorem_property_suites():
    with criterion(
        2, f"six theorem suites over {POOL_SIZE} random instances, zero failures"
    ):
        fails = suite2()
        assert all(not v for v in fails.values()), {
            k: v[:5] for k, v in fails.items() if v
        }


def test_criterion_3_implication_lattice():
    with criterion(
        3, "implication lattice on every audited triple plus unit-cost collapses"
    ):
        suite2()
        assert len(_audits) > 2000
        for report in _audits.values():
            assert report.inconsistencies() == []
            assert not report.guard_errors
        for seed in range(200):
            inst = make_instance(seed, unit_cost=True)
            w = random_outcome(inst, seed)
            for mu in (cost_sat(inst), cardinality_sat(inst)):
                ejr = check_ejr(inst, mu, w) is None
                rep = audit_all(inst, mu, w)
                assert rep.passed("ejr1") == ejr
                assert rep.passed("ejrx") == ejr
                assert rep.passed("pjrx") == rep.passed("pjr")


def test_criterion_4_oracle_cross_validation():
    with criterion(
        4, "reduction checker and load balancer match naive oracles in under 60 s"
    ):
        start = time.perf_counter()
        for seed in range(150):
            inst = make_instance(seed, max_n=5, max_m=5)
            w = random_outcome(inst, seed + 5000)
            for mu in (cost_sat(inst), cardinality_sat(inst)):
                assert (check_ejr(inst, mu, w) is None) == naive_ejr_passes(
                    inst, mu, w
                )
        for seed in range(100):
            inst = make_instance(seed, max_n=5, max_m=5)
            w = [p for p in sorted(inst.projects) if inst.approvers(p)]
            if w:
                assert balance_loads(inst, w).max_load == max_load_oracle(inst, w)
        elapsed = time.perf_counter() - start
        assert elapsed < 60, f"oracle cross-validation took {elapsed:.2f}s"


NON_DNS_MAPS = (
    # value drops outright between the two costs
    ({"1": "1", "2": "1/2"}, "1", "2"),
    ({"1": "1", "2": "1/3"}, "1", "2"),
    ({"1": "1", "2": "1/4"}, "1", "2"),
    ({"1": "2", "3/2": "1/2"}, "1", "3/2"),
    ({"2": "1", "4": "2/5"}, "2", "4"),
    # value per unit of cost jumps upward
    ({"1": "1", "2": "3"}, "1", "2"),
    ({"1": "1", "2": "6"}, "1", "2"),
    ({"1": "1", "3/2": "5"}, "1", "3/2"),
    ({"2": "1", "3": "4"}, "2", "3"),
    ({"1": "2", "2": "10"}, "1", "2"),
)


def test_criterion_5_dns_necessity():
    with criterion(
        5, "ten constructed non-DNS maps defeat PJR up-to-any under the auditor"
    ):
        assert len(NON_DNS_MAPS) >= 10
        for cost_map, x, xp in NON_DNS_MAPS:
            inst, mu = dns_counterexample_instance(cost_map, x, xp)
            assert not is_dns(mu, inst)
            w, _ = run_mes(inst, cardinality_sat(inst))
            v = check_pjrx(inst, mu, w, max_m=20, max_n=200)
            assert v is not None, (cost_map, x, xp)


def test_every_axiom_checker_exercised():
    # sanity: the audit cache really covers all eight checkers
    suite2()
    any_report = next(iter(_audits.values()))
    assert set(any_report.results) == set(AXIOM_CHECKERS)
