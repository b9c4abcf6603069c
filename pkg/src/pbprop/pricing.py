"""Price systems: verification, extraction from rule traces, exact search.

A price system gives every voter an equal share B/n of a virtual budget B
and a payment function d_i over projects. The six conditions checked here:

  C1  voters pay only for projects they approve;
  C2  voters pay only for chosen projects;
  C3  no voter spends more than B/n;
  C4  each chosen project is paid for exactly (sum of payments = cost);
  C5  for each unchosen project, its approvers' combined leftover
      B_i* = B/n - sum_p d_i(p) does not cover the cost;
  C6  for each unchosen project p_j and chosen p_k, the approvers of p_j
      jointly pay at most c(p_j) towards p_k.

``b_strict`` additionally records whether B exceeds the real budget b.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .errors import GuardExceededError
from .lp import solve_lp
from .model import Instance, InstanceError, money_str, parse_money
from .rules import RuleTrace

CONDITIONS = ("C1", "C2", "C3", "C4", "C5", "C6")


class ExtractionUnavailableError(RuntimeError):
    """The trace lacks the data the extraction needs (e.g. no blocking
    project in a Phragmen run that exhausted its candidates)."""


@dataclass(frozen=True)
class PriceSystem:
    """Virtual budget B plus per-voter payment functions."""

    budget: Fraction  # B; each voter holds B/n
    payments: Mapping[int, Mapping[str, Fraction]]  # voter -> project -> amount

    def spent(self, voter: int) -> Fraction:
        return sum(self.payments.get(voter, {}).values(), Fraction(0))

    def leftover(self, voter: int, n: int) -> Fraction:
        return self.budget / n - self.spent(voter)

    def to_json(self) -> str:
        data = {
            "B": money_str(self.budget),
            "payments": {
                str(i): {p: money_str(v) for p, v in sorted(per.items())}
                for i, per in sorted(self.payments.items())
            },
        }
        return json.dumps(data, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "PriceSystem":
        data = json.loads(text)
        return cls(
            budget=parse_money(data["B"]),
            payments={
                int(i): {p: parse_money(v) for p, v in per.items()}
                for i, per in data["payments"].items()
            },
        )


@dataclass
class PriceReport:
    """Per-condition verdicts; each failure carries a small witness tuple."""

    verdicts: dict[str, tuple[bool, tuple | None]]
    b_strict: bool

    def ok(self, require_c6: bool = False, require_b_strict: bool = True) -> bool:
        needed = CONDITIONS if require_c6 else CONDITIONS[:5]
        if require_b_strict and not self.b_strict:
            return False
        return all(self.verdicts[c][0] for c in needed)


def verify_price_system(
    inst: Instance, outcome, ps: PriceSystem
) -> PriceReport:
    """Re-evaluate all six conditions exactly against a candidate system."""
    w = frozenset(outcome)
    inst.total_cost(w)  # validates project ids (and implicitly feasibility data)
    for i, per in ps.payments.items():
        if not 1 <= i <= inst.n:
            raise InstanceError(f"payment from unknown voter {i}")
        for p, amount in per.items():
            if p not in inst.costs:
                raise InstanceError(f"payment on unknown project {p!r}")
            if amount < 0:
                raise InstanceError(f"negative payment by voter {i} on {p!r}")
    verdicts: dict[str, tuple[bool, tuple | None]] = {}

    def fail_first(name: str, witness) -> None:
        if name not in verdicts:
            verdicts[name] = (False, witness)

    for i in inst.voters:
        for p, amount in ps.payments.get(i, {}).items():
            if amount > 0 and p not in inst.approval(i):
                fail_first("C1", (i, p))
            if amount > 0 and p not in w:
                fail_first("C2", (i, p))
        if ps.spent(i) > ps.budget / inst.n:
            fail_first("C3", (i,))
    for p in sorted(w):
        paid = sum((ps.payments.get(i, {}).get(p, Fraction(0)) for i in inst.voters),
                   Fraction(0))
        if paid != inst.costs[p]:
            fail_first("C4", (p,))
    unchosen = [p for p in inst.projects if p not in w]
    for p in unchosen:
        pooled = sum((ps.leftover(i, inst.n) for i in inst.approvers(p)), Fraction(0))
        if pooled > inst.costs[p]:
            fail_first("C5", (p,))
    for pj in unchosen:
        group = inst.approvers(pj)
        for pk in sorted(w):
            towards = sum(
                (ps.payments.get(i, {}).get(pk, Fraction(0)) for i in group),
                Fraction(0),
            )
            if towards > inst.costs[pj]:
                fail_first("C6", (pj, pk))
    for name in CONDITIONS:
        verdicts.setdefault(name, (True, None))
    return PriceReport(verdicts=verdicts, b_strict=ps.budget > inst.budget)


# ---------------------------------------------------------------------------
# Extraction from rule traces


def _invert(payments: Mapping[str, Mapping[int, Fraction]]) -> dict[int, dict[str, Fraction]]:
    by_voter: dict[int, dict[str, Fraction]] = {}
    for p, per in payments.items():
        for i, amount in per.items():
            if amount > 0:
                by_voter.setdefault(i, {})[p] = amount
    return by_voter


def extract_from_mes_trace(inst: Instance, trace: RuleTrace) -> PriceSystem:
    """Turn a finished MES run into a price system with B above the real
    budget: each voter's share grows by half the per-voter affordability
    gap delta/n, which keeps every C5 inequality strict."""
    if trace.rule != "mes":
        raise ExtractionUnavailableError("trace does not come from an MES run")
    if trace.delta is None:
        # Everything was selected; C5 is vacuous and any B above b works.
        return PriceSystem(budget=inst.budget + 1, payments=_invert(trace.payments))
    if trace.delta <= 0:
        raise ExtractionUnavailableError(
            f"trace reports a non-positive affordability gap delta={trace.delta}"
        )
    eps = trace.delta / (2 * inst.n)
    budget = inst.n * (inst.budget / inst.n + eps)
    return PriceSystem(budget=budget, payments=_invert(trace.payments))


def extract_from_phragmen_trace(inst: Instance, trace: RuleTrace) -> PriceSystem:
    """Price system from a Phragmen run that stopped at a blocking project:
    hypothetically apply the blocking load update, then B = n * max load."""
    if trace.rule != "phragmen":
        raise ExtractionUnavailableError("trace does not come from a Phragmen run")
    if trace.blocking is None:
        raise ExtractionUnavailableError(
            "no blocking project: the run exhausted its candidates"
        )
    blocked, t_val = trace.blocking
    loads = dict(trace.voter_loads)
    for i in inst.approvers(blocked):
        loads[i] = t_val
    budget = inst.n * max(loads.values())
    return PriceSystem(budget=budget, payments=_invert(trace.payments))


def _payments_at_budget(
    inst: Instance, w: list[str], budget: Fraction
) -> dict[int, dict[str, Fraction]] | None:
    """Exact feasibility problem for payments at a fixed virtual budget:
    C1/C2 by variable choice, C3-C6 as linear rows."""
    pay_vars = [(i, p) for p in w for i in sorted(inst.approvers(p))]
    col = {key: k for k, key in enumerate(pay_vars)}
    width = len(pay_vars)

    def row() -> list[Fraction]:
        return [Fraction(0)] * width

    a_ub, b_ub, a_eq, b_eq = [], [], [], []
    share = budget / inst.n
    for i in inst.voters:  # C3
        mine = [key for key in pay_vars if key[0] == i]
        if not mine:
            continue
        r = row()
        for key in mine:
            r[col[key]] = Fraction(1)
        a_ub.append(r)
        b_ub.append(share)
    for p in w:  # C4
        r = row()
        for i in inst.approvers(p):
            r[col[(i, p)]] = Fraction(1)
        a_eq.append(r)
        b_eq.append(inst.costs[p])
    for pj in inst.projects:  # C5 and C6
        if pj in set(w):
            continue
        group = inst.approvers(pj)
        if not group:
            continue
        r = row()
        for i, p in pay_vars:
            if i in group:
                r[col[(i, p)]] -= Fraction(1)
        a_ub.append(r)
        b_ub.append(inst.costs[pj] - len(group) * share)
        for pk in w:
            r = row()
            nonzero = False
            for i in group & inst.approvers(pk):
                r[col[(i, pk)]] = Fraction(1)
                nonzero = True
            if nonzero:
                a_ub.append(r)
                b_ub.append(inst.costs[pj])
    status, x, _ = solve_lp(row(), a_ub, b_ub, a_eq, b_eq)
    if status != "optimal":
        return None
    payments: dict[int, dict[str, Fraction]] = {}
    for key, c_idx in col.items():
        if x[c_idx] > 0:
            i, p = key
            payments.setdefault(i, {})[p] = x[c_idx]
    return payments


def extract_from_maximin_trace(inst: Instance, trace: RuleTrace) -> PriceSystem:
    """Price system from a maximin support run that stopped at a blocking
    project: B = n * max load of the blocked balanced configuration. The
    configuration's own loads (restricted to the chosen projects) serve as
    payments when they respect every condition; a balanced optimum is not
    unique, though, and an arbitrary one may overcharge the approvers of a
    cheap unchosen project, so otherwise the payments are re-split by an
    exact feasibility solve at the same budget."""
    if trace.rule != "maximin":
        raise ExtractionUnavailableError("trace does not come from a maximin run")
    if trace.blocking is None or trace.blocking_loads is None:
        raise ExtractionUnavailableError(
            "no blocking project: the run exhausted its candidates"
        )
    budget = inst.n * trace.blocking_loads.max_load
    ps = PriceSystem(budget=budget, payments=_invert(trace.payments))
    report = verify_price_system(inst, sorted(trace.payments), ps)
    if all(report.verdicts[c][0] for c in CONDITIONS):
        return ps
    repaired = _payments_at_budget(inst, sorted(trace.payments), budget)
    if repaired is None:
        raise ExtractionUnavailableError(
            "no condition-respecting payments exist at the blocked budget"
        )
    return PriceSystem(budget=budget, payments=repaired)


# ---------------------------------------------------------------------------
# Exact feasibility search


def find_price_system(
    inst: Instance,
    outcome,
    require_c6: bool = False,
    require_b_strict: bool = True,
    max_payment_vars: int = 64,
) -> PriceSystem | None:
    """Search for any price system supporting the outcome, as an exact
    linear feasibility problem in (B, d). Maximizes the slack of B above
    its lower bound; with ``require_b_strict`` success needs positive slack
    (B strictly above the real budget)."""
    w = sorted(set(outcome))
    if inst.total_cost(w) > inst.budget:
        raise InstanceError("outcome exceeds the budget")
    pay_vars = [(i, p) for p in w for i in sorted(inst.approvers(p))]
    if len(pay_vars) > max_payment_vars:
        raise GuardExceededError(
            f"{len(pay_vars)} payment variables exceed guard {max_payment_vars}"
        )
    # Variables: x = [t, B, d_(i,p)...], all nonnegative.
    col = {("t",): 0, ("B",): 1}
    for k, key in enumerate(pay_vars):
        col[key] = 2 + k
    width = 2 + len(pay_vars)

    def row() -> list[Fraction]:
        return [Fraction(0)] * width

    a_ub, b_ub, a_eq, b_eq = [], [], [], []
    lower = inst.budget if require_b_strict else Fraction(0)
    r = row()  # t - B <= -lower, i.e. B >= lower + t
    r[0], r[1] = Fraction(1), Fraction(-1)
    a_ub.append(r)
    b_ub.append(-lower)
    r = row()  # t <= b + 1 keeps the objective bounded
    r[0] = Fraction(1)
    a_ub.append(r)
    b_ub.append(inst.budget + 1)
    for i in inst.voters:  # C3: sum_p d_i(p) <= B/n
        mine = [key for key in pay_vars if key[0] == i]
        if not mine:
            continue
        r = row()
        r[1] = Fraction(-1, inst.n)
        for key in mine:
            r[col[key]] = Fraction(1)
        a_ub.append(r)
        b_ub.append(Fraction(0))
    for p in w:  # C4: sum_i d_i(p) = c(p)
        r = row()
        for i in inst.approvers(p):
            r[col[(i, p)]] = Fraction(1)
        a_eq.append(r)
        b_eq.append(inst.costs[p])
    unchosen = [p for p in inst.projects if p not in set(w)]
    for pj in unchosen:  # C5: |N_j| B/n - sum_{i in N_j} sum_p d_i(p) <= c(p_j)
        group = inst.approvers(pj)
        if not group:
            continue
        r = row()
        r[1] = Fraction(len(group), inst.n)
        for i, p in pay_vars:
            if i in group:
                r[col[(i, p)]] -= Fraction(1)
        a_ub.append(r)
        b_ub.append(inst.costs[pj])
    if require_c6:
        for pj in unchosen:  # C6: sum_{i in N_j} d_i(p_k) <= c(p_j)
            group = inst.approvers(pj)
            for pk in w:
                r = row()
                nonzero = False
                for i in group & inst.approvers(pk):
                    r[col[(i, pk)]] = Fraction(1)
                    nonzero = True
                if nonzero:
                    a_ub.append(r)
                    b_ub.append(inst.costs[pj])
    objective = row()
    objective[0] = Fraction(1)
    status, x, value = solve_lp(objective, a_ub, b_ub, a_eq, b_eq)
    if status != "optimal":
        return None
    if require_b_strict and value <= 0:
        return None
    payments: dict[int, dict[str, Fraction]] = {}
    for (i, p), c_idx in ((key, col[key]) for key in pay_vars):
        if x[c_idx] > 0:
            payments.setdefault(i, {})[p] = x[c_idx]
    return PriceSystem(budget=x[1], payments=payments)
