"""Core data model: approval-based budgeting instances and outcomes.

All money amounts (costs, budgets, payments) are `fractions.Fraction`
values so that every comparison made by the voting rules and the axiom
checkers is exact.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

Money = Fraction


class InstanceError(ValueError):
    """Instance data violates a structural invariant."""


class ParseError(InstanceError):
    """Input text cannot be parsed into a valid instance."""


def parse_money(value: str | int | Fraction) -> Fraction:
    """Parse an exact rational from "p/q", decimal, or integer notation."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    try:
        return Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"not a rational number: {value!r}") from exc


def money_str(value: Fraction) -> str:
    return str(Fraction(value))


@dataclass(frozen=True)
class Instance:
    """An approval-based budgeting instance: voters, projects, costs, budget.

    Voters are numbered 1..n; projects carry stable string ids. Instances
    are immutable after construction and safe to share between threads.
    """

    n: int
    projects: tuple[str, ...]
    costs: Mapping[str, Fraction]
    approvals: tuple[frozenset[str], ...]
    budget: Fraction
    _approvers: Mapping[str, frozenset[int]] = field(
        init=False, repr=False, compare=False, default=None
    )

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InstanceError("need at least one voter")
        if len(self.projects) < 1:
            raise InstanceError("need at least one project")
        if len(set(self.projects)) != len(self.projects):
            raise InstanceError("project ids must be unique")
        if set(self.costs) != set(self.projects):
            raise InstanceError("costs must cover exactly the project list")
        for p, c in self.costs.items():
            if not isinstance(c, Fraction) or c <= 0:
                raise InstanceError(f"cost of {p!r} must be a positive rational")
        if not isinstance(self.budget, Fraction) or self.budget <= 0:
            raise InstanceError("budget must be a positive rational")
        if len(self.approvals) != self.n:
            raise InstanceError("need one approval set per voter")
        known = set(self.projects)
        for i, ballot in enumerate(self.approvals, start=1):
            unknown = ballot - known
            if unknown:
                raise InstanceError(f"voter {i} approves unknown projects {sorted(unknown)}")
        approvers = {
            p: frozenset(i for i in range(1, self.n + 1) if p in self.approvals[i - 1])
            for p in self.projects
        }
        object.__setattr__(self, "_approvers", approvers)

    @classmethod
    def create(
        cls,
        costs: Mapping[str, object],
        approvals: Sequence[Iterable[str]],
        budget: object,
    ) -> "Instance":
        """Convenience constructor coercing costs/budget to Fractions."""
        cost_map = {p: parse_money(c) for p, c in costs.items()}
        return cls(
            n=len(approvals),
            projects=tuple(costs),
            costs=cost_map,
            approvals=tuple(frozenset(a) for a in approvals),
            budget=parse_money(budget),
        )

    @property
    def m(self) -> int:
        return len(self.projects)

    @property
    def voters(self) -> range:
        return range(1, self.n + 1)

    def approval(self, voter: int) -> frozenset[str]:
        if not 1 <= voter <= self.n:
            raise InstanceError(f"unknown voter {voter}")
        return self.approvals[voter - 1]

    def _check_known(self, s: Iterable[str]) -> None:
        unknown = set(s) - set(self.projects)
        if unknown:
            raise InstanceError(f"unknown project ids {sorted(unknown)}")

    def total_cost(self, s: Iterable[str]) -> Fraction:
        s = set(s)
        self._check_known(s)
        return sum((self.costs[p] for p in s), Fraction(0))

    def is_outcome(self, s: Iterable[str]) -> bool:
        return self.total_cost(s) <= self.budget

    def is_exhaustive(self, s: Iterable[str]) -> bool:
        s = set(s)
        spent = self.total_cost(s)
        if spent > self.budget:
            raise InstanceError("is_exhaustive requires a feasible outcome")
        residual = self.budget - spent
        return all(self.costs[p] > residual for p in self.projects if p not in s)

    def approvers(self, p: str) -> frozenset[int]:
        self._check_known([p])
        return self._approvers[p]

    def is_unit_cost(self) -> bool:
        return all(c == 1 for c in self.costs.values())


# ---------------------------------------------------------------------------
# Pabulib-style ingestion


def parse_pabulib(text: str) -> Instance:
    """Parse a Pabulib-style ``.pb`` file (META/PROJECTS/VOTES sections)."""
    sections: dict[str, list[list[str]]] = {}
    current: list[list[str]] | None = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.upper() in ("META", "PROJECTS", "VOTES"):
            current = sections.setdefault(line.upper(), [])
            continue
        if current is None:
            raise ParseError(f"content before first section header: {line!r}")
        current.append([f.strip() for f in line.split(";")])

    for name in ("META", "PROJECTS", "VOTES"):
        if name not in sections:
            raise ParseError(f"missing section {name}")

    meta_rows = sections["META"]
    if not meta_rows or [c.lower() for c in meta_rows[0]][:2] != ["key", "value"]:
        raise ParseError("META must start with a 'key;value' header")
    meta = {row[0]: row[1] if len(row) > 1 else "" for row in meta_rows[1:]}
    for key in ("num_projects", "num_votes", "budget", "vote_type"):
        if key not in meta:
            raise ParseError(f"missing META key {key}")
    if meta["vote_type"] != "approval":
        raise ParseError(f"unsupported vote type {meta['vote_type']!r}")
    try:
        num_projects = int(meta["num_projects"])
        num_votes = int(meta["num_votes"])
    except ValueError as exc:
        raise ParseError("num_projects/num_votes must be integers") from exc
    budget = parse_money(meta["budget"])

    proj_rows = sections["PROJECTS"]
    if not proj_rows or [c.lower() for c in proj_rows[0]][:2] != ["project_id", "cost"]:
        raise ParseError("PROJECTS must start with a 'project_id;cost' header")
    costs: dict[str, Fraction] = {}
    for row in proj_rows[1:]:
        if len(row) < 2:
            raise ParseError(f"malformed PROJECTS row {row!r}")
        pid = row[0]
        if pid in costs:
            raise ParseError(f"duplicate project id {pid!r}")
        costs[pid] = parse_money(row[1])
    if len(costs) != num_projects:
        raise ParseError(
            f"META says {num_projects} projects, PROJECTS lists {len(costs)}"
        )

    vote_rows = sections["VOTES"]
    if not vote_rows or [c.lower() for c in vote_rows[0]][:2] != ["voter_id", "vote"]:
        raise ParseError("VOTES must start with a 'voter_id;vote' header")
    approvals: list[frozenset[str]] = []
    for row in vote_rows[1:]:
        vote = row[1] if len(row) > 1 else ""
        ballot = frozenset(p.strip() for p in vote.split(",") if p.strip())
        dangling = ballot - set(costs)
        if dangling:
            raise ParseError(f"vote references unknown projects {sorted(dangling)}")
        approvals.append(ballot)
    if len(approvals) != num_votes:
        raise ParseError(f"META says {num_votes} votes, VOTES lists {len(approvals)}")

    try:
        return Instance(
            n=len(approvals),
            projects=tuple(costs),
            costs=costs,
            approvals=tuple(approvals),
            budget=budget,
        )
    except InstanceError as exc:
        raise ParseError(str(exc)) from exc


# ---------------------------------------------------------------------------
# JSON round trip


def parse_json(text: str) -> Instance:
    """Parse the canonical JSON instance encoding (exact "p/q" rationals)."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    try:
        n = data["n"]
        budget = parse_money(data["budget"])
        projects = data["projects"]
        approvals = data["approvals"]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"missing or malformed field: {exc}") from exc
    if not isinstance(projects, list) or not isinstance(approvals, list):
        raise ParseError("'projects' and 'approvals' must be lists")
    costs: dict[str, Fraction] = {}
    for entry in projects:
        try:
            costs[entry["id"]] = parse_money(entry["cost"])
        except (KeyError, TypeError) as exc:
            raise ParseError(f"malformed project entry {entry!r}") from exc
    try:
        return Instance(
            n=n,
            projects=tuple(costs),
            costs=costs,
            approvals=tuple(frozenset(a) for a in approvals),
            budget=budget,
        )
    except (InstanceError, TypeError) as exc:
        raise ParseError(str(exc)) from exc


def emit_json(inst: Instance) -> str:
    data = {
        "n": inst.n,
        "budget": money_str(inst.budget),
        "projects": [{"id": p, "cost": money_str(inst.costs[p])} for p in inst.projects],
        "approvals": [sorted(ballot) for ballot in inst.approvals],
    }
    return json.dumps(data, indent=2)


# ---------------------------------------------------------------------------
# Random instance generation


@dataclass(frozen=True)
class GenParams:
    """Parameters for the random instance generator.

    Costs are drawn as k/denominator with k uniform over the allowed range;
    the budget is drawn uniformly (same grid) from [budget_min, budget_max],
    defaulting to [m/2, 2m].
    """

    n: int
    m: int
    cost_min: Fraction = Fraction(1)
    cost_max: Fraction = Fraction(5)
    density: float = 0.5
    budget_min: Fraction | None = None
    budget_max: Fraction | None = None
    unit_cost: bool = False
    denominator: int = 4


def _rand_fraction(rng: random.Random, lo: Fraction, hi: Fraction, den: int) -> Fraction:
    lo_k = -(-lo.numerator * den // lo.denominator)  # ceil(lo*den)
    hi_k = hi.numerator * den // hi.denominator  # floor(hi*den)
    if hi_k < lo_k:
        raise InstanceError(f"empty range [{lo}, {hi}] at denominator {den}")
    return Fraction(rng.randint(lo_k, hi_k), den)


def generate_random(params: GenParams, seed: int) -> Instance:
    """Deterministically generate a valid random instance for a seed.

    Every voter approves at least one project (ballots are redrawn
    otherwise); all Instance invariants hold by construction.
    """
    if params.n < 1 or params.m < 1:
        raise InstanceError("n and m must be at least 1")
    rng = random.Random(seed)
    projects = tuple(f"p{j}" for j in range(1, params.m + 1))
    if params.unit_cost:
        costs = {p: Fraction(1) for p in projects}
    else:
        costs = {
            p: _rand_fraction(rng, params.cost_min, params.cost_max, params.denominator)
            for p in projects
        }
    lo = params.budget_min if params.budget_min is not None else Fraction(params.m, 2)
    hi = params.budget_max if params.budget_max is not None else Fraction(2 * params.m)
    budget = _rand_fraction(rng, lo, hi, params.denominator)
    approvals = []
    for _ in range(params.n):
        while True:
            ballot = frozenset(p for p in projects if rng.random() < params.density)
            if ballot:
                break
        approvals.append(ballot)
    return Instance(
        n=params.n,
        projects=projects,
        costs=costs,
        approvals=tuple(approvals),
        budget=budget,
    )
