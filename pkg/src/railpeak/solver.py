"""0-1 integer linear programming by implicit enumeration.

``solve`` runs a depth-first branch-and-bound in the additive-algorithm
style: variables are explored in order of decreasing objective-coefficient
magnitude and a node is fathomed when its partial cost plus the sum of the
remaining negative coefficients cannot beat the incumbent.  ``solve_exhaustive``
brute-forces all 2^n assignments with the identical feasibility and
tie-breaking rules and serves as the validation oracle.

Beyond plain linear constraints the model supports two extensions needed
by the departure scheduler:

* nonnegative continuous slack variables attached to equality constraints
  (at most two per constraint, with opposite signs); given a binary
  assignment their values follow in closed form from the residual and are
  rejected if negative.  Slack objective costs must be nonnegative.
* a constraint's left-hand side may be an arbitrary function of the
  assignment (``lhs_fn``) instead of a coefficient vector, for rules that
  are piecewise with respect to the decision vector.  Such constraints are
  evaluated exactly at every candidate assignment.

Ties between equally good assignments are broken deterministically toward
the assignment with the smallest value as a binary number, variable 0
being the least significant bit (so [1,0] wins over [0,1]).
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

FEASIBILITY_TOL = 1e-9
OPTIMALITY_TOL = 1e-9

REL_LE = "<="
REL_EQ = "="
REL_GE = ">="
_RELATIONS = (REL_LE, REL_EQ, REL_GE)

EXHAUSTIVE_VAR_LIMIT = 20


class SolverError(ValueError):
    """Structurally invalid problem."""


class SizeLimitError(SolverError):
    """Refused: instance too large for exhaustive enumeration."""


class SolveStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class SlackSpec:
    """A nonnegative continuous slack appearing in one equality constraint."""

    name: str
    constraint: int
    coeff: float
    cost: float = 0.0


@dataclass(frozen=True)
class Constraint:
    """One linear (or assignment-evaluated) constraint row."""

    coeffs: Optional[tuple[float, ...]]
    relation: str
    rhs: float
    lhs_fn: Optional[Callable[[Sequence[int]], float]] = None
    label: str = ""

    def lhs(self, assignment: Sequence[int]) -> float:
        if self.lhs_fn is not None:
            return self.lhs_fn(assignment)
        return sum(c * x for c, x in zip(self.coeffs, assignment) if x)


@dataclass(frozen=True)
class BipProblem:
    """Minimize objective . x over binary x subject to the constraints."""

    num_vars: int
    objective: tuple[float, ...]
    constraints: tuple[Constraint, ...] = ()
    slacks: tuple[SlackSpec, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "objective", tuple(float(c) for c in self.objective))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        object.__setattr__(self, "slacks", tuple(self.slacks))
        self.validate()

    def validate(self) -> None:
        if self.num_vars < 0:
            raise SolverError("num_vars must be >= 0")
        if len(self.objective) != self.num_vars:
            raise SolverError(
                f"objective has {len(self.objective)} coefficients for {self.num_vars} variables"
            )
        for i, con in enumerate(self.constraints):
            if con.relation not in _RELATIONS:
                raise SolverError(f"constraint {i}: unknown relation {con.relation!r}")
            if con.lhs_fn is None:
                if con.coeffs is None or len(con.coeffs) != self.num_vars:
                    raise SolverError(f"constraint {i}: coefficient vector length mismatch")
        by_con: dict[int, list[SlackSpec]] = {}
        for sl in self.slacks:
            if not (0 <= sl.constraint < len(self.constraints)):
                raise SolverError(f"slack {sl.name!r} references missing constraint {sl.constraint}")
            if self.constraints[sl.constraint].relation != REL_EQ:
                raise SolverError(f"slack {sl.name!r} must attach to an equality constraint")
            if sl.coeff == 0:
                raise SolverError(f"slack {sl.name!r} has zero coefficient")
            if sl.cost < 0:
                raise SolverError(f"slack {sl.name!r} has negative cost")
            by_con.setdefault(sl.constraint, []).append(sl)
        for idx, group in by_con.items():
            if len(group) > 2:
                raise SolverError(f"constraint {idx} declares more than two slacks")
            if len(group) == 2 and group[0].coeff * group[1].coeff > 0:
                raise SolverError(f"constraint {idx}: paired slacks need opposite-sign coefficients")


@dataclass(frozen=True)
class BipSolution:
    status: SolveStatus
    assignment: Optional[tuple[int, ...]] = None
    slack_values: dict[str, float] = field(default_factory=dict)
    objective_value: Optional[float] = None


def _slacks_by_constraint(problem: BipProblem) -> dict[int, tuple[SlackSpec, ...]]:
    out: dict[int, tuple[SlackSpec, ...]] = {}
    for sl in problem.slacks:
        out[sl.constraint] = out.get(sl.constraint, ()) + (sl,)
    return out


def _resolve_slacks(
    group: tuple[SlackSpec, ...], residual: float
) -> Optional[tuple[float, dict[str, float]]]:
    """Closed-form minimal-cost slack values for one equality residual.

    Returns (cost, values) or None when no nonnegative resolution exists.
    """
    if len(group) == 1:
        sl = group[0]
        value = residual / sl.coeff
        if value < -FEASIBILITY_TOL:
            return None
        value = max(value, 0.0)
        return sl.cost * value, {sl.name: value}
    best: Optional[tuple[float, dict[str, float]]] = None
    for active in group:
        value = residual / active.coeff
        if value < -FEASIBILITY_TOL:
            continue
        value = max(value, 0.0)
        cost = active.cost * value
        values = {sl.name: (value if sl is active else 0.0) for sl in group}
        if best is None or cost < best[0] - FEASIBILITY_TOL:
            best = (cost, values)
    return best


def evaluate_assignment(
    problem: BipProblem, assignment: Sequence[int]
) -> Optional[tuple[float, dict[str, float]]]:
    """Objective (including slack cost) and slack values, or None if infeasible."""
    slack_groups = _slacks_by_constraint(problem)
    objective = sum(c for c, x in zip(problem.objective, assignment) if x)
    slack_values: dict[str, float] = {}
    for idx, con in enumerate(problem.constraints):
        lhs = con.lhs(assignment)
        group = slack_groups.get(idx)
        if group:
            resolved = _resolve_slacks(group, con.rhs - lhs)
            if resolved is None:
                return None
            cost, values = resolved
            objective += cost
            slack_values.update(values)
            continue
        if con.relation == REL_LE and lhs > con.rhs + FEASIBILITY_TOL:
            return None
        if con.relation == REL_GE and lhs < con.rhs - FEASIBILITY_TOL:
            return None
        if con.relation == REL_EQ and abs(lhs - con.rhs) > FEASIBILITY_TOL:
            return None
    return objective, slack_values


def _assignment_key(assignment: Sequence[int]) -> int:
    key = 0
    for j, x in enumerate(assignment):
        if x:
            key |= 1 << j
    return key


class _Incumbent:
    __slots__ = ("objective", "key", "assignment", "slacks")

    def __init__(self):
        self.objective: Optional[float] = None
        self.key = 0
        self.assignment: Optional[tuple[int, ...]] = None
        self.slacks: dict[str, float] = {}

    def offer(self, objective: float, assignment: Sequence[int], slacks: dict[str, float]) -> None:
        key = _assignment_key(assignment)
        if (
            self.objective is None
            or objective < self.objective - OPTIMALITY_TOL
            or (objective <= self.objective + OPTIMALITY_TOL and key < self.key)
        ):
            self.objective = objective
            self.key = key
            self.assignment = tuple(assignment)
            self.slacks = slacks

    def solution(self) -> BipSolution:
        if self.objective is None:
            return BipSolution(status=SolveStatus.INFEASIBLE)
        return BipSolution(
            status=SolveStatus.OPTIMAL,
            assignment=self.assignment,
            slack_values=self.slacks,
            objective_value=self.objective,
        )


def solve_exhaustive(problem: BipProblem) -> BipSolution:
    """Brute-force oracle over all 2^n assignments (n <= 20).

    Uses the same slack resolution and tie-breaking as ``solve``.  Pure
    linear instances are enumerated incrementally in Gray-code order for
    speed; instances with assignment-evaluated constraints fall back to
    plain enumeration.
    """
    n = problem.num_vars
    if n > EXHAUSTIVE_VAR_LIMIT:
        raise SizeLimitError(f"exhaustive enumeration refused for {n} > {EXHAUSTIVE_VAR_LIMIT} variables")
    incumbent = _Incumbent()
    if n == 0:
        result = evaluate_assignment(problem, ())
        if result is not None:
            incumbent.offer(result[0], (), result[1])
        return incumbent.solution()

    if any(con.lhs_fn is not None for con in problem.constraints):
        assignment = [0] * n
        for code in range(1 << n):
            for j in range(n):
                assignment[j] = (code >> j) & 1
            result = evaluate_assignment(problem, assignment)
            if result is not None:
                incumbent.offer(result[0], assignment, result[1])
        return incumbent.solution()

    slack_groups = _slacks_by_constraint(problem)
    cons = problem.constraints
    m = len(cons)
    lhs = [0.0] * m
    objective = 0.0
    assignment = [0] * n

    def consider():
        nonlocal objective
        total = objective
        slack_values: dict[str, float] = {}
        for idx in range(m):
            con = cons[idx]
            group = slack_groups.get(idx)
            value = lhs[idx]
            if group:
                resolved = _resolve_slacks(group, con.rhs - value)
                if resolved is None:
                    return
                cost, values = resolved
                total += cost
                slack_values.update(values)
                continue
            if con.relation == REL_LE and value > con.rhs + FEASIBILITY_TOL:
                return
            if con.relation == REL_GE and value < con.rhs - FEASIBILITY_TOL:
                return
            if con.relation == REL_EQ and abs(value - con.rhs) > FEASIBILITY_TOL:
                return
        incumbent.offer(total, assignment, slack_values)

    consider()
    for code in range(1, 1 << n):
        flip = (code & -code).bit_length() - 1
        if assignment[flip]:
            assignment[flip] = 0
            sign = -1.0
        else:
            assignment[flip] = 1
            sign = 1.0
        objective += sign * problem.objective[flip]
        for idx in range(m):
            lhs[idx] += sign * cons[idx].coeffs[flip]
        consider()
    return incumbent.solution()


def solve(problem: BipProblem) -> BipSolution:
    """Provably optimal solution by depth-first branch-and-bound.

    Never returns a suboptimal answer: a subtree is pruned only when its
    objective lower bound (partial cost plus all remaining negative
    coefficients; slack costs are nonnegative) strictly exceeds the
    incumbent, and leaves are re-evaluated with the exact feasibility
    routine shared with the exhaustive oracle.
    """
    n = problem.num_vars
    incumbent = _Incumbent()
    if n == 0:
        result = evaluate_assignment(problem, ())
        if result is not None:
            incumbent.offer(result[0], (), result[1])
        return incumbent.solution()

    order = sorted(range(n), key=lambda j: (-abs(problem.objective[j]), j))
    # Lower bound on the cost still obtainable from position d onward.
    neg_suffix = [0.0] * (n + 1)
    for pos in range(n - 1, -1, -1):
        c = problem.objective[order[pos]]
        neg_suffix[pos] = neg_suffix[pos + 1] + min(0.0, c)

    slack_groups = _slacks_by_constraint(problem)
    # Per-constraint reachable-range bookkeeping for sound pruning of
    # linear rows (rows with lhs_fn are checked only at leaves).
    linear_rows = [
        (idx, con)
        for idx, con in enumerate(problem.constraints)
        if con.lhs_fn is None
    ]
    row_coeffs = []
    row_min_suffix = []
    row_max_suffix = []
    for _, con in linear_rows:
        ordered = [con.coeffs[j] for j in order]
        mins = [0.0] * (n + 1)
        maxs = [0.0] * (n + 1)
        for pos in range(n - 1, -1, -1):
            mins[pos] = mins[pos + 1] + min(0.0, ordered[pos])
            maxs[pos] = maxs[pos + 1] + max(0.0, ordered[pos])
        row_coeffs.append(ordered)
        row_min_suffix.append(mins)
        row_max_suffix.append(maxs)

    assignment = [0] * n
    fixed_lhs = [0.0] * len(linear_rows)

    def row_feasible(depth: int) -> bool:
        for r, (idx, con) in enumerate(linear_rows):
            lo = fixed_lhs[r] + row_min_suffix[r][depth]
            hi = fixed_lhs[r] + row_max_suffix[r][depth]
            group = slack_groups.get(idx)
            if group:
                if len(group) == 2:
                    continue  # opposite-sign pair absorbs any residual
                sl = group[0]
                # need residual / coeff >= 0 achievable
                if sl.coeff > 0 and lo > con.rhs + FEASIBILITY_TOL:
                    return False
                if sl.coeff < 0 and hi < con.rhs - FEASIBILITY_TOL:
                    return False
                continue
            if con.relation == REL_LE and lo > con.rhs + FEASIBILITY_TOL:
                return False
            if con.relation == REL_GE and hi < con.rhs - FEASIBILITY_TOL:
                return False
            if con.relation == REL_EQ and (
                con.rhs < lo - FEASIBILITY_TOL or con.rhs > hi + FEASIBILITY_TOL
            ):
                return False
        return True

    def descend(depth: int, partial_cost: float) -> None:
        if (
            incumbent.objective is not None
            and partial_cost + neg_suffix[depth] > incumbent.objective + OPTIMALITY_TOL
        ):
            return
        if not row_feasible(depth):
            return
        if depth == n:
            result = evaluate_assignment(problem, assignment)
            if result is not None:
                incumbent.offer(result[0], assignment, result[1])
            return
        var = order[depth]
        c = problem.objective[var]
        for value in ((0, 1) if c >= 0 else (1, 0)):
            assignment[var] = value
            if value:
                for r in range(len(linear_rows)):
                    fixed_lhs[r] += row_coeffs[r][depth]
            descend(depth + 1, partial_cost + (c if value else 0.0))
            if value:
                for r in range(len(linear_rows)):
                    fixed_lhs[r] -= row_coeffs[r][depth]
            assignment[var] = 0

    descend(0, 0.0)
    return incumbent.solution()


def format_problem(problem: BipProblem) -> str:
    """Plain-text listing of an instance, one constraint per line."""

    def term(c: float, name: str) -> str:
        return f"{c:+g} {name}"

    lines = ["min " + " ".join(term(c, f"x{j}") for j, c in enumerate(problem.objective))]
    slack_groups = _slacks_by_constraint(problem)
    for idx, con in enumerate(problem.constraints):
        if con.lhs_fn is not None:
            body = f"<evaluated:{con.label or 'fn'}>"
        else:
            body = " ".join(term(c, f"x{j}") for j, c in enumerate(con.coeffs) if c != 0) or "0"
        extra = "".join(
            f" {term(sl.coeff, sl.name)}" for sl in slack_groups.get(idx, ())
        )
        label = f"  # {con.label}" if con.label else ""
        lines.append(f"c{idx}: {body}{extra} {con.relation} {con.rhs:g}{label}")
    for sl in problem.slacks:
        lines.append(f"slack {sl.name}: >= 0, cost {sl.cost:g} (constraint c{sl.constraint})")
    return "\n".join(lines)


def random_problem(rng, max_vars: int = 12, max_constraints: int = 8) -> BipProblem:
    """Seeded random instance with integer data (exact float arithmetic)."""
    n = rng.randint(1, max_vars)
    objective = tuple(float(rng.randint(-9, 9)) for _ in range(n))
    constraints: list[Constraint] = []
    slacks: list[SlackSpec] = []
    for idx in range(rng.randint(0, max_constraints)):
        coeffs = tuple(float(rng.randint(-9, 9)) for _ in range(n))
        flavor = rng.random()
        if flavor < 0.2:
            rhs = float(rng.randint(-10, 10))
            constraints.append(Constraint(coeffs=coeffs, relation=REL_EQ, rhs=rhs))
            slacks.append(SlackSpec(f"under{idx}", len(constraints) - 1, 1.0, 0.0))
            slacks.append(
                SlackSpec(f"over{idx}", len(constraints) - 1, -1.0, float(rng.randint(1, 5)))
            )
        elif flavor < 0.3:
            rhs = float(rng.randint(-10, 10))
            constraints.append(Constraint(coeffs=coeffs, relation=REL_EQ, rhs=rhs))
            slacks.append(
                SlackSpec(
                    f"slack{idx}",
                    len(constraints) - 1,
                    float(rng.choice((-1, 1))),
                    float(rng.randint(0, 3)),
                )
            )
        else:
            relation = rng.choice((REL_LE, REL_GE))
            rhs = float(rng.randint(-12, 12))
            constraints.append(Constraint(coeffs=coeffs, relation=relation, rhs=rhs))
    return BipProblem(
        num_vars=n, objective=objective, constraints=tuple(constraints), slacks=tuple(slacks)
    )


@dataclass(frozen=True)
class SelftestReport:
    instances: int
    mismatches: int
    max_solve_ms: float
    first_failure: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.mismatches == 0


def run_selftest(num_instances: int, max_vars: int, seed: int) -> SelftestReport:
    """Differential test: solve vs solve_exhaustive on seeded random instances."""
    import random as _random

    if max_vars > EXHAUSTIVE_VAR_LIMIT:
        raise SizeLimitError(
            f"max_vars {max_vars} exceeds the exhaustive limit {EXHAUSTIVE_VAR_LIMIT}"
        )
    rng = _random.Random(seed)
    mismatches = 0
    first_failure = None
    max_ms = 0.0
    for _ in range(num_instances):
        problem = random_problem(rng, max_vars=max_vars)
        t0 = time.perf_counter()
        fast = solve(problem)
        max_ms = max(max_ms, (time.perf_counter() - t0) * 1000.0)
        oracle = solve_exhaustive(problem)
        same = fast.status == oracle.status
        if same and fast.status == SolveStatus.OPTIMAL:
            same = (
                fast.assignment == oracle.assignment
                and abs(fast.objective_value - oracle.objective_value) <= OPTIMALITY_TOL
            )
        if not same:
            mismatches += 1
            if first_failure is None:
                first_failure = (
                    f"{format_problem(problem)}\n"
                    f"solve: {fast}\nexhaustive: {oracle}"
                )
    return SelftestReport(
        instances=num_instances,
        mismatches=mismatches,
        max_solve_ms=max_ms,
        first_failure=first_failure,
    )
