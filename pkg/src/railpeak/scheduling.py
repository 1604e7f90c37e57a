"""Per-tick departure authorization for trains under one substation.

Each tick the control center sees every vehicle drawing (or regenerating)
power in the substation range plus the set of trains ready to depart, and
decides which of them may go.  The decision is a small 0-1 program:

* a train may not close on its leader: lead headway minus one tick of
  movement must stay at or above the minimum headway if it departs;
* a train may not be caught by its follower: follow headway minus one
  tick of movement must stay at or above the minimum if it stays put;
* aggregate power is steered toward a soft threshold through a pair of
  deviation slacks; only the overage side is penalized;
* each authorized departure is rewarded, with extra weight when the
  range is net-regenerating (braking energy would otherwise be wasted)
  and when trains have just become ready (discourages chronic deferral).

Aggregate power follows a two-branch rule: regenerated power offsets the
network draw only up to the authorized departure demand; surplus
regeneration is dumped, so the total can never fall below the sum of the
nonnegative draws.  The branch choice depends on the decision vector, so
the power row is handed to the solver as an assignment-evaluated
constraint rather than a linearization.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .solver import (
    REL_GE,
    REL_EQ,
    BipProblem,
    BipSolution,
    Constraint,
    SlackSpec,
    SolveStatus,
    solve,
)

SLACK_BALANCE_TOL_KW = 1e-6


class SchedulingError(ValueError):
    """Invalid scheduling input."""


@dataclass(frozen=True)
class SafetyInfeasibility:
    """One train whose headway constraints admit no decision at all."""

    train_id: object
    kind: str  # "lead" (cannot stay clear ahead) or "follow" (cannot stay clear behind)
    detail: str


class SafetyInfeasibilityError(SchedulingError):
    def __init__(self, violations: Sequence[SafetyInfeasibility]):
        self.violations = tuple(violations)
        super().__init__(
            "; ".join(f"train {v.train_id}: {v.kind} ({v.detail})" for v in self.violations)
        )


@dataclass(frozen=True)
class SchedulerParams:
    """Weights, corrections and limits of the departure optimizer."""

    w1: float = 3.0
    w2: float = 5.0
    gamma1_value: float = 20.0
    gamma2_per_new_train: float = 1.0
    p_threshold_kw: float = 20_000.0
    h_min_s: float = 180.0
    dt_s: float = 10.0

    def __post_init__(self):
        if self.w1 <= 0 or self.w2 <= 0:
            raise SchedulingError("w1 and w2 must be > 0")
        if self.gamma1_value < 0 or self.gamma2_per_new_train < 0:
            raise SchedulingError("correction weights must be >= 0")
        if self.p_threshold_kw <= 0:
            raise SchedulingError("p_threshold_kw must be > 0")
        if self.h_min_s <= 0 or self.dt_s <= 0:
            raise SchedulingError("h_min_s and dt_s must be > 0")


@dataclass(frozen=True)
class WaitingTrain:
    """A train ready to depart, as seen by the optimizer."""

    train_id: object
    headway_lead_s: Optional[float]  # separation to the vehicle ahead; None = clear line
    headway_follow_s: Optional[float]  # separation to the vehicle behind; None = nobody
    departure_power_kw: float
    scheduled_departure_s: float
    progress_rate: float = 1.0

    def __post_init__(self):
        if self.departure_power_kw <= 0:
            raise SchedulingError(f"train {self.train_id}: departure power must be > 0")
        for h in (self.headway_lead_s, self.headway_follow_s):
            if h is not None and h < 0:
                raise SchedulingError(f"train {self.train_id}: headways must be >= 0")
        if self.progress_rate <= 0:
            raise SchedulingError(f"train {self.train_id}: progress_rate must be > 0")


@dataclass(frozen=True)
class ScheduleInstance:
    """One tick's optimizer inputs.

    ``running_powers_kw`` covers every vehicle in the substation range;
    waiting trains contribute zero entries.  ``newly_available_count``
    counts trains whose readiness began exactly at this tick.
    """

    t_i_s: float
    running_powers_kw: tuple[float, ...]
    waiting: tuple[WaitingTrain, ...]
    newly_available_count: int = 0

    def __post_init__(self):
        object.__setattr__(self, "running_powers_kw", tuple(float(p) for p in self.running_powers_kw))
        object.__setattr__(self, "waiting", tuple(self.waiting))
        if self.newly_available_count < 0:
            raise SchedulingError("newly_available_count must be >= 0")
        ids = [w.train_id for w in self.waiting]
        if len(set(ids)) != len(ids):
            raise SchedulingError("duplicate train ids in waiting set")


@dataclass(frozen=True)
class DepartureDecision:
    """Optimizer output for one tick."""

    authorizations: dict[object, int]
    total_power_kw: float
    overage_kw: float
    underage_kw: float
    objective_value: float

    def __post_init__(self):
        if self.overage_kw < -SLACK_BALANCE_TOL_KW or self.underage_kw < -SLACK_BALANCE_TOL_KW:
            raise SchedulingError("deviation values must be nonnegative")

    @property
    def authorized_ids(self) -> tuple:
        return tuple(tid for tid, k in self.authorizations.items() if k)


def total_power(
    running_powers_kw: Sequence[float],
    candidate_powers_kw: Sequence[float],
    k: Sequence[int],
) -> float:
    """Aggregate substation draw for a given authorization vector (kW).

    With R the regenerated magnitude and D the authorized departure
    demand: if R <= D the departures soak up all regeneration and the
    total is the plain sum plus D; otherwise surplus regeneration is
    wasted and the total is the sum of nonnegative draws alone.
    """
    if len(candidate_powers_kw) != len(k):
        raise SchedulingError("candidate powers and authorization vector differ in length")
    regen = -sum(p for p in running_powers_kw if p < 0)
    demand = sum(p * x for p, x in zip(candidate_powers_kw, k) if x)
    if regen <= demand:
        return sum(running_powers_kw) + demand
    return sum(p for p in running_powers_kw if p >= 0)


def split_threshold_deviation(total_kw: float, threshold_kw: float) -> tuple[float, float]:
    """(overage, underage) against the soft threshold; at most one is positive."""
    residual = threshold_kw - total_kw
    if residual >= 0.0:
        return 0.0, residual
    return -residual, 0.0


def departure_reward(instance: ScheduleInstance, params: SchedulerParams) -> float:
    """Objective weight per authorized departure (w2 plus active corrections)."""
    gamma1 = params.gamma1_value if sum(instance.running_powers_kw) < 0 else 0.0
    gamma2 = params.gamma2_per_new_train * instance.newly_available_count
    return params.w2 + gamma1 + gamma2


def check_safety(
    instance: ScheduleInstance, params: SchedulerParams
) -> list[SafetyInfeasibility]:
    """Trains for which neither holding nor departing satisfies the headway rules."""
    violations: list[SafetyInfeasibility] = []
    for w in instance.waiting:
        move = params.dt_s * w.progress_rate
        hold_ok = (w.headway_lead_s is None or w.headway_lead_s >= params.h_min_s) and (
            w.headway_follow_s is None or w.headway_follow_s - move >= params.h_min_s
        )
        go_ok = (w.headway_lead_s is None or w.headway_lead_s - move >= params.h_min_s) and (
            w.headway_follow_s is None or w.headway_follow_s >= params.h_min_s
        )
        if hold_ok or go_ok:
            continue
        if w.headway_follow_s is not None and w.headway_follow_s - move < params.h_min_s:
            # Holding would let the follower close below the minimum.
            kind, detail = "follow", f"follower at {w.headway_follow_s} s forces departure"
        else:
            kind, detail = "lead", f"leader at {w.headway_lead_s} s < {params.h_min_s} s"
        violations.append(SafetyInfeasibility(w.train_id, kind, detail))
    return violations


def build_problem(instance: ScheduleInstance, params: SchedulerParams) -> BipProblem:
    """Assemble the 0-1 program for one tick.

    Raises SafetyInfeasibilityError when some train has no feasible
    decision at all (never silently dropped).
    """
    violations = check_safety(instance, params)
    if violations:
        raise SafetyInfeasibilityError(violations)

    n = len(instance.waiting)
    reward = departure_reward(instance, params)
    objective = tuple(-reward for _ in range(n))
    constraints: list[Constraint] = []

    for j, w in enumerate(instance.waiting):
        move = params.dt_s * w.progress_rate
        if w.headway_lead_s is not None:
            coeffs = [0.0] * n
            coeffs[j] = -move
            constraints.append(
                Constraint(
                    coeffs=tuple(coeffs),
                    relation=REL_GE,
                    rhs=params.h_min_s - w.headway_lead_s,
                    label=f"lead[{w.train_id}]",
                )
            )
        if w.headway_follow_s is not None:
            coeffs = [0.0] * n
            coeffs[j] = move
            constraints.append(
                Constraint(
                    coeffs=tuple(coeffs),
                    relation=REL_GE,
                    rhs=params.h_min_s - w.headway_follow_s + move,
                    label=f"follow[{w.train_id}]",
                )
            )

    running = instance.running_powers_kw
    candidates = tuple(w.departure_power_kw for w in instance.waiting)
    constraints.append(
        Constraint(
            coeffs=None,
            relation=REL_EQ,
            rhs=params.p_threshold_kw,
            lhs_fn=lambda x: total_power(running, candidates, x),
            label="power-balance",
        )
    )
    slacks = (
        SlackSpec("underage", len(constraints) - 1, 1.0, 0.0),
        SlackSpec("overage", len(constraints) - 1, -1.0, params.w1),
    )
    return BipProblem(
        num_vars=n, objective=objective, constraints=tuple(constraints), slacks=slacks
    )


class SchedulingFaultError(SchedulingError):
    """The optimizer reported infeasibility; offending constraints attached."""

    def __init__(self, message: str, problem: BipProblem):
        self.problem = problem
        super().__init__(message)


def decide(instance: ScheduleInstance, params: SchedulerParams) -> DepartureDecision:
    """Solve one tick's departure problem."""
    if not instance.waiting:
        total = total_power(instance.running_powers_kw, (), ())
        overage, underage = split_threshold_deviation(total, params.p_threshold_kw)
        return DepartureDecision(
            authorizations={},
            total_power_kw=total,
            overage_kw=overage,
            underage_kw=underage,
            objective_value=params.w1 * overage,
        )

    problem = build_problem(instance, params)
    solution: BipSolution = solve(problem)
    if solution.status is not SolveStatus.OPTIMAL:
        from .solver import format_problem

        raise SchedulingFaultError(
            "no feasible authorization vector:\n" + format_problem(problem), problem
        )
    k = solution.assignment
    candidates = tuple(w.departure_power_kw for w in instance.waiting)
    total = total_power(instance.running_powers_kw, candidates, k)
    overage = solution.slack_values.get("overage", 0.0)
    underage = solution.slack_values.get("underage", 0.0)
    if abs(total + underage - overage - params.p_threshold_kw) > SLACK_BALANCE_TOL_KW:
        raise SchedulingFaultError("slack balance violated by the optimizer", problem)
    return DepartureDecision(
        authorizations={w.train_id: k[j] for j, w in enumerate(instance.waiting)},
        total_power_kw=total,
        overage_kw=overage,
        underage_kw=underage,
        objective_value=solution.objective_value,
    )


def total_delay(
    instance: ScheduleInstance, decision: DepartureDecision, params: SchedulerParams
) -> float:
    """Aggregate delay in seconds accrued by this tick's decision.

    Each waiting train contributes its lateness so far plus one tick if
    it is held.
    """
    delay = 0.0
    for w in instance.waiting:
        if w.train_id not in decision.authorizations:
            raise SchedulingError(f"decision does not cover train {w.train_id}")
        k = decision.authorizations[w.train_id]
        delay += instance.t_i_s - w.scheduled_departure_s + (1 - k) * params.dt_s
    return delay
