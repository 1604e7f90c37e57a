import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from railpeak.solver import (
    REL_EQ,
    REL_GE,
    REL_LE,
    BipProblem,
    Constraint,
    SizeLimitError,
    SlackSpec,
    SolveStatus,
    SolverError,
    format_problem,
    random_problem,
    run_selftest,
    solve,
    solve_exhaustive,
)


def test_two_var_knapsack_tie_break():
    # min -x0 - x1  s.t. x0 + x1 <= 1: both single-departure points are
    # optimal; the tie goes to [1, 0].
    problem = BipProblem(
        num_vars=2,
        objective=(-1.0, -1.0),
        constraints=(Constraint(coeffs=(1.0, 1.0), relation=REL_LE, rhs=1.0),),
    )
    for solution in (solve(problem), solve_exhaustive(problem)):
        assert solution.status == SolveStatus.OPTIMAL
        assert solution.objective_value == pytest.approx(-1.0, abs=1e-12)
        assert solution.assignment == (1, 0)


def test_unconstrained_sign_inspection():
    problem = BipProblem(num_vars=3, objective=(3.0, -2.0, 0.0))
    solution = solve(problem)
    assert solution.assignment == (0, 1, 0)
    assert solution.objective_value == pytest.approx(-2.0, abs=1e-12)


def test_unreachable_rhs_is_infeasible():
    problem = BipProblem(
        num_vars=1,
        objective=(1.0,),
        constraints=(Constraint(coeffs=(1.0,), relation=REL_GE, rhs=2.0),),
    )
    assert solve(problem).status == SolveStatus.INFEASIBLE
    assert solve_exhaustive(problem).status == SolveStatus.INFEASIBLE


def test_zero_objective_prefers_all_zero():
    problem = BipProblem(num_vars=3, objective=(0.0, 0.0, 0.0))
    solution = solve_exhaustive(problem)
    assert solution.assignment == (0, 0, 0)
    assert solution.objective_value == 0.0


def test_slack_pair_goal_constraint():
    # min 3*over - 5*(x0 + x1)  s.t. 7 x0 + 7 x1 + under - over = 10
    # Taking both: over = 4, cost 12 - 10 = 2; taking one: under = 3, cost -5.
    problem = BipProblem(
        num_vars=2,
        objective=(-5.0, -5.0),
        constraints=(Constraint(coeffs=(7.0, 7.0), relation=REL_EQ, rhs=10.0),),
        slacks=(SlackSpec("under", 0, 1.0, 0.0), SlackSpec("over", 0, -1.0, 3.0)),
    )
    solution = solve(problem)
    assert solution.status == SolveStatus.OPTIMAL
    assert solution.assignment == (1, 0)
    assert solution.objective_value == pytest.approx(-5.0, abs=1e-12)
    assert solution.slack_values["under"] == pytest.approx(3.0, abs=1e-12)
    assert solution.slack_values["over"] == 0.0
    assert solve_exhaustive(problem) == solution


def test_single_slack_rejects_negative_resolution():
    # x0 + under = 0 with under >= 0 forces x0 = 0.
    problem = BipProblem(
        num_vars=1,
        objective=(-1.0,),
        constraints=(Constraint(coeffs=(1.0,), relation=REL_EQ, rhs=0.0),),
        slacks=(SlackSpec("under", 0, 1.0, 0.0),),
    )
    solution = solve(problem)
    assert solution.assignment == (0,)


def test_evaluated_lhs_constraint():
    # lhs is max(0, x0 + x1 - 1): nonlinear in the assignment.
    problem = BipProblem(
        num_vars=2,
        objective=(-1.0, -1.0),
        constraints=(
            Constraint(
                coeffs=None,
                relation=REL_LE,
                rhs=0.0,
                lhs_fn=lambda x: max(0.0, x[0] + x[1] - 1.0),
                label="at-most-one",
            ),
        ),
    )
    for solution in (solve(problem), solve_exhaustive(problem)):
        assert solution.assignment == (1, 0)


def test_structural_errors():
    with pytest.raises(SolverError):
        BipProblem(num_vars=2, objective=(1.0,))
    with pytest.raises(SolverError):
        BipProblem(
            num_vars=1,
            objective=(1.0,),
            constraints=(Constraint(coeffs=(1.0, 2.0), relation=REL_LE, rhs=1.0),),
        )
    with pytest.raises(SolverError):
        BipProblem(
            num_vars=1,
            objective=(1.0,),
            constraints=(Constraint(coeffs=(1.0,), relation=REL_LE, rhs=1.0),),
            slacks=(SlackSpec("s", 0, 1.0, 0.0),),  # slack on a non-equality row
        )
    with pytest.raises(SolverError):
        BipProblem(
            num_vars=1,
            objective=(1.0,),
            constraints=(Constraint(coeffs=(1.0,), relation=REL_EQ, rhs=1.0),),
            slacks=(SlackSpec("s", 0, 1.0, -1.0),),  # negative slack cost
        )


def test_exhaustive_refuses_oversized_instances():
    problem = BipProblem(num_vars=21, objective=(0.0,) * 21)
    with pytest.raises(SizeLimitError):
        solve_exhaustive(problem)


def test_empty_problem():
    solution = solve(BipProblem(num_vars=0, objective=()))
    assert solution.status == SolveStatus.OPTIMAL
    assert solution.assignment == ()
    assert solution.objective_value == 0.0


def test_adding_constraint_never_improves_objective():
    rng = random.Random(99)
    for _ in range(120):
        base = random_problem(rng, max_vars=8, max_constraints=4)
        extra = Constraint(
            coeffs=tuple(float(rng.randint(-5, 5)) for _ in range(base.num_vars)),
            relation=rng.choice((REL_LE, REL_GE)),
            rhs=float(rng.randint(-8, 8)),
        )
        tightened = BipProblem(
            num_vars=base.num_vars,
            objective=base.objective,
            constraints=base.constraints + (extra,),
            slacks=base.slacks,
        )
        before = solve(base)
        after = solve(tightened)
        if before.status == SolveStatus.INFEASIBLE:
            assert after.status == SolveStatus.INFEASIBLE
        elif after.status == SolveStatus.OPTIMAL:
            assert after.objective_value >= before.objective_value - 1e-9


def test_determinism():
    rng = random.Random(7)
    for _ in range(50):
        problem = random_problem(rng, max_vars=10)
        assert solve(problem) == solve(problem)


def test_optimal_answers_are_feasible():
    from railpeak.solver import evaluate_assignment

    rng = random.Random(31)
    for _ in range(100):
        problem = random_problem(rng, max_vars=10)
        solution = solve(problem)
        if solution.status == SolveStatus.OPTIMAL:
            result = evaluate_assignment(problem, solution.assignment)
            assert result is not None, "optimal assignment violates a constraint"
            objective, _ = result
            assert objective == pytest.approx(solution.objective_value, abs=1e-9)


@given(seed=st.integers(0, 10_000))
@settings(max_examples=50, deadline=None)
def test_differential_against_oracle(seed):
    problem = random_problem(random.Random(seed), max_vars=9, max_constraints=6)
    fast = solve(problem)
    oracle = solve_exhaustive(problem)
    assert fast.status == oracle.status
    if fast.status == SolveStatus.OPTIMAL:
        assert fast.assignment == oracle.assignment
        assert fast.objective_value == pytest.approx(oracle.objective_value, abs=1e-9)


def test_selftest_runs_clean():
    report = run_selftest(num_instances=200, max_vars=8, seed=42)
    assert report.passed
    assert report.instances == 200


def test_selftest_zero_instances_trivially_pass():
    assert run_selftest(num_instances=0, max_vars=8, seed=1).passed


def test_selftest_rejects_oversized_max_vars():
    with pytest.raises(SizeLimitError):
        run_selftest(num_instances=1, max_vars=25, seed=1)


def test_format_problem_mentions_every_row():
    problem = BipProblem(
        num_vars=2,
        objective=(1.0, -2.0),
        constraints=(
            Constraint(coeffs=(1.0, 1.0), relation=REL_LE, rhs=1.0, label="headway"),
            Constraint(coeffs=(3.0, 0.0), relation=REL_EQ, rhs=2.0),
        ),
        slacks=(SlackSpec("under", 1, 1.0, 0.0),),
    )
    text = format_problem(problem)
    assert "min" in text
    assert "c0:" in text and "c1:" in text
    assert "headway" in text
    assert "under" in text
