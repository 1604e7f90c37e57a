"""HTTP service exposing the simulator, scheduler and solver.

Stateless: every request carries its full scenario or instance, so any
number of clients can run studies concurrently.  The per-tick /decide
endpoint is the online use: vehicles (or a dispatch system) post the
current power picture and waiting set, and receive the authorization
vector for the tick.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..engine import ScenarioDesignError, ScenarioError, run_pair, run_scenario
from ..metrics import MetricsError, compare
from ..scheduling import SchedulingError, decide
from ..solver import SolverError, format_problem, run_selftest, solve, solve_exhaustive
from .models import (
    CompareRequest,
    CompareResponse,
    DecideRequest,
    DecideResponse,
    HealthResponse,
    ReportModel,
    SelftestRequest,
    SelftestResponse,
    SimulateRequest,
    SimulateResponse,
    SolveRequest,
    SolveResponse,
    TraceModel,
)

app = FastAPI(
    title="railpeak",
    description="Metro corridor traction-power simulation and real-time departure rescheduling",
    version=__version__,
)


@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


@app.post("/simulate", response_model=SimulateResponse)
def simulate(request: SimulateRequest) -> SimulateResponse:
    try:
        scenario = request.scenario.to_core()
        trace = run_scenario(scenario)
    except (ScenarioError, ValueError) as err:
        raise HTTPException(status_code=422, detail=str(err)) from err
    except ScenarioDesignError as err:
        raise HTTPException(status_code=409, detail=str(err)) from err
    model = TraceModel.from_core(trace)
    if not request.include_rows:
        model.rows = []
    return SimulateResponse(trace=model)


@app.post("/compare", response_model=CompareResponse)
def compare_policies(request: CompareRequest) -> CompareResponse:
    try:
        scenario = request.scenario.to_core()
        fixed, pres = run_pair(scenario)
        report = compare(fixed, pres, request.reporting_threshold_kw)
    except (ScenarioError, MetricsError, ValueError) as err:
        raise HTTPException(status_code=422, detail=str(err)) from err
    except ScenarioDesignError as err:
        raise HTTPException(status_code=409, detail=str(err)) from err
    return CompareResponse(
        report=ReportModel.from_core(report),
        fixed=TraceModel.from_core(fixed),
        pres=TraceModel.from_core(pres),
    )


@app.post("/decide", response_model=DecideResponse)
def decide_tick(request: DecideRequest) -> DecideResponse:
    try:
        instance, params = request.to_core()
        decision = decide(instance, params)
    except SchedulingError as err:
        raise HTTPException(status_code=422, detail=str(err)) from err
    return DecideResponse(
        authorizations={int(k): v for k, v in decision.authorizations.items()},
        total_power_kw=decision.total_power_kw,
        overage_kw=decision.overage_kw,
        underage_kw=decision.underage_kw,
        objective_value=decision.objective_value,
    )


@app.post("/solver/solve", response_model=SolveResponse)
def solve_problem(request: SolveRequest) -> SolveResponse:
    try:
        problem = request.to_core()
        solution = (solve_exhaustive if request.method == "exhaustive" else solve)(problem)
    except SolverError as err:
        raise HTTPException(status_code=422, detail=str(err)) from err
    return SolveResponse(
        status=solution.status.value,
        assignment=list(solution.assignment) if solution.assignment is not None else None,
        slack_values=solution.slack_values,
        objective_value=solution.objective_value,
        listing=format_problem(problem),
    )


@app.post("/solver/selftest", response_model=SelftestResponse)
def solver_selftest(request: SelftestRequest) -> SelftestResponse:
    try:
        report = run_selftest(request.num_instances, request.max_vars, request.seed)
    except SolverError as err:
        raise HTTPException(status_code=422, detail=str(err)) from err
    return SelftestResponse(
        passed=report.passed,
        instances=report.instances,
        mismatches=report.mismatches,
        max_solve_ms=report.max_solve_ms,
        first_failure=report.first_failure,
    )
