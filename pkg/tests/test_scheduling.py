import itertools

import pytest

from railpeak.scheduling import (
    DepartureDecision,
    SafetyInfeasibilityError,
    ScheduleInstance,
    SchedulerParams,
    SchedulingError,
    WaitingTrain,
    build_problem,
    check_safety,
    decide,
    departure_reward,
    split_threshold_deviation,
    total_delay,
    total_power,
)
from railpeak.solver import SolveStatus, solve_exhaustive


def params(**overrides):
    kwargs = dict(
        w1=3.0,
        w2=5.0,
        gamma1_value=0.0,
        gamma2_per_new_train=1.0,
        p_threshold_kw=125_000.0,
        h_min_s=180.0,
        dt_s=10.0,
    )
    kwargs.update(overrides)
    return SchedulerParams(**kwargs)


def waiting(train_id, p_kw, lead=None, follow=None, scheduled=0.0):
    return WaitingTrain(
        train_id=train_id,
        headway_lead_s=lead,
        headway_follow_s=follow,
        departure_power_kw=p_kw,
        scheduled_departure_s=scheduled,
    )


class TestTotalPower:
    def test_regeneration_covered_by_departures(self):
        # R = 3000 <= D = 4000: plain sum plus demand.
        assert total_power([5000.0, -3000.0], [4000.0], [1]) == pytest.approx(6000.0)

    def test_surplus_regeneration_wasted(self):
        # R = 3000 > D = 2000: only nonnegative draws count.
        assert total_power([5000.0, -3000.0], [2000.0], [1]) == pytest.approx(5000.0)

    def test_plain_sum_without_regeneration(self):
        assert total_power([5000.0], [2000.0], [0]) == pytest.approx(5000.0)

    def test_no_waiting_no_regen(self):
        assert total_power([3000.0, 2000.0], [], []) == pytest.approx(5000.0)

    def test_no_waiting_with_surplus_regen(self):
        # D = 0 < R: surplus dumped.
        assert total_power([3000.0, -1000.0], [], []) == pytest.approx(3000.0)

    def test_length_mismatch(self):
        with pytest.raises(SchedulingError):
            total_power([0.0], [1000.0], [1, 0])


class TestBuildProblem:
    def test_single_free_train_departs(self):
        instance = ScheduleInstance(
            t_i_s=0.0,
            running_powers_kw=(0.0,),
            waiting=(waiting("a", 10_000.0),),
            newly_available_count=1,
        )
        problem = build_problem(instance, params())
        solution = solve_exhaustive(problem)
        assert solution.status == SolveStatus.OPTIMAL
        assert solution.assignment == (1,)

    def test_lead_headway_at_minimum_forces_hold(self):
        instance = ScheduleInstance(
            t_i_s=0.0,
            running_powers_kw=(0.0,),
            waiting=(waiting("a", 10_000.0, lead=180.0),),
        )
        decision = decide(instance, params())
        assert decision.authorizations["a"] == 0

    def test_follow_headway_at_minimum_forces_departure(self):
        instance = ScheduleInstance(
            t_i_s=0.0,
            running_powers_kw=(0.0,),
            waiting=(waiting("a", 10_000.0, follow=180.0),),
        )
        decision = decide(instance, params())
        assert decision.authorizations["a"] == 1

    def test_unsatisfiable_follower_is_reported(self):
        instance = ScheduleInstance(
            t_i_s=0.0,
            running_powers_kw=(0.0,),
            waiting=(waiting("a", 10_000.0, follow=100.0),),
        )
        with pytest.raises(SafetyInfeasibilityError) as err:
            build_problem(instance, params())
        assert err.value.violations[0].kind == "follow"
        assert err.value.violations[0].train_id == "a"

    def test_unsatisfiable_leader_is_reported(self):
        instance = ScheduleInstance(
            t_i_s=0.0,
            running_powers_kw=(0.0,),
            waiting=(waiting("a", 10_000.0, lead=100.0),),
        )
        with pytest.raises(SafetyInfeasibilityError) as err:
            build_problem(instance, params())
        assert err.value.violations[0].kind == "lead"


class TestDecide:
    def test_empty_waiting_set(self):
        instance = ScheduleInstance(t_i_s=0.0, running_powers_kw=(3000.0, 2000.0), waiting=())
        decision = decide(instance, params())
        assert decision.authorizations == {}
        assert decision.total_power_kw == pytest.approx(5000.0)
        assert decision.underage_kw == pytest.approx(120_000.0)
        assert decision.overage_kw == 0.0

    def test_one_of_two_heavy_departures_held(self):
        # Two 70 MW candidates against a 125 MW soft cap, both newly
        # available: authorizing both costs w1 * 15000 = 45000 against a
        # reward of 2 * (5 + 2) = 14; authorizing one costs nothing and
        # earns 7.  The tie between the two single departures goes to the
        # first train.
        instance = ScheduleInstance(
            t_i_s=0.0,
            running_powers_kw=(0.0, 0.0),
            waiting=(waiting("a", 70_000.0), waiting("b", 70_000.0)),
            newly_available_count=2,
        )
        decision = decide(instance, params())
        assert decision.authorizations == {"a": 1, "b": 0}
        assert decision.objective_value == pytest.approx(-7.0, abs=1e-9)
        assert decision.overage_kw == 0.0
        assert decision.total_power_kw == pytest.approx(70_000.0)

    def test_slack_balance_invariant(self):
        instance = ScheduleInstance(
            t_i_s=0.0,
            running_powers_kw=(100_000.0,),
            waiting=(waiting("a", 50_000.0, follow=180.0),),  # forced departure over cap
        )
        decision = decide(instance, params())
        assert decision.authorizations["a"] == 1
        assert decision.total_power_kw == pytest.approx(150_000.0)
        assert decision.overage_kw == pytest.approx(25_000.0)
        assert decision.underage_kw == 0.0
        balance = decision.total_power_kw + decision.underage_kw - decision.overage_kw
        assert balance == pytest.approx(125_000.0, abs=1e-6)

    def test_regeneration_bonus_activates_on_net_regen(self):
        instance_regen = ScheduleInstance(
            t_i_s=0.0, running_powers_kw=(-4000.0, 1000.0), waiting=(waiting("a", 8000.0),)
        )
        instance_draw = ScheduleInstance(
            t_i_s=0.0, running_powers_kw=(4000.0, 1000.0), waiting=(waiting("a", 8000.0),)
        )
        p = params(gamma1_value=20.0)
        assert departure_reward(instance_regen, p) == pytest.approx(25.0)
        assert departure_reward(instance_draw, p) == pytest.approx(5.0)

    def test_threshold_pressure_authorizes_everything_when_free(self):
        # All-departure total below the cap and headways clear: the
        # decision must authorize every waiting train.
        instance = ScheduleInstance(
            t_i_s=0.0,
            running_powers_kw=(0.0, 0.0, 0.0),
            waiting=(
                waiting("a", 10_000.0, lead=400.0),
                waiting("b", 10_000.0, lead=300.0, follow=300.0),
                waiting("c", 10_000.0, follow=400.0),
            ),
        )
        decision = decide(instance, params())
        assert all(decision.authorizations.values())

    @pytest.mark.parametrize("scale", [0.5, 2.0, 4.0])
    def test_weight_scaling_leaves_decision_unchanged(self, scale):
        instance = ScheduleInstance(
            t_i_s=0.0,
            running_powers_kw=(60_000.0, -2000.0),
            waiting=(waiting("a", 40_000.0), waiting("b", 35_000.0)),
            newly_available_count=1,
        )
        base = params(gamma1_value=20.0, p_threshold_kw=100_000.0)
        scaled = params(
            w1=base.w1 * scale,
            w2=base.w2 * scale,
            gamma1_value=base.gamma1_value * scale,
            gamma2_per_new_train=base.gamma2_per_new_train * scale,
            p_threshold_kw=100_000.0,
        )
        assert decide(instance, base).authorizations == decide(instance, scaled).authorizations

    def test_oracle_equivalence_on_exhaustive_enumeration(self):
        # Re-derive the optimum by brute force with independent arithmetic.
        p = params(gamma1_value=20.0, p_threshold_kw=30_000.0)
        instance = ScheduleInstance(
            t_i_s=100.0,
            running_powers_kw=(12_000.0, -5_000.0, 0.0, 0.0),
            waiting=(
                waiting("a", 18_000.0, lead=250.0, follow=200.0),
                waiting("b", 9_000.0, lead=360.0),
            ),
            newly_available_count=1,
        )
        decision = decide(instance, p)

        reward = p.w2 + (p.gamma1_value if sum(instance.running_powers_kw) < 0 else 0.0)
        reward += p.gamma2_per_new_train * instance.newly_available_count
        best = None
        for k in itertools.product([0, 1], repeat=2):
            feasible = True
            for j, w in enumerate(instance.waiting):
                if k[j] and w.headway_lead_s is not None:
                    feasible &= w.headway_lead_s - p.dt_s >= p.h_min_s
                if not k[j] and w.headway_follow_s is not None:
                    feasible &= w.headway_follow_s - p.dt_s >= p.h_min_s
                if k[j] and w.headway_follow_s is not None:
                    feasible &= w.headway_follow_s >= p.h_min_s
                if not k[j] and w.headway_lead_s is not None:
                    feasible &= w.headway_lead_s >= p.h_min_s
            if not feasible:
                continue
            regen = -sum(q for q in instance.running_powers_kw if q < 0)
            demand = sum(w.departure_power_kw * k[j] for j, w in enumerate(instance.waiting))
            if regen <= demand:
                tot = sum(instance.running_powers_kw) + demand
            else:
                tot = sum(q for q in instance.running_powers_kw if q >= 0)
            over = max(0.0, tot - p.p_threshold_kw)
            obj = p.w1 * over - reward * sum(k)
            if best is None or obj < best - 1e-9:
                best = obj
        assert decision.objective_value == pytest.approx(best, abs=1e-9)

    def test_no_simultaneous_positive_slacks(self):
        instance = ScheduleInstance(
            t_i_s=0.0,
            running_powers_kw=(90_000.0,),
            waiting=(waiting("a", 50_000.0),),
            newly_available_count=1,
        )
        decision = decide(instance, params())
        assert min(decision.overage_kw, decision.underage_kw) <= 1e-6


class TestTotalDelay:
    def test_on_time_departure(self):
        instance = ScheduleInstance(
            t_i_s=100.0, running_powers_kw=(0.0,), waiting=(waiting("a", 1000.0, scheduled=100.0),)
        )
        decision = DepartureDecision({"a": 1}, 1000.0, 0.0, 124_000.0, 0.0)
        assert total_delay(instance, decision, params()) == pytest.approx(0.0)

    def test_late_hold_adds_a_tick(self):
        instance = ScheduleInstance(
            t_i_s=130.0, running_powers_kw=(0.0,), waiting=(waiting("a", 1000.0, scheduled=100.0),)
        )
        decision = DepartureDecision({"a": 0}, 0.0, 0.0, 125_000.0, 0.0)
        assert total_delay(instance, decision, params()) == pytest.approx(40.0)

    def test_two_departing_trains_sum_their_lateness(self):
        instance = ScheduleInstance(
            t_i_s=100.0,
            running_powers_kw=(0.0, 0.0),
            waiting=(
                waiting("a", 1000.0, scheduled=100.0),
                waiting("b", 1000.0, scheduled=80.0),
            ),
        )
        decision = DepartureDecision({"a": 1, "b": 1}, 2000.0, 0.0, 123_000.0, 0.0)
        assert total_delay(instance, decision, params()) == pytest.approx(20.0)

    def test_missing_train_rejected(self):
        instance = ScheduleInstance(
            t_i_s=0.0, running_powers_kw=(0.0,), waiting=(waiting("a", 1000.0),)
        )
        with pytest.raises(SchedulingError):
            total_delay(instance, DepartureDecision({}, 0.0, 0.0, 125_000.0, 0.0), params())


class TestHelpers:
    def test_split_threshold_deviation(self):
        assert split_threshold_deviation(120.0, 100.0) == (20.0, 0.0)
        assert split_threshold_deviation(80.0, 100.0) == (0.0, 20.0)
        assert split_threshold_deviation(100.0, 100.0) == (0.0, 0.0)

    def test_check_safety_clean_instance(self):
        instance = ScheduleInstance(
            t_i_s=0.0,
            running_powers_kw=(0.0,),
            waiting=(waiting("a", 1000.0, lead=360.0, follow=360.0),),
        )
        assert check_safety(instance, params()) == []
