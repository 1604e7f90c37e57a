import pytest

from railpeak.engine import Scenario, run_pair
from railpeak.metrics import (
    MetricsError,
    compare,
    count_exceedances,
    exceedance_tick_count,
    regen_accounting,
    render_report,
    report_csv,
)


@pytest.fixture(scope="module")
def default_report():
    fixed, pres = run_pair(Scenario())
    return compare(fixed, pres), fixed, pres


class Row:
    def __init__(self, regen, demand):
        self.regen_available_kw = regen
        self.departure_demand_kw = demand


class TestCountExceedances:
    def test_single_contiguous_run(self):
        assert count_exceedances([10.0, 30.0, 30.0, 10.0], 25.0) == 1

    def test_two_runs(self):
        assert count_exceedances([30.0, 10.0, 30.0], 25.0) == 2

    def test_none_above(self):
        assert count_exceedances([10.0, 20.0, 25.0], 25.0) == 0

    def test_strictly_above_semantics(self):
        assert count_exceedances([25.0, 25.0], 25.0) == 0
        assert count_exceedances([25.0 + 1e-9, 25.0], 25.0) == 1

    def test_split_at_below_threshold_tick_is_local(self):
        series = [30.0, 10.0, 30.0, 30.0, 10.0, 40.0]
        # any split at a below-threshold tick preserves the total count
        for cut in (2, 5):
            left, right = series[:cut], series[cut:]
            if left[-1] <= 25.0:
                assert (
                    count_exceedances(left, 25.0) + count_exceedances(right, 25.0)
                    == count_exceedances(series, 25.0)
                )

    def test_empty_trace_rejected(self):
        with pytest.raises(MetricsError):
            count_exceedances([], 25.0)

    def test_tick_count(self):
        assert exceedance_tick_count([30.0, 10.0, 30.0, 30.0], 25.0) == 3


class TestRegenAccounting:
    def test_no_regeneration(self):
        assert regen_accounting([Row(0.0, 5000.0)], 10.0) == (0.0, 0.0)

    def test_surplus_regeneration(self):
        utilized, wasted = regen_accounting([Row(3000.0, 2000.0)], 10.0)
        assert utilized == pytest.approx(2000.0 * 10.0 / 3600.0)
        assert wasted == pytest.approx(1000.0 * 10.0 / 3600.0)

    def test_demand_exceeds_regeneration(self):
        utilized, wasted = regen_accounting([Row(2000.0, 3000.0)], 10.0)
        assert utilized == pytest.approx(2000.0 * 10.0 / 3600.0)
        assert wasted == 0.0

    def test_split_sums_to_regenerated_energy(self, default_report):
        _, fixed, pres = default_report
        for trace in (fixed, pres):
            utilized, wasted = regen_accounting(trace.rows, trace.tick_s)
            total = sum(r.regen_available_kw for r in trace.rows) * trace.tick_s / 3600.0
            assert utilized + wasted == pytest.approx(total, rel=1e-9)


class TestCompare:
    def test_full_report_fields(self, default_report):
        report, fixed, pres = default_report
        assert report.reporting_threshold_kw == fixed.p_threshold_kw
        assert report.fixed.completed_train_count > 40
        assert report.pres.exceedance_count <= report.fixed.exceedance_count
        assert report.extra_delay_pct == pytest.approx(
            100.0
            * (report.pres.travel_time_mean_s - report.fixed.travel_time_mean_s)
            / report.fixed.travel_time_mean_s
        )

    def test_reduction_formula(self, default_report):
        report, _, _ = default_report
        f, p = report.fixed.exceedance_count, report.pres.exceedance_count
        if f > 0:
            assert report.exceedance_reduction_pct == pytest.approx(100.0 * (f - p) / f)

    def test_mean_power_equals_energy_over_duration(self, default_report):
        _, fixed, _ = default_report
        from railpeak.metrics import policy_stats

        stats = policy_stats(fixed, fixed.p_threshold_kw)
        energy = sum(fixed.totals_kw) * fixed.tick_s
        duration = len(fixed.rows) * fixed.tick_s
        assert stats.mean_power_kw == pytest.approx(energy / duration, rel=1e-9)

    def test_paper_reference_ratios(self):
        # 28 -> 8 events is a 71.4% reduction; 2409 vs 2400 s is 0.375%.
        assert 100.0 * (28 - 8) / 28 == pytest.approx(71.4, abs=0.05)
        assert 100.0 * (2409.0 - 2400.0) / 2400.0 == pytest.approx(0.375, abs=1e-9)

    def test_mismatched_scenarios_rejected(self, default_report):
        _, fixed, _ = default_report
        other_fixed, other_pres = run_pair(Scenario(rng_seed=99))
        with pytest.raises(MetricsError):
            compare(fixed, other_pres)

    def test_policy_order_enforced(self, default_report):
        _, fixed, pres = default_report
        with pytest.raises(MetricsError):
            compare(pres, fixed)

    def test_mirror_comparison_has_zero_deltas(self, default_report):
        # Comparing a pair of identical runs: zero deltas everywhere.
        from dataclasses import replace

        from railpeak.scheduling import SchedulerParams

        _, fixed, _ = default_report
        relaxed = replace(
            Scenario(), scheduler=SchedulerParams(p_threshold_kw=max(fixed.totals_kw) + 1000.0)
        )
        f2, p2 = run_pair(relaxed)
        report = compare(f2, p2)
        assert report.extra_delay_mean_s == 0.0
        assert report.extra_delay_pct == 0.0
        if report.exceedance_reduction_pct is not None:
            assert report.exceedance_reduction_pct == 0.0


class TestRendering:
    def test_report_text_sections(self, default_report):
        report, _, _ = default_report
        text = render_report(report)
        assert "[fixed]" in text
        assert "[pres]" in text
        assert "[comparison]" in text
        assert "exceedance_reduction_pct" in text

    def test_report_csv_round_numbers(self, default_report):
        report, _, _ = default_report
        text = report_csv(report)
        header, row = text.strip().split("\n")
        assert len(header.split(",")) == len(row.split(","))
        assert "fixed_exceedance_count" in header
        assert "pres_regen_utilized_kwh" in header

    def test_rendering_is_deterministic(self, default_report):
        report, _, _ = default_report
        assert render_report(report) == render_report(report)
