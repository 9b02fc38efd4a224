import math

import numpy as np
import pytest

from stqp import (
    ALL_VARIANTS,
    BenchRecord,
    FormulationConfig,
    SolverConfig,
    bench_run,
    gen_blst,
    oracle_solve,
    performance_profile,
    records_from_csv,
    records_to_csv,
    records_to_json,
    render_summary,
    solve_variant,
    summarize,
)

from conftest import random_instance


def rec(instance, variant, status="optimal", value=1.0, bound=1.0, gap=0.0,
        wall_s=1.0, nodes=3, bound_s=0.0):
    return BenchRecord(instance, variant, status, value, bound, gap, wall_s, nodes, bound_s)


class TestFormulationConfig:
    def test_parse_all_labels(self):
        for label in ALL_VARIANTS:
            fc = FormulationConfig.parse(label)
            assert fc.label == label

    @pytest.mark.parametrize("bad", ["milp3-l1", "milp1", "milp1-l3", "milp1-l1-x", "l1-milp1"])
    def test_parse_rejects(self, bad):
        with pytest.raises(ValueError):
            FormulationConfig.parse(bad)


class TestSolveVariant:
    def test_oracle_label(self):
        inst = random_instance(4, 1)
        r = solve_variant(inst, "oracle")
        assert r.variant == "oracle"
        assert r.status == "optimal"
        assert r.value == pytest.approx(oracle_solve(inst).value, abs=1e-9)

    def test_trivial_short_circuit(self):
        inst = random_instance(4, 0)  # min entry on the diagonal for this draw
        from stqp import preprocess_trivial

        if preprocess_trivial(inst) is None:
            pytest.skip("draw not trivial")
        r = solve_variant(inst, "milp1-l2")
        assert r.nodes == 0
        assert r.bound_s == 0.0

    def test_lb2_cache_reused(self):
        inst = gen_blst(8, 5)
        cache: dict = {}
        r1 = solve_variant(inst, "milp1-l2", SolverConfig(), lb2_cache=cache)
        assert inst.name in cache
        r2 = solve_variant(inst, "milp2-l2", SolverConfig(), lb2_cache=cache)
        assert r2.bound_s == r1.bound_s  # same certificate object's seconds


class TestBenchRun:
    def test_cartesian_product_count(self):
        instances = [random_instance(4, 200 + k) for k in range(5)]
        records = bench_run(instances, ALL_VARIANTS, SolverConfig(time_limit_s=60.0))
        assert len(records) == 40
        # instance-major order
        assert [r.instance for r in records[:8]] == [instances[0].name] * 8
        assert {r.variant for r in records} == set(ALL_VARIANTS)

    def test_all_agree_with_oracle(self):
        instances = [random_instance(4, 210 + k) for k in range(2)]
        records = bench_run(instances, ALL_VARIANTS, SolverConfig(time_limit_s=60.0))
        for inst in instances:
            target = oracle_solve(inst).value
            for r in records:
                if r.instance == inst.name:
                    assert r.value == pytest.approx(target, abs=1e-6)

    def test_crash_becomes_error_record(self, monkeypatch):
        import stqp.bench as bench_mod

        orig = bench_mod.solve_milp
        calls = {"k": 0}

        def flaky(inst, model, cfg):
            calls["k"] += 1
            if calls["k"] == 1:
                raise RuntimeError("boom")
            return orig(inst, model, cfg)

        monkeypatch.setattr(bench_mod, "solve_milp", flaky)
        instances = [random_instance(4, 230)]
        records = bench_run(instances, ("milp1-l1", "milp2-l1"), SolverConfig())
        assert len(records) == 2
        assert records[0].status == "error"
        assert math.isnan(records[0].value)
        assert records[1].status == "optimal"

    def test_on_record_callback(self):
        seen = []
        bench_run([random_instance(3, 240)], ("milp1-l1",), SolverConfig(), on_record=seen.append)
        assert len(seen) == 1


class TestCsv:
    def test_round_trip_exact(self):
        instances = [random_instance(4, 250 + k) for k in range(2)]
        records = bench_run(instances, ("milp1-l1", "milp1-l2"), SolverConfig())
        text = records_to_csv(records)
        back = records_from_csv(text)
        assert back == records

    def test_json_contains_meta(self):
        records = [rec("a", "milp1-l1")]
        text = records_to_json(records, meta={"k": 1})
        assert '"k": 1' in text
        assert '"instance": "a"' in text


class TestSummarize:
    def test_known_totals(self):
        records = [
            rec("a", "m1", status="optimal", wall_s=1.0, nodes=5),
            rec("b", "m1", status="time_limit", gap=0.5, wall_s=2.0, nodes=7),
            rec("c", "m1", status="time_limit", gap=0.1, wall_s=3.0, nodes=1),
            rec("a", "m2", status="optimal", wall_s=0.5, nodes=2),
            rec("b", "m2", status="error", value=math.nan, wall_s=0.0, nodes=0),
            rec("c", "m2", status="optimal", wall_s=1.5, nodes=4),
        ]
        rows = summarize(records)
        by = {r["variant"]: r for r in rows}
        m1 = by["m1"]
        assert m1["instances"] == 3
        assert m1["optimal"] == 1
        assert m1["time_limit"] == 2
        assert m1["error"] == 0
        assert m1["total_wall_s"] == pytest.approx(6.0)
        assert m1["avg_gap"] == pytest.approx(0.3)
        assert m1["total_nodes"] == 13
        m2 = by["m2"]
        assert m2["optimal"] == 2 and m2["error"] == 1
        assert m2["avg_gap"] is None

    def test_dnn_pseudo_row(self):
        records = [
            rec("a", "milp1-l2", bound_s=0.7),
            rec("a", "milp2-l2", bound_s=0.7),
            rec("b", "milp1-l2", bound_s=0.2),
        ]
        rows = summarize(records)
        dnn = next(r for r in rows if r["variant"] == "dnn")
        assert dnn["instances"] == 2
        assert dnn["total_wall_s"] == pytest.approx(0.9)

    def test_no_dnn_row_without_bound_time(self):
        rows = summarize([rec("a", "milp1-l1")])
        assert all(r["variant"] != "dnn" for r in rows)

    def test_render_alignment(self):
        rows = summarize([rec("a", "milp1-l1")])
        text = render_summary(rows)
        lines = text.splitlines()
        assert lines[0].startswith("variant")
        assert "milp1-l1" in lines[1]


class TestPerformanceProfile:
    def test_hand_computed_three_variants(self):
        # v1 solves a in 1s, b in 4s; v2 solves a in 2s, b in 2s;
        # v3 solves a only, in 1s.  Ratios: v1 -> (1, 2), v2 -> (2, 1),
        # v3 -> (1, inf).  Fractions at tau=1: 1/2, 1/2, 1/2; tau=2: 1, 1, 1/2.
        records = [
            rec("a", "v1", wall_s=1.0),
            rec("b", "v1", wall_s=4.0),
            rec("a", "v2", wall_s=2.0),
            rec("b", "v2", wall_s=2.0),
            rec("a", "v3", wall_s=1.0),
            rec("b", "v3", status="time_limit", gap=1.0, wall_s=9.0),
        ]
        points = performance_profile(records)
        got = {(p.variant, p.tau): p.fraction for p in points}
        assert got[("v1", 1.0)] == pytest.approx(0.5)
        assert got[("v2", 1.0)] == pytest.approx(0.5)
        assert got[("v3", 1.0)] == pytest.approx(0.5)
        assert got[("v1", 2.0)] == pytest.approx(1.0)
        assert got[("v2", 2.0)] == pytest.approx(1.0)
        assert got[("v3", 2.0)] == pytest.approx(0.5)

    def test_instance_solved_by_nobody_excluded(self):
        records = [
            rec("a", "v1", wall_s=1.0),
            rec("z", "v1", status="time_limit", gap=1.0),
            rec("a", "v2", wall_s=1.0),
            rec("z", "v2", status="time_limit", gap=1.0),
        ]
        points = performance_profile(records)
        # only instance a counts: both variants solve everything they can
        assert all(p.fraction == 1.0 for p in points)

    def test_empty_when_nothing_solved(self):
        records = [rec("a", "v1", status="time_limit", gap=1.0)]
        assert performance_profile(records) == []

    def test_fractions_monotone_in_tau(self):
        instances = [random_instance(4, 260 + k) for k in range(3)]
        records = bench_run(instances, ("milp1-l1", "milp2-l1"), SolverConfig())
        points = performance_profile(records)
        for variant in {p.variant for p in points}:
            fr = [p.fraction for p in sorted(
                (p for p in points if p.variant == variant), key=lambda p: p.tau)]
            assert all(b >= a for a, b in zip(fr, fr[1:]))
