import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stqp import (
    DensitySpec,
    Origin,
    ParseError,
    SimpleGraph,
    TriangularSpec,
    build_convexity_graph,
    gen_blst,
    gen_st_density,
    load_dimacs,
    load_instance,
    save_dimacs,
    save_instance,
)
from stqp.gen import triangular_icdf

from conftest import cycle_graph


class TestTriangularSpec:
    def test_defaults(self):
        spec = TriangularSpec()
        assert (spec.a, spec.c, spec.b) == (0.0, 0.5, 1.0)
        assert spec.mean == pytest.approx(0.5)
        assert spec.variance == pytest.approx(1.0 / 24.0)

    def test_rejects_bad_order(self):
        with pytest.raises(ValueError):
            TriangularSpec(1.0, 0.5, 0.0)
        with pytest.raises(ValueError):
            TriangularSpec(0.0, 0.0, 0.0)

    def test_icdf_frozen_points(self):
        assert triangular_icdf(0.0, 0.0, 0.5, 1.0) == pytest.approx(0.0)
        assert triangular_icdf(1.0, 0.0, 0.5, 1.0) == pytest.approx(1.0)
        assert triangular_icdf(0.5, 0.0, 0.5, 1.0) == pytest.approx(0.5)
        # F(0.25) = 0.25^2 / 0.5 = 0.125 on the left branch
        assert triangular_icdf(0.125, 0.0, 0.5, 1.0) == pytest.approx(0.25)

    def test_icdf_monotone(self):
        u = np.linspace(0, 1, 101)
        vals = triangular_icdf(u, -1.0, 0.25, 2.0)
        assert np.all(np.diff(vals) >= 0)


class TestGenBlst:
    def test_reproducible(self):
        a = gen_blst(8, 42)
        b = gen_blst(8, 42)
        assert np.array_equal(a.q, b.q)
        assert a.name == b.name == "blst_n8_s42"
        assert a.origin == Origin.GENERATED

    def test_seeds_differ(self):
        assert not np.array_equal(gen_blst(8, 1).q, gen_blst(8, 2).q)

    def test_entries_in_support(self):
        inst = gen_blst(12, 7)
        assert float(inst.q.min()) >= 0.0
        assert float(inst.q.max()) <= 1.0
        assert np.array_equal(inst.q, inst.q.T)

    def test_sample_mean_matches_triangular(self):
        # n(n+1)/2 = 820 draws; 3 sigma of the mean ~ 0.0214
        inst = gen_blst(40, 123)
        iu = np.triu_indices(40)
        entries = inst.q[iu]
        spec = TriangularSpec()
        sd = math.sqrt(spec.variance / entries.size)
        assert abs(float(entries.mean()) - spec.mean) <= 3.0 * sd

    def test_custom_spec(self):
        inst = gen_blst(6, 3, TriangularSpec(2.0, 3.0, 5.0))
        assert float(inst.q.min()) >= 2.0
        assert float(inst.q.max()) <= 5.0

    def test_rejects_bad_n(self):
        with pytest.raises(ValueError):
            gen_blst(0, 1)


class TestGenStDensity:
    def test_convexity_graph_matches_sample(self):
        inst, graph = gen_st_density(10, 5, DensitySpec(density=0.4), return_graph=True)
        assert build_convexity_graph(inst) == graph

    def test_density_zero_is_edgeless_and_trivial(self):
        inst, graph = gen_st_density(6, 9, DensitySpec(density=0.0), return_graph=True)
        assert graph.edges == frozenset()
        # every off-diagonal entry exceeds both diagonals' mean: vertex optimal
        assert float(np.min(inst.q)) == float(np.min(np.diag(inst.q)))

    def test_density_one_is_complete(self):
        _, graph = gen_st_density(6, 9, DensitySpec(density=1.0), return_graph=True)
        assert len(graph.edges) == 15

    def test_nontrivial_when_edges_exist(self):
        for seed in range(5):
            inst, graph = gen_st_density(8, seed, DensitySpec(density=0.5), return_graph=True)
            if graph.edges:
                assert float(np.min(inst.q)) < float(np.min(np.diag(inst.q)))

    def test_margin_separates_edge_values(self):
        inst, graph = gen_st_density(8, 21, DensitySpec(density=0.5), return_graph=True)
        q = inst.q
        diag = np.diag(q)
        for i in range(8):
            for j in range(i + 1, 8):
                mid = 0.5 * (diag[i] + diag[j])
                if (i, j) in graph.edges:
                    assert q[i, j] <= mid - 0.1 + 1e-12
                else:
                    assert q[i, j] >= mid + 0.1 - 1e-12

    def test_diagonal_range(self):
        inst = gen_st_density(10, 2, DensitySpec(density=0.3))
        d = np.diag(inst.q)
        assert float(d.min()) >= 1.0 and float(d.max()) <= 2.0

    def test_reproducible(self):
        a = gen_st_density(7, 77, DensitySpec(density=0.6))
        b = gen_st_density(7, 77, DensitySpec(density=0.6))
        assert np.array_equal(a.q, b.q)


class TestInstanceFiles:
    def test_text_round_trip_bit_identical(self, tmp_path):
        inst = gen_blst(7, 13)
        path = tmp_path / "a.stqp"
        save_instance(path, inst)
        back = load_instance(path)
        assert np.array_equal(back.q, inst.q)
        assert back.name == "a"

    def test_json_round_trip_bit_identical(self, tmp_path):
        inst = gen_blst(6, 14)
        path = tmp_path / "b.json"
        save_instance(path, inst)
        back = load_instance(path)
        assert np.array_equal(back.q, inst.q)
        assert back.name == inst.name

    def test_text_format_shape(self, tmp_path):
        inst = gen_blst(3, 1)
        path = tmp_path / "c.stqp"
        save_instance(path, inst)
        lines = path.read_text().splitlines()
        assert lines[0] == f"# {inst.name}"
        assert lines[1] == "stqp 3"
        assert len(lines) == 5

    def test_comments_and_blanks_ignored(self, tmp_path):
        path = tmp_path / "d.stqp"
        path.write_text("# hello\n\nstqp 2\n1.0  # diag\n0.5 2.0\n")
        inst = load_instance(path)
        assert inst.q[0, 0] == 1.0 and inst.q[1, 0] == 0.5 and inst.q[1, 1] == 2.0

    def test_bad_header(self, tmp_path):
        path = tmp_path / "e.stqp"
        path.write_text("qp 2\n1.0\n0.5 2.0\n")
        with pytest.raises(ParseError) as exc:
            load_instance(path)
        assert exc.value.line == 1

    def test_bad_row_length_reports_line(self, tmp_path):
        path = tmp_path / "f.stqp"
        path.write_text("stqp 2\n1.0\n0.5 2.0 3.0\n")
        with pytest.raises(ParseError) as exc:
            load_instance(path)
        assert exc.value.line == 3

    def test_bad_number(self, tmp_path):
        path = tmp_path / "g.stqp"
        path.write_text("stqp 2\nfoo\n0.5 2.0\n")
        with pytest.raises(ParseError) as exc:
            load_instance(path)
        assert exc.value.line == 2

    def test_missing_rows(self, tmp_path):
        path = tmp_path / "h.stqp"
        path.write_text("stqp 3\n1.0\n0.5 2.0\n")
        with pytest.raises(ParseError):
            load_instance(path)

    def test_bad_json(self, tmp_path):
        path = tmp_path / "i.json"
        path.write_text("{not json")
        with pytest.raises(ParseError):
            load_instance(path)

    def test_json_wrong_triangle(self, tmp_path):
        path = tmp_path / "j.json"
        path.write_text(json.dumps({"name": "x", "n": 2, "lower_triangle": [[1.0]]}))
        with pytest.raises(ParseError):
            load_instance(path)


class TestDimacs:
    def test_parse_simple(self, tmp_path):
        path = tmp_path / "g.col"
        path.write_text("c a comment\np edge 4 2\ne 1 2\ne 3 4\n")
        g = load_dimacs(path)
        assert g.n == 4
        assert g.edges == frozenset({(0, 1), (2, 3)})

    def test_zero_index_rejected(self, tmp_path):
        path = tmp_path / "g.col"
        path.write_text("p edge 4 1\ne 0 3\n")
        with pytest.raises(ParseError) as exc:
            load_dimacs(path)
        assert exc.value.line == 2

    def test_self_loop_rejected(self, tmp_path):
        path = tmp_path / "g.col"
        path.write_text("p edge 4 1\ne 2 2\n")
        with pytest.raises(ParseError):
            load_dimacs(path)

    def test_edge_before_problem_line(self, tmp_path):
        path = tmp_path / "g.col"
        path.write_text("e 1 2\np edge 4 1\n")
        with pytest.raises(ParseError):
            load_dimacs(path)

    def test_unknown_line_type(self, tmp_path):
        path = tmp_path / "g.col"
        path.write_text("p edge 2 0\nx 1 2\n")
        with pytest.raises(ParseError):
            load_dimacs(path)

    def test_duplicate_edges_collapse(self, tmp_path):
        path = tmp_path / "g.col"
        path.write_text("p edge 3 2\ne 1 2\ne 2 1\n")
        g = load_dimacs(path)
        assert g.edges == frozenset({(0, 1)})

    def test_complement_flag(self, tmp_path):
        path = tmp_path / "g.col"
        path.write_text("p edge 3 1\ne 1 2\n")
        g = load_dimacs(path, complement=True)
        assert g.edges == frozenset({(0, 2), (1, 2)})

    def test_save_round_trip(self, tmp_path):
        g = cycle_graph(5)
        path = tmp_path / "c5.col"
        save_dimacs(path, g, comment="five cycle")
        assert load_dimacs(path) == g
        assert path.read_text().startswith("c five cycle\n")


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 12), st.integers(0, 2**32 - 1))
def test_blst_round_trip_property(tmp_path_factory, n, seed):
    inst = gen_blst(n, seed)
    path = tmp_path_factory.mktemp("prop") / "inst.stqp"
    save_instance(path, inst)
    assert np.array_equal(load_instance(path).q, inst.q)
