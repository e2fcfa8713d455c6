import logging

import numpy as np
import pytest

from chunkpart.chunking import id2p
from chunkpart.errors import DomainError
from chunkpart.graph import canonicalize
from chunkpart.ordering import OrderingParams, order_geo_fast
from chunkpart.scaling import (
    ScheduleTotals,
    make_schedule,
    migrated_estimate,
    migrated_exact,
    migrated_random_expected,
    parse_schedule,
    run_schedule,
    scale_in_schedule,
    scale_out_schedule,
)


def brute_force_migration(m, k_before, k_after):
    return sum(id2p(m, k_before, i) != id2p(m, k_after, i) for i in range(m))


class TestMigratedExact:
    def test_hand_case(self):
        # edges 4,5 move 0 -> 1; edges 8..11 move 1 -> 2
        assert migrated_exact(12, 2, 3) == 6

    def test_identity(self):
        assert migrated_exact(1000, 7, 7) == 0
        assert migrated_exact(0, 3, 9) == 0

    def test_against_brute_force(self):
        assert migrated_exact(1000, 4, 5) == brute_force_migration(1000, 4, 5)
        rng = np.random.default_rng(4)
        for _ in range(200):
            m = int(rng.integers(0, 400))
            a, b = (int(x) for x in rng.integers(1, 60, size=2))
            assert migrated_exact(m, a, b) == brute_force_migration(m, a, b)

    def test_symmetry(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            m = int(rng.integers(0, 10_000))
            a, b = (int(x) for x in rng.integers(1, 100, size=2))
            assert migrated_exact(m, a, b) == migrated_exact(m, b, a)

    @pytest.mark.parametrize("args", [(-1, 2, 3), (10, 0, 3), (10, 2, 0)])
    def test_domain(self, args):
        with pytest.raises(DomainError):
            migrated_exact(*args)


class TestMigratedEstimate:
    def test_one_step_from_four_is_half(self):
        assert migrated_estimate(1000, 4, 1) == pytest.approx(500)
        assert migrated_estimate(4_000_000, 4, 1) == pytest.approx(2_000_000)

    def test_divisible_case_matches_exact(self):
        assert migrated_estimate(1200, 2, 1) == pytest.approx(600)
        assert migrated_exact(1200, 2, 3) == 600

    def test_scale_in_costs_the_same(self):
        assert migrated_exact(1200, 3, 2) == 600

    def test_warns_outside_regime(self, caplog):
        with caplog.at_level(logging.WARNING, logger="chunkpart.scaling"):
            migrated_estimate(100, 4, 1)
        assert "outside its regime" in caplog.text

    def test_quiet_inside_regime(self, caplog):
        with caplog.at_level(logging.WARNING, logger="chunkpart.scaling"):
            migrated_estimate(100_000, 4, 1)
        assert caplog.text == ""

    def test_accuracy_in_regime(self):
        rng = np.random.default_rng(6)
        checked = 0
        while checked < 100:
            m = int(rng.integers(100_000, 10_000_001))
            k = int(rng.integers(2, 65))
            x = int(rng.integers(1, k + 1))
            if (k + x) ** 2 / m >= 1e-3:
                continue
            assert abs(migrated_estimate(m, k, x) - migrated_exact(m, k, k + x)) / m < 0.02
            checked += 1

    def test_domain(self):
        with pytest.raises(DomainError):
            migrated_estimate(100, 4, 0)
        with pytest.raises(DomainError):
            migrated_estimate(100, 0, 1)


class TestRandomBaseline:
    def test_value(self):
        assert migrated_random_expected(1000, 4, 5) == pytest.approx(800)
        assert migrated_random_expected(1000, 5, 4) == pytest.approx(800)
        assert migrated_random_expected(1000, 4, 4) == 0

    def test_cep_moves_fewer_edges(self):
        for m in (10_000, 123_457, 1_000_000):
            for k in range(2, 65):
                assert migrated_exact(m, k, k + 1) < m * k / (k + 1)


class TestSchedules:
    def test_parse(self):
        assert parse_schedule("26,27, 28").ks == [26, 27, 28]
        assert parse_schedule("4\n8\n# comment\n16\n").ks == [4, 8, 16]

    @pytest.mark.parametrize("text", ["", "4,x", "4,0", "# only a comment\n"])
    def test_parse_rejects(self, text):
        with pytest.raises(DomainError):
            parse_schedule(text)

    def test_presets(self):
        assert scale_out_schedule(26, 36).ks == list(range(26, 37))
        assert scale_in_schedule(36, 26).ks == list(range(36, 25, -1))
        with pytest.raises(DomainError):
            scale_out_schedule(5, 5)
        with pytest.raises(DomainError):
            scale_in_schedule(4, 8)


class TestRunSchedule:
    @pytest.fixture
    def chain12(self, make_path, identity):
        graph = make_path(13)
        return graph, identity(graph)

    def test_single_entry_has_no_steps(self, chain12):
        graph, ordering = chain12
        assert run_schedule(graph, ordering, make_schedule([4])) == []

    def test_one_step(self, chain12):
        graph, ordering = chain12
        (step,) = run_schedule(graph, ordering, make_schedule([2, 3]))
        assert (step.k_before, step.k_after, step.x, step.direction) == (2, 3, 1, "out")
        assert step.migrated_exact == 6
        assert step.quality_after.k == 3
        assert step.rf_bound == pytest.approx((13 + 12 + 3) / 13)

    def test_repeated_k_moves_nothing(self, chain12):
        graph, ordering = chain12
        (step,) = run_schedule(graph, ordering, make_schedule([5, 5]))
        assert step.migrated_exact == 0
        assert step.direction == "none"

    def test_reverse_schedule_mirrors_counts(self, small_rmat):
        ordering = order_geo_fast(small_rmat, OrderingParams.for_graph(small_rmat.edge_count))
        out = run_schedule(small_rmat, ordering, scale_out_schedule(4, 10))
        back = run_schedule(small_rmat, ordering, scale_in_schedule(10, 4), threads=3)
        assert [s.migrated_exact for s in out] == [s.migrated_exact for s in reversed(back)]
        assert [s.migrated_estimate for s in out] == pytest.approx([s.migrated_estimate for s in reversed(back)])
        assert all(s.direction == "in" for s in back)

    def test_quality_only_inside_range(self, chain12):
        graph, ordering = chain12
        steps = run_schedule(graph, ordering, make_schedule([2, 3, 4, 5]), k_range=(3, 4))
        assert [s.quality_after is not None for s in steps] == [True, True, False]

    def test_totals(self, chain12):
        graph, ordering = chain12
        steps = run_schedule(graph, ordering, make_schedule([2, 3, 2]))
        totals = ScheduleTotals.of(steps)
        assert totals.steps == 2
        assert totals.migrated_exact == 12

    def test_rejects_foreign_ordering(self, chain12, triangle):
        _, ordering = chain12
        with pytest.raises(DomainError):
            run_schedule(triangle, ordering, make_schedule([2, 3]))

    def test_rejects_empty_schedule(self):
        with pytest.raises(DomainError):
            make_schedule([])


def test_scale_out_on_generated_graph_stays_under_bound():
    graph = canonicalize(np.array([(i, (i * 7 + 3) % 200) for i in range(200)] + [(i, i + 1) for i in range(199)]))
    ordering = order_geo_fast(graph, OrderingParams.for_graph(graph.edge_count, k_min=4, k_max=36))
    steps = run_schedule(graph, ordering, scale_out_schedule(26, 36))
    assert len(steps) == 10
    for step in steps:
        assert step.quality_after.rf <= step.rf_bound
