import json

import numpy as np
import pytest

from chunkpart.assignment import read_assignment
from chunkpart.cli import main
from chunkpart.graph import parse_edge_list, read_graph
from chunkpart.ordering import read_ordered_edges


def write_text(path, pairs):
    path.write_text("".join(f"{a} {b}\n" for a, b in pairs))
    return path


@pytest.fixture
def triangle_file(tmp_path):
    return write_text(tmp_path / "triangle.txt", [(0, 1), (1, 2), (2, 0)])


@pytest.fixture
def chain_file(tmp_path):
    """Path of 15 vertices, 14 edges, ordered as given."""
    text = write_text(tmp_path / "chain.txt", [(i, i + 1) for i in range(14)])
    out = tmp_path / "chain.cpeo"
    assert main(["order", str(text), "--algo", "input", "--out", str(out)]) == 0
    return out


def run_json(capsys, argv):
    assert main(argv) == 0
    return json.loads(capsys.readouterr().out)


class TestOrder:
    def test_writes_every_edge_once(self, tmp_path, triangle_file):
        out = tmp_path / "t.cpeo"
        assert main(["order", str(triangle_file), "--out", str(out)]) == 0
        graph, ordering = read_ordered_edges(out)
        assert graph.edge_count == 3
        assert sorted(ordering.permutation.tolist()) == [0, 1, 2]

    def test_is_reproducible(self, tmp_path, small_rmat):
        source = write_text(tmp_path / "g.txt", small_rmat.edges.tolist())
        first, second = tmp_path / "a.cpeo", tmp_path / "b.cpeo"
        assert main(["order", str(source), "--seed", "3", "--out", str(first)]) == 0
        assert main(["order", str(source), "--seed", "3", "--out", str(second)]) == 0
        assert first.read_bytes() == second.read_bytes()

    @pytest.mark.parametrize("algo", ["geo", "geo-baseline", "input", "random", "bfs"])
    def test_every_algorithm(self, tmp_path, triangle_file, algo):
        out = tmp_path / f"{algo}.cpeo"
        assert main(["order", str(triangle_file), "--algo", algo, "--out", str(out)]) == 0
        assert read_ordered_edges(out)[1].edge_count == 3

    def test_baseline_cap(self, tmp_path, triangle_file, monkeypatch, capsys):
        monkeypatch.setenv("CHUNKPART_BASELINE_CAP", "2")
        code = main(["order", str(triangle_file), "--algo", "geo-baseline", "--out", str(tmp_path / "o.cpeo")])
        assert code == 2
        assert "CHUNKPART_BASELINE_CAP" in capsys.readouterr().err

    def test_needs_out(self, triangle_file):
        assert main(["order", str(triangle_file)]) == 2

    @pytest.mark.parametrize(
        "flags",
        [
            ["--algo", "random", "--delta", "3"],
            ["--algo", "bfs", "--bounded-delta"],
            ["--delta", "1", "--bounded-delta"],
        ],
    )
    def test_window_flags(self, tmp_path, triangle_file, flags):
        assert main(["order", str(triangle_file), "--out", str(tmp_path / "o.cpeo"), *flags]) == 2


class TestPartition:
    def test_cep_boundaries(self, capsys, chain_file):
        document = run_json(capsys, ["partition", str(chain_file), "--k", "4"])
        assert document["schema"] == 1
        assert document["partition"]["boundaries"] == [0, 3, 6, 10, 14]

    def test_single_partition(self, capsys, chain_file):
        document = run_json(capsys, ["partition", str(chain_file), "--k", "1"])
        assert document["partition"]["boundaries"] == [0, 14]

    def test_csv_ranges(self, capsys, chain_file):
        assert main(["partition", str(chain_file), "--k", "4", "--format", "csv"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines == ["partition,start,stop", "0,0,3", "1,3,6", "2,6,10", "3,10,14"]

    def test_cep_assignment_follows_the_ordering(self, tmp_path, capsys, chain_file):
        out = tmp_path / "parts.cpas"
        run_json(capsys, ["partition", str(chain_file), "--k", "4", "--assignment", str(out)])
        assert read_assignment(out).part_of.tolist() == [0, 0, 0, 1, 1, 1, 2, 2, 2, 2, 3, 3, 3, 3]

    def test_bench_reports_latency(self, capsys, chain_file):
        document = run_json(capsys, ["partition", str(chain_file), "--k", "4", "--bench", "50"])
        assert document["latency_ns"] > 0

    def test_cep_needs_an_ordering(self, triangle_file):
        assert main(["partition", str(triangle_file), "--k", "2"]) == 2

    @pytest.mark.parametrize("method", ["hash1d", "hash2d", "dbh"])
    def test_hash_methods(self, tmp_path, capsys, triangle_file, method):
        out = tmp_path / "parts.csv"
        argv = ["partition", str(triangle_file), "--k", "2", "--method", method, "--assignment", str(out)]
        document = run_json(capsys, argv)
        assert sum(document["sizes"]) == 3
        assert read_assignment(out, k=2).edge_count == 3

    def test_hash_methods_need_an_assignment_path(self, triangle_file):
        assert main(["partition", str(triangle_file), "--k", "2", "--method", "dbh"]) == 2


class TestEvaluate:
    def test_k_list(self, capsys, chain_file):
        document = run_json(capsys, ["evaluate", str(chain_file), "--k-list", "2,3,4,5,6,7"])
        assert [r["k"] for r in document["reports"]] == [2, 3, 4, 5, 6, 7]
        assert all(r["rf"] <= r["rf_bound"] for r in document["reports"])
        assert document["objective"]["k_min"] == 4

    def test_assignment(self, tmp_path, capsys, triangle_file):
        parts = tmp_path / "parts.csv"
        parts.write_text("edge_index,partition\n0,0\n1,1\n2,2\n")
        document = run_json(capsys, ["evaluate", str(triangle_file), "--assignment", str(parts)])
        (report,) = document["reports"]
        assert report["rf"] == 2.0
        assert report["eb"] == 1.0

    def test_csv(self, capsys, chain_file):
        assert main(["evaluate", str(chain_file), "--k", "4", "--format", "csv"]) == 0
        header, row = capsys.readouterr().out.splitlines()
        assert header == "k,rf,eb,vb,rf_bound"
        assert row.startswith("4,")


class TestScale:
    @pytest.fixture
    def chain12(self, tmp_path):
        text = write_text(tmp_path / "chain12.txt", [(i, i + 1) for i in range(12)])
        out = tmp_path / "chain12.cpeo"
        assert main(["order", str(text), "--algo", "input", "--out", str(out)]) == 0
        return out

    def test_one_step(self, capsys, chain12):
        document = run_json(capsys, ["scale", str(chain12), "--schedule", "2,3"])
        assert document["totals"]["migrated_exact"] == 6
        assert document["steps"][0]["direction"] == "out"

    def test_repeated_k(self, capsys, chain12):
        document = run_json(capsys, ["scale", str(chain12), "--schedule", "5,5"])
        assert document["totals"]["migrated_exact"] == 0

    def test_schedule_file(self, tmp_path, capsys, chain12):
        schedule = tmp_path / "schedule.txt"
        schedule.write_text("# grow then shrink\n2\n3\n2\n")
        document = run_json(capsys, ["scale", str(chain12), "--schedule-file", str(schedule)])
        assert document["schedule"] == [2, 3, 2]
        assert document["totals"]["migrated_exact"] == 12

    def test_presets(self, capsys, chain12):
        document = run_json(capsys, ["scale", str(chain12), "--scale-out", "2:6"])
        assert [s["k_after"] for s in document["steps"]] == [3, 4, 5, 6]

    def test_needs_two_entries(self, chain12):
        assert main(["scale", str(chain12), "--schedule", "4"]) == 2


class TestBound:
    def test_powerlaw(self, capsys):
        document = run_json(capsys, ["bound", "--alphas", "2.2,2.8"])
        assert [round(row["bound"], 2) for row in document["bounds"]] == [2.88, 1.75]

    def test_graph(self, capsys):
        document = run_json(capsys, ["bound", "--vertices", "10", "--edges", "20", "--k", "4"])
        assert document["bounds"][0]["bound"] == pytest.approx(3.4)

    @pytest.mark.parametrize("argv", [["bound", "--alphas", "2.0"], ["bound"], ["bound", "--vertices", "10"]])
    def test_rejects(self, argv):
        assert main(argv) == 2


class TestGen:
    def test_er_to_stdout(self, capsys):
        assert main(["gen", "er", "--n", "3", "--m", "3"]) == 0
        captured = capsys.readouterr()
        assert sorted(map(sorted, parse_edge_list(captured.out).tolist())) == [[0, 1], [0, 2], [1, 2]]
        assert "|E|=3" in captured.err

    def test_rmat_cache(self, tmp_path):
        out = tmp_path / "g.cpgr"
        assert main(["gen", "rmat", "--scale", "5", "--edge-factor", "4", "--seed", "2", "--out", str(out)]) == 0
        graph = read_graph(out)
        assert 0 < graph.edge_count <= 128

    def test_rmat_text_is_reproducible(self, tmp_path):
        paths = [tmp_path / "a.txt", tmp_path / "b.txt"]
        for path in paths:
            assert main(["gen", "rmat", "--scale", "4", "--edge-factor", "8", "--seed", "1", "--out", str(path)]) == 0
        assert paths[0].read_text() == paths[1].read_text()
        assert parse_edge_list(paths[0].read_text()).shape == (128, 2)

    def test_invalid_probabilities(self):
        assert main(["gen", "rmat", "--scale", "4", "--a", "0.9"]) == 2

    def test_too_many_er_edges(self):
        assert main(["gen", "er", "--n", "3", "--m", "4"]) == 2


class TestErrors:
    def test_missing_input(self, tmp_path):
        assert main(["evaluate", str(tmp_path / "absent.cpeo")]) == 2

    def test_corrupt_ordered_file(self, tmp_path):
        path = tmp_path / "bad.cpeo"
        path.write_bytes(b"CPEO\x09\x00" + bytes(16))
        assert main(["evaluate", str(path)]) == 2

    def test_binary_garbage(self, tmp_path):
        path = tmp_path / "bad.bin"
        path.write_bytes(bytes(np.arange(250, 256, dtype=np.uint8)))
        assert main(["partition", str(path), "--k", "2"]) == 2

    def test_malformed_text(self, tmp_path, capsys):
        path = tmp_path / "bad.txt"
        path.write_text("0 1\nzero 2\n")
        assert main(["evaluate", str(path), "--k", "2"]) == 2
        assert "line 2" in capsys.readouterr().err

    def test_bad_environment(self, monkeypatch, triangle_file):
        monkeypatch.setenv("CHUNKPART_THREADS", "0")
        assert main(["evaluate", str(triangle_file), "--k", "2"]) == 2

    def test_undecodable_assignment(self, tmp_path, capsys, triangle_file):
        parts = tmp_path / "parts.csv"
        parts.write_bytes(b"\xff\xfe\x00garbage")
        assert main(["evaluate", str(triangle_file), "--assignment", str(parts)]) == 2
        assert "UTF-8" in capsys.readouterr().err
