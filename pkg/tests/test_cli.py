import csv
import json
import subprocess
import sys

import pytest

from conftest import FIXTURES
from hlskit import io
from hlskit.cli import RunConfig, main
from hlskit.errors import StructuralError
from hlskit.gh import gh_exact
from hlskit.metric import validate_metric


def run(tmp_path, *argv, name="out.json"):
    out = tmp_path / name
    code = main([*argv, "--output", str(out)])
    return code, out


def fx(name):
    return str(FIXTURES / name)


class TestPipelines:
    def test_hls_on_bundle_fixture(self, tmp_path):
        code, out = run(tmp_path, "hls", "--input", fx("product_bundle.json"))
        assert code == 0
        h = io.hls_from_json(io.read(out))
        assert validate_metric(h.space, "strict").ok
        assert len(h.space) == 11
        assert out.with_suffix(".dot").read_text().startswith("graph")

    def test_gh_matches_exact(self, tmp_path):
        code, out = run(tmp_path, "gh", "--input", fx("triangle.json"), "--input2", fx("triangle_scaled.json"))
        assert code == 0
        est = io.estimate_from_json(io.read(out))
        x, y = io.space_like(io.read(fx("triangle.json"))), io.space_like(io.read(fx("triangle_scaled.json")))
        assert est.method == "exact" and est.upper == gh_exact(x, y)
        assert est.upper == pytest.approx(0.25)

    def test_gh_estimate_above_cap(self, tmp_path):
        code, out = run(tmp_path, "gh", "--input", fx("product_bundle.json"), "--input2", fx("star3.json"), "--cap", "4")
        assert code == 0
        est = io.read(out)
        assert est["method"] == "net+heuristic" and est["lower"] <= est["upper"]

    def test_converge_csv_non_increasing(self, tmp_path):
        code, out = run(
            tmp_path, "converge", "--input", fx("constant_sequence.json"), "--ns", "1,2,4,8,16",
            "--format", "csv", name="rows.csv",
        )
        assert code == 0
        rows = list(csv.DictReader(out.read_text().splitlines()))
        uppers = [float(r["gh_upper"]) for r in rows]
        lowers = [float(r["gh_lower"]) for r in rows]
        assert [int(r["n"]) for r in rows] == [1, 2, 4, 8, 16]
        for i in range(len(rows)):
            for j in range(i + 1, len(rows)):
                assert uppers[j] <= uppers[i] + (uppers[i] - lowers[i]) + 1e-12

    def test_audit(self, tmp_path):
        code, out = run(
            tmp_path, "audit", "--input", fx("constant_sequence.json"), "--ns", "1,4,16", "--eps-grid", "0.5,0.2"
        )
        assert code == 0
        rep = io.read(out)
        assert rep["agree"] and rep["verdict"] == "converged"

    def test_realize_sample_measure(self, tmp_path):
        code, out = run(tmp_path, "realize", "--input", fx("star3.json"), "--resolution", "4")
        assert code == 0
        k = io.complex_from_json(io.read(out))
        assert set(k.leaf_tags.values()) >= {"node:hub"}
        code, out = run(tmp_path, "sample", "--input", fx("star3.json"), "--step", "0.5")
        assert code == 0 and len(io.read(out)["points"]) == 7
        code, out = run(tmp_path, "measure-check", "--input", fx("star3.json"))
        assert code == 0 and io.read(out)["passed"]

    def test_glue_collapse_orbit(self, tmp_path):
        code, out = run(
            tmp_path, "glue", "--input", fx("triangle.json"), "--input2", fx("triangle_scaled.json"),
            "--mapping", fx("glue_map.json"),
        )
        assert code == 0 and len(io.read(out)["space"]["points"]) == 5
        code, out = run(tmp_path, "collapse", "--input", fx("triangle.json"), "--subset", "a,b")
        assert code == 0 and len(io.read(out)["space"]["points"]) == 2
        gen = tmp_path / "gen.json"
        gen.write_text(json.dumps({"a": "b", "b": "a", "c": "c"}))
        code, out = run(tmp_path, "orbit", "--input", fx("triangle.json"), "--mapping", str(gen))
        assert code == 0 and len(io.read(out)["space"]["points"]) == 2

    def test_warp_and_generate(self, tmp_path):
        code, out = run(tmp_path, "warp", "--input", fx("product_bundle.json"), "--value", "0.5")
        assert code == 0
        base = io.complex_from_json(io.read(fx("product_bundle.json")))
        for e, w in zip(base.edges, io.complex_from_json(io.read(out)).edges):
            assert w.length == pytest.approx(e.length * (0.5 if e.kind == "tangential" else 1.0))
        code, out = run(tmp_path, "generate", "--family", "ReebAnnulus", "--params", "r=4")
        assert code == 0 and io.complex_from_json(io.read(out)).mesh == 0.25


class TestExitCodes:
    def test_validation_failure_is_one(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"points": ["a", "b", "c"], "dist": [[0, 1, 5], [1, 0, 1], [5, 1, 0]]}))
        code, out = run(tmp_path, "validate", "--input", str(bad))
        assert code == 1 and not io.read(out)["ok"]
        assert "'a'" in capsys.readouterr().err

    def test_valid_space_is_zero(self, tmp_path):
        assert run(tmp_path, "validate", "--input", fx("triangle.json"))[0] == 0
        assert run(tmp_path, "validate", "--input", fx("product_bundle.json"))[0] == 0

    def test_structural_error_is_two(self, tmp_path, capsys):
        bad = tmp_path / "neg.json"
        bad.write_text(json.dumps({"points": ["a", "b"], "dist": [[0, -1], [-1, 0]]}))
        assert run(tmp_path, "validate", "--input", str(bad))[0] == 2
        assert "negative" in capsys.readouterr().err

    def test_missing_file_and_bad_json(self, tmp_path):
        assert run(tmp_path, "hls", "--input", str(tmp_path / "nope.json"))[0] == 2
        broken = tmp_path / "broken.json"
        broken.write_text("{")
        assert run(tmp_path, "hls", "--input", str(broken))[0] == 2

    def test_unknown_subcommand_or_flag(self, capsys):
        with pytest.raises(SystemExit) as err:
            main(["frobnicate"])
        assert err.value.code == 2
        with pytest.raises(SystemExit) as err:
            main(["hls", "--bogus"])
        assert err.value.code == 2

    def test_missing_required_option(self, tmp_path, capsys):
        assert run(tmp_path, "converge", "--input", fx("constant_sequence.json"))[0] == 2
        assert "--ns" in capsys.readouterr().err

    def test_config_rejects_nonpositive(self):
        with pytest.raises(StructuralError):
            RunConfig("gh", tol=0.0)
        with pytest.raises(StructuralError):
            RunConfig("audit", eps_grid=(0.1, -1.0))
        with pytest.raises(TypeError):
            RunConfig("gh", colour="red")


class TestReproducibility:
    @pytest.mark.parametrize(
        "argv",
        [
            ["hls", "--input", fx("product_bundle.json")],
            ["gh", "--input", fx("product_bundle.json"), "--input2", fx("star3.json"), "--cap", "4", "--seed", "3"],
            ["converge", "--input", fx("constant_sequence.json"), "--ns", "1,2,4", "--format", "csv"],
        ],
    )
    def test_byte_identical(self, tmp_path, argv):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main([*argv, "--output", str(a)]) == 0
        assert main([*argv, "--output", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    @pytest.mark.parametrize(
        "argv, loader",
        [
            (["hls", "--input", fx("product_bundle.json")], io.hls_from_json),
            (["realize", "--input", fx("star3.json"), "--resolution", "3"], io.complex_from_json),
            (["sample", "--input", fx("star3.json")], io.space_from_json),
            (["collapse", "--input", fx("triangle.json"), "--subset", "b,c"], io.quotient_from_json),
            (["gh", "--input", fx("triangle.json"), "--input2", fx("triangle_scaled.json")], io.estimate_from_json),
        ],
    )
    def test_round_trip(self, tmp_path, argv, loader):
        out = tmp_path / "o.json"
        assert main([*argv, "--output", str(out)]) == 0
        obj = loader(io.read(out))
        again = tmp_path / "again.json"
        again.write_text(io.dumps(obj))
        assert io.read(again) == io.read(out)

    def test_console_script(self):
        res = subprocess.run(
            [sys.executable, "-m", "hlskit.cli", "validate", "--input", fx("triangle.json")],
            capture_output=True, text=True,
        )
        assert res.returncode == 0 and json.loads(res.stdout)["ok"]
