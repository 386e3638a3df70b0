import json

import pytest
import yaml

from lognormal_surrogates.__main__ import main
from lognormal_surrogates.configuration import CONF
from lognormal_surrogates.scenarios import SCENARIOS, Comparison


def run(capsys, *argv):
    with pytest.raises(SystemExit) as exc:
        main(list(argv))
    out, err = capsys.readouterr()
    return exc.value.code, out, err


class TestMapSuite:

    def test_forward(self, capsys):
        code, out, _ = run(capsys, "map-forward", "--nu", "0.5", "--sigma", "0.5", "--n-factors", "5")
        assert code == 0
        document = json.loads(out)
        assert abs(document["solution"]["m"] - 5.48) <= 0.01
        assert abs(document["solution"]["omega"] - 4.35) <= 0.01
        assert document["metadata"]["command"] == "map-forward"
        assert document["metadata"]["version"] == CONF.version

    def test_forward_inverse_alias(self, capsys):
        code, out, _ = run(capsys, "map-forward", "--nu", "0.5", "--sigma", "0.5", "--family", "inv")
        assert code == 0
        assert json.loads(out)["solution"]["family"] == "inv-nakagami-product"

    def test_infeasible_target(self, capsys):
        code, out, _ = run(capsys, "map-forward", "--nu", "-1", "--sigma", "1", "--n-factors", "2", "--family", "inv")
        assert code == 2
        assert out == ""

    def test_unknown_family(self, capsys):
        code, _, _ = run(capsys, "map-forward", "--nu", "0", "--sigma", "1", "--family", "rician")
        assert code == 1

    def test_missing_argument(self, capsys):
        code, _, err = run(capsys, "map-forward", "--sigma", "1")
        assert code == 1
        assert "--nu" in err

    def test_reverse(self, capsys):
        code, out, _ = run(capsys, "map-reverse", str(CONF.cascade_table2))
        assert code == 0
        document = json.loads(out)
        assert abs(document["total"]["nu"] - 13.44) <= 0.03
        assert [b["hops"] for b in document["blocks"]] == [5, 5, 5]

    def test_reverse_csv_to_file(self, capsys, tmp_path):
        # Preparation
        target = tmp_path / "blocks.csv"

        # Execution
        code, out, _ = run(capsys, "map-reverse", str(CONF.cascade_table2), "--format", "csv", "--out", str(target))

        # Assertion
        assert code == 0
        assert out == ""
        lines = target.read_text().splitlines()
        assert any(line.startswith("# command: map-reverse") for line in lines)
        assert lines[-1].startswith("total,15,")

    def test_empty_cascade(self, capsys, tmp_path):
        # Preparation
        path = tmp_path / "empty.json"
        path.write_text("[]")

        # Execution
        code, _, _ = run(capsys, "map-reverse", str(path))

        # Assertion
        assert code == 1


class TestEvalSuite:

    def test_cf_at_origin(self, capsys):
        code, out, _ = run(capsys, "eval", "cf", "--nu", "0.5", "--sigma", "0.5", "--model", "nak",
                           "--grid=-1:1:3:lin")
        assert code == 0
        rows = json.loads(out)["rows"]
        assert [row["omega"] for row in rows] == [-1.0, 0.0, 1.0]
        assert rows[1]["nak_re"] == 1.0 and rows[1]["nak_im"] == 0.0
        assert rows[0]["nak_im"] == -rows[2]["nak_im"]

    def test_pdf_csv(self, capsys):
        code, out, _ = run(capsys, "eval", "pdf", "--nu", "0", "--sigma", "1", "--model", "lognormal",
                           "--grid", "0.5:2:4:log", "--format", "csv")
        assert code == 0
        lines = out.splitlines()
        meta = [line for line in lines if line.startswith("# ")]
        table = [line for line in lines if not line.startswith("#")]
        assert "# quantity: pdf" in meta
        assert table[0] == "r,lognormal"
        assert len(table) == 5

    def test_single_snr(self, capsys):
        code, out, _ = run(capsys, "eval", "ber", "--nu", "0.5", "--sigma", "0.5", "--model", "nak",
                           "--gamma-bar", "10")
        assert code == 0
        rows = json.loads(out)["rows"]
        assert len(rows) == 1 and rows[0]["gamma_bar"] == 10.0
        assert 0 < rows[0]["nak"] < 0.5

    def test_composite_needs_multipath(self, capsys, caplog):
        code, _, _ = run(capsys, "eval", "composite-pdf", "--nu", "0.5", "--sigma", "0.5")
        assert code == 1
        assert "composite-pdf needs --alpha and --mu" in caplog.text

    def test_nonpositive_grid(self, capsys):
        code, _, _ = run(capsys, "eval", "pdf", "--nu", "0", "--sigma", "1", "--grid=-1:1:3:lin")
        assert code == 1


class TestValidateSuite:

    def test_table1(self, capsys):
        code, out, _ = run(capsys, "validate", "table1")
        assert code == 0
        document = json.loads(out)
        assert document["passed"] is True
        assert [r["scenario"] for r in document["reports"]] == ["table1"]

    def test_deterministic(self, capsys):
        first = run(capsys, "validate", "table2", "--seed", "7")[1]
        second = run(capsys, "validate", "table2", "--seed", "7")[1]
        assert first == second
        assert json.loads(first)["metadata"]["seed"] == 7

    def test_unknown_scenario(self, capsys):
        code, _, _ = run(capsys, "validate", "figure9")
        assert code == 1

    def test_failed_comparison(self, capsys, monkeypatch):
        monkeypatch.setitem(SCENARIOS, "failing", lambda ctx: ([Comparison("x", 0, 1.0, 2.0, 0.1)], {}))
        code, out, _ = run(capsys, "validate", "failing")
        assert code == 3
        document = json.loads(out)
        assert document["passed"] is False
        assert document["reports"][0]["comparisons"][0]["passed"] is False


class TestInfoSuite:

    def test_json(self, capsys):
        code, out, _ = run(capsys, "info")
        assert code == 0
        info = json.loads(out)
        assert info["name"] == CONF.name
        assert info["defaults"]["seed"] == CONF.seed

    def test_yaml(self, capsys):
        code, out, _ = run(capsys, "info", "--output", "yaml")
        assert code == 0
        assert yaml.safe_load(out)["version"] == CONF.version
