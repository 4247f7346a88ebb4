import csv
import io
import json

import pytest

from main import EXIT_INVALID, EXIT_IO, EXIT_OK, main
from src.config.run_config import LOG_LEVEL_ENV, TOL_ENV


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    monkeypatch.delenv(TOL_ENV, raising=False)
    monkeypatch.delenv(LOG_LEVEL_ENV, raising=False)


def read_rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def run_csv(tmp_path, *argv):
    out = tmp_path / "out.csv"
    code = main([*argv, "-o", str(out)])
    return code, out.read_text() if out.exists() else ""


def test_spectrum_table(tmp_path):
    code, text = run_csv(tmp_path, "spectrum", "--delta", "3", "--lambda", "1.25")
    assert code == EXIT_OK
    assert text.splitlines()[0] == "kind,n,branch,physicality,energy"
    assert "JC,0,single,physical,-3" in text.splitlines()
    assert "JC,1,+,physical,4.25" in text.splitlines()
    rows = read_rows(text)
    assert sum(row["physicality"] == "nonphysical" for row in rows) == 11
    assert sum(row["physicality"] == "physical" for row in rows) == 81
    assert "\r" not in text


def test_spectrum_numeric_reconciliation(tmp_path):
    code, text = run_csv(tmp_path, "spectrum", "--numeric")
    assert code == EXIT_OK
    assert text.splitlines()[0] == "kind,n,branch,physicality,energy,numeric,delta_abs"
    rows = read_rows(text)
    truncation = [row for row in rows if row["physicality"] == "truncation"]
    assert len(truncation) == 1
    assert float(truncation[0]["numeric"]) == pytest.approx(44.0)
    assert all(float(row["delta_abs"]) <= 1e-9 for row in rows if row["physicality"] == "physical")


def test_uncoupled_spectrum(tmp_path):
    code, text = run_csv(tmp_path, "spectrum", "--delta", "0", "--lambda", "0", "--nmax", "3")
    assert code == EXIT_OK
    energies = sorted(float(row["energy"]) for row in read_rows(text))
    assert energies == [0, 1, 1, 2, 2, 3, 3]


def test_spectrum_to_stdout(capsys):
    assert main(["spectrum", "--nmax", "4", "--format", "json"]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["status"] == "ok"
    assert payload["params"]["n_max"] == 4
    assert payload["results"][0]["energy"] == -3.0


def test_partners_json(tmp_path):
    out = tmp_path / "partners.json"
    assert main(["partners", "--kind", "L3", "--format", "json", "-o", str(out)]) == EXIT_OK
    payload = json.loads(out.read_text())
    values = {row["quantity"]: row["value"] for row in payload["results"]}
    assert values["K"] == pytest.approx(-0.2)
    assert values["target_delta"] == pytest.approx(3.25)
    assert payload["status"] == "ok"


def test_partners_outside_detuned_domain(tmp_path):
    code, text = run_csv(tmp_path, "partners", "--kind", "L1", "--delta", "1", "--lambda", "2")
    assert code == EXIT_INVALID
    assert text == ""


def test_hierarchy_boundary(tmp_path):
    code, text = run_csv(tmp_path, "hierarchy", "--up", "10", "--down", "1")
    assert code == EXIT_OK
    rows = read_rows(text)
    assert [int(row["index"]) for row in rows if row["record"] == "node"] == [-1, 0, 1, 2, 3, 4, 5]
    assert [row["index"] for row in rows if row["record"] == "boundary"] == ["6"]


def test_anti_jc_hierarchy_ledgers(tmp_path):
    out = tmp_path / "hierarchy.json"
    assert main(["hierarchy", "--sequence", "aJC", "--up", "2", "--down", "1", "--format", "json", "-o", str(out)]) == EXIT_OK
    payload = json.loads(out.read_text())
    assert payload["status"] == "ok"
    nodes = {row["index"]: row for row in payload["results"] if row["record"] == "node"}
    assert nodes[0]["delta"] == pytest.approx(-3.0)
    steps = {row["target"]: row for row in payload["results"] if row["record"] == "step"}
    assert (len(steps[1]["gained"]), len(steps[1]["lost"])) == (2, 0)
    assert (len(steps[-1]["gained"]), len(steps[-1]["lost"])) == (0, 2)


def test_sequence_figure_starts_anti_jc_at_mirrored_node(tmp_path):
    for delta in ("3", "-3"):
        code, text = run_csv(tmp_path, "figures", "--fig", "3", "--delta", delta)
        assert code == EXIT_OK
        assert "aJC(0),0,single,physical,3" in text.splitlines()


def test_invalid_flag_value_exits_invalid(tmp_path):
    code, text = run_csv(tmp_path, "spectrum", "--nmax", "many")
    assert code == EXIT_INVALID
    assert text == ""


def test_resonant_chain(tmp_path):
    code, text = run_csv(tmp_path, "resonant", "--k", "9", "--lambda", "1", "--nmax", "30")
    assert code == EXIT_OK
    census = [row for row in read_rows(text) if row["record"] == "census"]
    assert len(census) == 9
    assert all(row["fewer_levels"] == row["expected"] for row in census)


def test_darboux_pair(tmp_path):
    code, text = run_csv(tmp_path, "darboux", "--pair", "L1")
    assert code == EXIT_OK
    rows = read_rows(text)
    fit = next(row for row in rows if row["record"] == "fit")
    assert float(fit["delta"]) == pytest.approx(2.7271777, abs=1e-5)
    assert float(fit["const"]) == pytest.approx(-1.0, abs=1e-5)


def test_resonant_figure(tmp_path):
    code, text = run_csv(tmp_path, "figures", "--fig", "8")
    assert code == EXIT_OK
    assert text.splitlines()[0] == "series,n,branch,physicality,energy"
    assert "JC,9,single,nonphysical,-9" in text.splitlines()


def test_bad_arguments():
    assert main(["spectrum", "--nmax", "many"]) == EXIT_INVALID
    assert main(["frobnicate"]) == EXIT_INVALID
    assert main(["spectrum", "--nmax", "1"]) == EXIT_INVALID


def test_unwritable_output(tmp_path):
    assert main(["spectrum", "-o", str(tmp_path)]) == EXIT_IO


def test_verify_passes(tmp_path):
    out = tmp_path / "verify.json"
    assert main(["verify", "--format", "json", "-o", str(out)]) == EXIT_OK
    payload = json.loads(out.read_text())
    assert payload["status"] == "ok"
    assert all(row["passed"] for row in payload["results"])
