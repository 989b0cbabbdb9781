import csv
import io
import subprocess
import sys

import pytest

from ttdbf.cli import EXIT_INVALID, EXIT_NONCONVERGED, EXIT_OK, main
from ttdbf.experiments import ROW_FIELDS, SINGLE_USER_FIELDS

SMALL = """\
preset: desk
system:
  n_antennas: 32
  n_ttd_per_chain: 2
  n_subcarriers: 3
campaign:
  axis: t_max
  grid_ps: [40, 200]
  n_realizations: 1
  schemes: [parallel, serial_f, full_digital]
"""


@pytest.fixture
def small(tmp_path):
    p = tmp_path / "small.yaml"
    p.write_text(SMALL)
    return p


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_sweep_writes_rows_and_summary(small, tmp_path):
    out = tmp_path / "out.csv"
    trace = tmp_path / "trace.csv"
    code = main(["sweep-tmax", "--scenario", str(small), "--out", str(out),
                 "--workers", "1", "--quiet", "--trace", str(trace)])
    assert code == EXIT_OK
    rows = _rows(out)
    assert tuple(rows[0].keys()) == ROW_FIELDS
    assert len(rows) == 2 * 3
    assert {r["scheme"] for r in rows} == {"parallel", "serial_f", "full_digital"}
    assert all(float(r["rate_bps_hz"]) > 0 for r in rows)
    assert (tmp_path / "out.summary.csv").exists()
    assert len(_rows(trace)) > 0


def test_identical_output_for_identical_seed(small, tmp_path):
    texts = []
    for name in ("a.csv", "b.csv"):
        out = tmp_path / name
        assert main(["sweep-tmax", "--scenario", str(small), "--out", str(out),
                     "--workers", "1", "--quiet", "--seed", "11"]) == EXIT_OK
        texts.append(out.read_bytes())
    assert texts[0] == texts[1]
    out = tmp_path / "c.csv"
    main(["sweep-tmax", "--scenario", str(small), "--out", str(out), "--workers", "1",
          "--quiet", "--seed", "12"])
    assert out.read_bytes() != texts[0]


def test_nonconvergence_exit_code(small, tmp_path):
    small.write_text(SMALL.replace("campaign:", "solver:\n  max_outer: 1\ncampaign:"))
    out = tmp_path / "out.csv"
    code = main(["sweep-tmax", "--scenario", str(small), "--out", str(out),
                 "--workers", "1", "--quiet"])
    assert code == EXIT_NONCONVERGED
    rows = _rows(out)
    assert any(r["converged"] == "false" for r in rows if r["scheme"] != "full_digital")


def test_invalid_scenario_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text(SMALL.replace("n_ttd_per_chain: 2", "n_ttd_per_chain: 3"))
    assert main(["sweep-tmax", "--scenario", str(bad)]) == EXIT_INVALID
    err = capsys.readouterr().err
    assert "line 4" in err and "n_ttd_per_chain" in err
    assert main(["validate", "--scenario", str(bad)]) == EXIT_INVALID


def test_axis_mismatch_is_invalid(small):
    assert main(["sweep-angle", "--scenario", str(small)]) == EXIT_INVALID


def test_bad_arguments_exit_code(capsys):
    assert main(["sweep-tmax", "--realizations", "0"]) == EXIT_INVALID
    assert main(["no-such-command"]) == EXIT_INVALID


def test_validate_prints_normalised_form(small, capsys):
    assert main(["validate", "--scenario", str(small)]) == EXIT_OK
    text = capsys.readouterr().out
    assert "axis: t_max" in text and "n_antennas: 32" in text


def test_single_user_design_table(tmp_path):
    out = tmp_path / "su.csv"
    assert main(["single-user-design", "--preset", "paper", "--angle-step", "30",
                 "--out", str(out)]) == EXIT_OK
    rows = _rows(out)
    assert tuple(rows[0].keys()) == SINGLE_USER_FIELDS
    assert sorted({float(r["theta_deg"]) for r in rows}) == [0, 30, 60, 90, 120, 150, 180]
    assert {"parallel", "serial_f", "hybrid", "infinite", "conventional"} <= {r["topology"] for r in rows}
    broadside = [r for r in rows if float(r["theta_deg"]) == 90]
    assert all(r["region"] == "unimodal(q_c=17)" for r in broadside)
    endfire = [r for r in rows if float(r["theta_deg"]) == 0]
    assert all(r["region"].endswith("[endfire limit]") for r in endfire)


def test_module_entry_point(small):
    out = subprocess.run([sys.executable, "-m", "ttdbf", "validate", "--scenario", str(small)],
                         capture_output=True, text=True)
    assert out.returncode == EXIT_OK and "preset: desk" in out.stdout
