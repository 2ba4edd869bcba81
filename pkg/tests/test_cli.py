import yaml
from click.testing import CliRunner

from mesview.cli import main
from mesview.synthgen import generate_log, preset_paperlike

from .helpers import FIXTURE_20

HEADER = "timestamp,unit_id,step,action\n"


def run(*args, **kwargs):
    return CliRunner().invoke(main, list(args), **kwargs)


def test_validate_clean_log(tmp_path):
    p = tmp_path / "log.csv"
    p.write_text(FIXTURE_20)
    result = run("validate", str(p))
    assert result.exit_code == 0
    assert "events accepted : 20" in result.output


def test_validate_bad_rows_exit_code(tmp_path):
    p = tmp_path / "log.csv"
    p.write_text(HEADER + "2020-03-04T10:00:00,U1,1,begin\n")
    result = run("validate", str(p))
    assert result.exit_code == 1
    assert "unknown action" in result.output


def test_validate_from_stdin():
    result = run("validate", "-", input=FIXTURE_20)
    assert result.exit_code == 0


def test_report_no_events_errors(tmp_path):
    p = tmp_path / "empty.csv"
    p.write_text(HEADER)
    result = run("report", str(p))
    assert result.exit_code != 0
    assert "no events" in result.output


def test_report_schema_and_rows(tmp_path):
    log = generate_log(preset_paperlike(n_units_per_day=80, n_days=3, seed=15))
    p = tmp_path / "log.csv"
    p.write_text(log.to_csv_text())
    result = run("report", str(p))
    assert result.exit_code == 0
    lines = result.output.strip().split("\n")
    assert lines[0] == "step,mean,sd,median,p2.5,p97.5"
    blank = lines.index("")
    duration_rows = lines[1:blank]
    assert len(duration_rows) == 7  # one per step
    assert [r.split(",")[0] for r in duration_rows] == [str(s) for s in range(1, 8)]
    assert lines[blank + 1] == "step,action,count,proportion"


def test_report_rescaled_means_are_one(tmp_path):
    log = generate_log(preset_paperlike(n_units_per_day=80, n_days=3, seed=15))
    p = tmp_path / "log.csv"
    p.write_text(log.to_csv_text())
    out = run("report", str(p)).output
    for row in out.strip().split("\n")[1:8]:
        assert row.split(",")[1] == "1.0000"
    raw = run("report", str(p), "--raw").output
    assert raw.strip().split("\n")[1].split(",")[1] != "1.0000"


def test_report_byte_stable(tmp_path):
    log = generate_log(preset_paperlike(n_units_per_day=40, n_days=2, seed=1))
    p = tmp_path / "log.csv"
    p.write_text(log.to_csv_text())
    assert run("report", str(p)).output == run("report", str(p)).output


def test_report_idle_quantity(tmp_path):
    log = generate_log(preset_paperlike(n_units_per_day=60, n_days=2, seed=2))
    p = tmp_path / "log.csv"
    p.write_text(log.to_csv_text())
    result = run("report", str(p), "--quantity", "idle")
    lines = result.output.strip().split("\n")
    steps = [r.split(",")[0] for r in lines[1 : lines.index("")]]
    assert "1" not in steps  # nothing is idle before the first step
    assert "2" in steps


def test_template_export(tmp_path):
    log = generate_log(preset_paperlike(n_units_per_day=40, n_days=4, seed=3))
    p = tmp_path / "log.csv"
    p.write_text(log.to_csv_text())
    out_file = tmp_path / "tpl.csv"
    result = run(
        "template", str(p), "--step", "1", "--quantity", "starts",
        "--out", str(out_file),
    )
    assert result.exit_code == 0
    lines = out_file.read_text().strip().split("\n")
    assert lines[0] == "bin_start,ma_mean,lower,upper,support"
    assert len(lines) == 49


def test_template_comparison_weekday(tmp_path):
    log = generate_log(preset_paperlike(n_units_per_day=30, n_days=14, seed=4))
    p = tmp_path / "log.csv"
    p.write_text(log.to_csv_text())
    result = run(
        "template", str(p), "--step", "1", "--quantity", "starts",
        "--comparison", "wednesday",
    )
    assert result.exit_code == 0


def test_simulate_deterministic(tmp_path):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    r1 = run("simulate", "--preset", "paperlike", "--seed", "42", "--out", str(a))
    r2 = run("simulate", "--preset", "paperlike", "--seed", "42", "--out", str(b))
    assert r1.exit_code == 0 and r2.exit_code == 0
    assert a.read_bytes() == b.read_bytes()


def test_simulate_requires_source():
    result = run("simulate")
    assert result.exit_code != 0
    assert "need --preset or --config" in result.output


def test_simulate_from_config_file(tmp_path):
    cfg = preset_paperlike(n_units_per_day=5, n_days=1, seed=9)
    path = tmp_path / "gen.yaml"
    path.write_text(
        yaml.safe_dump(
            {
                "n_units_per_day": 5,
                "start_date": "2020-03-02",
                "n_days": 1,
                "seed": 9,
                "scrap_prob": list(cfg.scrap_prob),
                "delay_prob": list(cfg.delay_prob),
                "idle_mu": list(cfg.idle_mu),
                "idle_sigma": list(cfg.idle_sigma),
                "duration_mu": list(cfg.duration_mu),
                "duration_sigma": list(cfg.duration_sigma),
                "intensity": list(cfg.intensity),
            }
        )
    )
    result = run("simulate", "--config", str(path), "--out", "-")
    assert result.exit_code == 0
    assert result.output.startswith("timestamp,unit_id,step,action")
    assert result.output == generate_log(cfg).to_csv_text()
