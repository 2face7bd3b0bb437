"""End-to-end checks of the command line front end."""

from __future__ import annotations

import json

import pytest
import yaml

from sepsim import scenarios
from sepsim.cli import main


@pytest.fixture
def mini_recipe(tmp_path):
    raw = scenarios.load_recipe("usecase1").to_dict()
    raw.update(
        name="mini",
        duration_s=40.0,
        seeds=[1],
        valve_schedule=[{"time": 20.0, "valve": "V3", "percent": 38.0}],
    )
    path = tmp_path / "mini.yaml"
    path.write_text(yaml.safe_dump(raw))
    return path


def test_run_writes_report_csv_and_figures(mini_recipe, tmp_path, capsys):
    out = tmp_path / "result" / "report.json"
    assert main(["run", "--recipe", str(mini_recipe), "--out", str(out)]) == 0
    assert out.exists()
    assert (out.parent / "mini-seed1.csv").exists()
    assert (out.parent / "mini-seed1-levels.png").exists()
    assert (out.parent / "mini-network.png").exists()
    lines = capsys.readouterr().out.splitlines()
    assert any(line.startswith("report: ") for line in lines)
    assert any(line.startswith("figure: ") for line in lines)


def test_run_opt_out_flags(mini_recipe, tmp_path):
    out = tmp_path / "bare" / "report.json"
    assert main(["run", "--recipe", str(mini_recipe), "--out", str(out),
                 "--no-figures", "--no-csv"]) == 0
    assert list(out.parent.iterdir()) == [out]


def test_run_twice_is_byte_identical(mini_recipe, tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    for out in (a, b):
        main(["run", "--recipe", str(mini_recipe), "--out", str(out),
              "--no-figures", "--no-csv"])
    assert a.read_bytes() == b.read_bytes()


def test_seed_flags(mini_recipe, tmp_path):
    out = tmp_path / "r.json"
    main(["run", "--recipe", str(mini_recipe), "--out", str(out),
          "--seeds", "2", "--no-figures", "--no-csv"])
    assert json.loads(out.read_text())["seeds"] == [1, 2]
    main(["run", "--recipe", str(mini_recipe), "--out", str(out),
          "--seed-list", "7", "--no-figures", "--no-csv"])
    assert json.loads(out.read_text())["seeds"] == [7]


def test_bad_seed_count_is_config_error(mini_recipe, capsys):
    assert main(["run", "--recipe", str(mini_recipe), "--seeds", "0"]) == 2
    assert "sepsim: error:" in capsys.readouterr().err


def test_out_dir_env_var(mini_recipe, tmp_path, monkeypatch):
    monkeypatch.setenv("SEPSIM_OUT_DIR", str(tmp_path / "envout"))
    assert main(["run", "--recipe", str(mini_recipe), "--no-figures", "--no-csv"]) == 0
    assert (tmp_path / "envout" / "mini-report.json").exists()


def test_validate_accepts_builtin(capsys):
    assert main(["validate", "usecase1"]) == 0
    assert capsys.readouterr().out.startswith("ok: usecase1")


def test_validate_names_the_violated_bound(tmp_path, capsys):
    raw = scenarios.load_recipe("usecase1").to_dict()
    raw["setpoints"] = {"water": 90.0, "oil": 60.0}
    bad = tmp_path / "bad.yaml"
    bad.write_text(yaml.safe_dump(raw))
    assert main(["validate", str(bad)]) == 2
    err = capsys.readouterr().err
    assert "sepsim: error:" in err
    assert "water=90.0" in err and "(0, 80.0)" in err


def make_report_and_tables(mini_recipe, tmp_path, stability_band):
    report = tmp_path / "report.json"
    main(["run", "--recipe", str(mini_recipe), "--out", str(report),
          "--no-figures", "--no-csv"])
    tables = tmp_path / "tables.yaml"
    tables.write_text(yaml.safe_dump({
        "smoke": {"kind": "network-baseline", "stability_band": list(stability_band),
                  "latency_reference_ms": 77.0}
    }))
    return report, tables


def test_compare_pass_and_fail_exit_codes(mini_recipe, tmp_path, capsys):
    report, tables = make_report_and_tables(mini_recipe, tmp_path, (95.0, 100.0))
    assert main(["compare", str(report), "--table", "smoke",
                 "--tables-file", str(tables)]) == 0
    assert "PASS" in capsys.readouterr().out

    report, tables = make_report_and_tables(mini_recipe, tmp_path, (0.0, 1.0))
    assert main(["compare", str(report), "--table", "smoke",
                 "--tables-file", str(tables)]) == 1
    captured = capsys.readouterr()
    assert "FAIL" in captured.out
    assert "comparison against smoke failed" in captured.err


def test_compare_unknown_table(mini_recipe, tmp_path, capsys):
    report, tables = make_report_and_tables(mini_recipe, tmp_path, (0.0, 100.0))
    assert main(["compare", str(report), "--table", "ghost",
                 "--tables-file", str(tables)]) == 2
    assert "unknown reference table" in capsys.readouterr().err


def test_compare_missing_report(capsys):
    assert main(["compare", "nowhere.json", "--table", "table1"]) == 2
    assert "no such report" in capsys.readouterr().err


def test_recipes_listing(capsys):
    assert main(["recipes"]) == 0
    out = capsys.readouterr().out
    for name in scenarios.BUILTIN_RECIPES:
        assert name in out


def test_recipes_prints_verbatim(capsys):
    assert main(["recipes", "usecase2"]) == 0
    assert capsys.readouterr().out == scenarios.recipe_text("usecase2")


def test_recipes_unknown_name(capsys):
    assert main(["recipes", "nope"]) == 2
    assert "sepsim: error:" in capsys.readouterr().err


def test_unknown_subcommand_exits_via_argparse():
    with pytest.raises(SystemExit) as exc:
        main(["explode"])
    assert exc.value.code == 2
