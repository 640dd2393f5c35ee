import copy
import csv
import io
import json

import pytest

from qtsieve import cli
from qtsieve.errors import (EXIT_DRIFT, EXIT_IDENTITY, EXIT_NO_BASELINE, EXIT_OK,
                            EXIT_RESOURCE, EXIT_USAGE, UsageError)

SCAN = ["--set", "q=2", "--set", "Q=1", "--set", "N_values=0"]


def run_main(args, capsys):
    code = cli.main(args)
    out, err = capsys.readouterr()
    return code, out, err


def test_verify_exits_zero(capsys):
    code, out, _ = run_main(["verify"], capsys)
    assert code == EXIT_OK
    report = json.loads(out)
    assert set(report["identity_suite"].values()) == {"pass"}


def test_unknown_kind_is_usage_error(capsys):
    assert run_main(["frobnicate"], capsys)[0] == EXIT_USAGE
    with pytest.raises(UsageError):
        cli.run("frobnicate", {})


def test_scan_contains_tight_instance(capsys):
    code, out, _ = run_main(["ls-scan"] + SCAN, capsys)
    assert code == EXIT_OK
    rows = json.loads(out)["payload"]["reports"]
    tight = [r for r in rows if r["moduli"] == ["t", "t+1"]]
    assert tight and tight[0]["ratio"] == 1.0


@pytest.mark.parametrize("kind", cli.KINDS)
def test_dry_run_for_every_subcommand(kind, capsys):
    code, out, _ = run_main([kind, "--dry-run", "--set", "q=3"], capsys)
    assert code == EXIT_OK
    payload = json.loads(out)
    assert payload["dry_run"] and payload["plan"]["kind"] == kind


def test_schema_violation_before_compute(capsys):
    assert run_main(["ls-scan", "--set", "bogus=1"], capsys)[0] == EXIT_USAGE
    assert run_main(["ls-scan", "--set", "N=x"], capsys)[0] == EXIT_USAGE
    assert run_main(["ls-scan", "--set", "caps=gram:0"], capsys)[0] == EXIT_USAGE
    assert run_main(["ls-scan", "--set", "q=6"], capsys)[0] == EXIT_USAGE


def test_config_file_round(tmp_path, capsys):
    path = tmp_path / "run.cfg"
    path.write_text("# pinned instance\nkind = ls-ratio\nq = 2\nN = 0\nmoduli = t; t+1\n")
    code, out, _ = run_main(["ls-ratio", "--config", str(path)], capsys)
    assert code == EXIT_OK
    assert json.loads(out)["payload"]["ratio"] == 1.0
    assert run_main(["ls-scan", "--config", str(path)], capsys)[0] == EXIT_USAGE


def test_parse_config_text_formats():
    cfg = cli.parse_config_text("q = 3\nN_values = 1..3\nomega = t: 0, 2; t+1: 1\n"
                                "caps = gram:100, units:50\nrequire_coprime = yes\n")
    assert cfg == {"q": 3, "N_values": [1, 2, 3], "omega": {"t": ["0", "2"], "t+1": ["1"]},
                   "caps": {"gram": 100, "units": 50}, "require_coprime": True}


def test_resource_cap_exit(capsys):
    args = ["ls-ratio", "--set", "q=3", "--set", "moduli=t; t^2+1", "--set", "caps=gram:2"]
    assert run_main(args, capsys)[0] == EXIT_RESOURCE


def test_scan_skips_instances_over_cap(capsys):
    full = json.loads(run_main(["ls-scan", "--set", "q=2", "--set", "Q=2", "--set", "N_values=2"], capsys)[1])
    capped = json.loads(run_main(["ls-scan", "--set", "q=2", "--set", "Q=2",
                                  "--set", "N_values=2", "--set", "caps=gram:3"], capsys)[1])
    assert 0 < capped["payload"]["count"] < full["payload"]["count"]


def test_identity_failure_exit(monkeypatch, capsys):
    from qtsieve.errors import IdentityFailure

    def broken(cfg):
        raise IdentityFailure("forced", {"x": 1})

    monkeypatch.setitem(cli.RUNNERS, "pnt", broken)
    code, _, err = run_main(["pnt"], capsys)
    assert code == EXIT_IDENTITY and '"x": 1' in err


@pytest.mark.parametrize("kind,extra", [
    ("ls-scan", ["--set", "q=2", "--set", "Q=2", "--set", "N_values=0,1",
                 "--set", "mode=random-coeffs"]),
    ("ls-ratio", ["--set", "q=3", "--set", "N=1", "--set", "moduli=t; t^2+1"]),
])
def test_byte_identical_across_workers(kind, extra, tmp_path, capsys):
    outs = []
    for workers in (1, 2):
        d = tmp_path / f"w{workers}"
        assert run_main([kind, "--seed", "7", "--workers", str(workers), "--out", str(d)]
                        + extra, capsys)[0] == EXIT_OK
        outs.append((d / f"{kind}.json").read_bytes())
        assert (d / f"{kind}.timing.json").exists()
    a, b = (json.loads(o) for o in outs)
    a["config"].pop("workers"), b["config"].pop("workers")
    assert a == b
    assert cli.dumps(a).encode() == cli.dumps(b).encode()


def test_rerun_is_byte_identical(tmp_path, capsys):
    outs = []
    for i in range(2):
        d = tmp_path / str(i)
        run_main(["shifted", "--set", "q=3", "--set", "N=1", "--out", str(d)], capsys)
        outs.append((d / "shifted.json").read_bytes())
    assert outs[0] == outs[1]


def test_trajectory_csv(tmp_path, capsys):
    code, _, _ = run_main(["trajectory", "--set", "q=2", "--set", "problem=pset",
                           "--set", "N_range=0..3", "--out", str(tmp_path)], capsys)
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO((tmp_path / "trajectory.csv").read_text())))
    assert [int(r["max_size"]) for r in rows] == [1, 2, 4, 8]


def _report():
    return cli.run("pset", {"q": 3, "N": 1})


def test_compare_identical():
    rep = _report()
    assert cli.compare_baseline(rep, copy.deepcopy(rep)) == []


def test_compare_max_size_drift():
    rep = _report()
    base = copy.deepcopy(rep)
    base["payload"]["max_size"] += 1
    diffs = cli.compare_baseline(rep, base)
    assert diffs == [{"field": "payload.max_size", "report": 3, "baseline": 4}]


def test_compare_float_tolerance():
    rep = _report()
    base = copy.deepcopy(rep)
    x = base["payload"]["empirical_exponent"]
    base["payload"]["empirical_exponent"] = x * (1 + 1e-12)
    assert cli.compare_baseline(rep, base) == []
    base["payload"]["empirical_exponent"] = x * (1 + 1e-6)
    assert [d["field"] for d in cli.compare_baseline(rep, base)] == ["payload.empirical_exponent"]


def test_compare_rationals_exactly():
    a = {"b": {"num": "2", "den": "4"}}
    assert cli.compare_baseline(a, {"b": {"num": "1", "den": "2"}}) == []
    assert cli.compare_baseline(a, {"b": {"num": "1", "den": "3"}})


def test_compare_ignores_version():
    rep = _report()
    base = dict(rep, version="0.0.0")
    assert cli.compare_baseline(rep, base) == []


def test_baseline_exit_codes(tmp_path, capsys):
    base = tmp_path / "b.json"
    args = ["pset", "--set", "q=3", "--set", "N=1", "--baseline", str(base)]
    assert run_main(args, capsys)[0] == EXIT_NO_BASELINE
    assert run_main(args + ["--write-baseline"], capsys)[0] == EXIT_OK
    assert run_main(args, capsys)[0] == EXIT_OK
    data = json.loads(base.read_text())
    data["payload"]["max_size"] = 99
    base.write_text(json.dumps(data))
    code, _, err = run_main(args, capsys)
    assert code == EXIT_DRIFT and "payload.max_size" in err


@pytest.mark.parametrize("kind,extra", [
    ("ls-mult", ["--set", "q=3", "--set", "N=1", "--set", "moduli=t; t+1"]),
    ("audit", ["--set", "q=3", "--set", "N=2", "--set", "F=t; t+1", "--set", "G=t^2+1"]),
    ("montgomery", ["--set", "q=2", "--set", "N=2", "--set", "Q=1", "--set", "primes=t",
                    "--set", "omega=t: 0"]),
    ("sqfree", ["--set", "q=3", "--set", "N=2"]),
    ("pset", ["--set", "q=3", "--set", "N=2", "--set", "require_coprime=true"]),
    ("pnt", ["--set", "q=2", "--set", "d_max=5"]),
])
def test_other_subcommands_run(kind, extra, capsys):
    code, out, _ = run_main([kind] + extra, capsys)
    assert code == EXIT_OK
    assert json.loads(out)["kind"] == kind
