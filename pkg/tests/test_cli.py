import json
import math

import pytest
from hypothesis import given, settings, strategies as st

from chainavoid.cli import ProblemConfig, config_from_dict, emit_config, parse_config, run
from chainavoid.errors import ParameterError
from chainavoid.patterns import four_color_example

FOUR = [list(p) for p in four_color_example().patterns]


def write(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc) if not isinstance(doc, str) else doc)
    return str(path)


def test_parse_four_color(tmp_path):
    cfg = parse_config(write(tmp_path, {"schema": "chainavoid/config/1", "m": 4, "patterns": FOUR}))
    assert cfg.family == four_color_example()


@pytest.mark.parametrize(
    "doc,msg",
    [
        ({"m": 1, "patterns": [[1]]}, "pattern length < 2"),
        ({"m": 1, "patterns": [[1, 1]], "beta": [0]}, "weights must be positive"),
        ({"m": 1, "patterns": [[1, 2]]}, "out of range"),
        ({"m": 1, "patterns": [[1, 1]], "colour": 3}, "colour: unknown field"),
        ({"patterns": [[1, 1]]}, "m: required"),
        ({"m": 1, "patterns": [[1, 1]], "schema": "other/9"}, "schema"),
        ("{not json", "malformed document"),
    ],
)
def test_diagnostics(tmp_path, doc, msg):
    with pytest.raises(ParameterError, match=msg):
        parse_config(write(tmp_path, doc))


@settings(max_examples=50, deadline=None)
@given(
    st.integers(1, 3).flatmap(
        lambda m: st.fixed_dictionaries(
            {
                "m": st.just(m),
                "patterns": st.lists(st.lists(st.integers(1, m), min_size=2, max_size=3), min_size=1, max_size=4, unique_by=tuple),
                "seed": st.integers(0, 2**63),
            },
            optional={
                "beta": st.lists(st.floats(0.1, 3), min_size=m, max_size=m),
                "n": st.integers(0, 6),
                "alpha": st.floats(0.01, 2),
                "samples": st.integers(0, 10**6),
                "band": st.tuples(st.integers(0, 3), st.integers(3, 6)).map(list),
            },
        )
    )
)
def test_round_trip(doc):
    cfg = config_from_dict(doc)
    again = config_from_dict(json.loads(emit_config(cfg)))
    assert again == cfg


def run_cli(argv, capsys):
    code = run(argv)
    return code, capsys.readouterr()


def test_omega_crit_command(tmp_path, capsys):
    path = write(tmp_path, {"m": 1, "patterns": [[1, 1, 1]]})
    code, out = run_cli(["omega-crit", "--config", path], capsys)
    assert code == 0
    assert "1.38629436112" in out.out and "({1},{1})" in out.out
    assert f"{2 * math.log(2):.12g}" == "1.38629436112"


def test_count_command(tmp_path, capsys):
    path = write(tmp_path, {"m": 1, "patterns": [[1, 1]]})
    code, out = run_cli(["count", "--config", path, "--n", "4"], capsys)
    assert code == 0 and "mu: 168" in out.out


def test_exit_codes(tmp_path, capsys):
    dense = write(tmp_path, {"m": 2, "patterns": [[1, 2]]})
    assert run_cli(["omega-crit", "--config", dense], capsys)[0] == 1
    bad = write(tmp_path, {"m": 1, "patterns": [[1]]}, "bad.json")
    assert run_cli(["check", "--config", bad], capsys)[0] == 1
    missing_n = write(tmp_path, {"m": 1, "patterns": [[1, 1]]}, "nn.json")
    assert run_cli(["count", "--config", missing_n], capsys)[0] == 1


def test_containers_then_verify(tmp_path, capsys):
    cfg = write(tmp_path, {"m": 1, "patterns": [[1, 1]], "n": 3, "seed": 4})
    rep = tmp_path / "rep.json"
    assert run_cli(["containers", "--config", cfg, "--out", str(rep)], capsys)[0] == 0
    doc = json.loads(rep.read_text())
    assert doc["schema"] == "chainavoid/report/1" and doc["command"] == "containers"
    assert doc["result"]["coverage"] is True
    code, out = run_cli(["verify", "--config", str(rep)], capsys)
    assert code == 0 and "coverage: True" in out.out


def test_verify_detects_tampering(tmp_path, capsys):
    cfg = write(tmp_path, {"m": 1, "patterns": [[1, 1]], "n": 2})
    rep = tmp_path / "rep.json"
    run_cli(["containers", "--config", cfg, "--out", str(rep)], capsys)
    doc = json.loads(rep.read_text())
    doc["result"]["containers"] = doc["result"]["containers"][:1]
    rep.write_text(json.dumps(doc))
    assert run_cli(["verify", "--config", str(rep)], capsys)[0] == 3


def test_balanced_csv(tmp_path, capsys):
    cfg = write(tmp_path, {"m": 1, "patterns": [[1, 1]], "n": 6, "delta": 0.3})
    csv_path = tmp_path / "cg.csv"
    code, out = run_cli(["balanced", "--config", cfg, "--csv", str(csv_path)], capsys)
    assert code == 0
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "ell,j,codegree,cap" and len(lines) > 1


def test_cli_overrides_and_band(tmp_path, capsys):
    cfg = write(tmp_path, {"m": 1, "patterns": [[1, 1]], "n": 1})
    code, out = run_cli(["count", "--config", cfg, "--n", "4", "--band", "2,2"], capsys)
    assert code == 0 and "mu: 64" in out.out
    code, _ = run_cli(["count", "--config", cfg, "--band", "x"], capsys)
    assert code == 1


def test_expect_modes(tmp_path, capsys):
    cfg = write(tmp_path, {"m": 1, "patterns": [[1, 1]], "n": 2, "p": ["1/2"], "samples": 500, "seed": 1})
    code, out = run_cli(["expect", "--config", cfg, "--exact"], capsys)
    assert code == 0 and "13/4" in out.out and "Monte Carlo" not in out.out
    code, out = run_cli(["expect", "--config", cfg], capsys)
    assert "Monte Carlo" in out.out


@pytest.mark.parametrize(
    "command,extra",
    [
        ("check", []), ("lcg", []), ("omega-crit", []), ("extremal", ["--n", "3"]), ("count", ["--n", "3"]),
        ("sample", ["--n", "3"]), ("sample", ["--n", "4", "--sample", "--samples", "50"]),
        ("supersat", ["--n", "3"]), ("balanced", ["--n", "6"]), ("containers", ["--n", "2"]),
    ],
)
def test_reports_are_byte_identical(tmp_path, capsys, command, extra):
    cfg = write(tmp_path, {"m": 2, "patterns": [[1, 1], [2, 2], [2, 1]], "seed": 5})
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run_cli([command, "--config", cfg, "--out", str(a), *extra], capsys)[0] == 0
    assert run_cli([command, "--config", cfg, "--out", str(b), *extra], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()
