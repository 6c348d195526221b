import json

import pytest

from skewlab.cli import main, parse_itinerary
from skewlab.errors import ValidationError
from skewlab.report import CSV_HEADERS, load_summary

COMMANDS = {
    "classify": ["--phi", "0.5*sin"],
    "coboundary": ["--phi", "cos2 - cos1"],
    "livsic": ["--phi", "0.5*sin", "--n-max", "5"],
    "eta": ["--phi", "0.5*sin", "--itinerary", "1(0)"],
    "hvalue": ["--phi", "0.5*sin", "--x", "0.3"],
    "witness": ["--phi", "0.5*sin", "--max-prefix", "3", "--grid", "32"],
    "leaf": ["--phi", "0.5*sin", "--z", "0.2,0.3", "--leaf-samples", "65"],
    "reindex": ["--m0", "6,0", "--depth", "6"],
    "cylinder": ["--phi", "constant:0", "--boxes", "0,0.5,0,1;0,0.5,0,1", "--samples", "20000"],
    "birkhoff": ["--phi", "0.5*sin", "--n", "2000"],
    "ergodicity": ["--phi", "0.5*sin", "--M", "8", "--n", "500"],
    "mixing": ["--phi", "0.5*sin", "--n-max", "5", "--samples", "20000"],
    "invariant-witness": ["--a", "1", "--b", "1/3", "--point", "0.25,0.5"],
}


def _run(argv, tmp_path, capsys):
    code = main(argv + ["--out", str(tmp_path)])
    out = capsys.readouterr()
    return code, out.out.strip(), out.err


@pytest.mark.parametrize("command", sorted(COMMANDS))
def test_every_command_emits_valid_summary(command, tmp_path, capsys):
    code, line, _ = _run([command] + COMMANDS[command], tmp_path, capsys)
    assert code == 0 and line
    summary = load_summary(tmp_path / f"{command}.json")
    assert summary["command"] == command and summary["verdict"] == line
    for name in summary["files"]:
        header = (tmp_path / name).read_text().splitlines()[0].split(",")
        assert header == CSV_HEADERS[name[:-4]]


def test_classify_verdicts(tmp_path, capsys):
    assert _run(["classify", "--phi", "0.5*sin"], tmp_path, capsys)[:2] == (0, "StablyErgodic")
    assert _run(["classify", "--phi", "constant:0"], tmp_path, capsys)[:2] == (0, "Special")
    report = load_summary(tmp_path / "classify.json")["result"]
    assert report["branch"] == "Special"


def test_classify_report_contents(tmp_path, capsys):
    _run(["classify", "--phi", "0.5*sin"], tmp_path, capsys)
    result = load_summary(tmp_path / "classify.json")["result"]
    text = json.dumps(result)
    assert "chain" in text and "livsic" in text.lower() and "residual" in text


def test_leaf_csv_columns(tmp_path, capsys):
    _run(["leaf"] + COMMANDS["leaf"], tmp_path, capsys)
    lines = (tmp_path / "leaf.csv").read_text().splitlines()
    assert lines[0] == "x,y,arclength" and len(lines) > 65


def test_mixing_summary_has_rate(tmp_path, capsys):
    _run(["mixing", "--phi", "0.5*sin", "--n-max", "6", "--samples", "200000"], tmp_path, capsys)
    summary = load_summary(tmp_path / "mixing.json")
    assert "rate" in summary["result"]
    assert (tmp_path / "mixing.csv").read_text().splitlines()[0] == "n,C,stderr"
    assert summary["scope"]


def test_exit_codes(tmp_path, capsys):
    assert _run(["classify", "--phi", "bogus(("], tmp_path, capsys)[0] == 2
    assert _run(["classify"], tmp_path, capsys)[0] == 2
    assert _run(["classify", "--phi", "0.5*sin", "--l", "1"], tmp_path, capsys)[0] == 2
    assert _run(["ergodicity", "--phi", "0.5*sin", "--eps", "10", "--q", "sin", "--r", "sin"],
                tmp_path, capsys)[0] == 2
    code, _, err = _run(["witness", "--phi", "0.5*sin", "--budget", "3"], tmp_path, capsys)
    assert code == 3 and "budget" in err
    assert _run(["invariant-witness", "--b", "pi"], tmp_path, capsys)[0] == 2


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"phi": "0.5*sin", "M": 4, "n": 300, "seed": 7}))
    code, _, _ = _run(["ergodicity", "--config", str(cfg), "--n", "200"], tmp_path, capsys)
    assert code == 0
    config = load_summary(tmp_path / "ergodicity.json")["config"]
    assert config["n"] == 200 and config["M"] == 4 and config["seed"] == 7
    cfg.write_text(json.dumps({"phi": "0.5*sin", "unknown": 1}))
    assert _run(["ergodicity", "--config", str(cfg)], tmp_path, capsys)[0] == 2


def test_config_hash_tracks_inputs(tmp_path, capsys):
    _run(["classify", "--phi", "0.5*sin"], tmp_path / "a", capsys)
    _run(["classify", "--phi", "0.5*sin"], tmp_path / "b", capsys)
    _run(["classify", "--phi", "0.4*sin"], tmp_path / "c", capsys)
    h = [load_summary(tmp_path / d / "classify.json")["config_hash"] for d in "abc"]
    assert h[0] == h[1] != h[2]


@pytest.mark.parametrize("command", ["ergodicity", "mixing", "cylinder", "birkhoff"])
def test_reruns_byte_identical(command, tmp_path, capsys):
    argv = [command] + COMMANDS[command] + ["--eps", "0.01"]
    if command != "birkhoff":
        argv += ["--seed", "3"]
    outs = []
    for i, threads in enumerate([None, "1", "4"]):
        extra = ["--threads", threads] if threads and command != "birkhoff" else []
        assert _run(argv + extra, tmp_path / str(i), capsys)[0] == 0
        outs.append({p.name: p.read_bytes() for p in sorted((tmp_path / str(i)).glob("*.csv"))})
    assert outs[0] and outs[0] == outs[1] == outs[2]


def test_parse_itinerary():
    it = parse_itinerary("10(01)", 2)
    assert it.prefix == (1, 0) and it.tail == (0, 1)
    assert parse_itinerary("", 2).tail == (0,)
    assert parse_itinerary("(1)", 2).digit(5) == 1
    assert parse_itinerary("1,10(0)", 11).prefix == (1, 10)
    with pytest.raises(ValidationError):
        parse_itinerary("1x", 2)
