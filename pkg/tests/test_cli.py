import csv
import io
import json

import pytest

from gcdzeta import cli
from gcdzeta import construction as cons

SMALL = ["--set", "budget=300"]


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_config_hash_stable_and_order_independent():
    a = cli.ExperimentConfig.build("construct", {"N": 10**6, "gamma": 0.5}, seed=3)
    b = cli.ExperimentConfig.build("construct", {"gamma": 0.5, "N": 10**6}, seed=3)
    assert a.config_hash == b.config_hash
    assert len(a.config_hash) == 64
    assert cli.ExperimentConfig.build("construct", seed=4).config_hash != a.config_hash


def test_config_round_trip():
    cfg = cli.ExperimentConfig.build("resonate", {"T": 2e3, "beta": 0.45}, seed=2**63)
    back = cli.ExperimentConfig.from_json(cfg.to_json())
    assert back == cfg
    assert back.config_hash == cfg.config_hash


def test_config_rejects_bad_input():
    with pytest.raises(cli.ConfigError):
        cli.ExperimentConfig.build("construct", {"bogus": 1})
    with pytest.raises(cli.ConfigError):
        cli.ExperimentConfig.build("construct", seed=-1)
    with pytest.raises(cli.ConfigError):
        cli.ExperimentConfig.build("construct", seed=2**64)
    with pytest.raises(cli.ConfigError):
        cli.ExperimentConfig.build("nope")


def test_seed_from_config_file_and_flag(tmp_path):
    cfg = cli.ExperimentConfig.build("construct", {"seed": 9})
    assert cfg.seed == 9
    assert cli.ExperimentConfig.build("construct", {"seed": 9}, seed=1).seed == 1


def test_canonical_json_rejects_nan():
    with pytest.raises(ValueError):
        cli.canonical_json({"x": float("nan")})


def test_cache_round_trip_byte_identical(tmp_path):
    params = cons.ConstructionParams(10**6, 0.5, a=1.5, budget=300)
    mset = cons.build_set(params)
    p1 = cli.save_construction(mset, tmp_path / "a")
    loaded = cli.load_construction(params, tmp_path / "a")
    assert loaded.masks == mset.masks
    assert loaded.full_count == mset.full_count and loaded.truncated == mset.truncated
    p2 = cli.save_construction(loaded, tmp_path / "b")
    assert p1.read_bytes() == p2.read_bytes()
    # a fresh build writes the same bytes as well
    p3 = cli.save_construction(cons.build_set(params), tmp_path / "c")
    assert p3.read_bytes() == p1.read_bytes()


def test_cache_miss_returns_none(tmp_path):
    assert cli.load_construction(cons.ConstructionParams(10**6, 0.5, budget=5), tmp_path) is None


def test_cache_hit_skips_enumeration(tmp_path, monkeypatch):
    params = cons.ConstructionParams(10**6, 0.5, a=1.5, budget=300)
    rec = cli.ExperimentRecord(cli.ExperimentConfig.build("construct"))
    cli.cached_set(params, tmp_path, rec)

    def boom(_):
        raise AssertionError("enumeration should be skipped")

    monkeypatch.setattr(cons, "build_set", boom)
    mset = cli.cached_set(params, tmp_path, rec)
    assert len(mset) == 300
    assert rec.log[-1] == "cache hit, enumeration skipped"


@pytest.mark.parametrize("damage", ["truncate", "flip_mask", "wrong_params"])
def test_corrupted_cache_is_rebuilt(tmp_path, damage):
    params = cons.ConstructionParams(10**6, 0.5, a=1.5, budget=300)
    path = cli.save_construction(cons.build_set(params), tmp_path)
    good = path.read_bytes()
    if damage == "truncate":
        path.write_bytes(good[: len(good) // 2])
    else:
        data = json.loads(good)
        if damage == "flip_mask":
            data["masks"][5] = "ffff"
        else:
            data["params"]["budget"] = 301
        path.write_text(cli.canonical_json(data))
    with pytest.raises(ValueError):
        cli.load_construction(params, tmp_path)
    rec = cli.ExperimentRecord(cli.ExperimentConfig.build("construct"))
    mset = cli.cached_set(params, tmp_path, rec)
    assert rec.log[0].startswith("cache corrupt, rebuilt")
    assert len(mset) == 300
    assert path.read_bytes() == good


def test_construct_command_json(tmp_path, capsys):
    code, out, _ = run(capsys, "construct", *SMALL, "--cache-dir", str(tmp_path))
    assert code == 0
    rec = json.loads(out)
    values = {o["name"]: o for o in rec["outputs"]}
    assert values["P_size"]["value"] == 17
    assert values["M_size"]["value"] == 300
    assert values["A_N"]["module"].startswith("gcdzeta.construction ")
    assert rec["checks"][0]["passed"]
    assert rec["config"]["params"]["budget"] == 300
    # second run reads the cache
    code, out, _ = run(capsys, "construct", *SMALL, "--cache-dir", str(tmp_path))
    assert "cache hit, enumeration skipped" in json.loads(out)["log"]


def test_construct_command_csv_and_out(tmp_path, capsys):
    target = tmp_path / "rec.csv"
    code, out, _ = run(capsys, "construct", *SMALL, "--cache-dir", str(tmp_path), "--format", "csv", "--out", str(target))
    assert code == 0 and out == ""
    rows = list(csv.reader(io.StringIO(target.read_text())))
    assert rows[0] == ["parameter", "value", "op", "module"]
    names = {r[0] for r in rows}
    assert {"config.N", "A_N", "check.euler_product"} <= names


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"t": [30.0], "evaluator": "em"}))
    code, out, _ = run(capsys, "zeta", "--config", str(cfg))
    assert code == 0
    rec = json.loads(out)
    re_, im = rec["outputs"][0]["value"]
    assert re_ == pytest.approx(-0.12064228759004370, abs=1e-10)
    assert im == pytest.approx(-0.58369121476370629, abs=1e-10)


def test_exit_code_config_errors(tmp_path, capsys):
    code, _, err = run(capsys, "construct", "--set", "N=5", "--cache-dir", str(tmp_path))
    assert code == 2 and "configuration error" in err
    code, _, _ = run(capsys, "construct", "--set", "colour=3", "--cache-dir", str(tmp_path))
    assert code == 2
    code, _, _ = run(capsys, "zeta", "--set", "evaluator=nope")
    assert code == 2
    code, _, _ = run(capsys, "zeta", "--config", str(tmp_path / "missing.json"))
    assert code == 2


def test_exit_code_budget(capsys):
    code, _, err = run(capsys, "gcdsum", "--set", "brute_N=4", "--set", "brute_bound=400", "--cache-dir", "unused")
    assert code == 3 and "error" in err


def test_gcdsum_command(tmp_path, capsys):
    code, out, _ = run(capsys, "gcdsum", *SMALL, "--cache-dir", str(tmp_path))
    assert code == 0
    rec = json.loads(out)
    vals = {o["name"]: o["value"] for o in rec["outputs"]}
    assert vals["gamma_brute_force_witness"] == [1, 2]
    assert vals["rayleigh"] >= vals["divisor_lower_bound"]


def test_resonate_command_with_scan_log(tmp_path, capsys):
    log = tmp_path / "scan.jsonl"
    code, out, _ = run(
        capsys, "resonate", "--set", "budget=100", "--set", "moments=false", "--set", "scan_budget=120",
        "--set", "smoothed_sum_grid=[1, 10]", "--seed", "5", "--cache-dir", str(tmp_path), "--scan-log", str(log),
    )
    assert code == 0
    rec = json.loads(out)
    vals = {o["name"]: o["value"] for o in rec["outputs"]}
    assert vals["scan_evaluations"] <= 120
    assert len(vals["smoothed_sum_table"]) == 2
    assert any("decoupled" in line for line in rec["log"])
    lines = [json.loads(s) for s in log.read_text().splitlines()]
    assert lines and all(d["seed"] == 5 and d["config_hash"] == rec["config_hash"] for d in lines)
    assert {d["arm"] for d in lines} == {"guided", "baseline"}


def test_verify_command_subset(capsys):
    code, out, _ = run(capsys, "verify", "--set", "only=[2, 3]")
    assert code == 0
    checks = json.loads(out)["checks"]
    assert [c["name"] for c in checks] == ["criterion_2", "criterion_3"]


def test_atomic_write_replaces(tmp_path):
    p = tmp_path / "x" / "f.txt"
    cli.atomic_write(p, "one")
    cli.atomic_write(p, "two")
    assert p.read_text() == "two"
    assert [q.name for q in p.parent.iterdir()] == ["f.txt"]


def test_resonate_smoke_preset(tmp_path, capsys):
    import time

    t0 = time.perf_counter()
    code, out, _ = run(capsys, "resonate", "--cache-dir", str(tmp_path), "--scan-log", str(tmp_path / "s.jsonl"))
    elapsed = time.perf_counter() - t0
    assert code == 0
    rec = json.loads(out)
    vals = {o["name"]: o["value"] for o in rec["outputs"]}
    assert vals["ratio"] <= vals["dense_zeta_max"]
    assert rec["checks"] == [{"name": "ratio_le_scan_max", "passed": True, "detail": rec["checks"][0]["detail"]}]
    assert elapsed < 60
