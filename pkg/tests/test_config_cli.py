import json

import pytest

from atomchain import cli
from atomchain.config import SCHEMA, load_config, parse_config
from atomchain.errors import ConfigError


def base(experiment="gate", **params):
    p = {"gate": "staggered", "N": 4, "Jz": 0.1, "tau": 1.0}
    p.update(params)
    return {"schema": SCHEMA, "experiment": experiment, "params": p}


def write(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data) if not isinstance(data, str) else data)
    return path


def test_parse_minimal():
    cfg = parse_config(base())
    assert cfg.params.gate == "staggered"
    assert cfg.integrator.dt == 0.1
    assert cfg.to_dict()["params"]["N"] == 4


@pytest.mark.parametrize("mutate,match", [
    (lambda d: d.update(extra=1), "unknown key"),
    (lambda d: d["params"].update(typo=1), "unknown key"),
    (lambda d: d.update(schema="atomchain/0"), "schema"),
    (lambda d: d.update(experiment="nope"), "experiment"),
    (lambda d: d["params"].update(N="4"), "integer"),
    (lambda d: d["params"].update(N=True), "integer"),
    (lambda d: d["params"].update(tau=-1.0), "tau"),
    (lambda d: d.update(integrator={"dt": 0}), "dt"),
    (lambda d: d.update(seed=-1), "seed"),
    (lambda d: d.pop("params"), "missing"),
])
def test_invalid_configs(mutate, match):
    d = base()
    mutate(d)
    with pytest.raises(ConfigError, match=match):
        parse_config(d)


def test_protocol_keys_checked_per_kind():
    d = base("quench")
    d["params"] = {"N": 4, "protocol": {"kind": "linear_quench", "zone": {}}}
    with pytest.raises(ConfigError, match="do not apply"):
        parse_config(d)


def test_zone_unknown_key():
    d = {"schema": SCHEMA, "experiment": "sweep-width",
         "params": {"N_values": [4], "widths": [0.1], "zone": {"width": 0.1}}}
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config(d)


def test_oracle_capacity_checked_before_running():
    d = base("quench")
    d["params"] = {"N": 14, "oracle": True, "protocol": {"kind": "linear_quench"}}
    with pytest.raises(ConfigError, match="oracle limit"):
        parse_config(d)


def test_load_config_reports_json_position(tmp_path):
    with pytest.raises(ConfigError, match="line 1"):
        load_config(write(tmp_path, "{not json"))


def test_cli_success_and_outputs(tmp_path, capsys):
    out = tmp_path / "out"
    assert cli.main(["gate", "--config", str(write(tmp_path, base())), "--out", str(out)]) == 0
    body = (out / "gate.csv").read_text().splitlines()
    assert body[0] == "gate,case,measured,predicted,abs_error"
    meta = json.loads((out / "gate.meta.json").read_text())
    assert meta["calibration"]["SPECTRUM_SCALE"] == 1.0
    assert meta["config"]["params"]["N"] == 4


def test_cli_flags_override_config(tmp_path):
    d = {"schema": SCHEMA, "experiment": "oracle-compare", "params": {"n_schedules": 2, "N_max": 3}}
    out = tmp_path / "o"
    assert cli.main(["oracle-compare", "--config", str(write(tmp_path, d)), "--out", str(out), "--seed", "7",
                     "--workers", "1"]) == 0
    assert json.loads((out / "oracle_compare.meta.json").read_text())["config"]["seed"] == 7


def test_cli_config_error_exit_code(tmp_path, capsys):
    d = base()
    d["params"]["bogus"] = 1
    code = cli.main(["gate", "--config", str(write(tmp_path, d)), "--out", str(tmp_path)])
    assert code == cli.EXIT_CONFIG
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "ConfigError" and err["exit_code"] == 2


def test_cli_experiment_mismatch(tmp_path, capsys):
    assert cli.main(["quench", "--config", str(write(tmp_path, base())), "--out", str(tmp_path)]) == cli.EXIT_CONFIG


def test_cli_unsafe_path_refused(tmp_path, capsys):
    d = base(gate="hadamard", N=8, W=1.0, Jz_hold=0.2)
    code = cli.main(["gate", "--config", str(write(tmp_path, d)), "--out", str(tmp_path / "x")])
    assert code == cli.EXIT_REFUSED
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "UnsafePathError"
    assert "W/(N-1)" in err["message"]
    assert not (tmp_path / "x").exists()


def test_cli_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["gate"])
    assert exc.value.code == cli.EXIT_CONFIG
    assert json.loads(capsys.readouterr().err)["error"] == "ConfigError"


def test_cli_rejects_bad_seed(capsys):
    with pytest.raises(SystemExit):
        cli.main(["gate", "--config", "x.json", "--seed", "-3"])


def test_csv_bodies_deterministic(tmp_path):
    d = {"schema": SCHEMA, "experiment": "oracle-compare", "seed": 11, "params": {"n_schedules": 3, "N_max": 4}}
    path = write(tmp_path, d)
    for name in ("a", "b"):
        assert cli.main(["oracle-compare", "--config", str(path), "--out", str(tmp_path / name)]) == 0
    a = (tmp_path / "a" / "oracle_compare.csv").read_bytes()
    assert a == (tmp_path / "b" / "oracle_compare.csv").read_bytes()
