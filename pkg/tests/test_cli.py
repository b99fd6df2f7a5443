import json

import pytest

from ladderlab.cli import EXPERIMENTS, config_hash, load_config, main, run

SINAI = """\
[process]
family = stable
alpha = 1.5
delta = 0.0

[experiment]
name = sinai-check
lambdas = 2, 4, 8
z_schedule = 1e2, 1e3
replicas = 4000
tol = {tol}
{extra}

[output]
prefix = s

[rng]
seed = 7
"""

EXPONENTS = """\
[process]
family = subordinator
kind = drift
d = 3.0

[experiment]
name = exponent-consistency

[output]
prefix = e

[rng]
seed = 1
"""


def _write(tmp_path, text, name="c.ini"):
    p = tmp_path / name
    p.write_text(text)
    return p


def _report(out, prefix):
    return json.loads((out / f"{prefix}.json").read_text())


def test_registry():
    assert set(EXPERIMENTS) == {"sinai-check", "arcsine-test", "exponent-consistency", "amicales-check",
                                "tail-asymptote", "da-check", "regvar-fit", "rw-oracle"}


@pytest.mark.parametrize("text", ["not an ini", "[process]\nfamily = stable\n",
                                  EXPONENTS.replace("exponent-consistency", "nope")])
def test_bad_config_exit_1(tmp_path, text):
    assert run(_write(tmp_path, text), out_dir=tmp_path / "o") == 1


def test_bad_key_exit_1(tmp_path):
    cfg = EXPONENTS.replace("kind = drift", "kind = stable\nalpha = 0.5")
    assert run(_write(tmp_path, cfg), out_dir=tmp_path / "o") == 1


def test_exponents_pass_and_schema(tmp_path):
    out = tmp_path / "o"
    assert main(["--config", str(_write(tmp_path, EXPONENTS)), "--out", str(out)]) == 0
    rep = _report(out, "e")
    assert set(rep) == {"schema", "experiment", "config", "config_hash", "seed", "status", "error",
                        "checks", "nonconverged", "results"}
    assert rep["status"] == "pass" and rep["error"] is None
    assert all(c["passed"] for c in rep["checks"])
    assert rep["config_hash"] == config_hash(load_config(tmp_path / "c.ini"))


def test_seed_override(tmp_path):
    out = tmp_path / "o"
    main(["--config", str(_write(tmp_path, EXPONENTS)), "--out", str(out), "--seed", "99"])
    assert _report(out, "e")["seed"] == 99


def test_sinai_pass_and_worker_invariance(tmp_path):
    cfg = _write(tmp_path, SINAI.format(tol=0.1, extra=""))
    assert run(cfg, workers=1, out_dir=tmp_path / "a") == 0
    assert run(cfg, workers=2, out_dir=tmp_path / "b") == 0
    for ext in ("json", "csv"):
        assert (tmp_path / "a" / f"s.{ext}").read_bytes() == (tmp_path / "b" / f"s.{ext}").read_bytes()
    head = (tmp_path / "a" / "s.csv").read_text().splitlines()[0]
    assert head == "z,lambda,value,stderr,t_min,t_max"


def test_failed_check_exit_2(tmp_path):
    cfg = _write(tmp_path, SINAI.format(tol=0.1, extra="expected_beta = 0.1"))
    assert run(cfg, out_dir=tmp_path / "o") == 2
    assert _report(tmp_path / "o", "s")["status"] == "fail"


def test_nonconverged_exit_3(tmp_path):
    # no target for a non-stable family; a tiny tolerance leaves the index unsettled
    cfg = SINAI.format(tol=1e-9, extra="").replace("family = stable\nalpha = 1.5\ndelta = 0.0",
                                                   "family = brownian\nmu = 0\nsigma = 1")
    assert run(_write(tmp_path, cfg), out_dir=tmp_path / "o") == 3
    rep = _report(tmp_path / "o", "s")
    assert rep["status"] == "nonconverged" and rep["nonconverged"] == ["sinai_index"]


def test_precondition_exit_2(tmp_path):
    cfg = ("[process]\nfamily = brownian\nmu = -1\nsigma = 1\n"
           "[experiment]\nname = arcsine-test\nbeta = 0.5\nrecords = 200\n"
           "[output]\nprefix = a\n[rng]\nseed = 1\n")
    assert run(_write(tmp_path, cfg), out_dir=tmp_path / "o") == 2
    rep = _report(tmp_path / "o", "a")
    assert rep["status"] == "fail" and rep["error"].startswith("PreconditionError")
