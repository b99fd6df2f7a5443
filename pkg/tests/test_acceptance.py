"""Acceptance criteria 1-11.  Each test prints one ``PASS``/``FAIL`` line.

Criteria 3-11 run the shipped ``configs/*.ini`` through :func:`ladderlab.cli.run`
and re-judge the reported values against the tolerances stated here, not the
ones in the config files.
"""

import functools
import json
import math
import shutil
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

from ladderlab.cli import run
from ladderlab.exponents import StableMarginal, fristedt_phi_ratio
from ladderlab.models import Stable
from ladderlab.regvar import rv_index_fit
from ladderlab.sinai import sinai_functional, sinai_index, stable_sinai_exact

pytestmark = pytest.mark.slow

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
OUT = Path(tempfile.mkdtemp(prefix="ladderlab-acceptance-"))


def verdict(capsys, n, ok, msg):
    with capsys.disabled():
        print(f"\n{'PASS' if ok else 'FAIL'} criterion {n}: {msg}")
    assert ok, msg


@functools.lru_cache(maxsize=None)
def cli_report(name, workers=1):
    out = OUT / f"{name}-w{workers}"
    t0 = time.perf_counter()
    code = run(CONFIGS / f"{name}.ini", workers=workers, out_dir=out)
    elapsed = time.perf_counter() - t0
    rep = json.loads((out / f"{name}.json").read_text())
    return code, rep, elapsed, out


def checks(rep, prefix):
    return {c["name"]: c["value"] for c in rep["checks"] if c["name"].startswith(prefix)}


def teardown_module():
    shutil.rmtree(OUT, ignore_errors=True)


def test_criterion_01_stable_sinai_oracle(capsys):
    f = Stable(1.5, 1.0, 0.0)
    exact = stable_sinai_exact(1.5, f.rho, 2.0)
    rng = np.random.default_rng(20240611)
    t0 = time.perf_counter()
    rows = []
    for z, child in zip((1e2, 1e3, 1e4), rng.spawn(3)):
        e = sinai_functional(f, z, 2.0, replicas=100_000, rng=child)
        tol = max(3 * e.stderr, 0.05 * exact)
        rows.append((z, e.value, tol, abs(e.value - exact) <= tol))
    elapsed = time.perf_counter() - t0
    ok = all(r[3] for r in rows) and elapsed <= 300 and abs(exact - 0.5199) < 1e-4
    desc = ", ".join(f"z={z:g}: {v:.4f}" for z, v, _, _ in rows)
    verdict(capsys, 1, ok, f"target {exact:.4f}; {desc}; {elapsed:.0f} s")


@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5])
def test_criterion_02_sinai_index_vs_phi_index(capsys, alpha):
    f = Stable(alpha, 1.0, 0.0)
    m = StableMarginal(alpha, 1.0, 0.0)
    cases = (("at_infinity", np.geomspace(1.0, 1e4, 9), (1e2, 1e3, 1e4)),
             ("at_zero", np.geomspace(1e-4, 1.0, 9), (1e-2, 1e-3, 1e-4)))
    parts, ok = [], True
    for direction, grid, zs in cases:
        fit = rv_index_fit(lambda lam: fristedt_phi_ratio(m, lam, 1.0), direction, grid)
        idx = sinai_index(f, direction, z_schedule=zs, replicas=50_000,
                          rng=np.random.default_rng(20240612))
        ok &= abs(idx.beta - fit.index) <= 0.05
        parts.append(f"{direction}: sinai {idx.beta:.4f} vs phi {fit.index:.4f}")
    verdict(capsys, 2, ok, f"alpha={alpha}: " + "; ".join(parts))


@pytest.mark.parametrize("name", ["exponents_poisson", "exponents_drift"])
def test_criterion_03_mellin_laplace_identities(capsys, name):
    _, rep, _, _ = cli_report(name)
    vals = {**checks(rep, "mellin_G1"), **checks(rep, "laplace_G2")}
    worst = max(abs(v - 1) for v in vals.values())
    ok = len(vals) == 6 and worst <= 0.01
    verdict(capsys, 3, ok, f"{name}: worst relative error {worst:.2e} over {len(vals)} identities")


@pytest.mark.parametrize("name,key,tol", [("exponents_poisson", "recovered_mean", 0.02),
                                          ("exponents_drift", "recovered_drift", 0.03)])
def test_criterion_04_mean_and_drift_recovery(capsys, name, key, tol):
    _, rep, _, _ = cli_report(name)
    ratio = checks(rep, key)[key]
    verdict(capsys, 4, abs(ratio - 1) <= tol, f"{name}: {key}/truth = {ratio:.4f} (tol {tol})")


def test_criterion_05_spatial_arcsine(capsys):
    _, rep, _, _ = cli_report("arcsine_cauchy")
    last = rep["results"]["ladder"][-1]
    po, ps = last["ks_overshoot"]["pvalue"], last["ks_prior_sup"]["pvalue"]
    mean = last["mean_prior_sup"]
    dts = [row["dt"] for row in rep["results"]["ladder"]]
    ok = po >= 0.01 and ps >= 0.01 and abs(mean - 0.5) <= 0.03 and last["n_passed"] >= 5000
    verdict(capsys, 5, ok, f"dt ladder {dts}; KS p overshoot {po:.3f}, prior sup {ps:.3f}; "
                           f"mean {mean:.4f}; passed {last['n_passed']}")


def test_criterion_06_amicales(capsys):
    _, rep, _, _ = cli_report("amicales_cl")
    ea, eai = checks(rep, "ea_x"), checks(rep, "eai_x")
    w_ea = max(abs(v - 1) for v in ea.values())
    w_eai = max(abs(v - 1) for v in eai.values())
    ok = len(ea) >= 2 and w_ea <= 0.05 and w_eai <= 0.10
    verdict(capsys, 6, ok, f"EA worst {w_ea:.2e}, EAI worst {w_eai:.3f} over {len(ea)} points")


def test_criterion_07_tail_asymptote_and_brt(capsys):
    _, rep, _, _ = cli_report("tail_pareto")
    ratios = checks(rep, "ratio_x")
    brt = [c for c in rep["checks"] if c["name"].startswith("brt_bound")]
    in_band = all(0.8 <= r <= 1.2 for r in ratios.values())
    bound_ok = all(c["passed"] for c in brt)
    xs = rep["results"]["report"]["x_grid"]
    ok = len(ratios) >= 2 and xs[-1] / xs[0] >= 9.99 and in_band and bound_ok
    verdict(capsys, 7, ok, f"decade [{xs[0]:g}, {xs[-1]:g}]: ratios {min(ratios.values()):.3f}-"
                           f"{max(ratios.values()):.3f}; BRT bound held at {sum(c['passed'] for c in brt)}"
                           f"/{len(brt)}")


def test_criterion_08_two_asymptotes_agree(capsys):
    _, rep, _, _ = cli_report("tail_pareto")
    cor = checks(rep, "rv_asymptote_x")
    worst = max(abs(v - 1) for v in cor.values())
    verdict(capsys, 8, len(cor) >= 2 and worst <= 0.10, f"worst disagreement {worst:.2e} over {len(cor)} points")


def test_criterion_09_domain_of_attraction(capsys):
    _, rep, _, _ = cli_report("da_pareto")
    c = checks(rep, "")
    p, dev, beta = c["tail_balance"], c["da_deviation"], c["sinai_beta"]
    ok = (rep["results"]["tb"]["passed"] and abs(p - 0.5) <= 0.02 and dev < 0.05
          and abs(beta - 0.35) <= 0.05 and "1e6" in rep["config"]["experiment"]["t"])
    verdict(capsys, 9, ok, f"p {p:.3f}, deviation {dev:.2e} at t=1e6, sinai beta {beta:.4f}")


def test_criterion_10_random_walk_oracle(capsys):
    _, rep, elapsed, _ = cli_report("rw_oracle")
    kr = checks(rep, "key_renewal")
    ok = (set(kr) == {"key_renewal_x=100", "key_renewal_x=300"} and all(abs(v - 1) <= 0.2 for v in kr.values())
          and rep["results"]["replicas"] == 1_000_000 and elapsed <= 120)
    desc = ", ".join(f"{k[12:]}: {v:.3f}" for k, v in kr.items())
    verdict(capsys, 10, ok, f"{desc}; {elapsed:.0f} s")


@pytest.mark.parametrize("name", ["sinai_stable", "arcsine_cauchy", "exponents_poisson"])
def test_criterion_11_determinism(capsys, name):
    code1, _, _, out1 = cli_report(name, 1)
    code2, _, _, out2 = cli_report(name, 2)
    files = sorted(p.name for p in out1.iterdir())
    same = all((out1 / f).read_bytes() == (out2 / f).read_bytes() for f in files)
    ok = code1 == code2 == 0 and same and files == sorted(p.name for p in out2.iterdir())
    verdict(capsys, 11, ok, f"{name}: {', '.join(files)} identical for workers 1 and 2")


def test_sinai_stable_config_passes(capsys):
    code, rep, _, _ = cli_report("sinai_stable")
    beta = rep["results"]["sinai_index"]["beta"]
    ok = code == 0 and math.isclose(beta, 0.75, abs_tol=0.05)
    verdict(capsys, 2, ok, f"sinai_stable.ini: beta {beta:.4f}, phi route {rep['results']['phi_route_index']:.4f}")
