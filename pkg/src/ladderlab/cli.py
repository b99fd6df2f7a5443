"""Experiment driver.

``ladderlab --config run.ini [--seed N] [--workers N] [--out DIR]``

The config has sections ``[process]``, ``[experiment]``, ``[output]`` and
``[rng]``; see the README for the keys of each experiment.  Exit codes: 0
pass, 1 config error, 2 a check failed, 3 a diagnostic did not converge.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import (DomainError, InsufficientDataError, LadderLabError, NonConvergenceError,
                     PreconditionError, WindowTooNarrowError)

SCHEMA = 1
EXIT_PASS, EXIT_CONFIG, EXIT_FAIL, EXIT_NONCONV = 0, 1, 2, 3


class ConfigError(Exception):
    pass


@dataclass
class Check:
    name: str
    value: float
    target: float
    tol: float
    passed: bool


@dataclass
class Outcome:
    checks: list = field(default_factory=list)
    results: dict = field(default_factory=dict)
    csv_header: list = field(default_factory=list)
    csv_rows: list = field(default_factory=list)
    nonconverged: list = field(default_factory=list)

    def check(self, name, value, target, tol, passed=None):
        if passed is None:
            passed = abs(value - target) <= tol
        self.checks.append(Check(name, float(value), float(target), float(tol), bool(passed)))


# --------------------------------------------------------------------------
# config helpers


def _floats(s):
    return [float(v) for v in str(s).replace(";", ",").split(",") if v.strip()]


def _get(d, key, default=None, cast=float):
    if key not in d:
        if default is None:
            raise ConfigError(f"missing key {key!r}")
        return default
    try:
        return cast(d[key])
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {d[key]!r}") from exc


def _bool(s):
    return str(s).strip().lower() in ("1", "true", "yes", "on")


def _step_law(proc):
    from .asymptotics import StepLaw
    from .measures import law_from_config

    up = {k[3:]: v for k, v in proc.items() if k.startswith("up.")}
    down = {k[5:]: v for k, v in proc.items() if k.startswith("down.")}
    return StepLaw(law_from_config(up) if up else None, law_from_config(down) if down else None)


def _subordinator(proc):
    from .exponents import DriftSubordinator, PoissonSubordinator, stable_subordinator

    kind = proc.get("kind")
    if kind == "drift":
        return DriftSubordinator(_get(proc, "d", 1.0))
    if kind == "poisson":
        return PoissonSubordinator(_get(proc, "rate", 1.0), _get(proc, "d", 0.0))
    if kind == "stable":
        return stable_subordinator(_get(proc, "alpha"))
    raise ConfigError(f"unknown subordinator kind {kind!r}")


def _family(proc):
    from .models import family_from_config

    return family_from_config(proc)


# --------------------------------------------------------------------------
# experiments


def exp_sinai_check(proc, exp, rng, workers):
    from .exponents import StableMarginal, fristedt_phi_ratio
    from .models import Stable
    from .regvar import rv_index_fit
    from .sinai import sinai_index

    f = _family(proc)
    direction = exp.get("direction", "at_infinity")
    lams = _floats(exp.get("lambdas", "2,4,8"))
    zs = _floats(exp["z_schedule"]) if "z_schedule" in exp else None
    replicas = _get(exp, "replicas", 100_000, int)
    tol = _get(exp, "tol", 0.05)
    expected = _get(exp, "expected_beta", math.nan)
    if math.isnan(expected) and isinstance(f, Stable):
        expected = f.alpha * f.rho
    out = Outcome()
    idx = sinai_index(f, direction, lams, zs, replicas, rng, workers, tol=tol)
    out.results["sinai_index"] = {"beta": idx.beta, "stderr": idx.stderr, "z": idx.z,
                                  "stabilized": idx.stabilized, "in_unit_interval": idx.in_unit_interval,
                                  "by_z": [list(t) for t in idx.by_z]}
    if not idx.stabilized:
        out.nonconverged.append("sinai_index")
    if not math.isnan(expected):
        out.check("beta_vs_expected", idx.beta, expected, tol)
    if _bool(exp.get("phi_route", "false")) and isinstance(f, Stable):
        m = StableMarginal(f.alpha, f.c, f.delta)
        grid = np.geomspace(1.0, 1e4, 9)
        fit = rv_index_fit(lambda lam: fristedt_phi_ratio(m, lam, 1.0), direction, grid)
        out.results["phi_route_index"] = fit.index
        out.check("beta_vs_phi_index", idx.beta, fit.index, tol)
    out.csv_header = ["z", "lambda", "value", "stderr", "t_min", "t_max"]
    out.csv_rows = [[e.z, e.lam, e.value, e.stderr, *e.t_window] for e in idx.estimates]
    return out


def exp_arcsine_test(proc, exp, rng, workers):
    from .arcsine import ks_fit, mean_undershoot_check, overshoot_limit_cdf, prior_sup_law
    from .models import Stable
    from .simulate import first_passages

    f = _family(proc)
    r = _get(exp, "r", 1e3)
    n = _get(exp, "records", 5000, int)
    ladder = _floats(exp.get("dt_ladder", "1e-2,1e-3"))
    level = _get(exp, "level", 0.01)
    mean_tol = _get(exp, "mean_tol", 0.03)
    beta = _get(exp, "beta", math.nan)
    if math.isnan(beta):
        if not isinstance(f, Stable):
            raise ConfigError("beta is required for non-stable families")
        beta = f.alpha * f.rho
    if not 0 < beta < 1:
        raise ConfigError("arcsine-test needs 0 < beta < 1")
    out = Outcome()
    law = prior_sup_law(beta)
    per_dt = []
    recs = None
    for dt, child in zip(ladder, rng.spawn(len(ladder))):
        recs = first_passages(f, r, n, child, dt=dt, workers=workers)
        o = recs.O[recs.passed] / r
        s = recs.prior_sup[recs.passed] / r
        ko = ks_fit(o, lambda x: overshoot_limit_cdf(beta, x), level)
        ks = ks_fit(s, law.cdf, level)
        mean, se = mean_undershoot_check(recs, r)
        per_dt.append({"dt": dt, "ks_overshoot": asdict(ko), "ks_prior_sup": asdict(ks),
                       "mean_prior_sup": mean, "mean_stderr": se, "n_passed": recs.n_passed})
    out.results["ladder"] = per_dt
    last = per_dt[-1]
    out.check("ks_overshoot_pvalue", last["ks_overshoot"]["pvalue"], level, 0.0,
              last["ks_overshoot"]["passed"])
    out.check("ks_prior_sup_pvalue", last["ks_prior_sup"]["pvalue"], level, 0.0,
              last["ks_prior_sup"]["passed"])
    out.check("mean_prior_sup", last["mean_prior_sup"], beta, mean_tol)
    out.csv_header = ["r", "T", "U", "O", "prior_sup", "flag"]
    out.csv_rows = [[rec.r, rec.T_r, rec.undershoot, rec.overshoot, rec.prior_sup, rec.flag]
                    for rec in recs.records()]
    return out


def exp_exponent_consistency(proc, exp, rng, workers):
    from .exponents import drift_from_G1, frullani_G1, harmonic_G2, laplace_G2, mean_from_G2, mellin_hat_G1

    prov = _subordinator(proc)
    if proc.get("kind") == "stable":
        raise ConfigError("exponent-consistency runs on drift or poisson subordinators")
    thetas = _floats(exp.get("thetas", "0.25,1,4"))
    tol = _get(exp, "tol", 0.01)
    g1 = lambda y: frullani_G1(prov, y)  # noqa: E731
    g2 = lambda x: harmonic_G2(prov, x)  # noqa: E731
    k1 = getattr(prov, "kinks_G1", list)()
    k2 = getattr(prov, "kinks_G2", list)()
    out = Outcome()
    out.csv_header = ["theta", "exp_G1_hat", "one_plus_phi", "exp_minus_laplace_G2", "phi_ratio"]
    for th in thetas:
        phi = prov.phi(th)
        a = math.exp(mellin_hat_G1(g1, th, points=k1))
        b = math.exp(-laplace_G2(g2, th, points=k2))
        out.check(f"mellin_G1_theta={th:g}", a / (1 + phi), 1.0, tol)
        out.check(f"laplace_G2_theta={th:g}", b / (phi / (1 + phi)), 1.0, tol)
        out.csv_rows.append([th, a, 1 + phi, b, phi / (1 + phi)])
    d = getattr(prov, "d", 0.0)
    rate = getattr(prov, "rate", 0.0)
    if rate > 0 and d == 0:
        est = mean_from_G2(g2)
        out.results["mean_from_G2"] = asdict(est)
        out.check("recovered_mean", est.value / rate, 1.0, _get(exp, "mean_tol", 0.02))
        if not est.converged:
            out.nonconverged.append("mean_from_G2")
    if d > 0:
        est = drift_from_G1(g1)
        out.results["drift_from_G1"] = asdict(est)
        out.check("recovered_drift", est.value / d, 1.0, _get(exp, "drift_tol", 0.03))
        if not est.converged:
            out.nonconverged.append("drift_from_G1")
    return out


def _cp_parts(f):
    from .measures import Exponential, LawSide, NullSide

    up = f.measure.plus
    if not (isinstance(up, LawSide) and isinstance(up.law, Exponential)
            and isinstance(f.measure.minus, NullSide) and f.drift < 0):
        raise ConfigError("amicales-check needs exponential upward jumps only and a negative drift")
    return up.rate, up.law.rate, -f.drift


def exp_amicales_check(proc, exp, rng, workers):
    from .asymptotics import cramer_lundberg_ladders, ea_rhs, eai_rhs, empirical_po
    from .simulate import ladder_height_sample, potential_measure_dual

    f = _family(proc)
    rate, jump_rate, c = _cp_parts(f)
    xs = _floats(exp.get("x_grid", "0.5,1,1.5,2,2.5,3"))
    tol_ea = _get(exp, "tol_ea", 0.05)
    tol_eai = _get(exp, "tol_eai", 0.10)
    edges = np.linspace(0.0, _get(exp, "v_edge_max", 10.0), _get(exp, "v_bins", 100, int) + 1)
    v_rng, l_rng = rng.spawn(2)
    lt = cramer_lundberg_ladders(rate, jump_rate, c)
    V_sim = potential_measure_dual(f, _get(exp, "v_horizon", 100.0), 0.0,
                                   _get(exp, "v_replicas", 20_000, int), v_rng, edges, workers,
                                   closed_form=False)
    V_cf = potential_measure_dual(f, 1.0, 0.0, 1)
    sample = ladder_height_sample(f, _get(exp, "ladder_replicas", 100_000, int), l_rng,
                                  _get(exp, "level_cap", 1e3), workers)
    po = empirical_po(sample, V_cf)
    out = Outcome()
    out.results["po_normalisation"] = po.norm
    out.csv_header = ["x", "pi_tail", "ea", "eai_simulated", "po_empirical", "po_stderr"]
    for x in xs:
        pi = float(f.measure.right_tail(x))
        ea = ea_rhs(lt, x).value
        eai = eai_rhs(V_sim, f.measure, x)
        emp = po.tail(x)
        out.check(f"ea_x={x:g}", ea / pi, 1.0, tol_ea)
        out.check(f"eai_x={x:g}", eai.value / emp.value, 1.0, tol_eai)
        out.csv_rows.append([x, pi, ea, eai.value, emp.value, emp.stderr])
    return out


def exp_tail_asymptote(proc, exp, rng, workers):
    from .asymptotics import (brt_window, rv_tail_asymptote, dual_ladder_mean, empirical_po,
                              tail_asymptote_finite_mean, tail_report, well_sampled_decade)
    from .simulate import ladder_height_sample, potential_measure_dual

    f = _family(proc)
    lo, hi, k = _floats(exp.get("x_grid", "1,1e4,13"))
    grid = np.geomspace(lo, hi, int(k))
    band = _floats(exp.get("band", "0.8,1.2"))
    z = _get(exp, "window", 1.0)
    v_rng, l_rng, m_rng = rng.spawn(3)
    V = potential_measure_dual(f, _get(exp, "v_horizon", 100.0), 0.0,
                               _get(exp, "v_replicas", 20_000, int), v_rng, workers=workers)
    closed, sim = dual_ladder_mean(f, rng=m_rng)
    if closed is None and sim is None:
        raise ConfigError("no route to mu = E H^_1 for this family")
    mu = closed if closed is not None else sim.value
    sample = ladder_height_sample(f, _get(exp, "ladder_replicas", 100_000, int), l_rng,
                                  _get(exp, "level_cap", 1e4), workers)
    po = empirical_po(sample, V)
    decade = well_sampled_decade(po, grid)
    rep = tail_report(_family_label(proc), po, decade,
                      lambda x: tail_asymptote_finite_mean(f.measure, mu, x), mu=mu,
                      normalisation=po.norm)
    out = Outcome()
    out.results["report"] = json.loads(rep.to_json())
    out.results["mu_closed_form"] = closed
    out.results["mu_simulated"] = asdict(sim) if sim is not None else None
    if closed is not None and sim is not None:
        out.check("mu_routes_agree", sim.value / closed, 1.0, 0.05)
    out.csv_header = ["x", "empirical", "asymptote", "ratio", "stderr"]
    alpha = _get(exp, "alpha", math.nan)
    for x, e, a, rt, se in zip(rep.x_grid, rep.empirical, rep.asymptote, rep.ratio, rep.stderr):
        out.check(f"ratio_x={x:.4g}", rt, 0.5 * (band[0] + band[1]), 0.0, band[0] <= rt <= band[1])
        b = brt_window(po, f.measure, mu, x, z, V)
        out.check(f"brt_bound_x={x:.4g}", b.bound_lhs, b.bound_rhs, 0.0, b.bound_ok)
        if not math.isnan(alpha):
            cor = rv_tail_asymptote(f.measure, alpha, mu, x)
            out.check(f"rv_asymptote_x={x:.4g}", cor / a, 1.0, _get(exp, "rv_tol", 0.10))
        out.csv_rows.append([x, e, a, rt, se])
    return out


def _family_label(proc):
    return ",".join(f"{k}={proc[k]}" for k in sorted(proc))


def exp_da_check(proc, exp, rng, workers):
    from .models import da_limit_check, positivity_param, scaling_b, stable_c_for_quantile_norming, tb_check
    from .sinai import sinai_index

    f = _family(proc)
    alpha = _get(exp, "alpha")
    delta = _get(exp, "delta", 0.0)
    ts = _floats(exp.get("t", "1e6"))
    lams = _floats(exp.get("lambdas", "0.5,1,2"))
    tol = _get(exp, "tol", 0.05)
    n = _get(exp, "replicas", 100_000, int)
    out = Outcome()
    tb = tb_check(f.measure, alpha, delta)
    out.results["tb"] = asdict(tb)
    out.check("tail_balance", tb.p, (1 + delta) / 2, 0.02, tb.passed)
    c = stable_c_for_quantile_norming(alpha, delta)
    b_rng, s_rng = rng.spawn(2)
    bs = [scaling_b(f, t, child, n, full=True, workers=workers)
          for t, child in zip(ts, b_rng.spawn(len(ts)))]
    table = dict(zip(ts, (b for b, _ in bs)))
    da = da_limit_check(f, (alpha, c, delta), lams, ts, lambda t: table[t])
    out.results["da"] = asdict(da)
    out.results["c"] = c
    out.check("da_deviation", da.max_deviation, 0.0, tol, da.max_deviation < tol)
    out.csv_header = ["t", "b", "b_stderr", "deviation"]
    out.csv_rows = [[t, b, se, d] for t, (b, se), d in zip(ts, bs, da.by_t)]
    if _bool(exp.get("sinai", "false")):
        idx = sinai_index(f, "at_infinity", replicas=_get(exp, "sinai_replicas", 20_000, int),
                          rng=s_rng, workers=workers)
        target = alpha * positivity_param(alpha, delta)
        out.results["sinai_index"] = {"beta": idx.beta, "stderr": idx.stderr,
                                      "stabilized": idx.stabilized, "by_z": [list(v) for v in idx.by_z]}
        out.check("sinai_beta", idx.beta, target, _get(exp, "sinai_tol", 0.05))
        if not idx.stabilized:
            out.nonconverged.append("sinai_index")
    return out


def exp_regvar_fit(proc, exp, rng, workers):
    from .exponents import (fristedt_phi_ratio, frullani_G1, mellin_hat_G1, phi_from_triplet,
                            stable_subordinator, stable_subordinator_triplet)
    from .regvar import abelian_shift_check, difference_limit, rv_index_fit

    if proc.get("family") != "subordinator" or proc.get("kind") != "stable":
        raise ConfigError("regvar-fit runs on stable subordinators")
    alpha = _get(proc, "alpha")
    m = stable_subordinator(alpha)
    probes = _floats(exp.get("probes", "1e4,1e5,1e6"))
    tol = _get(exp, "tol", 0.03)
    g1 = lambda y: frullani_G1(m, y)  # noqa: E731
    dl = difference_limit(g1, probes=probes, tol=_get(exp, "convergence_tol", 0.01))
    phi1 = phi_from_triplet(stable_subordinator_triplet(alpha), 1.0)
    lo, hi, k = _floats(exp.get("phi_grid", "1e2,1e6,9"))
    grid = np.geomspace(lo, hi, int(k))
    fit = rv_index_fit(lambda lam: 1 + phi1 * fristedt_phi_ratio(m, lam, 1.0), "at_infinity", grid)
    shift_probes = _floats(exp.get("shift_probes", "1e5,1e6"))
    sh = abelian_shift_check(g1, lambda th: mellin_hat_G1(g1, th), shift_probes, alpha)
    out = Outcome()
    out.results.update(difference_limit=asdict(dl), phi_index=asdict(fit), abelian=asdict(sh))
    out.check("difference_limit", dl.beta, alpha, tol)
    out.check("phi_index", fit.index, alpha, tol)
    out.check("routes_agree", dl.beta, fit.index, 2 * tol)
    out.check("abelian_shift", sh.max_deviation / abs(sh.target), 0.0, _get(exp, "shift_tol", 0.03),
              sh.max_deviation <= _get(exp, "shift_tol", 0.03) * abs(sh.target))
    if not dl.converged:
        out.nonconverged.append("difference_limit")
    out.csv_header = ["probe", "slope"]
    out.csv_rows = [[p, s] for p, s in zip(probes, dl.by_probe)]
    return out


def exp_rw_oracle(proc, exp, rng, workers):
    from .asymptotics import rw_ladder_oracle

    step = _step_law(proc)
    xs = _floats(exp.get("x_grid", "100,300"))
    z = _get(exp, "window", 1.0)
    tol = _get(exp, "tol", 0.20)
    o = rw_ladder_oracle(step, _get(exp, "n_max", 100_000, int), _get(exp, "replicas", 1_000_000, int),
                         rng, _get(exp, "level_cap", 1e3), workers)
    out = Outcome()
    out.results.update(m=o.m, m_stderr=o.m_stderr, not_reached=o.not_reached,
                       unfinished=o.unfinished, replicas=o.replicas)
    if o.unfinished:
        out.nonconverged.append("walks exhausted n_max")
    out.csv_header = ["x", "ratio", "stderr", "target", "normalised", "exceedances"]
    for x in xs:
        k = o.key_renewal(None, x, window=z)
        out.check(f"key_renewal_x={x:g}", k.normalised, 1.0, tol)
        out.csv_rows.append([x, k.ratio, k.stderr, k.target, k.normalised,
                             int(np.sum(o.ladder.heights > x))])
    return out


EXPERIMENTS = {
    "sinai-check": exp_sinai_check,
    "arcsine-test": exp_arcsine_test,
    "exponent-consistency": exp_exponent_consistency,
    "amicales-check": exp_amicales_check,
    "tail-asymptote": exp_tail_asymptote,
    "da-check": exp_da_check,
    "regvar-fit": exp_regvar_fit,
    "rw-oracle": exp_rw_oracle,
}


# --------------------------------------------------------------------------
# reports


def _clean(v):
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    if isinstance(v, np.ndarray):
        return _clean(v.tolist())
    return v


def load_config(path) -> dict:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(str(exc)) from exc
    cfg = {s: dict(cp[s]) for s in cp.sections()}
    for s in ("process", "experiment"):
        if s not in cfg:
            raise ConfigError(f"missing section [{s}]")
    cfg.setdefault("output", {})
    cfg.setdefault("rng", {})
    return cfg


def config_hash(cfg: dict) -> str:
    """Git blob hash (SHA-1 of ``blob <len>\\0<bytes>``) of the canonical JSON config."""
    body = json.dumps(cfg, sort_keys=True).encode()
    return hashlib.sha1(b"blob %d\0" % len(body) + body).hexdigest()


def run(config_path, seed=None, workers=1, out_dir=None) -> int:
    try:
        cfg = load_config(config_path)
        if seed is not None:
            cfg["rng"]["seed"] = str(seed)
        seed_val = int(cfg["rng"].get("seed", "0"))
        name = cfg["experiment"].get("name")
        if name not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {name!r}; one of {sorted(EXPERIMENTS)}")
        out_dir = Path(out_dir or cfg["output"].get("dir", "out"))
        prefix = cfg["output"].get("prefix", name)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    rng = np.random.default_rng(seed_val)
    status = "pass"
    error = None
    try:
        outcome = EXPERIMENTS[name](cfg["process"], cfg["experiment"], rng, workers)
    except (ConfigError, DomainError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NonConvergenceError, WindowTooNarrowError, InsufficientDataError) as exc:
        outcome, status, error = Outcome(), "nonconverged", f"{type(exc).__name__}: {exc}"
    except (PreconditionError, LadderLabError) as exc:
        outcome, status, error = Outcome(), "fail", f"{type(exc).__name__}: {exc}"
    if status == "pass":
        if any(not c.passed for c in outcome.checks):
            status = "fail"
        elif outcome.nonconverged:
            status = "nonconverged"
    report = {
        "schema": SCHEMA,
        "experiment": name,
        "config": cfg,
        "config_hash": config_hash(cfg),
        "seed": seed_val,
        "status": status,
        "error": error,
        "checks": [asdict(c) for c in outcome.checks],
        "nonconverged": outcome.nonconverged,
        "results": outcome.results,
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / f"{prefix}.json").write_text(json.dumps(_clean(report), indent=2, sort_keys=True) + "\n")
    if outcome.csv_header:
        with open(out_dir / f"{prefix}.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(outcome.csv_header)
            for row in outcome.csv_rows:
                w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    for c in outcome.checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {name}: {c.name} = {c.value:.6g} "
              f"(target {c.target:.6g}, tol {c.tol:.3g})")
    print(f"{name}: {status}" + (f" ({error})" if error else ""))
    return {"pass": EXIT_PASS, "fail": EXIT_FAIL, "nonconverged": EXIT_NONCONV}[status]


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="ladderlab", description=__doc__.splitlines()[0])
    ap.add_argument("--config", required=True, help="INI experiment file")
    ap.add_argument("--seed", type=int, help="overrides [rng] seed")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", help="report directory (overrides [output] dir)")
    args = ap.parse_args(argv)
    return run(args.config, args.seed, max(1, args.workers), args.out)


if __name__ == "__main__":
    sys.exit(main())
