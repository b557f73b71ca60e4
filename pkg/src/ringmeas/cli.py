"""Command line scenario runner.

    ringmeas validate --config FILE
    ringmeas simulate --config FILE [--seed S] [--route NAME] [--mc-samples N] [--out PATH]
    ringmeas wigner   --config FILE [--target apparatus|joint] [--qgrid N] [--out PATH]
    ringmeas appendix --config FILE [--out PATH]
"""
from __future__ import annotations

import argparse
import io
import json
import math
import sys
from contextlib import contextmanager

import numpy as np

from ringmeas import appendix, decoherence, measurement, wigner
from ringmeas.config import ROUTES, ConfigError, ScenarioConfig, load_config
from ringmeas.dynamics import JointState, kick, matrix_to_json, qgrid, wigner_joint
from ringmeas.exceptions import ZeroProbabilityError
from ringmeas.model import ApparatusSpec, moments, validate
from ringmeas.qcore import DensityOperator

SCHEMA_VERSION = 1


def _validation(cfg: ScenarioConfig) -> dict:
    report = validate(cfg.obj, cfg.app, cfg.cpl, standard_shift=cfg.standard_shift).as_dict()
    defects = DensityOperator(cfg.rho_s).defects()
    bad = {k: v for k, v in defects.items() if v > 1e-10}
    if bad:
        report["errors"].append(
            "object.rho_s: not a density operator (" +
            ", ".join(f"{k} defect {v:.3e}" for k, v in sorted(bad.items())) + ")")
        report["ok"] = False
    return report


def _require_valid(cfg: ScenarioConfig) -> dict:
    report = _validation(cfg)
    if not report["ok"]:
        raise ConfigError("invalid scenario: " + "; ".join(report["errors"]))
    return report


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


@contextmanager
def _output(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def cmd_validate(cfg: ScenarioConfig) -> tuple[int, dict]:
    report = _validation(cfg)
    return (0 if report["ok"] else 1), {"schema_version": SCHEMA_VERSION, "validation": report}


def _record_for_route(cfg, route, results, mc_state, l) -> measurement.MeasurementRecord:
    part = results["partition"]
    if route == "chi_exact":
        return measurement.selective_collapse(results["averaged"], part, l)
    if route == "two_apparatus":
        return measurement.selective_collapse(results["traced"], part, l)
    if route == "chi_mc":
        return measurement.selective_collapse(mc_state, part, l)
    state = results["state"]
    R_post, w = decoherence.classical_collapse_R(state.conditional_blocks(), part, l)
    K = cfg.app.K
    post = JointState(cfg.obj, cfg.app, {(r - K, r - K): B for r, B in enumerate(R_post) if B.any()},
                      rho_s=state.rho_s, N=state.N)
    return measurement.MeasurementRecord(
        outcome=l, probability=w, posterior=post, posterior_object=R_post.sum(axis=0),
        posterior_weights=np.real(np.trace(R_post, axis1=1, axis2=2)),
        object_probability=float(np.trace(cfg.obj.E[l] @ cfg.rho_s).real))


def cmd_simulate(cfg: ScenarioConfig) -> dict:
    report = _require_valid(cfg)
    run = cfg.run
    if run.route not in ROUTES:
        raise ConfigError(f"unknown route {run.route!r}")
    if run.route == "chi_mc" and run.seed is None:
        raise ConfigError("route chi_mc is stochastic and needs a seed")
    part = measurement.build_partition(cfg.obj, cfg.app, cfg.cpl)
    mc_state = None
    if run.route == "chi_mc":
        mc_state = decoherence.chi_average_mc(cfg.rho_s, cfg.obj, cfg.app, cfg.cpl.gamma,
                                              run.mc_samples, run.seed)
    res = decoherence.compare_routes(cfg.rho_s, cfg.obj, cfg.app, cfg.cpl, part, mc_state)
    res["partition"] = part
    outcomes = []
    for entry in res["outcomes"]:
        row = {"outcome": entry["outcome"], "probability": entry["probability"]}
        if "routes" in entry:
            row.update({
                "object_probability": entry["object_probability"],
                "expected_posterior": matrix_to_json(entry["expected_posterior"]),
                "posteriors": {k: matrix_to_json(v) for k, v in sorted(entry["routes"].items())},
                "projection_defects": entry["projection_defects"],
                "posterior_product_defects": entry["posterior_product_defects"],
                "pairwise_residual": entry["pairwise_residual"],
            })
        outcomes.append(row)
    out = {
        "schema_version": SCHEMA_VERSION,
        "route": run.route,
        "N": report["N"],
        "chi": report["chi"],
        "partition": {"boundaries": list(part.boundaries),
                      "ranges": [list(r) for r in part.ranges]},
        "outcome_probabilities": [float(p) for p in res["probabilities"]],
        "outcomes": outcomes,
        "consistency_defects": res["consistency_defect"],
        "correlation_XY": res["correlation_XY"],
        "route_equivalence_residual": res["route_equivalence"],
    }
    if mc_state is not None:
        out["chi_mc"] = {"samples": run.mc_samples, "seed": run.seed,
                         "rms_error_vs_exact": decoherence.rms_block_error(mc_state, res["averaged"])}
    l = run.outcome
    if l is None and run.seed is not None:
        rng = np.random.default_rng(run.seed)
        l = measurement.sample_outcome(res["state"], part, rng)
    if l is not None:
        if not 0 <= l < part.n_outcomes or res["probabilities"][l] <= 0.0:
            raise ZeroProbabilityError(f"requested outcome {l} has zero probability")
        rec = _record_for_route(cfg, run.route, res, mc_state, l)
        out["measurement"] = rec.to_json()
        out["measurement"]["seed"] = run.seed
    return out


def cmd_wigner(cfg: ScenarioConfig, target: str, fh) -> None:
    _require_valid(cfg)
    app = cfg.app
    nq = cfg.run.qgrid_points or 4 * app.K + 2
    if target == "apparatus":
        wigner.write_csv(wigner.wigner(app.rho(), app, nq), fh)
        return
    if target != "joint":
        raise ConfigError(f"unknown wigner target {target!r}")
    state = kick(cfg.rho_s, cfg.obj, app, cfg.cpl)
    q = qgrid(app.L, nq)
    W = wigner_joint(state, q)
    p = app.momenta()
    fh.write("q,j,p_j,row,col,value_re,value_im\n")
    for qi, qv in enumerate(q):
        for ji, j in enumerate(app.ks):
            for a in range(state.d):
                for b in range(state.d):
                    z = W[qi, ji, a, b]
                    fh.write(f"{float(qv)!r},{int(j)},{float(p[ji])!r},{a},{b},"
                             f"{float(z.real)!r},{float(z.imag)!r}\n")


def cmd_appendix(cfg: ScenarioConfig) -> dict:
    app = cfg.app
    c = cfg.jump if cfg.jump is not None else app.L / 2
    sc = appendix.sawtooth_matrix(app, c)
    quad = appendix.sawtooth_matrix(app, c, method="quadrature")
    limit = appendix.limiting_commutator(app)
    comm = appendix.commutator_pq(sc, app)
    rob = appendix.robertson_check(app.rho(), sc, app)
    sharp = ApparatusSpec(m=0, w0=[1.0], K=app.K, L=app.L, hbar=app.hbar)
    mo = moments(app)
    cs = [app.L / 2 * f for f in (0.25, 0.5, 0.75, 0.9, 0.99, 1.0)]
    return {
        "schema_version": SCHEMA_VERSION,
        "c": c,
        "config_m": app.m,
        "sawtooth_hermiticity_defect": appendix.sawtooth_hermiticity(sc),
        "analytic_vs_quadrature": float(np.max(np.abs(sc.matrix - quad.matrix))),
        "max_deviation_from_limit": float(np.max(np.abs(comm - limit))),
        "jump_dependence": appendix.jump_dependence(app, cs),
        "commutator": appendix.commutator_rows(sc, app),
        "mean_commutator": appendix.mean_commutator(app.rho(), sc, app),
        "moments": {"sigma_q2": mo.sigma_q2, "sigma_p2": mo.sigma_p2,
                    "sigma_q_sigma_p": math.sqrt(mo.product)},
        "robertson": {"lhs": rob.lhs, "rhs": rob.rhs, "satisfied": rob.satisfied,
                      "var_q": rob.var_q, "var_p": rob.var_p},
        "violation_demo": appendix.heisenberg_violation_demo(sharp, c),
    }


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ringmeas", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="scenario JSON file")
        p.add_argument("--out", help="output path (default stdout)")
        p.add_argument("--seed", type=int, help="seed for sampling and Monte-Carlo averaging")
        p.add_argument("--route", choices=ROUTES)
        p.add_argument("--mc-samples", type=int)
        p.add_argument("--qgrid", type=int, help="number of q-grid points")
        return p

    common(sub.add_parser("validate", help="check a scenario file"))
    p = common(sub.add_parser("simulate", help="kick, measure and compare collapse routes"))
    p.add_argument("--outcome", type=int, help="collapse on this outcome instead of sampling")
    p = common(sub.add_parser("wigner", help="export a Wigner table as CSV"))
    p.add_argument("--target", choices=("apparatus", "joint"), default="apparatus")
    common(sub.add_parser("appendix", help="sawtooth commutator and uncertainty checks"))
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.command == "validate":
            status, report = cmd_validate(cfg)
            with _output(args.out) as fh:
                fh.write(_dump(report))
            if status:
                for err in report["validation"]["errors"]:
                    print(f"error: {err}", file=sys.stderr)
            return status
        if args.command == "simulate":
            cfg = cfg.with_run(seed=args.seed, route=args.route, mc_samples=args.mc_samples,
                               outcome=args.outcome)
            report = cmd_simulate(cfg)
            with _output(args.out or cfg.run.out) as fh:
                fh.write(_dump(report))
            return 0
        if args.command == "wigner":
            cfg = cfg.with_run(qgrid_points=args.qgrid)
            buf = io.StringIO()
            cmd_wigner(cfg, args.target, buf)
            with _output(args.out) as fh:
                fh.write(buf.getvalue())
            return 0
        if args.command == "appendix":
            with _output(args.out) as fh:
                fh.write(_dump(cmd_appendix(cfg)))
            return 0
    except (ValueError, OSError) as exc:  # every library error type derives from ValueError
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":
    sys.exit(main())
