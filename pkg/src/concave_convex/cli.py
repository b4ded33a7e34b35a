"""Command line entry point: ``concave-convex <subcommand> <config.ini>``.

Exit codes: 0 success, 1 certification failure, 2 config error.
Every file written starts with a ``# config_sha256=... seed=...`` line.
"""
from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, load_config
from .energy import detect_delta1
from .grid import build_grid, write_field_csv
from .multiplicity import MultiSolveOptions, multi_solve
from .pipeline_2d import EmptyAdmissibleSet, solve_truncated
from .schrodinger_op import assemble
from .solver import ConvexSet, minimize_IK, power_problem, warn_outside_threshold
from .spectrum import eigenpairs, verify_ck_negative
from .thresholds import PowerParams, admissible_radii, admissible_radii_2d

log = logging.getLogger("concave_convex")

EXIT_OK, EXIT_UNCERTIFIED, EXIT_CONFIG = 0, 1, 2
SUBCOMMANDS = ("threshold", "solve", "solve2d", "spectrum", "multiplicity", "sweep", "validate")


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _write_csv(path: Path, header: str, columns, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# {header}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _radii(params):
    f = params.nonlinearity
    if f.kind == "power":
        return admissible_radii(PowerParams(f.p, params.q, params.lam, params.V0))
    return admissible_radii_2d(f.nu, params.q, params.V0, detect_delta1(f), params.lam)


def _solve_point(params, box: str, max_iter: int, grad_tol: float, cert_tol: float, probes: int, seed: int):
    """(lambda, energy, sup_norm, certified, report) for one parameter set; empty sets are uncertified."""
    if params.nonlinearity.kind != "power":
        try:
            tr = solve_truncated(params, grad_tol=grad_tol, max_iter=max_iter, probes=probes, cert_tol=cert_tol)
        except EmptyAdmissibleSet:
            return params.lam, float("nan"), float("nan"), False, None
        return params.lam, tr.report.energy, tr.report.sup_norm, tr.certified, tr.report
    radii = _radii(params)
    # above Lambda0 no radius is invariant: still solve on the box of radius r*, but never certify
    r = radii.radius if radii.nonempty else radii.r_star
    K = ConvexSet.symmetric(r) if box == "symmetric" else ConvexSet.positive_cone(r)
    rep = minimize_IK(power_problem(params), K, max_iter=max_iter, grad_tol=grad_tol, cert_tol=cert_tol,
                      probes=probes, probe_seed=seed)
    if not radii.nonempty:
        rep.message = "no-certificate: lambda above Lambda0, no admissible radius"
        return params.lam, rep.energy, rep.sup_norm, False, rep
    return params.lam, rep.energy, rep.sup_norm, rep.certified, rep


def _sweep_task(args):
    lam, energy, sup, cert, _ = _solve_point(*args)
    return lam, energy, sup, cert


def cmd_threshold(cfg: RunConfig) -> int:
    params = cfg.params
    f = params.nonlinearity
    res = _radii(params)
    if f.kind == "power":
        cols = ("p", "q", "V0", "lambda", "lambda_crit", "regime", "r1", "r2", "r_star", "defect", "flags")
        row = (f.p, params.q, params.V0, params.lam, res.lambda_crit, res.regime, res.r1, res.r2, res.r_star,
               res.defect, "|".join(res.flags))
    else:
        cols = ("nu", "q", "V0", "lambda", "delta1", "lambda_crit", "regime", "r1", "r2", "r_star", "defect",
                "flags")
        row = (f.nu, params.q, params.V0, params.lam, detect_delta1(f), res.lambda_crit, res.regime, res.r1,
               res.r2, res.r_star, res.defect, "|".join(res.flags))
    _write_csv(cfg.output_dir / "threshold.csv", cfg.header, cols, [row])
    print(",".join(cols))
    print(",".join(_fmt(v) for v in row))
    return EXIT_OK


def _report_row(rep):
    inv = rep.invariance
    return (rep.energy, rep.sup_norm, rep.kkt_residual, rep.pde_residual, rep.stationarity_margin,
            inv.fixed_point_gap if inv else float("nan"), rep.iterations, rep.certified)


REPORT_COLS = ("energy", "sup_norm", "kkt_residual", "pde_residual", "stationarity_margin", "fixed_point_gap",
               "iterations", "certified")


def cmd_solve(cfg: RunConfig) -> int:
    params = cfg.params
    if params.nonlinearity.kind != "power":
        raise ConfigError(f"{cfg.path}: solve needs a power nonlinearity; use solve2d for {params.nonlinearity.kind}")
    warn_outside_threshold(params.lam, cfg.lambda_crit)
    lam, _, _, cert, rep = _solve_point(params, cfg.box, cfg.max_iter, cfg.grad_tol, cfg.cert_tol, cfg.probes,
                                     cfg.seed)
    grid = build_grid(params.grid)
    row = _report_row(rep)[:-1] + (cert,)
    _write_csv(cfg.output_dir / "solve.csv", cfg.header, ("lambda",) + REPORT_COLS, [(lam,) + row])
    write_field_csv(cfg.output_dir / "solve_field.csv", grid, rep.u, comment=cfg.header)
    print(", ".join(f"{c}={_fmt(v)}" for c, v in zip(REPORT_COLS, row)))
    if not cert and rep.message.startswith("no-certificate"):
        print(rep.message, file=sys.stderr)
    return EXIT_OK if cert else EXIT_UNCERTIFIED


def cmd_solve2d(cfg: RunConfig) -> int:
    params = cfg.params
    try:
        tr = solve_truncated(params, grad_tol=cfg.grad_tol, max_iter=cfg.max_iter, probes=cfg.probes,
                             cert_tol=cfg.cert_tol)
    except EmptyAdmissibleSet as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNCERTIFIED
    cols = ("lambda", "delta1", "lambda1", "r") + REPORT_COLS + ("untruncated_residual", "truncation_inactive")
    row = (params.lam, tr.delta1, tr.lambda1, tr.r) + _report_row(tr.report)[:-1] + (
        tr.certified, tr.untruncated_residual, tr.truncation_inactive)
    _write_csv(cfg.output_dir / "solve2d.csv", cfg.header, cols, [row])
    write_field_csv(cfg.output_dir / "solve2d_field.csv", build_grid(params.grid), tr.report.u, comment=cfg.header)
    print(", ".join(f"{c}={_fmt(v)}" for c, v in zip(cols, row)))
    return EXIT_OK if tr.certified else EXIT_UNCERTIFIED


def cmd_spectrum(cfg: RunConfig) -> int:
    params = cfg.params
    op = assemble(build_grid(params.grid), params.potential)
    pairs = eigenpairs(op, cfg.k)
    _write_csv(cfg.output_dir / "spectrum.csv", cfg.header, ("j", "mu", "residual"),
               [(j + 1, mu, res) for j, (mu, res) in enumerate(zip(pairs.values, pairs.residuals))])
    rows = []
    ok = True
    if params.nonlinearity.kind == "power":
        problem = power_problem(params, op)
        r_max = _radii(params).radius
        for k in range(1, cfg.k + 1):
            rep = verify_ck_negative(problem.energy, pairs, k, cfg.rho_grid, samples=cfg.sphere_samples,
                                     r_max=r_max, seed=cfg.seed)
            rows.append((k, rep.rho, rep.sphere_sup, rep.negative))
            ok &= rep.negative
        _write_csv(cfg.output_dir / "ck.csv", cfg.header, ("k", "rho", "sphere_sup", "negative"), rows)
    for j, mu in enumerate(pairs.values, 1):
        print(f"mu_{j}={_fmt(mu)}")
    for k, rho, sup, neg in rows:
        print(f"c_{k}: rho={_fmt(rho)} sphere_sup={_fmt(sup)} negative={_fmt(neg)}")
    return EXIT_OK if ok else EXIT_UNCERTIFIED


def cmd_multiplicity(cfg: RunConfig) -> int:
    params = cfg.params
    if params.nonlinearity.kind != "power":
        raise ConfigError(f"{cfg.path}: multiplicity needs a power nonlinearity")
    radii = _radii(params)
    if not radii.nonempty:
        print(f"empty admissible set at lambda={params.lam!r}", file=sys.stderr)
        return EXIT_UNCERTIFIED
    problem = power_problem(params)
    opts = MultiSolveOptions(k=cfg.k, grad_tol=cfg.grad_tol, max_iter=cfg.max_iter, cert_tol=cfg.cert_tol,
                             probes=cfg.probes, probe_seed=cfg.seed)
    found = multi_solve(problem, ConvexSet.symmetric(radii.radius), cfg.strategies, opts)
    grid = problem.grid
    _write_csv(cfg.output_dir / "multiplicity.csv", cfg.header, ("index",) + REPORT_COLS,
               [(i,) + _report_row(rep) for i, rep in enumerate(found)])
    for i, rep in enumerate(found):
        write_field_csv(cfg.output_dir / f"multiplicity_field_{i}.csv", grid, rep.u, comment=cfg.header)
        print(f"[{i}] energy={_fmt(rep.energy)} sup_norm={_fmt(rep.sup_norm)} certified={_fmt(rep.certified)}")
    return EXIT_OK if len(found) >= 2 else EXIT_UNCERTIFIED


def sweep_lambdas(lambda_crit: float, n: int) -> list[float]:
    """lambda_i = Lambda * i / n for i = 1..n, covering (0, Lambda]."""
    return [lambda_crit * i / n for i in range(1, n + 1)]


def cmd_sweep(cfg: RunConfig) -> int:
    base = cfg.params
    tasks = [(replace(base, lam=lam), cfg.box, cfg.max_iter, cfg.grad_tol, cfg.cert_tol, cfg.probes, cfg.seed)
             for lam in sweep_lambdas(cfg.lambda_crit, cfg.sweep_points)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(_sweep_task, tasks))
    else:
        rows = [_sweep_task(t) for t in tasks]
    rows.sort(key=lambda row: row[0])
    _write_csv(cfg.output_dir / "sweep.csv", cfg.header, ("lambda", "energy", "sup_norm", "certified"), rows)
    for row in rows:
        print(",".join(_fmt(v) for v in row))
    return EXIT_OK if all(row[3] for row in rows) else EXIT_UNCERTIFIED


def cmd_validate(cfg: RunConfig | None) -> int:
    from .validate import run_all

    results = run_all()
    lines = [f"{'PASS' if ok else 'FAIL'} {name}: {detail}" for name, ok, detail in results]
    print("\n".join(lines))
    if cfg is not None:
        _write_csv(cfg.output_dir / "validate.csv", cfg.header, ("check", "passed", "detail"),
                   [(n, ok, d.replace(",", ";")) for n, ok, d in results])
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_UNCERTIFIED


COMMANDS = {
    "threshold": cmd_threshold,
    "solve": cmd_solve,
    "solve2d": cmd_solve2d,
    "spectrum": cmd_spectrum,
    "multiplicity": cmd_multiplicity,
    "sweep": cmd_sweep,
    "validate": cmd_validate,
}


def run(config_path, subcommand: str) -> int:
    """Load the config and run one subcommand; returns the exit status."""
    if subcommand not in COMMANDS:
        print(f"error: unknown subcommand {subcommand!r}; choose from {', '.join(SUBCOMMANDS)}", file=sys.stderr)
        return EXIT_CONFIG
    if subcommand == "validate" and config_path is None:
        return cmd_validate(None)
    try:
        cfg = load_config(config_path)
        return COMMANDS[subcommand](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="concave-convex", description=__doc__.splitlines()[0])
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("config", nargs="?", help="sectioned .ini file (optional for validate)")
    ap.add_argument("-v", "--verbose", action="store_true")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.config is None and args.subcommand != "validate":
        ap.error(f"{args.subcommand} needs a config file")
    return run(args.config, args.subcommand)


if __name__ == "__main__":
    sys.exit(main())
