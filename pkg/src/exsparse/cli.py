"""Command-line front end.

Subcommands: gen-data (elasso-disjoint | elasso-overlap | esvm),
solve-elasso, solve-esvm, prox (l1 | linf), grouping-sim, verify.

Conventions: matrices and vectors are headerless comma-separated CSV with
floats printed at 17 significant digits (round-trip exact); tabular history
files carry a header row. Every run writes a manifest.json recording the
command, parameters, seed, artifact paths, wall time, and summary numbers.
The default seed comes from EXSPARSE_SEED (0 if unset). Exit codes:
0 success, 2 usage error, 3 precondition violation, 4 numerical failure.
"""

from __future__ import annotations

import json
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import __version__
from .elasso import ElassoProblem, elasso_objective, solve_fista_locp, solve_fista_pcp
from .esvm import (EsvmProblem, accuracy, duality_gap, predict,
                   primal_objective, solve_fista_licp)
from .fista import NumericsError, SolveConfig
from .groups import GroupSet, random_grouping, simulate_balance
from .prox import (l1_cone_kkt_residual, linf_cone_stationarity_residual,
                   project_l1_cone, project_linf_cone)
from .synth import gen_elasso_disjoint, gen_elasso_overlap, gen_esvm, tune_margin_scale

EXIT_PRECONDITION = 3
EXIT_NUMERICAL = 4


def _write_csv(path: Path, arr):
    np.savetxt(path, np.asarray(arr), delimiter=",", fmt="%.17g", newline="\n")


def _read_matrix(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", ndmin=2)


def _read_vector(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",").ravel()


def _write_manifest(out_dir: Path, command: str, params: dict, artifacts: dict,
                    wall: float, **extra):
    manifest = {
        "command": command,
        "version": __version__,
        "parameters": params,
        "artifacts": {k: str(v) for k, v in artifacts.items()},
        "wall_seconds": wall,
    }
    manifest.update(extra)
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _write_history_csv(path: Path, history):
    with open(path, "w", newline="\n") as fh:
        fh.write("k,objective,rel_change,wall_seconds\n")
        for r in history.records:
            fh.write(f"{r.k},{r.objective:.17g},{r.rel_change:.17g},{r.wall_s:.6f}\n")


def _out_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",") if v.strip() != ""])
    except ValueError as exc:
        raise click.UsageError(f"malformed vector {text!r}: {exc}")


_seed_option = click.option("--seed", type=int, envvar="EXSPARSE_SEED", default=0,
                            show_default=True, help="PRNG seed (env EXSPARSE_SEED).")
_out_option = click.option("--out-dir", default=".", show_default=True,
                           help="Directory for artifacts and manifest.")


def _solve_options(f):
    f = click.option("--max-iters", type=int, default=100_000, show_default=True)(f)
    f = click.option("--rel-tol", type=float, default=1e-8, show_default=True)(f)
    f = click.option("--step", "step_mode", type=click.Choice(["backtracking", "fixed"]),
                     default="backtracking", show_default=True)(f)
    f = click.option("--gamma", type=float, default=None,
                     help="Fixed step length (fixed mode only).")(f)
    return f


@click.group()
@click.version_option(__version__)
def main():
    """Exclusive-sparsity solvers, generators, and verification oracles."""


@main.group("gen-data")
def gen_data():
    """Generate synthetic benchmark datasets."""


@gen_data.command("elasso-disjoint")
@click.option("--n", type=int, required=True, help="Feature count.")
@click.option("--samples", "n_samples", type=int, required=True, help="Sample count.")
@click.option("--m", type=int, required=True, help="Group count.")
@click.option("--k-per-group", type=int, default=4, show_default=True)
@click.option("--sigma", type=float, default=0.01, show_default=True)
@_seed_option
@_out_option
def gen_elasso_disjoint_cmd(n, n_samples, m, k_per_group, sigma, seed, out_dir):
    t0 = time.perf_counter()
    out = _out_dir(out_dir)
    try:
        ds = gen_elasso_disjoint(n, n_samples, m, k_per_group, sigma, seed)
    except ValueError as exc:
        click.echo(f"precondition violated: {exc}", err=True)
        sys.exit(EXIT_PRECONDITION)
    artifacts = {"X": out / "X.csv", "y": out / "y.csv",
                 "w_star": out / "w_star.csv", "groups": out / "groups.json"}
    _write_csv(artifacts["X"], ds.X)
    _write_csv(artifacts["y"], ds.y)
    _write_csv(artifacts["w_star"], ds.w_star)
    artifacts["groups"].write_text(ds.G.to_json() + "\n")
    _write_manifest(out, "gen-data elasso-disjoint",
                    {"n": n, "samples": n_samples, "m": m,
                     "k_per_group": k_per_group, "sigma": sigma, "seed": seed},
                    artifacts, time.perf_counter() - t0,
                    lambda_suggested=ds.lambda_suggested)


@gen_data.command("elasso-overlap")
@click.option("--n", type=int, required=True)
@click.option("--samples", "n_samples", type=int, required=True)
@click.option("--m", type=int, required=True)
@click.option("--size-min", type=int, required=True)
@click.option("--size-max", type=int, required=True)
@click.option("--k-per-group", type=int, default=4, show_default=True)
@click.option("--sigma", type=float, default=0.01, show_default=True)
@_seed_option
@_out_option
def gen_elasso_overlap_cmd(n, n_samples, m, size_min, size_max, k_per_group,
                           sigma, seed, out_dir):
    t0 = time.perf_counter()
    out = _out_dir(out_dir)
    try:
        ds = gen_elasso_overlap(n, n_samples, m, size_min, size_max,
                                k_per_group, sigma, seed)
    except ValueError as exc:
        click.echo(f"precondition violated: {exc}", err=True)
        sys.exit(EXIT_PRECONDITION)
    artifacts = {"X": out / "X.csv", "y": out / "y.csv",
                 "w_star": out / "w_star.csv", "groups": out / "groups.json"}
    _write_csv(artifacts["X"], ds.X)
    _write_csv(artifacts["y"], ds.y)
    _write_csv(artifacts["w_star"], ds.w_star)
    artifacts["groups"].write_text(ds.G.to_json() + "\n")
    _write_manifest(out, "gen-data elasso-overlap",
                    {"n": n, "samples": n_samples, "m": m, "size_min": size_min,
                     "size_max": size_max, "k_per_group": k_per_group,
                     "sigma": sigma, "seed": seed},
                    artifacts, time.perf_counter() - t0,
                    lambda_suggested=ds.lambda_suggested)


@gen_data.command("esvm")
@click.option("--n", type=int, required=True)
@click.option("--m", type=int, required=True, help="Sample count = group count.")
@click.option("--d", type=float, default=None, help="Margin scale (overrides tuning).")
@click.option("--target-error", type=float, default=None,
              help="Tune the margin scale to this holdout error rate.")
@_seed_option
@_out_option
def gen_esvm_cmd(n, m, d, target_error, seed, out_dir):
    t0 = time.perf_counter()
    out = _out_dir(out_dir)
    if d is None and target_error is None:
        raise click.UsageError("provide --d or --target-error")
    try:
        if d is None:
            d = tune_margin_scale(n, m, target_error, seed)
        ds = gen_esvm(n, m, d, seed)
    except ValueError as exc:
        click.echo(f"precondition violated: {exc}", err=True)
        sys.exit(EXIT_PRECONDITION)
    data = np.concatenate([ds.X.T, ds.labels[:, None].astype(float)], axis=1)
    artifacts = {"data": out / "data.csv", "w_star": out / "w_star.csv",
                 "groups": out / "groups.json"}
    _write_csv(artifacts["data"], data)
    _write_csv(artifacts["w_star"], ds.w_star)
    artifacts["groups"].write_text(ds.G.to_json() + "\n")
    _write_manifest(out, "gen-data esvm",
                    {"n": n, "m": m, "target_error": target_error, "seed": seed},
                    artifacts, time.perf_counter() - t0, d=d)


def _load_groups(groups_path) -> GroupSet:
    return GroupSet.from_json(Path(groups_path).read_text())


@main.command("solve-elasso")
@click.option("--x", "x_path", required=True, help="Design matrix CSV (row = sample).")
@click.option("--y", "y_path", required=True, help="Observations CSV.")
@click.option("--groups", "groups_path", required=True, help="GroupSet JSON.")
@click.option("--lam", type=float, required=True, help="Weight of the half squared exclusive norm.")
@click.option("--solver", type=click.Choice(["pcp", "locp"]), required=True)
@_solve_options
@_seed_option
@_out_option
def solve_elasso_cmd(x_path, y_path, groups_path, lam, solver, max_iters,
                     rel_tol, step_mode, gamma, seed, out_dir):
    t0 = time.perf_counter()
    out = _out_dir(out_dir)
    X = _read_matrix(x_path)
    y = _read_vector(y_path)
    G = _load_groups(groups_path)
    cfg = SolveConfig(max_iters=max_iters, rel_tol=rel_tol, step_mode=step_mode,
                      gamma=gamma, seed=seed)
    try:
        problem = ElassoProblem(X, y, G, lam)
        if solver == "locp":
            w, history = solve_fista_locp(problem, cfg)
        else:
            w, history = solve_fista_pcp(problem, cfg)
    except ValueError as exc:
        click.echo(f"precondition violated: {exc}", err=True)
        sys.exit(EXIT_PRECONDITION)
    except (NumericsError, FloatingPointError) as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        sys.exit(EXIT_NUMERICAL)
    objective = elasso_objective(problem, w)
    artifacts = {"w": out / "w.csv", "history": out / "history.csv",
                 "metrics": out / "metrics.json"}
    _write_csv(artifacts["w"], w)
    _write_history_csv(artifacts["history"], history)
    metrics = {"objective": objective, "iterations": len(history),
               "termination": history.termination}
    artifacts["metrics"].write_text(json.dumps(metrics, indent=2) + "\n")
    _write_manifest(out, "solve-elasso",
                    {"x": str(x_path), "y": str(y_path), "groups": str(groups_path),
                     "lam": lam, "solver": solver, "max_iters": max_iters,
                     "rel_tol": rel_tol, "step": step_mode, "gamma": gamma,
                     "seed": seed},
                    artifacts, time.perf_counter() - t0,
                    final_objective=objective, termination=history.termination)
    click.echo(f"objective {objective:.12g} after {len(history)} iterations "
               f"({history.termination})")


@main.command("solve-esvm")
@click.option("--data", "data_path", required=True,
              help="Samples CSV (row = sample, last column = label +/-1).")
@click.option("--test-data", "test_path", default=None,
              help="Held-out samples CSV in the same format.")
@click.option("--groups", "groups_path", default=None, help="GroupSet JSON.")
@click.option("--random-groups", "random_groups", type=int, default=None,
              help="Use a seeded random partition into this many groups.")
@click.option("--alpha", type=float, default=1.0, show_default=True)
@click.option("--beta", type=float, default=1.0, show_default=True)
@click.option("--gap-tol", type=float, default=1e-4, show_default=True)
@_solve_options
@_seed_option
@_out_option
def solve_esvm_cmd(data_path, test_path, groups_path, random_groups, alpha, beta,
                   gap_tol, max_iters, rel_tol, step_mode, gamma, seed, out_dir):
    t0 = time.perf_counter()
    out = _out_dir(out_dir)
    raw = _read_matrix(data_path)
    X, labels = raw[:, :-1].T, raw[:, -1].astype(int)
    if groups_path is None and random_groups is None:
        raise click.UsageError("provide --groups or --random-groups")
    G = _load_groups(groups_path) if groups_path \
        else random_grouping(X.shape[0], random_groups, seed)
    cfg = SolveConfig(max_iters=max_iters, rel_tol=rel_tol, step_mode=step_mode,
                      gamma=gamma, seed=seed)
    try:
        problem = EsvmProblem(X, labels, G, alpha, beta)
        w, state, history = solve_fista_licp(problem, cfg, gap_tol=gap_tol)
    except ValueError as exc:
        click.echo(f"precondition violated: {exc}", err=True)
        sys.exit(EXIT_PRECONDITION)
    except (NumericsError, FloatingPointError) as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        sys.exit(EXIT_NUMERICAL)
    metrics = {
        "train_accuracy": accuracy(predict(w, X), labels),
        "test_accuracy": None,
        "duality_gap": duality_gap(problem, state),
        "primal_objective": primal_objective(problem, w),
        "iterations": len(history),
        "termination": history.termination,
    }
    if test_path:
        raw_t = _read_matrix(test_path)
        metrics["test_accuracy"] = accuracy(
            predict(w, raw_t[:, :-1].T), raw_t[:, -1].astype(int))
    artifacts = {"w": out / "w.csv", "history": out / "history.csv",
                 "metrics": out / "metrics.json"}
    _write_csv(artifacts["w"], w)
    _write_history_csv(artifacts["history"], history)
    artifacts["metrics"].write_text(json.dumps(metrics, indent=2) + "\n")
    _write_manifest(out, "solve-esvm",
                    {"data": str(data_path), "test_data": test_path,
                     "groups": groups_path, "random_groups": random_groups,
                     "alpha": alpha, "beta": beta, "gap_tol": gap_tol,
                     "max_iters": max_iters, "rel_tol": rel_tol,
                     "step": step_mode, "seed": seed},
                    artifacts, time.perf_counter() - t0,
                    duality_gap=metrics["duality_gap"],
                    train_accuracy=metrics["train_accuracy"])
    click.echo(f"train accuracy {metrics['train_accuracy']:.4f}, "
               f"duality gap {metrics['duality_gap']:.3e} "
               f"({metrics['iterations']} iterations)")


@main.command("prox")
@click.argument("cone", type=click.Choice(["l1", "linf"]))
@click.option("--a", "a_text", required=True, help="Comma-separated vector.")
@click.option("--b", type=float, default=0.0, show_default=True)
@click.option("--zeta", type=float, default=1.0, show_default=True)
@_seed_option
@_out_option
def prox_cmd(cone, a_text, b, zeta, seed, out_dir):
    """Spot-check a cone projection: prints x, y, and the KKT residual."""
    t0 = time.perf_counter()
    out = _out_dir(out_dir)
    a = _parse_vector(a_text)
    if a.size == 0:
        raise click.UsageError("empty vector")
    try:
        if cone == "l1":
            point = project_l1_cone(a, b, zeta)
            resid = l1_cone_kkt_residual(a, b, zeta, point)
        else:
            point = project_linf_cone(a, b, zeta)
            resid = linf_cone_stationarity_residual(a, b, zeta, point)
    except ValueError as exc:
        click.echo(f"precondition violated: {exc}", err=True)
        sys.exit(EXIT_PRECONDITION)
    click.echo("x = " + ",".join(f"{v:.17g}" for v in point.x))
    click.echo(f"y = {point.y:.17g}")
    click.echo(f"kkt_residual = {resid:.3e}")
    _write_manifest(out, f"prox {cone}",
                    {"a": a_text, "b": b, "zeta": zeta, "seed": seed},
                    {}, time.perf_counter() - t0,
                    x=[float(v) for v in point.x], y=float(point.y),
                    kkt_residual=float(resid))


@main.command("grouping-sim")
@click.option("--n", type=int, required=True)
@click.option("--s", type=int, required=True, help="True-feature count.")
@click.option("--m", type=int, required=True, help="Group count.")
@click.option("--t", type=float, required=True, help="Balance parameter in (0,1).")
@click.option("--trials", type=int, default=1000, show_default=True)
@_seed_option
@_out_option
def grouping_sim_cmd(n, s, m, t, trials, seed, out_dir):
    """Monte-Carlo check of the random-grouping balance bound."""
    t0 = time.perf_counter()
    out = _out_dir(out_dir)
    try:
        report = simulate_balance(n, s, m, t, trials, seed)
    except ValueError as exc:
        click.echo(f"precondition violated: {exc}", err=True)
        sys.exit(EXIT_PRECONDITION)
    report["seed"] = seed
    path = out / "grouping_sim.json"
    path.write_text(json.dumps(report, indent=2) + "\n")
    _write_manifest(out, "grouping-sim",
                    {"n": n, "s": s, "m": m, "t": t, "trials": trials, "seed": seed},
                    {"report": path}, time.perf_counter() - t0,
                    success_fraction=report["success_fraction"],
                    unbalanced_fraction=report["unbalanced_fraction"])
    click.echo(f"balance ratio <= {report['bound_ratio']:.3f} in "
               f"{report['success_fraction']:.3f} of trials "
               f"(unbalanced: {report['unbalanced_fraction']:.3f})")


@main.command("verify")
@click.option("--only", type=click.Choice(["groups", "prox", "fista", "elasso", "esvm"]),
              default=None, help="Run a single section.")
@_seed_option
@_out_option
def verify_cmd(only, seed, out_dir):
    """Run the oracle suite and print a pass/fail table."""
    from . import _verify

    t0 = time.perf_counter()
    out = _out_dir(out_dir)
    results = _verify.run_suite(only=only, seed=seed)
    width = max(len(name) for name, _, _ in results)
    failures = 0
    for name, ok, detail in results:
        status = "PASS" if ok else "FAIL"
        failures += 0 if ok else 1
        click.echo(f"{name:<{width}}  {status}  {detail}")
    _write_manifest(out, "verify", {"only": only, "seed": seed}, {},
                    time.perf_counter() - t0,
                    checks=len(results), failures=failures)
    if failures:
        click.echo(f"{failures} check(s) failed", err=True)
        sys.exit(EXIT_NUMERICAL)
    click.echo("all checks passed")


if __name__ == "__main__":
    main()
