"""Command line interface.

Exit codes: 0 success, 1 failed invariant, 2 invalid model, 3 unreadable
config, 4 spectrum not real (Jacobi eigenvalue inside the forbidden band).
Set ``CRW_LOG`` to ``info`` or ``debug`` for diagnostics on stderr.
"""

from __future__ import annotations

import csv
import functools
import io
import logging
import os
import sys
import time

import click
import numpy as np

from . import jacobi, simulate, spectral, verify
from .errors import AssumptionViolated, CRWError, ParseError, ValidationError
from .model import basis_state, load_config, marginal
from .report import RunReport

EXIT_OK, EXIT_INVARIANT, EXIT_VALIDATION, EXIT_PARSE, EXIT_ASSUMPTION = 0, 1, 2, 3, 4

log = logging.getLogger("crwpath")


def fmt(v) -> str:
    return f"{float(v):.15g}"


def fmt_vec(vs) -> str:
    return "[" + ", ".join(fmt(v) for v in vs) + "]"


def _setup_logging():
    level = os.environ.get("CRW_LOG", "off").lower()
    if level in ("info", "debug"):
        logging.basicConfig(
            stream=sys.stderr,
            level=logging.DEBUG if level == "debug" else logging.INFO,
            format="%(levelname)s %(name)s: %(message)s",
        )


def _emit(report: RunReport, as_json: bool, out_path, text: str | None = None):
    if out_path:
        report.save(out_path)
    if as_json:
        click.echo(report.to_json())
    elif text is not None:
        click.echo(text, nl=not text.endswith("\n"))


def handled(command):
    """Map package errors onto the documented exit codes."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except ParseError as exc:
            click.echo(f"parse error: {exc}", err=True)
            sys.exit(EXIT_PARSE)
        except ValidationError as exc:
            click.echo(f"validation error ({type(exc).__name__}): {exc}", err=True)
            sys.exit(EXIT_VALIDATION)
        except AssumptionViolated as exc:
            click.echo(f"assumption violated: {exc}", err=True)
            sys.exit(EXIT_ASSUMPTION)
        except CRWError as exc:
            click.echo(f"numerical failure ({type(exc).__name__}): {exc}", err=True)
            sys.exit(EXIT_INVARIANT)

    return wrapper


def _parse_init(value: str):
    try:
        x, j = value.split(",")
        x, j = int(x), j.strip().upper()
        if j not in ("L", "R"):
            raise ValueError
    except ValueError:
        raise click.BadParameter(f"expected 'x,L' or 'x,R', got {value!r}")
    return x, j


json_flag = click.option("--json", "as_json", is_flag=True, help="Print the run report as JSON.")
out_option = click.option("-o", "--output", "out_path", type=click.Path(dir_okay=False), help="Also write the JSON report here.")


@click.group()
@click.version_option(package_name="crwpath")
def main():
    """Spectral analysis of correlated random walks on a path."""
    _setup_logging()


@main.command("validate")
@click.argument("config", type=click.Path())
@json_flag
@out_option
@handled
def cmd_validate(config, as_json, out_path):
    """Load CONFIG and check the coins."""
    t0 = time.perf_counter()
    model = load_config(config)
    coins = [{"vertex": x, "p_L": c.p_L, "p_R": c.p_R} for x, c in enumerate(model.family.coins)]
    report = RunReport(
        "validate", model.digest(), {"n": model.n, "nu2": model.nu2, "coins": coins},
        passed=True, wall_time=time.perf_counter() - t0,
    )
    lines = [f"valid: n = {model.n}, nu2 = {fmt(model.nu2)}"]
    lines += [f"  vertex {c['vertex']}: p_L = {fmt(c['p_L'])}, p_R = {fmt(c['p_R'])}" for c in coins]
    _emit(report, as_json, out_path, "\n".join(lines))


@main.command("spectrum")
@click.argument("config", type=click.Path())
@json_flag
@click.option("--csv", "as_csv", is_flag=True, help="Print eigenvalues as CSV rows.")
@click.option("--dump-B", "dump_b", is_flag=True, help="Include B and pi.")
@click.option("--dump-J", "dump_j", is_flag=True, help="Include J.")
@out_option
@handled
def cmd_spectrum(config, as_json, as_csv, dump_b, dump_j, out_path):
    """Jacobi spectrum, real-spectrum check and the full spectrum of U."""
    t0 = time.perf_counter()
    model = load_config(config)
    B = jacobi.build_B(model)
    eigB = jacobi.eigs_B(model, B=B)
    lams = [e.lam for e in eigB]
    check = spectral.check_assumption2(lams, model.nu2)
    results = {"nu2": model.nu2, "spec_B": lams, "assumption": check.to_dict()}
    if dump_b:
        pi = jacobi.build_pi(B)
        results["B"] = B.dense()
        results["pi"] = pi.pi
    if dump_j:
        results["J"] = jacobi.build_J(B).dense()

    if not check.passed:
        report = RunReport("spectrum", model.digest(), results, passed=False, wall_time=time.perf_counter() - t0)
        if out_path:
            report.save(out_path)
        if as_json:
            click.echo(report.to_json())
        click.echo(
            f"spectrum is not real: threshold {fmt(check.threshold)}, offending lambda "
            + fmt_vec(check.offending),
            err=True,
        )
        sys.exit(EXIT_ASSUMPTION)

    decomp = spectral.full_decomposition(model, eigB=eigB)
    results["spec_U"] = [
        {"mu": p.mu, "tag": p.tag, "source_index": p.source_index} for p in decomp.pairs
    ]
    report = RunReport("spectrum", model.digest(), results, passed=True, wall_time=time.perf_counter() - t0)

    if as_csv:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["operator", "tag", "index", "value"])
        for m, lam in enumerate(lams, start=1):
            w.writerow(["B", "", m, fmt(lam)])
        for p in decomp.pairs:
            w.writerow(["U", p.tag, p.source_index, fmt(p.mu)])
        text = buf.getvalue()
    else:
        lines = [f"n = {model.n}, nu2 = {fmt(model.nu2)}", "Spec(B): " + fmt_vec(lams)]
        if check.vacuous:
            lines.append("real-spectrum condition: holds (nu2 > 0)")
        else:
            lines.append(f"real-spectrum condition: holds (threshold {fmt(check.threshold)})")
        lines.append("Spec(U):")
        lines += [f"  {p.tag:<12} {p.source_index:>4}  {fmt(p.mu)}" for p in decomp.pairs]
        if dump_b:
            lines.append("B = " + str([fmt_vec(r) for r in results["B"]]).replace("'", ""))
            lines.append("pi = " + fmt_vec(results["pi"]))
        if dump_j:
            lines.append("J = " + str([fmt_vec(r) for r in results["J"]]).replace("'", ""))
        text = "\n".join(lines)
    _emit(report, as_json, out_path, text)


@main.command("limit")
@click.argument("config", type=click.Path())
@json_flag
@out_option
@handled
def cmd_limit(config, as_json, out_path):
    """Closed-form limiting distribution, cross-checked by power iteration."""
    t0 = time.perf_counter()
    model = load_config(config)
    p_inf = spectral.limiting_distribution(model)
    iterated, steps = spectral.power_iteration_limit(model)
    diff = float(np.abs(p_inf - iterated).max())
    report = RunReport(
        "limit", model.digest(),
        {"limit": p_inf, "power_iteration": iterated, "power_steps": steps, "max_abs_diff": diff},
        passed=True, wall_time=time.perf_counter() - t0,
    )
    text = "\n".join([
        "p_inf = " + fmt_vec(p_inf),
        f"power iteration ({steps} steps) = " + fmt_vec(iterated),
        f"max |diff| = {diff:.3g}",
    ])
    _emit(report, as_json, out_path, text)


@main.command("evolve")
@click.argument("config", type=click.Path())
@click.option("--t", "t", type=click.IntRange(min=0), required=True)
@click.option("--init", "init", default="0,L", show_default=True, help="Initial state as 'x,J'.")
@click.option("--method", type=click.Choice(["spectral", "dense", "both"]), default="spectral", show_default=True)
@json_flag
@out_option
@handled
def cmd_evolve(config, t, init, method, as_json, out_path):
    """Vertex distribution at time T from a basis state."""
    t0 = time.perf_counter()
    model = load_config(config)
    x, j = _parse_init(init)
    phi = basis_state(model.n, x, j)
    results = {"t": t, "init": [x, j]}
    lines = []
    if method in ("spectral", "both"):
        decomp = spectral.full_decomposition(model)
        psi = spectral.evolve_spectral(decomp, phi, t)
        results["spectral"] = psi.reshape(-1, 2).sum(axis=1)
        lines.append("spectral: " + fmt_vec(results["spectral"]))
    if method in ("dense", "both"):
        results["dense"] = marginal(simulate.evolve_dense(model, phi, t))
        lines.append("dense:    " + fmt_vec(results["dense"]))
    if method == "both":
        dev = float(np.abs(np.asarray(results["spectral"]) - results["dense"]).max())
        results["max_abs_deviation"] = dev
        lines.append(f"max |deviation| = {dev:.3g}")
    report = RunReport("evolve", model.digest(), results, passed=True, wall_time=time.perf_counter() - t0)
    _emit(report, as_json, out_path, "\n".join(lines))


@main.command("simulate")
@click.argument("config", type=click.Path())
@click.option("--walkers", type=click.IntRange(min=1), default=100_000, show_default=True)
@click.option("--t", "t", type=click.IntRange(min=0), default=1000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--init", "init", default="0,L", show_default=True, help="Initial state as 'x,J'.")
@click.option("--out", "fmt_out", type=click.Choice(["csv", "json"]), default="csv", show_default=True, help="Histogram format.")
@click.option("--report", "as_json", is_flag=True, help="Print the run report as JSON instead of the histogram.")
@out_option
@handled
def cmd_simulate(config, walkers, t, seed, init, fmt_out, as_json, out_path):
    """Monte Carlo vertex histogram and its distance to the exact evolution."""
    t0 = time.perf_counter()
    model = load_config(config)
    x, j = _parse_init(init)
    cfg = simulate.SimConfig(walkers=walkers, t=t, seed=seed, initial=(x, j))
    emp = simulate.empirical_distribution(model, cfg)
    exact = marginal(simulate.evolve_dense(model, basis_state(model.n, x, j), t))
    tv = simulate.total_variation(emp, exact)
    report = RunReport(
        "simulate", model.digest(),
        {"walkers": walkers, "t": t, "seed": seed, "init": [x, j], "histogram": emp, "exact": exact, "tv": tv},
        passed=True, wall_time=time.perf_counter() - t0,
    )
    text = simulate.histogram_csv(emp) if fmt_out == "csv" else simulate.histogram_json(emp)
    _emit(report, as_json, out_path, text)
    click.echo(f"tv distance to exact evolution: {tv:.6g}", err=True)


@main.command("verify")
@click.argument("config", type=click.Path(), required=False)
@click.option("--random", "random_spec", nargs=2, type=int, default=None, metavar="N_MAX COUNT",
              help="Check COUNT random models per sign of nu2 with n <= N_MAX (default 8 20).")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--monte-carlo", is_flag=True, help="Add the 1e5-walker simulation check.")
@json_flag
@out_option
@handled
def cmd_verify(config, random_spec, seed, monte_carlo, as_json, out_path):
    """Run the invariant suite on CONFIG or on random models."""
    t0 = time.perf_counter()
    if config is not None and random_spec is not None:
        raise click.UsageError("give either CONFIG or --random, not both")
    rejected, skipped = [], 0
    if config is not None:
        model = load_config(config)
        models = [model]
        digest = model.digest()
    else:
        n_max, count = random_spec or (8, 20)
        models, rejected, skipped = verify.random_models(count, n_max, seed)
        digest = None
    summary = verify.verify_models(models, monte_carlo=monte_carlo, seed=seed)
    summary["rejected_models"] = len(rejected)
    summary["skipped_models"] = skipped
    report = RunReport("verify", digest, summary, passed=summary["passed"], wall_time=time.perf_counter() - t0)

    lines = []
    for item in summary["models"]:
        bad = [c["name"] for c in item["checks"] if not c["passed"]]
        status = "PASS" if item["passed"] else "FAIL " + ", ".join(bad)
        lines.append(f"model {item['index']:>3}  n={item['n']:<3} nu2={fmt(item['nu2']):<22} {status}")
    if rejected or skipped:
        lines.append(f"{len(rejected)} proposals refused by the real-spectrum condition, {skipped} models skipped")
    lines.append("all invariants hold" if summary["passed"] else "failed: " + ", ".join(summary["failed_checks"]))
    _emit(report, as_json, out_path, "\n".join(lines))
    sys.exit(EXIT_OK if summary["passed"] else EXIT_INVARIANT)


if __name__ == "__main__":
    main()
