"""Command-line front end: tables, validation, noise experiments, decay maps, benchmarks.

Exit codes: 0 success, 1 validation failure, 2 bad flags, 3 I/O failure,
4 engine error.
"""

from __future__ import annotations

import contextlib
import json
import math
import os
import sys
import warnings

import click
import numpy as np

from wigrot import __version__
from wigrot import io as wio
from wigrot.analysis import (
    ENGINES,
    NoiseModel,
    bound_table,
    benchmark,
    cross_error,
    decay_map,
    fit_power_law,
    kronecker_error,
    noise_amplification,
    noise_grid,
    symmetry_errors,
    unitarity_error,
)
from wigrot.oracle import RELIABLE_DEGREE, flip_reconstruct, h_direct_triangle
from wigrot.recursion import apply_negation, compute_all, compute_subspace, reduce_beta

EXIT_VALIDATION = 1
EXIT_IO = 3
EXIT_ENGINE = 4

DEFAULT_BETAS = (0.0, 0.25 * math.pi, 0.5 * math.pi, 0.75 * math.pi, math.pi)
CHECKS = ("unitarity", "symmetry", "oracle", "flip", "cross", "bounds")

# acceptance thresholds
SYMMETRY_TOL = 1e-10
IDENTITY_TOL = 1e-13
ORACLE_TOL = 1e-12
FLIP_TOL = 1e-10
CROSS_TOL = 1e-7
BOUND_TOL = 1e-12


def unitarity_threshold(n: int) -> float:
    if n <= 64:
        return 1e-12
    if n <= 1024:
        return 1e-10
    return 1e-9


class Failure(click.ClickException):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.exit_code = code


def _int_list(ctx, param, value):
    if value is None:
        return None
    try:
        out = [int(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got {value!r}")
    if not out:
        raise click.BadParameter("list is empty")
    return out


def _float_list(ctx, param, value):
    if value is None:
        return None
    try:
        out = [float(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated numbers, got {value!r}")
    if not out or not all(math.isfinite(v) for v in out):
        raise click.BadParameter("need one or more finite values")
    return out


def _name_list(choices):
    def parse(ctx, param, value):
        names = [v.strip() for v in value.split(",") if v.strip()]
        bad = [v for v in names if v not in choices]
        if bad or not names:
            raise click.BadParameter(f"unknown {bad or value!r}; choose from {', '.join(choices)}")
        return names
    return parse


def worker_count() -> int:
    """Worker cap from WIGROT_THREADS; 0 or unset means one per CPU."""
    raw = os.environ.get("WIGROT_THREADS", "0")
    try:
        value = int(raw)
    except ValueError:
        raise click.UsageError(f"WIGROT_THREADS must be an integer, got {raw!r}")
    if value < 0:
        raise click.UsageError(f"WIGROT_THREADS must be non-negative, got {value}")
    return value or (os.cpu_count() or 1)


@contextlib.contextmanager
def _open_out(path: str, binary: bool):
    if path == "-":
        yield click.get_binary_stream("stdout") if binary else click.get_text_stream("stdout")
        return
    try:
        fh = open(path, "wb" if binary else "w", encoding=None if binary else "utf-8",
                  newline=None if binary else "\n")
    except OSError as exc:
        raise Failure(f"cannot open {path}: {exc.strerror}", EXIT_IO)
    try:
        yield fh
    except OSError as exc:
        raise Failure(f"write to {path} failed: {exc.strerror}", EXIT_IO)
    finally:
        fh.close()


def _emit_table(header: list[str], records: list[tuple], fmt: str, out: str) -> None:
    with _open_out(out, binary=False) as fh:
        if fmt == "json":
            json.dump({"metadata": {"version": __version__},
                       "rows": [dict(zip(header, r)) for r in records]},
                      fh, sort_keys=True, indent=1)
            fh.write("\n")
            return
        fh.write(",".join(header) + "\n")
        for r in records:
            fh.write(",".join(wio.fmt(v) if isinstance(v, float) else str(v) for v in r) + "\n")


@click.group()
@click.version_option(__version__)
def main():
    """Spherical-harmonic rotation coefficients for large degrees."""


@main.command()
@click.option("--n", "n", type=click.IntRange(min=0), help="Single degree.")
@click.option("--p", "p", type=click.IntRange(min=1), help="All degrees 0..p-1.")
@click.option("--beta", type=float, required=True, help="Rotation angle (radians unless --degrees).")
@click.option("--degrees", is_flag=True, help="Read --beta in degrees.")
@click.option("--algo", type=click.Choice(sorted(ENGINES)), default="recursive", show_default=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json", "bin"]), default="csv", show_default=True)
@click.option("--out", default="-", show_default=True, help="Output path, - for stdout.")
@click.option("--dense", is_flag=True, help="Write the full (2n+1)^2 square, row-major in m'.")
@click.option("--d-matrix", is_flag=True, help="Write Wigner small-d entries instead.")
def compute(n, p, beta, degrees, algo, fmt, out, dense, d_matrix):
    """Write a coefficient table."""
    if (n is None) == (p is None):
        raise click.UsageError("give exactly one of --n and --p")
    if not math.isfinite(beta):
        raise click.BadParameter("beta must be finite", param_hint="--beta")
    if degrees:
        beta = math.radians(beta)
    reduced, negate = reduce_beta(beta)
    reported = -reduced if negate else reduced
    engine = ENGINES[algo]
    try:
        if n is not None:
            tris = [engine(n, reduced)]
        elif algo == "recursive":
            tris = compute_all(p, reduced, workers=worker_count())
        else:
            tris = [engine(k, reduced) for k in range(p)]
        if negate:
            tris = [apply_negation(t, reported) for t in tris]
    except (ValueError, ArithmeticError, MemoryError, RuntimeError) as exc:
        raise Failure(f"engine {algo} failed: {exc}", EXIT_ENGINE)

    meta = {"beta_input": beta, "beta_reduced": reduced, "negated": negate,
            "quantity": "wigner_d" if d_matrix else "H", "layout": "dense" if dense else "triangle"}
    try:
        with _open_out(out, binary=fmt == "bin") as fh:
            if fmt == "csv":
                wio.write_csv(tris, fh, dense, d_matrix)
            elif fmt == "json":
                wio.write_json(tris, fh, algo, reported, dense, d_matrix, extra=meta)
            else:
                wio.write_bin(tris, fh, dense, d_matrix)
    except MemoryError as exc:
        raise Failure(str(exc), EXIT_ENGINE)


def _validate_rows(n_max: int, betas: list[float], checks: list[str]) -> list[tuple]:
    """(check, n, metric, threshold, pass) per check and degree, worst over betas."""
    out = []
    recursive = {}

    def rec(n, b):
        key = (n, b)
        if key not in recursive:
            recursive[key] = compute_subspace(n, b)
        return recursive[key]

    def add(check, n, values, tol):
        worst = max(values)
        out.append((check, n, worst, f"{tol:g}", "pass" if worst <= tol else "FAIL"))

    for n in range(n_max + 1):
        if "unitarity" in checks:
            add("unitarity", n, [unitarity_error(rec(n, b)) for b in betas], unitarity_threshold(n))
        if "symmetry" in checks:
            add("symmetry", n, [max(symmetry_errors(n, b).values()) for b in betas], SYMMETRY_TOL)
            if 0.0 in betas:
                add("identity", n, [kronecker_error(rec(n, 0.0))], IDENTITY_TOL)
        if "oracle" in checks and n <= RELIABLE_DEGREE:
            add("oracle", n, [cross_error(rec(n, b), h_direct_triangle(n, b)) for b in betas], ORACLE_TOL)
        if "flip" in checks:
            half = rec(n, 0.5 * math.pi)
            add("flip", n, [cross_error(rec(n, b), flip_reconstruct(half, n, b)) for b in betas], FLIP_TOL)
        if "cross" in checks:
            fft = ENGINES["fft-modified"]
            add("cross", n, [cross_error(rec(n, b), fft(n, b)) for b in betas], CROSS_TOL)
        if "bounds" in checks:
            over, gap = [], []
            for b in betas:
                tri = rec(n, b)
                bound = bound_table(n, b)
                over.append(float(np.max(np.abs(tri.data) - np.minimum(1.0, bound))))
                # entries with m = n are the last 2n + 1 in storage order
                gap.append(float(np.max(np.abs(bound[n * n:] - np.abs(tri.data[n * n:])))))
            add("bounds", n, over, BOUND_TOL)
            add("bounds-equality", n, gap, BOUND_TOL)
        recursive.clear()
    return out


@main.command()
@click.option("--n-max", type=click.IntRange(min=0), required=True)
@click.option("--beta-list", callback=_float_list, default=None,
              help="Comma-separated radians; default 0, pi/4, pi/2, 3pi/4, pi.")
@click.option("--checks", callback=_name_list(CHECKS), default=",".join(CHECKS), show_default=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
@click.option("--out", default="-", show_default=True)
def validate(n_max, beta_list, checks, fmt, out):
    """Run the self-consistency checks; exit 1 if any threshold is exceeded."""
    betas = [reduce_beta(b)[0] for b in (beta_list or DEFAULT_BETAS)]
    if "oracle" in checks and n_max > RELIABLE_DEGREE:
        click.echo(f"note: oracle rows stop at n = {RELIABLE_DEGREE}", err=True)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            records = _validate_rows(n_max, betas, checks)
    except (ValueError, ArithmeticError, MemoryError, RuntimeError) as exc:
        raise Failure(f"engine failure during validation: {exc}", EXIT_ENGINE)
    _emit_table(["check", "n", "metric", "threshold", "status"], records, fmt, out)
    failed = sorted({r[0] for r in records if r[4] != "pass"})
    if failed:
        raise Failure(f"threshold exceeded for: {', '.join(failed)}", EXIT_VALIDATION)


@main.command()
@click.option("--n-list", callback=_int_list, required=True)
@click.option("--model", type=click.Choice(["uniform", "coherent"]), required=True)
@click.option("--trials", type=click.IntRange(min=1), default=10, show_default=True)
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--dump-grid", type=click.Path(dir_okay=False, writable=True), default=None,
              help="Also write |eta| over the index square of one realization per degree.")
@click.option("--out", default="-", show_default=True)
def noise(n_list, model, trials, seed, dump_grid, out):
    """Growth of random initial-layer noise through the sweeps."""
    if min(n_list) < 2:
        raise click.BadParameter("degrees must be at least 2", param_hint="--n-list")
    noise_model = NoiseModel(model, seed, trials)
    growth = [(n, noise_amplification(n, noise_model)) for n in sorted(set(n_list))]
    fit_pts = [pt for pt in growth if pt[0] >= 64]
    with _open_out(out, binary=False) as fh:
        fh.write("n,growth\n")
        for n, g in growth:
            fh.write(f"{n},{wio.fmt(g)}\n")
        if len(fit_pts) >= 2:
            fh.write(f"exponent,{wio.fmt(fit_power_law(fit_pts))}\n")
    if dump_grid:
        with _open_out(dump_grid, binary=False) as fh:
            fh.write("n,m_prime,m,abs_eta\n")
            for n, _ in growth:
                grid = noise_grid(n, noise_model)
                for i in range(2 * n + 1):
                    fh.writelines(f"{n},{i - n},{j - n},{wio.fmt(float(grid[i, j]))}\n"
                                  for j in range(2 * n + 1))


@main.command()
@click.option("--n", "n", type=click.IntRange(min=1), required=True)
@click.option("--beta", type=float, required=True)
@click.option("--grid", type=int, required=True, help="Odd number of samples per axis.")
@click.option("--out", default="-", show_default=True)
def bounds(n, beta, grid, out):
    """Magnitude, decay exponent and ellipse region over the index square."""
    if grid < 3 or grid % 2 == 0:
        raise click.BadParameter(f"must be odd and at least 3, got {grid}", param_hint="--grid")
    if not math.isfinite(beta):
        raise click.BadParameter("beta must be finite", param_hint="--beta")
    reduced, _ = reduce_beta(beta)
    try:
        cells = decay_map(n, reduced, grid)
    except (ValueError, ArithmeticError, MemoryError) as exc:
        raise Failure(str(exc), EXIT_ENGINE)
    with _open_out(out, binary=False) as fh:
        fh.write("mu_prime,mu,m_prime,m,log10_abs,lambda,region\n")
        for c in cells:
            fh.write(f"{wio.fmt(c.mu_prime)},{wio.fmt(c.mu)},{c.m_prime},{c.m},"
                     f"{wio.fmt(c.log10_abs)},{wio.fmt(c.lam)},{c.region.value}\n")


@main.command()
@click.option("--n-list", callback=_int_list, required=True)
@click.option("--algos", callback=_name_list(tuple(sorted(ENGINES))), default="recursive", show_default=True)
@click.option("--repeat", type=click.IntRange(min=1), default=3, show_default=True)
@click.option("--beta", type=float, default=0.25 * math.pi, show_default=True)
@click.option("--out", default="-", show_default=True)
def bench(n_list, algos, repeat, beta, out):
    """Median wall time per (algorithm, degree) with doubling and cross-algorithm ratios.

    Rows: kind,algo,n,value where kind is seconds, ratio_prev (time over the
    previous degree in the list) or ratio_recursive (time over the recursion).
    """
    if min(n_list) < 1:
        raise click.BadParameter("degrees must be positive", param_hint="--n-list")
    reduced, _ = reduce_beta(beta)
    times = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for algo in algos:
            try:
                for rec in benchmark(algo, n_list, reduced, repeat):
                    times[algo, rec.n] = rec.value
            except (ValueError, ArithmeticError, MemoryError, RuntimeError) as exc:
                raise Failure(f"{algo} failed: {exc}", EXIT_ENGINE)
    with _open_out(out, binary=False) as fh:
        fh.write("kind,algo,n,value\n")
        for algo in algos:
            for n in n_list:
                fh.write(f"seconds,{algo},{n},{wio.fmt(times[algo, n])}\n")
        for algo in algos:
            for prev, n in zip(n_list, n_list[1:]):
                fh.write(f"ratio_prev,{algo},{n},{wio.fmt(times[algo, n] / times[algo, prev])}\n")
        if "recursive" in algos:
            for algo in algos:
                if algo != "recursive":
                    for n in n_list:
                        fh.write(f"ratio_recursive,{algo},{n},"
                                 f"{wio.fmt(times[algo, n] / times['recursive', n])}\n")


if __name__ == "__main__":
    sys.exit(main())
