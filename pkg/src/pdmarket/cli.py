"""Command-line interface wiring all modules together.

Every subcommand takes ``--seed`` (default 0), ``--format`` (csv or json)
and ``--output``; identical invocations with the same seed produce
byte-identical output.  Domain, data, and config errors exit with status 1
and a single line ``error: <category>: <detail>``; usage errors exit 2.
"""

from __future__ import annotations

import csv
import functools
import json
import math
import sys

import click
import numpy as np

from .diffusion import DiffusionConfig, simulate
from .duchain import ChainConfig, run_chain
from .errors import PDMarketError
from .exact import psf_log_prob
from .fitting import (
    SearchConfig,
    average_pd_curve,
    fit_params,
    ingest_caps,
)
from .params import PDParams
from .partitions import class_to_freq, enumerate_classes, multiplicity
from .samplers import (
    TruncationRule,
    sample_crp,
    sample_sticks_size_biased,
    sample_subordinator,
    sample_symmetric_dirichlet,
)


def handle_errors(f):
    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except PDMarketError as exc:
            click.echo(f"error: {exc.category}: {exc}", err=True)
            sys.exit(1)

    return wrapper


def common_options(f):
    f = click.option("--seed", type=int, default=0, show_default=True,
                     help="RNG seed; same seed, same output.")(f)
    f = click.option("--format", "fmt", type=click.Choice(["csv", "json"]),
                     default="csv", show_default=True)(f)
    f = click.option("--output", type=click.Path(writable=True, allow_dash=True),
                     default="-", show_default=True,
                     help="Output file, '-' for stdout.")(f)
    return f


def _write(output: str, text: str) -> None:
    if output == "-":
        click.echo(text, nl=False)
    else:
        with open(output, "w") as fh:
            fh.write(text)


def _csv_text(rows) -> str:
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


@click.group()
def main():
    """Two-parameter Poisson-Dirichlet toolkit for capital distribution curves."""


@main.command("exact")
@click.option("--n", type=int, required=True, help="Partition size.")
@click.option("--alpha", type=float, required=True)
@click.option("--theta", type=float, required=True)
@common_options
@handle_errors
def exact_cmd(n, alpha, theta, seed, fmt, output):
    """Exact table of classes, multiplicities, and probabilities at level n."""
    p = PDParams(alpha, theta)
    rows = []
    for c in enumerate_classes(n):
        rows.append(
            {
                "class": str(class_to_freq(c)),
                "multiplicity": multiplicity(c),
                "probability": math.exp(psf_log_prob(c, p)),
            }
        )
    if fmt == "json":
        _write(output, _json_text(rows))
    else:
        out = [["class", "multiplicity", "probability"]]
        out += [
            [r["class"], r["multiplicity"], f"{r['probability']:.12g}"]
            for r in rows
        ]
        _write(output, _csv_text(out))


@main.command("sample")
@click.option("--alpha", type=float, required=True)
@click.option("--theta", type=float, required=True)
@click.option("--sampler", type=click.Choice(["sticks", "dirichlet", "subordinator"]),
              default="sticks", show_default=True)
@click.option("--m", type=int, default=None, help="Dirichlet dimension (dirichlet sampler).")
@click.option("--dirichlet-alpha", type=float, default=None,
              help="Dirichlet concentration (dirichlet sampler).")
@click.option("--n-jumps", type=int, default=100, show_default=True,
              help="Jumps kept by the subordinator sampler.")
@click.option("--trunc-eps", type=float, default=1e-8, show_default=True)
@click.option("--max-sticks", type=int, default=100_000, show_default=True)
@click.option("--plot", type=click.Path(writable=True), default=None,
              help="Also render a log-log figure to this file.")
@common_options
@handle_errors
def sample_cmd(alpha, theta, sampler, m, dirichlet_alpha, n_jumps, trunc_eps,
               max_sticks, plot, seed, fmt, output):
    """One ranked-weights sample from the chosen construction."""
    if sampler == "sticks":
        p = PDParams(alpha, theta)
        rw = sample_sticks_size_biased(
            p, TruncationRule(eps=trunc_eps, max_sticks=max_sticks), seed=seed
        )
    elif sampler == "dirichlet":
        if m is None or dirichlet_alpha is None:
            raise click.UsageError("dirichlet sampler needs --m and --dirichlet-alpha")
        rw = sample_symmetric_dirichlet(m, dirichlet_alpha, seed=seed)
    else:
        p = PDParams(alpha, theta)
        rw, _total = sample_subordinator(p, n_jumps, seed=seed)
    if fmt == "json":
        _write(output, _json_text(
            {"weights": rw.weights.tolist(), "residual": rw.residual}
        ))
    else:
        rows = [["rank", "weight"]]
        rows += [[i + 1, f"{w:.12g}"] for i, w in enumerate(rw.weights)]
        _write(output, _csv_text(rows))
    if plot:
        from .plots import save_ranked_weights

        save_ranked_weights(rw.weights, plot)


@main.command("crp")
@click.option("--n", type=int, required=True, help="Number of customers.")
@click.option("--alpha", type=float, required=True)
@click.option("--theta", type=float, required=True)
@common_options
@handle_errors
def crp_cmd(n, alpha, theta, seed, fmt, output):
    """One Chinese-Restaurant partition shape of n elements."""
    f = sample_crp(n, PDParams(alpha, theta), seed=seed)
    if fmt == "json":
        _write(output, _json_text({"blocks": list(f.blocks)}))
    else:
        rows = [["rank", "block_size"]]
        rows += [[i + 1, b] for i, b in enumerate(f.blocks)]
        _write(output, _csv_text(rows))


@main.command("curve")
@click.option("--alpha", type=float, required=True)
@click.option("--theta", type=float, required=True)
@click.option("--ranks", type=int, default=100, show_default=True)
@click.option("--samples", type=int, default=200, show_default=True)
@click.option("--plot", type=click.Path(writable=True), default=None)
@common_options
@handle_errors
def curve_cmd(alpha, theta, ranks, samples, plot, seed, fmt, output):
    """Averaged Poisson-Dirichlet capital distribution curve."""
    curve = average_pd_curve(
        PDParams(alpha, theta), ranks, samples, seed=seed, allow_short=True
    )
    if fmt == "json":
        _write(output, _json_text(
            {"ranks": curve.ranks.tolist(), "weights": curve.weights.tolist()}
        ))
    else:
        rows = [["rank", "weight"]]
        rows += [[int(r), f"{w:.12g}"] for r, w in zip(curve.ranks, curve.weights)]
        _write(output, _csv_text(rows))
    if plot:
        from .plots import save_weight_curves

        save_weight_curves(
            [(f"PD({alpha},{theta})", curve.ranks, curve.weights)], plot
        )


@main.command("fit")
@click.option("--input", "input_path", type=click.Path(exists=False, allow_dash=True),
              required=True, help="Caps CSV (ticker, market_cap); '-' for stdin.")
@click.option("--samples", type=int, default=200, show_default=True,
              help="Samples averaged per curve evaluation.")
@click.option("--refine-rounds", type=int, default=4, show_default=True)
@click.option("--alpha-points", type=int, default=20, show_default=True)
@click.option("--theta-points", type=int, default=25, show_default=True)
@click.option("--threads", type=int, default=None,
              help="Worker threads for grid evaluation (never affects values).")
@click.option("--curve-output", type=click.Path(writable=True), default=None,
              help="Write rank, observed, fitted CSV here.")
@click.option("--plot", type=click.Path(writable=True), default=None)
@common_options
@handle_errors
def fit_cmd(input_path, samples, refine_rounds, alpha_points, theta_points,
            threads, curve_output, plot, seed, fmt, output):
    """Least-squares (alpha, theta) fit to ranked capitalizations."""
    if input_path == "-":
        ingest = ingest_caps(sys.stdin)
    else:
        with open(input_path, newline="") as fh:
            ingest = ingest_caps(fh)
    for w in ingest.warnings:
        click.echo(f"warning: {w}", err=True)
    search = SearchConfig(
        alpha_grid=tuple(np.linspace(0.0, 0.95, alpha_points)),
        theta_grid=tuple(np.geomspace(1.0, 500.0, theta_points)),
        refine_rounds=refine_rounds,
        n_samples=samples,
    )
    result = fit_params(ingest.curve, search, seed=seed)
    payload = result.to_json_dict()
    payload["warnings"] = ingest.warnings + result.warnings
    _write(output, _json_text(payload))
    if curve_output or plot:
        fitted = average_pd_curve(
            result.params,
            int(ingest.curve.ranks.max()),
            samples,
            seed=seed,
            allow_short=True,
        )
    if curve_output:
        rows = [["rank", "observed", "fitted"]]
        fit_map = dict(zip(fitted.ranks.tolist(), fitted.weights.tolist()))
        for r, w in zip(ingest.curve.ranks, ingest.curve.weights):
            fw = fit_map.get(int(r))
            rows.append([int(r), f"{w:.12g}", "" if fw is None else f"{fw:.12g}"])
        _write(curve_output, _csv_text(rows))
    if plot:
        from .plots import save_weight_curves

        save_weight_curves(
            [
                ("observed", ingest.curve.ranks, ingest.curve.weights),
                (
                    f"PD({result.params.alpha:.2f},{result.params.theta:.0f})",
                    fitted.ranks,
                    fitted.weights,
                ),
            ],
            plot,
        )


@main.command("simulate-du")
@click.option("--n", type=int, required=True, help="Population size.")
@click.option("--alpha", type=float, required=True)
@click.option("--theta", type=float, required=True)
@click.option("--steps", type=int, required=True, help="Down-up pairs.")
@click.option("--record-top", type=int, default=5, show_default=True)
@click.option("--thin", type=int, default=None, help="Record every t-th pair (default n).")
@click.option("--plot", type=click.Path(writable=True), default=None)
@common_options
@handle_errors
def simulate_du_cmd(n, alpha, theta, steps, record_top, thin, plot, seed, fmt, output):
    """Down-up chain trajectory of top-k normalized weights."""
    cfg = ChainConfig(
        n=n, p=PDParams(alpha, theta), steps=steps,
        record_top=record_top, thin=thin, seed=seed,
    )
    traj = run_chain(cfg)
    if fmt == "json":
        _write(output, _json_text(
            {"times": traj.times.tolist(), "series": traj.series.tolist()}
        ))
    else:
        _write(output, _csv_text(traj.to_csv_rows()))
    if plot:
        from .plots import save_trajectory

        save_trajectory(traj.times, traj.series, plot,
                        title=f"DU chain n={n}, PD({alpha},{theta})")


@main.command("simulate-diffusion")
@click.option("--alpha", type=float, required=True)
@click.option("--theta", type=float, required=True)
@click.option("--k-sticks", type=int, default=10, show_default=True)
@click.option("--dt", type=float, default=1e-4, show_default=True)
@click.option("--t-end", type=float, default=1.0, show_default=True)
@click.option("--m0", type=float, default=1.0, show_default=True)
@click.option("--shares", default=None,
              help="Comma-separated shares outstanding per stock (default all 1).")
@click.option("--record-every", type=int, default=1, show_default=True)
@click.option("--scheme", type=click.Choice(["beta", "euler"]), default="beta",
              show_default=True)
@click.option("--plot", type=click.Path(writable=True), default=None)
@common_options
@handle_errors
def simulate_diffusion_cmd(alpha, theta, k_sticks, dt, t_end, m0, shares,
                           record_every, scheme, plot, seed, fmt, output):
    """Wright-Fisher stick diffusion with market value and restored prices."""
    q = None
    if shares:
        q = np.array([float(s) for s in shares.split(",")])
    cfg = DiffusionConfig(
        p=PDParams(alpha, theta), n_sticks=k_sticks, dt=dt, t_end=t_end,
        m0=m0, shares=q, seed=seed,
    )
    paths = simulate(cfg, record_every=record_every, scheme=scheme)
    if fmt == "json":
        _write(output, _json_text({
            "times": paths.times.tolist(),
            "market": paths.market.tolist(),
            "weights": paths.weights.tolist(),
            "prices": paths.prices.tolist(),
        }))
    else:
        _write(output, _csv_text(paths.to_csv_rows()))
    if plot:
        from .plots import save_price_paths

        save_price_paths(paths, plot, title=f"PD({alpha},{theta}) market model")


@main.command("broken-stick")
@click.option("--n", type=int, required=True, help="Number of pieces.")
@common_options
@handle_errors
def broken_stick_cmd(n, seed, fmt, output):
    """Expected ranked piece lengths of a uniformly broken unit stick."""
    from .samplers import broken_stick_expected

    x = broken_stick_expected(n)
    if fmt == "json":
        _write(output, _json_text({"expected": x.tolist()}))
    else:
        _write(output, ", ".join(f"{v:.6f}" for v in x) + "\n")


if __name__ == "__main__":
    main()
