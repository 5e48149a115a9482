import functools
import sys
from typing import Optional, Sequence

import click

from . import terminal_format
from .commands import (
    convolve_command,
    dump_config_command,
    extras_command,
    inclusion_command,
    lln_command,
    mean_command,
    moving_command,
    pseries_command,
    regularity_command,
    resolve_method,
    selftest_command,
    tauberian_command,
)
from .config import merged_config
from .errors import SummabilityError
from .options import (
    grid_option,
    horizon_option,
    lambda_option,
    method_options,
    out_option,
    seeds_option,
    seq_option,
    tol_option,
    window_option,
)


def reports_errors(f):
    """Turn package errors into click errors (exit 1) and command results into exit codes."""

    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            code = f(*args, **kwargs)
        except SummabilityError as e:
            raise click.ClickException(str(e)) from e
        ctx = click.get_current_context()
        ctx.exit(code or 0)

    return wrapper


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option(
    "--config",
    "config_file",
    type=click.Path(dir_okay=False),
    default=None,
    help="Extra YAML config merged over the default, user and project configs",
)
@click.option("-v", "--verbose", count=True, help="-v for progress, -vv for debug output")
@click.pass_context
def cli(ctx, config_file, verbose):
    """Voronoi means, moving averages and power-series methods with numerical verifiers"""
    ctx.ensure_object(dict)
    try:
        config = merged_config(config_file)
    except SummabilityError as e:
        raise click.ClickException(str(e)) from e
    ctx.obj["config"] = config
    terminal_format.configure(config, verbose)


@cli.command()
@click.option("--p", "p_text", default="one", show_default=True, help="Left sequence")
@click.option("--q", "q_text", default="one", show_default=True, help="Right sequence")
@click.option(
    "--kind",
    type=click.Choice(["voronoi", "cauchy"]),
    default="voronoi",
    show_default=True,
    help="voronoi: (p o q)_n; cauchy: (p * q)_n",
)
@horizon_option
@out_option
@click.pass_context
@reports_errors
def convolve(ctx, p_text, q_text, kind, N, out):
    """Voronoi or Cauchy convolution of two sequences"""
    return convolve_command(ctx.obj["config"], p_text, q_text, N, kind, out)


@cli.command()
@method_options
@seq_option
@horizon_option
@tol_option
@window_option
@click.option("--start", type=click.IntRange(min=0), default=0, help="First index where u_n != 0")
@click.option(
    "--check",
    type=click.Choice(["decompose", "limitation", "kernel"]),
    default=None,
    help="Run a verifier instead of printing t_n",
)
@click.option("--limit", "s_limit", type=float, default=None, help="Limit s for the limitation check")
@out_option
@click.pass_context
@reports_errors
def mean(ctx, method_name, params, p_text, q_text, u_text, seq, N, tol, window, start, check, s_limit, out):
    """Voronoi mean t_n = (p * qs)_n / u_n"""
    config = ctx.obj["config"]
    method = resolve_method(config, method_name, params, p_text, q_text, u_text)
    return mean_command(config, method, seq, N, tol, window, start, check, s_limit, out)


@cli.command()
@method_options
@horizon_option
@out_option
@click.pass_context
@reports_errors
def regularity(ctx, method_name, params, p_text, q_text, u_text, N, out):
    """Evidence for the three regularity conditions"""
    config = ctx.obj["config"]
    method = resolve_method(config, method_name, params, p_text, q_text, u_text)
    return regularity_command(config, method, N, out)


@cli.command()
@method_options
@seq_option
@horizon_option
@lambda_option
@click.option(
    "--direction",
    type=click.Choice(["omega_to_V", "V_to_omega", "both"]),
    default="both",
    show_default=True,
)
@click.option(
    "--denominator",
    type=click.Choice(["u", "p"]),
    default=None,
    help="Denominator of the V -> omega averages (default from config)",
)
@out_option
@click.pass_context
@reports_errors
def tauberian(ctx, method_name, params, p_text, q_text, u_text, seq, N, lambdas, direction, denominator, out):
    """Window estimates of the four Tauberian conditions"""
    config = ctx.obj["config"]
    method = resolve_method(config, method_name, params, p_text, q_text, u_text)
    return tauberian_command(config, method, seq, N, lambdas, direction, denominator, out)


@cli.command()
@click.option(
    "--kind",
    type=click.Choice(["voronoi", "kronecker"]),
    default="voronoi",
    show_default=True,
    help="voronoi: (V,1,q,u) into (V,1,q~,u~); kronecker: the Kronecker lemma",
)
@click.option("--q", "q_text", default="one", show_default=True)
@click.option("--u", "u_text", default="linear", show_default=True)
@click.option("--q-tilde", "q_tilde_text", default=None)
@click.option("--u-tilde", "u_tilde_text", default=None)
@click.option("--g", "g_text", default=None, help="Increasing weight g_n for the Kronecker lemma")
@seq_option
@horizon_option
@tol_option
@window_option
@out_option
@click.pass_context
@reports_errors
def inclusion(ctx, kind, q_text, u_text, q_tilde_text, u_tilde_text, g_text, seq, N, tol, window, out):
    """Inclusion between (V,1,q,u) methods"""
    return inclusion_command(
        ctx.obj["config"], kind, q_text, u_text, q_tilde_text, u_tilde_text, g_text, seq, N, tol, window, out
    )


@cli.command()
@method_options
@seq_option
@horizon_option
@lambda_option
@click.option("--u-fn", "u_fn_text", default=None, help="Continuous weight u(x): registered name or expression in x")
@click.option(
    "--check",
    type=click.Choice(["equivalence", "uniformity", "criterion", "continuous"]),
    default="equivalence",
    show_default=True,
)
@click.option("--lambda-range", nargs=2, type=float, default=(1.1, 4.0), show_default=True)
@click.option("--grid-size", type=click.IntRange(min=2), default=30, show_default=True)
@grid_option("alpha", "alpha > 1 for the shrinking-window criterion, repeatable")
@tol_option
@window_option
@out_option
@click.pass_context
@reports_errors
def moving(
    ctx, method_name, params, p_text, q_text, u_text, seq, N, lambdas, u_fn_text, check,
    lambda_range, grid_size, alpha_grid, tol, window, out,
):
    """Moving averages c_n = [U(n) - U(w_lambda(n))] / u_n"""
    config = ctx.obj["config"]
    method = resolve_method(config, method_name, params, p_text, q_text, u_text)
    return moving_command(
        config, method, seq, N, lambdas, u_fn_text, check, tuple(lambda_range), grid_size, alpha_grid, tol, window, out
    )


@cli.command()
@method_options
@seq_option
@horizon_option
@grid_option("x", "Abscissa x in (0, R), repeatable (default: a grid toward R)")
@click.option("--truncation", type=click.IntRange(min=64), default=None, help="Cap on series terms (default from config)")
@click.option(
    "--check",
    type=click.Choice(["abelian", "tauberian", "karamata", "ratio-iv", "ratio-v"]),
    default=None,
    help="Run a verifier instead of printing T(x)",
)
@click.option("--rho", type=float, default=1.0, show_default=True, help="Index of u for the karamata check")
@click.option("--ell", "ell_text", default="1", show_default=True, help="Slowly varying factor l(x)")
@click.option(
    "--hypothesis-form",
    type=click.Choice(["v_series", "as_printed"]),
    default="v_series",
    show_default=True,
)
@click.option("--gamma-normalized/--no-gamma-normalized", default=True, show_default=True)
@tol_option
@click.option("--t-tol", type=float, default=1e-3, show_default=True, help="Tolerance for the T(x) limit")
@window_option
@out_option
@click.pass_context
@reports_errors
def pseries(
    ctx, method_name, params, p_text, q_text, u_text, seq, N, x_grid, truncation, check, rho, ell_text,
    hypothesis_form, gamma_normalized, tol, t_tol, window, out,
):
    """Power-series transform T(x) = sum (p * qs)_n x^n / sum v_n x^n"""
    config = ctx.obj["config"]
    method = resolve_method(config, method_name, params, p_text, q_text, u_text)
    return pseries_command(
        config, method, seq, N, x_grid, truncation, check, rho, ell_text, hypothesis_form, gamma_normalized,
        tol, t_tol, window, out,
    )


@cli.command()
@click.option(
    "--variant",
    type=click.Choice(["R1_series", "R1_mean", "R1_mean_printed", "ingham"]),
    default="R1_series",
    show_default=True,
)
@seq_option
@grid_option("h", "Step h > 0 for the Riemann transforms, repeatable")
@grid_option("x", "Abscissa x >= 1 for the Ingham transform, repeatable")
@click.option("--horizon-factor", type=float, default=None, help="Riemann horizon ceil(factor/h)")
@tol_option
@out_option
@click.pass_context
@reports_errors
def extras(ctx, variant, seq, h_grid, x_grid, horizon_factor, tol, out):
    """Riemann (R,1), (R_1) and Ingham transforms"""
    return extras_command(ctx.obj["config"], variant, seq, h_grid, x_grid, horizon_factor, tol, out)


@cli.command()
@click.option(
    "--kind",
    type=click.Choice(["mean", "pseries", "moving", "baum-katz"]),
    default=None,
    help="Experiment kind (default from the experiment config)",
)
@click.option("--distribution", default=None, help="normal, cauchy(loc=0,scale=1), pareto(alpha=2), zero, ...")
@click.option("--phi", default=None, help="linear, power(a=2), xlog, ... or an expression in x")
@click.option("--p", "p", default=None)
@click.option("--q", "q", default=None)
@click.option("--u", "u", default=None)
@click.option("--n", "N", type=click.IntRange(min=10), default=None, help="Horizon")
@seeds_option
@click.option("--threshold", type=float, default=None)
@click.option("--truncated-means", type=click.Choice(["closed_form", "quadrature", "empirical"]), default=None)
@click.option("--u-fn", "window", default=None, help="Continuous weight u(x) for moving averages")
@lambda_option
@click.option("--method", default=None, help="Power-series method for kind pseries (abel, borel, ...)")
@click.option("--h-uq", default=None, help="Abscissa map h(m) for kind pseries, an expression in m")
@click.option("--gamma", type=float, default=None, help="gamma > 1 for kind baum-katz")
@click.option("--max-mode/--no-max-mode", default=None, help="Maximal partial sums for kind baum-katz")
@grid_option("eps", "epsilon for kind baum-katz, repeatable")
@click.option("--replicates", type=click.IntRange(min=1), default=None)
@click.option("--workers", type=click.IntRange(min=1), default=None, help="Threads (default $VORONOI_MEANS_THREADS)")
@out_option
@click.pass_context
@reports_errors
def lln(
    ctx, kind, distribution, phi, p, q, u, N, seeds, threshold, truncated_means, window, lambdas,
    method, h_uq, gamma, max_mode, eps_grid, replicates, workers, out,
):
    """Monte Carlo strong-law experiment from the experiment config"""
    overrides = dict(
        kind=kind,
        distribution=distribution,
        phi=phi,
        p=p,
        q=q,
        u=u,
        N=N,
        seeds=seeds,
        threshold=threshold,
        truncated_means=truncated_means,
        window=window,
        lambdas=lambdas,
        method=method,
        h_uq=h_uq,
        gamma=gamma,
        max_mode=max_mode,
        eps_grid=eps_grid,
        replicates=replicates,
    )
    return lln_command(ctx.obj["config"], overrides, workers, out)


@cli.command()
@out_option
@reports_errors
def selftest(out):
    """Run the invariant suite at small horizons"""
    return selftest_command(out)


@cli.command(name="dump-config")
@click.pass_context
@reports_errors
def dump_config(ctx):
    """Dump the current configuration"""
    dump_config_command(ctx.obj["config"])


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Run the CLI on ``argv`` and return the exit code instead of exiting."""
    args = list(sys.argv[1:] if argv is None else argv)
    try:
        code = cli.main(args=args, prog_name="voronoi-means", standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("Aborted!", err=True)
        return 1
    except click.ClickException as e:
        e.show()
        return 1
    return code if isinstance(code, int) else 0


def main():
    sys.exit(run())
