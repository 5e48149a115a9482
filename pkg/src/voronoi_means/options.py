import click


def horizon_option(f):
    return click.option(
        "--n",
        "N",
        type=click.IntRange(min=0),
        default=1000,
        show_default=True,
        help="Horizon: evaluate indices 0..N",
    )(f)


def seq_option(f):
    return click.option(
        "--seq",
        "-s",
        default="one",
        show_default=True,
        help="Input sequence s_n: builtin name, [a,b,...] prefix, config name or expression in n",
    )(f)


def method_options(f):
    """--method with --param, or an explicit triple --p/--q/--u."""
    f = click.option("--u", "u_text", help="u_n of an explicit triple")(f)
    f = click.option("--q", "q_text", help="q_n of an explicit triple")(f)
    f = click.option("--p", "p_text", help="p_n of an explicit triple")(f)
    f = click.option(
        "--param",
        "params",
        multiple=True,
        metavar="KEY=VALUE",
        help="Method parameter, repeatable (numbers or sequences)",
    )(f)
    f = click.option("--method", "-m", "method_name", help="Named method (cesaro_c1, euler, abel, ...)")(f)
    return f


def lambda_option(f):
    return click.option(
        "--lambda",
        "lambdas",
        type=float,
        multiple=True,
        help="Window parameter lambda > 1, repeatable (default from config)",
    )(f)


def tol_option(f):
    return click.option(
        "--tol",
        type=float,
        default=None,
        help="Limit detection tolerance (default from config)",
    )(f)


def window_option(f):
    return click.option(
        "--window",
        type=click.IntRange(min=2),
        default=None,
        help="Trailing window length for limit detection (default from config)",
    )(f)


def out_option(f):
    return click.option(
        "--out",
        "-o",
        type=click.Path(dir_okay=False, writable=True),
        default=None,
        help="Write CSV to this file instead of stdout",
    )(f)


def seeds_option(f):
    return click.option(
        "--seed",
        "seeds",
        type=int,
        multiple=True,
        help="Random seed, repeatable (default from config)",
    )(f)


def grid_option(name: str, help_text: str):
    def decorator(f):
        return click.option(f"--{name}", f"{name}_grid", type=float, multiple=True, help=help_text)(f)

    return decorator
