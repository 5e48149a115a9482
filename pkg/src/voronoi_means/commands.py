"""
Command bodies behind the CLI. Each returns the process exit code: 0 when
the verdict block passed, 2 when a verifier reported a violation.
"""
import logging
import math
from dataclasses import replace
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np
import yaml

from . import classical, lln, moving_average, power_series, terminal_format, voronoi
from .config import section
from .convolution import cauchy_convolve, voronoi_convolve
from .errors import ParameterError, SummabilityError
from .file_helpers import csv_text, emit_csv, series_csv
from .limits import VerifierReport, default_window, detect_limit
from .methods import MethodDescriptor, make_standard_method, method_from_expressions, u_function_from_text
from .phi import phi_check
from .selftest import run_selftest
from .sequences import SequenceSpec, WeightTriple, compile_expression, parse_sequence
from .terminal_format import render_report, render_yaml

log = logging.getLogger(__name__)

Method = Union[MethodDescriptor, WeightTriple]


# ---------------------------------------------------------------------------
# Shared resolution
# ---------------------------------------------------------------------------


def named_sequences(config: Dict[str, Any]) -> Dict[str, Any]:
    return config.get("sequences") or {}


def sequence(config: Dict[str, Any], text: str) -> SequenceSpec:
    return parse_sequence(text, named_sequences(config))


def parse_params(config: Dict[str, Any], items: Sequence[str]) -> Dict[str, Any]:
    """``key=value`` items; values are numbers when they parse, sequences otherwise."""
    params: Dict[str, Any] = {}
    for item in items:
        key, sep, raw = item.partition("=")
        key, raw = key.strip(), raw.strip()
        if not sep or not key or not raw:
            raise ParameterError(f"expected KEY=VALUE, got {item!r}")
        try:
            params[key] = float(raw)
        except ValueError:
            params[key] = sequence(config, raw)
    return params


def resolve_method(
    config: Dict[str, Any],
    method_name: Optional[str],
    params: Sequence[str] = (),
    p_text: Optional[str] = None,
    q_text: Optional[str] = None,
    u_text: Optional[str] = None,
) -> Method:
    """A named method, or the triple given by --p/--q/--u."""
    explicit = [t for t in (p_text, q_text, u_text) if t is not None]
    if method_name:
        if explicit:
            raise ParameterError("give either --method or --p/--q/--u, not both")
        return make_standard_method(method_name, parse_params(config, params))
    if len(explicit) != 3:
        raise ParameterError("give --method, or all three of --p, --q and --u")
    return method_from_expressions(p_text, q_text, u_text, named_sequences(config))


def weights(method: Method) -> WeightTriple:
    return method.triple if isinstance(method, MethodDescriptor) else method


def method_name(method: Method) -> str:
    return method.describe() if isinstance(method, MethodDescriptor) else method.name


def detection(config: Dict[str, Any], N: int, tol: Optional[float], window: Optional[int]) -> Tuple[float, int]:
    """Tolerance and trailing window, flags over the ``detect`` section."""
    detect = section(config, "detect")
    tol = float(detect["tol"]) if tol is None else tol
    window = default_window(N, float(detect["window_fraction"])) if window is None else window
    return tol, min(window, N + 1)


def lambdas_from(config: Dict[str, Any], name: str, lambdas: Sequence[float]) -> Tuple[float, ...]:
    chosen = tuple(lambdas) or tuple(float(lam) for lam in section(config, name).get("lambdas") or ())
    if not chosen:
        raise ParameterError("no lambda values given")
    return chosen


def finish(report: VerifierReport, csv: str, out: Optional[str] = None) -> int:
    emit_csv(csv, out)
    render_report(report)
    return 0 if report.passed else 2


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def convolve_command(config, p_text: str, q_text: str, N: int, kind: str, out: Optional[str]) -> int:
    """(p o q)_n or (p * q)_n for n <= N."""
    p, q = sequence(config, p_text), sequence(config, q_text)
    if kind == "voronoi":
        vals = voronoi_convolve(p, q, N)
    elif kind == "cauchy":
        vals = cauchy_convolve(p, q, N)
    else:
        raise ParameterError(f"unknown convolution kind {kind!r}")
    emit_csv(csv_text(("n", "value"), zip(range(N + 1), vals)), out)
    return 0


def mean_command(
    config,
    method: Method,
    s_text: str,
    N: int,
    tol: Optional[float],
    window: Optional[int],
    start: int,
    check: Optional[str],
    s_limit: Optional[float],
    out: Optional[str],
) -> int:
    """t_n for n <= N, or one of the decomposition, limitation and kernel checks."""
    s = sequence(config, s_text)
    tol, window = detection(config, N, tol, window)
    name = method_name(method)

    if check == "decompose":
        _, _, report = voronoi.thm1_decompose(method, s, N, tol, window)
        return finish(report, series_csv(report.series), out)

    if check == "limitation":
        if s_limit is None:
            raise ParameterError("the limitation check needs --limit")
        report = voronoi.thm2_limitation_check(method, s, s_limit, N, tol, window)
        return finish(report, series_csv(report.series), out)

    t = voronoi.voronoi_mean(method, s, N, start=start)
    report = VerifierReport(f"mean under {name}")
    blowup = float(section(config, "detect")["blowup"])
    verdict = detect_limit(t.defined, tol, min(window, len(t.defined)), blowup)
    report.data["verdict"] = verdict

    if check == "kernel":
        solution = voronoi.invert_kernel(method, t, s, N)
        report.data.update(kernel_residual=solution.relative_residual, ishiguro_condition=solution.ishiguro_condition)
        report.add("kernel reconstruction", solution.relative_residual <= 1e-10, solution.relative_residual, role="conclusion")
        for note in solution.notes:
            log.info("kernel: %s", note)
        return finish(report, csv_text(("n", "h"), zip(range(N + 1), solution.h)), out)

    if check is not None:
        raise ParameterError(f"unknown mean check {check!r}")
    if start == 0:
        rewritten = voronoi.voronoi_mean_rewritten(method, s, N)
        scale = max(1.0, float(np.max(np.abs(t.values))))
        residual = float(np.max(np.abs(rewritten - t.values))) / scale
        report.data["rewritten_residual"] = residual
        report.add("rewritten form agrees", residual <= 1e-10, residual)
    return finish(report, csv_text(("n", "t"), zip(range(N + 1), t.values)), out)


def regularity_command(config, method: Method, N: int, out: Optional[str]) -> int:
    settings = section(config, "regularity")
    report = voronoi.regularity_report(
        method, N, int(settings["cond_ii_terms"]), float(settings["cond_iii_tol"])
    )
    return finish(report, series_csv(report.series), out)


def tauberian_command(
    config,
    method: Method,
    s_text: str,
    N: int,
    lambdas: Sequence[float],
    direction: str,
    denominator: Optional[str],
    out: Optional[str],
) -> int:
    """Estimates of the four Tauberian conditions; the CSV carries t_n."""
    s = sequence(config, s_text)
    settings = section(config, "tauberian")
    upper, lower = voronoi.default_maps(lambdas_from(config, "tauberian", lambdas))
    report = voronoi.tauberian_tco(
        method, s, upper, direction, N, lower_maps=lower, denominator=denominator or settings["denominator"]
    )
    t = voronoi.voronoi_mean(method, s, N)
    return finish(report, csv_text(("n", "t"), zip(range(N + 1), t.values)), out)


def inclusion_command(
    config,
    kind: str,
    q_text: str,
    u_text: str,
    q_tilde_text: Optional[str],
    u_tilde_text: Optional[str],
    g_text: Optional[str],
    s_text: str,
    N: int,
    tol: Optional[float],
    window: Optional[int],
    out: Optional[str],
) -> int:
    s = sequence(config, s_text)
    tol, window = detection(config, N, tol, window)
    if kind == "kronecker":
        if g_text is None:
            raise ParameterError("the Kronecker check needs --g")
        report = voronoi.kronecker_check(sequence(config, q_text), s, sequence(config, g_text), N, tol, window)
    elif kind == "voronoi":
        if q_tilde_text is None or u_tilde_text is None:
            raise ParameterError("the inclusion check needs --q-tilde and --u-tilde")
        report = voronoi.thm4_inclusion_check(
            sequence(config, q_text),
            sequence(config, u_text),
            sequence(config, q_tilde_text),
            sequence(config, u_tilde_text),
            s,
            N,
            tol,
            window,
        )
    else:
        raise ParameterError(f"unknown inclusion kind {kind!r}")
    return finish(report, series_csv(report.series), out)


def _window_fn(config, method: Method, u_fn_text: Optional[str]):
    if u_fn_text:
        return u_function_from_text(u_fn_text)
    if isinstance(method, MethodDescriptor) and method.window is not None:
        return method.window
    raise ParameterError(f"{method_name(method)} has no continuous weight u(x); give --u-fn")


def moving_command(
    config,
    method: Method,
    s_text: str,
    N: int,
    lambdas: Sequence[float],
    u_fn_text: Optional[str],
    check: str,
    lambda_range: Tuple[float, float],
    grid_size: int,
    alphas: Sequence[float],
    tol: Optional[float],
    window: Optional[int],
    out: Optional[str],
) -> int:
    """Moving averages c_n against their targets, or the uniformity, criterion and continuous checks."""
    s = sequence(config, s_text)
    settings = section(config, "moving")
    tol, window = detection(config, N, tol, window)
    u_fn = _window_fn(config, method, u_fn_text)

    if check == "uniformity":
        report = moving_average.thm6_uniformity_check(method, u_fn, s, lambda_range, grid_size, N, tol=tol, window=window)
        rows = zip((N // 4, N // 2, N), report.data["deviations"])
        return finish(report, csv_text(("n", "sup_deviation"), rows), out)

    if check == "criterion":
        triple = weights(method)
        report = moving_average.thm8_pi_criterion(triple.p, triple.q, s, u_fn, alphas or (2.0, 1.5, 1.25, 1.1), N)
        rows = zip(report.data["alphas"], report.data["estimates"])
        return finish(report, csv_text(("alpha", "estimate"), rows), out)

    if check == "continuous":
        report = moving_average.cor2_discrete_continuous_check(method, u_fn, s, N, tol=tol, window=window)
        return finish(report, series_csv(report.series), out)

    if check != "equivalence":
        raise ParameterError(f"unknown moving-average check {check!r}")
    if isinstance(method, MethodDescriptor) and method.lam is not None and not lambdas:
        lams: Tuple[float, ...] = (method.lam,)
    else:
        lams = lambdas_from(config, "moving", lambdas)
    windows = [
        moving_average.WindowMap(u_fn, lam, float(settings["inverse_tol"]), float(settings["snap_tol"]))
        for lam in lams
    ]
    report = moving_average.thm5_equivalence_check(method, windows, s, N, tol, window)
    report.data["window"] = (
        f"w_lambda(x) = u^<-(u(x)/lambda) with u(x) = {u_fn.name}, "
        f"{windows[0].inverse_method} inverse, window starts at floor(w_lambda(n))"
    )
    mean = report.data["mean_verdict"]
    base = mean.estimate if mean.converged else math.nan
    rows = []
    for wm in windows:
        c = report.series[f"c_lambda={wm.lam:g}"]
        target = (1.0 - 1.0 / wm.lam) * base
        rows.extend((n, wm.lam, c[n], target) for n in range(N + 1))
    return finish(report, csv_text(("n", "lambda", "c", "target"), rows), out)


def _power_series_method(config, method: Method, N: int, truncation: Optional[int]) -> power_series.PowerSeriesMethod:
    options = _series_options(config, truncation)
    if isinstance(method, MethodDescriptor):
        return power_series.from_descriptor(method, **options)
    return power_series.from_triple(method, horizon=max(N, 20), **options)


def _series_options(config, truncation: Optional[int]) -> Dict[str, Any]:
    settings = section(config, "power_series")
    return dict(
        truncation=int(truncation or settings["truncation_cap"]),
        tail_rel_tol=float(settings["tail_rel_tol"]),
    )


def pseries_command(
    config,
    method: Method,
    s_text: str,
    N: int,
    x_grid: Sequence[float],
    truncation: Optional[int],
    check: Optional[str],
    rho: float,
    ell_text: str,
    hypothesis_form: str,
    gamma_normalized: bool,
    tol: Optional[float],
    t_tol: float,
    window: Optional[int],
    out: Optional[str],
) -> int:
    """T(x) on an x-grid toward R, or one of the Abelian and Tauberian checks."""
    s = sequence(config, s_text)
    tol, window = detection(config, N, tol, window)
    grid = tuple(x_grid) or None
    options = _series_options(config, truncation)
    columns = ("x", "T", "tail_bound")

    if check is None:
        ps = _power_series_method(config, method, N, truncation)
        if grid is None:
            xs = power_series.default_x_grid(ps.R, int(section(config, "power_series")["grid_points"]))
        else:
            xs = np.asarray(grid, dtype=float)
        T, bounds = power_series.T_on_grid(ps, s, xs)
        report = VerifierReport(f"power-series transform under {method_name(method)}")
        blowup = float(section(config, "detect")["blowup"])
        report.data.update(radius=ps.R, verdict=detect_limit(T, t_tol, min(3, len(T)), blowup))
        report.series.update(x=xs, T=T, tail_bound=bounds)
    elif check == "abelian":
        report = power_series.thm9i_abelian_check(method, s, N, grid, tol, t_tol, window, **options)
    elif check == "tauberian":
        report = power_series.thm9ii_tauberian_check(method, s, N, grid, tol, t_tol, window, **options)
    elif check == "karamata":
        triple = weights(method)
        ell = compile_expression(ell_text, "x")
        report = power_series.thm9iii_karamata_check(
            triple.p,
            triple.q,
            s,
            rho,
            ell,
            N,
            grid,
            hypothesis_form=hypothesis_form,
            gamma_normalized=gamma_normalized,
            tol=tol,
            t_tol=t_tol,
            window=window,
            **options,
        )
    elif check in ("ratio-iv", "ratio-v"):
        report = power_series.thm9iv_v_ratio_check(method, s, check.split("-")[1], N, grid, tol, t_tol, window, **options)
    else:
        raise ParameterError(f"unknown power-series check {check!r}")
    return finish(report, series_csv(report.series, columns), out)


def extras_command(
    config,
    variant: str,
    s_text: str,
    h_grid: Sequence[float],
    x_grid: Sequence[float],
    horizon_factor: Optional[float],
    tol: Optional[float],
    out: Optional[str],
) -> int:
    """Riemann transforms along h -> 0 or the Ingham transform along x -> inf."""
    s = sequence(config, s_text)
    if variant == "ingham":
        xs = tuple(x_grid) or tuple(float(10**k) for k in range(1, 5))
        report = classical.ingham_limit(s, xs, tol if tol is not None else 1e-6)
        return finish(report, series_csv(report.series, ("x", "value")), out)
    factor = horizon_factor if horizon_factor is not None else float(section(config, "riemann")["horizon_factor"])
    report = classical.riemann_limit(
        s, variant, tuple(h_grid) or None, factor, tol if tol is not None else 1e-2
    )
    return finish(report, series_csv(report.series, ("h", "value", "tail_bound")), out)


def build_experiment(config, overrides: Dict[str, Any]) -> Tuple[lln.ExperimentConfig, Dict[str, Any]]:
    """The ``experiment`` section with command-line overrides applied."""
    entry = dict(section(config, "experiment"))
    entry.update({k: v for k, v in overrides.items() if v is not None and v != ()})
    cfg = lln.experiment_from_config(
        entry, section(config, "lln"), named_sequences(config), config.get("phi") or {}
    )
    return cfg, entry


def lln_command(config, overrides: Dict[str, Any], workers: Optional[int], out: Optional[str]) -> int:
    """One strong-law experiment: mean, pseries, moving or baum-katz."""
    cfg, entry = build_experiment(config, overrides)
    cfg = replace(cfg, workers=workers)
    kind = entry.get("kind", "mean")
    log.info("lln %s: N=%d, %d seeds, X ~ %s", kind, cfg.N, len(cfg.seeds), cfg.distribution.describe())

    if kind == "mean":
        report = lln.slln_mean_experiment(cfg)
        columns: Optional[Tuple[str, ...]] = ("seed", "statistic", "exceedance")
    elif kind == "moving":
        report = lln.slln_moving_experiment(cfg)
        columns = None
    elif kind == "pseries":
        method = make_standard_method(str(entry.get("method", "abel")))
        ps = power_series.from_descriptor(method, **_series_options(config, None))
        h_fn = compile_expression(str(entry.get("h_uq", "1-1/(m+1)")), "m")
        report = lln.slln_pseries_experiment(cfg, ps, lambda m: float(h_fn(np.float64(m))))
        columns = ("seed", "statistic")
    elif kind == "baum-katz":
        report = lln.baum_katz_sums(
            cfg,
            float(entry.get("gamma", 2.0)),
            bool(entry.get("max_mode", False)),
            tuple(float(e) for e in entry.get("eps_grid") or section(config, "lln")["eps_grid"]),
            int(entry.get("replicates") or section(config, "lln")["replicates"]),
        )
        columns = None
    else:
        raise ParameterError(f"unknown experiment kind {kind!r}")

    try:
        phi_report = phi_check(cfg.phi, (1.0, 10.0, 100.0))
    except SummabilityError as e:
        log.warning("phi conditions not checkable for %s: %s", cfg.phi, e)
    else:
        report.data.update(
            phi_strict_increase=phi_report.strict_increase,
            phi_ratio_bound_c=phi_report.ratio_bound_c,
            phi_integral_bound_ok=phi_report.integral_ok,
        )
    return finish(report, series_csv(report.series, columns), out)


def selftest_command(out: Optional[str]) -> int:
    report = run_selftest()
    rows = ((c.name, int(c.ok), c.value if c.value is not None else "") for c in report.checks)
    return finish(report, csv_text(("invariant", "ok", "value"), rows), out)


def dump_config_command(config: Dict[str, Any]):
    """Dump the current merged configuration"""
    config_yaml = yaml.dump(config, default_flow_style=False, sort_keys=False)
    terminal_format.console.print("Current merged configuration:", style="bold green")
    render_yaml(config_yaml, config)
