import logging
from typing import Any, Dict, Iterable, Optional

from rich.console import Console
from rich.logging import RichHandler
from rich.syntax import Syntax as RichSyntax
from rich.table import Table

from .config import merged_config
from .limits import LimitVerdict, VerifierReport

PACKAGE_LOGGER = "voronoi_means"


def get_terminal_config(config: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """
    Get terminal configuration from the given or merged config.

    Returns:
        Dict with terminal configuration settings
    """
    config = merged_config() if config is None else config
    return config.get("terminal") or {}


def get_theme(config: Optional[Dict[str, Any]] = None) -> str:
    """Get the configured syntax highlighting theme"""
    return get_terminal_config(config).get("theme", "monokai")


def create_console(config: Optional[Dict[str, Any]] = None, width=None) -> Console:
    """
    Create a stderr console with configured settings.

    Args:
        config: Merged configuration (loaded when omitted)
        width: Optional width override for the console

    Returns:
        A configured Console instance
    """
    terminal_config = get_terminal_config(config)
    final_width = width if width is not None else terminal_config.get("width")
    return Console(
        stderr=True,
        width=final_width,
        color_system=terminal_config.get("color_system", "auto"),
        highlight=terminal_config.get("highlight", True),
    )


# The default console; the CLI replaces it once the run's config is known.
console = create_console()


def configure(config: Dict[str, Any], verbosity: int = 0) -> Console:
    """Rebuild the console from ``config`` and route package logging through it."""
    global console
    console = create_console(config)
    logger = logging.getLogger(PACKAGE_LOGGER)
    for handler in list(logger.handlers):
        if isinstance(handler, RichHandler):
            logger.removeHandler(handler)
    handler = RichHandler(console=console, show_time=False, show_path=verbosity > 1)
    handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
    logger.addHandler(handler)
    logger.setLevel(logging.DEBUG if verbosity > 1 else logging.INFO if verbosity == 1 else logging.WARNING)
    return console


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def report_table(report: VerifierReport) -> Table:
    table = Table(title=report.title, caption=report.label, title_justify="left")
    table.add_column("check")
    table.add_column("role", style="dim")
    table.add_column("ok", justify="center")
    table.add_column("value", justify="right")
    table.add_column("detail", overflow="fold")
    for check in report.checks:
        mark = "[green]yes[/green]" if check.ok else "[red]NO[/red]"
        table.add_row(check.name, check.role, mark, _cell(check.value), check.detail)
    return table


def verdict_lines(report: VerifierReport) -> Iterable[str]:
    for key, value in report.data.items():
        if isinstance(value, LimitVerdict):
            yield f"{key}: {value}"
        elif isinstance(value, (int, float, str, bool)):
            yield f"{key}: {_cell(value)}"


def render_report(report: VerifierReport, target: Optional[Console] = None):
    """Verdict block: the check table, scalar results and the overall verdict."""
    out = target or console
    if report.checks:
        out.print(report_table(report))
    for line in verdict_lines(report):
        out.print(f"  {line}", highlight=False)
    status = "[green]PASSED[/green]" if report.passed else "[red]FAILED[/red]"
    out.print(f"{report.title}: {status} ({report.label})")


def render_yaml(text: str, config: Optional[Dict[str, Any]] = None, target: Optional[Console] = None):
    (target or console).print(RichSyntax(text, "yaml", theme=get_theme(config), line_numbers=False))
