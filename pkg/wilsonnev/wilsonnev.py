"""
Command line front-end ``wnev``.

Commands
--------
characteristic   T(r), m(r) and N(r) over a log radius grid
wilson-counts    Wilson counting functions, or the chain report with --chains
verify           run a verification suite
expand           Wilson series coefficients of a catalog model
"""

from __future__ import annotations

import traceback
from collections.abc import Iterator
from contextlib import contextmanager
from functools import partial
from pathlib import Path

import typer
from rich.console import Console

from wilsonnev.config import Configuration, RunConfig, parse_complex
from wilsonnev.errors import ConfigError, ParameterError, WilsonNevError
from wilsonnev.export import render_document, render_rows, write_output
from wilsonnev.funcmodel import MeromorphicModel, build_model, is_infinite
from wilsonnev.logger import configure_logging, get_logger
from wilsonnev.nevanlinna import characteristic, radius_sweep
from wilsonnev.suites import SUITES, criteria_table, run_suite
from wilsonnev.wilson_counting import (
    a_point_stream,
    chain_report,
    wilson_count_sweep,
)
from wilsonnev.wilson_series import expand as expand_series
from wilsonnev.wilson_series import reconstruction_error, tau

app = typer.Typer(pretty_exceptions_show_locals=False, no_args_is_help=True)
log = get_logger(__name__)

PACKAGE_DIR = Path(__file__).parent


def _origin(exc: BaseException) -> str:
    """Module of the innermost package frame of a traceback."""
    module = "wnev"
    for frame in traceback.extract_tb(exc.__traceback__):
        path = Path(frame.filename)
        if path.parent == PACKAGE_DIR:
            module = path.stem
    return module


@contextmanager
def exit_codes() -> Iterator[None]:
    """
    Map package errors to exit codes with a single-line reason on stderr:
    2 for configuration and usage, 3 for computations.
    """
    try:
        yield
    except WilsonNevError as exc:
        line = f"wnev: error: {_origin(exc)}: {type(exc).__name__}: {exc}"
        typer.echo(line.replace("\n", " "), err=True)
        raise typer.Exit(code=2 if isinstance(exc, ConfigError) else 3) from exc


def parse_params(items: list[str] | None) -> dict | None:
    """
    Model parameters from ``key=value`` options.

    Raises
    ------
    ConfigError
        If an item has no '='.
    """
    if not items:
        return None
    params = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key:
            msg = f"model parameter {item!r} is not of the form key=value"
            raise ConfigError(msg)
        try:
            params[key.strip()] = float(value)
        except ValueError:
            params[key.strip()] = value.strip()
    return params


def load_run(
    command: str,
    config: Path | None,
    verbosity: int,
    **overrides: object,
) -> tuple[Configuration, RunConfig]:
    cfg = Configuration(folder=Path.cwd(), file=config, verbose=verbosity)
    return cfg, RunConfig.from_sources(command, cfg, **overrides)


def load_model(run: RunConfig) -> MeromorphicModel:
    """Catalog model of a run; unknown labels and parameters are usage errors."""
    try:
        return build_model(run.model, run.params)
    except ParameterError as exc:
        raise ConfigError(str(exc)) from exc


def _value(a: complex) -> complex | None:
    return None if is_infinite(a) else a


# shared options
ConfigOption = typer.Option(None, "--config", help="Configuration yaml file.")
ModelOption = typer.Option(None, "--model", help="Catalog label or synthetic:<path>.")
ParamOption = typer.Option(None, "--param", help="Model parameter key=value.")
AOption = typer.Option(None, "--a", help="Value a as re,im or inf.")
RminOption = typer.Option(None, "--rmin", help="Smallest radius.")
RmaxOption = typer.Option(None, "--rmax", help="Largest radius.")
PpdOption = typer.Option(None, "--ppd", help="Grid points per decade.")
COption = typer.Option(None, "--c", help="Lattice shift as re,im.")
TolOption = typer.Option(None, "--tol", help="Quadrature tolerance.")
OutOption = typer.Option(None, "--out", help="Output file, stdout if omitted.")
FormatOption = typer.Option(None, "--format", help="csv or json.")
ThreadsOption = typer.Option(None, "--threads", help="Worker threads.")
VerboseOption = typer.Option(
    0,
    "-v",
    "--verbose",
    help="Verbosity level, e.g. -v or -vv.",
    count=True,
)


@app.command("characteristic")
def cmd_characteristic(
    config: Path = ConfigOption,
    model: str = ModelOption,
    param: list[str] = ParamOption,
    a: str = AOption,
    rmin: float = RminOption,
    rmax: float = RmaxOption,
    ppd: int = PpdOption,
    c: str = COption,
    tol: float = TolOption,
    out: Path = OutOption,
    fmt: str = FormatOption,
    threads: int = ThreadsOption,
    verbosity: int = VerboseOption,
) -> None:
    """Characteristic T(r) = m(r) + N(r) over a log radius grid."""
    configure_logging(verbosity)
    with exit_codes():
        cfg, run = load_run(
            "characteristic", config, verbosity,
            model=model, params=parse_params(param), a=a, r_min=rmin,
            r_max=rmax, points_per_decade=ppd, c=c, tol=tol, out=out,
            format=fmt, threads=threads,
        )
        f = load_model(run)
        func = partial(
            characteristic, f, tol=run.tol, a=_value(run.a), **cfg.quadrature
        )
        rows = radius_sweep(
            func, run.radius_grid(), run.threads,
            f"T(r) of {f.label}" if verbosity else None,
        )
        write_output(render_rows(rows, run.format), run.out)


@app.command("wilson-counts")
def cmd_wilson_counts(
    config: Path = ConfigOption,
    model: str = ModelOption,
    param: list[str] = ParamOption,
    a: str = AOption,
    rmin: float = RminOption,
    rmax: float = RmaxOption,
    ppd: int = PpdOption,
    c: str = COption,
    out: Path = OutOption,
    fmt: str = FormatOption,
    threads: int = ThreadsOption,
    chains: bool = typer.Option(
        False, "--chains", help="Emit the chain report at rmax as JSON."
    ),
    verbosity: int = VerboseOption,
) -> None:
    """Wilson counting functions n_W, n~_W, N_W and N~_W."""
    configure_logging(verbosity)
    with exit_codes():
        cfg, run = load_run(
            "wilson-counts", config, verbosity,
            model=model, params=parse_params(param), a=a, r_min=rmin,
            r_max=rmax, points_per_decade=ppd, c=c, out=out, format=fmt,
            threads=threads,
        )
        f = load_model(run)
        value = _value(run.a)
        if chains:
            report = chain_report(a_point_stream(f, value), value, run.r_max, run.c)
            write_output(render_document(report), run.out)
            return
        rows = wilson_count_sweep(
            f, value, run.radius_grid(), run.c, run.threads,
            f"Wilson counts of {f.label}" if verbosity else None,
            **cfg.counting,
        )
        write_output(render_rows(rows, run.format), run.out)


@app.command("verify")
def cmd_verify(
    suite: str = typer.Argument(..., help=f"One of {', '.join(SUITES)}."),
    config: Path = ConfigOption,
    threads: int = ThreadsOption,
    verbosity: int = VerboseOption,
) -> None:
    """Run a verification suite; exit code 1 when a criterion fails."""
    configure_logging(verbosity)
    with exit_codes():
        cfg, run = load_run("verify", config, verbosity, threads=threads)
        criteria = run_suite(suite, cfg, run.threads)
    Console().print(criteria_table(suite, criteria))
    if not all(c.passed for c in criteria):
        raise typer.Exit(code=1)


@app.command("expand")
def cmd_expand(
    config: Path = ConfigOption,
    model: str = ModelOption,
    param: list[str] = ParamOption,
    anchor: str = typer.Option("0", "--anchor", help="Anchor a as re,im."),
    truncation: int = typer.Option(None, "-K", "--truncation", help="Last index K."),
    tau_index: int = typer.Option(
        None, "--tau", help="Expand tau_k(x; a) instead of a model."
    ),
    rmin: float = RminOption,
    rmax: float = RmaxOption,
    ppd: int = PpdOption,
    out: Path = OutOption,
    threads: int = ThreadsOption,
    verbosity: int = VerboseOption,
) -> None:
    """Wilson series coefficients with the growth gate and an error report."""
    configure_logging(verbosity)
    with exit_codes():
        cfg, run = load_run(
            "expand", config, verbosity,
            model=model, params=parse_params(param), r_min=rmin, r_max=rmax,
            points_per_decade=ppd, out=out, threads=threads,
        )
        a = parse_complex(anchor)
        if is_infinite(a):
            msg = "the anchor must be finite"
            raise ConfigError(msg)
        K = cfg.series.get("truncation", 64) if truncation is None else truncation
        if tau_index is not None:
            f, log_f, label = partial(tau, tau_index, a), None, f"tau_{tau_index}"
            grid = None
        else:
            m = load_model(run)
            f, log_f, label = m.value, m.log_value, m.label
            grid = run.radius_grid()
        series = expand_series(
            f, a, K, grid, log_f, cfg.series.get("gate_samples", 720),
            run.threads,
        )
        document = series.to_json()
        document["model"] = label
        document["reconstruction_error"] = reconstruction_error(series, f)
        write_output(render_document(document), run.out)


if __name__ == "__main__":
    app()
