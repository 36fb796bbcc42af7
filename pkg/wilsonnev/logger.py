import importlib
import logging
import pkgutil
from pathlib import Path

from rich.console import Console
from rich.logging import RichHandler
from rich.progress import (
    BarColumn,
    MofNCompleteColumn,
    Progress,
    SpinnerColumn,
    TextColumn,
    TimeElapsedColumn,
    TimeRemainingColumn,
)


def discover_package_modules() -> list[str]:
    """Dynamically discovers all modules within the current package."""
    package_name = Path(__file__).parent.name
    package = importlib.import_module(package_name)
    package_path = Path(package.__file__).parent
    return [package_name] + [
        module_name
        for _, module_name, _ in pkgutil.walk_packages(
            [str(package_path)], prefix=f"{package_name}."
        )
    ]


def configure_logging(
    verbosity: int,
    log_to_file: bool = False,
    log_file: str = "wilsonnev.log",
) -> None:
    """
    Configures logging globally, keeping numpy and scipy quiet.

    Console records go to stderr so that rows written to stdout stay
    machine readable.
    """
    level = logging.WARNING

    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG

    handlers: list[logging.Handler] = [RichHandler(console=Console(stderr=True))]

    if log_to_file:
        file_handler = logging.FileHandler(log_file)
        file_handler.setLevel(level)
        file_handler.setFormatter(
            logging.Formatter(
                "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
            )
        )
        handlers.append(file_handler)

    # Root logger stays at WARNING
    logging.basicConfig(
        level=logging.WARNING,
        format="%(message)s",
        datefmt="[%X]",
        handlers=handlers,
        force=True,
    )

    for package in discover_package_modules():
        logging.getLogger(package).setLevel(level)


def get_logger(name: str) -> logging.Logger:
    """Returns a package logger; handlers are set by configure_logging."""
    return logging.getLogger(name)


def get_progress() -> Progress:
    """Progress bar used for radius sweeps and verification suites."""
    return Progress(
        SpinnerColumn(),
        TextColumn("{task.description:<30}"),
        BarColumn(),
        TextColumn(" | Completed: "),
        MofNCompleteColumn(),
        TextColumn(" | Percent: "),
        TextColumn("[progress.percentage]{task.percentage:>3.0f}%"),
        TextColumn(" | Time Elapsed: "),
        TimeElapsedColumn(),
        TextColumn(" | ETA: "),
        TimeRemainingColumn(),
        expand=True,
        console=Console(stderr=True),
    )
