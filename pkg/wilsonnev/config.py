import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import ruamel.yaml

from wilsonnev.errors import ConfigError
from wilsonnev.logger import get_logger

log = get_logger(__name__)

CONFIG_NAME = "cfg.yaml"
FORMATS = ("csv", "json")


class Configuration:
    """
    Configuration class providing the numerical meta-parameters of the
    different computation stages.

    Every top-level section of the yaml file becomes an attribute holding a
    dictionary, e.g. "run", "quadrature", "counting", "series" and
    "hyperbolic". Library functions take the entries of a section as
    keyword arguments, so a section can be forwarded with
    ``**cfg.quadrature``.
    """

    def __init__(
        self,
        folder: str | Path | None = None,
        file: str | Path | None = None,
        verbose: int = 0,
    ) -> None:
        """
        Load a configuration file, searching for one when none is given.

        Parameters
        ----------
        folder : str or Path, optional
            Folder where the search for a configuration file starts.
        file : str or Path, optional
            Explicit configuration file; skips the search.
        verbose : int
            Verbosity level; the loaded path is logged when >= 1.
        """
        if folder is None:
            folder = Path(__file__).parent
        self.file = Path(file) if file else self.find_config(folder)
        self.verbose = verbose

        self.run: dict = {}
        self.quadrature: dict = {}
        self.counting: dict = {}
        self.series: dict = {}
        self.hyperbolic: dict = {}

        if not self.file.is_file():
            msg = f"config file {self.file} does not exist"
            raise ConfigError(msg)

        if self.verbose >= 1:
            msg = f"Config file from: {self.file.resolve()}."
            log.info(msg)

        self.yaml = ruamel.yaml.YAML()
        try:
            with self.file.open() as f:
                self.cfg = self.yaml.load(f)
        except ruamel.yaml.YAMLError as exc:
            msg = f"config file {self.file} is not valid yaml: {exc}"
            raise ConfigError(msg) from exc
        if not isinstance(self.cfg, dict):
            msg = f"config file {self.file} has no sections"
            raise ConfigError(msg)

        self.dicts = list(self.cfg.keys())
        for section in self.cfg:
            if not isinstance(self.cfg[section], dict):
                msg = f"config section {section!r} is not a mapping"
                raise ConfigError(msg)
            setattr(self, section, dict(self.cfg[section]))

    def __repr__(self) -> str:
        rep_list = []
        for section in self.dicts:
            rep_list.append(f"{section}:")
            rep_list.extend(
                f"  {k: <18}:  {v}" for k, v in getattr(self, section).items()
            )
        return "\n".join(rep_list)

    @staticmethod
    def find_config(folder: str | Path) -> Path:
        """
        Search for a configuration file.

        First look in the given folder, then in its parent and last in the
        package directory. If none is available, write the standard file
        (see `create_standard_cfg_file`) into the given folder.

        Parameters
        ----------
        folder : str or Path
            Folder where to search first.

        Returns
        -------
        Path
            Path of the configuration file that will be loaded.
        """
        folder = Path(folder).resolve()
        search_folders = [folder, folder.parent, Path(__file__).parent]
        for search_folder in search_folders:
            candidate = search_folder / CONFIG_NAME
            if candidate.is_file():
                return candidate
        return create_standard_cfg_file(folder)

    @property
    def keys(self) -> list:
        """Sections of the configuration."""
        return self.dicts

    def save(self) -> None:
        """Write the current sections back to the loading path."""
        for section in self.cfg:
            self.cfg[section] = getattr(self, section)
        with self.file.open("w") as f:
            self.yaml.dump(self.cfg, f)


def create_standard_cfg_file(folder: str | Path = ".") -> Path:
    """
    Create the standard configuration file when none could be found.

    Parameters
    ----------
    folder : str or Path
        Folder where the generated file is saved.

    Returns
    -------
    Path
        Path of the written file.
    """
    source = Path(__file__).parent / CONFIG_NAME
    yaml = ruamel.yaml.YAML()
    with source.open() as f:
        code = yaml.load(f)
    file = Path(folder) / CONFIG_NAME
    with file.open("w") as f:
        yaml.dump(code, f)
    msg = f"Wrote standard configuration to {file}."
    log.info(msg)
    return file


def log_grid(
    r_min: float,
    r_max: float,
    points_per_decade: int,
) -> list[float]:
    """
    Log-spaced radii from r_min to r_max with both ends exact.

    The grid has round(decades * points_per_decade) + 1 points, at least 2.
    """
    decades = math.log10(r_max / r_min)
    count = max(2, round(decades * points_per_decade) + 1)
    radii = r_min * np.logspace(0.0, decades, count)
    radii[0], radii[-1] = r_min, r_max
    return [float(r) for r in radii]


def parse_complex(text: str | float | complex) -> complex:
    """
    Parse a complex value written as ``"re,im"``, a plain number or
    ``"inf"``.

    Raises
    ------
    ConfigError
        If the text is not of one of these forms.
    """
    if isinstance(text, int | float | complex):
        return complex(text)
    token = str(text).strip().lower()
    if token in ("inf", "infinity", "oo"):
        return complex(math.inf, 0.0)
    parts = token.split(",")
    try:
        if len(parts) == 1:
            return complex(parts[0].replace("i", "j"))
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError as exc:
        msg = f"cannot parse complex value {text!r}"
        raise ConfigError(msg) from exc
    msg = f"cannot parse complex value {text!r}, expected re,im"
    raise ConfigError(msg)


@dataclass(frozen=True)
class RunConfig:
    """Validated settings of a single command-line run."""

    command: str
    model: str = "exp"
    params: dict[str, Any] = field(default_factory=dict)
    a: complex = 0j
    r_min: float = 1e2
    r_max: float = 1e6
    points_per_decade: int = 25
    c: complex = 1j
    tol: float = 1e-8
    out: Path | None = None
    format: str = "csv"
    threads: int = 1

    def __post_init__(self) -> None:
        """Check the invariants of a run."""
        if not (0 < self.r_min < self.r_max):
            msg = f"need 0 < r_min < r_max, got {self.r_min}, {self.r_max}"
            raise ConfigError(msg)
        if self.points_per_decade < 5:
            msg = (
                "points_per_decade must be at least 5, "
                f"got {self.points_per_decade}"
            )
            raise ConfigError(msg)
        if not self.tol > 0:
            msg = f"tolerance must be positive, got {self.tol}"
            raise ConfigError(msg)
        if self.format not in FORMATS:
            msg = f"format must be one of {FORMATS}, got {self.format!r}"
            raise ConfigError(msg)
        if self.threads < 1:
            msg = f"threads must be at least 1, got {self.threads}"
            raise ConfigError(msg)
        if self.c == 0:
            msg = "lattice shift c must be nonzero"
            raise ConfigError(msg)

    @classmethod
    def from_sources(
        cls,
        command: str,
        cfg: Configuration,
        **overrides: Any,
    ) -> "RunConfig":
        """
        Merge the ``run`` section of a configuration with overrides.

        Overrides that are ``None`` keep the configured value.

        Raises
        ------
        ConfigError
            On unknown keys or values of the wrong type.
        """
        settings = dict(cfg.run)
        settings.update({k: v for k, v in overrides.items() if v is not None})
        unknown = set(settings) - {
            f for f in cls.__dataclass_fields__ if f != "command"
        }
        if unknown:
            msg = f"unknown run settings: {sorted(unknown)}"
            raise ConfigError(msg)
        try:
            if "a" in settings:
                settings["a"] = parse_complex(settings["a"])
            if "c" in settings:
                settings["c"] = parse_complex(settings["c"])
            for key in ("r_min", "r_max", "tol"):
                if key in settings:
                    settings[key] = float(settings[key])
            for key in ("points_per_decade", "threads"):
                if key in settings:
                    settings[key] = int(settings[key])
            if settings.get("out") is not None:
                settings["out"] = Path(settings["out"])
            settings["params"] = dict(settings.get("params") or {})
        except (TypeError, ValueError) as exc:
            msg = f"invalid run setting: {exc}"
            raise ConfigError(msg) from exc
        return cls(command=command, **settings)

    def radius_grid(self) -> list[float]:
        """Log-spaced radii from r_min to r_max, ends included."""
        return log_grid(self.r_min, self.r_max, self.points_per_decade)
