import math

import pytest

from wilsonnev.config import (
    Configuration,
    RunConfig,
    create_standard_cfg_file,
    log_grid,
    parse_complex,
)
from wilsonnev.errors import ConfigError
from wilsonnev.export import format_number, render_rows
from wilsonnev.nevanlinna import CharacteristicRow


def test_package_configuration(cfg):
    assert cfg.keys == ["run", "quadrature", "counting", "series", "hyperbolic"]
    assert cfg.quadrature["initial_samples"] == 256
    assert cfg.counting["tie_samples"] == 512
    assert cfg.series["truncation"] == 64
    assert cfg.run["model"] == "exp"
    assert "quadrature:" in repr(cfg)


def test_standard_file_is_written(tmp_path):
    path = create_standard_cfg_file(tmp_path)
    assert path == tmp_path / "cfg.yaml"
    cfg = Configuration(file=path)
    assert cfg.hyperbolic["matching_abscissa"] == 8.0


def test_search_finds_local_file(tmp_path):
    create_standard_cfg_file(tmp_path)
    cfg = Configuration(folder=tmp_path)
    assert cfg.file == (tmp_path / "cfg.yaml").resolve()


def test_save_round_trip(tmp_path):
    cfg = Configuration(file=create_standard_cfg_file(tmp_path))
    cfg.series["truncation"] = 12
    cfg.save()
    assert Configuration(file=cfg.file).series["truncation"] == 12


@pytest.mark.parametrize(
    "text",
    ["run: [1, 2\n", "just a string\n", "run: 3\n", ""],
)
def test_broken_files(tmp_path, text):
    path = tmp_path / "cfg.yaml"
    path.write_text(text)
    with pytest.raises(ConfigError):
        Configuration(file=path)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        Configuration(file=tmp_path / "absent.yaml")


@pytest.mark.parametrize(
    ("text", "expected"),
    [
        ("0,1", 1j),
        ("2.5, -1", 2.5 - 1j),
        ("1+2i", 1 + 2j),
        ("3", 3 + 0j),
        (0.5, 0.5 + 0j),
        (1j, 1j),
    ],
)
def test_parse_complex(text, expected):
    assert parse_complex(text) == expected


def test_parse_complex_infinity_and_errors():
    assert math.isinf(parse_complex("inf").real)
    for text in ("abc", "1,2,3", "x,1"):
        with pytest.raises(ConfigError):
            parse_complex(text)


def test_run_config_from_sources(cfg):
    run = RunConfig.from_sources("characteristic", cfg, r_min=1.0, r_max=1e3)
    assert run.a == 0
    assert run.c == 1j
    assert run.out is None
    assert run.params == {}
    assert RunConfig.from_sources("characteristic", cfg, tol=None).tol == 1e-8
    with pytest.raises(ConfigError):
        RunConfig.from_sources("characteristic", cfg, radius=3)
    with pytest.raises(ConfigError):
        RunConfig.from_sources("characteristic", cfg, r_min="many")


@pytest.mark.parametrize(
    "overrides",
    [
        {"r_min": 1e3, "r_max": 1e2},
        {"r_min": 0.0},
        {"points_per_decade": 4},
        {"tol": 0.0},
        {"format": "xml"},
        {"threads": 0},
        {"c": "0,0"},
    ],
)
def test_run_config_invariants(cfg, overrides):
    with pytest.raises(ConfigError):
        RunConfig.from_sources("characteristic", cfg, **overrides)


def test_radius_grid():
    grid = RunConfig("characteristic", r_min=1.0, r_max=1e3, points_per_decade=5)
    radii = grid.radius_grid()
    assert len(radii) == 16
    assert radii[0] == 1.0
    assert radii[-1] == 1e3
    assert radii[5] == pytest.approx(10.0)


def test_log_grid_keeps_both_ends():
    assert log_grid(10.0, 11.0, 5) == [10.0, 11.0]
    radii = log_grid(1e2, 1e6, 5)
    assert len(radii) == 21
    assert radii == sorted(radii)
    assert (radii[0], radii[-1]) == (1e2, 1e6)


def test_export_helpers():
    assert format_number(3) == "3"
    assert format_number(0.1) == "0.10000000000000001"
    row = CharacteristicRow(10.0, 1.0, 0.0, 1.0, 1e-12, 0)
    assert render_rows([row]).splitlines()[0] == "r,m,N,T,quadrature_error"
    with pytest.raises(ConfigError):
        render_rows([row], "xml")
