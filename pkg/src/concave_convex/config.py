"""Sectioned key=value run configuration.

Sections: [grid], [potential], [nonlinearity], [solver], [run]. Every key is
checked against a schema; errors name the section, key and file line.
"""
from __future__ import annotations

import configparser
import hashlib
import os
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .energy import NonlinearitySpec, ProblemParams, detect_delta1
from .grid import GridSpec
from .schrodinger_op import PotentialSpec
from .thresholds import lambda_critical, lambda_critical_2d

__all__ = ["ConfigError", "RunConfig", "load_config", "ENV_WORKERS", "ENV_SEED"]

ENV_WORKERS = "CONCAVE_CONVEX_WORKERS"
ENV_SEED = "CONCAVE_CONVEX_SEED"

_SCHEMA = {
    "grid": {"dimension": int, "half_width": float, "nodes_per_axis": int},
    "potential": {"kind": str, "V0": float, "value": float, "base": float, "exponent": float, "alpha": float,
                  "file": str, "dimension": int},
    "nonlinearity": {"kind": str, "p": float, "alpha": int, "beta": float, "nu": float, "file": str, "q": float,
                     "lambda": float, "lambda_fraction": float},
    "solver": {"max_iter": int, "grad_tol": float, "cert_tol": float, "probes": int, "box": str, "k": int,
               "strategies": str},
    "run": {"output_dir": str, "seed": int, "workers": int, "sweep_points": int, "rho_grid": str,
            "sphere_samples": int},
}
_REQUIRED = {"grid": ("dimension", "half_width", "nodes_per_axis"), "potential": ("kind",),
             "nonlinearity": ("kind", "q")}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    params: ProblemParams
    path: Path
    digest: str
    max_iter: int = 20000
    grad_tol: float = 1e-10
    cert_tol: float = 1e-6
    probes: int = 200
    box: str = "cone"
    k: int = 4
    strategies: tuple = ("eigen_seeds", "symmetry", "deflation", "odd_pair")
    output_dir: Path = Path("out")  # resolved against the config file's directory
    seed: int = 0
    workers: int = 1
    sweep_points: int = 8
    rho_grid: tuple = field(default_factory=lambda: tuple(np.logspace(-4, -1, 13).tolist()))
    sphere_samples: int = 256
    lambda_crit: float = float("nan")

    @property
    def header(self) -> str:
        return f"config_sha256={self.digest} seed={self.seed}"


def _line_of(text: str, section: str, key: str | None = None) -> int:
    lines = text.splitlines()
    in_sec = False
    for i, line in enumerate(lines, 1):
        s = line.strip()
        if s.startswith("["):
            in_sec = s.strip("[] ").lower() == section.lower()
            if in_sec and key is None:
                return i
            continue
        if in_sec and key is not None and re.match(rf"{re.escape(key)}\s*[=:]", s, flags=re.IGNORECASE):
            return i
    return 0


def load_config(path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    text = path.read_text(encoding="utf-8")
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None

    def err(section, key, msg):
        line = _line_of(text, section, key)
        where = f"[{section}] {key}" if key else f"[{section}]"
        return ConfigError(f"{path}:{line}: {where}: {msg}")

    values: dict[str, dict] = {}
    for section in cp.sections():
        if section not in _SCHEMA:
            raise err(section, None, "unknown section")
        values[section] = {}
        for key, raw in cp.items(section):
            if key not in _SCHEMA[section]:
                raise err(section, key, "unknown key")
            typ = _SCHEMA[section][key]
            try:
                values[section][key] = typ(raw) if typ is not int else int(raw, 10)
            except ValueError:
                raise err(section, key, f"expected {typ.__name__}, got {raw!r}") from None
    for section, keys in _REQUIRED.items():
        if section not in values:
            raise err(section, None, "missing section")
        for key in keys:
            if key not in values[section]:
                raise err(section, key, "missing required key")

    g, pot, nl = values["grid"], values["potential"], values["nonlinearity"]
    try:
        grid = GridSpec(g["dimension"], g["half_width"], g["nodes_per_axis"])
    except ValueError as exc:
        raise err("grid", None, str(exc)) from None
    if "dimension" in pot and pot["dimension"] != grid.dimension:
        raise err("potential", "dimension",
                  f"inconsistent N: potential declares {pot['dimension']}, grid has {grid.dimension}")

    try:
        potential = _potential(pot, path.parent, grid)
    except (ValueError, OSError) as exc:
        raise err("potential", "kind", str(exc)) from None
    try:
        nonlin = _nonlinearity(nl, path.parent)
    except (ValueError, OSError) as exc:
        raise err("nonlinearity", "kind", str(exc)) from None

    q = nl["q"]
    if not 1 < q < 2:
        raise err("nonlinearity", "q", f"need 1 < q < 2, got {q}")
    if nonlin.kind == "power":
        lam_crit = lambda_critical(nonlin.p, q, potential.V0)
    else:
        try:
            lam_crit = lambda_critical_2d(nonlin.nu, q, potential.V0, detect_delta1(nonlin))
        except ValueError as exc:
            raise err("nonlinearity", "nu", str(exc)) from None
    if ("lambda" in nl) == ("lambda_fraction" in nl):
        raise err("nonlinearity", "lambda", "give exactly one of lambda or lambda_fraction")
    lam = nl["lambda"] if "lambda" in nl else nl["lambda_fraction"] * lam_crit
    if not lam > 0:
        raise err("nonlinearity", "lambda", f"lambda must be positive, got {lam}")
    params = ProblemParams(grid, potential, nonlin, q, lam)

    digest = hashlib.sha256(_canonical(values).encode()).hexdigest()[:16]
    cfg = RunConfig(params=params, path=path, digest=digest, lambda_crit=lam_crit, output_dir=path.parent / "out")
    s, r = values.get("solver", {}), values.get("run", {})
    for key in ("max_iter", "grad_tol", "cert_tol", "probes", "k"):
        if key in s:
            setattr(cfg, key, s[key])
    if "box" in s:
        if s["box"] not in ("cone", "symmetric"):
            raise err("solver", "box", f"box must be cone or symmetric, got {s['box']!r}")
        cfg.box = s["box"]
    if "strategies" in s:
        cfg.strategies = tuple(x.strip() for x in s["strategies"].split(",") if x.strip())
    if "output_dir" in r:
        out = Path(r["output_dir"])
        cfg.output_dir = out if out.is_absolute() else path.parent / out
    for key in ("seed", "workers", "sweep_points", "sphere_samples"):
        if key in r:
            setattr(cfg, key, r[key])
    if "rho_grid" in r:
        try:
            cfg.rho_grid = tuple(float(x) for x in r["rho_grid"].split(","))
        except ValueError:
            raise err("run", "rho_grid", "expected comma-separated floats") from None
    if ENV_SEED in os.environ:
        cfg.seed = int(os.environ[ENV_SEED])
    if ENV_WORKERS in os.environ:
        cfg.workers = int(os.environ[ENV_WORKERS])
    if cfg.workers < 1:
        raise err("run", "workers", "workers must be >= 1")
    if cfg.sweep_points < 1:
        raise err("run", "sweep_points", "sweep_points must be >= 1")
    return cfg


def _canonical(values: dict) -> str:
    return "\n".join(f"{sec}.{key}={values[sec][key]!r}" for sec in sorted(values) for key in sorted(values[sec]))


def _potential(pot: dict, base: Path, grid: GridSpec) -> PotentialSpec:
    kind = pot["kind"]
    if kind == "constant":
        value = pot.get("value", 1.0)
        return PotentialSpec.constant(value, pot.get("V0", value))
    if kind == "radial_power":
        b = pot.get("base", 1.0)
        if "exponent" not in pot:
            raise ValueError("radial_power needs exponent")
        return PotentialSpec.radial_power(pot["exponent"], base=b, V0=pot.get("V0", b))
    if kind == "anisotropic_remark":
        if "alpha" not in pot:
            raise ValueError("anisotropic_remark needs alpha")
        return PotentialSpec.anisotropic(pot["alpha"], V0=pot.get("V0", 1.0))
    if kind == "tabulated":
        if "file" not in pot or "V0" not in pot:
            raise ValueError("tabulated potential needs file and V0")
        vals = np.loadtxt(base / pot["file"], dtype=float, ndmin=1)
        if vals.size != grid.nodes_per_axis**grid.dimension:
            raise ValueError(f"tabulated potential has {vals.size} values, grid has "
                             f"{grid.nodes_per_axis ** grid.dimension} nodes (inconsistent N or m)")
        return PotentialSpec.tabulated(vals, pot["V0"])
    raise ValueError(f"unknown potential kind {kind!r}")


def _nonlinearity(nl: dict, base: Path) -> NonlinearitySpec:
    kind = nl["kind"]
    if kind == "power":
        if "p" not in nl:
            raise ValueError("power nonlinearity needs p")
        return NonlinearitySpec.power(nl["p"], nl.get("nu"))
    if kind == "odd_exp":
        for key in ("alpha", "nu"):
            if key not in nl:
                raise ValueError(f"odd_exp needs {key}")
        return NonlinearitySpec.odd_exp(nl["alpha"], nl.get("beta", 0.0), nl["nu"])
    if kind == "tabulated_odd":
        if "file" not in nl or "nu" not in nl:
            raise ValueError("tabulated_odd needs file and nu")
        data = np.loadtxt(base / nl["file"], dtype=float, delimiter=",", ndmin=2)
        return NonlinearitySpec.tabulated_odd(data[:, 0], data[:, 1], nl["nu"])
    raise ValueError(f"unknown nonlinearity kind {kind!r}")
