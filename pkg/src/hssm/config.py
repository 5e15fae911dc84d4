"""Run configuration: a sectioned key = value file (INI syntax).

Sections and keys are documented in the README.  Values parse strictly; any
unknown family name, missing file, or inconsistent sampler plan raises
:class:`ConfigError` with the offending key path.
"""

from __future__ import annotations

import configparser
import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .cluster_counts import BaseMeasure, GroupSizes, HssmSpec
from .errors import ConfigError, ParamError
from .gibbs import Dataset, NigHyper
from .partitions import EppfSpec


def _get(cfg, section, key, conv, default=None, required=False):
    if not cfg.has_option(section, key):
        if required:
            raise ConfigError(f"missing required key [{section}] {key}")
        return default
    raw = cfg.get(section, key)
    try:
        return conv(raw)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad value for [{section}] {key}: {raw!r} ({exc})") from None


def _parse_family(cfg, section, prefix) -> EppfSpec:
    fam = _get(cfg, section, f"{prefix}_family", str, required=True).strip().lower()
    try:
        if fam in ("pitman_yor", "py", "dirichlet", "dp"):
            sigma = _get(cfg, section, f"{prefix}_sigma", float, default=0.0)
            theta = _get(cfg, section, f"{prefix}_theta", float, required=True)
            return EppfSpec.pitman_yor(sigma, theta)
        if fam in ("gnedin", "gn"):
            gamma = _get(cfg, section, f"{prefix}_gamma", float, required=True)
            zeta = _get(cfg, section, f"{prefix}_zeta", float, required=True)
            return EppfSpec.gnedin(gamma, zeta)
        if fam == "mfm":
            sigma = _get(cfg, section, f"{prefix}_sigma", float, required=True)
            rho_raw = _get(cfg, section, f"{prefix}_rho", str, required=True)
            rho = [float(x) for x in rho_raw.split()]
            return EppfSpec.mfm(sigma, rho)
    except ParamError as exc:
        raise ConfigError(f"invalid [{section}] {prefix} family parameters: {exc}") from None
    raise ConfigError(f"unknown family {fam!r} for [{section}] {prefix}_family")


@dataclass
class RunConfig:
    """Validated configuration for one CLI invocation."""

    model: HssmSpec
    sizes: Optional[GroupSizes]
    data_path: Optional[Path]
    preset: Optional[str]
    preset_seed: int
    sweeps: int
    burn_in: int
    thin: int
    seed: int
    chains: int
    runs: int
    init: str
    hyper: NigHyper
    out_dir: Path
    reps: int
    n_grid: tuple
    asym_n_max: int
    predict_grid: np.ndarray = field(repr=False, default=None)

    def dataset(self) -> Dataset:
        """Load or generate the observations for fit/predict/diagnose."""
        from . import presets

        if self.data_path is not None:
            return load_csv_dataset(self.data_path)
        if self.preset is not None:
            return presets.generate(self.preset, self.preset_seed).data
        raise ConfigError("no data configured: set [data] path or [data] preset")


def load_csv_dataset(path: Path) -> Dataset:
    """CSV with header ``group_id,y``; groups keyed by sorted distinct id."""
    if not path.exists():
        raise ConfigError(f"data file not found: {path}")
    by_group: dict = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames[:2]] != ["group_id", "y"]:
            raise ConfigError(f"{path}: expected header 'group_id,y'")
        for row in reader:
            try:
                gid = int(row["group_id"])
                val = float(row["y"])
            except (TypeError, ValueError):
                raise ConfigError(f"{path}: bad row {row!r}") from None
            by_group.setdefault(gid, []).append(val)
    if not by_group:
        raise ConfigError(f"{path}: no observations")
    return Dataset(tuple(np.asarray(by_group[g]) for g in sorted(by_group)))


def load_config(path: Path, seed_override: Optional[int] = None,
                out_override: Optional[str] = None,
                chains_override: Optional[int] = None) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    cfg = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cfg.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None

    if not cfg.has_section("model"):
        raise ConfigError("missing required section [model]")
    top = _parse_family(cfg, "model", "top")
    bottom = _parse_family(cfg, "model", "bottom")
    base_kind = (_get(cfg, "model", "base", str, default="diffuse") or "diffuse").strip().lower()
    if base_kind == "diffuse":
        base = BaseMeasure.diffuse()
    elif base_kind == "spike_slab":
        a = _get(cfg, "model", "spike_weight", float, required=True)
        try:
            base = BaseMeasure.spike_slab(a)
        except ParamError as exc:
            raise ConfigError(f"invalid [model] spike_weight: {exc}") from None
    else:
        raise ConfigError(f"unknown [model] base {base_kind!r}")
    model = HssmSpec(top, bottom, base)

    sizes = None
    if cfg.has_option("groups", "sizes"):
        raw = cfg.get("groups", "sizes").split()
        try:
            sizes = GroupSizes(tuple(int(x) for x in raw))
        except (ValueError, Exception) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"bad [groups] sizes: {exc}") from None

    data_path = _get(cfg, "data", "path", lambda s: Path(s), default=None)
    if data_path is not None and not data_path.is_absolute():
        data_path = path.parent / data_path
    preset = _get(cfg, "data", "preset", str, default=None)
    preset_seed = _get(cfg, "data", "preset_seed", int, default=1)

    sweeps = _get(cfg, "sampler", "sweeps", int, default=6000)
    burn_in = _get(cfg, "sampler", "burn_in", int, default=1000)
    thin = _get(cfg, "sampler", "thin", int, default=1)
    seed = _get(cfg, "sampler", "seed", int, default=0)
    chains = _get(cfg, "sampler", "chains", int, default=1)
    runs = _get(cfg, "sampler", "runs", int, default=1)
    init = (_get(cfg, "sampler", "init", str, default="sequential") or "sequential").strip()
    if init not in ("sequential", "single"):
        raise ConfigError(f"bad [sampler] init {init!r}: use sequential or single")
    if not sweeps > burn_in >= 0:
        raise ConfigError("need [sampler] sweeps > burn_in >= 0")
    if thin < 1 or chains < 1 or runs < 1:
        raise ConfigError("[sampler] thin, chains and runs must be >= 1")

    hyper_kwargs = {}
    for key in ("m0", "s2", "a", "b"):
        v = _get(cfg, "hyper", key, float, default=None)
        if v is not None:
            hyper_kwargs[key] = v
    try:
        hyper = NigHyper(**hyper_kwargs)
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"bad [hyper] section: {exc}") from None

    out_dir = Path(out_override) if out_override else Path(
        _get(cfg, "output", "dir", str, default="out"))

    reps = _get(cfg, "simulate", "reps", int, default=10000)
    if reps < 1:
        raise ConfigError("[simulate] reps must be >= 1")

    start = _get(cfg, "prior", "n_grid_start", int, default=2)
    stop = _get(cfg, "prior", "n_grid_stop", int, default=100)
    step = _get(cfg, "prior", "n_grid_step", int, default=2)
    if start < 1 or stop < start or step < 1:
        raise ConfigError("bad [prior] n grid")
    n_grid = tuple(range(start, stop + 1, step))

    asym_n_max = _get(cfg, "asymptotic", "n_max", int, default=500)
    if asym_n_max < 3:
        raise ConfigError("[asymptotic] n_max must be >= 3")

    g0 = _get(cfg, "predict", "grid_start", float, default=-12.0)
    g1 = _get(cfg, "predict", "grid_stop", float, default=12.0)
    gs = _get(cfg, "predict", "grid_step", float, default=0.01)
    if gs <= 0 or g1 <= g0:
        raise ConfigError("bad [predict] grid")
    predict_grid = np.arange(g0, g1 + 0.5 * gs, gs)

    if seed_override is not None:
        seed = seed_override
    if chains_override is not None:
        chains = chains_override
        if chains < 1:
            raise ConfigError("--chains must be >= 1")

    return RunConfig(
        model=model, sizes=sizes, data_path=data_path, preset=preset,
        preset_seed=preset_seed, sweeps=sweeps, burn_in=burn_in, thin=thin,
        seed=seed, chains=chains, runs=runs, init=init, hyper=hyper,
        out_dir=out_dir, reps=reps, n_grid=n_grid, asym_n_max=asym_n_max,
        predict_grid=predict_grid,
    )
