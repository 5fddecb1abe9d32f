"""Experiment configuration files (YAML).

Mode numbers in configs are 1-based waveguide labels. Unknown keys are
rejected at every level.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

from ..coupling import paper_preset
from ..model import Fidelity, SpecError, SystemSpec, validate

PRESET_TOKEN = "paper-preset"
STATE_CLASSES = ("bright", "normal", "dark", "custom-moments")

_TOP_KEYS = {"spec", "fidelity", "state", "nbar", "grid", "correlations", "normalize_peak", "outputs", "name"}
_SPEC_KEYS = {"g", "n_bath", "omega", "j_coupling", "delta", "fidelity"}
_STATE_KEYS = {
    "bright": {"class", "R"},
    "normal": {"class", "occupations"},
    "dark": {"class", "R", "pair"},
    "custom-moments": {"class", "corr", "corr_imag", "mean", "mean_imag"},
}
_GRID_KEYS = {"t_max", "samples"}


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


@dataclass(frozen=True)
class StateConfig:
    kind: str
    r: int = 0
    occupations: tuple = ()
    pair: tuple = (1, 3)
    corr: tuple = ()
    mean: tuple = ()


@dataclass(frozen=True)
class ExperimentConfig:
    spec: SystemSpec
    state: StateConfig
    t_max: float
    samples: int
    nbar: float = 0.0
    correlations: tuple = ()
    normalize_peak: bool = False
    outputs: str = "out"
    name: str = "experiment"
    spec_source: str = PRESET_TOKEN
    raw: dict = field(default_factory=dict, compare=False)

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.samples)

    @property
    def config_hash(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def canonical(self) -> dict:
        """Fully resolved configuration, used for hashing and reports."""
        st = self.state
        state = {"class": st.kind}
        if st.kind in ("bright", "dark"):
            state["R"] = st.r
        if st.kind == "dark":
            state["pair"] = list(st.pair)
        if st.kind == "normal":
            state["occupations"] = list(st.occupations)
        if st.kind == "custom-moments":
            state["corr"] = [[[z.real, z.imag] for z in row] for row in st.corr]
            state["mean"] = [[z.real, z.imag] for z in st.mean]
        return {
            "spec": self.spec.to_dict(),
            "state": state,
            "nbar": self.nbar,
            "grid": {"t_max": self.t_max, "samples": self.samples},
            "correlations": [list(p) for p in self.correlations],
            "normalize_peak": self.normalize_peak,
        }

    def with_overrides(self, fidelity=None, nbar=None, outputs=None) -> "ExperimentConfig":
        cfg = self
        if fidelity is not None:
            cfg = replace(cfg, spec=_with_fidelity(cfg, fidelity))
        if nbar is not None:
            if not nbar >= 0:
                raise ConfigError("nbar must be >= 0")
            cfg = replace(cfg, nbar=float(nbar))
        if outputs is not None:
            cfg = replace(cfg, outputs=str(outputs))
        return cfg


def _with_fidelity(cfg, fidelity) -> SystemSpec:
    fidelity = Fidelity(fidelity)
    # IDEAL discards the unwanted couplings, so rebuild from the source.
    if isinstance(cfg.raw.get("spec"), dict):
        return _parse_spec(cfg.raw["spec"], fidelity)
    if cfg.spec_source == PRESET_TOKEN:
        return paper_preset(fidelity, cfg.spec.n_bath)
    return cfg.spec.with_fidelity(fidelity)


def _check_keys(mapping, allowed, where):
    if not isinstance(mapping, dict):
        raise ConfigError(f"{where} must be a mapping")
    unknown = sorted(set(mapping) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")


def _number(value, name, kind=float):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name} must be a number")
    if kind is int and value != int(value):
        raise ConfigError(f"{name} must be an integer")
    return kind(value)


def _parse_spec(raw, fidelity_override=None) -> SystemSpec:
    if raw == PRESET_TOKEN:
        spec = paper_preset()
    elif isinstance(raw, dict):
        _check_keys(raw, _SPEC_KEYS, "spec")
        if "g" not in raw or "n_bath" not in raw:
            raise ConfigError("spec needs at least g and n_bath")
        try:
            spec = SystemSpec(
                g=raw["g"],
                n_bath=_number(raw["n_bath"], "spec.n_bath", int),
                omega=raw.get("omega"),
                j_coupling=raw.get("j_coupling"),
                delta=_number(raw.get("delta", 1.0), "spec.delta"),
                fidelity=raw.get("fidelity", "full"),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"spec: {exc}") from exc
    else:
        raise ConfigError(f"spec must be '{PRESET_TOKEN}' or a mapping")
    if fidelity_override is not None:
        spec = spec.with_fidelity(fidelity_override)
    try:
        validate(spec)
    except SpecError as exc:
        raise ConfigError(f"spec: {exc}") from exc
    return spec


def _mode(value, n, name):
    k = _number(value, name, int)
    if not 1 <= k <= n:
        raise ConfigError(f"{name} = {k} is outside waveguides 1..{n}")
    return k


def _complex_matrix(re, im, shape, name):
    try:
        arr = np.array(re, dtype=float)
        if im is not None:
            arr = arr + 1j * np.array(im, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: {exc}") from exc
    if arr.shape != shape:
        raise ConfigError(f"{name} must have shape {shape}, got {arr.shape}")
    return arr.astype(complex)


def _parse_state(raw, spec: SystemSpec) -> StateConfig:
    if not isinstance(raw, dict) or "class" not in raw:
        raise ConfigError("state.class is required")
    kind = raw["class"]
    if kind not in STATE_CLASSES:
        raise ConfigError(f"state.class must be one of {', '.join(STATE_CLASSES)}")
    _check_keys(raw, _STATE_KEYS[kind], "state")
    n = spec.n_system
    if kind in ("bright", "dark"):
        r = _number(raw.get("R", 0), "state.R", int)
        if r < 0:
            raise ConfigError("state.R must be >= 0")
        if kind == "bright":
            return StateConfig(kind, r=r)
        pair = tuple(raw.get("pair", (1, 3)))
        if len(pair) != 2:
            raise ConfigError("state.pair must list two waveguides")
        pair = tuple(_mode(p, n, "state.pair") for p in pair)
        if pair[0] == pair[1]:
            raise ConfigError("state.pair must name two different waveguides")
        return StateConfig(kind, r=r, pair=pair)
    if kind == "normal":
        occ = raw.get("occupations")
        if not isinstance(occ, list) or len(occ) != n:
            raise ConfigError(f"state.occupations must list {n} occupations")
        occ = tuple(_number(x, "state.occupations", int) for x in occ)
        if min(occ) < 0:
            raise ConfigError("state.occupations must be >= 0")
        return StateConfig(kind, occupations=occ)
    if "corr" not in raw:
        raise ConfigError("state.corr is required for custom-moments")
    corr = _complex_matrix(raw["corr"], raw.get("corr_imag"), (n, n), "state.corr")
    mean = _complex_matrix(raw.get("mean", [0.0] * n), raw.get("mean_imag"), (n,), "state.mean")
    return StateConfig(kind, corr=tuple(map(tuple, corr)), mean=tuple(mean))


def parse_config(raw, name: str = "experiment") -> ExperimentConfig:
    """Validate a configuration mapping."""
    _check_keys(raw, _TOP_KEYS, "config")
    if "spec" not in raw:
        raise ConfigError("spec is required")
    if "state" not in raw:
        raise ConfigError("state is required")
    if "grid" not in raw:
        raise ConfigError("grid is required")
    fidelity = raw.get("fidelity")
    if fidelity is not None and fidelity not in ("full", "ideal"):
        raise ConfigError("fidelity must be 'full' or 'ideal'")
    spec = _parse_spec(raw["spec"], fidelity)
    state = _parse_state(raw["state"], spec)

    grid = raw["grid"]
    _check_keys(grid, _GRID_KEYS, "grid")
    if "t_max" not in grid or "samples" not in grid:
        raise ConfigError("grid needs t_max and samples")
    t_max = _number(grid["t_max"], "grid.t_max")
    if not t_max > 0:
        raise ConfigError("grid.t_max must be positive")
    samples = _number(grid["samples"], "grid.samples", int)
    if samples < 2:
        raise ConfigError("grid.samples must be >= 2")

    nbar = _number(raw.get("nbar", 0.0), "nbar")
    if nbar < 0:
        raise ConfigError("nbar must be >= 0")

    pairs = []
    for pair in raw.get("correlations", []) or []:
        if not isinstance(pair, list) or len(pair) != 2:
            raise ConfigError("correlations must be a list of [i, j] pairs")
        pairs.append(tuple(_mode(p, spec.n_system, "correlations") for p in pair))

    normalize = raw.get("normalize_peak", False)
    if not isinstance(normalize, bool):
        raise ConfigError("normalize_peak must be true or false")
    outputs = raw.get("outputs", "out")
    if not isinstance(outputs, str):
        raise ConfigError("outputs must be a directory path")
    name = raw.get("name", name)
    if not isinstance(name, str) or not name:
        raise ConfigError("name must be a non-empty string")

    return ExperimentConfig(
        spec=spec,
        state=state,
        t_max=t_max,
        samples=samples,
        nbar=nbar,
        correlations=tuple(pairs),
        normalize_peak=normalize,
        outputs=outputs,
        name=name,
        spec_source=PRESET_TOKEN if raw["spec"] == PRESET_TOKEN else "inline",
        raw=raw,
    )


def load_config(path) -> ExperimentConfig:
    """Read and validate a YAML configuration file.

    YAML syntax errors are reported as :class:`ConfigError` with the line
    and column of the problem.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        problem = getattr(exc, "problem", None) or str(exc)
        raise ConfigError(f"{path}: parse error{where}: {problem}") from exc
    if raw is None:
        raise ConfigError(f"{path}: empty configuration")
    return parse_config(raw, name=path.stem)
