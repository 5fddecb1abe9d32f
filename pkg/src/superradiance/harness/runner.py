"""Run configured experiments: analytic and numeric pipelines side by side."""
from __future__ import annotations

import datetime as _dt
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy

from .. import __version__, analytic, numeric
from ..coupling import paper_preset
from ..model import Fidelity, MomentState, SystemSpec, collective
from ..states import bright_state, dark_state, fock_state
from .config import ExperimentConfig, StateConfig
from .report import UNITS_NOTE, ComparisonReport, deviation, write_csv

TRAPPED_TOL = 1e-10
# in units of 1 / (N Gamma)
TRANSIENT = 0.5


@dataclass
class RunResult:
    report: ComparisonReport
    data_path: Path
    report_path: Path
    columns: dict


def build_state(spec: SystemSpec, st: StateConfig, nbar: float = 0.0) -> MomentState:
    """Initial moments over system + bath, bath guides thermal at ``nbar``."""
    if st.kind == "bright":
        state = bright_state(spec, st.r)
    elif st.kind == "dark":
        state = dark_state(spec, st.r, (st.pair[0] - 1, st.pair[1] - 1))
    elif st.kind == "normal":
        state = fock_state(st.occupations, spec.n_bath)
    else:
        state = MomentState.from_system(np.array(st.corr), spec.n_bath, np.array(st.mean)).check()
    if nbar:
        state = state.with_bath(spec.n_system, spec.n_bath, nbar)
    return state


def output_dir(config: ExperimentConfig, override=None) -> Path:
    """``override`` (CLI ``--out``), else ``$OUTPUT_DIR``, else the config's ``outputs``."""
    out = override or os.environ.get("OUTPUT_DIR") or config.outputs
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def versions() -> dict:
    return {"superradiance": __version__, "numpy": np.__version__, "scipy": scipy.__version__}


def compute(config: ExperimentConfig) -> tuple[dict, ComparisonReport]:
    """Evaluate both pipelines on the config grid; nothing is written."""
    spec = config.spec
    state = build_state(spec, config.state, config.nbar)
    times = config.times
    pairs = [(i - 1, j - 1) for i, j in config.correlations]
    rate = collective(spec).collective_rate

    m_an = np.asarray(analytic.thermal_total_quanta_t(state, spec, config.nbar, times))
    i_an = np.asarray(analytic.thermal_intensity_t(state, spec, config.nbar, times))
    series = numeric.run_series(spec, state, times, pairs)
    m_num = series.m_total
    # With a thermal bath the net flux vanishes at steady state; the emission
    # rate N Gamma <R(t)> is the quantity the thermal prediction describes.
    i_num = series.intensity if config.nbar == 0 else rate * series.r_total

    scale = 1.0
    if config.normalize_peak and i_an.max() > 0:
        scale = float(i_an.max())
    columns = {"t": times, "m_analytic": m_an, "m_numeric": m_num,
               "i_analytic": i_an / scale, "i_numeric": i_num / scale}
    observables = {}
    m0 = float(m_an[0])
    observables["m_total"] = deviation(m_an, m_num, m0 if m0 > 0 else 1.0)
    peak = float(i_an.max())
    observables["intensity"] = deviation(i_an, i_num, peak if peak > 0 else 1.0)
    # the exact flux starts at zero; compare once the initial transient is over
    late = times >= TRANSIENT / rate if rate > 0 else np.ones_like(times, dtype=bool)
    if late.any():
        observables["intensity"]["max_abs_after_transient"] = float(
            np.max(np.abs(i_num[late] - i_an[late])) / (peak if peak > 0 else 1.0))
    for (i, j), (i0, j0) in zip(config.correlations, pairs):
        c_an = np.asarray(analytic.correlation_t(state, spec, i0, j0, times), dtype=complex)
        c_num = series.correlations[(i0, j0)]
        columns[f"c_{i}_{j}_analytic"] = c_an.real
        columns[f"c_{i}_{j}_numeric"] = c_num.real
        columns[f"c_{i}_{j}_numeric_imag"] = c_num.imag
        observables[f"c_{i}_{j}"] = deviation(c_an, c_num)

    fit = None
    if config.nbar == 0 and rate > 0:
        result = numeric.fit_decay_rate(series, rate_guess=rate)
        fit = {"rate": result.rate, "floor": result.floor, "expected": rate,
               "relative_error": abs(result.rate - rate) / rate, "decaying": result.decaying,
               "message": result.message}

    cls = analytic.classify_radiance(state, spec)
    flags = []
    if np.max(np.abs(m_num - m_num[0])) < TRAPPED_TOL and m_num[0] > 0:
        flags.append("trapped")
    if series.warnings:
        flags.append("reflection-horizon")
    report = ComparisonReport(
        name=config.name,
        config_hash=config.config_hash,
        classification={"class": cls.kind.value, "correlated_part": cls.correlated_part},
        observables=observables,
        fit=fit,
        flags=flags,
        warnings=list(series.warnings),
        versions=versions(),
        config=config.canonical(),
        metadata={"generated_at": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")},
    )
    return columns, report


def run(config: ExperimentConfig, out_dir=None) -> RunResult:
    """Write ``<name>.csv`` and ``<name>.report.json``; return the report."""
    columns, report = compute(config)
    out = output_dir(config, out_dir)
    header = {
        "experiment": config.name,
        "config_sha256": config.config_hash,
        "units": UNITS_NOTE,
        "normalize_peak": str(config.normalize_peak).lower(),
        "nbar": format(config.nbar, ".17g"),
    }
    data_path = write_csv(out / f"{config.name}.csv", columns, header)
    report_path = report.save(out / f"{config.name}.report.json")
    return RunResult(report, data_path, report_path, columns)


FIG3_STATES = {
    "bright": StateConfig("bright", r=2),
    "normal": StateConfig("normal", occupations=(2, 0, 0)),
    "dark": StateConfig("dark", r=2, pair=(1, 3)),
}


def fig3_configs(fidelity=Fidelity.FULL, samples: int = 601, t_max: float | None = None,
                 outputs: str = "out") -> dict:
    """Bright, normal and dark two-photon configs on the preset, ``t_max = 3 / (N Gamma)`` by default."""
    spec = paper_preset(fidelity)
    if t_max is None:
        t_max = 3.0 / collective(spec).collective_rate
    return {
        key: ExperimentConfig(spec=spec, state=st, t_max=t_max, samples=samples,
                              correlations=((1, 3), (3, 1)), outputs=outputs,
                              name=f"fig3_{key}")
        for key, st in FIG3_STATES.items()
    }


@dataclass
class Fig3Bundle:
    intensity_path: Path
    correlation_path: Path
    results: dict


def reproduce_fig3(out_dir=None, fidelity=Fidelity.FULL, samples: int = 601) -> Fig3Bundle:
    """Intensity and two-time correlation datasets for the two-photon trio.

    Intensities of all six curves are divided by the analytic bright-state
    peak, so curves stay comparable and the bright analytic curve starts at 1.
    """
    configs = fig3_configs(fidelity, samples)
    results = {key: run(cfg, out_dir) for key, cfg in configs.items()}
    out = output_dir(configs["bright"], out_dir)
    times = results["bright"].columns["t"]
    peak = float(results["bright"].columns["i_analytic"].max())
    label = {"bright": "B", "normal": "N", "dark": "D"}

    intensity = {"t": times}
    for kind in ("numeric", "analytic"):
        for key, res in results.items():
            intensity[f"I_{label[key]}_{kind}"] = res.columns[f"i_{kind}"] / peak
    correlation = {"t": times}
    for key, res in results.items():
        for pair in ("1_3", "3_1"):
            for kind in ("analytic", "numeric"):
                correlation[f"c_{pair}_{label[key]}_{kind}"] = res.columns[f"c_{pair}_{kind}"]

    header = {
        "experiment": "fig3",
        "config_sha256": " ".join(results[k].report.config_hash for k in results),
        "units": UNITS_NOTE,
        "fidelity": Fidelity(fidelity).value,
    }
    ipath = write_csv(out / "fig3_intensity.csv", intensity,
                      {**header, "normalization": "analytic bright-state peak intensity"})
    cpath = write_csv(out / "fig3_correlations.csv", correlation, header)
    return Fig3Bundle(ipath, cpath, results)


def converge(config: ExperimentConfig, tol: float = 1e-6) -> int:
    state = build_state(config.spec, config.state)
    return numeric.converge_bath_size(config.spec, state, config.times, tol)
