"""Analytic-versus-numeric comparison reports and CSV data files."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

UNITS_NOTE = "time in 1/delta, rates in delta"


def deviation(analytic, numeric, scale: float = 1.0) -> dict:
    """Max-abs and RMS of ``numeric - analytic`` over the grid, divided by ``scale``."""
    diff = np.abs(np.asarray(numeric) - np.asarray(analytic)) / scale
    return {"max_abs": float(diff.max()), "rms": float(np.sqrt(np.mean(diff ** 2))),
            "normalization": float(scale)}


@dataclass
class ComparisonReport:
    name: str
    config_hash: str
    classification: dict
    observables: dict
    fit: dict | None = None
    flags: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    versions: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ComparisonReport":
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ComparisonReport":
        return cls.from_dict(json.loads(text))

    def save(self, path) -> Path:
        path = Path(path)
        path.write_text(self.to_json(), encoding="utf-8")
        return path

    def summary(self) -> str:
        lines = [f"{self.name}: {self.classification['class']} "
                 f"(I_C(0) = {self.classification['correlated_part']:.6g})"]
        for key in sorted(self.observables):
            dev = self.observables[key]
            line = f"  {key:<16} max-abs {dev['max_abs']:.3e}  rms {dev['rms']:.3e}"
            if "max_abs_after_transient" in dev:
                line += f"  (after transient {dev['max_abs_after_transient']:.3e})"
            lines.append(line)
        if self.fit and not self.fit["decaying"]:
            lines.append(f"  no decay fitted: {self.fit['message']}")
        elif self.fit:
            lines.append(f"  fitted rate {self.fit['rate']:.6g} vs N*Gamma {self.fit['expected']:.6g}"
                         f" (rel. err {self.fit['relative_error']:.3%})")
        for flag in self.flags:
            lines.append(f"  flag: {flag}")
        for w in self.warnings:
            lines.append(f"  warning: {w}")
        return "\n".join(lines)


def fmt(x: float) -> str:
    # + 0.0 folds -0 into 0
    return format(float(x) + 0.0, ".17g")


def write_csv(path, columns: dict, header: dict) -> Path:
    """Write equal-length columns with ``#`` metadata lines; deterministic output."""
    path = Path(path)
    names = list(columns)
    data = [np.asarray(columns[n], dtype=float) for n in names]
    lines = [f"# {key}: {header[key]}" for key in header]
    lines.append(",".join(names))
    for row in zip(*data):
        lines.append(",".join(fmt(x) for x in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_csv(path) -> tuple[dict, dict]:
    """Inverse of :func:`write_csv`: ``(header, columns)``."""
    header, rows, names = {}, [], None
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition(": ")
            header[key] = value
        elif names is None:
            names = line.split(",")
        elif line:
            rows.append([float(x) for x in line.split(",")])
    arr = np.array(rows).reshape(-1, len(names))
    return header, {n: arr[:, k] for k, n in enumerate(names)}
