"""File formats for profiles, branches and snapshots, plus shape alignment.

* profile: one JSON object per file (``schema_version`` 1)
* branch:  CSV with the fixed header ``index,mu,height,param_mode,newton_iters,residual_norm,N``
           and an optional JSON sidecar carrying the full profiles
* snapshots: long-format CSV ``time,x,eta``

Floats are written with ``repr`` (shortest round-trip form), so a load returns
bit-identical values.  Output always uses LF line endings and '.' decimals.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from .continuation import Branch
from .spectral import CosineSpectrum, DispersionModel
from .steady import WaveProfile, residual

SCHEMA_VERSION = 1
BRANCH_COLUMNS = ("index", "mu", "height", "param_mode", "newton_iters", "residual_norm", "N")


class ProfileFormatError(ValueError):
    """A profile or branch file could not be parsed."""


class SchemaVersionError(ProfileFormatError):
    pass


@dataclass
class ProfileRecord:
    model: DispersionModel
    k: int
    mu: float
    height: float
    cosine_coeffs: np.ndarray
    residual_norm: float
    metadata: dict = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    @property
    def N(self) -> int:
        return len(self.cosine_coeffs)

    @classmethod
    def from_profile(cls, profile: WaveProfile, **metadata) -> "ProfileRecord":
        if profile.report is not None:
            metadata.setdefault("newton_iters", profile.report.iterations)
            metadata.setdefault("converged", profile.report.converged)
        res = residual(profile.values, profile.mu, profile.model)
        return cls(profile.model, profile.k, profile.mu, profile.height,
                   np.array(profile.spectrum.coeffs), float(np.max(np.abs(res))), metadata)

    def to_profile(self) -> WaveProfile:
        return WaveProfile(self.model, CosineSpectrum(self.cosine_coeffs), self.mu, self.k)

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "model": self.model.value,
            "k": self.k,
            "N": self.N,
            "mu": self.mu,
            "height": self.height,
            "residual_norm": self.residual_norm,
            "cosine_coeffs": [float(c) for c in self.cosine_coeffs],
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, data: dict, source: str = "<dict>") -> "ProfileRecord":
        if not isinstance(data, dict):
            raise ProfileFormatError(f"{source}: expected a JSON object")
        version = data.get("schema_version")
        if version != SCHEMA_VERSION:
            raise SchemaVersionError(f"{source}: schema_version {version!r} is not supported (expected {SCHEMA_VERSION})")

        def get(name, kind):
            if name not in data:
                raise ProfileFormatError(f"{source}: missing field {name!r}")
            try:
                return kind(data[name])
            except (TypeError, ValueError) as exc:
                raise ProfileFormatError(f"{source}: field {name!r}: {exc}") from None

        try:
            coeffs = np.array(data["cosine_coeffs"], dtype=float)
        except KeyError:
            raise ProfileFormatError(f"{source}: missing field 'cosine_coeffs'") from None
        except (TypeError, ValueError) as exc:
            raise ProfileFormatError(f"{source}: field 'cosine_coeffs': {exc}") from None
        if coeffs.ndim != 1 or coeffs.size == 0:
            raise ProfileFormatError(f"{source}: field 'cosine_coeffs' must be a non-empty list of numbers")
        if "N" in data and int(data["N"]) != coeffs.size:
            raise ProfileFormatError(f"{source}: field 'N'={data['N']} does not match {coeffs.size} coefficients")
        return cls(
            model=get("model", DispersionModel.coerce),
            k=get("k", int),
            mu=get("mu", float),
            height=get("height", float),
            cosine_coeffs=coeffs,
            residual_norm=get("residual_norm", float),
            metadata=dict(data.get("metadata") or {}),
        )


def _write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def save_profile(record: ProfileRecord | WaveProfile, path) -> Path:
    if isinstance(record, WaveProfile):
        record = ProfileRecord.from_profile(record)
    path = Path(path)
    _write_text(path, json.dumps(record.to_dict(), indent=1, sort_keys=False) + "\n")
    return path


def load_profile(path) -> ProfileRecord:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProfileFormatError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return ProfileRecord.from_dict(data, str(path))


@dataclass
class BranchRecord:
    model: DispersionModel | None
    k: int | None
    rows: list[dict]
    turning_point_index: int | None = None
    termination: str | None = None
    schema_version: int = SCHEMA_VERSION

    @property
    def mus(self):
        return np.array([r["mu"] for r in self.rows])

    @property
    def heights(self):
        return np.array([r["height"] for r in self.rows])


def branch_rows(branch: Branch) -> list[dict]:
    return [
        {
            "index": i,
            "mu": p.mu,
            "height": p.height,
            "param_mode": p.param_mode.value,
            "newton_iters": p.report.iterations,
            "residual_norm": p.report.residual_norm,
            "N": p.n_points,
        }
        for i, p in enumerate(branch.points)
    ]


def export_branch_csv(branch: Branch, path) -> Path:
    if not len(branch):
        raise ValueError("cannot export an empty branch")
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(BRANCH_COLUMNS)
        for row in branch_rows(branch):
            writer.writerow([repr(row[c]) if isinstance(row[c], float) else row[c] for c in BRANCH_COLUMNS])
    return path


def read_branch_csv(path) -> BranchRecord:
    path = Path(path)
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if tuple(header or ()) != BRANCH_COLUMNS:
            raise ProfileFormatError(f"{path}: line 1: unexpected header {header!r}")
        rows = []
        for lineno, fields in enumerate(reader, start=2):
            if len(fields) != len(BRANCH_COLUMNS):
                raise ProfileFormatError(f"{path}: line {lineno}: expected {len(BRANCH_COLUMNS)} fields, got {len(fields)}")
            try:
                rows.append({
                    "index": int(fields[0]),
                    "mu": float(fields[1]),
                    "height": float(fields[2]),
                    "param_mode": fields[3],
                    "newton_iters": int(fields[4]),
                    "residual_norm": float(fields[5]),
                    "N": int(fields[6]),
                })
            except ValueError as exc:
                raise ProfileFormatError(f"{path}: line {lineno}: {exc}") from None
    return BranchRecord(None, None, rows)


def save_branch_json(branch: Branch, path, include_profiles: bool = True) -> Path:
    """JSON sidecar: branch metadata, the CSV rows and optionally every profile."""
    data = {
        "schema_version": SCHEMA_VERSION,
        "model": branch.model.value,
        "k": branch.k,
        "turning_point_index": branch.turning_point_index,
        "termination": branch.termination.value if branch.termination else None,
        "rows": branch_rows(branch),
    }
    if include_profiles:
        data["profiles"] = [ProfileRecord.from_profile(p.profile).to_dict() for p in branch.points]
    path = Path(path)
    _write_text(path, json.dumps(data, indent=1) + "\n")
    return path


def load_branch_json(path) -> tuple[BranchRecord, list[ProfileRecord]]:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ProfileFormatError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if data.get("schema_version") != SCHEMA_VERSION:
        raise SchemaVersionError(f"{path}: schema_version {data.get('schema_version')!r} is not supported")
    record = BranchRecord(DispersionModel.coerce(data["model"]), int(data["k"]), list(data["rows"]),
                          data.get("turning_point_index"), data.get("termination"))
    profiles = [ProfileRecord.from_dict(p, f"{path}: profiles[{i}]") for i, p in enumerate(data.get("profiles", []))]
    return record, profiles


def write_snapshots_csv(snapshots, path) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("time", "x", "eta"))
        for snap in snapshots:
            for x, v in zip(snap.grid, snap.values):
                writer.writerow((repr(float(snap.time)), repr(float(x)), repr(float(v))))
    return path


def align_for_comparison(profile_a: WaveProfile, profile_b: WaveProfile, eval_grid):
    """Evaluate both waves on ``eval_grid`` and shift each so its minimum is zero."""
    a = np.asarray(profile_a(eval_grid), dtype=float)
    b = np.asarray(profile_b(eval_grid), dtype=float)
    return a - a.min(), b - b.min()


def half_height_width(profile: WaveProfile) -> float:
    """Width of the crest region lying above the mean of crest and trough levels."""
    trough_x = math.pi / profile.k
    crest, trough = profile(np.array([0.0, trough_x]))
    level = 0.5 * (crest + trough)
    if crest - trough <= 0:
        return float("nan")
    x_half = brentq(lambda x: float(profile(x)) - level, 0.0, trough_x, xtol=1e-14)
    return 2.0 * x_half
