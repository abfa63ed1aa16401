"""Raw trajectory ingestion.

Turns raw leader/follower position files into analysis-ready trajectories:

1. geodetic positions (if any) are projected to local planar meters,
2. gaps in the position series are filled by linear interpolation,
3. the series is resampled onto a uniform grid,
4. planar tracks are reduced to scalar longitudinal positions,
5. speeds and the follower acceleration are derived by differencing,
6. the result is trimmed and cut into segments.

The pipeline is deterministic: identical inputs produce bit-identical
trajectories, and noiseless uniform motion yields exactly constant speeds
and exactly zero accelerations.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import Trajectory, make_trajectory
from .errors import (
    InsufficientDataError,
    InsufficientSpanError,
    NegativeGapError,
    NonMonotonicTimestampsError,
    PolarLatitudeError,
    SchemaMismatchError,
    UnparsableRowError,
)

__all__ = [
    "RawRecord",
    "CsvSchema",
    "IngestConfig",
    "PLANAR_SCHEMA",
    "GEODETIC_SCHEMA",
    "detect_schema",
    "parse_csv",
    "latlon_to_local",
    "project_records",
    "interpolate_gaps",
    "resample",
    "differentiate",
    "project_longitudinal",
    "derive_state_series",
    "segment",
    "ingest_file",
    "write_trajectory",
    "read_trajectory",
]

EARTH_RADIUS_M = 6_371_000.0


@dataclass(frozen=True)
class RawRecord:
    """One time-stamped sample of the leader/follower pair.

    Positions are (x, y) meters for planar sources or (lat, lon) degrees for
    geodetic ones; NaN marks a missing coordinate.  Speeds are optional and
    only carried through.
    """

    t: float
    lead: tuple[float, float]
    follow: tuple[float, float]
    lead_speed: float = math.nan
    follow_speed: float = math.nan


@dataclass(frozen=True)
class CsvSchema:
    """Column mapping for raw files; ``kind`` is "planar" or "geodetic"."""

    kind: str
    time: str
    lead_a: str
    lead_b: str
    follow_a: str
    follow_b: str
    lead_speed: str | None = None
    follow_speed: str | None = None

    def required(self) -> list[str]:
        return [self.time, self.lead_a, self.lead_b, self.follow_a, self.follow_b]


PLANAR_SCHEMA = CsvSchema(kind="planar", time="time_s", lead_a="lead_x",
                          lead_b="lead_y", follow_a="follow_x", follow_b="follow_y")
GEODETIC_SCHEMA = CsvSchema(kind="geodetic", time="time_s", lead_a="lead_lat",
                            lead_b="lead_lon", follow_a="follow_lat", follow_b="follow_lon")


@dataclass(frozen=True)
class IngestConfig:
    """Pipeline parameters.

    ``segment_mode`` selects between cutting fixed-length segments
    ("fixed", discarding the remainder) and keeping whole trajectories that
    exceed ``min_length`` ("min").  Durations count T * dt seconds.
    """

    resample_dt: float = 1.0
    segment_length: float = 120.0
    min_length: float = 70.0
    trim_head: float = 0.0
    trim_tail: float = 0.0
    earth_radius: float = EARTH_RADIUS_M
    segment_mode: str = "fixed"

    def __post_init__(self):
        if self.resample_dt <= 0:
            raise InsufficientSpanError(f"resample_dt must be > 0, got {self.resample_dt}")
        if not (self.segment_length >= self.min_length > 0):
            raise InsufficientDataError(
                f"need segment_length >= min_length > 0, got "
                f"{self.segment_length} and {self.min_length}"
            )
        if self.trim_head < 0 or self.trim_tail < 0:
            raise InsufficientDataError("trim durations must be >= 0")
        if self.segment_mode not in ("fixed", "min"):
            raise InsufficientDataError(f"unknown segment_mode {self.segment_mode!r}")

    def to_dict(self) -> dict:
        return {"resample_dt": self.resample_dt, "segment_length": self.segment_length,
                "min_length": self.min_length, "trim_head": self.trim_head,
                "trim_tail": self.trim_tail, "earth_radius": self.earth_radius,
                "segment_mode": self.segment_mode}


def detect_schema(header: Sequence[str]) -> CsvSchema:
    """Pick the canonical planar or geodetic schema matching a header."""
    cols = set(header)
    for schema in (PLANAR_SCHEMA, GEODETIC_SCHEMA):
        if all(c in cols for c in schema.required()):
            return schema
    raise SchemaMismatchError(
        f"header {sorted(cols)} matches neither the planar nor the geodetic column set"
    )


def parse_csv(path: str | Path, schema: CsvSchema | None = None) -> list[RawRecord]:
    """Read raw records from a CSV file.

    Empty cells become NaN (missing); non-numeric cells raise
    :class:`UnparsableRowError` with the 1-based data row index.  Timestamps
    must be present and strictly increasing.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(str(path))
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        if schema is None:
            schema = detect_schema(header)
        missing = [c for c in schema.required() if c not in header]
        if missing:
            raise SchemaMismatchError(f"{path.name}: header lacks columns {missing}")

        def cell(row: dict, col: str | None, idx: int, required: bool = False) -> float:
            if col is None or row.get(col) in (None, ""):
                if required:
                    raise UnparsableRowError(idx, f"{path.name}: row {idx}: missing {col}")
                return math.nan
            try:
                return float(row[col])
            except ValueError:
                raise UnparsableRowError(
                    idx, f"{path.name}: row {idx}: cannot parse {col}={row[col]!r}"
                ) from None

        records = []
        last_t = None
        for idx, row in enumerate(reader, start=1):
            t = cell(row, schema.time, idx, required=True)
            if last_t is not None and t <= last_t:
                raise NonMonotonicTimestampsError(
                    f"{path.name}: row {idx}: timestamp {t} not after {last_t}"
                )
            last_t = t
            records.append(RawRecord(
                t=t,
                lead=(cell(row, schema.lead_a, idx), cell(row, schema.lead_b, idx)),
                follow=(cell(row, schema.follow_a, idx), cell(row, schema.follow_b, idx)),
                lead_speed=cell(row, schema.lead_speed, idx),
                follow_speed=cell(row, schema.follow_speed, idx),
            ))
    return records


def latlon_to_local(lat: float, lon: float, origin_lat: float, origin_lon: float,
                    earth_radius: float = EARTH_RADIUS_M) -> tuple[float, float]:
    """Equirectangular projection of geodetic degrees to local meters.

    ``x = R * (lon - lon0) * pi/180 * cos(lat0 * pi/180)`` and
    ``y = R * (lat - lat0) * pi/180``.  Adequate for tracks spanning a few
    kilometers away from the poles.
    """
    if abs(lat) >= 89.0 or abs(origin_lat) >= 89.0:
        raise PolarLatitudeError(f"latitude too close to a pole: {lat}, {origin_lat}")
    rad = math.pi / 180.0
    x = earth_radius * (lon - origin_lon) * rad * math.cos(origin_lat * rad)
    y = earth_radius * (lat - origin_lat) * rad
    return x, y


def _positions(records: Sequence[RawRecord]) -> tuple[np.ndarray, np.ndarray]:
    t = np.array([r.t for r in records], dtype=float)
    pos = np.array([[r.lead[0], r.lead[1], r.follow[0], r.follow[1]]
                    for r in records], dtype=float)
    return t, pos


def _rebuild(t: np.ndarray, pos: np.ndarray) -> list[RawRecord]:
    return [RawRecord(t=float(ti), lead=(float(p[0]), float(p[1])),
                      follow=(float(p[2]), float(p[3])))
            for ti, p in zip(t, pos)]


def project_records(records: Sequence[RawRecord],
                    earth_radius: float = EARTH_RADIUS_M) -> list[RawRecord]:
    """Convert geodetic records (lat, lon) to planar meters.

    The origin is the first finite follower position.
    """
    t, pos = _positions(records)
    known = np.isfinite(pos[:, 2]) & np.isfinite(pos[:, 3])
    if not known.any():
        raise InsufficientDataError("no finite follower position to anchor the projection")
    o_lat, o_lon = pos[known][0, 2], pos[known][0, 3]
    out = np.full_like(pos, math.nan)
    for i in range(len(records)):
        for veh, (a, b) in ((0, (pos[i, 0], pos[i, 1])), (2, (pos[i, 2], pos[i, 3]))):
            if math.isfinite(a) and math.isfinite(b):
                x, y = latlon_to_local(a, b, o_lat, o_lon, earth_radius)
                out[i, veh], out[i, veh + 1] = x, y
    return _rebuild(t, out)


def interpolate_gaps(records: Sequence[RawRecord]) -> list[RawRecord]:
    """Fill missing position samples by linear interpolation in time.

    Each coordinate is interpolated between its known samples; records that
    remain partially missing (leading/trailing gaps) are dropped.  A single
    fully-known record passes through unchanged; zero known records raise
    :class:`InsufficientDataError`.
    """
    if len(records) == 0:
        raise InsufficientDataError("no records")
    t, pos = _positions(records)
    filled = pos.copy()
    for j in range(4):
        known = np.isfinite(pos[:, j])
        if known.sum() >= 2:
            filled[~known, j] = np.interp(t[~known], t[known], pos[known, j])
            # only gaps BETWEEN known samples are valid interpolants
            outside = (t < t[known][0]) | (t > t[known][-1])
            filled[outside & ~known, j] = math.nan
    keep = np.isfinite(filled).all(axis=1)
    if not keep.any():
        raise InsufficientDataError("fewer than 1 fully-known record after gap filling")
    if keep.all() and np.isfinite(pos).all():
        return list(records)
    return _rebuild(t[keep], filled[keep])


def resample(records: Sequence[RawRecord], dt: float) -> list[RawRecord]:
    """Resample onto the uniform grid t0, t0+dt, ... by linear interpolation.

    Records must be gap-free (run :func:`interpolate_gaps` first).  Raises
    :class:`InsufficientSpanError` when the records span less than ``dt``.
    """
    t, pos = _positions(records)
    if len(records) < 2 or t[-1] - t[0] < dt:
        raise InsufficientSpanError(
            f"records span {0.0 if len(records) == 0 else t[-1] - t[0]:.6g} s < dt = {dt}"
        )
    n = int(math.floor((t[-1] - t[0]) / dt + 1e-9)) + 1
    grid = t[0] + dt * np.arange(n)
    out = np.empty((n, 4))
    for j in range(4):
        out[:, j] = np.interp(grid, t, pos[:, j])
    if n == len(records) and np.allclose(grid, t, rtol=0, atol=1e-12):
        return list(records)
    return _rebuild(grid, out)


def differentiate(values: Sequence[float], dt: float) -> np.ndarray:
    """First-order differences divided by dt; output is one shorter."""
    values = np.asarray(values, dtype=float)
    if values.shape[0] < 2:
        raise InsufficientDataError(f"need at least 2 values, got {values.shape[0]}")
    return np.diff(values) / dt


def project_longitudinal(lead_xy: np.ndarray,
                         follow_xy: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Reduce planar tracks to scalar positions along the travel direction.

    Both vehicles are projected onto the unit vector of the follower's
    overall displacement (leader's, if the follower barely moves), with the
    follower's first position as origin.
    """
    lead_xy = np.asarray(lead_xy, dtype=float)
    follow_xy = np.asarray(follow_xy, dtype=float)
    disp = follow_xy[-1] - follow_xy[0]
    if np.hypot(*disp) < 1e-9:
        disp = lead_xy[-1] - lead_xy[0]
    norm = np.hypot(*disp)
    if norm < 1e-9:
        raise InsufficientDataError("neither vehicle moves; no travel direction")
    u = disp / norm
    origin = follow_xy[0]
    return (lead_xy - origin) @ u, (follow_xy - origin) @ u


def derive_state_series(lead_positions: Sequence[float],
                        follow_positions: Sequence[float], dt: float,
                        id: str = "", metadata: dict | None = None) -> Trajectory:
    """Build the car-following state/action series from scalar positions.

    States are ``[v0, v1, gap]`` with speeds from first differences and the
    follower acceleration from second differences, each difference assigned
    to the later instant; the first two raw instants drop so that states and
    actions share one index range of length ``n - 2``.
    """
    lead = np.asarray(lead_positions, dtype=float)
    follow = np.asarray(follow_positions, dtype=float)
    if lead.shape != follow.shape or lead.ndim != 1:
        raise InsufficientDataError("lead and follow position series must have equal length")
    n = lead.shape[0]
    if n < 3:
        raise InsufficientDataError(f"need at least 3 samples, got {n}")
    gap = lead - follow
    # the first two instants drop during alignment, so only emitted gaps
    # must be positive
    if (gap[2:] <= 0).any():
        raise NegativeGapError("leading position must exceed following position throughout")
    v0 = differentiate(lead, dt)          # instants 1 .. n-1
    v1 = differentiate(follow, dt)
    a1 = differentiate(v1, dt)            # instants 2 .. n-1
    states = np.column_stack([v0[1:], v1[1:], gap[2:]])
    return make_trajectory(states, dt=dt, actions=a1, id=id, metadata=metadata or {})


def _slice_traj(traj: Trajectory, start: int, stop: int, new_id: str,
                extra_meta: dict | None = None) -> Trajectory:
    meta = dict(traj.metadata)
    meta.update(extra_meta or {})
    actions = traj.actions[start:stop] if traj.actions is not None else None
    return make_trajectory(traj.states[start:stop], dt=traj.dt, actions=actions,
                           id=new_id, metadata=meta)


def segment(traj: Trajectory, cfg: IngestConfig) -> list[Trajectory]:
    """Trim the ends, then cut fixed-length segments or apply the
    minimum-length filter; may return an empty list.
    """
    n_head = int(round(cfg.trim_head / traj.dt))
    n_tail = int(round(cfg.trim_tail / traj.dt))
    lo, hi = n_head, traj.length - n_tail
    if hi - lo < 2:
        return []
    if cfg.segment_mode == "min":
        if (hi - lo) * traj.dt <= cfg.min_length:
            return []
        if lo == 0 and hi == traj.length:
            return [traj]
        return [_slice_traj(traj, lo, hi, traj.id)]
    n_seg = int(round(cfg.segment_length / traj.dt))
    if n_seg < 2:
        return []
    count = (hi - lo) // n_seg
    return [
        _slice_traj(traj, lo + i * n_seg, lo + (i + 1) * n_seg,
                    f"{traj.id}_seg{i:03d}" if count > 1 or traj.id else f"seg{i:03d}",
                    {"segment_index": str(i)})
        for i in range(count)
    ]


def ingest_file(path: str | Path, cfg: IngestConfig,
                schema: CsvSchema | None = None,
                metadata: dict | None = None) -> list[Trajectory]:
    """Full pipeline for one raw file; returns the analysis-ready segments."""
    path = Path(path)
    records = parse_csv(path, schema)
    if schema is None:
        with path.open(newline="") as fh:
            schema = detect_schema(next(csv.reader(fh)))
    if schema.kind == "geodetic":
        records = project_records(records, cfg.earth_radius)
    records = interpolate_gaps(records)
    records = resample(records, cfg.resample_dt)
    _, pos = _positions(records)
    lead_s, follow_s = project_longitudinal(pos[:, :2], pos[:, 2:])
    meta = {"source": path.name}
    meta.update(metadata or {})
    traj = derive_state_series(lead_s, follow_s, cfg.resample_dt,
                               id=path.stem, metadata=meta)
    return segment(traj, cfg)


# -- canonical trajectory files ------------------------------------------------

_CANONICAL_COLUMNS = ("v0", "v1", "gap")


def write_trajectory(traj: Trajectory, path: str | Path) -> Path:
    """Write the canonical trajectory CSV plus its JSON metadata sidecar.

    Columns are ``time_s, v0, v1, gap, a1`` for 3-dimensional states and
    ``time_s, x0, x1, ..., a1`` otherwise; the sidecar carries id, dt and
    metadata.  Output is byte-deterministic.
    """
    path = Path(path)
    cols = list(_CANONICAL_COLUMNS) if traj.dim == 3 else [f"x{j}" for j in range(traj.dim)]
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time_s", *cols, "a1"])
        for i in range(traj.length):
            a = repr(float(traj.actions[i])) if traj.actions is not None else ""
            writer.writerow([repr(i * traj.dt),
                             *[repr(float(v)) for v in traj.states[i]], a])
    sidecar = path.with_suffix(".json")
    sidecar.write_text(json.dumps(
        {"id": traj.id, "dt": traj.dt, "metadata": dict(traj.metadata)},
        indent=2, sort_keys=True) + "\n")
    return path


def read_trajectory(path: str | Path) -> Trajectory:
    """Read a canonical trajectory CSV (and its sidecar, when present)."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(str(path))
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    if header[0] != "time_s" or header[-1] != "a1":
        raise SchemaMismatchError(f"{path.name}: not a canonical trajectory file")
    state_cols = header[1:-1]
    states = np.array([[float(r[j + 1]) for j in range(len(state_cols))] for r in rows])
    a_cells = [r[-1] for r in rows]
    actions = np.array([float(a) for a in a_cells]) if all(a != "" for a in a_cells) else None
    sidecar = path.with_suffix(".json")
    if sidecar.exists():
        meta = json.loads(sidecar.read_text())
        traj_id = meta.get("id", path.stem)
        dt = float(meta.get("dt", 1.0))
        metadata = meta.get("metadata", {})
    else:
        traj_id, metadata = path.stem, {}
        dt = float(rows[1][0]) - float(rows[0][0]) if len(rows) > 1 else 1.0
    return make_trajectory(states, dt=dt, actions=actions, id=traj_id, metadata=metadata)
