"""Deterministic file output: binary grids and CSV tables.

All writers are pure functions of their inputs (no timestamps, no locale,
little-endian payloads, shortest-roundtrip decimal text), so a rerun with
the same inputs is byte-identical.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .beam import FieldMap
from .channel import ChannelMatrix, ChannelModel
from .codebook import Codebook
from .evaluation import SWEEP_COLUMNS
from .search import SearchResult

__all__ = [
    "write_channel_binary",
    "read_channel_binary",
    "write_field_map_binary",
    "read_field_map_binary",
    "write_field_map_csv",
    "write_search_trace_csv",
    "write_sweep_csv",
    "write_codebook_csv",
]

_MAGIC = b"AIRYGRID"
_KIND_CHANNEL = 1
_KIND_FIELD_MAP = 2


def _fmt(value: float) -> str:
    """Shortest round-trip decimal form, dot separator, no locale."""
    return repr(float(value))


def _write_text(path, lines) -> None:
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("utf-8"))


def write_channel_binary(path, channel: ChannelMatrix) -> None:
    """Header (magic, version, kind, rows, cols) + little-endian complex128."""
    rows, cols = channel.entries.shape
    header = _MAGIC + struct.pack("<III QQ", 1, _KIND_CHANNEL,
                                  len(channel.model.value), rows, cols)
    name = channel.model.value.encode("ascii")
    payload = np.ascontiguousarray(channel.entries).astype("<c16").tobytes()
    Path(path).write_bytes(header + name + payload)


def read_channel_binary(path) -> ChannelMatrix:
    raw = Path(path).read_bytes()
    if raw[:8] != _MAGIC:
        raise ValueError("not a grid file")
    version, kind, name_len, rows, cols = struct.unpack("<III QQ", raw[8:36])
    if version != 1 or kind != _KIND_CHANNEL:
        raise ValueError("not a channel grid")
    name = raw[36:36 + name_len].decode("ascii")
    data = np.frombuffer(raw[36 + name_len:], dtype="<c16").reshape(rows, cols)
    return ChannelMatrix(data.astype(complex), ChannelModel(name))


def write_field_map_binary(path, field_map: FieldMap) -> None:
    """Header + x grid, y grid, then row-major power (dB) as little-endian f64."""
    ny, nx = field_map.power_db.shape
    header = _MAGIC + struct.pack("<III QQ", 1, _KIND_FIELD_MAP, 0, ny, nx)
    body = (np.asarray(field_map.x, dtype="<f8").tobytes()
            + np.asarray(field_map.y, dtype="<f8").tobytes()
            + np.ascontiguousarray(field_map.power_db).astype("<f8").tobytes())
    Path(path).write_bytes(header + body)


def read_field_map_binary(path) -> FieldMap:
    raw = Path(path).read_bytes()
    if raw[:8] != _MAGIC:
        raise ValueError("not a grid file")
    version, kind, _, ny, nx = struct.unpack("<III QQ", raw[8:36])
    if version != 1 or kind != _KIND_FIELD_MAP:
        raise ValueError("not a field-map grid")
    off = 36
    x = np.frombuffer(raw[off:off + 8 * nx], dtype="<f8"); off += 8 * nx
    y = np.frombuffer(raw[off:off + 8 * ny], dtype="<f8"); off += 8 * ny
    power = np.frombuffer(raw[off:], dtype="<f8").reshape(ny, nx)
    return FieldMap(x.copy(), y.copy(), power.copy(), mask_applied=False)


def write_field_map_csv(path, field_map: FieldMap) -> None:
    """Long-format (x, y, power_db) rows, row-major over the grid."""
    lines = ["x_m,y_m,power_db"]
    for iy, yv in enumerate(field_map.y):
        for ix, xv in enumerate(field_map.x):
            lines.append(f"{_fmt(xv)},{_fmt(yv)},{_fmt(field_map.power_db[iy, ix])}")
    _write_text(path, lines)


def write_search_trace_csv(path, result: SearchResult) -> None:
    """Per-slot training record: beam parameters and measured power in dB."""
    lines = ["slot,curving,focus_distance_m,focus_angle_rad,power_db"]
    for e in result.trace:
        power_db = 10.0 * np.log10(e.power) if e.power > 0 else -np.inf
        lines.append(f"{e.slot},{_fmt(e.curving)},{_fmt(e.focus_distance)},"
                     f"{_fmt(e.focus_angle)},{_fmt(power_db)}")
    _write_text(path, lines)


def write_sweep_csv(path, rows) -> None:
    lines = [",".join(SWEEP_COLUMNS)]
    for r in rows:
        lines.append(f"{r.sweep_variable},{_fmt(r.value)},{r.scheme},{r.seed},"
                     f"{_fmt(r.spectral_efficiency_bps_hz)},{r.overhead_slots},"
                     f"{r.notes}")
    _write_text(path, lines)


def write_codebook_csv(path, codebook: Codebook) -> None:
    lines = ["index,scheme,curving,focus_distance_m,focus_angle_rad"]
    for i, word in enumerate(codebook.codewords):
        p = word.params
        lines.append(f"{i},{codebook.scheme.value},{_fmt(p.curving)},"
                     f"{_fmt(p.focus_distance)},{_fmt(p.focus_angle)}")
    _write_text(path, lines)
