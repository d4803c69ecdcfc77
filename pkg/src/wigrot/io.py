"""Serialization of coefficient tables: CSV, JSON and a little-endian binary format."""

from __future__ import annotations

import json
import struct
from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from typing import BinaryIO, TextIO

import numpy as np

from wigrot import __version__
from wigrot.recursion import CoeffTriangle, full_matrix, triangle_order

MAGIC = b"HROT"
FORMAT_VERSION = 1
HEADER = struct.Struct("<4sIIdI")
LAYOUT_TRIANGLE = 0
LAYOUT_DENSE = 1
CSV_HEADER = "n,m_prime,m,value"


@dataclass(frozen=True)
class OutputHeader:
    magic: bytes
    version: int
    n: int
    beta: float
    layout: int

    def payload_count(self) -> int:
        if self.layout == LAYOUT_TRIANGLE:
            return (self.n + 1) ** 2
        if self.layout == LAYOUT_DENSE:
            return (2 * self.n + 1) ** 2
        raise ValueError(f"unknown layout code {self.layout}")


def fmt(value: float) -> str:
    """17 significant digits: enough to round-trip any float64."""
    return f"{value:.17g}"


def _d_signs(mp: np.ndarray, m: np.ndarray) -> np.ndarray:
    eps_mp = np.where((mp >= 0) & (mp % 2 == 1), -1.0, 1.0)
    eps_neg_m = np.where((m <= 0) & (m % 2 == 1), -1.0, 1.0)
    return eps_mp * eps_neg_m


def layout_values(tri: CoeffTriangle, dense: bool = False,
                  d_matrix: bool = False) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(m', m, value) arrays in canonical order: triangle storage order or row-major square.

    ``d_matrix`` converts to classical Wigner small-d entries.
    """
    n = tri.n
    if dense:
        k = np.arange(-n, n + 1)
        mp, m = np.repeat(k, 2 * n + 1), np.tile(k, 2 * n + 1)
        vals = full_matrix(tri).ravel()
    else:
        mp, m = triangle_order(n)
        vals = tri.data.copy()
    if d_matrix:
        vals = vals * _d_signs(mp, m)
    return mp, m, vals


def rows(tri: CoeffTriangle, dense: bool = False,
         d_matrix: bool = False) -> Iterator[tuple[int, int, int, float]]:
    mp, m, vals = layout_values(tri, dense, d_matrix)
    for a, b, v in zip(mp.tolist(), m.tolist(), vals.tolist()):
        yield tri.n, a, b, v


def write_csv(triangles: Iterable[CoeffTriangle], out: TextIO, dense: bool = False,
              d_matrix: bool = False) -> None:
    out.write(CSV_HEADER + "\n")
    for tri in triangles:
        for n, mp, m, v in rows(tri, dense, d_matrix):
            out.write(f"{n},{mp},{m},{fmt(v)}\n")


def read_csv(text: str) -> list[tuple[int, int, int, float]]:
    lines = text.splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError("missing or unexpected CSV header")
    out = []
    for line in lines[1:]:
        n, mp, m, v = line.split(",")
        out.append((int(n), int(mp), int(m), float(v)))
    return out


def emit_csv_rows(records: Iterable[tuple[int, int, int, float]]) -> str:
    return CSV_HEADER + "\n" + "".join(f"{n},{mp},{m},{fmt(v)}\n" for n, mp, m, v in records)


def write_json(triangles: Iterable[CoeffTriangle], out: TextIO, algo: str, beta: float,
               dense: bool = False, d_matrix: bool = False, extra: dict | None = None) -> None:
    meta = {"algo": algo, "beta": beta, "version": __version__}
    if extra:
        meta.update(extra)
    coeffs = [{"n": n, "m_prime": mp, "m": m, "value": v}
              for tri in triangles for n, mp, m, v in rows(tri, dense, d_matrix)]
    json.dump({"metadata": meta, "coefficients": coeffs}, out, sort_keys=True, indent=1)
    out.write("\n")


def write_bin(triangles: Iterable[CoeffTriangle], out: BinaryIO, dense: bool = False,
              d_matrix: bool = False) -> None:
    """One header plus payload per degree, concatenated."""
    for tri in triangles:
        layout = LAYOUT_DENSE if dense else LAYOUT_TRIANGLE
        _, _, values = layout_values(tri, dense, d_matrix)
        out.write(HEADER.pack(MAGIC, FORMAT_VERSION, tri.n, tri.beta, layout))
        out.write(np.ascontiguousarray(values, dtype="<f8").tobytes())


def read_bin(blob: bytes) -> list[tuple[OutputHeader, np.ndarray]]:
    out = []
    pos = 0
    while pos < len(blob):
        if len(blob) - pos < HEADER.size:
            raise ValueError("truncated header")
        header = OutputHeader(*HEADER.unpack_from(blob, pos))
        if header.magic != MAGIC:
            raise ValueError(f"bad magic {header.magic!r}")
        pos += HEADER.size
        count = header.payload_count()
        end = pos + 8 * count
        if end > len(blob):
            raise ValueError("truncated payload")
        out.append((header, np.frombuffer(blob[pos:end], dtype="<f8").astype(np.float64)))
        pos = end
    return out
