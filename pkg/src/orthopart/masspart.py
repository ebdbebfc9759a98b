"""Hyperplanes, weighted point measures, and equipartition verification.

A hyperplane in R^d is encoded by a unit vector v = (t_0, t_1, ..., t_d): the
plane is t_1 x_1 + ... + t_d x_d = t_0 and the associated half-space is the
``<=`` side.  The poles (t_1 = ... = t_d = 0) encode no plane and are
rejected.  Flipping v swaps the two half-spaces, which is exactly the sign
action the g-functions are equivariant against.

For n planes and a sign vector s in {-1,+1}^n, the cell H(v, s) is the
intersection of the chosen half-spaces, and

    g(v_1,...,v_n) = sum_s (-1)^{#negatives in s} mu(H(v, s)).

Every point lies in one cell and contributes its weight times the product of
its side signs, so g is a single weighted sum of sign products.

Two evaluation modes:

* exact mode - integer weights, integer points, and planes carrying integer
  coefficient vectors: side signs and masses are computed in integer
  arithmetic, and a point falling exactly on a plane is an error;
* float mode - side signs use a relative tolerance and boundary points are
  assigned to the ``<=`` side deterministically.

Cell vectors are indexed by the natural binary order: bit j of the index is
set exactly when s_j = -1.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .bounds import constraint_count

_SIDE_RTOL = 1e-12
_UNIT_TOL = 1e-12


class BoundaryPointError(ValueError):
    """A point lies exactly on a hyperplane in exact mode."""


def _is_integer_array(a: np.ndarray) -> bool:
    return np.issubdtype(a.dtype, np.integer)


@dataclass(frozen=True)
class Hyperplane:
    """Oriented hyperplane as a unit vector in S^d.

    ``exact`` optionally stores an integer coefficient vector defining the
    same oriented plane (the unit vector is its normalization); scaling by a
    positive constant does not change any side sign, so integer coefficients
    give exact side evaluation on integer points.
    """

    v: np.ndarray
    exact: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        v = np.array(self.v, dtype=float)
        if v.ndim != 1 or v.size < 2:
            raise ValueError("v must be a vector of length d+1 with d >= 1")
        norm = float(np.linalg.norm(v))
        if abs(norm - 1.0) > _UNIT_TOL:
            raise ValueError(f"|v| = {norm} is not 1 within {_UNIT_TOL}")
        if float(np.linalg.norm(v[1:])) <= _UNIT_TOL:
            raise ValueError("poles encode no hyperplane (all spatial components vanish)")
        v.setflags(write=False)
        object.__setattr__(self, "v", v)
        if self.exact is not None:
            ex = tuple(int(c) for c in self.exact)
            if len(ex) != v.size:
                raise ValueError("exact coefficients must match v in length")
            object.__setattr__(self, "exact", ex)

    @classmethod
    def from_coefficients(cls, coeffs: Sequence[float]) -> "Hyperplane":
        """Normalize a raw coefficient vector (t_0, t_1, ..., t_d).

        Integer input is remembered for exact side evaluation.
        """
        arr = np.asarray(coeffs)
        raw = np.array(arr, dtype=float)
        norm = float(np.linalg.norm(raw))
        if norm == 0.0:
            raise ValueError("zero coefficient vector")
        exact = tuple(int(c) for c in np.ravel(arr)) if _is_integer_array(arr) else None
        return cls(raw / norm, exact)

    @classmethod
    def from_normal_offset(cls, normal: Sequence[float], offset: float) -> "Hyperplane":
        """Plane {x . u = c} for a unit-ish normal u and offset c."""
        u = np.asarray(normal, dtype=float)
        raw = np.concatenate(([float(offset)], u))
        norm = float(np.linalg.norm(raw))
        if norm == 0.0:
            raise ValueError("zero coefficient vector")
        return cls(raw / norm)

    @property
    def d(self) -> int:
        return self.v.size - 1

    def normal(self) -> np.ndarray:
        """Unit normal of the plane (spatial part of v, normalized)."""
        sp = self.v[1:]
        return sp / float(np.linalg.norm(sp))

    def flip(self) -> "Hyperplane":
        ex = tuple(-c for c in self.exact) if self.exact is not None else None
        return Hyperplane(-self.v, ex)

    def side_values(self, points: np.ndarray, exact: bool = False) -> np.ndarray:
        """t_0 - x . (t_1..t_d) for each point; positive strictly inside the
        half-space, negative strictly outside."""
        pts = np.asarray(points)
        if exact:
            if self.exact is None:
                raise ValueError("plane carries no integer coefficients")
            c = np.asarray(self.exact, dtype=np.int64)
            return c[0] - pts @ c[1:]
        return self.v[0] - pts @ self.v[1:]

    def side(self, x: Sequence[float]) -> int:
        """-1 / 0 / +1 classification of a single point.

        0 means the point is on the plane: exactly so when integer data allow
        exact evaluation, within a relative tolerance otherwise.
        """
        pt = np.asarray(x)
        if pt.ndim != 1 or pt.size != self.d:
            raise ValueError(f"point of dimension {pt.size}, plane of dimension {self.d}")
        if self.exact is not None and _is_integer_array(pt):
            val = int(self.exact[0]) - int(pt @ np.asarray(self.exact[1:], dtype=np.int64))
            return (val > 0) - (val < 0)
        val = float(self.v[0] - pt @ self.v[1:])
        tol = _SIDE_RTOL * (1.0 + float(np.linalg.norm(pt)))
        if abs(val) <= tol:
            return 0
        return 1 if val > 0 else -1

    def to_list(self) -> list[float]:
        return [float(c) for c in self.v]


@dataclass(frozen=True)
class HyperplaneTuple:
    """Ordered tuple of hyperplanes in a common ambient dimension."""

    planes: tuple[Hyperplane, ...]

    def __post_init__(self) -> None:
        planes = tuple(self.planes)
        if not planes:
            raise ValueError("empty tuple of hyperplanes")
        d = planes[0].d
        if any(h.d != d for h in planes):
            raise ValueError("mixed ambient dimensions")
        object.__setattr__(self, "planes", planes)

    @property
    def d(self) -> int:
        return self.planes[0].d

    def __len__(self) -> int:
        return len(self.planes)

    def __iter__(self):
        return iter(self.planes)

    def __getitem__(self, i: int) -> Hyperplane:
        return self.planes[i]

    def ortho_residual(self) -> float:
        """Largest |dot| between distinct unit normals (0 for one plane)."""
        normals = [h.normal() for h in self.planes]
        worst = 0.0
        for a, b in itertools.combinations(normals, 2):
            worst = max(worst, abs(float(a @ b)))
        return worst


def as_plane_tuple(planes) -> HyperplaneTuple:
    if isinstance(planes, HyperplaneTuple):
        return planes
    if isinstance(planes, Hyperplane):
        return HyperplaneTuple((planes,))
    return HyperplaneTuple(tuple(planes))


@dataclass(frozen=True)
class WeightedPointMeasure:
    """Finite measure given by weighted points; weights strictly positive."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        pts = np.asarray(self.points)
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValueError("points must be a nonempty (N, d) array")
        w = np.asarray(self.weights)
        if w.shape != (pts.shape[0],):
            raise ValueError("weights must match points in length")
        if np.any(w <= 0):
            raise ValueError("weights must be positive")
        if not _is_integer_array(pts):
            pts = np.array(pts, dtype=float)
        if not _is_integer_array(w):
            w = np.array(w, dtype=float)
        pts = np.array(pts)
        w = np.array(w)
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)
        total = w.sum()
        object.__setattr__(self, "_total", int(total) if _is_integer_array(w) else float(total))
        object.__setattr__(self, "_norms", None)

    @classmethod
    def from_points(cls, points, weights=None) -> "WeightedPointMeasure":
        pts = np.asarray(points)
        if weights is None:
            weights = np.ones(pts.shape[0], dtype=np.int64)
        return cls(pts, np.asarray(weights))

    @property
    def total(self) -> float | int:
        return self._total

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def is_integer(self) -> bool:
        """True when both points and weights are integral (exact-capable)."""
        return _is_integer_array(self.points) and _is_integer_array(self.weights)

    def __len__(self) -> int:
        return self.points.shape[0]

    def point_norms(self) -> np.ndarray:
        cached = self._norms
        if cached is None:
            cached = np.linalg.norm(np.asarray(self.points, dtype=float), axis=1)
            object.__setattr__(self, "_norms", cached)
        return cached


def _resolve_exact(mode: str, mu: WeightedPointMeasure, planes: HyperplaneTuple) -> bool:
    capable = mu.is_integer and all(h.exact is not None for h in planes)
    if mode == "auto":
        return capable
    if mode == "exact":
        if not capable:
            raise ValueError("exact mode needs integer points, weights, and plane coefficients")
        return True
    if mode == "float":
        return False
    raise ValueError(f"unknown mode {mode!r}")


def _sign_matrix(mu: WeightedPointMeasure, planes: HyperplaneTuple, exact: bool) -> np.ndarray:
    """(N, k) matrix of side signs in {-1, +1}.

    Exact mode raises on boundary points; float mode sends them to +1 (the
    ``<=`` side).
    """
    out = np.empty((len(mu), len(planes)), dtype=np.int64)
    for j, h in enumerate(planes):
        vals = h.side_values(mu.points, exact=exact)
        if exact:
            hits = int(np.count_nonzero(vals == 0))
            if hits:
                raise BoundaryPointError(f"{hits} point(s) on plane {j} in exact mode")
            out[:, j] = np.where(vals > 0, 1, -1)
        else:
            tol = _SIDE_RTOL * (1.0 + mu.point_norms())
            out[:, j] = np.where(vals >= -tol, 1, -1)
    return out


def side(h: Hyperplane, x: Sequence[float]) -> int:
    """Side of a point relative to a plane: +1 inside the half-space, 0 on it."""
    return h.side(x)


def g_eval(mu: WeightedPointMeasure, planes, mode: str = "auto") -> float | int:
    """Alternating cell-mass sum of the tuple, as one weighted sign product."""
    tp = as_plane_tuple(planes)
    if tp.d != mu.dim:
        raise ValueError(f"measure in R^{mu.dim}, planes in R^{tp.d}")
    exact = _resolve_exact(mode, mu, tp)
    signs = _sign_matrix(mu, tp, exact)
    prod = signs[:, 0].copy()
    for j in range(1, len(tp)):
        prod *= signs[:, j]
    val = (mu.weights * prod).sum()
    return int(val) if exact else float(val)


def cell_masses(mu: WeightedPointMeasure, planes, mode: str = "auto") -> np.ndarray:
    """Masses of the 2^n cells cut by the tuple, in natural binary order."""
    tp = as_plane_tuple(planes)
    if tp.d != mu.dim:
        raise ValueError(f"measure in R^{mu.dim}, planes in R^{tp.d}")
    exact = _resolve_exact(mode, mu, tp)
    signs = _sign_matrix(mu, tp, exact)
    return _cells_from_signs(signs, mu.weights, exact)


def _cells_from_signs(signs: np.ndarray, weights: np.ndarray, exact: bool) -> np.ndarray:
    n = signs.shape[1]
    idx = np.zeros(signs.shape[0], dtype=np.int64)
    for j in range(n):
        idx |= (signs[:, j] < 0).astype(np.int64) << j
    masses = np.bincount(idx, weights=np.asarray(weights, dtype=float), minlength=1 << n)
    if exact:
        return masses.astype(np.int64)
    return masses


def subset_constraints(k: int, n: int) -> list[tuple[int, ...]]:
    """All nonempty index subsets of {0..k-1} of size <= n, by (size, lex).

    Their number is ``constraint_count(n, k)``.
    """
    if not 1 <= n <= k:
        raise ValueError(f"need 1 <= n <= k, got n={n}, k={k}")
    subsets: list[tuple[int, ...]] = []
    for size in range(1, n + 1):
        subsets.extend(itertools.combinations(range(k), size))
    assert len(subsets) == constraint_count(n, k)
    return subsets


@dataclass(frozen=True)
class GValue:
    measure: int
    subset: tuple[int, ...]
    value: float | int
    fraction: float

    def to_json_dict(self) -> dict:
        return {
            "measure": self.measure,
            "subset": list(self.subset),
            "value": float(self.value),
            "fraction": self.fraction,
        }


@dataclass(frozen=True)
class CellStats:
    measure: int
    subset: tuple[int, ...]
    masses: tuple
    fractions: tuple[float, ...]
    deviation: float

    def to_json_dict(self) -> dict:
        return {
            "measure": self.measure,
            "subset": list(self.subset),
            "masses": [float(m) for m in self.masses],
            "fractions": list(self.fractions),
            "deviation": self.deviation,
        }


@dataclass(frozen=True)
class EquipartitionReport:
    """Full audit of an equipartition claim.

    The decision is independent of the g-values: every n-subset's cell masses
    are recomputed directly and compared to total / 2^n, and the pairwise
    orthogonality of the normals is checked.  The g-values are reported so a
    near-miss can be traced to the subset that causes it.
    """

    g_values: tuple[GValue, ...]
    cells: tuple[CellStats, ...]
    max_cell_deviation: float
    ortho_residual: float
    tol: float
    ortho_tol: float
    passed: bool

    def to_json_dict(self) -> dict:
        return {
            "pass": self.passed,
            "max_cell_deviation": self.max_cell_deviation,
            "ortho_residual": self.ortho_residual,
            "tol": self.tol,
            "ortho_tol": self.ortho_tol,
            "g_values": [g.to_json_dict() for g in self.g_values],
            "cells": [c.to_json_dict() for c in self.cells],
        }


def verify_equipartition(
    measures,
    planes,
    n: int,
    tol: float,
    ortho_tol: float = 1e-9,
    mode: str = "auto",
) -> EquipartitionReport:
    """Check that every n-subset of the k planes splits every measure into
    2^n parts of equal mass, and that the planes are mutually orthogonal.

    ``tol`` bounds the allowed per-cell deviation as a fraction of the
    measure's total; ``ortho_tol`` bounds |dot| between unit normals.
    """
    if isinstance(measures, WeightedPointMeasure):
        measures = [measures]
    measures = list(measures)
    if not measures:
        raise ValueError("no measures")
    tp = as_plane_tuple(planes)
    k = len(tp)
    if not 1 <= n <= k:
        raise ValueError(f"need 1 <= n <= k, got n={n}, k={k}")
    if k > tp.d:
        raise ValueError(f"{k} mutually orthogonal planes cannot exist in R^{tp.d}")
    for mu in measures:
        if mu.dim != tp.d:
            raise ValueError(f"measure in R^{mu.dim}, planes in R^{tp.d}")

    subsets = subset_constraints(k, n)
    n_subsets = [s for s in subsets if len(s) == n]
    target = 1.0 / (1 << n)

    g_records: list[GValue] = []
    cell_records: list[CellStats] = []
    max_dev = 0.0
    for mi, mu in enumerate(measures):
        exact = _resolve_exact(mode, mu, tp)
        signs = _sign_matrix(mu, tp, exact)
        total = float(mu.total)
        for s in subsets:
            prod = signs[:, s[0]].copy()
            for j in s[1:]:
                prod *= signs[:, j]
            raw = (mu.weights * prod).sum()
            val = int(raw) if exact else float(raw)
            g_records.append(GValue(mi, s, val, float(raw) / total))
        for s in n_subsets:
            masses = _cells_from_signs(signs[:, list(s)], mu.weights, exact)
            fractions = tuple(float(m) / total for m in masses)
            dev = max(abs(f - target) for f in fractions)
            max_dev = max(max_dev, dev)
            cell_records.append(
                CellStats(mi, s, tuple(masses.tolist()), fractions, dev)
            )

    ortho = tp.ortho_residual()
    passed = max_dev <= tol and ortho <= ortho_tol
    return EquipartitionReport(
        tuple(g_records), tuple(cell_records), max_dev, ortho, tol, ortho_tol, passed
    )


def moment_curve_fixture(
    m: int,
    d: int,
    samples_per_measure: int,
    gap: float = 2.0,
    seed: int = 0,
) -> list[WeightedPointMeasure]:
    """m unit-weight samples of disjoint uniform interval masses pushed onto
    the curve t -> (t, t^2, ..., t^d); measure l draws t from
    [l*gap, l*gap + 1]."""
    if m < 0 or d < 1:
        raise ValueError("need m >= 0 and d >= 1")
    if samples_per_measure < 1 and m > 0:
        raise ValueError("need at least one sample per measure")
    rng = np.random.default_rng(seed)
    measures = []
    for ell in range(1, m + 1):
        t = rng.uniform(ell * gap, ell * gap + 1.0, size=samples_per_measure)
        pts = np.column_stack([t ** i for i in range(1, d + 1)])
        measures.append(WeightedPointMeasure.from_points(pts))
    return measures


# -- file formats ----------------------------------------------------------


def load_point_file(path: str | Path) -> WeightedPointMeasure:
    """One point per line, whitespace-separated coordinates, optional
    trailing ``# weight w``.  Lines that are blank or pure comments are
    skipped; the dimension is inferred from the first point."""
    points: list[list[float]] = []
    weights: list[float] = []
    all_int = True
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        body, _, tail = line.partition("#")
        body = body.strip()
        tail = tail.strip()
        if not body:
            if tail and tail.split()[0] == "weight":
                raise ValueError(f"{path}:{lineno}: weight without a point")
            continue
        w: float = 1
        if tail:
            parts = tail.split()
            if len(parts) != 2 or parts[0] != "weight":
                raise ValueError(f"{path}:{lineno}: expected '# weight w', got {tail!r}")
            w = _parse_number(parts[1])
        coords = [_parse_number(tok) for tok in body.split()]
        if points and len(coords) != len(points[0]):
            raise ValueError(
                f"{path}:{lineno}: point of dimension {len(coords)}, expected {len(points[0])}"
            )
        if w <= 0:
            raise ValueError(f"{path}:{lineno}: weight must be positive")
        all_int = all_int and isinstance(w, int) and all(isinstance(c, int) for c in coords)
        points.append(coords)
        weights.append(w)
    if not points:
        raise ValueError(f"{path}: no points")
    dtype = np.int64 if all_int else float
    return WeightedPointMeasure(np.array(points, dtype=dtype), np.array(weights, dtype=dtype))


def _parse_number(token: str) -> float | int:
    try:
        return int(token)
    except ValueError:
        return float(token)


def load_planes_json(path: str | Path) -> HyperplaneTuple:
    """JSON array of coefficient vectors, each of length d+1; vectors are
    normalized to the unit sphere on load."""
    data = json.loads(Path(path).read_text())
    if not isinstance(data, list) or not data:
        raise ValueError(f"{path}: expected a nonempty JSON array of plane vectors")
    planes = []
    for i, row in enumerate(data):
        if not isinstance(row, list) or len(row) < 2:
            raise ValueError(f"{path}: plane {i} is not a vector of length >= 2")
        planes.append(Hyperplane.from_coefficients(row))
    return HyperplaneTuple(tuple(planes))
