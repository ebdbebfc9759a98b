"""Numerical search for mutually orthogonal equipartitioning hyperplanes.

The k planes are built from an orthonormal k-frame (the normals) plus k
offsets.  Offsets are never free variables: each one is the weighted median
of the first measure's projections onto its normal, so the k bisection
equations for that measure hold by construction and the search runs over the
frame alone.  The frame is parametrized by a chain of plane rotations whose
angle count equals the frame manifold's dimension, d*k - k*(k+1)/2.

The objective is the sum of squared normalized alternating cell sums over all
subsets of size <= n (minus the auto-satisfied singletons of the first
measure).  Side signs are hard by default; for sampled continuous measures a
steep tanh can stand in for the sign during optimization only.  Acceptance is
never self-certified: a candidate counts as solved only when the independent
cell-mass verification passes.

``pancake_solve`` is the exact discrete two-lines-in-the-plane special case,
driven by a sign-change sweep in the rotation angle.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .bounds import stiefel_dim
from .masspart import (
    EquipartitionReport,
    Hyperplane,
    HyperplaneTuple,
    WeightedPointMeasure,
    subset_constraints,
    verify_equipartition,
)


def _uniform_median(values: np.ndarray) -> float:
    # selection instead of a full sort; hot path of the solver
    n = values.size
    if n % 2 == 0:
        part = np.partition(values, (n // 2 - 1, n // 2))
        return float((part[n // 2 - 1] + part[n // 2]) / 2.0)
    return float(np.partition(values, (n - 1) // 2)[(n - 1) // 2])


def _weighted_median(values: np.ndarray, weights: np.ndarray) -> float:
    """Weighted median with the midpoint convention on an exact half split,
    lower median otherwise."""
    w = np.asarray(weights, dtype=float)
    if w.size and np.all(w == w[0]):
        return _uniform_median(np.asarray(values, dtype=float))
    order = np.argsort(values, kind="stable")
    v = values[order]
    w = w[order]
    csum = np.cumsum(w)
    target = csum[-1] / 2.0
    idx = int(np.searchsorted(csum, target, side="left"))
    if idx + 1 < v.size and csum[idx] == target:
        return float((v[idx] + v[idx + 1]) / 2.0)
    return float(v[idx])


def bisect_offset(mu: WeightedPointMeasure, direction: Sequence[float]) -> float:
    """Offset c such that {x . u = c} bisects the measure along unit u."""
    u = np.asarray(direction, dtype=float)
    if abs(float(np.linalg.norm(u)) - 1.0) > 1e-9:
        raise ValueError("direction must be a unit vector")
    if u.size != mu.dim:
        raise ValueError(f"direction in R^{u.size}, measure in R^{mu.dim}")
    return _weighted_median(np.asarray(mu.points, dtype=float) @ u, mu.weights)


def frame_param(theta: Sequence[float], d: int, k: int) -> np.ndarray:
    """Orthonormal k-frame in R^d from d*k - k*(k+1)/2 rotation angles.

    theta = 0 yields the first k standard basis vectors; the map is a smooth
    chart around them (column i consumes the d - 1 - i angles of its rotation
    block).
    """
    if not 1 <= k <= d:
        raise ValueError(f"need 1 <= k <= d, got k={k}, d={d}")
    theta = np.asarray(theta, dtype=float).ravel()
    expected = stiefel_dim(d, k)
    if theta.size != expected:
        raise ValueError(f"expected {expected} angles for (d={d}, k={k}), got {theta.size}")
    m = np.eye(d)
    t = 0
    for i in range(k):
        for j in range(i + 1, d):
            a = theta[t]
            t += 1
            c, s = math.cos(a), math.sin(a)
            col_i = m[:, i].copy()
            col_j = m[:, j].copy()
            m[:, i] = c * col_i + s * col_j
            m[:, j] = -s * col_i + c * col_j
    return np.ascontiguousarray(m[:, :k])


@dataclass(frozen=True)
class FrameConfig:
    """Orthonormal frame of normals plus bisecting offsets."""

    frame: np.ndarray    # (d, k)
    offsets: np.ndarray  # (k,)

    def __post_init__(self) -> None:
        frame = np.array(self.frame, dtype=float)
        offsets = np.array(self.offsets, dtype=float)
        if frame.ndim != 2 or offsets.shape != (frame.shape[1],):
            raise ValueError("frame must be (d, k) with k offsets")
        gram = frame.T @ frame
        if float(np.max(np.abs(gram - np.eye(frame.shape[1])))) > 1e-9:
            raise ValueError("frame columns are not orthonormal within 1e-9")
        frame.setflags(write=False)
        offsets.setflags(write=False)
        object.__setattr__(self, "frame", frame)
        object.__setattr__(self, "offsets", offsets)

    @property
    def d(self) -> int:
        return self.frame.shape[0]

    @property
    def k(self) -> int:
        return self.frame.shape[1]

    def planes(self) -> HyperplaneTuple:
        return HyperplaneTuple(
            tuple(
                Hyperplane.from_normal_offset(self.frame[:, j], float(self.offsets[j]))
                for j in range(self.k)
            )
        )

    def to_json_dict(self) -> dict:
        return {
            "frame_columns": [self.frame[:, j].tolist() for j in range(self.k)],
            "offsets": self.offsets.tolist(),
            "planes": [h.to_list() for h in self.planes()],
        }


@dataclass(frozen=True)
class SolveOptions:
    """Knobs for the multistart search.

    ``residual_tol`` and ``verify_tol`` default to sample-size-aware values
    (verify_tol = 4 / sqrt(N_min), residual_tol = verify_tol^2).
    ``smooth_width`` scales the tanh stand-in for the hard sign during
    optimization, as a fraction of each measure's point scale; None keeps
    hard signs throughout.
    """

    restarts: int = 64
    max_iters: int = 200
    residual_tol: float | None = None
    seed: int = 0
    n: int | None = None
    verify_tol: float | None = None
    ortho_tol: float = 1e-9
    smooth_width: float | None = 0.05
    threads: int = 1

    def __post_init__(self) -> None:
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.residual_tol is not None and self.residual_tol <= 0:
            raise ValueError("residual_tol must be positive")


@dataclass(frozen=True)
class SolveResult:
    config: FrameConfig
    residual: float
    verified: EquipartitionReport
    restarts_used: int
    status: str  # "solved" or "tolerance-not-met"

    def to_json_dict(self) -> dict:
        out = self.config.to_json_dict()
        out.update(
            {
                "status": self.status,
                "residual": self.residual,
                "restarts_used": self.restarts_used,
                "verification": self.verified.to_json_dict(),
            }
        )
        return out


def _as_measures(measures) -> list[WeightedPointMeasure]:
    if isinstance(measures, WeightedPointMeasure):
        measures = [measures]
    measures = list(measures)
    if not measures:
        raise ValueError("no measures")
    d = measures[0].dim
    if any(mu.dim != d for mu in measures):
        raise ValueError("measures live in different dimensions")
    return measures


class _Objective:
    """Residual evaluation shared by hard and smoothed paths."""

    def __init__(self, measures, k, n, smooth_width):
        self.measures = measures
        self.k = k
        self.d = measures[0].dim
        # singletons of the first measure are skipped during evaluation: the
        # offsets satisfy them by construction
        self.subsets = subset_constraints(k, n)
        self.smooth_width = smooth_width
        self.float_pts = [np.asarray(mu.points, dtype=float) for mu in measures]
        self.float_w = [np.asarray(mu.weights, dtype=float) for mu in measures]
        self.totals = [float(mu.total) for mu in measures]
        self.scales = [
            max(float(np.sqrt(np.mean(np.sum(p * p, axis=1)))), 1e-12)
            for p in self.float_pts
        ]

    def config(self, theta) -> FrameConfig:
        frame = frame_param(theta, self.d, self.k)
        proj0 = self.float_pts[0] @ frame
        offsets = np.array(
            [_weighted_median(proj0[:, j], self.float_w[0]) for j in range(self.k)]
        )
        return FrameConfig(frame, offsets)

    def residual(self, theta, smooth: bool) -> float:
        cfg = self.config(theta)
        total_sq = 0.0
        for li in range(len(self.measures)):
            margins = cfg.offsets - self.float_pts[li] @ cfg.frame
            if smooth and self.smooth_width:
                signs = np.tanh(margins / (self.smooth_width * self.scales[li]))
            else:
                signs = np.where(margins >= 0.0, 1.0, -1.0)
            for s in self.subsets:
                if li == 0 and len(s) == 1:
                    continue
                prod = signs[:, s[0]].copy()
                for j in s[1:]:
                    prod *= signs[:, j]
                g = float(self.float_w[li] @ prod)
                total_sq += (g / self.totals[li]) ** 2
        return total_sq


def residual(theta, measures, k: int, n: int) -> float:
    """Hard-sign residual at one frame parameter vector."""
    measures = _as_measures(measures)
    if not 1 <= n <= k:
        raise ValueError(f"need 1 <= n <= k, got n={n}, k={k}")
    return _Objective(measures, k, n, None).residual(theta, smooth=False)


def _run_restart(obj: _Objective, theta0: np.ndarray, max_iters: int, good_enough: float):
    hard0 = obj.residual(theta0, smooth=False)
    if theta0.size == 0 or hard0 <= good_enough:
        return theta0, hard0
    smooth = obj.smooth_width is not None
    res = minimize(
        lambda t: obj.residual(t, smooth=smooth),
        theta0,
        method="Nelder-Mead",
        options={
            "maxiter": max_iters,
            "xatol": 1e-7,
            "fatol": 1e-14,
        },
    )
    theta = np.asarray(res.x, dtype=float)
    hard = obj.residual(theta, smooth=False)
    if hard0 < hard:
        return theta0, hard0
    return theta, hard


def solve_orthogonal(
    measures,
    k: int,
    n: int | None = None,
    opts: SolveOptions | None = None,
) -> SolveResult:
    """Multistart search for k mutually orthogonal planes whose n-subsets
    equipartition every measure; deterministic given the seed.

    Success requires both the residual threshold and a passing independent
    verification; otherwise the best candidate is returned with status
    "tolerance-not-met".
    """
    opts = opts or SolveOptions()
    measures = _as_measures(measures)
    if n is None:
        n = opts.n if opts.n is not None else k
    d = measures[0].dim
    if not 1 <= n <= k:
        raise ValueError(f"need 1 <= n <= k, got n={n}, k={k}")
    if k > d:
        raise ValueError(f"cannot place {k} orthogonal planes in R^{d}")

    n_min = min(len(mu) for mu in measures)
    verify_tol = opts.verify_tol if opts.verify_tol is not None else 4.0 / math.sqrt(n_min)
    residual_tol = opts.residual_tol if opts.residual_tol is not None else verify_tol ** 2

    obj = _Objective(measures, k, n, opts.smooth_width)
    dim = stiefel_dim(d, k)
    rng = np.random.default_rng(opts.seed)
    starts = [np.zeros(dim)]
    for _ in range(opts.restarts - 1):
        starts.append(rng.uniform(-math.pi, math.pi, size=dim))

    def verify(theta) -> tuple[FrameConfig, EquipartitionReport]:
        cfg = obj.config(theta)
        report = verify_equipartition(
            measures, cfg.planes(), n, verify_tol, opts.ortho_tol, mode="float"
        )
        return cfg, report

    best: tuple[float, int, np.ndarray] | None = None
    batch = max(1, opts.threads)
    done = 0
    while done < len(starts):
        chunk = starts[done : done + batch]
        if batch == 1 or len(chunk) == 1:
            outcomes = [
                _run_restart(obj, t0, opts.max_iters, residual_tol) for t0 in chunk
            ]
        else:
            with ThreadPoolExecutor(max_workers=batch) as pool:
                outcomes = list(
                    pool.map(
                        lambda t0: _run_restart(obj, t0, opts.max_iters, residual_tol),
                        chunk,
                    )
                )
        for offset, (theta, hard) in enumerate(outcomes):
            idx = done + offset
            if best is None or (hard, idx) < (best[0], best[1]):
                best = (hard, idx, theta)
        done += len(chunk)
        # deterministic early exit: first restart (by index) in the completed
        # batches that meets the threshold and verifies
        for offset, (theta, hard) in enumerate(outcomes):
            idx = done - len(outcomes) + offset
            if hard <= residual_tol:
                cfg, report = verify(theta)
                if report.passed:
                    return SolveResult(cfg, hard, report, idx + 1, "solved")
    assert best is not None
    hard, idx, theta = best
    cfg, report = verify(theta)
    status = "solved" if hard <= residual_tol and report.passed else "tolerance-not-met"
    return SolveResult(cfg, hard, report, len(starts), status)


# -- exact discrete pancake (two orthogonal lines in the plane) ------------


@dataclass(frozen=True)
class PancakeResult:
    status: str  # "solved" or "failure"
    theta: float
    lines: HyperplaneTuple | None
    quadrant_masses: tuple | None
    boundary_points: int
    evaluations: int

    def to_json_dict(self) -> dict:
        return {
            "status": self.status,
            "theta": self.theta,
            "lines": [h.to_list() for h in self.lines] if self.lines else None,
            "quadrant_masses": (
                [float(q) for q in self.quadrant_masses]
                if self.quadrant_masses is not None
                else None
            ),
            "boundary_points": self.boundary_points,
            "evaluations": self.evaluations,
        }


class _PancakeState:
    __slots__ = ("c1", "c2", "strict", "withheld", "le_cell0", "u1", "u2")


def _pancake_state(theta, pts, w, norms_tol):
    u1 = np.array([math.cos(theta), math.sin(theta)])
    u2 = np.array([-u1[1], u1[0]])
    p1 = pts @ u1
    p2 = pts @ u2
    c1 = _weighted_median(p1, w)
    c2 = _weighted_median(p2, w)
    m1 = c1 - p1
    m2 = c2 - p2
    on1 = np.abs(m1) <= norms_tol
    on2 = np.abs(m2) <= norms_tol
    off = ~(on1 | on2)
    neg1 = m1 < 0
    neg2 = m2 < 0
    idx = neg1.astype(np.int64) | (neg2.astype(np.int64) << 1)
    strict = np.bincount(idx[off], weights=np.asarray(w, dtype=float)[off], minlength=4)
    st = _PancakeState()
    st.c1, st.c2, st.u1, st.u2 = c1, c2, u1, u2
    st.strict = strict
    # withheld points: (allowed cells, weight); a point on one line may join
    # either side of that line, a point on both may join any quadrant
    withheld = []
    for i in np.flatnonzero(on1 | on2):
        b1 = (True, False) if on1[i] else (bool(neg1[i]),)
        b2 = (True, False) if on2[i] else (bool(neg2[i]),)
        cells = tuple(sorted(int(x) | (int(y) << 1) for x in b1 for y in b2))
        withheld.append((cells, w[i]))
    st.withheld = withheld
    le0 = float(np.asarray(w, dtype=float)[(m1 >= -norms_tol) & (m2 >= -norms_tol)].sum())
    st.le_cell0 = le0
    return st


def _distribute(strict, withheld, quarter) -> tuple | None:
    """Assign withheld boundary weights to adjacent quadrants so every
    quadrant reaches exactly the quarter mass; None when infeasible."""
    need = [quarter - q for q in strict]
    if any(x < 0 for x in need):
        return None
    if sum(need) != sum(wt for _, wt in withheld):
        return None
    order = sorted(range(len(withheld)), key=lambda i: (len(withheld[i][0]), i))
    budget = [1 << 16]

    def place(pos: int) -> bool:
        if pos == len(order):
            return all(x == 0 for x in need)
        budget[0] -= 1
        if budget[0] < 0:
            return False
        cells, wt = withheld[order[pos]]
        for c in cells:
            if need[c] >= wt:
                need[c] -= wt
                if place(pos + 1):
                    return True
                need[c] += wt
        return False

    if not place(0):
        return None
    return tuple(quarter for _ in range(4))


def pancake_solve(points, opts: SolveOptions | None = None) -> PancakeResult:
    """Two orthogonal lines cutting a planar point mass into four equal parts.

    The angle sweeps [0, pi/2): with both lines at bisecting offsets the
    first-quadrant defect f(theta) flips sign a quarter turn later, so a sign
    change brackets a root and bisection walks into the zero plateau.  Points
    that land exactly on a line are withheld and distributed to adjacent
    deficient quadrants.  Exact quarters require the total weight to be
    divisible by four (integer weights); float weights are accepted within
    half the largest single weight.
    """
    opts = opts or SolveOptions(max_iters=128)
    mu = points if isinstance(points, WeightedPointMeasure) else WeightedPointMeasure.from_points(points)
    if mu.dim != 2:
        raise ValueError("pancake_solve works in the plane")
    pts = np.asarray(mu.points, dtype=float)
    w = np.asarray(mu.weights)
    w_float = np.asarray(w, dtype=float)
    integral = bool(np.all(w_float == np.round(w_float)))
    total = float(w_float.sum())
    norms_tol = 1e-12 * (1.0 + np.linalg.norm(pts, axis=1))
    evaluations = [0]

    if integral:
        t_int = int(round(total))
        if t_int % 4:
            return PancakeResult("failure", 0.0, None, None, 0, 0)
        quarter: float | int = t_int // 4
    else:
        quarter = total / 4.0
    slack = 0.0 if integral else 0.5 * float(w_float.max())

    def probe(theta: float):
        evaluations[0] += 1
        st = _pancake_state(theta, pts, w, norms_tol)
        cells = None
        if integral:
            strict = tuple(int(round(x)) for x in st.strict)
            wh = [(c, int(round(float(x)))) for c, x in st.withheld]
            cells = _distribute(strict, wh, int(quarter))
        else:
            if not st.withheld and max(abs(x - quarter) for x in st.strict) <= slack:
                cells = tuple(float(x) for x in st.strict)
        result = None
        if cells is not None:
            lines = HyperplaneTuple(
                (
                    Hyperplane.from_normal_offset(st.u1, st.c1),
                    Hyperplane.from_normal_offset(st.u2, st.c2),
                )
            )
            result = PancakeResult(
                "solved",
                float(theta % (math.pi / 2)),
                lines,
                cells,
                len(st.withheld),
                evaluations[0],
            )
        f = st.le_cell0 - float(quarter)
        return result, f

    res, f_lo = probe(0.0)
    if res:
        return res
    lo = 0.0
    hi = math.pi / 2
    res, f_hi = probe(hi)
    if res:
        return res

    if f_lo == 0.0 or f_hi == 0.0 or f_lo * f_hi > 0:
        # degenerate endpoints; coarse grid for a usable bracket
        found = False
        prev_t, prev_f = 0.0, f_lo
        for t in np.linspace(0.0, math.pi / 2, 65)[1:]:
            res, ft = probe(float(t))
            if res:
                return res
            if ft == 0.0:
                for eps in (1e-7, -1e-7, 1e-5, -1e-5):
                    res, _ = probe(float(t) + eps)
                    if res:
                        return res
                continue
            if prev_f != 0.0 and prev_f * ft < 0:
                lo, f_lo, hi, f_hi = prev_t, prev_f, float(t), ft
                found = True
                break
            prev_t, prev_f = float(t), ft
        if not found:
            return PancakeResult("failure", 0.0, None, None, 0, evaluations[0])

    for _ in range(opts.max_iters):
        mid = 0.5 * (lo + hi)
        res, fm = probe(mid)
        if res:
            return res
        if fm == 0.0:
            for eps in (1e-9, -1e-9, 1e-7, -1e-7):
                res, _ = probe(mid + eps * (hi - lo))
                if res:
                    return res
            hi = mid  # deterministic shrink through a degenerate zero
        elif (fm > 0) == (f_lo > 0):
            lo, f_lo = mid, fm
        else:
            hi, f_hi = mid, fm
        if hi - lo < 1e-14:
            break
    return PancakeResult("failure", 0.5 * (lo + hi), None, None, 0, evaluations[0])
