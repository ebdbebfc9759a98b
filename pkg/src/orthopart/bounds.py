"""Closed-form dimension bounds for equipartitions by hyperplanes.

Two binomial sums drive everything here.  For ell >= 1 and j >= 0:

* ``constraint_count(ell, j)`` = sum_{i=1}^{ell} C(j, i) -- the number of
  nonempty subsets of size at most ell of a j-element set, which is also the
  number of independent equipartition equations per measure.
* ``peak_exponent(ell, j)`` = sum_{i=0}^{ell-1} C(j-1, i) -- the extreme
  per-variable exponent of the symmetrized criterion product, and the growth
  coefficient of the upper bound.

Out-of-range binomials are zero and C(0, 0) = 1.

All ceilings are computed in exact integer arithmetic so tables of any size
carry no floating error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

CSV_HEADER = "m,k,n,lower,upper,tight,closed_form"


def _comb(n: int, r: int) -> int:
    if r < 0 or n < 0 or r > n:
        return 0
    return math.comb(n, r)


def constraint_count(ell: int, j: int) -> int:
    """Number of nonempty subsets of size <= ell in a j-element set."""
    if ell < 1:
        raise ValueError("ell must be >= 1")
    if j < 0:
        raise ValueError("j must be >= 0")
    return sum(_comb(j, i) for i in range(1, ell + 1))


def peak_exponent(ell: int, j: int) -> int:
    """Number of subsets of size < ell in a (j-1)-element set."""
    if ell < 1:
        raise ValueError("ell must be >= 1")
    if j < 0:
        raise ValueError("j must be >= 0")
    return sum(_comb(j - 1, i) for i in range(ell))


def floor_log2(m: int) -> int:
    if m < 1:
        raise ValueError("m must be >= 1")
    return m.bit_length() - 1


def _ceil_ratio(num: int, den: int) -> int:
    return -(-num // den)


def _is_pow2(x: int) -> bool:
    return x >= 1 and x & (x - 1) == 0


@dataclass(frozen=True)
class BoundRecord:
    """Lower/upper dimension bounds for one (m, k, n) instance.

    ``kind`` distinguishes the mutually-orthogonal problem ("orthogonal")
    from the unconstrained one ("free").  ``closed_form`` labels instances
    belonging to a family with a known exact value; tightness itself is
    always decided by comparing the two bounds, never by the label.
    """

    m: int
    k: int
    n: int
    lower: int
    upper: int
    tight: bool
    closed_form: str | None = None
    kind: str = "orthogonal"

    def __post_init__(self) -> None:
        if self.lower > self.upper:
            raise ValueError(f"lower {self.lower} exceeds upper {self.upper}")
        if self.tight != (self.lower == self.upper):
            raise ValueError("tight flag must equal (lower == upper)")

    def to_json_dict(self) -> dict:
        return {
            "m": self.m,
            "k": self.k,
            "n": self.n,
            "lower": self.lower,
            "upper": self.upper,
            "tight": self.tight,
            "closed_form": self.closed_form,
            "kind": self.kind,
        }

    def csv_row(self) -> str:
        cf = self.closed_form or ""
        return f"{self.m},{self.k},{self.n},{self.lower},{self.upper},{str(self.tight).lower()},{cf}"


def _closed_form_orthogonal(m: int, k: int, n: int) -> str | None:
    # exact-value families; all happen to live at n = 2 (k = 2 implies n = 2)
    if n != 2:
        return None
    if k == 2:
        if _is_pow2(m + 1):
            return "m=2^j-1,k=2"
        if m >= 2 and _is_pow2(m + 2):
            return "m=2^j-2,k=2"
        return None
    if m == 1:
        return "m=1,n=2"
    if _is_pow2(m + 1):
        return "m=2^j-1,n=2"
    return None


def partition_bounds(m: int, k: int) -> BoundRecord:
    """Dimension bounds for k hyperplanes splitting m measures into 2^k equal parts."""
    if m < 1 or k < 1:
        raise ValueError("m and k must be >= 1")
    lower = _ceil_ratio(m * ((1 << k) - 1), k)
    upper = m + ((1 << (k - 1)) - 1) * (1 << floor_log2(m))
    closed = None
    if k == 1:
        closed = "k=1"
    elif k == 2 and _is_pow2(m + 1):
        closed = "m=2^j-1,k=2"
    return BoundRecord(m, k, k, lower, upper, lower == upper, closed, kind="free")


def orthogonal_bounds(m: int, k: int, n: int | None = None) -> BoundRecord:
    """Bounds when the k hyperplanes are mutually orthogonal and every
    n-subset must split each measure into 2^n equal parts.

    n defaults to k, in which case the record specializes to the all-subsets
    problem; n = k also reproduces the same upper bound as the free problem.
    """
    if n is None:
        n = k
    if m < 1 or k < 1:
        raise ValueError("m and k must be >= 1")
    if not 1 <= n <= k:
        raise ValueError(f"need 1 <= n <= k, got n={n}, k={k}")
    a = constraint_count(n, k)
    b = peak_exponent(n, k)
    # ceil(m*a/k + (k-1)/2) as one exact rational ceiling
    lower = _ceil_ratio(2 * m * a + k * (k - 1), 2 * k)
    upper = m + (b - 1) * (1 << floor_log2(m))
    return BoundRecord(
        m, k, n, lower, upper, lower == upper, _closed_form_orthogonal(m, k, n)
    )


def stiefel_dim(n: int, k: int) -> int:
    """Dimension of the manifold of orthonormal k-frames in R^n."""
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    return n * k - k * (k + 1) // 2


def bounds_table(
    m_values: Iterable[int],
    k_values: Iterable[int],
    n_mode: int | str | Sequence[int] = "k",
) -> list[BoundRecord]:
    """Orthogonal-bound records over a grid, sorted by (k, n, m).

    ``n_mode`` is an integer (fixed subset order), the string "k" (n = k per
    row), or an explicit list of n values; combinations with n > k are
    skipped.
    """
    ms = sorted(set(int(m) for m in m_values))
    ks = sorted(set(int(k) for k in k_values))
    records = []
    for k in ks:
        if n_mode == "k":
            ns: list[int] = [k]
        elif isinstance(n_mode, int):
            ns = [n_mode]
        else:
            ns = sorted(set(int(n) for n in n_mode))
        for n in ns:
            if not 1 <= n <= k:
                continue
            for m in ms:
                records.append(orthogonal_bounds(m, k, n))
    return records


def table_to_csv(records: Sequence[BoundRecord]) -> str:
    lines = [CSV_HEADER]
    lines.extend(r.csv_row() for r in records)
    return "\n".join(lines) + "\n"
