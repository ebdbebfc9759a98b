"""Nonvanishing criteria for products of linear forms over GF(2).

A group element of (Z/2)^k is a bit vector; its linear form is the matching
sum of ring generators.  The decision procedures here answer one question:
does the product of the chosen linear forms survive in a capped quotient
ring?  A nonzero product certifies that every equivariant map of the matching
sphere-product or frame manifold into the matching sign representation must
hit zero; a zero product certifies nothing.

The module also realizes the Smith-operator calculus on classes of products
of antipodal spheres.  A class is identified with a monomial of the capped
ring (exponents = top degrees minus the class degrees), under which every
Smith step is multiplication by a linear form, with truncation discarding the
classes whose degree would go negative.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from . import bounds
from .f2ring import (
    DEFAULT_TERM_GUARD,
    F2Poly,
    RingSpec,
    linear_form,
    product_of_forms,
)

Exponents = tuple[int, ...]


@dataclass(frozen=True)
class GroupElement:
    """Element of (Z/2)^k as a bit vector; selects a linear form."""

    eps: tuple[int, ...]

    def __post_init__(self) -> None:
        bits = tuple(int(b) for b in self.eps)
        if not bits:
            raise ValueError("group element needs at least one coordinate")
        if any(b not in (0, 1) for b in bits):
            raise ValueError(f"coordinates must be bits, got {bits}")
        object.__setattr__(self, "eps", bits)

    @classmethod
    def from_bits(cls, text: str) -> "GroupElement":
        """Parse a bit string such as "101"; leftmost bit is the first slot."""
        if not text or any(ch not in "01" for ch in text):
            raise ValueError(f"not a bit string: {text!r}")
        return cls(tuple(int(ch) for ch in text))

    @property
    def k(self) -> int:
        return len(self.eps)

    @property
    def weight(self) -> int:
        return sum(self.eps)

    @property
    def is_zero(self) -> bool:
        return self.weight == 0

    def __str__(self) -> str:
        return "".join(str(b) for b in self.eps)


def coerce_element(value, k: int | None = None) -> GroupElement:
    """Accept a GroupElement, a bit string, or a bit sequence."""
    if isinstance(value, GroupElement):
        elem = value
    elif isinstance(value, str):
        elem = GroupElement.from_bits(value)
    else:
        elem = GroupElement(tuple(value))
    if k is not None and elem.k != k:
        raise ValueError(f"element {elem} has {elem.k} slots, expected {k}")
    return elem


@dataclass(frozen=True)
class SphereProductClass:
    """Class of a product of antipodal spheres, keyed by sphere dimensions."""

    degrees: tuple[int, ...]

    def __post_init__(self) -> None:
        degrees = tuple(int(d) for d in self.degrees)
        if not degrees:
            raise ValueError("need at least one sphere factor")
        if any(d < 0 for d in degrees):
            raise ValueError(f"degrees must be nonnegative, got {degrees}")
        object.__setattr__(self, "degrees", degrees)

    @property
    def k(self) -> int:
        return len(self.degrees)


@dataclass(frozen=True)
class SphereClassSum:
    """GF(2) combination of sphere-product classes under a fixed top class.

    Stored as a polynomial in the ring capped at the top degrees; the monomial
    with exponents e stands for the class with degrees top - e, so Smith
    steps become ring multiplications and ring truncation exactly drops the
    classes whose degree would turn negative.
    """

    top: tuple[int, ...]
    poly: F2Poly

    @property
    def is_zero(self) -> bool:
        return self.poly.is_zero

    def classes(self) -> frozenset[SphereProductClass]:
        return frozenset(
            SphereProductClass(tuple(t - e for t, e in zip(self.top, mono)))
            for mono in self.poly.monomials()
        )


def smith_apply(
    q: GroupElement,
    target: SphereProductClass | SphereClassSum,
) -> SphereClassSum:
    """One Smith-operator step: multiply by the linear form of q.

    Applied to a class with degrees (i_1,...,i_k), the result is the GF(2)
    sum of the classes with one selected degree lowered by one, terms with a
    negative degree dropped.
    """
    if q.is_zero:
        raise ValueError("the zero element has a zero linear form; not a valid operator")
    if isinstance(target, SphereProductClass):
        top = target.degrees
        ring = RingSpec(top)
        poly = F2Poly.one(ring)
    else:
        top = target.top
        ring = target.poly.ring
        poly = target.poly
    if q.k != len(top):
        raise ValueError(f"element has {q.k} slots, class has {len(top)}")
    return SphereClassSum(top, poly * linear_form(q.eps, ring))


@dataclass(frozen=True)
class CriterionReport:
    """Outcome of a nonvanishing test.

    ``witness`` is a monomial surviving in the product when nonzero: the
    lexicographically greatest one under full expansion, or the certified
    monomial when a cheap certificate decided the instance.
    """

    nonzero: bool
    witness: Exponents | None
    ring: RingSpec
    method: str  # "certificate" or "full-expansion"

    def __post_init__(self) -> None:
        if self.nonzero and self.witness is None:
            raise ValueError("a nonzero report needs a witness")

    def to_json_dict(self) -> dict:
        return {
            "nonzero": self.nonzero,
            "witness": list(self.witness) if self.witness is not None else None,
            "caps": list(self.ring.caps),
            "method": self.method,
        }


def _extreme_witnesses(elems: Sequence[GroupElement], k: int) -> tuple[Exponents, Exponents]:
    """Lex-greatest and lex-least monomials of the free product of the forms.

    The extreme monomial of a product is the product of the factors' extreme
    terms (a_j with j the most / least significant set bit), and it is the
    unique maximizer / minimizer, so over GF(2) its coefficient is 1.  Either
    one fitting the caps certifies a nonzero truncated product.
    """
    hi = [0] * k
    lo = [0] * k
    for e in elems:
        hi[e.eps.index(1)] += 1
        lo[k - 1 - e.eps[::-1].index(1)] += 1
    return tuple(hi), tuple(lo)


def criterion_spheres(
    targets: Sequence,
    dims: Sequence[int],
    max_terms: int = DEFAULT_TERM_GUARD,
) -> CriterionReport:
    """Decide whether the product of the targets' linear forms survives in
    the ring capped at dims.

    Cheap certificates are tried first: the global degree bound, products of
    single-variable forms (a lone monomial, decided exactly either way), and
    the surviving lex-extreme witnesses.  Anything else is decided by
    expansion.
    """
    dims = tuple(int(d) for d in dims)
    ring = RingSpec(dims)
    elems = [coerce_element(t, k=len(dims)) for t in targets]
    for e in elems:
        if e.is_zero:
            raise ValueError("zero target: its linear form is 0, the product vanishes trivially")

    if len(elems) > sum(dims):
        return CriterionReport(False, None, ring, "certificate")

    hi, lo = _extreme_witnesses(elems, ring.k)
    if all(e <= cap for e, cap in zip(hi, dims)):
        return CriterionReport(True, hi, ring, "certificate")
    if all(e.weight == 1 for e in elems):
        # the whole product is the single monomial hi, and it exceeds a cap
        return CriterionReport(False, None, ring, "certificate")
    if all(e <= cap for e, cap in zip(lo, dims)):
        return CriterionReport(True, lo, ring, "certificate")

    poly = product_of_forms([e.eps for e in elems], ring, max_terms=max_terms)
    return CriterionReport(bool(poly), poly.max_monomial(), ring, "full-expansion")


def criterion_stiefel(
    targets: Sequence,
    n: int,
    k: int,
    max_terms: int = DEFAULT_TERM_GUARD,
) -> CriterionReport:
    """Nonvanishing test in the ring of the orthonormal k-frame manifold in
    R^n, whose caps are (n-1, n-2, ..., n-k)."""
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    dims = tuple(n - 1 - i for i in range(k))
    return criterion_spheres(targets, dims, max_terms=max_terms)


# -- criterion polynomials ------------------------------------------------


def weight_product(
    k: int,
    j: int,
    ring: RingSpec,
    max_terms: int = DEFAULT_TERM_GUARD,
) -> F2Poly:
    """Product of the linear forms of all weight-j bit vectors of length k.

    Its degree before truncation is C(k, j).
    """
    if not 1 <= j <= k:
        raise ValueError(f"need 1 <= j <= k, got j={j}, k={k}")
    if ring.k != k:
        raise ValueError(f"ring has {ring.k} variables, expected {k}")
    forms = []
    for ones in itertools.combinations(range(k), j):
        e = [0] * k
        for i in ones:
            e[i] = 1
        forms.append(tuple(e))
    return product_of_forms(forms, ring, max_terms=max_terms)


def partition_product(
    k: int,
    n: int,
    ring: RingSpec,
    max_terms: int = DEFAULT_TERM_GUARD,
) -> F2Poly:
    """Product of the linear forms of all bit vectors of weight 1..n.

    Its degree before truncation is ``constraint_count(n, k)``; the m-th power
    surviving in the staircase ring drives the orthogonal upper bound.
    """
    if not 1 <= n <= k:
        raise ValueError(f"need 1 <= n <= k, got n={n}, k={k}")
    if ring.k != k:
        raise ValueError(f"ring has {ring.k} variables, expected {k}")
    forms = [
        e
        for e in itertools.product((0, 1), repeat=k)
        if 1 <= sum(e) <= n
    ]
    return product_of_forms(forms, ring, max_terms=max_terms)


def partition_product_perm_sum(
    k: int,
    n: int,
    ring: RingSpec | None = None,
) -> F2Poly:
    """Closed form of :func:`partition_product` as a sum over permutations.

    The exponent pattern is (peak_exponent(n, k), ..., peak_exponent(n, 1));
    each distinct rearrangement contributes exactly one monomial.  For n >= 2
    the pattern entries are strictly decreasing and this is the plain sum over
    all k! permutations; for n = 1 the pattern is constant and collapsing the
    repeats to a single monomial is what matches the expanded product (the
    even-multiplicity reading would cancel it to zero).
    """
    if not 1 <= n <= k:
        raise ValueError(f"need 1 <= n <= k, got n={n}, k={k}")
    if k > 7:
        raise ValueError("factorial guard: k <= 7")
    pattern = tuple(bounds.peak_exponent(n, j) for j in range(k, 0, -1))
    if ring is None:
        cap = bounds.constraint_count(n, k)
        ring = RingSpec((cap,) * k)
    if ring.k != k:
        raise ValueError(f"ring has {ring.k} variables, expected {k}")
    support = [
        e
        for e in set(itertools.permutations(pattern))
        if all(x <= cap for x, cap in zip(e, ring.caps))
    ]
    return F2Poly.from_monomials(ring, support)


# -- explicit upper-bound certificate -------------------------------------


@dataclass(frozen=True)
class UpperBoundCertificate:
    """Candidate witness monomial for the orthogonal upper bound.

    Writing m = 2^q + r with 0 <= r < 2^q, the certificate lives in the
    staircase ring with caps (dimension, dimension-1, ..., dimension-k+1)
    where dimension = 2^q * peak_exponent(n, k) + r, and ``exponents`` is the
    monomial obtained from the 2^q-th power of the extreme pattern times the
    r-th power of the reversed pattern.  ``ok`` records whether it fits the
    staircase caps (it does on the whole scanned range, see
    :func:`certificate_margin_scan`).

    Fitting the caps does not by itself prove the monomial survives mod-2
    cancellation in the m-th power of the criterion product.  It provably
    does when r = 0 (the power map is injective on monomials and the extreme
    pattern is the unique maximizer); for r > 0 survival must be checked
    against the expanded power, and it can genuinely fail, the smallest case
    being (m, k, n) = (3, 3, 3).
    """

    m: int
    k: int
    n: int
    dimension: int
    exponents: Exponents
    ok: bool

    @property
    def caps(self) -> Exponents:
        return tuple(self.dimension - i for i in range(self.k))

    def to_json_dict(self) -> dict:
        return {
            "m": self.m,
            "k": self.k,
            "n": self.n,
            "dimension": self.dimension,
            "exponents": list(self.exponents),
            "caps": list(self.caps),
            "ok": self.ok,
        }


def upper_bound_certificate(m: int, k: int, n: int) -> UpperBoundCertificate:
    if m < 1:
        raise ValueError("m must be >= 1")
    if not 1 <= n <= k:
        raise ValueError(f"need 1 <= n <= k, got n={n}, k={k}")
    q = m.bit_length() - 1
    r = m - (1 << q)
    beta = [bounds.peak_exponent(n, j) for j in range(1, k + 1)]  # beta[j-1]
    dimension = (1 << q) * beta[k - 1] + r
    exponents = tuple(
        (1 << q) * beta[k - j] + r * beta[j - 1] for j in range(1, k + 1)
    )
    caps = tuple(dimension - i for i in range(k))
    ok = all(e <= c for e, c in zip(exponents, caps))
    return UpperBoundCertificate(m, k, n, dimension, exponents, ok)


# -- exhaustive margin scan ------------------------------------------------


@dataclass(frozen=True)
class MarginScan:
    """Result of sweeping the certificate margins d_0 - d_i - i.

    A violation (negative margin) would mean the explicit certificate monomial
    fails to fit its staircase caps somewhere on the range.  Zero margins with
    i >= 1 are collected as equality witnesses; zero margins at i = 0 are only
    counted (they occur at every case).
    """

    cases: int
    violations: tuple[tuple[int, int, int, int, int], ...]
    equalities: tuple[tuple[int, int, int, int, int], ...]
    equality_count: int

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json_dict(self) -> dict:
        return {
            "cases": self.cases,
            "violations": [list(v) for v in self.violations],
            "equality_count": self.equality_count,
            "equality_examples": [list(e) for e in self.equalities[:32]],
        }


def certificate_margin_scan(
    k_max: int,
    q_max: int = 6,
    n_for_k: Callable[[int], Iterable[int]] | None = None,
) -> MarginScan:
    """Exhaustively check d_0 - d_i >= i, where
    d_i = 2^q * peak_exponent(n, k-i) + r * peak_exponent(n, i+1),
    over 2 <= n <= k <= k_max, 1 <= q <= q_max, 0 <= r < 2^q, 0 <= i < k."""
    if k_max < 2:
        raise ValueError("k_max must be >= 2")
    violations: list[tuple[int, int, int, int, int]] = []
    equalities: list[tuple[int, int, int, int, int]] = []
    cases = 0
    eq_count = 0
    for k in range(2, k_max + 1):
        ns = list(n_for_k(k)) if n_for_k is not None else list(range(2, k + 1))
        for n in ns:
            if not 2 <= n <= k:
                raise ValueError(f"scan needs 2 <= n <= k, got n={n}, k={k}")
            beta = [bounds.peak_exponent(n, j) for j in range(0, k + 1)]
            for q in range(1, q_max + 1):
                p = 1 << q
                for r in range(p):
                    d0 = p * beta[k] + r * beta[1]
                    for i in range(k):
                        cases += 1
                        di = p * beta[k - i] + r * beta[i + 1]
                        margin = d0 - di - i
                        if margin < 0:
                            violations.append((k, n, q, r, i))
                        elif margin == 0:
                            eq_count += 1
                            if i >= 1:
                                equalities.append((k, n, q, r, i))
    return MarginScan(cases, tuple(violations), tuple(equalities), eq_count)
