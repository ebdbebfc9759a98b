"""Exact arithmetic in truncated polynomial rings over GF(2).

The ring F2[a_1,...,a_k] / (a_1^{c_1+1}, ..., a_k^{c_k+1}) is fixed by a tuple
of per-variable exponent caps (c_1,...,c_k).  The quotient ideal is generated
by monomials, so reduction is exact term by term: a monomial either fits under
every cap or it is zero in the quotient.  A polynomial over GF(2) is just its
support, a set of monomials; addition is symmetric difference.

Monomials are packed into single integers, one fixed-width field per variable
with a_1 in the most significant field.  Consequences used throughout:

* integer comparison of codes is lexicographic comparison of exponent vectors
  with a_1 > a_2 > ... > a_k (the canonical serialization order), and
* the product of two in-cap monomials is plain integer addition of codes
  (fields are wide enough that no carry can cross variables).

Each field carries a guard bit above the value bits, so "does this code fit
under the caps" is a single subtract-and-mask test.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

Exponents = tuple[int, ...]

#: Default cap on support / branch sizes for the expansion routines.
DEFAULT_TERM_GUARD = 1 << 25


class ExpansionGuardError(RuntimeError):
    """An expansion would exceed the configured term budget."""


@dataclass(frozen=True)
class RingSpec:
    """Truncated polynomial ring over GF(2) with caps (c_1,...,c_k).

    The zero-cap ring (all caps 0) is legal and isomorphic to GF(2); it is the
    natural home of full-degree criterion products.
    """

    caps: Exponents
    _shifts: tuple[int, ...] = field(init=False, repr=False, compare=False)
    _vmasks: tuple[int, ...] = field(init=False, repr=False, compare=False)
    _var_codes: tuple[int, ...] = field(init=False, repr=False, compare=False)
    _guards: int = field(init=False, repr=False, compare=False)
    _caps_guarded: int = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        caps = tuple(int(c) for c in self.caps)
        if not caps:
            raise ValueError("a ring needs at least one variable")
        if any(c < 0 for c in caps):
            raise ValueError(f"caps must be nonnegative, got {caps}")
        object.__setattr__(self, "caps", caps)
        # Value bits must hold 2*cap (transient products of two in-cap
        # exponents); one guard bit sits on top of each field.
        widths = [max(1, (2 * c).bit_length()) + 1 for c in caps]
        shifts: list[int] = []
        pos = 0
        for w in reversed(widths):
            shifts.append(pos)
            pos += w
        shifts.reverse()
        vmasks = tuple((1 << (w - 1)) - 1 for w in widths)
        guards = 0
        caps_packed = 0
        for c, w, s in zip(caps, widths, shifts):
            guards |= 1 << (s + w - 1)
            caps_packed |= c << s
        object.__setattr__(self, "_shifts", tuple(shifts))
        object.__setattr__(self, "_vmasks", vmasks)
        object.__setattr__(self, "_var_codes", tuple(1 << s for s in shifts))
        object.__setattr__(self, "_guards", guards)
        object.__setattr__(self, "_caps_guarded", caps_packed | guards)

    @property
    def k(self) -> int:
        return len(self.caps)

    def pack(self, exponents: Sequence[int]) -> int:
        """Pack an exponent vector; the monomial must fit under the caps."""
        exponents = tuple(int(e) for e in exponents)
        if len(exponents) != self.k:
            raise ValueError(f"expected {self.k} exponents, got {len(exponents)}")
        code = 0
        for e, c, s in zip(exponents, self.caps, self._shifts):
            if not 0 <= e <= c:
                raise ValueError(f"exponent {e} outside cap {c}")
            code |= e << s
        return code

    def unpack(self, code: int) -> Exponents:
        return tuple((code >> s) & m for s, m in zip(self._shifts, self._vmasks))

    def within_caps(self, code: int) -> bool:
        g = self._guards
        return (self._caps_guarded - code) & g == g

    def degree(self, code: int) -> int:
        return sum((code >> s) & m for s, m in zip(self._shifts, self._vmasks))


def ring_new(caps: Sequence[int]) -> RingSpec:
    """Create the truncated ring with the given per-variable exponent caps."""
    return RingSpec(tuple(caps))


class F2Poly:
    """GF(2) polynomial in a capped ring, stored as a frozenset of codes.

    Immutable; all operations return new polynomials.  Safe to share across
    threads.
    """

    __slots__ = ("ring", "codes")

    def __init__(self, ring: RingSpec, codes: frozenset[int] = frozenset()):
        # codes are trusted to be packed and within caps
        self.ring = ring
        self.codes = codes

    @classmethod
    def zero(cls, ring: RingSpec) -> "F2Poly":
        return cls(ring, frozenset())

    @classmethod
    def one(cls, ring: RingSpec) -> "F2Poly":
        return cls(ring, frozenset({0}))

    @classmethod
    def variable(cls, ring: RingSpec, index: int) -> "F2Poly":
        """The generator a_{index+1}; zero if its cap is 0."""
        code = ring._var_codes[index]
        if not ring.within_caps(code):
            return cls.zero(ring)
        return cls(ring, frozenset({code}))

    @classmethod
    def from_monomials(cls, ring: RingSpec, monomials: Iterable[Sequence[int]]) -> "F2Poly":
        codes = [ring.pack(m) for m in monomials]
        if len(set(codes)) != len(codes):
            raise ValueError("duplicate monomials in support")
        return cls(ring, frozenset(codes))

    # -- queries ---------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.codes

    def __bool__(self) -> bool:
        return bool(self.codes)

    def __len__(self) -> int:
        return len(self.codes)

    def monomials(self) -> list[Exponents]:
        """Support in canonical order: descending lex with a_1 > ... > a_k."""
        return [self.ring.unpack(c) for c in sorted(self.codes, reverse=True)]

    def max_monomial(self) -> Exponents | None:
        """Lexicographically greatest monomial of the support, if any."""
        if not self.codes:
            return None
        return self.ring.unpack(max(self.codes))

    def contains(self, monomial: Sequence[int]) -> bool:
        return self.ring.pack(monomial) in self.codes

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        if not self.codes:
            return -1
        return max(self.ring.degree(c) for c in self.codes)

    # -- arithmetic ------------------------------------------------------

    def _check_ring(self, other: "F2Poly") -> None:
        if self.ring != other.ring:
            raise ValueError(f"ring mismatch: {self.ring.caps} vs {other.ring.caps}")

    def __add__(self, other: "F2Poly") -> "F2Poly":
        self._check_ring(other)
        return F2Poly(self.ring, self.codes ^ other.codes)

    def __mul__(self, other: "F2Poly") -> "F2Poly":
        self._check_ring(other)
        ring = self.ring
        cg, g = ring._caps_guarded, ring._guards
        big, small = self.codes, other.codes
        if len(big) < len(small):
            big, small = small, big
        out: set[int] = set()
        for b in small:
            layer = {a + b for a in big}
            out ^= {s for s in layer if (cg - s) & g == g}
        return F2Poly(ring, frozenset(out))

    def square(self) -> "F2Poly":
        # over GF(2) the cross terms cancel in pairs
        ring = self.ring
        cg, g = ring._caps_guarded, ring._guards
        doubled = {2 * c for c in self.codes}
        return F2Poly(ring, frozenset(s for s in doubled if (cg - s) & g == g))

    def __pow__(self, exponent: int) -> "F2Poly":
        if exponent < 0:
            raise ValueError("negative exponent")
        result = F2Poly.one(self.ring)
        for bit in bin(exponent)[2:]:
            result = result.square()
            if bit == "1":
                result = result * self
        return result

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, F2Poly):
            return NotImplemented
        return self.ring == other.ring and self.codes == other.codes

    def __hash__(self) -> int:
        return hash((self.ring, self.codes))

    def __str__(self) -> str:
        if not self.codes:
            return "0"
        terms = []
        for mono in self.monomials():
            factors = [
                f"a{j + 1}" if e == 1 else f"a{j + 1}^{e}"
                for j, e in enumerate(mono)
                if e
            ]
            terms.append("*".join(factors) if factors else "1")
        return " + ".join(terms)

    def __repr__(self) -> str:
        return f"F2Poly(caps={self.ring.caps}, {self})"


# -- spec-level operation aliases ---------------------------------------


def poly_add(p: F2Poly, q: F2Poly) -> F2Poly:
    """Sum over GF(2): symmetric difference of supports."""
    return p + q


def poly_mul(p: F2Poly, q: F2Poly) -> F2Poly:
    """Product with term-wise truncation at the caps (exact in the quotient)."""
    return p * q


def poly_pow(p: F2Poly, exponent: int) -> F2Poly:
    """Repeated truncated product; p**0 is 1."""
    return p ** exponent


def is_zero(p: F2Poly) -> bool:
    return p.is_zero


def contains_monomial(p: F2Poly, monomial: Sequence[int]) -> bool:
    return p.contains(monomial)


def _check_bits(eps: Sequence[int], k: int) -> tuple[int, ...]:
    bits = tuple(int(b) for b in eps)
    if len(bits) != k:
        raise ValueError(f"form of length {len(bits)} in a ring with {k} variables")
    if any(b not in (0, 1) for b in bits):
        raise ValueError(f"form entries must be bits, got {bits}")
    return bits


def linear_form(eps: Sequence[int], ring: RingSpec) -> F2Poly:
    """Sum of the generators a_j selected by the bit vector eps."""
    bits = _check_bits(eps, ring.k)
    codes = {
        vc
        for vc, b in zip(ring._var_codes, bits)
        if b and ring.within_caps(vc)
    }
    return F2Poly(ring, frozenset(codes))


def product_of_forms(
    forms: Sequence[Sequence[int]],
    ring: RingSpec,
    max_terms: int = DEFAULT_TERM_GUARD,
) -> F2Poly:
    """Truncated product of linear forms, one bit vector per factor.

    Factors are multiplied in ascending Hamming-weight order.  Every
    intermediate is homogeneous (each factor raises the total degree by
    exactly one), so the headroom prune is a single comparison: once the sum
    of the caps cannot absorb the factors still to come, the product is zero.
    """
    bit_forms = sorted(
        (_check_bits(f, ring.k) for f in forms),
        key=lambda f: (sum(f), f),
    )
    capsum = sum(ring.caps)
    if len(bit_forms) > capsum:
        return F2Poly.zero(ring)
    cg, g = ring._caps_guarded, ring._guards
    var_codes = ring._var_codes
    support: set[int] = {0}
    for f in bit_forms:
        nxt: set[int] = set()
        for j, b in enumerate(f):
            if not b:
                continue
            vc = var_codes[j]
            layer = {c + vc for c in support}
            nxt ^= {s for s in layer if (cg - s) & g == g}
        support = nxt
        if not support:
            break
        if len(support) > max_terms:
            raise ExpansionGuardError(
                f"intermediate support of {len(support)} terms exceeds guard {max_terms}"
            )
    return F2Poly(ring, frozenset(support))


def free_expand_oracle(
    forms: Sequence[Sequence[int]],
    caps: Sequence[int],
    branch_guard: int = DEFAULT_TERM_GUARD,
) -> F2Poly:
    """Reference expansion of a product of linear forms.

    Distributes every choice of one term per factor in the free ring, reduces
    the coefficients mod 2, and truncates once at the end.  Exponentially slow
    by design; it exists to cross-check :func:`product_of_forms` and is
    guarded by the total branch count.
    """
    ring = RingSpec(tuple(caps))
    k = ring.k
    term_lists = [
        tuple(j for j, b in enumerate(_check_bits(f, k)) if b) for f in forms
    ]
    branches = 1
    for t in term_lists:
        branches *= len(t)
    if branches > branch_guard:
        raise ExpansionGuardError(
            f"{branches} branches exceed guard {branch_guard}"
        )
    counts: Counter[Exponents] = Counter()
    for choice in itertools.product(*term_lists):
        e = [0] * k
        for j in choice:
            e[j] += 1
        counts[tuple(e)] += 1
    support = [
        e
        for e, c in counts.items()
        if c & 1 and all(x <= cap for x, cap in zip(e, ring.caps))
    ]
    return F2Poly.from_monomials(ring, support)


# -- JSON serialization --------------------------------------------------


def poly_to_dict(p: F2Poly) -> dict:
    """Canonical JSON form: caps plus monomials in descending lex order."""
    return {"caps": list(p.ring.caps), "monomials": [list(m) for m in p.monomials()]}


def poly_from_dict(data: dict) -> F2Poly:
    ring = RingSpec(tuple(data["caps"]))
    return F2Poly.from_monomials(ring, data["monomials"])
