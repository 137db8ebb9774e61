"""Finite abelian groups presented as explicit direct sums of cyclic factors.

A group is a tuple of cyclic orders; elements are coordinate vectors reduced
modulo the matching factor.  Structural constants (order, exponent, the
Davenport constant of p-groups, the derived dimension) are computed on demand
and cached.  Factor order is preserved as given so coordinates keep their
meaning; the canonical invariant-factor form is available separately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, reduce
from typing import Iterator

from .errors import GroupSpecError

__all__ = [
    "AbelianGroup",
    "GroupElement",
    "PGroupProfile",
    "QuotientSplit",
    "parse_group",
    "davenport_olson",
    "pgroup_dimension",
    "quotient_and_subgroup",
]


def _prime_power_base(n: int) -> int | None:
    """Return p when n = p**k with k >= 1 and p prime, else None."""
    if n < 2:
        return None
    p = 2
    while p * p <= n:
        if n % p == 0:
            while n % p == 0:
                n //= p
            return p if n == 1 else None
        p += 1
    return n


def _factorize(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


@dataclass(frozen=True)
class PGroupProfile:
    """Derived constants of a p-group: prime, exponent, Davenport constant, dimension."""

    p: int
    q: int
    davenport: int
    dim: int


@dataclass(frozen=True)
class AbelianGroup:
    """Direct sum of cyclic groups given by their orders.

    Factors of 1 are allowed (they arise from quotients and keep coordinate
    arity stable); user-facing specs require every factor >= 2.
    """

    factors: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(not isinstance(f, int) or f < 1 for f in self.factors):
            raise GroupSpecError(f"cyclic factors must be integers >= 1, got {self.factors!r}")

    @staticmethod
    def of(*factors: int) -> "AbelianGroup":
        return AbelianGroup(tuple(int(f) for f in factors))

    @cached_property
    def order(self) -> int:
        return math.prod(self.factors)

    @cached_property
    def exponent(self) -> int:
        return reduce(math.lcm, self.factors, 1)

    @cached_property
    def pgroup_profile(self) -> PGroupProfile | None:
        """Present exactly when every nontrivial factor is a power of one prime."""
        bases = {_prime_power_base(f) for f in self.factors if f > 1}
        if len(bases) != 1:
            return None
        p = bases.pop()
        assert p is not None
        q = self.exponent
        dav = 1 + sum(f - 1 for f in self.factors)
        return PGroupProfile(p=p, q=q, davenport=dav, dim=-(-dav // q))

    @property
    def is_pgroup(self) -> bool:
        return self.pgroup_profile is not None

    @cached_property
    def invariant_factors(self) -> tuple[int, ...]:
        """Canonical cyclic decomposition d_1 | d_2 | ... (ascending); used for cache keys."""
        prime_powers: dict[int, list[int]] = {}
        for f in self.factors:
            for p, a in _factorize(f).items():
                prime_powers.setdefault(p, []).append(p**a)
        for powers in prime_powers.values():
            powers.sort()
        chain: list[int] = []
        while any(prime_powers.values()):
            d = 1
            for powers in prime_powers.values():
                if powers:
                    d *= powers.pop()
            chain.append(d)
        return tuple(sorted(chain))

    # -- element plumbing ---------------------------------------------------

    @cached_property
    def _weights(self) -> tuple[int, ...]:
        # mixed-radix weights; lexicographic coordinate order == index order
        w = [0] * len(self.factors)
        acc = 1
        for j in range(len(self.factors) - 1, -1, -1):
            w[j] = acc
            acc *= self.factors[j]
        return tuple(w)

    @cached_property
    def identity(self) -> "GroupElement":
        return GroupElement(self, (0,) * len(self.factors))

    def element(self, coords) -> "GroupElement":
        cs = tuple(int(c) for c in coords)
        if len(cs) != len(self.factors):
            raise ValueError(f"expected {len(self.factors)} coordinates, got {len(cs)}")
        return GroupElement(self, tuple(c % f for c, f in zip(cs, self.factors)))

    def encode(self, g: "GroupElement") -> int:
        return sum(c * w for c, w in zip(g.coords, self._weights))

    def decode(self, index: int) -> "GroupElement":
        if not 0 <= index < self.order:
            raise ValueError(f"element index {index} out of range for order {self.order}")
        coords = tuple((index // w) % f for f, w in zip(self.factors, self._weights))
        return GroupElement(self, coords)

    def elements(self) -> Iterator["GroupElement"]:
        """All elements in canonical (lexicographic coordinate) order."""
        for i in range(self.order):
            yield self.decode(i)

    def spec_text(self) -> str:
        return ",".join(str(f) for f in self.factors)

    def __repr__(self) -> str:
        return f"AbelianGroup({self.spec_text()})"


@dataclass(frozen=True, repr=False)
class GroupElement:
    """Element of an AbelianGroup: one reduced residue per cyclic factor."""

    group: AbelianGroup
    coords: tuple[int, ...]

    def __post_init__(self) -> None:
        fs = self.group.factors
        if len(self.coords) != len(fs):
            raise ValueError(f"expected {len(fs)} coordinates, got {len(self.coords)}")
        if any(not 0 <= c < f for c, f in zip(self.coords, fs)):
            raise ValueError(f"coordinates {self.coords} not reduced for factors {fs}")

    def _check_same_group(self, other: "GroupElement") -> None:
        if self.group != other.group:
            raise ValueError("elements belong to different groups")

    def __add__(self, other: "GroupElement") -> "GroupElement":
        self._check_same_group(other)
        fs = self.group.factors
        return GroupElement(
            self.group, tuple((a + b) % f for a, b, f in zip(self.coords, other.coords, fs))
        )

    def __neg__(self) -> "GroupElement":
        fs = self.group.factors
        return GroupElement(self.group, tuple((-a) % f for a, f in zip(self.coords, fs)))

    def __sub__(self, other: "GroupElement") -> "GroupElement":
        return self + (-other)

    def scale(self, c: int) -> "GroupElement":
        fs = self.group.factors
        return GroupElement(self.group, tuple((a * c) % f for a, f in zip(self.coords, fs)))

    __rmul__ = scale

    @property
    def is_identity(self) -> bool:
        return all(c == 0 for c in self.coords)

    def __lt__(self, other: "GroupElement") -> bool:
        self._check_same_group(other)
        return self.coords < other.coords

    def __le__(self, other: "GroupElement") -> bool:
        self._check_same_group(other)
        return self.coords <= other.coords

    def __repr__(self) -> str:
        return "(" + ",".join(str(c) for c in self.coords) + ")"


def parse_group(spec: str) -> AbelianGroup:
    """Parse a comma-separated list of cyclic orders, each >= 2 (e.g. "3,3")."""
    parts = [s.strip() for s in str(spec).split(",")]
    if not parts or any(p == "" for p in parts):
        raise GroupSpecError(f"malformed group spec {spec!r}")
    factors = []
    for p in parts:
        if not p.isdigit():
            raise GroupSpecError(f"malformed group spec {spec!r}: {p!r} is not a decimal integer")
        n = int(p)
        if n < 2:
            raise GroupSpecError(f"cyclic factor {n} is below 2 in spec {spec!r}")
        factors.append(n)
    return AbelianGroup(tuple(factors))


def davenport_olson(group: AbelianGroup) -> int:
    """Davenport constant of a p-group: 1 + sum(factor - 1) over all factors.

    The closed form is only valid for p-groups; anything else is an error.
    """
    if group.pgroup_profile is None:
        raise ValueError(f"{group!r} is not a p-group; the closed-form Davenport constant does not apply")
    return group.pgroup_profile.davenport


def pgroup_dimension(group: AbelianGroup) -> int:
    """ceil(D(G) / exp(G)) for a p-group; an error for anything else."""
    if group.pgroup_profile is None:
        raise ValueError(f"{group!r} is not a p-group; its dimension is not defined")
    return group.pgroup_profile.dim


@dataclass(frozen=True)
class QuotientSplit:
    """Decomposition of G along a scale q dividing exp(G).

    ``quotient`` is H = G / qG with factors gcd(n_j, q); ``subgroup`` is an
    abstract copy of qG with factors n_j / gcd(n_j, q).  ``project`` maps G
    onto H, ``embed`` realizes the abstract subgroup inside G (coordinate j of
    x maps to q * x_j mod n_j), and ``unembed`` inverts embed on its image.
    """

    group: AbelianGroup
    scale: int
    quotient: AbelianGroup
    subgroup: AbelianGroup

    def project(self, g: GroupElement) -> GroupElement:
        if g.group != self.group:
            raise ValueError("element does not belong to the decomposed group")
        return GroupElement(
            self.quotient, tuple(c % h for c, h in zip(g.coords, self.quotient.factors))
        )

    def embed(self, x: GroupElement) -> GroupElement:
        if x.group != self.subgroup:
            raise ValueError("element does not belong to the abstract subgroup")
        fs = self.group.factors
        return GroupElement(self.group, tuple((self.scale * c) % f for c, f in zip(x.coords, fs)))

    def unembed(self, g: GroupElement) -> GroupElement:
        if g.group != self.group:
            raise ValueError("element does not belong to the decomposed group")
        coords = []
        for c, f in zip(g.coords, self.group.factors):
            d = math.gcd(self.scale, f)
            if c % d != 0:
                raise ValueError(f"{g!r} is not in the subgroup (coordinate {c} not divisible by {d})")
            m = f // d
            if m == 1:
                coords.append(0)
            else:
                coords.append((c // d) * pow(self.scale // d, -1, m) % m)
        return GroupElement(self.subgroup, tuple(coords))


def quotient_and_subgroup(group: AbelianGroup, q: int) -> QuotientSplit:
    """Split G along q | exp(G) into the quotient H = G/qG and the subgroup qG."""
    if q < 1 or group.exponent % q != 0:
        raise ValueError(f"scale {q} does not divide exp(G) = {group.exponent}")
    quot = AbelianGroup(tuple(math.gcd(f, q) for f in group.factors))
    sub = AbelianGroup(tuple(f // math.gcd(f, q) for f in group.factors))
    return QuotientSplit(group=group, scale=q, quotient=quot, subgroup=sub)
