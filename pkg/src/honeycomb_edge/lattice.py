"""Rational edges of the honeycomb: basis change, hopping offsets, classification.

An edge direction is the triangular-lattice vector ``a11*v1 + a12*v2`` with
coprime integer coefficients.  A transverse vector ``(a21, a22)`` completes it
to a unimodular basis, and in that basis each A-site couples to three B-sites
at offsets ``(m_nu, n_nu)``: ``m`` along the edge, ``n`` into the bulk.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import ClassicalZigzagUnsupported, IncompatibleTermination, NotCoprime

CLASSICAL_ZIGZAG_PAIRS = frozenset({(0, 1), (0, -1), (1, 0), (-1, 0), (1, -1), (-1, 1)})


class Termination(enum.Enum):
    BALANCED = "balanced"
    UNBALANCED_A_FRONTIER = "unbalanced-a"
    UNBALANCED_B_FRONTIER = "unbalanced-b"


class Kind(enum.Enum):
    ZIGZAG = "zigzag"
    ARMCHAIR = "armchair"
    CLASSICAL_ZIGZAG = "classical-zigzag"


class Balance(enum.Enum):
    BALANCED = "balanced"
    UNBALANCED = "unbalanced"


def split_mod3(x: int) -> tuple[int, int]:
    """Write ``x = 3*q + s`` with ``s`` in {-1, 0, 1}; return ``(q, s)``."""
    s = (x + 1) % 3 - 1
    return (x - s) // 3, s


@dataclass(frozen=True)
class EdgeConfig:
    a11: int
    a12: int
    a21: int
    a22: int
    n_a_min: int
    n_b_min: int
    k1: int
    k2: int
    s1: int
    s2: int

    @property
    def is_classical_zigzag(self) -> bool:
        return (self.a11, self.a12) in CLASSICAL_ZIGZAG_PAIRS

    @property
    def is_balanced(self) -> bool:
        return self.n_a_min == self.n_b_min

    @property
    def edge_length_sq(self) -> int:
        """Squared length of the edge period vector, in lattice units."""
        return self.a11 * self.a11 + self.a11 * self.a12 + self.a12 * self.a12

    def with_gauge(self, j: int) -> "EdgeConfig":
        """Same edge with ``(a21, a22)`` shifted by ``j`` edge periods."""
        a21 = self.a21 + j * self.a11
        a22 = self.a22 + j * self.a12
        k1, s1 = split_mod3(a22 - a21)
        return EdgeConfig(self.a11, self.a12, a21, a22, self.n_a_min, self.n_b_min,
                          k1, self.k2, s1, self.s2)


@dataclass(frozen=True)
class NeighborOffsets:
    m: tuple[int, int, int]
    n: tuple[int, int, int]

    @property
    def beta(self) -> tuple[int, int]:
        return self.m[1] - self.m[0], self.m[2] - self.m[0]

    @property
    def gamma(self) -> tuple[int, int]:
        return self.n[1] - self.n[0], self.n[2] - self.n[0]

    @property
    def det(self) -> int:
        b1, b2 = self.beta
        g1, g2 = self.gamma
        return b1 * g2 - b2 * g1

    @property
    def width(self) -> int:
        """``n3 - n1``, the degree of both edge polynomials."""
        return self.n[2] - self.n[0]


@dataclass(frozen=True)
class EdgeClass:
    kind: Kind
    balance: Balance
    db_minus_da: float

    @property
    def zigzag_type(self) -> bool:
        return self.kind is not Kind.ARMCHAIR


def _coerce_termination(termination) -> Termination | str:
    if isinstance(termination, Termination):
        return termination
    t = str(termination).lower().replace("_", "-")
    if t == "unbalanced":
        return t
    try:
        return Termination(t)
    except ValueError:
        raise IncompatibleTermination(f"unknown termination {termination!r}") from None


def transverse_vector(a11: int, a12: int) -> tuple[int, int]:
    """Canonical ``(a21, a22)`` with ``a11*a22 - a12*a21 = 1``.

    For ``a11 != 0`` the representative has ``0 <= a21 < |a11|``; for the
    vertical edges ``(0, +-1)`` it has ``a22 = 0``.
    """
    if a11 == 0:
        return -a12, 0
    m = abs(a11)
    a21 = (-pow(a12, -1, m)) % m if m > 1 else 0
    a22, rem = divmod(1 + a12 * a21, a11)
    assert rem == 0
    return a21, a22


def canonicalize(a11: int, a12: int, termination=Termination.BALANCED) -> EdgeConfig:
    """Build the canonical :class:`EdgeConfig` for an edge direction.

    ``termination`` is a :class:`Termination` or its string value.  The string
    ``"unbalanced"`` picks whichever unbalanced frontier the edge admits.
    """
    a11, a12 = int(a11), int(a12)
    if (a11, a12) == (0, 0) or math.gcd(a11, a12) != 1:
        raise NotCoprime(f"({a11}, {a12}) is not a primitive lattice vector")
    a21, a22 = transverse_vector(a11, a12)
    k1, s1 = split_mod3(a22 - a21)
    k2, s2 = split_mod3(a11 - a12)

    term = _coerce_termination(termination)
    if term is Termination.BALANCED:
        n_b = 0
    else:
        if s2 == 0:
            raise IncompatibleTermination("armchair-type edges are always balanced")
        # n_a_min - n_b_min must equal s2: A is the frontier row iff s2 = -1
        frontier = Termination.UNBALANCED_A_FRONTIER if s2 == -1 else Termination.UNBALANCED_B_FRONTIER
        if term != "unbalanced" and term is not frontier:
            raise IncompatibleTermination(
                f"edge ({a11}, {a12}) with s2={s2} only admits {frontier.value}")
        n_b = -s2
    return EdgeConfig(a11, a12, a21, a22, 0, n_b, k1, k2, s1, s2)


def raw_offsets(cfg: EdgeConfig) -> NeighborOffsets:
    """Offsets sorted by ``n`` without the distinctness check (ties kept stable)."""
    n_t = (cfg.k2, cfg.k2 - cfg.a11, cfg.k2 + cfg.a12)
    m_t = (cfg.k1, cfg.k1 + cfg.a21, cfg.k1 - cfg.a22)
    order = sorted(range(3), key=lambda i: n_t[i])
    return NeighborOffsets(tuple(m_t[i] for i in order), tuple(n_t[i] for i in order))


def neighbor_offsets(cfg: EdgeConfig) -> NeighborOffsets:
    """Hopping offsets ``(m, n)`` sorted so that ``n1 < n2 < n3``."""
    if cfg.is_classical_zigzag:
        raise ClassicalZigzagUnsupported(
            f"({cfg.a11}, {cfg.a12}) is a classical zigzag edge; offsets coincide")
    return raw_offsets(cfg)


def classify(cfg: EdgeConfig) -> EdgeClass:
    if cfg.is_classical_zigzag:
        kind = Kind.CLASSICAL_ZIGZAG
    elif cfg.s2 == 0:
        kind = Kind.ARMCHAIR
    else:
        kind = Kind.ZIGZAG
    balance = Balance.BALANCED if cfg.is_balanced else Balance.UNBALANCED
    diff = (math.sqrt(3) / 2 / math.sqrt(cfg.edge_length_sq)
            * (cfg.s2 / 3 + cfg.n_b_min - cfg.n_a_min))
    return EdgeClass(kind, balance, diff)
