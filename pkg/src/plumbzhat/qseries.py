"""Sparse q-series: exact rational exponents, integer coefficients, explicit order.

A series knows the truncation order it was computed to; comparing two series
past their common order is refused rather than silently answered.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping


class TruncationError(ValueError):
    """A comparison was requested beyond the order a series is known to."""


class QSeries:
    __slots__ = ("terms", "order")

    def __init__(self, terms: Mapping[Fraction, int] | Iterable[tuple[Fraction, int]],
                 order: Fraction | int):
        items = terms.items() if isinstance(terms, Mapping) else terms
        clean: dict[Fraction, int] = {}
        self.order = Fraction(order)
        for e, c in items:
            e = Fraction(e)
            if not isinstance(c, int) or isinstance(c, bool):
                raise TypeError(f"coefficient {c!r} is not an integer")
            if e > self.order:
                raise ValueError(f"term at exponent {e} exceeds order {self.order}")
            if c:
                clean[e] = clean.get(e, 0) + c
                if not clean[e]:
                    del clean[e]
        self.terms = clean

    @classmethod
    def zero(cls, order) -> "QSeries":
        return cls({}, order)

    @classmethod
    def one(cls, order) -> "QSeries":
        return cls({Fraction(0): 1}, order)

    def is_zero(self) -> bool:
        return not self.terms

    def items_sorted(self) -> list[tuple[Fraction, int]]:
        return sorted(self.terms.items())

    def add(self, other: "QSeries") -> "QSeries":
        order = min(self.order, other.order)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return QSeries({e: c for e, c in out.items() if e <= order}, order)

    def scale_shift(self, c: int, d: Fraction | int = 0) -> "QSeries":
        """Multiply every coefficient by c and every exponent shift by d."""
        d = Fraction(d)
        return QSeries({e + d: c * k for e, k in self.terms.items()},
                       self.order + d)

    def __add__(self, other):
        return self.add(other)

    def __neg__(self):
        return self.scale_shift(-1)

    def __eq__(self, other):
        return (isinstance(other, QSeries) and self.order == other.order
                and self.terms == other.terms)

    def __hash__(self):
        return hash((self.order, frozenset(self.terms.items())))

    def __repr__(self):
        head = ", ".join(f"{c}*q^{e}" for e, c in self.items_sorted()[:4])
        more = "..." if len(self.terms) > 4 else ""
        return f"QSeries({head}{more}; order={self.order})"


def equal_to_order(a: QSeries, b: QSeries, n: Fraction | int) -> bool:
    """Exact coefficient agreement for every exponent <= n."""
    n = Fraction(n)
    if a.order < n or b.order < n:
        raise TruncationError(
            f"insufficient truncation: orders {a.order}, {b.order} < {n}"
        )
    return ({e: c for e, c in a.terms.items() if e <= n}
            == {e: c for e, c in b.terms.items() if e <= n})
