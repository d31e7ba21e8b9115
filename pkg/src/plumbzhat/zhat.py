"""Direct evaluation of the signed binomially weighted lattice sum.

This is the independent reference path: it enumerates the sign assignments
and the lattice shells of the positive definite form directly, with a
rigorous exact termination bound.  The hot loop clears all denominators
once and runs on plain integers; exponents are reduced back to exact
rationals only for accepted terms.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from itertools import product as iproduct
from math import comb, gcd, isqrt
from typing import Callable, Iterable, Sequence

from .plumbing import (
    NotNegativeDefiniteError,
    PlumbedGraph,
    QuadraticForm,
    is_negative_definite,
    theta_form,
)
from .qseries import QSeries

PLUS, MINUS = 1, -1


def thread_count() -> int:
    raw = os.environ.get("PLUMB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def map_shells(fn: Callable, shells: Iterable):
    """Apply fn to independent summation shells, optionally on a thread pool
    capped by PLUMB_THREADS; results merge additively so order is irrelevant."""
    shells = list(shells)
    workers = min(thread_count(), max(1, len(shells)))
    if workers == 1:
        return [fn(s) for s in shells]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, shells))


def _ceil_sqrt(x: Fraction) -> int:
    """Smallest integer b with b*b >= x, exactly."""
    if x <= 0:
        return 0
    b = isqrt(x.numerator // x.denominator)
    while b * b < x:
        b += 1
    return b


def enumeration_bound(form: QuadraticForm, order: Fraction | int) -> dict[str, int]:
    """Per-coordinate bounds B_v with: |x_v| > B_v implies the form value
    exceeds the order.  Pinning coordinate v to t leaves a minimum of
    t^2 / (S^-1)_vv over the other coordinates, so B_v^2 >= order * (S^-1)_vv
    is a rigorous cut, computed exactly."""
    order = Fraction(order)
    inv = form.inverse()
    return {
        v: _ceil_sqrt(order * inv[i][i])
        for i, v in enumerate(form.vertices)
    }


class FormGrid:
    """Exact integerized evaluation of the form on vectors in (1/d) Z^k.

    The form is decomposed once as U diag(D) U^T with U unit upper
    triangular (exact rationals), so with z = U^T x the value is the sum of
    D_i z_i^2 and z_i depends only on x_1..x_i.  Everything is scaled to
    integers: pushing one more coordinate updates a running numerator in
    O(i) integer operations, and the partial sum is exactly the minimum of
    the form over all completions of the prefix, making enumeration
    subtrees prunable with no approximation.
    """

    def __init__(self, form: QuadraticForm, lattice_denominator: int):
        k = len(form.vertices)
        self.vertices = form.vertices
        self.lattice_denominator = lattice_denominator
        s = form.matrix

        # LDL^T of the index-reversed matrix gives S = U diag(D) U^T
        rev = [[s[k - 1 - a][k - 1 - b] for b in range(k)] for a in range(k)]
        low = [[Fraction(0)] * k for _ in range(k)]
        diag_rev = [Fraction(0)] * k
        for i in range(k):
            acc = rev[i][i]
            for m in range(i):
                acc -= low[i][m] ** 2 * diag_rev[m]
            diag_rev[i] = acc
            assert acc > 0
            low[i][i] = Fraction(1)
            for j in range(i + 1, k):
                val = rev[j][i]
                for m in range(i):
                    val -= low[j][m] * low[i][m] * diag_rev[m]
                low[j][i] = val / acc
        upper = [[low[k - 1 - a][k - 1 - b] for b in range(k)] for a in range(k)]
        diag = [diag_rev[k - 1 - i] for i in range(k)]

        # z_i = (u_i + sum_{j<i} upper[j][i] u_j) / d, cleared to integers
        self.rows: list[tuple[int, ...]] = []
        self.weights: list[int] = []
        denom = 1
        raw = []
        for i in range(k):
            r = 1
            for j in range(i):
                r = r // gcd(r, upper[j][i].denominator) * upper[j][i].denominator
            row = tuple(int(upper[j][i] * r) for j in range(i)) + (r,)
            self.rows.append(row)
            w = diag[i] / (r * lattice_denominator) ** 2
            raw.append(w)
            denom = denom // gcd(denom, w.denominator) * w.denominator
        self.denominator = denom
        self.weights = [int(w * denom) for w in raw]

    def push(self, u: Sequence[int], running: int) -> int:
        """Running numerator after appending u[-1]; running is the value for
        the prefix without it.  running/denominator is the exact minimum of
        the form over completions, and the full-length value is the form
        value itself."""
        i = len(u) - 1
        row = self.rows[i]
        z = 0
        for j in range(i + 1):
            c = row[j]
            if c:
                z += c * u[j]
        return running + self.weights[i] * z * z

    def value_numerator(self, u: Sequence[int]) -> int:
        running = 0
        for i in range(len(u)):
            running = self.push(u[: i + 1], running)
        return running

    def exponent(self, u: Sequence[int]) -> Fraction:
        return Fraction(self.value_numerator(u), self.denominator)

    def exceeds(self, running: int, order: Fraction) -> bool:
        return running * order.denominator > order.numerator * self.denominator

    def prefix_exceeds(self, u_prefix: Sequence[int], order: Fraction) -> bool:
        """True when every completion of the prefix has form value > order."""
        return self.exceeds(self.value_numerator(u_prefix), order)


def lattice_denominator(pg: PlumbedGraph) -> int:
    """2 * lcm of the absolute leaf weights: every shell vector lies in
    (1/this) Z over the internal vertices."""
    leaves, _, _ = pg.tree.degree_partition()
    l = 1
    for i in leaves:
        w = abs(pg.weights[i])
        l = l // gcd(l, w) * w
    return 2 * l


def zhat_bosonic(pg: PlumbedGraph, order: Fraction | int,
                 bound_slack: int = 0) -> QSeries:
    """The series of the plumbing, truncated at the given exponent order.

    Sums over node signs e, leaf signs eps and node shell indices n the
    term sign * binomials * q^(form value), with every exponent exact.
    """
    order = Fraction(order)
    w = pg.linking_matrix()
    if not is_negative_definite(w):
        raise NotNegativeDefiniteError("linking matrix is not negative definite")
    tree = pg.tree
    leaves, _, nodes = tree.degree_partition()
    form = theta_form(pg)
    internal = list(form.vertices)
    node_list = sorted(nodes)
    leaf_list = sorted(leaves)
    node_pos = [internal.index(v) for v in node_list]
    is_node = [v in nodes for v in internal]
    bounds = enumeration_bound(form, order)

    d = lattice_denominator(pg)
    grid = FormGrid(form, d)

    degree = {v: tree.degree(v) for v in internal}
    leaf_nbrs = {v: tree.leaf_neighbors(v) for v in internal}
    binom_shift = {v: degree[v] - 3 for v in node_list}
    e_exponent = {v: degree[v] - len(leaf_nbrs[v]) for v in node_list}

    shells = [dict(zip(leaf_list, combo))
              for combo in iproduct((PLUS, MINUS), repeat=len(leaf_list))]

    k = len(internal)

    def shell_series(eps: dict) -> dict:
        acc: dict[Fraction, int] = {}
        eps_sign = 1
        for i in leaf_list:
            eps_sign *= eps[i]
        # offsets times d are integers by construction
        base_u = []
        for v in internal:
            off = Fraction(degree[v] - 2, 2)
            for i in leaf_nbrs[v]:
                off += Fraction(eps[i], 2 * pg.weights[i])
            scaled = off * d
            assert scaled.denominator == 1
            base_u.append(int(scaled))
        tops = {}
        for pos, v in zip(node_pos, node_list):
            top = (bounds[v] + bound_slack) * d - base_u[pos]
            if top < 0:
                return acc
            tops[v] = top // d

        u: list[int] = []

        def descend(pos: int, sign: int, mult: int, running: int):
            v = internal[pos]
            last = pos == k - 1

            def admit(uval: int, sign2: int, mult2: int) -> tuple[int, bool]:
                u.append(uval)
                r2 = grid.push(u, running)
                ok = not grid.exceeds(r2, order)
                if ok:
                    if last:
                        expo = Fraction(r2, grid.denominator)
                        acc[expo] = acc.get(expo, 0) + sign2 * mult2
                    else:
                        descend(pos + 1, sign2, mult2, r2)
                u.pop()
                return r2, ok

            if not is_node[pos]:
                admit(base_u[pos], sign, mult)
                return
            for e in (PLUS, MINUS):
                sign2 = sign * (e ** e_exponent[v])
                prev = None
                for n in range(tops[v] + 1):
                    num, ok = admit(e * (n * d + base_u[pos]), sign2,
                                    mult * comb(n + binom_shift[v], n))
                    # the prefix minimum is convex in n: once it exceeds the
                    # order and stops decreasing, every later n does too
                    if not ok and prev is not None and num >= prev:
                        break
                    prev = num

        descend(0, eps_sign, 1, 0)
        return acc

    total: dict[Fraction, int] = {}
    for partial in map_shells(shell_series, shells):
        for expo, c in partial.items():
            total[expo] = total.get(expo, 0) + c
    return QSeries({e: c for e, c in total.items() if c}, order)
