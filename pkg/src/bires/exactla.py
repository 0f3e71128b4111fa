"""Exact linear algebra over Q and over the outer polynomial ring:
specialization, rank profiles, fraction-free determinants, structured minor
selection, multivariate gcd, and exact division.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from math import gcd as igcd

from bires import kernel
from bires.errors import ComputationError
from bires.ring import OuterPoly, Universe
from bires.strand import ThetaStrand

__all__ = [
    "QMatrix", "RankProfile", "random_assignment", "specialize",
    "rank_profile", "det_ff", "divides", "gcd_multi", "gcd_pair",
    "select_minor_by_block", "MinorSelectionError",
]

ASSIGNMENT_RANGE = 10_000


class MinorSelectionError(ComputationError):
    """Completion impossible: the specialized strand has a rank defect."""


def random_assignment(universe: Universe, seed: int) -> dict:
    """Seeded rational assignment for every variable of the universe,
    drawing integers in [-10^4, 10^4]."""
    rng = random.Random(seed)
    return {v: Fraction(rng.randint(-ASSIGNMENT_RANGE, ASSIGNMENT_RANGE))
            for v in universe.vars}


class QMatrix:
    """Dense matrix of exact rationals."""

    __slots__ = ("rows",)

    def __init__(self, rows):
        self.rows = [[Fraction(x) for x in row] for row in rows]

    @property
    def nrows(self):
        return len(self.rows)

    @property
    def ncols(self):
        return len(self.rows[0]) if self.rows else 0

    def column_submatrix(self, cols):
        return QMatrix([[row[c] for c in cols] for row in self.rows])

    def __repr__(self):
        return f"QMatrix({self.nrows}x{self.ncols})"


@dataclass(frozen=True)
class RankProfile:
    rank: int
    rows: tuple
    cols: tuple


def specialize(obj, assignment):
    """Exact evaluation of an OuterPoly (to a rational) or a ThetaStrand
    (to a QMatrix) at an outer-variable assignment."""
    if isinstance(obj, OuterPoly):
        return obj.evaluate(assignment)
    if isinstance(obj, ThetaStrand):
        return QMatrix([[e.evaluate(assignment) for e in row]
                        for row in obj.entries])
    raise TypeError(f"cannot specialize {type(obj).__name__}")


def rank_profile(m: QMatrix) -> RankProfile:
    """Exact rank with the lexicographically first independent column set
    (columns scanned left to right, partial pivoting on absolute size)."""
    a = [row[:] for row in m.rows]
    nr, nc = m.nrows, m.ncols
    piv_rows, piv_cols = [], []
    used = [False] * nr
    for j in range(nc):
        best, best_row = None, None
        for i in range(nr):
            if used[i]:
                continue
            v = a[i][j]
            if v and (best is None or abs(v) > best):
                best, best_row = abs(v), i
        if best_row is None:
            continue
        used[best_row] = True
        piv_rows.append(best_row)
        piv_cols.append(j)
        inv = 1 / a[best_row][j]
        prow = a[best_row]
        for i in range(nr):
            if used[i] or not a[i][j]:
                continue
            f = a[i][j] * inv
            arow = a[i]
            for k in range(j, nc):
                if prow[k]:
                    arow[k] -= f * prow[k]
    return RankProfile(len(piv_cols), tuple(piv_rows), tuple(piv_cols))


# ----------------------------------------------------------------------
# determinants

def _det_cofactor(rows, cols, a, uni):
    n = len(rows)
    if n == 1:
        return a[rows[0]][cols[0]]
    best = min(range(n), key=lambda r: sum(1 for c in cols if a[rows[r]][c]))
    acc = OuterPoly.zero(uni)
    sub_rows = rows[:best] + rows[best + 1:]
    for k, c in enumerate(cols):
        e = a[rows[best]][c]
        if not e:
            continue
        minor = _det_cofactor(sub_rows, cols[:k] + cols[k + 1:], a, uni)
        if not minor:
            continue
        term = e * minor
        acc = acc + (term if (best + k) % 2 == 0 else -term)
    return acc


def _det_bareiss(mat, uni):
    n = len(mat)
    a = [row[:] for row in mat]
    sign = 1
    prev = None
    for k in range(n - 1):
        piv = None
        for i in range(k, n):
            if a[i][k] and (piv is None or len(a[i][k].d) < len(a[piv][k].d)):
                piv = i
        if piv is None:
            return OuterPoly.zero(uni)
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
            sign = -sign
        pk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i = a[i]
            row_k = a[k]
            for j in range(k + 1, n):
                num = pk * row_i[j] - aik * row_k[j] if aik else pk * row_i[j]
                if prev is not None and num:
                    q = kernel.pdiv_exact(num.d, prev.d, uni.nvars, uni.width,
                                          uni.high, uni.masks)
                    if q is None:
                        raise AssertionError("Bareiss division failed")
                    num = OuterPoly(uni, q)
                row_i[j] = num
            row_i[k] = OuterPoly.zero(uni)
        prev = pk
    det = a[n - 1][n - 1]
    return det if sign > 0 else -det


def _det_subset_dp(mat, uni):
    """Row-by-row Laplace expansion with memoization on column subsets.

    Multiplications are minor x single-entry, which beats Bareiss when the
    entries are tiny but the variable count is large.
    """
    n = len(mat)
    one = OuterPoly.const(uni, 1)
    cur = {0: one}
    for k in range(n):
        row = mat[k]
        nz = [(j, 1 << j, row[j]) for j in range(n) if row[j]]
        nxt = {}
        for mask, minor in cur.items():
            for j, bit, e in nz:
                if mask & bit:
                    continue
                sign = (k + _popcount(mask & (bit - 1))) % 2
                term = minor * e
                key = mask | bit
                acc = nxt.get(key)
                if acc is None:
                    nxt[key] = -term if sign else term
                else:
                    acc = acc - term if sign else acc + term
                    if acc:
                        nxt[key] = acc
                    else:
                        del nxt[key]
        cur = nxt
        if not cur:
            return OuterPoly.zero(uni)
    return cur.get((1 << n) - 1, OuterPoly.zero(uni))


def _popcount(x):
    return bin(x).count("1")


def _column_content_scale(mat, uni):
    """Pull a positive rational scale out of each column so entries have
    integer coefficients; returns (scaled matrix, product of scales)."""
    n = len(mat)
    scale = Fraction(1)
    out = [row[:] for row in mat]
    for j in range(n):
        den = 1
        for i in range(n):
            for c in out[i][j].d.values():
                f = Fraction(c)
                den = den * f.denominator // igcd(den, f.denominator)
        if den != 1:
            scale /= den
            for i in range(n):
                out[i][j] = out[i][j].scale(den)
    return out, scale


def det_ff(mat, universe=None) -> OuterPoly:
    """Exact determinant of a square matrix of OuterPoly.

    Cofactor expansion below size 5; otherwise fraction-free Bareiss, or a
    subset-memoized Laplace expansion when the variable count makes Bareiss
    products the bottleneck.  Rational entry content is pulled out per
    column first so the elimination runs over integer coefficients.
    """
    n = len(mat)
    if n == 0:
        raise ValueError("empty matrix")
    for row in mat:
        if len(row) != n:
            raise ValueError("matrix is not square")
    uni = universe or next((e.u for row in mat for e in row), None)
    if uni is None:
        raise ValueError("cannot infer universe from an all-empty matrix")
    if n == 1:
        return mat[0][0]
    if n < 5:
        return _det_cofactor(tuple(range(n)), tuple(range(n)), mat, uni)
    scaled, scale = _column_content_scale(mat, uni)
    if uni.nvars <= 4:
        det = _det_bareiss(scaled, uni)
    else:
        det = _det_subset_dp(scaled, uni)
    return det if scale == 1 else det.scale(1 / scale)


# ----------------------------------------------------------------------
# exact division and gcd

def divides(d: OuterPoly, p: OuterPoly):
    """Exact multivariate division attempt: (True, quotient) or (False, None)."""
    if not d:
        raise ZeroDivisionError("division by the zero polynomial")
    if not p:
        return True, OuterPoly.zero(p.u)
    u = d.u
    q = kernel.pdiv_exact(p.d, d.d, u.nvars, u.width, u.high, u.masks)
    if q is None:
        return False, None
    return True, OuterPoly(u, q)


def _x_degree(p, sh, fmask):
    return max((k >> sh) & fmask for k in p.d)

def _x_coeffs(p, sh, fmask):
    """Split p into coefficients of powers of the variable at shift sh."""
    out = {}
    for k, c in p.d.items():
        e = (k >> sh) & fmask
        out.setdefault(e, {})[k - (e << sh)] = c
    return {e: OuterPoly(p.u, d) for e, d in out.items()}


def _from_x_coeffs(u, coeffs, sh):
    d = {}
    for e, op in coeffs.items():
        for k, c in op.d.items():
            d[k + (e << sh)] = c
    return OuterPoly(u, d)


def _prem(a, b, sh, fmask, uni):
    """Sloppy pseudo-remainder of a by b in the variable at shift sh."""
    db = _x_degree(b, sh, fmask)
    bc = _x_coeffs(b, sh, fmask)
    lcb = bc[db]
    r = a
    while r and _x_degree(r, sh, fmask) >= db:
        dr = _x_degree(r, sh, fmask)
        rc = _x_coeffs(r, sh, fmask)
        lcr = rc[dr]
        shift_key = (dr - db) << sh
        lead = OuterPoly(uni, kernel.pmul_term(b.d, shift_key, 1, uni.nvars,
                                               uni.width, uni.high))
        r = lcb * r - lcr * lead
        if len(r.d) > _PRS_TERM_GUARD:
            raise ComputationError(
                "pseudo-remainder sequence exploded; gcd inputs are too "
                "large for the PRS path")
    return r


def _prs_gcd(a, b, depth=0):
    """Primitive PRS gcd with recursive content extraction over the last
    variable present.  Both inputs nonzero; result is not normalized."""
    uni = a.u
    va = a.variables()
    vb = b.variables()
    vs = sorted(set(va) | set(vb))
    if not vs:
        return OuterPoly.const(uni, 1)
    x = vs[-1]
    sh = uni.shifts[x]
    fmask = (1 << uni.width) - 1
    if x not in va or x not in vb:
        # the last variable misses one side: gcd divides that side's
        # x-coefficients, recurse on contents
        free_side = a if x not in va else b
        mixed_side = b if free_side is a else a
        g = free_side
        for op in _x_coeffs(mixed_side, sh, fmask).values():
            g = _gcd_inner(g, op, depth + 1)
            if g.total_degree() == 0:
                return OuterPoly.const(uni, 1)
        return g
    conta = _content_list(list(_x_coeffs(a, sh, fmask).values()), depth)
    contb = _content_list(list(_x_coeffs(b, sh, fmask).values()), depth)
    ppa = _exact_quot(a, conta)
    ppb = _exact_quot(b, contb)
    contg = _gcd_inner(conta, contb, depth + 1)
    r0, r1 = ppa, ppb
    if _x_degree(r0, sh, fmask) < _x_degree(r1, sh, fmask):
        r0, r1 = r1, r0
    while r1:
        rem = _prem(r0, r1, sh, fmask, uni)
        if not rem:
            break
        if _x_degree(rem, sh, fmask) == 0:
            # coprime in x: pp-gcd is trivial
            return contg
        rem = _exact_quot(rem, _content_list(
            list(_x_coeffs(rem, sh, fmask).values()), depth))
        r0, r1 = r1, rem
    ppg = _exact_quot(r1, _content_list(
        list(_x_coeffs(r1, sh, fmask).values()), depth))
    return contg * ppg


def _content_list(ops, depth):
    g = ops[0]
    for op in ops[1:]:
        if g.total_degree() == 0:
            break
        g = _gcd_inner(g, op, depth + 1)
    return g.normalized() if g else g


def _exact_quot(a, b):
    ok, q = divides(b, a)
    if not ok:
        raise AssertionError("content division failed")
    return q


_SPARSE_MIN_TERMS = 6
_PRS_TERM_GUARD = 50_000


def _monomial_gcd_key(p):
    acc = None
    fmask = (1 << p.u.width) - 1
    for k in p.d:
        if acc is None:
            acc = k
        else:
            acc = sum(min((acc >> sh) & fmask, (k >> sh) & fmask) << sh
                      for sh in p.u.shifts)
        if acc == 0:
            break
    return acc or 0


def _strip_key(p, key):
    if not key:
        return p
    return OuterPoly(p.u, {k - key: c for k, c in p.d.items()})


def _gcd_inner(a, b, depth=0):
    if not a:
        return b
    if not b:
        return a
    if a.total_degree() == 0 or b.total_degree() == 0:
        return OuterPoly.const(a.u, 1)
    # pull out the common monomial factor first
    u = a.u
    fmask = (1 << u.width) - 1
    ka, kb = _monomial_gcd_key(a), _monomial_gcd_key(b)
    kg = sum(min((ka >> sh) & fmask, (kb >> sh) & fmask) << sh
             for sh in u.shifts) if (ka or kb) else 0
    if ka or kb:
        a, b = _strip_key(a, ka), _strip_key(b, kb)
        mono = OuterPoly(u, {kg: 1})
        if a.total_degree() == 0 or b.total_degree() == 0:
            return mono
        return mono * _gcd_inner(a, b, depth)
    ok, _ = divides(a, b)
    if ok:
        return a
    ok, _ = divides(b, a)
    if ok:
        return b
    nvars = len(set(a.variables()) | set(b.variables()))
    if nvars >= 3 and min(len(a.d), len(b.d)) >= _SPARSE_MIN_TERMS:
        g = _sparse_full_gcd(a, b, depth)
        if g is not None:
            return g
    return _prs_gcd(a, b, depth)


def _sparse_full_gcd(a, b, depth):
    """Sparse modular gcd: primitive part from the modular engine, content
    with respect to its main variable restored by recursive folds."""
    from bires._sparse_gcd import sparse_gcd_pp
    g, xpos = sparse_gcd_pp(a, b)
    if g is None:
        return None
    if xpos is None:
        return g  # verified constant gcd
    uni = a.u
    sh = uni.shifts[xpos]
    fmask = (1 << uni.width) - 1
    ca = _content_list(list(_x_coeffs(a, sh, fmask).values()), depth)
    if ca.total_degree() > 0:
        cb = _content_list(list(_x_coeffs(b, sh, fmask).values()), depth)
        if cb.total_degree() > 0:
            cc = _gcd_inner(ca, cb, depth + 1)
            if cc.total_degree() > 0:
                g = g * cc
    return g


def gcd_pair(a: OuterPoly, b: OuterPoly) -> OuterPoly:
    """gcd over Q up to a unit, normalized integer-primitive with positive
    leading coefficient."""
    if not a and not b:
        raise ValueError("gcd of two zero polynomials")
    return _gcd_inner(a, b).normalized()


def gcd_multi(ps) -> OuterPoly:
    """Pairwise-fold gcd of a list, normalized like gcd_pair."""
    ps = [p for p in ps if p]
    if not ps:
        raise ValueError("all gcd inputs are zero")
    g = ps[0]
    for p in ps[1:]:
        if g.total_degree() == 0:
            break
        ok, _ = divides(g.normalized(), p)
        if ok:
            continue
        g = _gcd_inner(g, p)
    return g.normalized()


# ----------------------------------------------------------------------
# structured minor selection

def select_minor_by_block(strand: ThetaStrand, block: int, target_size: int,
                          seed: int, assignment=None):
    """Columns for the delta_i minor: the lexicographically first maximal
    independent set among columns whose minor label excludes F-column
    ``block``, completed greedily by independent columns whose label
    includes it.  Independence is tested on the strand specialized at a
    seeded rational assignment."""
    if assignment is None:
        assignment = random_assignment(strand.universe, seed)
    q = specialize(strand, assignment)
    finv = strand.column_f_indices()
    excl = [c for c in range(strand.ncols) if block not in finv[c]]
    incl = [c for c in range(strand.ncols) if block in finv[c]]
    base_profile = rank_profile(q.column_submatrix(excl))
    chosen = [excl[j] for j in base_profile.cols]
    if len(chosen) > target_size:
        chosen = chosen[:target_size]
    rank = len(chosen)
    for c in incl:
        if rank == target_size:
            break
        trial = rank_profile(q.column_submatrix(chosen + [c]))
        if trial.rank > rank:
            chosen.append(c)
            rank = trial.rank
    if rank < target_size:
        raise MinorSelectionError(
            f"cannot complete an independent {target_size}-column set for "
            f"block {block}: reached rank {rank}")
    return sorted(chosen)
