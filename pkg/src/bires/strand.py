"""Maximal minors of phi (+) psi and the degree-nu strand matrix Theta_nu.

Theta_nu has one row per monomial of R_nu and one column per pair
(maximal minor Delta, multiplier monomial m of bidegree nu - deg Delta);
the column holds the coordinates of m*Delta in the monomial basis of R_nu,
as polynomials in the outer coefficient ring.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from bires.ring import (
    BiDeg, BiPoly, OuterPoly, basis_keys, bidegree_of, format_outer,
    monomial_basis, ParamMonomial, pm_unpack,
)
from bires.structmat import BigradedMatrix

__all__ = ["MinorLabel", "ThetaStrand", "maximal_minors", "theta"]


@dataclass(frozen=True)
class MinorLabel:
    """A maximal minor of phi (+) psi: its column subset, bidegree, and the
    F-columns (0-based indices into the psi block) that participate."""

    columns: tuple
    degree: BiDeg
    f_columns: tuple

    def involves(self, f_index):
        return f_index in self.f_columns


def _det_small(rows, cols, entries, universe):
    """Cofactor determinant of the submatrix entries[rows][cols], expanding
    along the sparsest row."""
    n = len(rows)
    if n == 1:
        return entries[rows[0]][cols[0]]
    best = min(range(n),
               key=lambda r: sum(1 for c in cols if entries[rows[r]][c]))
    acc = BiPoly.zero(universe)
    sign_base = (-1) ** best
    sub_rows = rows[:best] + rows[best + 1:]
    for k, c in enumerate(cols):
        e = entries[rows[best]][c]
        if not e:
            continue
        minor = _det_small(sub_rows, cols[:k] + cols[k + 1:], entries, universe)
        if not minor:
            continue
        term = e * minor
        acc = acc + (term if (sign_base * (-1) ** k) > 0 else -term)
    return acc


def maximal_minors(m: BigradedMatrix):
    """All C(ncols, nrows) maximal minors, labeled, in column-subset lex
    order.  Zero minors keep their labels."""
    n = m.nrows
    if m.ncols < n:
        raise ValueError("need at least as many columns as rows")
    nphi = m.ncols - 3 if m.ncols >= 3 else m.ncols
    row_sum = BiDeg(sum(d.x for d in m.row_degrees),
                    sum(d.y for d in m.row_degrees))
    out = []
    all_rows = tuple(range(n))
    for cols in combinations(range(m.ncols), n):
        deg = BiDeg(sum(m.col_degrees[c].x for c in cols) - row_sum.x,
                    sum(m.col_degrees[c].y for c in cols) - row_sum.y)
        fcols = tuple(c - nphi for c in cols if c >= nphi)
        det = _det_small(all_rows, cols, m.entries, m.universe)
        if det:
            got = bidegree_of(det)
            if got != deg:
                raise AssertionError(
                    f"minor {cols} has bidegree {got}, label says {deg}")
        out.append((MinorLabel(cols, deg, fcols), det))
    return out


@dataclass(frozen=True)
class ThetaStrand:
    """Explicit matrix of the degree-nu strand of the first Eagon-Northcott
    differential, over the outer coefficient ring."""

    nu: BiDeg
    rows: tuple                 # ParamMonomial basis of R_nu
    columns: tuple              # (MinorLabel, ParamMonomial multiplier)
    entries: tuple              # entries[r][c]: OuterPoly
    universe: object

    @property
    def nrows(self):
        return len(self.rows)

    @property
    def ncols(self):
        return len(self.columns)

    def shape(self):
        return (self.nrows, self.ncols)

    def column_f_indices(self):
        """For each column, the F-columns its minor involves."""
        return [label.f_columns for label, _ in self.columns]

    def submatrix(self, col_indices, row_indices=None):
        rows = range(self.nrows) if row_indices is None else row_indices
        return [[self.entries[r][c] for c in col_indices] for r in rows]

    def dump_lines(self):
        """Symbolic dump: header plus one grammar-string row per entry row."""
        lines = [f"nu = {self.nu}"]
        lines.append("rows: " + " ".join(_pm_str(m) for m in self.rows))
        lines.append("cols: " + " ".join(
            f"D{''.join(map(str, label.columns))}*{_pm_str(m)}"
            for label, m in self.columns))
        for r in range(self.nrows):
            lines.append(" | ".join(format_outer(e) for e in self.entries[r]))
        return lines


def _pm_str(m: ParamMonomial):
    names = ("s", "t", "u", "v")
    pieces = []
    for nm, e in zip(names, m):
        if e == 1:
            pieces.append(nm)
        elif e > 1:
            pieces.append(f"{nm}^{e}")
    return "*".join(pieces) or "1"


def theta(m: BigradedMatrix, nu) -> ThetaStrand:
    """Build Theta_nu in deterministic order: minors by column-subset lex,
    multiplier monomials in basis order."""
    nu = BiDeg(*nu)
    uni = m.universe
    row_keys = basis_keys(nu)
    row_index = {k: i for i, k in enumerate(row_keys)}
    columns = []
    cols_entries = []
    for label, det in maximal_minors(m):
        if not det:
            continue  # zero minors keep their label but contribute no columns
        mult_keys = basis_keys(nu - label.degree)
        if not mult_keys:
            continue
        for mk in mult_keys:
            columns.append((label, ParamMonomial.from_key(mk)))
            colvec = [OuterPoly.zero(uni) for _ in row_keys]
            for pk, op in det.d.items():
                colvec[row_index[pk + mk]] = op
            cols_entries.append(colvec)
    entries = tuple(tuple(cols_entries[c][r] for c in range(len(columns)))
                    for r in range(len(row_keys)))
    return ThetaStrand(nu, tuple(monomial_basis(nu)), tuple(columns),
                       entries, uni)
