"""Structure matrices: the syzygy matrix phi, the coefficient matrix psi in
its generic and implicitization flavors, their augmentation, and the defining
factorization identity [g] . (phi (+) psi) = [0,...,0,F0,F1,F2].
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from bires.ring import (
    BiDeg, BiPoly, OuterPoly, OuterVar, Universe, basis_keys, bidegree_of,
)

__all__ = [
    "BigradedMatrix", "GSpec", "koszul_phi", "build_psi_generic",
    "build_psi_implicit", "augment", "verify_factorization",
    "coefficient_universe",
]


class BigradedMatrix:
    """Matrix of BiPoly entries with declared row and column bidegrees.

    A nonzero entry (j, i) must be bihomogeneous of bidegree
    col_degrees[i] - row_degrees[j]; when that difference has a negative
    component the entry must be zero.
    """

    __slots__ = ("entries", "row_degrees", "col_degrees", "universe")

    def __init__(self, entries, row_degrees, col_degrees):
        self.entries = tuple(tuple(row) for row in entries)
        self.row_degrees = tuple(BiDeg(*d) for d in row_degrees)
        self.col_degrees = tuple(BiDeg(*d) for d in col_degrees)
        if len(self.entries) != len(self.row_degrees):
            raise ValueError("row count does not match row degrees")
        universe = None
        for row in self.entries:
            if len(row) != len(self.col_degrees):
                raise ValueError("column count does not match column degrees")
            for e in row:
                universe = universe or e.u
        self.universe = universe or Universe.empty()
        self._validate()

    def _validate(self):
        for j, row in enumerate(self.entries):
            for i, e in enumerate(row):
                want = self.col_degrees[i] - self.row_degrees[j]
                if not want.nonnegative():
                    if e:
                        raise ValueError(
                            f"entry ({j},{i}) must vanish: bidegree slot {want}")
                    continue
                if e and bidegree_of(e) != want:
                    raise ValueError(
                        f"entry ({j},{i}) has bidegree {bidegree_of(e)}, "
                        f"expected {want}")

    @property
    def nrows(self):
        return len(self.entries)

    @property
    def ncols(self):
        return len(self.col_degrees)

    def column(self, i):
        return [row[i] for row in self.entries]

    def to_strings(self):
        from bires.ring import format_poly
        return [[format_poly(e) for e in row] for row in self.entries]

    def __repr__(self):
        return (f"BigradedMatrix({self.nrows}x{self.ncols}, "
                f"rows={list(map(str, self.row_degrees))}, "
                f"cols={list(map(str, self.col_degrees))})")


@dataclass(frozen=True)
class GSpec:
    """Generators of G with their Hilbert-Burch syzygy matrix.

    kind is "ci" for a two-generator complete intersection with the Koszul
    column, "user" for a user-supplied matrix; either way [g].phi = 0 is
    verified on construction.
    """

    generators: tuple
    degrees: tuple
    phi: BigradedMatrix
    kind: str = "ci"
    sum_multiplicity: Optional[int] = None

    def __post_init__(self):
        gens = tuple(self.generators)
        degs = tuple(BiDeg(*d) for d in self.degrees)
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "degrees", degs)
        n = len(gens)
        if n < 2:
            raise ValueError("need at least two generators")
        if len(degs) != n:
            raise ValueError("degree list does not match generators")
        for g, d in zip(gens, degs):
            if not g:
                raise ValueError("zero generator")
            if bidegree_of(g) != d:
                raise ValueError(f"generator {g!r} is not of bidegree {d}")
        if self.kind == "ci" and n != 2:
            raise ValueError("complete-intersection kind requires 2 generators")
        if self.phi.nrows != n or self.phi.ncols != n - 1:
            raise ValueError("phi must be n x (n-1)")
        if self.phi.row_degrees != degs:
            raise ValueError("phi row degrees must equal generator degrees")
        for i in range(self.phi.ncols):
            acc = BiPoly.zero(gens[0].u)
            for g, e in zip(gens, self.phi.column(i)):
                acc = acc + g * e
            if acc:
                raise ValueError(f"[g].phi is nonzero in column {i}")

    @property
    def n(self):
        return len(self.generators)

    def bezout_multiplicity(self):
        """Total multiplicity of V(G): Bezout count for complete
        intersections, else the user-supplied value."""
        if self.sum_multiplicity is not None:
            return self.sum_multiplicity
        if self.kind == "ci":
            (k1, l1), (k2, l2) = self.degrees
            return k1 * l2 + k2 * l1
        raise ValueError(
            "total multiplicity must be supplied for non-CI generator sets")


def koszul_phi(g1: BiPoly, g2: BiPoly) -> BigradedMatrix:
    """Koszul syzygy column (-g2, g1)^T of a complete intersection."""
    d1 = bidegree_of(g1)
    d2 = bidegree_of(g2)
    if d1 is None or d2 is None:
        raise ValueError("generators must be bihomogeneous")
    return BigradedMatrix([[-g2], [g1]], [d1, d2], [d1 + d2])


def coefficient_universe(gdegs, fdegs) -> Universe:
    """Generic coefficient variables c_i_j_a, allocated densely: i runs over
    F-columns, j over generators (1-based), a over the monomial basis of the
    slot bidegree."""
    har = []
    for i, (a, b) in enumerate(fdegs):
        for j, (k, l) in enumerate(gdegs, start=1):
            slot = BiDeg(a - k, b - l)
            for alpha in range(len(basis_keys(slot))):
                har.append(OuterVar("coeff", i, j, alpha))
    return Universe(har)


def build_psi_generic(g: GSpec, fdegs):
    """Generic coefficient matrix: H[j][i] carries one fresh c_i_j_a per
    monomial of the slot basis, and F_i = sum_j H[j][i] g_j.

    Returns (psi, F, universe).
    """
    fdegs = [BiDeg(*d) for d in fdegs]
    for a in fdegs:
        for k in g.degrees:
            if not a.dominates(k):
                raise ValueError(f"F-degree {a} is below generator degree {k}")
    uni = coefficient_universe(g.degrees, fdegs)
    gens = [gen.with_universe(uni) for gen in g.generators]
    entries = [[None] * len(fdegs) for _ in range(g.n)]
    for i, fdeg in enumerate(fdegs):
        for j, gdeg in enumerate(g.degrees):
            slot = fdeg - gdeg
            terms = {}
            for alpha, key in enumerate(basis_keys(slot)):
                var = OuterVar("coeff", i, j + 1, alpha)
                terms[key] = OuterPoly.var(uni, var)
            entries[j][i] = BiPoly(uni, terms)
    psi = BigradedMatrix(entries, g.degrees, fdegs)
    fpolys = []
    for i in range(len(fdegs)):
        acc = BiPoly.zero(uni)
        for j in range(g.n):
            acc = acc + entries[j][i] * gens[j]
        fpolys.append(acc)
    return psi, fpolys, uni


def build_psi_implicit(g: GSpec, h: BigradedMatrix):
    """Implicitization coefficient matrix from [p0 p1 p2 p3] = [g].h:
    psi[j][i] = h[j][i] - V_i h[j][3] with (V_0,V_1,V_2) = (X,Y,Z).

    Returns (psi, F, P, universe) over the X,Y,Z,W universe.
    """
    if h.ncols != 4:
        raise ValueError("h must have four columns, one per parametrization entry")
    if h.nrows != g.n:
        raise ValueError("h must have one row per generator")
    if h.row_degrees != g.degrees:
        raise ValueError("h row degrees must equal generator degrees")
    ab = h.col_degrees[0]
    if any(d != ab for d in h.col_degrees):
        raise ValueError(f"h column degrees must share a common (a,b), got "
                         f"{list(map(str, h.col_degrees))}")
    uni = Universe.xyzw()
    gens = [gen.with_universe(uni) for gen in g.generators]
    hent = [[e.with_universe(uni) for e in row] for row in h.entries]
    ppolys = []
    for i in range(4):
        acc = BiPoly.zero(uni)
        for j in range(g.n):
            acc = acc + gens[j] * hent[j][i]
        if not acc:
            raise ValueError(f"parametrization entry p_{i} is zero")
        ppolys.append(acc)
    coords = [OuterPoly.var(uni, OuterVar(nm)) for nm in ("X", "Y", "Z")]
    entries = []
    for j in range(g.n):
        entries.append([hent[j][i] - hent[j][3].scale_outer(coords[i])
                        for i in range(3)])
    psi = BigradedMatrix(entries, g.degrees, [ab, ab, ab])
    fpolys = [ppolys[i] - ppolys[3].scale_outer(coords[i]) for i in range(3)]
    return psi, fpolys, ppolys, uni


def augment(phi: BigradedMatrix, psi: BigradedMatrix) -> BigradedMatrix:
    """Column-concatenate phi and psi (phi columns first)."""
    if psi.ncols == 0:
        return phi
    if phi.nrows != psi.nrows or phi.row_degrees != psi.row_degrees:
        raise ValueError("row degrees of phi and psi do not match")
    uni = psi.universe if psi.universe.nvars else phi.universe
    entries = []
    for rphi, rpsi in zip(phi.entries, psi.entries):
        entries.append([e.with_universe(uni) for e in rphi] + list(rpsi))
    return BigradedMatrix(entries, phi.row_degrees,
                          phi.col_degrees + psi.col_degrees)


def verify_factorization(g: GSpec, m: BigradedMatrix, fpolys) -> bool:
    """Check [g].m = [0,...,0,F_0,...,F_k] exactly."""
    uni = m.universe
    gens = [gen.with_universe(uni) for gen in g.generators]
    if len(gens) != m.nrows:
        raise ValueError("generator count does not match matrix rows")
    nzero = m.ncols - len(fpolys)
    if nzero < 0:
        raise ValueError("more F polynomials than matrix columns")
    for i in range(m.ncols):
        acc = BiPoly.zero(uni)
        for gen, e in zip(gens, m.column(i)):
            acc = acc + gen * e
        if i < nzero:
            if acc:
                return False
        else:
            want = fpolys[i - nzero]
            if want.u != uni:
                want = want.with_universe(uni)
            if acc != want:
                return False
    return True
