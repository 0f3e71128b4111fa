"""Regularity-region arithmetic on Z^2: Stanley sets, the Eagon-Northcott
regularity estimate, the general-points region, and strand-degree selection.

A region is a finite union of translated quadrants corner + N^2, normalized
so the corners form an antichain with nonnegative components.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

from bires.ring import BiDeg

__all__ = [
    "RegRegion", "DegreeData", "st_set", "en_region", "region_contains",
    "choose_nu", "general_points_region", "virtual_ci_shifts", "CIShifts",
]

# the Prop-3.12 corner spread; the worked examples use the negated Stanley
# set, see the decisions ledger
_EN_SPREAD = (BiDeg(-3, 0), BiDeg(-2, -1), BiDeg(-1, -2), BiDeg(0, -3))


def st_set(i: int) -> list:
    """Stanley set St_i of bidegrees in Z^2."""
    if i > 0:
        return [BiDeg(r, -i - 1 - r) for r in range(-i, 0)]
    return [BiDeg(-i - k, k) for k in range(-i + 1)]


def _normalize(corners):
    clamped = {BiDeg(max(c.x, 0), max(c.y, 0)) for c in corners}
    keep = []
    for c in clamped:
        if not any(d != c and c.dominates(d) for d in clamped):
            keep.append(c)
    return tuple(sorted(keep))


class RegRegion:
    """Union over corners k of the quadrant k + N^2."""

    __slots__ = ("corners",)

    def __init__(self, corners):
        self.corners = _normalize([BiDeg(*c) for c in corners])

    def is_empty(self):
        return not self.corners

    def contains(self, nu) -> bool:
        nu = BiDeg(*nu)
        return any(nu.dominates(c) for c in self.corners)

    def contains_interior(self, nu) -> bool:
        nu = BiDeg(*nu)
        return self.contains(nu - BiDeg(1, 0)) or self.contains(nu - BiDeg(0, 1))

    def __eq__(self, other):
        return isinstance(other, RegRegion) and self.corners == other.corners

    def __iter__(self):
        return iter(self.corners)

    def as_pairs(self):
        return [[c.x, c.y] for c in self.corners]

    def __repr__(self):
        return f"RegRegion({', '.join(map(str, self.corners))})"


@dataclass(frozen=True)
class DegreeData:
    """Numerical data for the map phi (+) psi: generator row degrees,
    phi column degrees, and the three F-column degrees."""

    row_degrees: tuple          # (e_j, f_j) = generator degrees (k_j, l_j)
    phi_col_degrees: tuple      # (c_i, d_i)
    f_degrees: tuple            # three (a_i, b_i)

    def __post_init__(self):
        rows = tuple(BiDeg(*d) for d in self.row_degrees)
        phis = tuple(BiDeg(*d) for d in self.phi_col_degrees)
        fs = tuple(BiDeg(*d) for d in self.f_degrees)
        object.__setattr__(self, "row_degrees", rows)
        object.__setattr__(self, "phi_col_degrees", phis)
        object.__setattr__(self, "f_degrees", fs)
        if len(rows) < 2:
            raise ValueError("need at least two generators")
        for d in rows + phis + fs:
            if not d.nonnegative():
                raise ValueError(f"negative degree {d}")
        for a in fs:
            for k in rows:
                if not a.dominates(k):
                    raise ValueError(
                        f"F-column degree {a} is below generator degree {k}")

    @property
    def n(self):
        return len(self.row_degrees)


def en_region(dd: DegreeData) -> RegRegion:
    """Regularity-region estimate from the Eagon-Northcott degree shifts.

    Non-uniform F-degrees are handled conservatively with the componentwise
    maximum, which only pushes the region up.
    """
    a = max(d.x for d in dd.f_degrees)
    b = max(d.y for d in dd.f_degrees)
    es = [d.x for d in dd.row_degrees]
    fs = [d.y for d in dd.row_degrees]
    if not any(a >= e for e in es) or not any(b >= f for f in fs):
        raise ValueError(
            f"precondition failed: ({a},{b}) must dominate some generator "
            f"degree in each component; generators {list(dd.row_degrees)}")
    c = sum(d.x for d in dd.phi_col_degrees)
    d_ = sum(d.y for d in dd.phi_col_degrees)
    e = sum(es)
    f = sum(fs)
    n = dd.n
    min_ee = min(es[i] + es[j] for i in range(n) for j in range(i, n))
    min_ff = min(fs[i] + fs[j] for i in range(n) for j in range(i, n))
    corner = BiDeg(3 * a + c - e - min_ee, 3 * b + d_ - f - min_ff)
    return RegRegion([corner + delta for delta in _EN_SPREAD])


def region_contains(r: RegRegion, nu, strict: bool = False) -> bool:
    """Membership; strict means nu = mu + (p,p') with mu in r and p+p' > 0."""
    return r.contains_interior(nu) if strict else r.contains(nu)


@dataclass
class NuChoice:
    nu: BiDeg
    source: str                # "override" | "heuristic"
    warning: Optional[str] = None


def choose_nu(r: RegRegion, min_col_degree, max_minor_degree,
              override=None, search_bound: int = 64) -> NuChoice:
    """Pick the strand degree.

    An override is returned verbatim (with a warning when it is not strictly
    interior).  Otherwise the strictly interior nu >= max_minor_degree
    minimizing (nu_x+1)(nu_y+1) is chosen, ties broken by smaller nu_x.
    """
    if override is not None:
        nu = BiDeg(*override)
        warning = None
        if not r.contains_interior(nu):
            warning = f"override nu={nu} is not strictly interior to {r!r}"
        return NuChoice(nu, "override", warning)
    if r.is_empty():
        raise ValueError("empty regularity region")
    lo = BiDeg(*max_minor_degree)
    best = None
    for x in range(max(lo.x, 0), search_bound):
        for y in range(max(lo.y, 0), search_bound):
            nu = BiDeg(x, y)
            if not r.contains_interior(nu):
                continue
            cost = (x + 1) * (y + 1)
            if best is None or cost < best[0] or (cost == best[0] and x < best[1].x):
                best = (cost, nu)
            break  # larger y in this column only costs more
    if best is None:
        raise ValueError(
            f"no admissible strand degree below search bound {search_bound}")
    return NuChoice(best[1], "heuristic")


def general_points_region(r: int) -> RegRegion:
    """Region of F-degrees for which r general points reduce to a virtual
    complete intersection."""
    if r < 1:
        raise ValueError("need a positive number of points")
    if r < 4:
        warnings.warn(f"general-points region is stated for r >= 4, got r={r}",
                      stacklevel=2)
    corners = [(0, r), (1, r - 1), (2, r - 2), (r - 2, 2), (r - 1, 1), (r, 0)]
    return RegRegion(corners)


@dataclass(frozen=True)
class CIShifts:
    """Virtual complete-intersection shift catalog for r general points
    (shift signs normalized positive)."""

    deg1: tuple
    deg2: tuple


def virtual_ci_shifts(r: int) -> CIShifts:
    if r < 1:
        raise ValueError("need a positive number of points")
    p, rem = divmod(r, 2)
    if rem == 0:
        return CIShifts((BiDeg(1, p), BiDeg(1, p)), (BiDeg(2, 2 * p),))
    return CIShifts((BiDeg(1, p), BiDeg(1, p + 1)), (BiDeg(2, 2 * p + 1),))
