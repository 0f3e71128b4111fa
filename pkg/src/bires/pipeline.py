"""End-to-end drivers: the residual-resultant algorithm, the tensor product
surface implicitization algorithm, degree predictions, homogenization, and
the excess-multiplicity fallback through submaximal minors.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from bires.errors import ComputationError, InputError
from bires.exactla import (
    MinorSelectionError, divides, det_ff, gcd_multi, random_assignment,
    rank_profile, select_minor_by_block, specialize,
)
from bires.regions import DegreeData, choose_nu, en_region
from bires.ring import (
    BiDeg, OuterPoly, OuterVar, Universe, format_outer, format_poly,
)
from bires.strand import theta
from bires.structmat import (
    BigradedMatrix, GSpec, augment, build_psi_generic, build_psi_implicit,
    verify_factorization,
)

__all__ = [
    "ResultReport", "coeff_degrees", "surface_degree", "homogenize",
    "residual_resultant", "implicitize", "fallback_submaximal",
]

_SELECTION_RETRIES = 8


def coeff_degrees(fdegs, sum_mult: int):
    """Degrees (N_0, N_1, N_2) of the residual resultant in the coefficient
    blocks of F_0, F_1, F_2."""
    (a0, b0), (a1, b1), (a2, b2) = [BiDeg(*d) for d in fdegs]
    ns = (a1 * b2 + b1 * a2 - sum_mult,
          a0 * b2 + b0 * a2 - sum_mult,
          a0 * b1 + b0 * a1 - sum_mult)
    if min(ns) < 0:
        raise ComputationError(
            f"coefficient degrees {ns} are negative: the F-degrees are too "
            f"low for total base multiplicity {sum_mult}")
    return ns


def surface_degree(a: int, b: int, sum_mult: int) -> int:
    """Predicted degree of the implicit surface for a birational bidegree
    (a,b) parametrization with total base multiplicity sum_mult."""
    d = 2 * a * b - sum_mult
    if d < 0:
        raise ComputationError(
            f"surface degree 2*{a}*{b} - {sum_mult} is negative")
    return d


def homogenize(h_affine: OuterPoly, total_degree: int) -> OuterPoly:
    """Lift an affine X,Y,Z polynomial to a homogeneous one of the given
    total degree by multiplying each term with the missing power of W."""
    u = h_affine.u
    wpos = None
    for i, v in enumerate(u.vars):
        if v.kind == "W":
            wpos = i
    if wpos is None:
        raise InputError("the universe has no W variable to homogenize with")
    wsh = u.shifts[wpos]
    fmask = (1 << u.width) - 1
    terms = {}
    for k, c in h_affine.d.items():
        if (k >> wsh) & fmask:
            raise InputError("affine input already involves W")
        d = u.key_total(k)
        if d > total_degree:
            raise InputError(
                f"term degree {d} exceeds homogenization degree {total_degree}")
        terms[k + ((total_degree - d) << wsh)] = c
    return OuterPoly(u, terms)


@dataclass
class ResultReport:
    """Outcome of a pipeline run; deterministic given the master seed."""

    mode: str
    nu: BiDeg
    nu_source: str
    theta_shape: tuple
    seed: int
    coeff_degree_bounds: Optional[tuple] = None
    predicted_surface_degree: Optional[int] = None
    output: Optional[str] = None              # resultant / affine equation
    output_homogeneous: Optional[str] = None
    output_total_degree: Optional[int] = None
    fallback: bool = False
    corank: int = 0
    multiple_of_implicit_equation: bool = False
    warnings: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)
    problem: Optional[dict] = None

    def to_dict(self):
        out = {
            "mode": self.mode,
            "nu": [self.nu.x, self.nu.y],
            "nu_source": self.nu_source,
            "theta_shape": list(self.theta_shape),
            "seed": self.seed,
            "fallback": self.fallback,
            "corank": self.corank,
            "warnings": list(self.warnings),
            "diagnostics": dict(self.diagnostics),
        }
        if self.coeff_degree_bounds is not None:
            out["coeff_degree_bounds"] = list(self.coeff_degree_bounds)
        if self.predicted_surface_degree is not None:
            out["predicted_surface_degree"] = self.predicted_surface_degree
        if self.output is not None:
            out["output"] = self.output
        if self.output_homogeneous is not None:
            out["output_homogeneous"] = self.output_homogeneous
        if self.output_total_degree is not None:
            out["output_total_degree"] = self.output_total_degree
        if self.multiple_of_implicit_equation:
            out["multiple_of_implicit_equation"] = True
        if self.problem is not None:
            out["problem"] = self.problem
        return out


def _prop23_warnings(gdegs, fdegs):
    warns = []
    for i, (a, b) in enumerate(fdegs):
        ok1 = any(a >= k + 1 and b >= l for k, l in gdegs)
        ok2 = any(a >= k and b >= l + 1 for k, l in gdegs)
        if not (ok1 and ok2):
            warns.append(
                f"F_{i} degree ({a},{b}) violates the residual-resultant "
                f"degree inequalities; proceeding anyway")
    return warns


def _nonzero_minor_degree_bound(m: BigradedMatrix):
    from bires.strand import maximal_minors
    labels = [label for label, det in maximal_minors(m) if det]
    if not labels:
        raise ComputationError("every maximal minor vanishes")
    return (BiDeg(max(l.degree.x for l in labels),
                  max(l.degree.y for l in labels)),
            BiDeg(min(l.degree.x for l in labels),
                  min(l.degree.y for l in labels)))


def _rank_gate(strand, seed):
    """Rank of the strand at two independent seeded specializations; the two
    must agree before the value is trusted."""
    a1 = random_assignment(strand.universe, seed * 7919 + 1)
    a2 = random_assignment(strand.universe, seed * 7919 + 2)
    r1 = rank_profile(specialize(strand, a1)).rank
    r2 = rank_profile(specialize(strand, a2)).rank
    if r1 != r2:
        a3 = random_assignment(strand.universe, seed * 7919 + 3)
        r3 = rank_profile(specialize(strand, a3)).rank
        if r3 != max(r1, r2):
            raise ComputationError(
                f"specialized ranks disagree across seeds: {r1}, {r2}, {r3}")
        return max(r1, r2)
    return r1


def _select_and_det(strand, block, n_target, want_block_degree, seed,
                    exact_degree, diagnostics):
    """Pick the delta_i columns, compute the symbolic determinant, and check
    the block-degree contract, retrying with fresh seeds."""
    uni = strand.universe
    finv = strand.column_f_indices()
    last = None
    for attempt in range(_SELECTION_RETRIES):
        sel_seed = seed * 1009 + 31 * block + attempt
        try:
            cols = select_minor_by_block(strand, block, n_target, sel_seed)
        except MinorSelectionError as exc:
            last = str(exc)
            continue
        structural = sum(1 for c in cols if block in finv[c])
        if structural != want_block_degree:
            last = (f"structural degree {structural} != N_{block} = "
                    f"{want_block_degree}")
            continue
        det = det_ff(strand.submatrix(cols), uni)
        if not det:
            last = "selected minor is singular"
            continue
        got = det.block_degree(block)
        if exact_degree and got != want_block_degree:
            last = (f"symbolic degree {got} in block {block} != "
                    f"{want_block_degree}")
            continue
        if got > want_block_degree:
            last = (f"symbolic degree {got} in block {block} exceeds "
                    f"{want_block_degree}")
            continue
        diagnostics.setdefault("selection", {})[f"delta_{block}"] = {
            "columns": cols, "retries": attempt, "det_terms": len(det.d)}
        return det
    raise ComputationError(
        f"could not select a valid minor for block {block}: {last}")


def _certified_gcd(dets, want_degrees, exact, diagnostics):
    res = gcd_multi(dets)
    for i, want in enumerate(want_degrees):
        got = res.block_degree(i)
        if exact and got != want:
            raise ComputationError(
                f"resultant candidate has degree {got} in block {i}, "
                f"expected {want}")
        if got > want:
            raise ComputationError(
                f"gcd degree {got} in block {i} exceeds the bound {want}")
    for i, d in enumerate(dets):
        ok, _ = divides(res, d)
        if not ok:
            raise ComputationError(f"gcd does not divide determinant {i}")
    diagnostics["gcd_terms"] = len(res.d)
    return res


def _build_strand(g, m, fdegs, nu_override, warnings):
    dd = DegreeData(row_degrees=g.degrees,
                    phi_col_degrees=g.phi.col_degrees,
                    f_degrees=fdegs)
    region = en_region(dd)
    max_minor, min_minor = _nonzero_minor_degree_bound(m)
    min_col = BiDeg(min(d.x for d in m.col_degrees),
                    min(d.y for d in m.col_degrees))
    choice = choose_nu(region, min_col, max_minor, nu_override)
    if choice.warning:
        warnings.append(choice.warning)
    strand = theta(m, choice.nu)
    if strand.nrows == 0 or strand.ncols == 0:
        raise ComputationError(
            f"the degree-{choice.nu} strand is empty ({strand.nrows} rows, "
            f"{strand.ncols} columns)")
    return region, choice, strand


def residual_resultant(g: GSpec, fdegs, nu_override=None, seed: int = 0,
                       sum_mult: Optional[int] = None) -> ResultReport:
    """Residual resultant of three generic forms with respect to G.

    Builds the generic coefficient matrix, augments it with the syzygy
    matrix, picks a strand degree in the regularity region, and returns the
    gcd of the three structured maximal-minor determinants, normalized.
    The caller is responsible for G being locally a complete intersection.
    """
    fdegs = [BiDeg(*d) for d in fdegs]
    warnings = _prop23_warnings(g.degrees, fdegs)
    total_mult = sum_mult if sum_mult is not None else g.bezout_multiplicity()
    ns = coeff_degrees(fdegs, total_mult)
    psi, fpolys, uni = build_psi_generic(g, fdegs)
    m = augment(g.phi, psi)
    if not verify_factorization(g, m, fpolys):
        raise AssertionError("generic factorization identity failed")
    region, choice, strand = _build_strand(g, m, fdegs, nu_override, warnings)
    diagnostics = {"region_corners": region.as_pairs(),
                   "sum_multiplicity": total_mult}
    rank = _rank_gate(strand, seed)
    if rank < strand.nrows:
        raise ComputationError(
            f"rank defect at generic specialization: rank {rank} of "
            f"{strand.nrows}; the regularity estimate or the local "
            f"complete-intersection hypothesis fails")
    dets = [
        _select_and_det(strand, i, strand.nrows, ns[i], seed,
                        exact_degree=True, diagnostics=diagnostics)
        for i in range(3)
    ]
    res = _certified_gcd(dets, ns, exact=True, diagnostics=diagnostics)
    return ResultReport(
        mode="resultant",
        nu=choice.nu,
        nu_source=choice.source,
        theta_shape=strand.shape(),
        seed=seed,
        coeff_degree_bounds=ns,
        output=format_outer(res),
        warnings=warnings,
        diagnostics=diagnostics,
    )


def _strip_single_variable_factors(p: OuterPoly):
    """Divide out full single-variable factors (the X^k-style content a
    submaximal-minor gcd may carry)."""
    u = p.u
    fmask = (1 << u.width) - 1
    stripped = []
    key = 0
    for i, sh in enumerate(u.shifts):
        e = min((k >> sh) & fmask for k in p.d)
        if e:
            key += e << sh
            stripped.append((u.vars[i].name, e))
    if key:
        p = OuterPoly(u, {k - key: c for k, c in p.d.items()})
    return p, stripped


def fallback_submaximal(strand, corank: int, seed: int,
                        budget: int = 8) -> OuterPoly:
    """gcd of a budgeted sample of nonsingular (rows - corank)-sized
    symbolic minors; the result is a multiple of the implicit equation."""
    if corank < 1:
        raise ValueError("fallback requires a positive corank")
    size = strand.nrows - corank
    if size < 1:
        raise ComputationError("corank leaves no rows to take minors of")
    assignment = random_assignment(strand.universe, seed * 331 + 7)
    q = specialize(strand, assignment)
    base = rank_profile(q)
    if base.rank != size:
        raise ComputationError(
            f"specialized rank {base.rank} does not match rows - corank "
            f"= {size}")
    rng = random.Random(seed * 331 + 8)
    seen = set()
    dets = []
    attempts = 0
    while len(dets) < budget and attempts < 4 * budget:
        attempts += 1
        cols = list(range(strand.ncols))
        rows = list(range(strand.nrows))
        if attempts > 1:
            rng.shuffle(cols)
            rng.shuffle(rows)
        perm = [[q.rows[r][c] for c in cols] for r in rows]
        prof = rank_profile(QMatrixView(perm))
        if prof.rank != size:
            continue
        sel_rows = tuple(sorted(rows[i] for i in prof.rows))
        sel_cols = tuple(sorted(cols[j] for j in prof.cols))
        if (sel_rows, sel_cols) in seen:
            continue
        seen.add((sel_rows, sel_cols))
        sub = [[strand.entries[r][c] for c in sel_cols] for r in sel_rows]
        det = det_ff(sub, strand.universe)
        if det:
            dets.append(det)
    if not dets:
        raise ComputationError(
            "no nonsingular submaximal minor found within the sample budget")
    return gcd_multi(dets)


class QMatrixView:
    """Duck-typed QMatrix over already-exact rows (no re-wrapping)."""

    __slots__ = ("rows",)

    def __init__(self, rows):
        self.rows = rows

    @property
    def nrows(self):
        return len(self.rows)

    @property
    def ncols(self):
        return len(self.rows[0]) if self.rows else 0

    def column_submatrix(self, cols):
        return QMatrixView([[row[c] for c in cols] for row in self.rows])


def implicitize(g: GSpec, h: BigradedMatrix, nu_override=None,
                expected_sum_mult: Optional[int] = None,
                seed: int = 0) -> ResultReport:
    """Implicit equation of the tensor product surface parametrized by
    [p0 p1 p2 p3] = [g].h, through the residual resultant of
    (p0 - X p3, p1 - Y p3, p2 - Z p3).

    A corank at a random specialization switches to the submaximal-minor
    fallback, whose output is only a multiple of the implicit equation.
    """
    psi, fpolys, ppolys, uni = build_psi_implicit(g, h)
    ab = h.col_degrees[0]
    warnings = _prop23_warnings(g.degrees, [ab] * 3)
    m = augment(g.phi, psi)
    if not verify_factorization(g, m, fpolys):
        raise AssertionError("implicitization factorization identity failed")
    total_mult = g.bezout_multiplicity()
    ns = coeff_degrees([ab] * 3, total_mult)
    region, choice, strand = _build_strand(g, m, [ab] * 3, nu_override,
                                           warnings)
    diagnostics = {"region_corners": region.as_pairs(),
                   "sum_multiplicity": total_mult,
                   "parametrization": [format_poly(p) for p in ppolys]}
    prediction = None
    if expected_sum_mult is not None:
        prediction = surface_degree(ab.x, ab.y, expected_sum_mult)
    rank = _rank_gate(strand, seed)
    corank = strand.nrows - rank
    if corank == 0:
        dets = [
            _select_and_det(strand, i, strand.nrows, ns[i], seed,
                            exact_degree=False, diagnostics=diagnostics)
            for i in range(3)
        ]
        equation = _certified_gcd(dets, ns, exact=False,
                                  diagnostics=diagnostics)
        fallback = False
        multiple = False
    else:
        raw = fallback_submaximal(strand, corank, seed)
        diagnostics["fallback_raw_gcd"] = format_outer(raw)
        equation, stripped = _strip_single_variable_factors(raw)
        if stripped:
            diagnostics["stripped_variable_factors"] = [
                f"{name}^{e}" for name, e in stripped]
        equation = equation.normalized()
        fallback = True
        multiple = True
        warnings.append(
            f"corank {corank} at the specialization: the reported equation "
            f"is a multiple of the implicit equation")
    if not equation or equation.total_degree() == 0:
        raise ComputationError("implicitization produced a constant")
    total_degree = equation.total_degree()
    if prediction is not None and total_degree != prediction:
        warnings.append(
            f"output degree {total_degree} differs from the predicted "
            f"surface degree {prediction}")
    hom = homogenize(equation, total_degree)
    return ResultReport(
        mode="implicitize",
        nu=choice.nu,
        nu_source=choice.source,
        theta_shape=strand.shape(),
        seed=seed,
        coeff_degree_bounds=ns,
        predicted_surface_degree=prediction,
        output=format_outer(equation),
        output_homogeneous=format_outer(hom),
        output_total_degree=total_degree,
        fallback=fallback,
        corank=corank,
        multiple_of_implicit_equation=multiple,
        warnings=warnings,
        diagnostics=diagnostics,
    )
