"""Command-line entry points and the JSON problem-file schema.

Exit codes: 0 success, 1 input error (bad file, schema, parse), 2
math-level failure (rank defect, no admissible strand degree, negative
degree predictions).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from typing import Optional

from bires.errors import ComputationError, InputError
from bires.exactla import random_assignment, specialize
from bires.pipeline import ResultReport, implicitize, residual_resultant
from bires.regions import DegreeData, choose_nu, en_region
from bires.ring import (
    BiDeg, ParseError, Universe, bidegree_of, parse_poly,
)
from bires.strand import theta
from bires.structmat import (
    BigradedMatrix, GSpec, augment, build_psi_generic, build_psi_implicit,
    koszul_phi,
)

SCHEMA = "bires/1"


@dataclass
class ProblemSpec:
    """Parsed problem description; serializes back to the same JSON."""

    mode: str
    generators: list
    ci: bool = True
    phi: Optional[list] = None
    g_sum_mult: Optional[int] = None
    fdegs: Optional[list] = None
    h: Optional[list] = None
    nu: Optional[list] = None
    expected_sum_mult: Optional[int] = None
    seed: int = 0

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise InputError("problem file must hold a JSON object")
        if data.get("schema") != SCHEMA:
            raise InputError(f"unsupported schema {data.get('schema')!r}, "
                             f"expected {SCHEMA!r}")
        mode = data.get("mode")
        if mode not in ("resultant", "implicitize", "region", "theta"):
            raise InputError(f"unknown mode {mode!r}")
        gblock = data.get("g")
        if not isinstance(gblock, dict) or not gblock.get("generators"):
            raise InputError("missing g.generators")
        spec = cls(
            mode=mode,
            generators=list(gblock["generators"]),
            ci=bool(gblock.get("ci", len(gblock["generators"]) == 2)),
            phi=gblock.get("phi"),
            g_sum_mult=gblock.get("sum_mult"),
            fdegs=data.get("fdegs"),
            h=data.get("h"),
            nu=data.get("nu"),
            expected_sum_mult=data.get("expected_sum_mult"),
            seed=int(data.get("seed", 0)),
        )
        if mode == "resultant" and not spec.fdegs:
            raise InputError("resultant mode needs fdegs")
        if mode == "implicitize" and not spec.h:
            raise InputError("implicitize mode needs the h matrix")
        if mode in ("region", "theta") and not (spec.fdegs or spec.h):
            raise InputError(f"{mode} mode needs fdegs or h")
        return spec

    def to_dict(self):
        g = {"generators": list(self.generators), "ci": self.ci}
        if self.phi is not None:
            g["phi"] = self.phi
        if self.g_sum_mult is not None:
            g["sum_mult"] = self.g_sum_mult
        out = {"schema": SCHEMA, "mode": self.mode, "g": g, "seed": self.seed}
        if self.fdegs is not None:
            out["fdegs"] = [list(d) for d in self.fdegs]
        if self.h is not None:
            out["h"] = [list(r) for r in self.h]
        if self.nu is not None:
            out["nu"] = list(self.nu)
        if self.expected_sum_mult is not None:
            out["expected_sum_mult"] = self.expected_sum_mult
        return out


def _build_gspec(spec: ProblemSpec) -> GSpec:
    uni = Universe.empty()
    try:
        gens = tuple(parse_poly(text, uni) for text in spec.generators)
    except ParseError as exc:
        raise InputError(f"cannot parse generator: {exc}") from exc
    degs = []
    for gpoly, text in zip(gens, spec.generators):
        if not gpoly:
            raise InputError(f"generator {text!r} is zero")
        deg = bidegree_of(gpoly)
        if deg is None:
            raise InputError(f"generator {text!r} is not bihomogeneous")
        degs.append(deg)
    if spec.ci:
        if len(gens) != 2:
            raise InputError("a complete intersection needs two generators")
        phi = koszul_phi(gens[0], gens[1])
        kind = "ci"
    else:
        if not spec.phi:
            raise InputError("non-CI generator sets need an explicit phi")
        try:
            entries = [[parse_poly(e, uni) for e in row] for row in spec.phi]
        except ParseError as exc:
            raise InputError(f"cannot parse phi entry: {exc}") from exc
        col_degs = []
        for i in range(len(entries[0])):
            cdeg = None
            for j, row in enumerate(entries):
                if row[i]:
                    d = bidegree_of(row[i])
                    if d is None:
                        raise InputError(f"phi entry ({j},{i}) inhomogeneous")
                    cdeg = BiDeg(*d) + degs[j]
                    break
            if cdeg is None:
                raise InputError(f"phi column {i} is zero")
            col_degs.append(cdeg)
        try:
            phi = BigradedMatrix(entries, degs, col_degs)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        kind = "user"
    try:
        return GSpec(gens, tuple(degs), phi, kind,
                     sum_multiplicity=spec.g_sum_mult)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _build_h(spec: ProblemSpec, g: GSpec) -> BigradedMatrix:
    uni = Universe.empty()
    try:
        entries = [[parse_poly(e, uni) for e in row] for row in spec.h]
    except ParseError as exc:
        raise InputError(f"cannot parse h entry: {exc}") from exc
    if len(entries) != g.n or any(len(r) != 4 for r in entries):
        raise InputError("h must be an n x 4 matrix of grammar strings")
    ab = None
    for j, row in enumerate(entries):
        for e in row:
            if e:
                d = bidegree_of(e)
                if d is None:
                    raise InputError("inhomogeneous h entry")
                ab = BiDeg(*d) + g.degrees[j]
                break
        if ab is not None:
            break
    if ab is None:
        raise InputError("h is identically zero")
    try:
        return BigradedMatrix(entries, g.degrees, [ab] * 4)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _fdegs(spec: ProblemSpec, g: GSpec):
    if spec.fdegs:
        return [BiDeg(*d) for d in spec.fdegs]
    h = _build_h(spec, g)
    return [h.col_degrees[0]] * 3


def _augmented(spec: ProblemSpec, g: GSpec):
    if spec.mode == "implicitize" or (spec.h and not spec.fdegs):
        h = _build_h(spec, g)
        psi, _, _, _ = build_psi_implicit(g, h)
    else:
        psi, _, _ = build_psi_generic(g, _fdegs(spec, g))
    return augment(g.phi, psi)


def _region_data(spec: ProblemSpec):
    g = _build_gspec(spec)
    fdegs = _fdegs(spec, g)
    dd = DegreeData(row_degrees=g.degrees, phi_col_degrees=g.phi.col_degrees,
                    f_degrees=fdegs)
    region = en_region(dd)
    m = _augmented(spec, g)
    from bires.pipeline import _nonzero_minor_degree_bound
    max_minor, _ = _nonzero_minor_degree_bound(m)
    min_col = BiDeg(min(d.x for d in m.col_degrees),
                    min(d.y for d in m.col_degrees))
    override = tuple(spec.nu) if spec.nu else None
    choice = choose_nu(region, min_col, max_minor, override)
    return g, m, region, choice


def _ascii_region(region, nu):
    xs = [c.x for c in region.corners] + [nu.x]
    ys = [c.y for c in region.corners] + [nu.y]
    w, hgt = max(xs) + 2, max(ys) + 2
    corners = set((c.x, c.y) for c in region.corners)
    lines = []
    for y in range(hgt, -1, -1):
        row = []
        for x in range(w + 1):
            if (x, y) == (nu.x, nu.y):
                row.append("*")
            elif (x, y) in corners:
                row.append("o")
            elif region.contains((x, y)):
                row.append("#")
            else:
                row.append(".")
        lines.append(f"{y:>3} " + " ".join(row))
    lines.append("    " + " ".join(f"{x % 10}" for x in range(w + 1)))
    return lines


def _render_region_report(spec, region, choice, shape=None):
    data = {
        "mode": "region",
        "corners": region.as_pairs(),
        "nu": [choice.nu.x, choice.nu.y],
        "nu_source": choice.source,
        "problem": spec.to_dict(),
    }
    if choice.warning:
        data["warnings"] = [choice.warning]
    if shape:
        data["theta_shape"] = list(shape)
    return data


def _report_text(data):
    lines = []
    mode = data.get("mode")
    lines.append(f"mode: {mode}")
    if "corners" in data:
        lines.append("region corners: " +
                     " ".join(f"({x},{y})" for x, y in data["corners"]))
    if "nu" in data:
        src = data.get("nu_source", "")
        lines.append(f"nu: ({data['nu'][0]},{data['nu'][1]})"
                     + (f" [{src}]" if src else ""))
    if "theta_shape" in data:
        r, c = data["theta_shape"]
        lines.append(f"theta: {r} x {c}")
    if "coeff_degree_bounds" in data:
        lines.append("coefficient degrees N_i: "
                     + ", ".join(map(str, data["coeff_degree_bounds"])))
    if "predicted_surface_degree" in data:
        lines.append(f"predicted surface degree: "
                     f"{data['predicted_surface_degree']}")
    if data.get("corank"):
        lines.append(f"corank: {data['corank']} (fallback path)")
    if "output" in data:
        lines.append(f"equation: {data['output']}")
    if "output_homogeneous" in data:
        lines.append(f"homogeneous: {data['output_homogeneous']}")
    if data.get("multiple_of_implicit_equation"):
        lines.append("note: result is a multiple of the implicit equation")
    for w in data.get("warnings", ()):
        lines.append(f"warning: {w}")
    if "ascii" in data:
        lines.append("")
        lines.extend(data["ascii"])
    return "\n".join(lines) + "\n"


def _emit(data, fmt, out=sys.stdout):
    if fmt == "json":
        out.write(json.dumps(data, indent=2, sort_keys=True) + "\n")
    else:
        out.write(_report_text(data))


def _dump_strand(strand, path, seed):
    with open(path, "w") as fh:
        fh.write("\n".join(strand.dump_lines()) + "\n")
    assignment = random_assignment(strand.universe, seed)
    q = specialize(strand, assignment)
    with open(path + ".csv", "w") as fh:
        names = [v.name for v in strand.universe.vars]
        vals = [str(assignment[v]) for v in strand.universe.vars]
        fh.write("# specialized at " +
                 ", ".join(f"{n}={v}" for n, v in zip(names, vals)) + "\n")
        for row in q.rows:
            fh.write(",".join(str(x) for x in row) + "\n")


def cmd_run(spec: ProblemSpec, args) -> dict:
    g = _build_gspec(spec)
    if spec.mode == "resultant":
        report = residual_resultant(
            g, [BiDeg(*d) for d in spec.fdegs],
            nu_override=tuple(spec.nu) if spec.nu else None,
            seed=spec.seed, sum_mult=spec.g_sum_mult)
    elif spec.mode == "implicitize":
        report = implicitize(
            g, _build_h(spec, g),
            nu_override=tuple(spec.nu) if spec.nu else None,
            expected_sum_mult=spec.expected_sum_mult, seed=spec.seed)
    else:
        raise InputError(f"run does not handle mode {spec.mode!r}")
    data = report.to_dict()
    data["problem"] = spec.to_dict()
    if args.emit_matrix:
        m = _augmented(spec, g)
        strand = theta(m, report.nu)
        _dump_strand(strand, args.emit_matrix, spec.seed)
        data["matrix_dump"] = args.emit_matrix
    return data


def cmd_region(spec: ProblemSpec, args) -> dict:
    _, _, region, choice = _region_data(spec)
    data = _render_region_report(spec, region, choice)
    data["ascii"] = _ascii_region(region, choice.nu)
    return data


def cmd_theta(spec: ProblemSpec, args) -> dict:
    g, m, region, choice = _region_data(spec)
    strand = theta(m, choice.nu)
    data = _render_region_report(spec, region, choice, strand.shape())
    if args.emit_matrix:
        _dump_strand(strand, args.emit_matrix, spec.seed)
        data["matrix_dump"] = args.emit_matrix
    return data


def _parse_nu(text):
    try:
        a, b = text.split(",")
        return [int(a), int(b)]
    except ValueError:
        raise InputError(f"--nu expects A,B, got {text!r}") from None


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="bires",
        description="Residual resultants over P1xP1 and tensor product "
                    "surface implicitization.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("run", "region"):
        sp = sub.add_parser(name)
        sp.add_argument("problem", help="problem JSON file")
        sp.add_argument("--nu", default=None,
                        help="strand degree override, e.g. 3,0")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--emit-matrix", default=None, metavar="PATH")
        sp.add_argument("--format", choices=("text", "json"), default="text")
        sp.add_argument("--sum-mult", type=int, default=None)
    args = parser.parse_args(argv)
    try:
        try:
            with open(args.problem) as fh:
                raw = json.load(fh)
        except FileNotFoundError:
            raise InputError(f"file not found: {args.problem}") from None
        except json.JSONDecodeError as exc:
            raise InputError(f"invalid JSON: {exc}") from None
        spec = ProblemSpec.from_dict(raw)
        if args.nu is not None:
            spec.nu = _parse_nu(args.nu)
        if args.seed is not None:
            spec.seed = args.seed
        elif "BIRES_SEED" in os.environ:
            spec.seed = int(os.environ["BIRES_SEED"])
        if args.sum_mult is not None:
            spec.g_sum_mult = args.sum_mult
        if args.command == "region":
            data = cmd_region(spec, args)
        elif spec.mode == "region":
            data = cmd_region(spec, args)
        elif spec.mode == "theta":
            data = cmd_theta(spec, args)
        else:
            data = cmd_run(spec, args)
    except (InputError, ParseError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except ComputationError as exc:
        sys.stderr.write(f"computation failed: {exc}\n")
        return 2
    _emit(data, args.format)
    return 0


if __name__ == "__main__":
    sys.exit(main())
