"""Exact arithmetic for the bigraded ring Q[s,t,u,v] with two-level
coefficients, plus the text grammar for polynomial expressions.

Values are immutable after construction; every operation is a pure function.
A BiPoly maps parameter monomials in s,t,u,v to OuterPoly coefficients, an
OuterPoly maps outer monomials (X,Y,Z,W or generic c_i_j_a variables) to
rationals.  Both levels store exponents packed into integer keys so that
integer comparison of keys is lexicographic comparison of monomials.
"""

from __future__ import annotations

import re
from fractions import Fraction
from math import gcd
from typing import NamedTuple, Optional

from bires import kernel

Rat = Fraction

__all__ = [
    "Rat", "BiDeg", "ParamMonomial", "OuterVar", "Universe",
    "OuterPoly", "BiPoly", "monomial_basis", "bidegree_of",
    "parse_poly", "format_poly", "ParseError", "UnknownVariableError",
]


class ParseError(ValueError):
    def __init__(self, message, pos):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


class UnknownVariableError(ParseError):
    pass


class BiDeg(NamedTuple):
    x: int
    y: int

    def __add__(self, other):
        return BiDeg(self.x + other[0], self.y + other[1])

    def __sub__(self, other):
        return BiDeg(self.x - other[0], self.y - other[1])

    def dominates(self, other):
        """Componentwise >= (a partial order)."""
        return self.x >= other[0] and self.y >= other[1]

    def nonnegative(self):
        return self.x >= 0 and self.y >= 0

    def __str__(self):
        return f"({self.x},{self.y})"


# parameter monomials: exponents of s,t,u,v packed into 16-bit fields,
# s in the most significant field
_PW = 16
_PMASK = (1 << _PW) - 1


def pm_pack(es, et, eu, ev):
    return (((((es << _PW) | et) << _PW) | eu) << _PW) | ev


def pm_unpack(key):
    return (key >> (3 * _PW)) & _PMASK, (key >> (2 * _PW)) & _PMASK, \
        (key >> _PW) & _PMASK, key & _PMASK


def pm_bidegree(key):
    es, et, eu, ev = pm_unpack(key)
    return BiDeg(es + et, eu + ev)


def pm_total(key):
    es, et, eu, ev = pm_unpack(key)
    return es + et + eu + ev


class ParamMonomial(NamedTuple):
    es: int
    et: int
    eu: int
    ev: int

    @property
    def key(self):
        return pm_pack(self.es, self.et, self.eu, self.ev)

    @classmethod
    def from_key(cls, key):
        return cls(*pm_unpack(key))

    def bidegree(self):
        return BiDeg(self.es + self.et, self.eu + self.ev)


def monomial_basis(d) -> list:
    """All parameter monomials of bidegree d, graded-lex order with s>t>u>v.

    Empty when either component is negative.
    """
    a, b = d
    if a < 0 or b < 0:
        return []
    out = []
    for es in range(a, -1, -1):
        for eu in range(b, -1, -1):
            out.append(ParamMonomial(es, a - es, eu, b - eu))
    return out


def basis_keys(d):
    a, b = d
    if a < 0 or b < 0:
        return []
    return [pm_pack(es, a - es, eu, b - eu)
            for es in range(a, -1, -1) for eu in range(b, -1, -1)]


class OuterVar(NamedTuple):
    kind: str                     # "X" | "Y" | "Z" | "W" | "coeff"
    i: Optional[int] = None       # coeff indices (i, j, alpha)
    j: Optional[int] = None
    alpha: Optional[int] = None

    @property
    def name(self):
        if self.kind == "coeff":
            return f"c_{self.i}_{self.j}_{self.alpha}"
        return self.kind

    @classmethod
    def from_name(cls, name):
        if name in ("X", "Y", "Z", "W"):
            return cls(name)
        m = re.fullmatch(r"c_(\d+)_(\d+)_(\d+)", name)
        if not m:
            raise ValueError(f"not an outer variable name: {name!r}")
        return cls("coeff", int(m.group(1)), int(m.group(2)), int(m.group(3)))

    def block(self):
        """Coefficient-block index: X/Y/Z are blocks 0/1/2, c_i_j_a is block i."""
        if self.kind == "coeff":
            return self.i
        return {"X": 0, "Y": 1, "Z": 2}.get(self.kind)


class Universe:
    """Fixed, ordered set of outer variables with a packed key layout."""

    __slots__ = ("vars", "nvars", "width", "high", "masks", "shifts",
                 "_pos", "_blocks")

    def __init__(self, variables):
        self.vars = tuple(variables)
        self.nvars = len(self.vars)
        self.width = 16 if self.nvars <= 8 else 10
        w = self.width
        self.shifts = tuple((self.nvars - 1 - i) * w for i in range(self.nvars))
        fmask = (1 << w) - 1
        self.masks = tuple(fmask << sh for sh in self.shifts)
        self.high = sum(1 << (sh + w - 1) for sh in self.shifts)
        self._pos = {v: i for i, v in enumerate(self.vars)}
        self._pos.update({v.name: i for i, v in enumerate(self.vars)})
        blocks = {}
        for i, v in enumerate(self.vars):
            blocks.setdefault(v.block(), []).append(self.shifts[i])
        self._blocks = blocks

    @classmethod
    def empty(cls):
        return cls(())

    @classmethod
    def xyzw(cls):
        return cls((OuterVar("X"), OuterVar("Y"), OuterVar("Z"), OuterVar("W")))

    def position(self, var):
        try:
            return self._pos[var]
        except KeyError:
            name = var.name if isinstance(var, OuterVar) else var
            raise KeyError(f"variable {name} not in this universe") from None

    def var_key(self, var, exp=1):
        return exp << self.shifts[self.position(var)]

    def key_exponents(self, key):
        w, fmask = self.width, (1 << self.width) - 1
        return tuple((key >> sh) & fmask for sh in self.shifts)

    def key_total(self, key):
        fmask = (1 << self.width) - 1
        return sum((key >> sh) & fmask for sh in self.shifts)

    def key_block_degree(self, key, block):
        fmask = (1 << self.width) - 1
        return sum((key >> sh) & fmask for sh in self._blocks.get(block, ()))

    def blocks(self):
        return sorted(b for b in self._blocks if b is not None)

    def __eq__(self, other):
        return isinstance(other, Universe) and self.vars == other.vars

    def __hash__(self):
        return hash(self.vars)

    def __repr__(self):
        return f"Universe({', '.join(v.name for v in self.vars) or 'trivial'})"


def _check_same_universe(a, b):
    if a.u is not b.u and a.u != b.u:
        raise ValueError("incompatible outer variable universes")


class OuterPoly:
    """Sparse polynomial in the outer variables over Q."""

    __slots__ = ("u", "d")

    def __init__(self, universe, terms):
        self.u = universe
        self.d = terms

    @classmethod
    def zero(cls, universe):
        return cls(universe, {})

    @classmethod
    def const(cls, universe, c):
        c = Fraction(c)
        if c.denominator == 1:
            c = c.numerator
        return cls(universe, {0: c} if c else {})

    @classmethod
    def var(cls, universe, var, exp=1):
        return cls(universe, {universe.var_key(var, exp): 1})

    def is_zero(self):
        return not self.d

    def __bool__(self):
        return bool(self.d)

    def __eq__(self, other):
        return isinstance(other, OuterPoly) and self.d == other.d and self.u == other.u

    def __hash__(self):
        return hash((self.u, tuple(sorted(self.d.items()))))

    def __add__(self, other):
        _check_same_universe(self, other)
        return OuterPoly(self.u, kernel.padd(self.d, other.d))

    def __sub__(self, other):
        _check_same_universe(self, other)
        return OuterPoly(self.u, kernel.psub(self.d, other.d))

    def __neg__(self):
        return OuterPoly(self.u, kernel.pneg(self.d))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        _check_same_universe(self, other)
        u = self.u
        return OuterPoly(u, kernel.pmul(self.d, other.d, u.nvars, u.width, u.high))

    __rmul__ = __mul__

    def scale(self, c):
        return OuterPoly(self.u, kernel.pscale(self.d, c))

    def leading_key(self):
        if not self.d:
            raise ValueError("zero polynomial has no leading term")
        return max(self.d)

    def leading_coeff(self):
        return self.d[self.leading_key()]

    def total_degree(self):
        if not self.d:
            return -1
        kt = self.u.key_total
        return max(kt(k) for k in self.d)

    def degree_in(self, var):
        if not self.d:
            return -1
        sh = self.u.shifts[self.u.position(var)]
        fmask = (1 << self.u.width) - 1
        return max((k >> sh) & fmask for k in self.d)

    def block_degree(self, block):
        if not self.d:
            return -1
        kb = self.u.key_block_degree
        return max(kb(k, block) for k in self.d)

    def variables(self):
        """Positions of variables that actually occur."""
        if not self.d:
            return ()
        acc = 0
        for k in self.d:
            acc |= k
        out = []
        for i, m in enumerate(self.u.masks):
            if acc & m:
                out.append(i)
        return tuple(out)

    def evaluate(self, assignment):
        """Exact evaluation; assignment maps OuterVar (or name) -> Rat.

        Every variable that occurs must be covered.
        """
        vals = [None] * self.u.nvars
        for var, val in assignment.items():
            vals[self.u.position(var)] = Fraction(val)
        for pos in self.variables():
            if vals[pos] is None:
                raise KeyError(f"missing assignment for {self.u.vars[pos].name}")
        vals = [v if v is not None else Fraction(0) for v in vals]
        r = kernel.peval(self.d, vals, self.u.nvars, self.u.width)
        return Fraction(r)

    def map_coeffs(self, f):
        out = {}
        for k, c in self.d.items():
            c = f(c)
            if c:
                out[k] = c
        return OuterPoly(self.u, out)

    def content_and_primitive(self):
        """Rational c > 0 and integer-primitive q with self = c*q, lc(q) > 0."""
        if not self.d:
            return Fraction(0), self
        num = 0
        den = 1
        for c in self.d.values():
            f = Fraction(c)
            num = gcd(num, f.numerator)
            den = den * f.denominator // gcd(den, f.denominator)
        c = Fraction(num, den)
        if self.d[max(self.d)] < 0:
            c = -c
        inv = 1 / c
        return c, self.map_coeffs(lambda v: _int_or_frac(Fraction(v) * inv))

    def normalized(self):
        """Scaled to integer-primitive with positive leading coefficient."""
        return self.content_and_primitive()[1]

    def __repr__(self):
        return f"OuterPoly({format_outer(self)})"


def _int_or_frac(f):
    f = Fraction(f)
    return f.numerator if f.denominator == 1 else f


_UNSET = object()


class BiPoly:
    """Sparse bihomogeneous-aware polynomial: parameter monomial -> OuterPoly."""

    __slots__ = ("u", "d", "_tag")

    def __init__(self, universe, terms, tag=_UNSET):
        self.u = universe
        self.d = terms
        self._tag = tag

    @classmethod
    def zero(cls, universe):
        return cls(universe, {})

    @classmethod
    def const(cls, universe, c):
        op = OuterPoly.const(universe, c)
        return cls(universe, {0: op} if op else {})

    @classmethod
    def from_outer(cls, op):
        return cls(op.u, {0: op} if op else {})

    @classmethod
    def param(cls, universe, monomial):
        key = monomial.key if isinstance(monomial, ParamMonomial) else monomial
        return cls(universe, {key: OuterPoly.const(universe, 1)})

    def is_zero(self):
        return not self.d

    def __bool__(self):
        return bool(self.d)

    def __eq__(self, other):
        return isinstance(other, BiPoly) and self.u == other.u and self.d == other.d

    def __add__(self, other):
        _check_same_universe(self, other)
        r = dict(self.d)
        for k, op in other.d.items():
            cur = r.get(k)
            s = op if cur is None else cur + op
            if s:
                r[k] = s
            else:
                r.pop(k, None)
        return BiPoly(self.u, r)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return BiPoly(self.u, {k: -op for k, op in self.d.items()},
                      self._tag)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if isinstance(other, OuterPoly):
            return self.scale_outer(other)
        _check_same_universe(self, other)
        r = {}
        for ka, oa in self.d.items():
            for kb, ob in other.d.items():
                k = ka + kb
                prod = oa * ob
                cur = r.get(k)
                s = prod if cur is None else cur + prod
                if s:
                    r[k] = s
                else:
                    r.pop(k, None)
        return BiPoly(self.u, r)

    __rmul__ = __mul__

    def scale(self, c):
        if not c:
            return BiPoly.zero(self.u)
        return BiPoly(self.u, {k: op.scale(c) for k, op in self.d.items()},
                      self._tag)

    def scale_outer(self, op):
        if not op:
            return BiPoly.zero(self.u)
        return BiPoly(self.u, {k: v * op for k, v in self.d.items()})

    def shift(self, pm_key):
        """Multiply by the parameter monomial with packed key pm_key."""
        if not pm_key:
            return self
        return BiPoly(self.u, {k + pm_key: op for k, op in self.d.items()})

    def coeff(self, pm_key):
        return self.d.get(pm_key, OuterPoly.zero(self.u))

    def bidegree(self):
        """Common bidegree, or None when inhomogeneous; raises on zero."""
        if self._tag is not _UNSET:
            return self._tag
        if not self.d:
            raise ValueError("the zero polynomial has no bidegree")
        it = iter(self.d)
        deg = pm_bidegree(next(it))
        for k in it:
            if pm_bidegree(k) != deg:
                deg = None
                break
        self._tag = deg
        return deg

    def with_universe(self, universe):
        """Re-tag into a larger universe (only rational outer content moves)."""
        if universe == self.u:
            return self
        out = {}
        for k, op in self.d.items():
            if op.variables():
                raise ValueError("cannot coerce symbolic outer content between universes")
            out[k] = OuterPoly(universe, dict(op.d))
        return BiPoly(universe, out)

    def eval_param(self, sv, tv, uv, vv):
        """Evaluate the parameter variables at rationals; outer stays symbolic."""
        vals = (Fraction(sv), Fraction(tv), Fraction(uv), Fraction(vv))
        acc = OuterPoly.zero(self.u)
        for k, op in self.d.items():
            es, et, eu, ev = pm_unpack(k)
            c = vals[0] ** es * vals[1] ** et * vals[2] ** eu * vals[3] ** ev
            if c:
                acc = acc + op.scale(c)
        return acc

    def param_support(self):
        return sorted(self.d, key=lambda k: (pm_total(k), k), reverse=True)

    def __repr__(self):
        return f"BiPoly({format_poly(self)})"


def bidegree_of(p: BiPoly):
    """Common bidegree of a nonzero BiPoly, or None when inhomogeneous."""
    return p.bidegree()


def poly_arith(p: BiPoly, q: BiPoly, op: str) -> BiPoly:
    if op == "add":
        return p + q
    if op == "sub":
        return p - q
    if op == "mul":
        return p * q
    raise ValueError(f"unknown operation {op!r}")


# ----------------------------------------------------------------------
# text grammar
#
#   expr     := ["-"] term (("+"|"-") term)*
#   term     := factor ("*" factor)*
#   factor   := rational | var ("^" uint)? | "(" expr ")"
#   rational := int ("/" uint)?
#   var      := "s"|"t"|"u"|"v"|"X"|"Y"|"Z"|"W"|"c"_uint_uint_uint
#
# Whitespace is insignificant; implicit multiplication is not allowed.

_TOKEN = re.compile(r"\s*(?:(\d+)|(c_\d+_\d+_\d+|[stuvXYZW])|([-+*/^()])|(\S))")


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            break
        if m.group(4):
            raise ParseError(f"unexpected character {m.group(4)!r}", m.start(4))
        if m.group(1):
            tokens.append(("int", m.group(1), m.start(1)))
        elif m.group(2):
            tokens.append(("var", m.group(2), m.start(2)))
        else:
            tokens.append(("op", m.group(3), m.start(3)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


_PARAM_INDEX = {"s": 0, "t": 1, "u": 2, "v": 3}


class _Parser:
    def __init__(self, text, universe):
        self.toks = _tokenize(text)
        self.k = 0
        self.u = universe

    def peek(self):
        return self.toks[self.k]

    def next(self):
        t = self.toks[self.k]
        self.k += 1
        return t

    def expect_op(self, op):
        kind, val, pos = self.next()
        if kind != "op" or val != op:
            raise ParseError(f"expected {op!r}", pos)

    def parse(self):
        p = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected trailing input {val!r}", pos)
        return p

    def expr(self):
        kind, val, _ = self.peek()
        negate = False
        if kind == "op" and val == "-":
            self.next()
            negate = True
        p = self.term()
        if negate:
            p = -p
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.next()
                q = self.term()
                p = p + q if val == "+" else p - q
            else:
                return p

    def term(self):
        p = self.factor()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val == "*":
                self.next()
                p = p * self.factor()
            else:
                return p

    def factor(self):
        kind, val, pos = self.peek()
        if kind == "int":
            return BiPoly.const(self.u, self.rational())
        if kind == "var":
            self.next()
            exp = 1
            k2, v2, _ = self.peek()
            if k2 == "op" and v2 == "^":
                self.next()
                k3, v3, p3 = self.next()
                if k3 != "int":
                    raise ParseError("expected integer exponent", p3)
                exp = int(v3)
            return self.variable(val, exp, pos)
        if kind == "op" and val == "(":
            self.next()
            p = self.expr()
            self.expect_op(")")
            return p
        raise ParseError(f"expected a factor, found {val!r}" if val else "unexpected end of input", pos)

    def rational(self):
        kind, val, pos = self.next()
        num = int(val)
        k2, v2, _ = self.peek()
        if k2 == "op" and v2 == "/":
            self.next()
            k3, v3, p3 = self.next()
            if k3 != "int":
                raise ParseError("expected integer denominator", p3)
            return Fraction(num, int(v3))
        return Fraction(num)

    def variable(self, name, exp, pos):
        if name in _PARAM_INDEX:
            exps = [0, 0, 0, 0]
            exps[_PARAM_INDEX[name]] = exp
            return BiPoly.param(self.u, pm_pack(*exps))
        var = OuterVar.from_name(name)
        try:
            key = self.u.var_key(var, exp)
        except KeyError:
            raise UnknownVariableError(f"unknown variable {name!r} in this universe", pos) from None
        return BiPoly.from_outer(OuterPoly(self.u, {key: 1}))


def parse_poly(text: str, universe: Universe) -> BiPoly:
    """Parse a polynomial expression over the given outer-variable universe."""
    return _Parser(text, universe).parse()


def _coeff_str(c):
    f = Fraction(c)
    if f.denominator == 1:
        return str(f.numerator)
    return f"{f.numerator}/{f.denominator}"


def _outer_monomial_str(universe, key):
    pieces = []
    fmask = (1 << universe.width) - 1
    for i, sh in enumerate(universe.shifts):
        e = (key >> sh) & fmask
        if e == 1:
            pieces.append(universe.vars[i].name)
        elif e > 1:
            pieces.append(f"{universe.vars[i].name}^{e}")
    return pieces


def _param_monomial_str(key):
    pieces = []
    for name, e in zip(PARAM_NAMES, pm_unpack(key)):
        if e == 1:
            pieces.append(name)
        elif e > 1:
            pieces.append(f"{name}^{e}")
    return pieces


PARAM_NAMES = ("s", "t", "u", "v")


def format_outer(op: OuterPoly) -> str:
    """Grammar string for a pure outer polynomial."""
    if not op.d:
        return "0"
    chunks = []
    for key in sorted(op.d, reverse=True):
        c = op.d[key]
        mono = _outer_monomial_str(op.u, key)
        neg = c < 0
        c = -c if neg else c
        pieces = ([] if (c == 1 and mono) else [_coeff_str(c)]) + mono
        body = "*".join(pieces)
        if not chunks:
            chunks.append(f"-{body}" if neg else body)
        else:
            chunks.append(f"- {body}" if neg else f"+ {body}")
    return " ".join(chunks)


def format_poly(p: BiPoly) -> str:
    """Grammar string; parse_poly(format_poly(p)) == p up to term order."""
    if not p.d:
        return "0"
    chunks = []
    support = p.param_support()
    for pm in support:
        op = p.d[pm]
        pstr = _param_monomial_str(pm)
        if len(op.d) > 1:
            inner = format_outer(op)
            if pstr:
                body = f"({inner})*" + "*".join(pstr)
                sign = "+"
            else:
                body = inner if not chunks else f"({inner})"
                sign = "+"
            if not chunks:
                chunks.append(body)
            else:
                chunks.append(f"{sign} {body}")
        else:
            ((key, c),) = op.d.items()
            mono = _outer_monomial_str(op.u, key) + pstr
            neg = c < 0
            c = -c if neg else c
            pieces = ([] if (c == 1 and mono) else [_coeff_str(c)]) + mono
            body = "*".join(pieces)
            if not chunks:
                chunks.append(f"-{body}" if neg else body)
            else:
                chunks.append(f"- {body}" if neg else f"+ {body}")
    return " ".join(chunks)
