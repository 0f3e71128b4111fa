"""Pure-Python kernel for packed-exponent sparse polynomial dicts.

A polynomial is a dict mapping a packed exponent key (int) to a nonzero
coefficient (int or Fraction).  Keys pack one exponent per variable into
fixed-width bit fields, most significant field first, so integer comparison
of keys is lexicographic comparison of monomials.

The compiled twin (bires._kernel_c) implements the same functions; import
through bires.kernel to get whichever is available.
"""

from fractions import Fraction

KERNEL_NAME = "python"


def _coeff(c):
    # collapse Fractions with unit denominator back to int
    if type(c) is Fraction and c.denominator == 1:
        return c.numerator
    return c


def padd(a, b):
    if not a:
        return dict(b)
    if not b:
        return dict(a)
    r = dict(a)
    get = r.get
    for k, c in b.items():
        s = get(k)
        if s is None:
            r[k] = c
        else:
            s = s + c
            if s:
                r[k] = s
            else:
                del r[k]
    return r


def psub(a, b):
    r = dict(a)
    get = r.get
    for k, c in b.items():
        s = get(k)
        if s is None:
            r[k] = -c
        else:
            s = s - c
            if s:
                r[k] = s
            else:
                del r[k]
    return r


def pneg(a):
    return {k: -c for k, c in a.items()}


def pscale(a, c):
    if not c:
        return {}
    return {k: _coeff(v * c) for k, v in a.items()}


def _unpack(key, nvars, width):
    mask = (1 << width) - 1
    out = [0] * nvars
    for i in range(nvars - 1, -1, -1):
        out[i] = key & mask
        key >>= width
    return out


def _pack(exps, width):
    key = 0
    for e in exps:
        key = (key << width) | e
    return key


def _add_keys_checked(ka, kb, nvars, width):
    ea = _unpack(ka, nvars, width)
    eb = _unpack(kb, nvars, width)
    limit = (1 << width) - 1
    out = []
    for x, y in zip(ea, eb):
        s = x + y
        if s > limit:
            raise OverflowError("exponent field overflow; widen the key layout")
        out.append(s)
    return _pack(out, width)


def pmul_term(a, key, c, nvars, width, high):
    """a * (c * monomial(key))."""
    if not c:
        return {}
    if not key:
        return pscale(a, c)
    r = {}
    if key & high:
        for k, v in a.items():
            r[_add_keys_checked(k, key, nvars, width)] = _coeff(v * c)
        return r
    for k, v in a.items():
        if k & high:
            r[_add_keys_checked(k, key, nvars, width)] = _coeff(v * c)
        else:
            r[k + key] = _coeff(v * c)
    return r


def pmul(a, b, nvars, width, high):
    if not a or not b:
        return {}
    if len(a) < len(b):
        a, b = b, a
    if len(b) == 1:
        ((k, c),) = b.items()
        return pmul_term(a, k, c, nvars, width, high)
    r = {}
    get = r.get
    items = list(a.items())
    for kb, cb in b.items():
        if kb & high:
            for ka, ca in items:
                k = _add_keys_checked(ka, kb, nvars, width)
                s = get(k)
                s = ca * cb if s is None else s + ca * cb
                if s:
                    r[k] = s
                else:
                    del r[k]
            continue
        for ka, ca in items:
            if ka & high:
                k = _add_keys_checked(ka, kb, nvars, width)
            else:
                k = ka + kb
            s = get(k)
            s = ca * cb if s is None else s + ca * cb
            if s:
                r[k] = s
            else:
                del r[k]
    return {k: _coeff(c) for k, c in r.items()}


def monomial_divides(ka, kb, masks):
    """True when monomial kb divides monomial ka, fieldwise."""
    for m in masks:
        if (ka & m) < (kb & m):
            return False
    return True


def pdiv_exact(a, b, nvars, width, high, masks):
    """Exact division a / b; returns the quotient dict or None on failure."""
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    if not a:
        return {}
    bk = max(b)
    bc = b[bk]
    r = dict(a)
    q = {}
    while r:
        ak = max(r)
        if not monomial_divides(ak, bk, masks):
            return None
        qk = ak - bk
        qc = r[ak]
        if type(qc) is int and type(bc) is int:
            d, m = divmod(qc, bc)
            qc = d if not m else Fraction(qc, bc)
        else:
            qc = _coeff(Fraction(qc) / Fraction(bc) if not isinstance(qc, Fraction) or not isinstance(bc, Fraction) else qc / bc)
        q[qk] = qc
        # r -= qc * monomial(qk) * b
        for kb, cb in b.items():
            if (kb & high) or (qk & high):
                k = _add_keys_checked(kb, qk, nvars, width)
            else:
                k = kb + qk
            s = r.get(k)
            s = -qc * cb if s is None else s - qc * cb
            if s:
                r[k] = s
            else:
                del r[k]
    return q


def peval(a, vals, nvars, width):
    """Evaluate at vals (sequence of Fraction/int, one per variable)."""
    mask = (1 << width) - 1
    total = 0
    for key, c in a.items():
        acc = c
        k = key
        for i in range(nvars - 1, -1, -1):
            e = k & mask
            if e:
                acc = acc * vals[i] ** e
            k >>= width
        total += acc
    return _coeff(total if isinstance(total, (int, Fraction)) else total)
