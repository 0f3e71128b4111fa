"""Sparse modular gcd for polynomials too large for the primitive PRS.

Per prime: probe the gcd's degree in every variable with univariate image
gcds, then lift one variable at a time.  Each lifting stage solves one
homogeneous linear system mod p whose unknowns are the gcd coefficients on
the current support skeleton; the per-image scale ambiguity is eliminated
by substituting the monic leading-power row, so no leading-coefficient
recursion is needed.  Exact integer coefficients come from CRT plus
rational reconstruction, and every candidate is verified by exact trial
division before it is returned.  Returns None when no candidate survives,
in which case the caller falls back to the PRS.
"""

from __future__ import annotations

import random
from fractions import Fraction
from math import gcd as igcd, isqrt

import numpy as np

from bires import kernel
from bires.ring import OuterPoly


class _Unlucky(Exception):
    pass


def _is_prime(n):
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _next_prime(n):
    n += 1 + (n % 2)
    while not _is_prime(n):
        n += 2
    return n


class _Plan:
    """Numpy evaluation plan for one polynomial mod p over active variables."""

    __slots__ = ("exps", "coeffs", "maxdeg", "nvars")

    def __init__(self, poly, positions, p):
        u = poly.u
        fmask = (1 << u.width) - 1
        n = len(poly.d)
        self.nvars = len(positions)
        self.exps = np.zeros((n, self.nvars), dtype=np.int64)
        self.coeffs = np.zeros(n, dtype=np.int64)
        pos_index = {v: i for i, v in enumerate(positions)}
        for t, (key, c) in enumerate(poly.d.items()):
            for v, i in pos_index.items():
                self.exps[t, i] = (key >> u.shifts[v]) & fmask
            self.coeffs[t] = int(c) % p
        self.maxdeg = self.exps.max(axis=0) if n else np.zeros(self.nvars, dtype=np.int64)

    def eval_univariate(self, keep, vals, p):
        """Coefficient array of the univariate image in variable index
        ``keep`` with every other variable set to vals[i]."""
        acc = self.coeffs.copy()
        for i in range(self.nvars):
            if i == keep:
                continue
            d = int(self.maxdeg[i])
            pw = np.empty(d + 1, dtype=np.int64)
            pw[0] = 1
            v = int(vals[i]) % p
            for e in range(1, d + 1):
                pw[e] = pw[e - 1] * v % p
            acc = acc * pw[self.exps[:, i]] % p
        out = np.zeros(int(self.maxdeg[keep]) + 1, dtype=np.int64)
        np.add.at(out, self.exps[:, keep], acc)
        return out % p


def _gf_gcd_monic(f, g, p):
    """Monic gcd of two univariate coefficient arrays mod p (may be zero)."""
    f = [int(x) % p for x in f]
    g = [int(x) % p for x in g]

    def trim(h):
        while h and h[-1] == 0:
            h.pop()
        return h

    f, g = trim(f), trim(g)
    while g:
        inv = pow(g[-1], p - 2, p)
        g = [c * inv % p for c in g]
        while len(f) >= len(g):
            lead = f[-1]
            if lead:
                off = len(f) - len(g)
                for i in range(len(g)):
                    f[off + i] = (f[off + i] - lead * g[i]) % p
            f.pop()
            f = trim(f)
        f, g = g, trim(f)
    if not f:
        return []
    inv = pow(f[-1], p - 2, p)
    return [c * inv % p for c in f]


def _nullspace_one(mat, p):
    """One kernel vector of mat mod p if the kernel is 1-dimensional,
    else None.  mat is int64, entries reduced mod p."""
    m = mat % p
    rows, cols = m.shape
    piv_of_col = [-1] * cols
    r = 0
    for c in range(cols):
        if r == rows:
            break
        block = m[r:, c]
        nz = np.nonzero(block)[0]
        if nz.size == 0:
            continue
        pr = r + int(nz[0])
        if pr != r:
            m[[r, pr]] = m[[pr, r]]
        inv = pow(int(m[r, c]), p - 2, p)
        m[r] = m[r] * inv % p
        col = m[:, c].copy()
        col[r] = 0
        nzr = np.nonzero(col)[0]
        if nzr.size:
            m[nzr] = (m[nzr] - np.outer(col[nzr], m[r])) % p
        piv_of_col[c] = r
        r += 1
    free = [c for c in range(cols) if piv_of_col[c] == -1]
    if len(free) != 1:
        return None
    fc = free[0]
    vec = np.zeros(cols, dtype=np.int64)
    vec[fc] = 1
    for c in range(cols):
        pr = piv_of_col[c]
        if pr >= 0:
            vec[c] = (-int(m[pr, fc])) % p
    return vec


def _crt_pair(a, m, b, p):
    # combine x = a mod m, x = b mod p (m, p coprime)
    inv = pow(m % p, p - 2, p)
    t = (b - a) % p * inv % p
    return a + m * t


def _ratrec(a, m):
    """Wang rational reconstruction of a mod m; None when impossible."""
    a %= m
    bound = isqrt(m // 2)
    r0, r1 = m, a
    s0, s1 = 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    if r1 == 0 or abs(s1) > bound or igcd(r1, abs(s1)) != 1:
        return None
    if igcd(abs(s1), m) != 1:
        return None
    return Fraction(r1, s1)


class _ModImage:
    """Zippel lifting state for one prime."""

    def __init__(self, a, b, p, rng):
        self.p = p
        self.rng = rng
        self.u = a.u
        positions = sorted(set(a.variables()) | set(b.variables()))
        self.positions = positions
        self.pa = _Plan(a, positions, p)
        self.pb = _Plan(b, positions, p)

    def _rand(self):
        return self.rng.randint(1, self.p - 1)

    def _image(self, keep, vals, expect=None):
        """Monic univariate image gcd in variable index ``keep`` at exactly
        the given point; None when ``expect`` is given and the degree
        disagrees (the caller discards the sample)."""
        fa = self.pa.eval_univariate(keep, vals, self.p)
        fb = self.pb.eval_univariate(keep, vals, self.p)
        g = _gf_gcd_monic(fa, fb, self.p)
        if not g:
            raise _Unlucky("zero image")
        if expect is not None and len(g) - 1 != expect:
            if len(g) - 1 < expect:
                raise _Unlucky("image degree dropped below expectation")
            return None
        return g

    def probe_degrees(self, rounds=2):
        """Per-variable degree of the gcd, by the minimum over probe rounds
        of univariate image gcd degrees."""
        k = len(self.positions)
        degs = [None] * k
        for _ in range(rounds):
            for i in range(k):
                if min(int(self.pa.maxdeg[i]), int(self.pb.maxdeg[i])) == 0:
                    degs[i] = 0
                    continue
                vals = [self._rand() for _ in range(k)]
                g = _gf_gcd_monic(
                    self.pa.eval_univariate(i, vals, self.p),
                    self.pb.eval_univariate(i, vals, self.p), self.p)
                if not g:
                    raise _Unlucky("zero probe image")
                d = len(g) - 1
                degs[i] = d if degs[i] is None else min(degs[i], d)
        return degs

    def lift(self, degs):
        """Monomial support (exponent tuples over self.positions) and mod-p
        coefficients of the primitive part of the gcd with respect to the
        main variable, normalized to 1 at the greatest support monomial.

        Because every image is made monic, the lifted object is pp_x(gcd):
        content in the other variables is invisible here and is restored by
        the caller.  Each stage shrinks its degree bound until the solution
        space is one-dimensional, which strips the content's contribution
        to the probed degrees.
        """
        k = len(self.positions)
        order = sorted((i for i in range(k) if degs[i] > 0),
                       key=lambda i: -degs[i])
        if not order:
            return None, ((0,) * k,), {(0,) * k: 1}
        x = order[0]
        dx = degs[x]
        g0 = tail = None
        for _ in range(8):
            tail = [self._rand() for _ in range(k)]
            g0 = self._image(x, tail, expect=dx)
            if g0 is not None:
                break
        if g0 is None:
            raise _Unlucky("could not find a tail with the expected degree")
        # skeleton: per x-power, exponent tuples over lifted variables
        lifted = []
        skel = {j: [()] for j in range(dx + 1) if g0[j]}
        coeffs = {j: {(): int(g0[j])} for j in skel}
        for y in order[1:]:
            skel, coeffs = self._lift_stage(x, dx, lifted, skel, y, degs[y], tail)
            lifted.append(y)
        support = []
        values = {}
        for j, ws in skel.items():
            for w in ws:
                c = coeffs[j].get(w, 0)
                if not c:
                    continue

                exps = [0] * k
                exps[x] = j
                for v, e in zip(lifted, w):
                    exps[v] = e
                support.append(tuple(exps))
                values[tuple(exps)] = c
        support.sort(reverse=True)
        top = support[0]
        inv = pow(values[top], self.p - 2, self.p)
        values = {m: c * inv % self.p for m, c in values.items()}
        return x, tuple(support), values

    def _collect_samples(self, x, dx, lifted, skel, y, count, tail):
        p = self.p
        samples = []
        attempts = 0
        while len(samples) < count:
            attempts += 1
            if attempts > 3 * count + 20:
                raise _Unlucky("too many degenerate stage samples")
            zvals = {v: self._rand() for v in lifted}
            yval = self._rand()
            vals = list(tail)
            for v, zv in zvals.items():
                vals[v] = zv
            vals[y] = yval
            img = self._image(x, vals, expect=dx)
            if img is None:
                continue
            wval = {}
            for ws in skel.values():
                for w in ws:
                    if w not in wval:
                        acc = 1
                        for v, e in zip(lifted, w):
                            acc = acc * pow(zvals[v], e, p) % p
                        wval[w] = acc
            samples.append((yval, wval, img))
        return samples

    def _lift_stage(self, x, dx, lifted, skel, y, dy, tail):
        """One joint lifting stage: extend the skeleton by variable y.

        Per-image scales are eliminated by substituting the monic leading
        x-power row, leaving a homogeneous system whose one-dimensional
        kernel is the new coefficient vector.  A kernel of higher dimension
        means the degree bound includes content; shrink and re-solve.
        """
        p = self.p
        jstar = max(skel)
        npows = [j for j in skel if j != jstar]
        if not npows:
            # x-primitive with a single x-power means pp = x^jstar
            return {jstar: [w + (0,) for w in skel[jstar]]}, \
                {jstar: {w + (0,): 1 for w in skel[jstar]}}
        base_unknowns = sum(len(ws) for ws in skel.values())
        nsamples = (base_unknowns * (dy + 1)) // len(npows) + 6
        samples = self._collect_samples(x, dx, lifted, skel, y, nsamples, tail)
        for dy_try in range(dy, -1, -1):
            unknown_index = {}
            for j, ws in skel.items():
                for w in ws:
                    for e in range(dy_try + 1):
                        unknown_index[(j, w, e)] = len(unknown_index)
            rows = []
            for yval, wval, img in samples:
                ypow = [1] * (dy_try + 1)
                for e in range(1, dy_try + 1):
                    ypow[e] = ypow[e - 1] * yval % p
                for j in npows:
                    row = np.zeros(len(unknown_index), dtype=np.int64)
                    vj = int(img[j]) % p
                    for w in skel[j]:
                        base = wval[w]
                        for e in range(dy_try + 1):
                            row[unknown_index[(j, w, e)]] = base * ypow[e] % p
                    for w in skel[jstar]:
                        base = vj * wval[w] % p
                        for e in range(dy_try + 1):
                            idx = unknown_index[(jstar, w, e)]
                            row[idx] = (row[idx] - base * ypow[e]) % p
                    rows.append(row)
            vec = _nullspace_one(np.array(rows, dtype=np.int64), p)
            if vec is None:
                continue
            new_skel = {}
            new_coeffs = {}
            for (j, w, e), idx in unknown_index.items():
                c = int(vec[idx]) % p
                if not c:
                    continue
                new_skel.setdefault(j, []).append(w + (e,))
                new_coeffs.setdefault(j, {})[w + (e,)] = c
            if jstar not in new_skel:
                raise _Unlucky("leading power lost during lifting")
            return new_skel, new_coeffs
        raise _Unlucky("no stage degree bound gave a one-dimensional kernel")


def _exps_to_key(u, positions, exps):
    key = 0
    for v, e in zip(positions, exps):
        key |= e << u.shifts[v]
    return key


def sparse_gcd_pp(a: OuterPoly, b: OuterPoly, max_primes=6, seed=0x5eed):
    """Primitive part (with respect to an internally chosen main variable)
    of gcd(a, b), verified by trial division; returns (poly, main_position)
    or (None, None) on failure.  A constant part means the full gcd is pure
    content in the main variable."""
    pa = a.normalized()
    pb = b.normalized()
    u = pa.u
    rng = random.Random(seed ^ (len(pa.d) * 1000003 + len(pb.d)))
    p = 1 << 29
    support = None
    residues = None
    modulus = None
    xpos = None
    for _ in range(max_primes):
        p = _next_prime(p)
        try:
            state = _ModImage(pa, pb, p, rng)
            degs = state.probe_degrees()
            if all(d == 0 for d in degs):
                return OuterPoly.const(u, 1), None
            x, sup, values = state.lift(degs)
        except _Unlucky:
            continue
        if support is None or sup != support:
            support = sup
            xpos = state.positions[x]
            residues = {m: values[m] for m in sup}
            modulus = p
        else:
            residues = {m: _crt_pair(residues[m], modulus, values[m], p)
                        for m in sup}
            modulus *= p
        cand = _reconstruct(u, state.positions, support, residues, modulus)
        if cand is None:
            continue
        ok_a, _ = _try_div(cand, pa)
        if not ok_a:
            continue
        ok_b, _ = _try_div(cand, pb)
        if not ok_b:
            continue
        return cand, xpos
    return None, None


def _try_div(d, p):
    u = d.u
    q = kernel.pdiv_exact(p.d, d.d, u.nvars, u.width, u.high, u.masks)
    return (q is not None), q


def _reconstruct(u, positions, support, residues, modulus):
    coeffs = {}
    den = 1
    for m in support:
        f = _ratrec(residues[m], modulus)
        if f is None:
            return None
        coeffs[m] = f
        den = den * f.denominator // igcd(den, f.denominator)
    terms = {}
    for m, f in coeffs.items():
        c = f * den
        terms[_exps_to_key(u, positions, m)] = int(c)
    return OuterPoly(u, terms).normalized()
