# -*- coding: utf-8 -*-
# Copyright 2014 The mrkit authors. See LICENSE file for details.


"""
mrkit.series -- exact truncated series arithmetic used throughout mrkit.

The ring tower is: rationals (`fractions.Fraction`) -> `EpsLaurent` (truncated
Laurent series in eps) -> `XJet` (truncated power series in X) -> `XiSeries`
(Laurent series in one spectral variable) -> `MultiSeries` (several spectral
variables, expanded in a fixed region) -> `Mat2` (2x2 matrices over any of the
above).

Every truncated value records the window in which it is exact. Identity checks
only ever look inside that window.
"""


import logging
from collections import namedtuple
from contextlib import contextmanager
from fractions import Fraction
from math import comb


log = logging.getLogger("series")


INF = float("inf")


class SeriesError(Exception):
    pass


class NotInvertible(SeriesError):
    pass


class BadExponent(SeriesError):
    pass


class RegionError(SeriesError):
    pass


class WindowTooLow(SeriesError):
    """Raised when a result is exact on a smaller window than requested."""
    pass


class IdentityViolation(SeriesError):
    """Raised when an identity that must hold coefficientwise does not.

    Public interface:
        self.identity: short name of the violated identity.
        self.locus:    human-readable place of the first nonzero coefficient.
    """
    def __init__(self, identity, locus):
        self.identity = identity
        self.locus = locus
        SeriesError.__init__(self, "%s violated at %s" % (identity, locus))


class Check(namedtuple("Check", "identity window")):
    """Record of an identity that held inside `window` (a short string)."""
    __slots__ = ()

    def to_json(self):
        return {"identity": self.identity, "window": self.window,
            "status": "pass"}


class Truncation(object):
    """Process-wide truncation orders.

    Public interface:
        self.n_x:         highest X power stored in an `XJet`.
        self.n_xi:        default spectral depth (kernels without a budget).
        self.eps_ceiling: highest eps power stored in an `EpsLaurent`.
    """
    def __init__(self, n_x=12, n_xi=8, eps_ceiling=8):
        for name, value in (("n_x", n_x), ("n_xi", n_xi),
                ("eps_ceiling", eps_ceiling)):
            if not isinstance(value, int) or isinstance(value, bool):
                raise SeriesError("Truncation %s must be int." % name)
        if n_x < 0 or n_xi < 0:
            raise SeriesError("Truncation orders must not be negative.")
        self.n_x = n_x
        self.n_xi = n_xi
        self.eps_ceiling = eps_ceiling

    def __repr__(self):
        return "%s(n_x=%s, n_xi=%s, eps_ceiling=%s)" % (
            self.__class__.__name__, self.n_x, self.n_xi, self.eps_ceiling)


_truncation = Truncation()


def set_truncation(n_x=None, n_xi=None, eps_ceiling=None):
    """Install new truncation orders; unspecified values are kept."""
    global _truncation
    t = _truncation
    _truncation = Truncation(
        t.n_x if n_x is None else n_x,
        t.n_xi if n_xi is None else n_xi,
        t.eps_ceiling if eps_ceiling is None else eps_ceiling)
    log.debug("Truncation set to %r", _truncation)
    return _truncation


def get_truncation():
    return _truncation


def install_truncation(truncation):
    """Install `truncation` as a whole (no field is kept from before)."""
    global _truncation
    assert isinstance(truncation, Truncation)
    _truncation = truncation
    log.debug("Truncation set to %r", _truncation)
    return _truncation


@contextmanager
def working_truncation(n_x=None, n_xi=None, eps_ceiling=None):
    """Temporarily change truncation orders, restore them on exit."""
    saved = _truncation
    try:
        yield set_truncation(n_x, n_xi, eps_ceiling)
    finally:
        install_truncation(saved)


def rational(s):
    """Parse 'p/q', 'p' or an int into a reduced `Fraction`."""
    if isinstance(s, bool):
        raise ValueError("Not a rational: %r" % (s,))
    if isinstance(s, (int, Fraction)):
        return Fraction(s)
    if not isinstance(s, str):
        raise ValueError("Not a rational: %r" % (s,))
    return Fraction(s.strip())


def _is_scalar(x):
    return isinstance(x, (int, Fraction))


def is_exact_zero(c):
    """True if `c` is zero with no truncation uncertainty attached."""
    if _is_scalar(c):
        return c == 0
    return c.is_exact_zero()


def derive(c):
    """X-derivative of a coefficient; rational constants map to 0."""
    if _is_scalar(c):
        return 0
    return c.derive()


def locus(c):
    """Describe where `c` is first nonzero, or return None if it vanishes."""
    if _is_scalar(c):
        return None if c == 0 else []
    return c.locus()


def to_json(c):
    if _is_scalar(c):
        return str(Fraction(c))
    return c.to_json()


def to_text(c):
    if _is_scalar(c):
        return str(Fraction(c))
    return c.to_text()


def _inverse(c):
    if _is_scalar(c):
        if c == 0:
            raise NotInvertible("Cannot invert zero.")
        return Fraction(1) / c
    return c.invert()


def _cut(valid, n):
    """Highest stored index for a value exact up to `valid`, capped at `n`."""
    if valid >= n:
        return n
    return int(valid)


def _product_valid(va, oa, vb, ob):
    # `o` is the lowest order where a value may be nonzero.
    return min(va + ob, vb + oa)


def _eps_term(e, v):
    if e == 0:
        return str(v)
    power = "ε" if e == 1 else "ε^%s" % e
    if v == 1:
        return power
    if v == -1:
        return "-" + power
    return "(%s)·%s" % (v, power)


class EpsLaurent(object):
    """Truncated Laurent series in eps with rational coefficients.

    Public interface:
        self.valid: highest eps power known exactly (`INF` if exact).
        self.items(): sorted (exponent, Fraction) pairs.
    """
    __slots__ = ("_c", "valid")

    def __init__(self, coeffs=None, valid=INF):
        ceiling = _truncation.eps_ceiling
        c = {}
        clipped = False
        for e, v in (coeffs or {}).items():
            v = rational(v)
            if not v or e > valid:
                continue
            if e > ceiling:
                clipped = True
                continue
            c[int(e)] = v
        self._c = c
        self.valid = min(valid, ceiling) if clipped else valid

    @classmethod
    def _make(cls, c, valid):
        self = cls.__new__(cls)
        self._c = c
        self.valid = valid
        return self

    @classmethod
    def eps(cls, power=1):
        return cls._make({power: Fraction(1)}, INF)

    @classmethod
    def const(cls, v):
        v = rational(v)
        return cls._make({0: v} if v else {}, INF)

    def items(self):
        return sorted(self._c.items())

    def coeff(self, e):
        return self._c.get(e, Fraction(0))

    def lowest(self):
        return min(self._c) if self._c else None

    def _order(self):
        return min(self._c) if self._c else self.valid + 1

    def is_exact_zero(self):
        return not self._c and self.valid == INF

    def __bool__(self):
        return bool(self._c)

    def __add__(self, other):
        if _is_scalar(other):
            if not other:
                return self
            other = EpsLaurent._make({0: Fraction(other)}, INF)
        elif not isinstance(other, EpsLaurent):
            return NotImplemented
        valid = min(self.valid, other.valid)
        c = {e: v for e, v in self._c.items() if e <= valid}
        for e, v in other._c.items():
            if e > valid:
                continue
            s = c.get(e, 0) + v
            if s:
                c[e] = s
            else:
                c.pop(e, None)
        return EpsLaurent._make(c, valid)

    __radd__ = __add__

    def __neg__(self):
        return EpsLaurent._make({e: -v for e, v in self._c.items()},
            self.valid)

    def __sub__(self, other):
        if _is_scalar(other) or isinstance(other, EpsLaurent):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if _is_scalar(other):
            if not other:
                return EPS_ZERO
            return EpsLaurent._make(
                {e: v * other for e, v in self._c.items()}, self.valid)
        if not isinstance(other, EpsLaurent):
            return NotImplemented
        valid = _product_valid(
            self.valid, self._order(), other.valid, other._order())
        ceiling = _truncation.eps_ceiling
        top = min(valid, ceiling)
        c = {}
        clipped = False
        for ea, va in self._c.items():
            for eb, vb in other._c.items():
                e = ea + eb
                if e > top:
                    if e <= valid:
                        clipped = True
                    continue
                c[e] = c.get(e, 0) + va * vb
        c = {e: v for e, v in c.items() if v}
        if clipped:
            valid = min(valid, ceiling)
        return EpsLaurent._make(c, valid)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if _is_scalar(other):
            return self * (Fraction(1) / Fraction(other))
        if isinstance(other, EpsLaurent):
            return self * other.invert()
        return NotImplemented

    def shift(self, n):
        """Multiply by eps**n."""
        return EpsLaurent._make({e + n: v for e, v in self._c.items()},
            self.valid + n)

    def invert(self):
        if not self._c:
            raise NotInvertible("Cannot invert %s." % self)
        lo = min(self._c)
        lead_inv = Fraction(1) / self._c[lo]
        if len(self._c) == 1 and self.valid == INF:
            return EpsLaurent._make({-lo: lead_inv}, INF)
        valid = min(_truncation.eps_ceiling, self.valid - 2 * lo)
        b = {}
        for n in range(0, int(valid) + lo + 1):
            if n == 0:
                b[-lo] = lead_inv
                continue
            s = 0
            for i in range(1, n + 1):
                ai = self._c.get(lo + i)
                if ai:
                    s += ai * b.get(-lo + n - i, 0)
            if s:
                b[-lo + n] = -lead_inv * s
        return EpsLaurent._make(b, valid)

    def __eq__(self, other):
        if not (_is_scalar(other) or isinstance(other, EpsLaurent)):
            return NotImplemented
        return not (self - other)

    def __ne__(self, other):
        r = self.__eq__(other)
        if r is NotImplemented:
            return r
        return not r

    __hash__ = None

    def locus(self):
        if not self._c:
            return None
        return ["eps^%s" % min(self._c)]

    def to_json(self):
        if not self._c:
            return "0"
        if list(self._c) == [0]:
            return str(self._c[0])
        return dict(("eps^%s" % e, str(v)) for e, v in self._c.items())

    def to_text(self):
        if not self._c:
            return "0"
        return " + ".join(_eps_term(e, v) for e, v in self.items())

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return "%s(%r, valid=%s)" % (self.__class__.__name__,
            dict(self.items()), self.valid)


EPS_ZERO = EpsLaurent._make({}, INF)
EPS_ONE = EpsLaurent._make({0: Fraction(1)}, INF)


def _as_eps(v):
    if isinstance(v, EpsLaurent):
        return v
    return EpsLaurent.const(v)


def eps_arith(a, b=None, op="add"):
    """Dispatch one eps-Laurent operation: 'add', 'mul' or 'invert'."""
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "invert":
        return a.invert()
    raise SeriesError("Unknown eps operation '%s'." % op)


class XJet(object):
    """Truncated power series in X with `EpsLaurent` coefficients.

    Public interface:
        self.valid: highest X power known exactly (`INF` if exact).
        self.coeff(i): `EpsLaurent` coefficient of X**i.
        derive(), antiderivative(), invert(), is_constant()
    """
    __slots__ = ("_c", "valid")

    def __init__(self, coeffs=(), valid=INF):
        n_x = _truncation.n_x
        c = [_as_eps(v) for v in coeffs]
        if len(c) > n_x + 1:
            if any(not is_exact_zero(v) for v in c[n_x + 1:]):
                valid = min(valid, n_x)
        top = _cut(valid, n_x)
        self._c = _trim(c[:top + 1] if top >= 0 else [])
        self.valid = valid

    @classmethod
    def _make(cls, c, valid):
        self = cls.__new__(cls)
        self._c = _trim(c)
        self.valid = valid
        return self

    @classmethod
    def const(cls, v):
        return cls._make([_as_eps(v)], INF)

    @classmethod
    def from_triples(cls, triples):
        """Build from (X power, eps power, rational) triples."""
        n_x = _truncation.n_x
        terms = {}
        for xp, ep, v in triples:
            terms.setdefault(xp, {})
            terms[xp][ep] = terms[xp].get(ep, 0) + rational(v)
        if not terms:
            return XJET_ZERO
        if max(terms) > n_x:
            raise SeriesError(
                "X power %s exceeds truncation order %s." % (max(terms), n_x))
        c = [EPS_ZERO] * (max(terms) + 1)
        for xp, emap in terms.items():
            c[xp] = EpsLaurent(emap)
        return cls._make(c, INF)

    def coeff(self, i):
        if 0 <= i < len(self._c):
            return self._c[i]
        return EPS_ZERO

    def _order(self):
        for i, v in enumerate(self._c):
            if not v.is_exact_zero():
                return i
        return self.valid + 1

    def is_exact_zero(self):
        return not self._c and self.valid == INF

    def is_constant(self):
        return not any(self._c[1:])

    def __bool__(self):
        return any(self._c)

    def __add__(self, other):
        if _is_scalar(other) or isinstance(other, EpsLaurent):
            if is_exact_zero(other):
                return self
            other = XJet.const(other)
        elif not isinstance(other, XJet):
            return NotImplemented
        valid = min(self.valid, other.valid)
        a, b = self._c, other._c
        top = _cut(valid, max(len(a), len(b)) - 1)
        c = []
        for i in range(top + 1):
            if i < len(a) and i < len(b):
                c.append(a[i] + b[i])
            elif i < len(a):
                c.append(a[i])
            else:
                c.append(b[i])
        return XJet._make(c, valid)

    __radd__ = __add__

    def __neg__(self):
        return XJet._make([-v for v in self._c], self.valid)

    def __sub__(self, other):
        if (_is_scalar(other) or isinstance(other, EpsLaurent) or
                isinstance(other, XJet)):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if _is_scalar(other) or isinstance(other, EpsLaurent):
            if is_exact_zero(other):
                return XJET_ZERO
            return XJet._make([v * other for v in self._c], self.valid)
        if not isinstance(other, XJet):
            return NotImplemented
        valid = _product_valid(
            self.valid, self._order(), other.valid, other._order())
        n_x = _truncation.n_x
        a, b = self._c, other._c
        if not a or not b:
            return XJet._make([], valid)
        natural = len(a) + len(b) - 2
        if natural > n_x:
            valid = min(valid, n_x)
        top = _cut(valid, natural)
        c = []
        for n in range(top + 1):
            acc = EPS_ZERO
            for i in range(max(0, n - len(b) + 1), min(n, len(a) - 1) + 1):
                acc = acc + a[i] * b[n - i]
            c.append(acc)
        return XJet._make(c, valid)

    __rmul__ = __mul__

    def derive(self):
        c = [v * i for i, v in enumerate(self._c)][1:]
        return XJet._make(c, self.valid - 1)

    def antiderivative(self):
        n_x = _truncation.n_x
        valid = self.valid
        c = [EPS_ZERO] + [v * Fraction(1, i + 1)
            for i, v in enumerate(self._c)]
        if len(c) > n_x + 1:
            if any(not v.is_exact_zero() for v in c[n_x + 1:]):
                valid = min(valid, n_x)
        return XJet._make(c[:_cut(valid, n_x) + 1], valid)

    def invert(self):
        a = self._c
        if not a or not a[0]:
            raise NotInvertible(
                "X^0 coefficient of %s is not invertible." % self.to_text())
        inv0 = a[0].invert()
        if len(a) == 1:
            return XJet._make([inv0], self.valid)
        valid = min(self.valid, _truncation.n_x)
        top = _cut(valid, _truncation.n_x)
        b = [inv0]
        for n in range(1, top + 1):
            acc = EPS_ZERO
            for i in range(1, min(n, len(a) - 1) + 1):
                acc = acc + a[i] * b[n - i]
            b.append(-(inv0 * acc))
        return XJet._make(b, valid)

    def __truediv__(self, other):
        if _is_scalar(other):
            return self * (Fraction(1) / Fraction(other))
        if isinstance(other, (EpsLaurent, XJet)):
            return self * other.invert()
        return NotImplemented

    def __eq__(self, other):
        if not (_is_scalar(other) or isinstance(other, (EpsLaurent, XJet))):
            return NotImplemented
        return not (self - other)

    def __ne__(self, other):
        r = self.__eq__(other)
        if r is NotImplemented:
            return r
        return not r

    __hash__ = None

    def locus(self):
        for i, v in enumerate(self._c):
            if v:
                return ["X^%s" % i] + v.locus()
        return None

    def to_json(self):
        return dict(("X^%s" % i, v.to_json())
            for i, v in enumerate(self._c) if v)

    def to_text(self):
        terms = []
        for i, v in enumerate(self._c):
            if not v:
                continue
            xs = "" if i == 0 else ("X" if i == 1 else "X^%s" % i)
            if not xs:
                terms.append(v.to_text())
            elif len(v.items()) == 1 and v.items()[0] == (0, 1):
                terms.append(xs)
            else:
                terms.append("(%s)·%s" % (v.to_text(), xs))
        return " + ".join(terms) if terms else "0"

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return "%s(%s, valid=%s)" % (self.__class__.__name__,
            self.to_text(), self.valid)


def _trim(c):
    c = list(c)
    while c and c[-1].is_exact_zero():
        c.pop()
    return c


XJET_ZERO = XJet._make([], INF)


def xjet_arith(a, b=None, op="add"):
    """Dispatch one X-jet operation: 'add', 'mul', 'derive' or 'invert'."""
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "derive":
        return a.derive()
    if op == "invert":
        return a.invert()
    raise SeriesError("Unknown X-jet operation '%s'." % op)


def xjet_antiderivative(a):
    return a.antiderivative()


class XiSeries(object):
    """Laurent series in one spectral variable xi, truncated from below.

    Coefficients live in any ring of this module (or in `DiffPoly`), rational
    constants included.

    Public interface:
        self.top: declared highest exponent.
        self.low: lowest exponent known exactly (`-INF` if exact).
        self[e]:  coefficient of xi**e (0 if absent).
    """
    __slots__ = ("_c", "top", "low")

    def __init__(self, coeffs=None, top=None, low=-INF):
        c = {}
        for e, v in (coeffs or {}).items():
            if e < low or is_exact_zero(v):
                continue
            c[e] = v
        if top is None:
            top = max(c) if c else -INF
        assert all(e <= top for e in c), "coefficient above declared top"
        self._c = c
        self.top = top
        self.low = low

    @classmethod
    def _make(cls, c, top, low):
        self = cls.__new__(cls)
        self._c = c
        self.top = top
        self.low = low
        return self

    def __getitem__(self, e):
        return self._c.get(e, 0)

    def items(self):
        """(exponent, coefficient) pairs, highest exponent first."""
        return sorted(self._c.items(), reverse=True)

    def is_exact_zero(self):
        return not self._c and self.low == -INF

    def __bool__(self):
        return any(bool(v) for v in self._c.values())

    def _lift(self, other):
        if isinstance(other, XiSeries):
            return other
        if isinstance(other, (MultiSeries, Mat2)):
            return None
        if is_exact_zero(other):
            return XiSeries._make({}, -INF, -INF)
        return XiSeries._make({0: other}, 0, -INF)

    def __add__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        low = max(self.low, other.low)
        c = dict((e, v) for e, v in self._c.items() if e >= low)
        for e, v in other._c.items():
            if e < low:
                continue
            s = c[e] + v if e in c else v
            if is_exact_zero(s):
                c.pop(e, None)
            else:
                c[e] = s
        return XiSeries._make(c, max(self.top, other.top), low)

    def __radd__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return other + self

    def __neg__(self):
        return XiSeries._make(dict((e, -v) for e, v in self._c.items()),
            self.top, self.low)

    def __sub__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (MultiSeries, Mat2)):
            return NotImplemented
        if not isinstance(other, XiSeries):
            return self._scale(other, left=False)
        top = self.top + other.top
        low = max(self.low + other.top, other.low + self.top)
        c = {}
        for ea, va in self._c.items():
            for eb, vb in other._c.items():
                e = ea + eb
                if e < low:
                    continue
                p = va * vb
                c[e] = c[e] + p if e in c else p
        c = dict((e, v) for e, v in c.items() if not is_exact_zero(v))
        return XiSeries._make(c, top, low)

    def __rmul__(self, other):
        if isinstance(other, (MultiSeries, Mat2)):
            return NotImplemented
        return self._scale(other, left=True)

    def _scale(self, s, left):
        if is_exact_zero(s):
            return XiSeries._make({}, self.top, self.low)
        c = {}
        for e, v in self._c.items():
            p = s * v if left else v * s
            if not is_exact_zero(p):
                c[e] = p
        return XiSeries._make(c, self.top, self.low)

    def map(self, func):
        """Apply `func` to every coefficient (window unchanged)."""
        c = {}
        for e, v in self._c.items():
            w = func(v)
            if not is_exact_zero(w):
                c[e] = w
        return XiSeries._make(c, self.top, self.low)

    def derive(self):
        return self.map(derive)

    def shift(self, n):
        """Multiply by xi**n."""
        return XiSeries._make(dict((e + n, v) for e, v in self._c.items()),
            self.top + n, self.low + n)

    def truncated(self, low):
        """Forget everything below xi**low."""
        low = max(low, self.low)
        return XiSeries._make(
            dict((e, v) for e, v in self._c.items() if e >= low),
            self.top, low)

    def invert(self):
        """Inverse for a series whose coefficient at `top` is invertible."""
        t = self.top
        if t == -INF or t not in self._c:
            raise NotInvertible("Leading coefficient xi^%s is zero." % t)
        if self.low == -INF:
            raise SeriesError("Inverse of an exact series needs a window.")
        lead_inv = _inverse(self._c[t])
        low = self.low - 2 * t
        b = {-t: lead_inv}
        for n in range(1, int(-t - low) + 1):
            acc = 0
            for i in range(1, n + 1):
                ai = self._c.get(t - i)
                bj = b.get(-t - n + i)
                if ai is not None and bj is not None:
                    acc = acc + ai * bj
            if not is_exact_zero(acc):
                b[-t - n] = -(lead_inv * acc)
        return XiSeries._make(b, -t, low)

    def __eq__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return not (self - other)

    def __ne__(self, other):
        r = self.__eq__(other)
        if r is NotImplemented:
            return r
        return not r

    __hash__ = None

    def locus(self):
        for e, v in self.items():
            sub = locus(v)
            if sub is not None:
                return ["xi^%s" % e] + sub
        return None

    def to_json(self):
        return dict(("xi^%s" % e, to_json(v))
            for e, v in self._c.items() if v)

    def to_text(self):
        terms = ["(%s)·ξ^%s" % (to_text(v), e) for e, v in self.items() if v]
        return " + ".join(terms) if terms else "0"

    def __repr__(self):
        return "%s(%s, top=%s, low=%s)" % (self.__class__.__name__,
            self.to_text(), self.top, self.low)


def xi_exp(s, low=None, one=1):
    """Exponential of a series with only negative powers of xi.

    `one` is the unit of the coefficient ring, used for the xi^0 term. The
    result is exact down to `s.low` (or down to `low` when `s` is exact).
    """
    for e, v in s.items():
        if e >= 0 and v:
            raise BadExponent("exp needs a pure xi^-1 tail; xi^%s present" % e)
    if low is None:
        low = s.low
    else:
        low = max(low, s.low)
    if low == -INF:
        raise SeriesError("exp of an exact series needs an explicit window.")
    s = s.truncated(low)
    s = XiSeries._make(dict((e, v) for e, v in s._c.items() if e < 0),
        -1, low)
    result = XiSeries._make({0: one}, 0, low)
    term = result
    for m in range(1, int(-low) + 1):
        term = (term * s) * Fraction(1, m)
        if term.is_exact_zero() or not term._c:
            break
        result = result + term
    log.debug("xi_exp done down to xi^%s", low)
    return result


class MultiSeries(object):
    """Laurent series in k spectral variables expanded in a fixed region.

    The region is a tuple of variable indices ordered by dominance, e.g.
    (0, 1, 2) for |xi_1| > |xi_2| > |xi_3|. Windows are recorded on the
    region's cumulative coordinates: for a term with exponent vector e, the
    t-th coordinate is minus the sum of the exponents of the t+1 most dominant
    variables. A term is exact if each coordinate is at most `hi[t]`; every
    term of the full series has each coordinate at least `lo[t]`.

    Public interface:
        self.k, self.region, self.lo, self.hi
        self[exps]: coefficient of the monomial with exponent tuple `exps`.
    """
    __slots__ = ("k", "region", "_c", "lo", "hi")

    def __init__(self, k, coeffs=None, lo=None, hi=None, region=None):
        self.k = k
        self.region = tuple(range(k)) if region is None else tuple(region)
        if sorted(self.region) != list(range(k)):
            raise RegionError("Region %r is not an ordering of %s variables."
                % (self.region, k))
        self.hi = tuple(hi) if hi is not None else (INF,) * k
        c = {}
        for e, v in (coeffs or {}).items():
            e = tuple(e)
            assert len(e) == k
            if is_exact_zero(v) or not self._inside(e, self.hi):
                continue
            c[e] = v
        self._c = c
        if lo is None:
            if c:
                lo = [min(ps) for ps in
                    zip(*[self._prefix(e) for e in c])]
            else:
                lo = (INF,) * k
        self.lo = tuple(lo)

    @classmethod
    def _make(cls, k, region, c, lo, hi):
        self = cls.__new__(cls)
        self.k = k
        self.region = region
        self._c = c
        self.lo = lo
        self.hi = hi
        return self

    def _prefix(self, e):
        s = 0
        out = []
        for v in self.region:
            s -= e[v]
            out.append(s)
        return out

    def _inside(self, e, hi):
        s = 0
        for t, v in enumerate(self.region):
            s -= e[v]
            if s > hi[t]:
                return False
        return True

    def covers(self, e):
        """True if the coefficient of `e` is known exactly."""
        return self._inside(tuple(e), self.hi)

    @classmethod
    def zero(cls, k, region=None):
        return cls(k, {}, (INF,) * k, (INF,) * k, region)

    @classmethod
    def monomial(cls, exps, coeff=1, region=None):
        k = len(exps)
        s = cls(k, {}, region=region)
        return cls._make(k, s.region, {tuple(exps): coeff}
            if not is_exact_zero(coeff) else {},
            tuple(s._prefix(exps)), (INF,) * k)

    @classmethod
    def from_xi(cls, series, var, k, region=None):
        """Embed an `XiSeries` as a function of variable `var`."""
        s = cls(k, {}, region=region)
        p = s.region.index(var)
        top = series.top
        lo = tuple(0 if t < p else -top for t in range(k))
        hi = tuple(-series.low if t == p else INF for t in range(k))
        c = {}
        for e, v in series._c.items():
            exps = [0] * k
            exps[var] = e
            c[tuple(exps)] = v
        return cls._make(k, s.region, c, lo, hi)

    def __getitem__(self, e):
        return self._c.get(tuple(e), 0)

    def items(self):
        """(exponents, coefficient) pairs, lowest cumulative orders first."""
        return sorted(self._c.items(), key=lambda ev: self._prefix(ev[0]))

    def __len__(self):
        return len(self._c)

    def is_exact_zero(self):
        return not self._c and all(h == INF for h in self.hi)

    def __bool__(self):
        return any(bool(v) for v in self._c.values())

    def _check(self, other):
        if not isinstance(other, MultiSeries):
            if isinstance(other, (XiSeries, Mat2)):
                return None
            return MultiSeries.monomial((0,) * self.k, other, self.region)
        if other.k != self.k or other.region != self.region:
            raise RegionError("Region mismatch: %r (k=%s) vs %r (k=%s)" % (
                self.region, self.k, other.region, other.k))
        return other

    def __add__(self, other):
        other = self._check(other)
        if other is None:
            return NotImplemented
        hi = tuple(min(a, b) for a, b in zip(self.hi, other.hi))
        lo = tuple(min(a, b) for a, b in zip(self.lo, other.lo))
        c = dict((e, v) for e, v in self._c.items() if self._inside(e, hi))
        for e, v in other._c.items():
            if not self._inside(e, hi):
                continue
            s = c[e] + v if e in c else v
            if is_exact_zero(s):
                c.pop(e, None)
            else:
                c[e] = s
        return MultiSeries._make(self.k, self.region, c, lo, hi)

    def __radd__(self, other):
        other = self._check(other)
        if other is None:
            return NotImplemented
        return other + self

    def __neg__(self):
        return MultiSeries._make(self.k, self.region,
            dict((e, -v) for e, v in self._c.items()), self.lo, self.hi)

    def __sub__(self, other):
        other = self._check(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, MultiSeries):
            return self.mul(other)
        if isinstance(other, (XiSeries, Mat2)):
            return NotImplemented
        return self._scale(other, left=False)

    def __rmul__(self, other):
        if isinstance(other, (XiSeries, Mat2)):
            return NotImplemented
        return self._scale(other, left=True)

    def _scale(self, s, left):
        if is_exact_zero(s):
            return MultiSeries._make(self.k, self.region, {},
                (INF,) * self.k, (INF,) * self.k)
        c = {}
        for e, v in self._c.items():
            p = s * v if left else v * s
            if not is_exact_zero(p):
                c[e] = p
        return MultiSeries._make(self.k, self.region, c, self.lo, self.hi)

    def mul(self, other, budget=None):
        """Truncated product; `budget` caps the window of the result."""
        self._check(other)
        k = self.k
        lo = tuple(a + b for a, b in zip(self.lo, other.lo))
        hi = tuple(min(ha + lb, hb + la) for ha, la, hb, lb in
            zip(self.hi, self.lo, other.hi, other.lo))
        if budget is not None:
            hi = tuple(min(h, b) for h, b in zip(hi, budget))
        bterms = [(eb, self._prefix(eb), vb) for eb, vb in other._c.items()]
        olo = other.lo
        c = {}
        for ea, va in self._c.items():
            sa = self._prefix(ea)
            if any(sa[t] + olo[t] > hi[t] for t in range(k)):
                continue
            for eb, sb, vb in bterms:
                for t in range(k):
                    if sa[t] + sb[t] > hi[t]:
                        break
                else:
                    e = tuple(x + y for x, y in zip(ea, eb))
                    p = va * vb
                    c[e] = c[e] + p if e in c else p
        c = dict((e, v) for e, v in c.items() if not is_exact_zero(v))
        return MultiSeries._make(k, self.region, c, lo, hi)

    def map(self, func):
        c = {}
        for e, v in self._c.items():
            w = func(v)
            if not is_exact_zero(w):
                c[e] = w
        return MultiSeries._make(self.k, self.region, c, self.lo, self.hi)

    def restrict(self, budget):
        """Lower the window to at most `budget` (cumulative coordinates)."""
        hi = tuple(min(h, b) for h, b in zip(self.hi, budget))
        c = dict((e, v) for e, v in self._c.items() if self._inside(e, hi))
        return MultiSeries._make(self.k, self.region, c, self.lo, hi)

    def irregular(self):
        """Exponent vectors with a non-negative entry and nonzero coefficient,
        within the window."""
        return [e for e, v in self.items() if v and max(e) >= 0]

    def locus(self):
        for e, v in self.items():
            sub = locus(v)
            if sub is not None:
                return [monomial_text(e)] + sub
        return None

    def to_json(self):
        return dict((monomial_text(e), to_json(v))
            for e, v in self._c.items() if v)

    def to_text(self):
        terms = ["(%s)·%s" % (to_text(v), monomial_text(e))
            for e, v in self.items() if v]
        return " + ".join(terms) if terms else "0"

    def __repr__(self):
        return "%s(k=%s, region=%r, %s terms, hi=%r)" % (
            self.__class__.__name__, self.k, self.region, len(self._c),
            self.hi)


def monomial_text(exps):
    parts = ["ξ%s^%s" % (i + 1, e) for i, e in enumerate(exps) if e]
    return "·".join(parts) if parts else "1"


def multi_mul(a, b, budget=None):
    return a.mul(b, budget)


def kernel_expand(var_a, var_b, power, k, region=None, budget=None):
    """Expansion of 1/(xi_a - xi_b)**power valid in `region`.

    The dominant variable of the pair carries the negative powers. Without a
    `budget` the expansion depth is the process-wide `n_xi`.
    """
    if var_a == var_b:
        raise SeriesError("Kernel needs two distinct variables.")
    if power < 1:
        raise SeriesError("Kernel power must be positive.")
    zero = MultiSeries(k, {}, region=region)
    region = zero.region
    pa, pb = region.index(var_a), region.index(var_b)
    if pa < pb:
        dom, sub, sign = var_a, var_b, 1
    else:
        dom, sub, sign = var_b, var_a, (-1) ** power
    p0, p1 = min(pa, pb), max(pa, pb)
    if budget is None:
        depth = _truncation.n_xi
    else:
        depth = int(min(budget[t] for t in range(p0, p1)) - power)
    c = {}
    for m in range(0, depth + 1):
        exps = [0] * k
        exps[dom] = -m - power
        exps[sub] = m
        c[tuple(exps)] = sign * comb(m + power - 1, power - 1)
    # Between p0 and p1 all cumulative orders of a term coincide, so the
    # bound at p0 alone cuts the expansion.
    lo = tuple(0 if t < p0 else power for t in range(k))
    hi = tuple(depth + power if t == p0 else INF for t in range(k))
    return MultiSeries._make(k, region, c, lo, hi)


class Mat2(object):
    """2x2 matrix over any coefficient type of this module.

    Public interface:
        self.a11, self.a12, self.a21, self.a22
        trace(), det(), commutator(other), map(func), entries()
    """
    __slots__ = ("a11", "a12", "a21", "a22")

    def __init__(self, a11, a12, a21, a22):
        self.a11 = a11
        self.a12 = a12
        self.a21 = a21
        self.a22 = a22

    def entries(self):
        return (("11", self.a11), ("12", self.a12), ("21", self.a21),
            ("22", self.a22))

    def __add__(self, other):
        if not isinstance(other, Mat2):
            return NotImplemented
        return Mat2(self.a11 + other.a11, self.a12 + other.a12,
            self.a21 + other.a21, self.a22 + other.a22)

    def __neg__(self):
        return Mat2(-self.a11, -self.a12, -self.a21, -self.a22)

    def __sub__(self, other):
        if not isinstance(other, Mat2):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, Mat2):
            return Mat2(
                self.a11 * other.a11 + self.a12 * other.a21,
                self.a11 * other.a12 + self.a12 * other.a22,
                self.a21 * other.a11 + self.a22 * other.a21,
                self.a21 * other.a12 + self.a22 * other.a22)
        return self.map(lambda v: v * other)

    def __rmul__(self, other):
        return self.map(lambda v: other * v)

    def map(self, func):
        return Mat2(func(self.a11), func(self.a12), func(self.a21),
            func(self.a22))

    def trace(self):
        return self.a11 + self.a22

    def det(self):
        return self.a11 * self.a22 - self.a12 * self.a21

    def commutator(self, other):
        return self * other - other * self

    def locus(self):
        for name, v in self.entries():
            sub = locus(v)
            if sub is not None:
                return ["entry %s" % name] + sub
        return None

    def to_json(self):
        return dict((name, to_json(v)) for name, v in self.entries())

    def __repr__(self):
        return "%s(%r, %r, %r, %r)" % (self.__class__.__name__,
            self.a11, self.a12, self.a21, self.a22)


def mat_mul(a, b, budget=None):
    """Matrix product that passes `budget` to MultiSeries entry products."""
    def m(x, y):
        if isinstance(x, MultiSeries) and isinstance(y, MultiSeries):
            return x.mul(y, budget)
        return x * y
    return Mat2(
        m(a.a11, b.a11) + m(a.a12, b.a21),
        m(a.a11, b.a12) + m(a.a12, b.a22),
        m(a.a21, b.a11) + m(a.a22, b.a21),
        m(a.a21, b.a12) + m(a.a22, b.a22))


def trace_mul(a, b, budget=None):
    """Tr(a*b) without forming the off-diagonal entries."""
    def m(x, y):
        if isinstance(x, MultiSeries) and isinstance(y, MultiSeries):
            return x.mul(y, budget)
        return x * y
    return (m(a.a11, b.a11) + m(a.a12, b.a21) + m(a.a21, b.a12) +
        m(a.a22, b.a22))


def assert_vanishes(value, identity, where=None):
    """Raise `IdentityViolation` unless `value` is zero inside its window."""
    place = locus(value)
    if place is None:
        return
    if where:
        place = [where] + place
    raise IdentityViolation(identity, ", ".join(place))


def x_window(value, xi_low=None):
    """Highest X power up to which every X-jet inside `value` is exact.

    `value` may be any ring element, a `Mat2` or a list of them. For
    `XiSeries` only exponents >= `xi_low` count (all if None). Returns `INF`
    when nothing in `value` is X-truncated.
    """
    if isinstance(value, XJet):
        return value.valid
    if isinstance(value, XiSeries):
        return min((x_window(v) for e, v in value.items()
            if xi_low is None or e >= xi_low), default=INF)
    if isinstance(value, Mat2):
        return min(x_window(v, xi_low) for _, v in value.entries())
    if isinstance(value, MultiSeries):
        return min((x_window(v) for _, v in value.items()), default=INF)
    if isinstance(value, (list, tuple)):
        return min((x_window(v, xi_low) for v in value), default=INF)
    return INF


def with_x_window(window, value, xi_low=None):
    """Append the achieved X window of `value` to a `Check` window string."""
    n = x_window(value, xi_low)
    if n == INF:
        return window
    return "%s, X^0..X^%s" % (window, n)
