# -*- coding: utf-8 -*-
# Copyright 2014 The mrkit authors. See LICENSE file for details.


"""
mrkit.diffpoly -- differential polynomials in the jet variables of q and r.
"""


import logging
from collections import namedtuple
from fractions import Fraction

from .series import (EpsLaurent, XJet, XiSeries, MultiSeries, Mat2, Check,
    NotInvertible, EPS_ZERO, INF, get_truncation, assert_vanishes)


log = logging.getLogger("diffpoly")


SPECIES = ("q", "r")


class DiffPolyError(Exception):
    pass


class JetVar(namedtuple("JetVar", "species order")):
    """The `order`-th X-derivative of `species` ('q' or 'r')."""
    __slots__ = ()

    def __new__(cls, species, order=0):
        if species not in SPECIES:
            raise DiffPolyError("Unknown species '%s'." % species)
        if order < 0:
            raise DiffPolyError("Jet order must not be negative.")
        return super(JetVar, cls).__new__(cls, species, order)

    def __str__(self):
        return "%s%s" % (self.species, self.order)


def _mono_mul(a, b):
    """Multiply two monomials given as sorted ((JetVar, power), ...) tuples."""
    powers = dict(a)
    for v, p in b:
        powers[v] = powers.get(v, 0) + p
    return tuple(sorted(powers.items()))


def _mono_text(mono):
    parts = []
    for v, p in mono:
        parts.append(str(v) if p == 1 else "%s^%s" % (v, p))
    return "·".join(parts)


def _mono_key(mono):
    return (sum(p for _, p in mono), mono)


class DiffPoly(object):
    """Element of the polynomial ring in q0, q1, ..., r0, r1, ... with
    eps-Laurent coefficients.

    Monomials are tuples of (JetVar, power) pairs sorted by (species, order).
    Monomials whose coefficient is an exact zero are never stored.

    Public interface:
        DiffPoly.var(species, order), DiffPoly.const(c)
        arithmetic with DiffPoly, EpsLaurent and rational scalars
        derive(), apply_derivation(image), items()
    """
    __slots__ = ("_c",)

    def __init__(self, terms=None):
        c = {}
        for mono, coeff in (terms or {}).items():
            mono = tuple(sorted(mono))
            coeff = _as_coeff(coeff)
            if mono in c:
                coeff = c[mono] + coeff
            c[mono] = coeff
        self._c = dict((m, v) for m, v in c.items() if not v.is_exact_zero())

    @classmethod
    def _make(cls, c):
        self = cls.__new__(cls)
        self._c = c
        return self

    @classmethod
    def var(cls, species, order=0):
        return cls._make({((JetVar(species, order), 1),): EpsLaurent.const(1)})

    @classmethod
    def const(cls, c):
        c = _as_coeff(c)
        if c.is_exact_zero():
            return DP_ZERO
        return cls._make({(): c})

    def items(self):
        """(monomial, coefficient) pairs in canonical order."""
        return sorted(self._c.items(), key=lambda mc: _mono_key(mc[0]))

    def coeff(self, mono):
        return self._c.get(tuple(sorted(mono)), EPS_ZERO)

    def jet_order(self):
        """Highest derivative order occurring, -1 for constants."""
        orders = [v.order for mono in self._c for v, _ in mono]
        return max(orders) if orders else -1

    def is_exact_zero(self):
        return not self._c

    def __bool__(self):
        return any(bool(v) for v in self._c.values())

    def _coerce(self, other):
        if isinstance(other, DiffPoly):
            return other
        if isinstance(other, (int, Fraction, EpsLaurent)):
            return DiffPoly.const(other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        c = dict(self._c)
        for mono, v in other._c.items():
            s = c[mono] + v if mono in c else v
            if s.is_exact_zero():
                c.pop(mono, None)
            else:
                c[mono] = s
        return DiffPoly._make(c)

    __radd__ = __add__

    def __neg__(self):
        return DiffPoly._make(dict((m, -v) for m, v in self._c.items()))

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, EpsLaurent)):
            c = {}
            for mono, v in self._c.items():
                p = v * other
                if not p.is_exact_zero():
                    c[mono] = p
            return DiffPoly._make(c)
        if not isinstance(other, DiffPoly):
            return NotImplemented
        c = {}
        for ma, va in self._c.items():
            for mb, vb in other._c.items():
                mono = _mono_mul(ma, mb)
                p = va * vb
                c[mono] = c[mono] + p if mono in c else p
        return DiffPoly._make(
            dict((m, v) for m, v in c.items() if not v.is_exact_zero()))

    __rmul__ = __mul__

    def apply_derivation(self, image):
        """Extend `image` (JetVar -> DiffPoly) to a derivation by Leibniz."""
        result = DP_ZERO
        for mono, coeff in self._c.items():
            for idx, (v, p) in enumerate(mono):
                dv = image(v)
                if dv.is_exact_zero():
                    continue
                rest = list(mono)
                if p == 1:
                    del rest[idx]
                else:
                    rest[idx] = (v, p - 1)
                term = DiffPoly._make({tuple(rest): coeff * p})
                result = result + term * dv
        return result

    def derive(self):
        return dp_derive(self)

    def __eq__(self, other):
        other = self._coerce(other)
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
        for mono, v in self.items():
            if v:
                return [_mono_text(mono) or "1"] + v.locus()
        return None

    def to_json(self):
        return [{"monomial": [[v.species, v.order, p] for v, p in mono],
            "coeff": v_coeff.to_json()}
            for mono, v_coeff in self.items() if v_coeff]

    def to_text(self):
        terms = []
        for mono, v in self.items():
            if not v:
                continue
            ms = _mono_text(mono)
            cs = v.to_text()
            if not ms:
                terms.append(cs)
            elif cs == "1":
                terms.append(ms)
            elif cs == "-1":
                terms.append("-" + ms)
            elif len(v.items()) == 1:
                terms.append("%s·%s" % (cs, ms))
            else:
                terms.append("(%s)·%s" % (cs, ms))
        return " + ".join(terms) if terms else "0"

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return "%s(%s)" % (self.__class__.__name__, self.to_text())


def _as_coeff(c):
    if isinstance(c, EpsLaurent):
        return c
    return EpsLaurent.const(c)


DP_ZERO = DiffPoly._make({})


def _shift_image(v):
    return DiffPoly.var(v.species, v.order + 1)


def dp_derive(p):
    """X-derivative: q_m -> q_(m+1), r_m -> r_(m+1), Leibniz on products."""
    return p.apply_derivation(_shift_image)


def q_var(order=0):
    return DiffPoly.var("q", order)


def r_var(order=0):
    return DiffPoly.var("r", order)


class InitialData(object):
    """Initial slice q(X; eps), r(X; eps) as X-jets.

    Public interface:
        self.q, self.r: `XJet` values.
        self.jet(v):    m-th X-derivative of the species of JetVar `v`.
        self.f, self.g: q_X/q and q*r (f requires an invertible q).
        self.label:     free-form name used in reports.
    """
    def __init__(self, q, r, label=""):
        assert isinstance(q, XJet) and isinstance(r, XJet)
        self.q = q
        self.r = r
        self.label = label
        self.truncation = get_truncation()
        self._jets = {JetVar("q", 0): q, JetVar("r", 0): r}
        self._f = None

    @classmethod
    def from_triples(cls, q_triples, r_triples, label=""):
        """Build from lists of (X power, eps power, rational) triples."""
        try:
            q = XJet.from_triples(q_triples)
            r = XJet.from_triples(r_triples)
        except (ValueError, ZeroDivisionError) as e:
            raise DiffPolyError("Invalid initial data: %s" % e)
        return cls(q, r, label)

    def jet(self, v):
        if v not in self._jets:
            self._jets[v] = self.jet(JetVar(v.species, v.order - 1)).derive()
        return self._jets[v]

    def q_invertible(self):
        return bool(self.q.coeff(0))

    def require_invertible_q(self):
        if not self.q_invertible():
            raise NotInvertible(
                "q(0; eps) is zero; wave functions need 1/q.")

    @property
    def f(self):
        if self._f is None:
            self.require_invertible_q()
            self._f = self.q.derive() * self.q.invert()
        return self._f

    @property
    def g(self):
        return self.q * self.r

    def r_is_zero(self):
        return not self.r

    def to_json(self):
        return {"q": self.q.to_json(), "r": self.r.to_json()}

    def __repr__(self):
        return "%s(q=%s, r=%s)" % (self.__class__.__name__,
            self.q.to_text(), self.r.to_text())


def dp_eval(p, data):
    """Evaluate `p` at the slice `data`; commutes with the X-derivative."""
    if not isinstance(p, DiffPoly):
        return XJet.const(p) if not isinstance(p, XJet) else p
    total = XJet._make([], INF)
    for mono, coeff in p.items():
        term = XJet.const(coeff)
        for v, power in mono:
            base = data.jet(v)
            for _ in range(power):
                term = term * base
        total = total + term
    return total


def eval_series(s, data):
    """Evaluate every DiffPoly coefficient of a series or matrix at `data`."""
    if isinstance(s, Mat2):
        return s.map(lambda e: eval_series(e, data))
    if isinstance(s, (XiSeries, MultiSeries)):
        return s.map(lambda c: dp_eval(c, data))
    return dp_eval(s, data)


def leibniz_check(rng, samples=5):
    """(ab)' = a'b + ab' on random differential polynomials."""
    for n in range(samples):
        a, b = random_diffpoly(rng), random_diffpoly(rng)
        assert_vanishes((a * b).derive() - (a.derive() * b + a * b.derive()),
            "Leibniz rule", "sample %s" % n)
    return Check("Leibniz rule", "%s random samples" % samples)


def random_diffpoly(rng, max_order=3, terms=4, max_degree=3):
    """Random DiffPoly with small rational and eps coefficients."""
    p = DP_ZERO
    for _ in range(terms):
        mono = {}
        for _ in range(rng.randint(0, max_degree)):
            v = JetVar(rng.choice(SPECIES), rng.randint(0, max_order))
            mono[v] = mono.get(v, 0) + 1
        coeff = EpsLaurent({rng.randint(-1, 2):
            Fraction(rng.randint(-5, 5), rng.randint(1, 4))})
        p = p + DiffPoly({tuple(mono.items()): coeff})
    return p
