# -*- coding: utf-8 -*-
# Copyright 2014 The mrkit authors. See LICENSE file for details.


"""
mrkit.waves -- wave functions at the initial slice, pair normalization and
the regularized two-variable kernel.

The exponential factors exp(+-X*xi/eps) (and the factor q of the second wave
function) are never expanded. Every quantity below is written with them
stripped; they cancel in each identity that is checked.
"""


import logging
from fractions import Fraction

from .series import (EpsLaurent, XJet, XiSeries, MultiSeries, Mat2, Check,
    IdentityViolation, SeriesError, WindowTooLow, xi_exp, kernel_expand,
    assert_vanishes, is_exact_zero, x_window, with_x_window, get_truncation,
    working_truncation)
from .diffpoly import InitialData
from .resolvent import mr_matrix, mr_coeffs, HALF


log = logging.getLogger("waves")


KINDS = ("A", "B")


class WaveError(Exception):
    pass


def _eps(power=1):
    return EpsLaurent.eps(power)


def _xi(coeff=1, power=1):
    return XiSeries({power: coeff}, power)


def _xjet(c):
    if isinstance(c, XJet):
        return c
    return XJet.const(c)


class RiccatiSeries(object):
    """Coefficients x_1..x_N (kind A) or y_1..y_N (kind B) of the
    logarithmic derivative of a wave function.

    Public interface:
        self.kind, self.order, self.coeffs (list, index 0 is x_1)
        self.series(): the coefficients as an `XiSeries` in xi^-1..xi^-N
    """
    def __init__(self, kind, coeffs):
        assert kind in KINDS
        self.kind = kind
        self.coeffs = coeffs
        self.order = len(coeffs)

    def __getitem__(self, k):
        return self.coeffs[k - 1]

    def series(self):
        return XiSeries(dict((-k - 1, c) for k, c in enumerate(self.coeffs)),
            -1, -self.order)

    def to_json(self):
        name = "x" if self.kind == "A" else "y"
        return dict(("%s_%s" % (name, k + 1), c.to_json())
            for k, c in enumerate(self.coeffs))


def riccati_series(kind, N, data):
    """Solve the Riccati recursion of the given kind to order `N`.

    With f = q_X/q and g = q*r:
        x_1 = -g/2,  x_(k+1) = (-eps x_k' - sum x_m x_(k-m) + eps f x_k)/2
        y_1 = (eps^2 f' + g)/2,
        y_(k+1) = (eps y_k' + sum y_m y_(k-m) + eps f y_k)/2
    """
    if kind not in KINDS:
        raise WaveError("Unknown wave function kind '%s'." % kind)
    if N < 1:
        raise WaveError("Riccati order must be positive.")
    f, g = data.f, data.g
    e = _eps()
    half = Fraction(1, 2)
    if kind == "A":
        c = [g * (-half)]
    else:
        c = [(f.derive() * _eps(2) + g) * half]
    for k in range(1, N):
        conv = XJet.const(0)
        for m in range(1, k):
            conv = conv + c[m - 1] * c[k - m - 1]
        lin = c[k - 1] * f * e
        if kind == "A":
            c.append((-(c[k - 1].derive() * e) - conv + lin) * half)
        else:
            c.append((c[k - 1].derive() * e + conv + lin) * half)
        log.debug("Riccati %s coefficient %s done", kind, k + 1)
    return RiccatiSeries(kind, c)


def riccati_residual(rs, data):
    """Left-hand side of the Riccati equation, which must vanish.

    A: eps x' + x^2 + 2 xi x - eps f x + g
    B: eps y' + y^2 - 2 xi y + eps f y + eps^2 f' + g
    """
    s = rs.series()
    e = _eps()
    f, g = data.f, data.g
    ds = s.derive().map(lambda c: c * e)
    fs = s.map(lambda c: c * f * e)
    if rs.kind == "A":
        return ds + s * s + s.shift(1) * 2 - fs + g
    return ds + s * s - s.shift(1) * 2 + fs + f.derive() * _eps(2) + g


def riccati_check(rs, data):
    res = riccati_residual(rs, data)
    name = "Riccati equation %s" % rs.kind
    assert_vanishes(res, name)
    return Check(name, with_x_window("xi^0..xi^%s" % res.low, res))


def phi_build(rs):
    """Series tail phi = exp(eps^-1 * integral of the Riccati series)."""
    inv = _eps(-1)
    s = rs.series().map(lambda c: c.antiderivative() * inv)
    return xi_exp(s, one=XJet.const(1))


class WavePair(object):
    """The two series tails phi_A, phi_B at the slice `data`.

    Public interface:
        self.phi_a, self.phi_b: `XiSeries` over `XJet`, unit leading term.
        self.order: xi depth N.
        self.d: Wronskian-type series (None until computed).
        self.normalized: True once d = -2 xi holds.
        self.multiplier: series applied to phi_B by `pair_fix`.
    """
    def __init__(self, phi_a, phi_b, data, order, riccati=None):
        self.phi_a = phi_a
        self.phi_b = phi_b
        self.data = data
        self.order = order
        self.riccati = riccati or {}
        self.d = None
        self.normalized = False
        self.multiplier = None

    def copy(self, phi_a=None, phi_b=None):
        p = WavePair(self.phi_a if phi_a is None else phi_a,
            self.phi_b if phi_b is None else phi_b,
            self.data, self.order, self.riccati)
        return p

    def to_json(self):
        out = {"phi_A": self.phi_a.to_json(), "phi_B": self.phi_b.to_json(),
            "normalized": self.normalized}
        if self.d is not None:
            out["d"] = self.d.to_json()
        if self.multiplier is not None:
            out["multiplier"] = self.multiplier.to_json()
        return out

    def to_text(self):
        lines = ["phi_A = %s" % self.phi_a.to_text(),
            "phi_B = %s" % self.phi_b.to_text()]
        if self.d is not None:
            lines.append("d = %s" % self.d.to_text())
        return "\n".join(lines)

    def __repr__(self):
        return "%s(order=%s, normalized=%s)" % (self.__class__.__name__,
            self.order, self.normalized)


def wave_pair(data, N):
    """Build the (not yet normalized) pair to xi-order `N`."""
    data.require_invertible_q()
    ra = riccati_series("A", N, data)
    rb = riccati_series("B", N, data)
    pair = WavePair(phi_build(ra), phi_build(rb), data, N,
        {"A": ra, "B": rb})
    log.info("Wave pair built to xi^-%s", N)
    return pair


def _shift_factor(data):
    """The series eps*f - 2 xi."""
    return XiSeries({0: data.f * _eps(), 1: -2}, 1)


def _eps_d(s):
    e = _eps()
    return s.derive().map(lambda c: c * e)


def wronskian_d(pair):
    """d = eps (phi_A phi_B' - phi_A' phi_B) + (eps f - 2 xi) phi_A phi_B.

    Checks that d does not depend on X and stores it on the pair.
    """
    a, b = pair.phi_a, pair.phi_b
    d = (a * _eps_d(b) - _eps_d(a) * b) + _shift_factor(pair.data) * (a * b)
    assert_vanishes(d.derive(), "d is X-independent")
    pair.d = d
    return d


def pair_fix(pair):
    """Multiply phi_B by the X-independent series (-2 xi)/d so that the pair
    condition d = -2 xi holds."""
    d = pair.d if pair.d is not None else wronskian_d(pair)
    lead = d[1]
    if _xjet(lead) + 2:
        raise WaveError("Leading coefficient of d is %s, expected -2."
            % _xjet(lead).to_text())
    mu = _xi(-2) * d.invert()
    assert_vanishes(mu.derive(), "pair multiplier is X-independent")
    fixed = pair.copy(phi_b=mu * pair.phi_b)
    fixed.multiplier = mu
    d_new = wronskian_d(fixed)
    assert_vanishes(d_new - _xi(-2), "d = -2 xi")
    fixed.normalized = True
    log.info("Pair normalized down to xi^%s", d_new.low)
    return fixed


def pair_regauge(pair, G):
    """Apply the pair freedom phi_A -> G phi_A, phi_B -> phi_B / G.

    G must have unit xi^0 term, no positive powers and X-independent
    coefficients.
    """
    for e, c in G.items():
        if e > 0 or (e == 0 and not is_exact_zero(_xjet(c) - 1)):
            raise WaveError("Gauge series must be 1 + O(1/xi).")
        if _xjet(c).derive():
            raise WaveError("Gauge coefficient at xi^%s depends on X." % e)
    if G[0] == 0:
        raise WaveError("Gauge series must be 1 + O(1/xi).")
    G = G.map(_xjet).truncated(-pair.order)
    ginv = G.invert()
    out = pair.copy(phi_a=G * pair.phi_a, phi_b=pair.phi_b * ginv)
    if pair.d is not None:
        wronskian_d(out)
        out.normalized = pair.normalized
    out.multiplier = pair.multiplier
    return out


def log_derivative_check(pair):
    """eps phi_A' = x phi_A and eps phi_B' = y phi_B. X-independent gauge
    factors leave both relations intact."""
    out = []
    for kind, phi in (("A", pair.phi_a), ("B", pair.phi_b)):
        x = pair.riccati[kind].series()
        diff = _eps_d(phi) - x * phi
        name = "eps*phi_%s' = %s*phi_%s" % (kind, "x" if kind == "A" else "y",
            kind)
        assert_vanishes(diff, name)
        out.append(Check(name, with_x_window("xi^0..xi^%s" % diff.low,
            diff)))
    return out


def ode_check(pair):
    """Both tails solve the second-order equation with exponentials
    stripped:

    eps^2 a'' + (2 eps xi - eps^2 f) a' + g a = 0
    eps^2 h'' - (2 eps xi + eps^2 f) h' + (2 eps f xi + g) h = 0, h = q b
    """
    data = pair.data
    f, g = data.f, data.g
    e, e2 = _eps(), _eps(2)
    a = pair.phi_a
    da = a.derive()
    lhs_a = (da.derive().map(lambda c: c * e2) +
        XiSeries({1: e * 2, 0: f * (-e2)}, 1) * da +
        a.map(lambda c: c * g))
    assert_vanishes(lhs_a, "second-order equation for phi_A")
    h = pair.phi_b.map(lambda c: c * data.q)
    dh = h.derive()
    lhs_b = (dh.derive().map(lambda c: c * e2) -
        XiSeries({1: e * 2, 0: f * e2}, 1) * dh +
        XiSeries({1: f * (e * 2), 0: g}, 1) * h)
    assert_vanishes(lhs_b, "second-order equation for q*phi_B")
    return [Check("second-order equation for phi_A", with_x_window(
        "xi^1..xi^%s" % lhs_a.low, lhs_a)),
        Check("second-order equation for q*phi_B", with_x_window(
        "xi^1..xi^%s" % lhs_b.low, lhs_b))]


def factorized_resolvent(pair):
    """2 r1^T r2 / d with d = -2 xi, exponentials stripped."""
    if not pair.normalized:
        raise WaveError("Factorization needs a normalized pair.")
    data = pair.data
    a, b = pair.phi_a, pair.phi_b
    hb = _eps_d(b) + _shift_factor(data) * b
    da = _eps_d(a)
    qinv = data.q.invert()
    # 2/d = -1/xi
    r11 = -(a * hb).shift(-1)
    r12 = (a * b).map(lambda c: c * data.q).shift(-1)
    r21 = -(da * hb).map(lambda c: c * qinv).shift(-1)
    r22 = (da * b).shift(-1)
    return Mat2(r11, r12, r21, r22)


def rp_check(pair, mr, xi_order=None, x_order=None):
    """Compare R(xi) from the resolvent recursion with the rank-one form.

    With `xi_order` the comparison must reach xi^-xi_order, and with
    `x_order` every X-jet down to that order must be exact up to X^x_order;
    `WindowTooLow` is raised otherwise.
    """
    R = mr_matrix(mr)
    F = factorized_resolvent(pair)
    diff = R - F
    assert_vanishes(diff, "R = 2 r1^T r2 / d")
    assert_vanishes(F.det(), "det of the rank-one form")
    low = max(v.low for _, v in diff.entries())
    xi_low = None
    if xi_order is not None:
        if low > -xi_order:
            raise WindowTooLow("Rank-one form known down to xi^%s only, "
                "xi^-%s requested." % (low, xi_order))
        low = xi_low = -xi_order
    reach = x_window(diff, xi_low)
    if x_order is not None and reach < x_order:
        raise WindowTooLow("Rank-one form exact up to X^%s at xi^%s, X^%s "
            "requested." % (reach, low, x_order))
    log.info("Rank-one factorization holds down to xi^%s, X^%s", low, reach)
    return Check("R = 2 r1^T r2 / d", with_x_window("xi^0..xi^%s" % low,
        diff, xi_low))


def rank_one_check(data, xi_order, x_order, half=HALF, max_raise=12):
    """rp_check on a fresh pair of depth `xi_order` + 1 at the slice `data`.

    Derivatives eat into the X window, so n_x is raised in steps of 2 (at
    most by `max_raise`) until X^x_order is exact at xi^-xi_order. The
    process-wide truncation is restored afterwards.
    """
    n_x = get_truncation().n_x
    error = None
    for n in range(n_x, n_x + max_raise + 1, 2):
        with working_truncation(n_x=n):
            fresh = InitialData(data.q, data.r, data.label)
            fixed = pair_fix(wave_pair(fresh, xi_order + 1))
            mr = mr_coeffs(xi_order + 1, fresh.q, fresh.r, half=half)
            try:
                return rp_check(fixed, mr, xi_order, x_order)
            except WindowTooLow as e:
                log.info("n_x=%s: %s", n, e)
                error = e
    raise error


class ATable(object):
    """Affine coefficients A_(i,j) of the regularized kernel
    B + 2/(xi - nu) = sum A_(i,j) xi^(-i-1) nu^(-j-1).

    Entries exist for i <= imax, j <= jmax and i + j <= total.
    """
    def __init__(self, imax, jmax, total, entries):
        self.imax = imax
        self.jmax = jmax
        self.total = total
        self.entries = entries

    def __getitem__(self, ij):
        return self.entries[tuple(ij)]

    def __contains__(self, ij):
        return tuple(ij) in self.entries

    def items(self):
        return sorted(self.entries.items())

    def perturbed(self, ij=(0, 0), delta=1):
        """Copy with `delta` added to one entry."""
        entries = dict(self.entries)
        entries[ij] = entries[ij] + delta
        return ATable(self.imax, self.jmax, self.total, entries)

    def scaled(self, alpha, beta, transposed=False):
        """Entries alpha * beta^(i+j) * A_(i,j), optionally transposed."""
        entries = {}
        for (i, j), v in self.entries.items():
            src = (j, i) if transposed else (i, j)
            if src not in self.entries:
                continue
            entries[(i, j)] = self.entries[src] * (alpha * beta ** (i + j))
        return ATable(self.imax, self.jmax, self.total, entries)

    def is_zero(self):
        return not any(bool(v) for v in self.entries.values())

    def to_json(self):
        return dict(("(%s,%s)" % ij, v.to_json())
            for ij, v in self.entries.items())

    def to_text(self):
        return "\n".join("A(%s,%s) = %s" % (i, j, v.to_text())
            for (i, j), v in self.items())


def kernel_numerator(pair, budget=None):
    """Num(xi, nu) = eps (phi_A(xi) phi_B'(nu) - phi_A'(xi) phi_B(nu))
    + (eps f - 2 nu) phi_A(xi) phi_B(nu), variable 0 is xi."""
    data = pair.data
    a, b = pair.phi_a, pair.phi_b
    A0 = MultiSeries.from_xi(a, 0, 2)
    dA0 = MultiSeries.from_xi(_eps_d(a), 0, 2)
    B1 = MultiSeries.from_xi(b, 1, 2)
    dB1 = MultiSeries.from_xi(_eps_d(b), 1, 2)
    shift = MultiSeries.from_xi(_shift_factor(data), 1, 2)
    return (A0.mul(dB1, budget) - dA0.mul(B1, budget) +
        A0.mul(B1).mul(shift, budget))


def regularized_kernel(pair, budget):
    """B + 2/(xi - nu) = (Num/nu + 2)/(xi - nu) in |xi| > |nu|."""
    num = kernel_numerator(pair)
    p = MultiSeries.monomial((0, -1)).mul(num) + 2
    return p.mul(kernel_expand(0, 1, 1, 2, budget=budget), budget)


def a_table(pair, imax, jmax=None, total=None):
    """Affine coefficients read off the regularized kernel.

    Raises `IdentityViolation` unless the regularized kernel has only
    negative powers of both variables within the computed window.
    """
    if jmax is None:
        jmax = imax
    if total is None:
        total = imax + jmax
    if not pair.normalized:
        raise WaveError("Affine coefficients need a normalized pair.")
    budget = (imax + 1, total + 2)
    S = regularized_kernel(pair, budget)
    bad = S.irregular()
    if bad:
        raise IdentityViolation("regularized kernel has only negative powers",
            "xi^%s·nu^%s" % bad[0])
    entries = {}
    for i in range(imax + 1):
        for j in range(min(jmax, total - i) + 1):
            exps = (-i - 1, -j - 1)
            if not S.covers(exps):
                raise SeriesError("xi-order %s too low for A(%s,%s)."
                    % (pair.order, i, j))
            entries[(i, j)] = _xjet(S[exps])
    log.info("Affine coefficients computed, i <= %s, j <= %s, i+j <= %s",
        imax, jmax, total)
    return ATable(imax, jmax, total, entries)


def a_entry_direct(pair, i, j):
    """A_(i,j) summed directly from the tail coefficients, without any
    bivariate series."""
    data = pair.data
    e = _eps()
    ef = data.f * e
    a, b = pair.phi_a, pair.phi_b

    def num(s, c):
        # coefficient of xi^-s nu^-c in Num
        pa, pb = _xjet(a[-s]), _xjet(b[-c])
        dpa, dpb = pa.derive() * e, pb.derive() * e
        return pa * dpb - dpa * pb + ef * pa * pb - pa * _xjet(b[-c - 1]) * 2

    total = XJet.const(0)
    for m in range(i + 1):
        total = total + num(i - m, j + m)
    return total


def purity_check(pair, order):
    table = a_table(pair, order, order, order)
    return Check("regularized kernel has only negative powers",
        with_x_window("i+j <= %s" % order, [v for _, v in table.items()])
        ), table
