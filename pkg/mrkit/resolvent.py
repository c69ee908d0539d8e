# -*- coding: utf-8 -*-
# Copyright 2014 The mrkit authors. See LICENSE file for details.


"""
mrkit.resolvent -- basic matrix resolvent, flows and the two-point structure.

All functions are generic over the coefficient ring: pass `DiffPoly` jet
variables for symbolic runs (the default) or `XJet` initial data for runs
evaluated at the slice.
"""


import logging
from fractions import Fraction
from itertools import permutations

from .series import (EpsLaurent, XiSeries, MultiSeries, Mat2, Check,
    IdentityViolation, SeriesError, derive, kernel_expand, trace_mul,
    assert_vanishes)
from .diffpoly import DiffPoly, JetVar, DP_ZERO, q_var, r_var, dp_derive


log = logging.getLogger("resolvent")


HALF = Fraction(1, 2)


def eps(power=1):
    return EpsLaurent.eps(power)


class MRData(object):
    """Coefficients A_j, B_j, C_j (j = 0..order) of the matrix resolvent.

    Public interface:
        self.order, self.A, self.B, self.C, self.q, self.r
        self.symbolic: True if the coefficients are `DiffPoly` values.
    """
    def __init__(self, order, A, B, C, q, r):
        assert len(A) == len(B) == len(C) == order + 1
        self.order = order
        self.A = A
        self.B = B
        self.C = C
        self.q = q
        self.r = r
        self.symbolic = isinstance(q, DiffPoly)

    def level(self, j):
        return self.A[j], self.B[j], self.C[j]

    def to_json(self):
        def conv(vals):
            return [v.to_json() if hasattr(v, "to_json") else str(v)
                for v in vals]
        return {"order": self.order, "A": conv(self.A), "B": conv(self.B),
            "C": conv(self.C)}

    def to_text(self):
        lines = []
        for j in range(self.order + 1):
            for name, vals in (("A", self.A), ("B", self.B), ("C", self.C)):
                lines.append("%s_%s = %s" % (name, j, _text(vals[j])))
        return "\n".join(lines)

    def __repr__(self):
        return "%s(order=%s, symbolic=%s)" % (self.__class__.__name__,
            self.order, self.symbolic)


def _text(v):
    return v.to_text() if hasattr(v, "to_text") else str(v)


def mr_coeffs(N, q=None, r=None, half=HALF):
    """Run the resolvent recursion up to level `N`.

    B_k = eps*B_(k-1)'/2 + q*A_(k-1)
    C_k = -eps*C_(k-1)'/2 - r*A_(k-1)
    A_k = -1/2 * sum over i+j=k-1 of (A_i*A_j + B_i*C_j)

    `half` is the constant in front of the derivative terms; it is only ever
    changed to inject a fault.
    """
    if N < 0:
        raise SeriesError("Resolvent order must not be negative.")
    if q is None:
        q, r = q_var(), r_var()
    e = eps()
    zero = q * 0
    A, B, C = [zero], [q], [-r]
    for k in range(1, N + 1):
        B.append(e * derive(B[k - 1]) * half + q * A[k - 1])
        C.append(-(e * derive(C[k - 1]) * half) - r * A[k - 1])
        acc = zero
        for i in range(k):
            j = k - 1 - i
            acc = acc + A[i] * A[j] + B[i] * C[j]
        A.append(acc * (-HALF))
        log.debug("Resolvent level %s done", k)
    log.info("Resolvent coefficients computed up to level %s", N)
    return MRData(N, A, B, C, q, r)


def mr_matrix(mr):
    """R(xi) = diag(2, 0) + sum_j xi^(-j-1) [[A_j, B_j], [C_j, -A_j]]."""
    N = mr.order
    low = -(N + 1)
    a11 = {0: 2}
    a12, a21, a22 = {}, {}, {}
    for j in range(N + 1):
        a11[-j - 1] = mr.A[j]
        a12[-j - 1] = mr.B[j]
        a21[-j - 1] = mr.C[j]
        a22[-j - 1] = -mr.A[j]
    return Mat2(XiSeries(a11, 0, low), XiSeries(a12, 0, low),
        XiSeries(a21, 0, low), XiSeries(a22, 0, low))


def lax_potential(q, r):
    """U(xi) = [[-xi, -q], [r, xi]] as exact xi-series."""
    return Mat2(XiSeries({1: -1}, 1), XiSeries({0: -q}, 1),
        XiSeries({0: r}, 1), XiSeries({1: 1}, 1))


def _eps_derive(s):
    e = eps()
    return s.map(lambda c: derive(c) * e)


def lax_commutator(R, q, r):
    """eps*dR/dX + [U, R], the vanishing of which defines the resolvent."""
    U = lax_potential(q, r)
    return R.map(_eps_derive) + U.commutator(R)


def mr_verify(mr):
    """Check the defining identities of the resolvent built from `mr`.

    Raises `IdentityViolation` on the first failure, returns a list of
    `Check` records otherwise.
    """
    N = mr.order
    e = eps()
    checks = []
    for j in range(N + 1):
        A, B, C = mr.level(j)
        assert_vanishes(e * derive(A) - mr.r * B - mr.q * C,
            "eps*A_j' = r*B_j + q*C_j", "j=%s" % j)
    checks.append(Check("eps*A_j' = r*B_j + q*C_j", "j=0..%s" % N))
    R = mr_matrix(mr)
    trace = R.trace()
    assert_vanishes(trace - 2, "Tr R = 2")
    checks.append(Check("Tr R = 2", "exact"))
    det = R.det()
    assert_vanishes(det, "det R = 0")
    checks.append(Check("det R = 0", "xi^0..xi^%s" % det.low))
    lax = lax_commutator(R, mr.q, mr.r)
    assert_vanishes(lax, "[L, R] = 0")
    checks.append(Check("[L, R] = 0", "xi^1..xi^%s" % lax.a11.low))
    log.info("Resolvent identities hold up to level %s", N)
    return checks


def flow_poly(j, mr):
    """(P_j^q, P_j^r) = 2^(j+1)/eps * (B_(j+1), C_(j+1))."""
    if mr.order < j + 1:
        raise SeriesError("Flow %s needs resolvent level %s." % (j, j + 1))
    factor = eps(-1) * 2 ** (j + 1)
    return mr.B[j + 1] * factor, mr.C[j + 1] * factor


class FlowTable(object):
    """Flow polynomials of t_0..t_J and their derivations.

    Public interface:
        self.order: J
        self.poly(j): (P_j^q, P_j^r)
        self.derive(j, p): D_j applied to `p` (DiffPoly or rational)
    """
    def __init__(self, J, mr=None):
        if mr is None:
            mr = mr_coeffs(J + 1)
        assert mr.symbolic, "flows need the symbolic resolvent"
        self.order = J
        self.mr = mr
        self.flows = [flow_poly(j, mr) for j in range(J + 1)]
        self._images = {}

    def poly(self, j):
        return self.flows[j]

    def image(self, j, v):
        key = (j, v)
        if key not in self._images:
            if v.order == 0:
                pq, pr = self.flows[j]
                self._images[key] = pq if v.species == "q" else pr
            else:
                prev = self.image(j, JetVar(v.species, v.order - 1))
                self._images[key] = dp_derive(prev)
        return self._images[key]

    def derive(self, j, p):
        return flow_derive(j, p, self)

    def to_json(self):
        return dict(("P_%s" % j, {"q": pq.to_json(), "r": pr.to_json()})
            for j, (pq, pr) in enumerate(self.flows))

    def to_text(self):
        lines = []
        for j, (pq, pr) in enumerate(self.flows):
            lines.append("dq/dt_%s = %s" % (j, pq.to_text()))
            lines.append("dr/dt_%s = %s" % (j, pr.to_text()))
        return "\n".join(lines)


def flow_derive(j, p, table):
    """Derivation with q_m -> d^m P_j^q / dX^m, r_m -> d^m P_j^r / dX^m."""
    if j > table.order:
        raise SeriesError("Flow %s not in table of order %s."
            % (j, table.order))
    if not isinstance(p, DiffPoly):
        return DP_ZERO
    return p.apply_derivation(lambda v: table.image(j, v))


def flow_check(table, j):
    """Compare P_j against the full commutator 2^j/eps (-eps V_j' + [V_j, U])
    with V_j the polynomial part of xi^(j+1) R(xi)."""
    mr = table.mr
    v11 = {j + 1: 2}
    v12, v21, v22 = {}, {}, {}
    for i in range(j + 1):
        v11[j - i] = mr.A[i]
        v12[j - i] = mr.B[i]
        v21[j - i] = mr.C[i]
        v22[j - i] = -mr.A[i]
    V = Mat2(XiSeries(v11), XiSeries(v12), XiSeries(v21), XiSeries(v22))
    U = lax_potential(mr.q, mr.r)
    lhs = -V.map(_eps_derive) + V.commutator(U)
    factor = eps(-1) * 2 ** j
    lhs = lhs.map(lambda s: s.map(lambda c: c * factor))
    pq, pr = table.poly(j)
    rhs = Mat2(XiSeries(), XiSeries({0: -pq}), XiSeries({0: pr}),
        XiSeries())
    assert_vanishes(lhs - rhs, "flow %s from the Lax equation" % j)
    return Check("flow %s from the Lax equation" % j, "all xi orders")


def flows_commute(table, imax=2):
    """[D_i, D_j] vanishes on q0 and r0 for i, j <= imax."""
    for i in range(imax + 1):
        for j in range(i + 1, imax + 1):
            for s in (q_var(), r_var()):
                lhs = table.derive(i, table.derive(j, s))
                rhs = table.derive(j, table.derive(i, s))
                assert_vanishes(lhs - rhs, "[D_i, D_j] = 0",
                    "i=%s, j=%s, %s" % (i, j, s))
    return Check("[D_i, D_j] = 0", "i, j <= %s" % imax)


class OmegaTable(object):
    """Two-point functions Omega_(i,j), 0 <= i <= imax, 0 <= j <= jmax.

    Public interface:
        self.entries: dict (i, j) -> ring element
        self[i, j]
    """
    def __init__(self, imax, jmax, entries):
        self.imax = imax
        self.jmax = jmax
        self.entries = entries

    def __getitem__(self, ij):
        return self.entries[tuple(ij)]

    def check_symmetric(self):
        n = min(self.imax, self.jmax)
        for i in range(n + 1):
            for j in range(i + 1, n + 1):
                assert_vanishes(self[i, j] - self[j, i],
                    "Omega_ij = Omega_ji", "(%s,%s)" % (i, j))
        return Check("Omega_ij = Omega_ji", "i, j <= %s" % n)

    def to_json(self):
        return dict(("(%s,%s)" % ij, v.to_json() if hasattr(v, "to_json")
            else str(v)) for ij, v in self.entries.items())

    def to_text(self):
        return "\n".join("Omega%s = %s" % (str(ij).replace(" ", ""),
            _text(v)) for ij, v in sorted(self.entries.items()))


def two_point_series(mr, imax, jmax):
    """(Tr R(xi)R(nu) - 4)/(xi - nu)^2 expanded in |xi| > |nu|.

    Variable 0 is xi, variable 1 is nu.
    """
    budget = (imax + 2, imax + jmax + 4)
    R = mr_matrix(mr)
    Rxi = R.map(lambda s: MultiSeries.from_xi(s, 0, 2))
    Rnu = R.map(lambda s: MultiSeries.from_xi(s, 1, 2))
    T = trace_mul(Rxi, Rnu, budget) - 4
    S = T.mul(kernel_expand(0, 1, 2, 2, budget=budget), budget)
    bad = S.irregular()
    if bad:
        raise IdentityViolation("regularity of the two-point series",
            "xi^%s·nu^%s" % bad[0])
    return S


def omega_table(mr, imax, jmax):
    """Read Omega_(i,j) off the two-point generating series.

    `mr` must have order >= imax + jmax + 1.
    """
    S = two_point_series(mr, imax, jmax)
    zero = mr.q * 0
    entries = {}
    for i in range(imax + 1):
        for j in range(jmax + 1):
            exps = (-i - 2, -j - 2)
            if not S.covers(exps):
                raise SeriesError(
                    "Resolvent order %s too low for Omega_(%s,%s)."
                    % (mr.order, i, j))
            entries[(i, j)] = zero + S[exps] * 2 ** (i + j)
    log.info("Two-point table computed for i <= %s, j <= %s", imax, jmax)
    return OmegaTable(imax, jmax, entries)


def nabla_check(N, table=None, mr=None, diagonal=True):
    """Check the derivation identity for the generating flow operator.

    eps * sum_j 2^-j nu^(-j-2) D_j R(xi)
        = [R(nu), R(xi)]/(nu - xi) - nu^-1 [diag(2, 0), R(xi)]

    expanded in |nu| > |xi| (variable 0 is nu) over the symbolic ring.
    `diagonal=False` drops the last term.
    """
    J = N - 2
    if mr is None:
        mr = mr_coeffs(N)
    if table is None:
        table = FlowTable(J, mr_coeffs(J + 1))
    R = mr_matrix(mr)
    budget = (J + 2, N + 3)
    lhs_entries = []
    e = eps()
    for entry in (R.a11, R.a12, R.a21, R.a22):
        acc = MultiSeries.zero(2).restrict(budget)
        for j in range(J + 1):
            djr = entry.map(lambda c, j=j: table.derive(j, c) * e)
            term = MultiSeries.monomial((-j - 2, 0), Fraction(1, 2 ** j))
            acc = acc + term.mul(MultiSeries.from_xi(djr, 1, 2), budget)
        lhs_entries.append(acc)
    lhs = Mat2(*lhs_entries)
    Rnu = R.map(lambda s: MultiSeries.from_xi(s, 0, 2))
    Rxi = R.map(lambda s: MultiSeries.from_xi(s, 1, 2))
    K = kernel_expand(0, 1, 1, 2, budget=budget)
    comm = Rnu * Rxi - Rxi * Rnu
    rhs = comm.map(lambda s: s.mul(K, budget))
    if diagonal:
        D = Mat2(2, 0, 0, 0)
        corr = (D * R - R * D).map(
            lambda s: MultiSeries.monomial((-1, 0)).mul(
                MultiSeries.from_xi(s, 1, 2), budget))
        rhs = rhs - corr
    diff = lhs - rhs
    for name, value in diff.entries():
        for exps, c in value.items():
            if c:
                raise IdentityViolation("eps*nabla(nu) R(xi) identity",
                    "entry %s, nu^%s, xi^%s" % ((name,) + exps))
    log.info("Derivation identity holds up to nu^-%s", J + 2)
    return Check("eps*nabla(nu) R(xi) identity",
        "nu^-1..nu^-%s, total order <= %s" % (J + 2, N + 2))


def tau_symmetry(table, omega, imax=1):
    """eps*D_k(Omega_ij) is symmetric in (i, j, k) for indices <= imax."""
    e = eps()
    for i in range(imax + 1):
        for j in range(imax + 1):
            for k in range(imax + 1):
                ref = table.derive(k, omega[i, j]) * e
                for a, b, c in set(permutations((i, j, k))):
                    other = table.derive(c, omega[a, b]) * e
                    assert_vanishes(ref - other, "tau symmetry",
                        "(%s,%s,%s)" % (i, j, k))
    return Check("tau symmetry", "indices <= %s" % imax)


def remark_check(omega, mr, kmax=4):
    """Compare Omega_(k,0) with 2^(k+1) A_(k+1) (must hold) and report the
    agreement with 2^k A_k (informational only)."""
    literal = {}
    for k in range(kmax + 1):
        assert_vanishes(omega[k, 0] - mr.A[k + 1] * 2 ** (k + 1),
            "Omega_k0 = 2^(k+1) A_(k+1)", "k=%s" % k)
        literal[k] = not (omega[k, 0] - mr.A[k] * 2 ** k)
    log.info("Omega_k0 against 2^k A_k: %s", literal)
    return Check("Omega_k0 = 2^(k+1) A_(k+1)", "k <= %s" % kmax), literal
