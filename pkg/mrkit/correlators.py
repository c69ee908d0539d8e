# -*- coding: utf-8 -*-
# Copyright 2014 The mrkit authors. See LICENSE file for details.


"""
mrkit.correlators -- k-point generating series from the resolvent and from
the wave functions, and their comparison.

All kernels are expanded in the single region |xi_1| > |xi_2| > ... > |xi_k|.
"""


import logging
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from itertools import permutations, product
from math import factorial

from .series import (XJet, MultiSeries, Check, IdentityViolation,
    SeriesError, kernel_expand, mat_mul, trace_mul, locus, monomial_text,
    with_x_window)
from .diffpoly import dp_eval
from .resolvent import mr_matrix, eps


log = logging.getLogger("correlators")


MAX_K = 4
# Default worker count for the per-cycle-class terms (None: executor default).
WORKERS = None


class CalibrationNotFound(Exception):
    pass


def cycle_classes(k):
    """Representatives of permutations of range(k) modulo rotation: the
    permutations fixing 0 in front."""
    if k < 1:
        raise SeriesError("Need at least one variable.")
    reps = [(0,) + p for p in permutations(range(1, k))]
    assert len(reps) == factorial(k - 1)
    return reps


def rotations(sigma):
    return [sigma[i:] + sigma[:i] for i in range(len(sigma))]


def map_cycles(func, k, workers=None):
    """`func`(sigma) for every cycle class of k variables, in class order.

    Classes are evaluated on a thread pool unless `workers` is 1 or there is
    a single class.
    """
    classes = cycle_classes(k)
    if workers is None:
        workers = WORKERS
    if workers == 1 or len(classes) == 1:
        return [func(sigma) for sigma in classes]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, classes))


def _exact_sum(terms, start):
    total = start
    for t in terms:
        total = total + t
    return total


class CorrelatorTable(object):
    """Omega_(i_1..i_k) for all indices <= bound.

    Public interface:
        self.k, self.bound, self.provenance ('mr', 'wave', 'flow-oracle')
        self.entries: dict index tuple -> XJet
    """
    def __init__(self, k, bound, entries, provenance):
        self.k = k
        self.bound = bound
        self.entries = entries
        self.provenance = provenance

    def __getitem__(self, idx):
        return self.entries[tuple(idx)]

    def indices(self):
        return sorted(self.entries)

    def is_zero(self):
        return not any(bool(v) for v in self.entries.values())

    def check_symmetric(self):
        for idx in self.indices():
            for perm in set(permutations(idx)):
                if perm in self.entries:
                    diff = self.entries[perm] - self.entries[idx]
                    if diff:
                        raise IdentityViolation(
                            "%s-point table is symmetric" % self.k,
                            "%s vs %s" % (_idx_text(idx), _idx_text(perm)))
        return Check("%s-point table is symmetric" % self.k, with_x_window(
            "indices <= %s" % self.bound, list(self.entries.values())))

    def to_json(self):
        return dict((_idx_text(idx), v.to_json())
            for idx, v in self.entries.items())

    def to_text(self):
        return "\n".join("Omega%s = %s" % (_idx_text(idx), v.to_text())
            for idx, v in sorted(self.entries.items()))

    def __repr__(self):
        return "%s(k=%s, bound=%s, provenance=%s)" % (
            self.__class__.__name__, self.k, self.bound, self.provenance)


def _idx_text(idx):
    return "(%s)" % ",".join(str(i) for i in idx)


def _budget(k, bound):
    return tuple((t + 1) * (bound + 2) for t in range(k))


def _check_k(k):
    if k < 2 or k > MAX_K:
        raise SeriesError("k must be between 2 and %s, got %s." % (MAX_K, k))


def _extract(S, k, bound, provenance, what):
    bad = S.irregular()
    if bad:
        raise IdentityViolation("regularity of the %s-point series (%s)"
            % (k, what), monomial_text(bad[0]))
    entries = {}
    for idx in product(range(bound + 1), repeat=k):
        exps = tuple(-i - 2 for i in idx)
        if not S.covers(exps):
            raise SeriesError("Truncation too low for %s entry %s."
                % (what, _idx_text(idx)))
        c = S[exps]
        entries[idx] = (c if isinstance(c, XJet) else XJet.const(c)) * \
            2 ** sum(idx)
    log.info("%s-point table (%s) read off for indices <= %s", k, what,
        bound)
    return CorrelatorTable(k, bound, entries, provenance)


def _cyclic_kernels(sigma, k, budget):
    """prod_j 1/(xi_sigma(j) - xi_sigma(j+1)) over the cycle."""
    acc = None
    for j in range(k):
        a, b = sigma[j], sigma[(j + 1) % k]
        K = kernel_expand(a, b, 1, k, budget=budget)
        acc = K if acc is None else acc.mul(K, budget)
    return acc


def npoint_mr_series(mr, k, bound, delta_sign=-1, workers=None):
    """-sum over cycles of Tr(R(xi_s1)..R(xi_sk)) / prod (xi_sj - xi_sj+1)
    + delta_sign * 4 delta_(k,2) / (xi_1 - xi_2)^2."""
    _check_k(k)
    budget = _budget(k, bound)
    R = mr_matrix(mr)
    lifted = [R.map(lambda s, v=v: MultiSeries.from_xi(s, v, k))
        for v in range(k)]

    def term(sigma):
        M = lifted[sigma[0]]
        for v in sigma[1:-1]:
            M = mat_mul(M, lifted[v], budget)
        T = trace_mul(M, lifted[sigma[-1]], budget)
        log.debug("Cycle %s done", sigma)
        return T.mul(_cyclic_kernels(sigma, k, budget), budget)

    total = -_exact_sum(map_cycles(term, k, workers),
        MultiSeries.zero(k).restrict(budget))
    if k == 2:
        total = total + kernel_expand(0, 1, 2, 2, budget=budget) * \
            (4 * delta_sign)
    return total


def npoint_mr(mr, k, bound, delta_sign=-1, workers=None):
    """k-point table from the matrix resolvent."""
    S = npoint_mr_series(mr, k, bound, delta_sign, workers)
    return _extract(S, k, bound, "mr", "resolvent formula")


def affine_series(a_table, u, v, k, coeff=1, transposed=False):
    """sum A_(a,b) xi_u^(-a-1) xi_v^(-b-1), window set by the table's total
    order."""
    c = {}
    for (a, b), val in a_table.items():
        if transposed:
            a, b = b, a
        exps = [0] * k
        exps[u] = -a - 1
        exps[v] = -b - 1
        c[tuple(exps)] = val * coeff
    z = MultiSeries(k, {})
    pu, pv = z.region.index(u), z.region.index(v)
    p0, p1 = min(pu, pv), max(pu, pv)
    top = a_table.total + 2
    lo = tuple(0 if t < p0 else (1 if t < p1 else 2) for t in range(k))
    hi = tuple(top if t >= p1 else float("inf") for t in range(k))
    return MultiSeries(k, c, lo, hi)


def kernel_b(a_table, u, v, k, budget, kernel_coeff=-2, transposed=False,
        a_coeff=1):
    """kernel_coeff/(xi_u - xi_v) + a_coeff * A(xi_u, xi_v)."""
    K = kernel_expand(u, v, 1, k, budget=budget) * kernel_coeff
    return (K + affine_series(a_table, u, v, k, a_coeff, transposed)
        ).restrict(budget)


def cyclic_b_sum(a_table, k, bound, kernel_coeff=-2, a_coeff=1,
        transposed=False, reverse=True, workers=None):
    """sum over cycles of prod_j B(xi_s(j+1), xi_s(j)) (or the forward order
    B(xi_s(j), xi_s(j+1)) when `reverse` is False)."""
    budget = _budget(k, bound)
    edges = {}
    for sigma in cycle_classes(k):
        for j in range(k):
            a, b = sigma[j], sigma[(j + 1) % k]
            edges[sigma, j] = (b, a) if reverse else (a, b)
    # all kernels are built before the pool starts
    cache = {}
    for pair in edges.values():
        if pair not in cache:
            cache[pair] = kernel_b(a_table, pair[0], pair[1], k, budget,
                kernel_coeff, transposed, a_coeff)

    def term(sigma):
        acc = cache[edges[sigma, 0]]
        for j in range(1, k):
            acc = acc.mul(cache[edges[sigma, j]], budget)
        return acc

    return _exact_sum(map_cycles(term, k, workers),
        MultiSeries.zero(k).restrict(budget))


def npoint_wave_series(a_table, k, bound, kernel_coeff=-2, workers=None):
    _check_k(k)
    budget = _budget(k, bound)
    S = -cyclic_b_sum(a_table, k, bound, kernel_coeff=kernel_coeff,
        workers=workers)
    if k == 2:
        S = S - kernel_expand(0, 1, 2, 2, budget=budget) * 4
    return S


def npoint_wave(a_table, k, bound, kernel_coeff=-2, workers=None):
    """k-point table from the regularized kernel of the wave pair.

    B = kernel_coeff/(xi - nu) + A; only -2 gives the correlators.
    """
    S = npoint_wave_series(a_table, k, bound, kernel_coeff, workers)
    return _extract(S, k, bound, "wave", "wave-function formula")


def omega3_flow(i1, i2, i3, flows, omega_sym, data):
    """eps * D_i3(Omega_(i1,i2)) at the slice `data`."""
    return dp_eval(flows.derive(i3, omega_sym[i1, i2]) * eps(), data)


def omega3_table(flows, omega_sym, data, bound):
    entries = {}
    for idx in product(range(bound + 1), repeat=3):
        entries[idx] = omega3_flow(idx[0], idx[1], idx[2], flows, omega_sym,
            data)
    return CorrelatorTable(3, bound, entries, "flow-oracle")


def omega2_as_table(omega, data=None):
    """View a two-point `OmegaTable` as a `CorrelatorTable`."""
    bound = min(omega.imax, omega.jmax)
    entries = {}
    for i in range(bound + 1):
        for j in range(bound + 1):
            v = omega[i, j]
            if data is not None:
                v = dp_eval(v, data)
            entries[(i, j)] = v if isinstance(v, XJet) else XJet.const(v)
    return CorrelatorTable(2, bound, entries, "mr")


class Comparison(object):
    """Result of comparing two correlator tables.

    Public interface:
        self.mismatches: list of (index, locus) pairs, empty on success.
    """
    def __init__(self, left, right, mismatches):
        self.left = left
        self.right = right
        self.mismatches = mismatches

    def passed(self):
        return not self.mismatches

    def first(self):
        return self.mismatches[0] if self.mismatches else None

    def to_json(self):
        out = {"left": self.left, "right": self.right,
            "status": "pass" if self.passed() else "fail"}
        if self.mismatches:
            idx, where = self.mismatches[0]
            out["first_mismatch"] = {"index": _idx_text(idx),
                "locus": where}
        return out

    def to_text(self):
        if self.passed():
            return "%s vs %s: pass" % (self.left, self.right)
        idx, where = self.first()
        return "%s vs %s: FAIL at %s, %s (%s mismatching entries)" % (
            self.left, self.right, _idx_text(idx), where,
            len(self.mismatches))


def compare(a, b):
    """Exact coefficient diff of two tables over their common indices."""
    if a.k != b.k:
        raise SeriesError("Cannot compare %s-point with %s-point table."
            % (a.k, b.k))
    mismatches = []
    for idx in a.indices():
        if idx not in b.entries:
            continue
        place = locus(a[idx] - b[idx])
        if place is not None:
            mismatches.append((idx, ", ".join(place)))
    if mismatches:
        log.info("%s vs %s: first mismatch at %s", a.provenance,
            b.provenance, _idx_text(mismatches[0][0]))
    return Comparison(a.provenance, b.provenance, mismatches)


def assert_match(a, b, identity):
    c = compare(a, b)
    if not c.passed():
        idx, where = c.first()
        raise IdentityViolation(identity, "%s, %s" % (_idx_text(idx), where))
    return Check(identity, with_x_window("indices <= %s" % min(a.bound,
        b.bound), list(a.entries.values()) + list(b.entries.values())))


def _lattice():
    exps = sorted(range(-4, 5), key=lambda e: (abs(e), -e))
    values = []
    for e in exps:
        for sign in (1, -1):
            values.append(Fraction(sign) * Fraction(2) ** e)
    return values


def calibration_candidates():
    """(alpha, beta, transposed) ordered from the simplest lattice point."""
    vals = _lattice()
    rank = dict((v, n) for n, v in enumerate(vals))
    out = [(a, b, t) for a in vals for b in vals for t in (False, True)]
    out.sort(key=lambda abt: (rank[abt[0]] + rank[abt[1]], rank[abt[0]],
        abt[2]))
    return out


def zhou_series(a_table, k, bound, alpha, beta, transposed):
    """-sum over cycles of prod B_Z(xi_s(j), xi_s(j+1))
    - delta_(k,2)/(xi_1 - xi_2)^2, with B_Z = 1/(x - y) + A_Z(x, y) and
    A_Z built from `a_table` by scaling."""
    budget = _budget(k, bound)
    scaled = a_table.scaled(alpha, beta, transposed)
    S = -cyclic_b_sum(scaled, k, bound, kernel_coeff=1, reverse=False)
    if k == 2:
        S = S - kernel_expand(0, 1, 2, 2, budget=budget)
    return S


class Calibration(object):
    def __init__(self, alpha, beta, transposed, scale, validated):
        self.alpha = alpha
        self.beta = beta
        self.transposed = transposed
        self.scale = scale
        self.validated = validated

    def to_json(self):
        return {"alpha": str(self.alpha), "beta": str(self.beta),
            "transposed": self.transposed, "scale": str(self.scale),
            "validated_k3": self.validated}

    def to_text(self):
        return ("A_Z(a,b) = %s * %s^(a+b) * A(%s), times scaled by %s "
            "(three-point validation: %s)" % (self.alpha, self.beta,
            "b,a" if self.transposed else "a,b", self.scale,
            {True: "pass", False: "fail", None: "not run"}[self.validated]))

    def __repr__(self):
        return "%s(alpha=%s, beta=%s, transposed=%s)" % (
            self.__class__.__name__, self.alpha, self.beta, self.transposed)


def _lowest_zhou(a_table, alpha, beta, transposed):
    # coefficient of xi_1^-2 xi_2^-2 in the two-point series
    s = a_table.scaled(alpha, beta, transposed)
    return s[1, 0] * -1 + s[0, 1] - s[0, 0] * s[0, 0]


def zhou_calibrate(a_table, omega2, bound=1, series3=None, scale=2):
    """Find (alpha, beta, transposed) such that the cyclic formula with
    A_Z = alpha beta^(i+j) A reproduces the two-point table after the time
    scaling xi -> `scale` per variable.

    `series3`, if given, is the wave-form three-point series used to
    validate the fit. Raises `CalibrationNotFound` when no lattice point
    fits.
    """
    k2 = scale ** 2
    target = omega2[0, 0]
    ours2 = npoint_wave_series(a_table, 2, bound)
    for alpha, beta, transposed in calibration_candidates():
        if (0, 1) in a_table:
            low = _lowest_zhou(a_table, alpha, beta, transposed) * k2
            if low - target:
                continue
        z2 = zhou_series(a_table, 2, bound, alpha, beta, transposed)
        if locus(ours2 - z2 * k2) is not None:
            continue
        validated = None
        if series3 is not None:
            z3 = zhou_series(a_table, 3, bound, alpha, beta, transposed)
            validated = locus(series3 - z3 * scale ** 3) is None
            if not validated:
                continue
        log.info("Calibration found: alpha=%s beta=%s transposed=%s",
            alpha, beta, transposed)
        return Calibration(alpha, beta, transposed, scale, validated)
    raise CalibrationNotFound("No lattice point reproduces the two-point "
        "table.")
