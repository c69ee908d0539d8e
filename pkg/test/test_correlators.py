# -*- coding: utf-8 -*-
# Copyright 2014 The mrkit authors. See LICENSE file for details.


"""
Test the k-point tables: the resolvent formula, the wave-function formula,
the flow oracle for three points and the calibration against the cyclic
normalization with unit kernel.
"""


import os
import sys
from fractions import Fraction


from pytest import raises, mark


sys.path.insert(0, os.path.abspath('..'))
from mrkit.series import (XJet, IdentityViolation, SeriesError,
    set_truncation)
from mrkit.diffpoly import InitialData
from mrkit.resolvent import mr_coeffs, omega_table, FlowTable
from mrkit.waves import wave_pair, pair_fix, purity_check
from mrkit.correlators import (CorrelatorTable, CalibrationNotFound,
    cycle_classes, rotations, map_cycles, npoint_mr, npoint_wave, npoint_wave_series,
    omega3_table, omega2_as_table, compare, assert_match, zhou_calibrate,
    calibration_candidates)


ORDER = 4


def data1():
    return InitialData.from_triples([(0, 0, 1)], [(0, 0, 1)], label="DATA1")


def data2():
    return InitialData.from_triples([(0, 0, 1), (1, 0, 1)],
        [(0, 0, 1), (1, 0, -1)], label="DATA2")


def affine_table(data):
    return purity_check(pair_fix(wave_pair(data, ORDER)), ORDER - 1)[1]


def differs(build, reference):
    """True if `build()` is irregular or disagrees with `reference`."""
    try:
        table = build()
    except IdentityViolation:
        return True
    return not compare(table, reference).passed()


class Base(object):
    def setup_method(self, method):
        set_truncation(n_x=12, n_xi=8, eps_ceiling=8)
        self.data = data2()
        self.mr = mr_coeffs(ORDER, self.data.q, self.data.r)


class TestCycles(Base):
    def test_count(self):
        assert cycle_classes(2) == [(0, 1)]
        assert cycle_classes(3) == [(0, 1, 2), (0, 2, 1)]
        assert len(cycle_classes(4)) == 6

    def test_rotations(self):
        assert rotations((0, 2, 1)) == [(0, 2, 1), (2, 1, 0), (1, 0, 2)]

    def test_invalid(self):
        with raises(SeriesError):
            cycle_classes(0)
        with raises(SeriesError):
            npoint_mr(self.mr, 5, 0)

    def test_map_keeps_class_order(self):
        assert map_cycles(lambda s: s, 4) == cycle_classes(4)
        assert map_cycles(lambda s: s, 4, workers=1) == cycle_classes(4)
        assert map_cycles(len, 2, workers=3) == [2]

    def test_serial_equals_pooled(self):
        pooled = npoint_mr(self.mr, 3, 0, workers=4)
        serial = npoint_mr(self.mr, 3, 0, workers=1)
        assert pooled.entries == serial.entries
        A = affine_table(self.data)
        assert npoint_wave(A, 3, 0, workers=1).entries == \
            npoint_wave(A, 3, 0, workers=4).entries


class TestTables(Base):
    def test_symmetric(self):
        t = CorrelatorTable(2, 1, {(0, 1): XJet.const(1),
            (1, 0): XJet.const(1), (0, 0): XJet.const(3)}, "mr")
        assert t.check_symmetric().identity == "2-point table is symmetric"

    def test_asymmetric(self):
        t = CorrelatorTable(2, 1, {(0, 1): XJet.const(1),
            (1, 0): XJet.const(2)}, "mr")
        with raises(IdentityViolation):
            t.check_symmetric()

    def test_json(self):
        t = CorrelatorTable(3, 0, {(0, 0, 1): XJet.const(Fraction(1, 2))},
            "wave")
        assert t.to_json() == {"(0,0,1)": {"X^0": "1/2"}}
        assert t.to_text() == "Omega(0,0,1) = 1/2"

    def test_compare_mismatch(self):
        a = CorrelatorTable(2, 0, {(0, 0): XJet.const(1)}, "mr")
        b = CorrelatorTable(2, 0, {(0, 0): XJet.const(2)}, "wave")
        c = compare(a, b)
        assert not c.passed()
        assert c.first() == ((0, 0), "X^0, eps^0")
        assert c.to_json()["status"] == "fail"
        assert c.to_text().startswith("mr vs wave: FAIL at (0,0)")
        with raises(IdentityViolation):
            assert_match(a, b, "tables agree")

    def test_compare_k(self):
        a = CorrelatorTable(2, 0, {}, "mr")
        b = CorrelatorTable(3, 0, {}, "mr")
        with raises(SeriesError):
            compare(a, b)


class TestTwoPoint(Base):
    def test_resolvent_formula(self):
        t = npoint_mr(self.mr, 2, 1)
        assert t[0, 0] == XJet.from_triples([(0, 0, 1), (2, 0, -1)])
        t.check_symmetric()

    def test_resolvent_matches_omega(self):
        t = npoint_mr(self.mr, 2, 1)
        sym = omega2_as_table(omega_table(mr_coeffs(ORDER), 1, 1), self.data)
        assert compare(t, sym).passed()
        num = omega2_as_table(omega_table(self.mr, 1, 1))
        assert assert_match(t, num, "two-point").window.startswith(
            "indices <= 1")

    def test_wave_formula(self):
        A = affine_table(self.data)
        wave = npoint_wave(A, 2, 1)
        c = compare(wave, npoint_mr(self.mr, 2, 1))
        assert c.passed()
        assert c.to_text() == "wave vs mr: pass"

    def test_vanishing_r(self):
        d = InitialData.from_triples([(0, 0, 1)], [])
        mr = mr_coeffs(ORDER, d.q, d.r)
        assert npoint_mr(mr, 2, 1).is_zero()
        assert npoint_wave(affine_table(d), 2, 1).is_zero()

    def test_kernel_sign_detected(self):
        A = affine_table(self.data)
        ref = npoint_mr(self.mr, 2, 1)
        assert differs(lambda: npoint_wave(A, 2, 1, kernel_coeff=2), ref)

    def test_perturbed_entry_detected(self):
        A = affine_table(self.data).perturbed((0, 0), 1)
        ref = npoint_mr(self.mr, 2, 1)
        assert differs(lambda: npoint_wave(A, 2, 1), ref)


class TestThreePoint(Base):
    def test_flow_oracle(self):
        oracle = omega3_table(FlowTable(0), omega_table(mr_coeffs(3), 1, 1),
            self.data, 0)
        assert oracle[0, 0, 0] == XJet.from_triples([(1, 1, -2)])
        assert oracle.provenance == "flow-oracle"

    def test_resolvent_matches_oracle(self):
        oracle = omega3_table(FlowTable(0), omega_table(mr_coeffs(3), 1, 1),
            self.data, 0)
        assert compare(npoint_mr(self.mr, 3, 0), oracle).passed()

    def test_wave_matches_resolvent(self):
        wave = npoint_wave(affine_table(self.data), 3, 0)
        assert compare(wave, npoint_mr(self.mr, 3, 0)).passed()
        wave.check_symmetric()

    @mark.slow
    def test_deeper(self):
        data = self.data
        mr = mr_coeffs(6, data.q, data.r)
        A = purity_check(pair_fix(wave_pair(data, 6)), 5)[1]
        oracle = omega3_table(FlowTable(1), omega_table(mr_coeffs(4), 1, 1),
            data, 1)
        three_mr = npoint_mr(mr, 3, 1)
        assert compare(three_mr, oracle).passed()
        assert compare(npoint_wave(A, 3, 1), three_mr).passed()


def three_point_at_bound_two(data):
    """Wave and resolvent three-point tables at indices <= 2 and the flow
    oracle, with the wave pair and the resolvent deep enough for them."""
    A = purity_check(pair_fix(wave_pair(data, 9)), 8)[1]
    mr = mr_coeffs(9, data.q, data.r)
    oracle = omega3_table(FlowTable(2), omega_table(mr_coeffs(6), 2, 2),
        data, 2)
    return npoint_wave(A, 3, 2), npoint_mr(mr, 3, 2), oracle


class TestBoundTwo(Base):
    @mark.slow
    def test_data1(self):
        wave, mr, oracle = three_point_at_bound_two(data1())
        assert sorted(wave.entries) == sorted(mr.entries)
        assert (2, 2, 2) in wave.entries
        assert compare(wave, mr).passed()
        assert compare(mr, oracle).passed()
        assert assert_match(wave, mr, "3-point").window.startswith(
            "indices <= 2")

    @mark.slow
    def test_data2(self):
        wave, mr, oracle = three_point_at_bound_two(self.data)
        assert compare(wave, mr).passed()
        assert compare(mr, oracle).passed()
        wave.check_symmetric()

    @mark.slow
    def test_two_point_at_bound_three(self):
        data = data1()
        A = purity_check(pair_fix(wave_pair(data, 8)), 7)[1]
        mr = mr_coeffs(8, data.q, data.r)
        two_mr = npoint_mr(mr, 2, 3)
        assert compare(npoint_wave(A, 2, 3), two_mr).passed()
        assert compare(two_mr, omega2_as_table(omega_table(mr, 3, 3))).passed()


class TestFourPoint(Base):
    def test_wave_matches_resolvent(self):
        wave = npoint_wave(affine_table(self.data), 4, 0)
        mr = npoint_mr(self.mr, 4, 0)
        assert sorted(wave.entries) == [(0, 0, 0, 0)]
        assert compare(wave, mr).passed()
        wave.check_symmetric()

    def test_kernel_sign_detected(self):
        A = affine_table(self.data)
        ref = npoint_mr(self.mr, 4, 0)
        assert differs(lambda: npoint_wave(A, 4, 0, kernel_coeff=2), ref)


class TestCalibration(Base):
    def test_candidates(self):
        c = calibration_candidates()
        assert c[0] == (1, 1, False)
        assert len(c) == 18 * 18 * 2

    def test_two_point_fit(self):
        A = affine_table(self.data)
        cal = zhou_calibrate(A, npoint_mr(self.mr, 2, 1), bound=1)
        assert cal.beta == 1
        assert (cal.alpha, cal.transposed) in (
            (Fraction(1, 2), True), (Fraction(-1, 2), False))
        assert cal.validated is None
        assert cal.to_json()["scale"] == "2"

    @mark.slow
    def test_three_point_validation(self):
        A = affine_table(self.data)
        series3 = npoint_wave_series(A, 3, 0)
        cal = zhou_calibrate(A, npoint_mr(self.mr, 2, 0), bound=0,
            series3=series3)
        assert cal.validated is True
        assert (cal.alpha, cal.beta, cal.transposed) == (
            Fraction(1, 2), 1, True)

    def test_not_found(self):
        A = affine_table(self.data)
        wrong = CorrelatorTable(2, 0, {(0, 0): XJet.const(7)}, "mr")
        with raises(CalibrationNotFound):
            zhou_calibrate(A, wrong, bound=0)
