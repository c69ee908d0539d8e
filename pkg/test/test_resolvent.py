# -*- coding: utf-8 -*-
# Copyright 2014 The mrkit authors. See LICENSE file for details.


"""
Test the resolvent recursion, the flows derived from it and the two-point
table, symbolically and at concrete initial data.
"""


import os
import sys
from fractions import Fraction


from pytest import raises, mark


sys.path.insert(0, os.path.abspath('..'))
from mrkit.series import (EpsLaurent, XJet, IdentityViolation, SeriesError,
    set_truncation)
from mrkit.diffpoly import InitialData, DP_ZERO, dp_eval, q_var, r_var
from mrkit.resolvent import (mr_coeffs, mr_matrix, mr_verify, flow_poly,
    FlowTable, flow_check, flows_commute, omega_table, nabla_check,
    tau_symmetry, remark_check)


def eps(power=1):
    return EpsLaurent.eps(power)


def data2():
    return InitialData.from_triples([(0, 0, 1), (1, 0, 1)],
        [(0, 0, 1), (1, 0, -1)], label="DATA2")


q, r = q_var(), r_var()
q1, r1 = q_var(1), r_var(1)


class Base(object):
    def setup_method(self, method):
        set_truncation(n_x=12, n_xi=8, eps_ceiling=8)


class TestRecursion(Base):
    def test_first_levels(self):
        mr = mr_coeffs(2)
        assert mr.symbolic
        assert mr.A[0].is_exact_zero()
        assert mr.B[0] == q
        assert mr.C[0] == -r
        assert mr.B[1] == q1 * eps() * Fraction(1, 2)
        assert mr.C[1] == r1 * eps() * Fraction(1, 2)
        assert mr.A[1] == q * r * Fraction(1, 2)
        assert mr.A[2] == (q1 * r - q * r1) * eps() * Fraction(1, 4)

    def test_negative_order(self):
        with raises(SeriesError):
            mr_coeffs(-1)

    def test_matrix_shape(self):
        R = mr_matrix(mr_coeffs(3))
        assert R.a11[0] == 2
        assert R.a22[0] == 0
        assert R.a12[-1] == q
        assert R.a11.low == -4

    def test_identities_symbolic(self):
        checks = mr_verify(mr_coeffs(5))
        assert [c.identity for c in checks] == [
            "eps*A_j' = r*B_j + q*C_j", "Tr R = 2", "det R = 0", "[L, R] = 0"]

    def test_identities_at_data(self):
        d = data2()
        mr = mr_coeffs(4, d.q, d.r)
        assert not mr.symbolic
        assert len(mr_verify(mr)) == 4

    def test_evaluation_commutes(self):
        d = data2()
        sym = mr_coeffs(4)
        num = mr_coeffs(4, d.q, d.r)
        for j in range(5):
            assert dp_eval(sym.A[j], d) == num.A[j]
            assert dp_eval(sym.B[j], d) == num.B[j]

    def test_wrong_half_detected(self):
        with raises(IdentityViolation) as e:
            mr_verify(mr_coeffs(3, half=Fraction(1, 3)))
        assert e.value.identity == "eps*A_j' = r*B_j + q*C_j"
        assert e.value.locus.startswith("j=1")

    def test_json(self):
        doc = mr_coeffs(1).to_json()
        assert doc["order"] == 1
        assert len(doc["A"]) == 2

    def test_text(self):
        text = mr_coeffs(1).to_text()
        assert "A_1 = 1/2·q0·r0" in text
        assert "B_0 = q0" in text


class TestFlows(Base):
    def setup_method(self, method):
        Base.setup_method(self, method)
        self.table = FlowTable(2)

    def test_translation(self):
        assert self.table.poly(0) == (q1, r1)
        assert self.table.derive(0, q_var(2)) == q_var(3)

    def test_nls_flow(self):
        pq, pr = self.table.poly(1)
        assert pq == q_var(2) * eps() + q * q * r * eps(-1) * 2
        assert pr == -(r_var(2) * eps()) - q * r * r * eps(-1) * 2

    def test_flow_needs_level(self):
        with raises(SeriesError):
            flow_poly(3, mr_coeffs(3))

    def test_derive_constant(self):
        assert self.table.derive(1, Fraction(3)) is DP_ZERO

    def test_derive_outside_table(self):
        with raises(SeriesError):
            self.table.derive(3, q)

    def test_lax_form(self):
        for j in range(3):
            assert flow_check(self.table, j).identity == (
                "flow %s from the Lax equation" % j)

    def test_commute(self):
        assert flows_commute(self.table, 2).window == "i, j <= 2"

    def test_json(self):
        doc = self.table.to_json()
        assert sorted(doc) == ["P_0", "P_1", "P_2"]
        assert doc["P_0"]["q"] == q1.to_json()


class TestTwoPoint(Base):
    def test_low_entries(self):
        omega = omega_table(mr_coeffs(4), 1, 1)
        assert omega[0, 0] == q * r
        assert omega[1, 0] == (q1 * r - q * r1) * eps()
        assert omega[1, 0] == omega[0, 1]

    def test_symmetric(self):
        omega = omega_table(mr_coeffs(5), 2, 2)
        assert omega.check_symmetric().window == "i, j <= 2"

    def test_order_too_low(self):
        with raises(SeriesError):
            omega_table(mr_coeffs(1), 1, 1)

    def test_at_data(self):
        d = data2()
        omega = omega_table(mr_coeffs(4, d.q, d.r), 1, 1)
        assert omega[0, 0] == XJet.from_triples([(0, 0, 1), (2, 0, -1)])
        assert omega.to_json()["(0,0)"] == {"X^0": "1", "X^2": "-1"}

    def test_remark(self):
        mr = mr_coeffs(5)
        omega = omega_table(mr, 3, 0)
        check, literal = remark_check(omega, mr, 3)
        assert check.identity == "Omega_k0 = 2^(k+1) A_(k+1)"
        assert literal[0] is False

    def test_tau_symmetry(self):
        omega = omega_table(mr_coeffs(4), 1, 1)
        assert tau_symmetry(FlowTable(1), omega, 1).identity == "tau symmetry"

    def test_text(self):
        omega = omega_table(mr_coeffs(3), 1, 0)
        assert "Omega(0,0) = q0·r0" in omega.to_text()


class TestDerivationIdentity(Base):
    def test_holds(self):
        assert nabla_check(4).identity == "eps*nabla(nu) R(xi) identity"

    def test_without_diagonal_term(self):
        with raises(IdentityViolation):
            nabla_check(4, diagonal=False)

    def test_wrong_half_detected(self):
        with raises(IdentityViolation):
            nabla_check(4, mr=mr_coeffs(4, half=Fraction(1, 3)))

    @mark.slow
    def test_deeper(self):
        nabla_check(6)
