import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pieforge.oracle import algebra_checks, quad_apply, random_column, random_piop
from pieforge.piops import (PiDimensionError, PiOp4, add4, adjoint4, apply_exact, block4, compose4, hconcat4,
                            identity4, matrix_op, vconcat4, zero4)
from pieforge.polyalg import PolyMat, parse_poly

dims_st = st.tuples(*(st.integers(0, 2) for _ in range(4)))


def heat_T():
    return PiOp4.from_params(R1=[["-th"]], R2=[["-s"]], dims=(0, 0, 1, 1))


def rand_op(seed, dims, deg=3, dom=(0, 1)):
    return random_piop(random.Random(seed), dims, deg, dom)


# ------------------------------------------------------------------ addition
@given(st.integers(0, 10**6), dims_st)
def test_add_identities(seed, dims):
    X = rand_op(seed, dims)
    Y = rand_op(seed + 1, dims)
    assert add4(X, zero4(dims)) == X
    assert (X + X * -1).is_zero
    assert X + Y == Y + X


def test_heat_operator_minus_itself_applies_to_zero():
    T = heat_T()
    fin, dist = apply_exact(T + (-T), (None, PolyMat([[parse_poly("s^2 + 1")]])))
    assert dist.is_zero


def test_add_rejects_mismatched_dims():
    with pytest.raises(PiDimensionError):
        add4(zero4((1, 1, 1, 1)), zero4((1, 1, 1, 2)))


# --------------------------------------------------------------- composition
def test_identity_is_neutral():
    Y = rand_op(3, (2, 1, 1, 2))
    assert compose4(identity4(2, 1), Y) == Y
    assert compose4(Y, identity4(1, 2)) == Y


def test_multiplier_product():
    M = PiOp4.from_params(R0=[["s"]], dims=(0, 0, 1, 1))
    assert compose4(M, M).R0 == PolyMat([["s^2"]])


def test_volterra_composition_gives_cauchy_kernel():
    V = PiOp4.from_params(R1=[[1]], dims=(0, 0, 1, 1))
    VV = compose4(V, V)
    assert VV.R1 == PolyMat([["s - th"]])
    assert VV.R0.is_zero and VV.R2.is_zero


@given(st.integers(0, 10**6))
def test_composition_is_associative(seed):
    rng = random.Random(seed)
    X = random_piop(rng, (1, 1, 1, 1), 2)
    Y = random_piop(rng, (1, 2, 1, 1), 2)
    Z = random_piop(rng, (2, 1, 1, 1), 2)
    assert compose4(X, compose4(Y, Z)) == compose4(compose4(X, Y), Z)


@given(st.integers(0, 10**6))
def test_adjoint_reverses_products(seed):
    rng = random.Random(seed)
    X = random_piop(rng, (1, 2, 1, 1), 2)
    Y = random_piop(rng, (2, 1, 1, 2), 2)
    assert adjoint4(compose4(X, Y)) == compose4(adjoint4(Y), adjoint4(X))


def test_compose_checks_inner_dims():
    with pytest.raises(PiDimensionError):
        compose4(zero4((1, 2, 1, 1)), zero4((1, 1, 1, 1)))


def test_composition_through_empty_channel_vanishes():
    X = rand_op(5, (1, 0, 1, 0))
    Y = rand_op(6, (0, 1, 0, 1))
    assert compose4(X, Y).is_zero


# ------------------------------------------------------------------- adjoint
@given(st.integers(0, 10**6), dims_st)
def test_adjoint_involution(seed, dims):
    X = rand_op(seed, dims)
    assert adjoint4(adjoint4(X)) == X


def test_adjoint_of_lower_kernel():
    X = PiOp4.from_params(R1=[["s"]], dims=(0, 0, 1, 1))
    Xa = adjoint4(X)
    assert Xa.R2 == PolyMat([["th"]]) and Xa.R1.is_zero


def test_symmetric_operator_is_self_adjoint():
    X = PiOp4.from_params(P=[[1, 2], [2, 5]], R0=[["s"]], R1=[["s*th^2"]], R2=[["s^2*th"]], dims=(2, 2, 1, 1))
    assert adjoint4(X) == X


# ------------------------------------------------------------- concatenation
def test_concatenation_with_empty_operand():
    X = rand_op(7, (1, 1, 1, 1))
    assert hconcat4(X, zero4((1, 0, 1, 0))) == X
    assert vconcat4(zero4((0, 1, 0, 1)), X) == X


def test_vconcat_blocks_recover_arguments():
    X = rand_op(8, (1, 2, 1, 1))
    Y = rand_op(9, (2, 2, 1, 1))
    V = vconcat4(X, Y)
    assert V.block(rows=(slice(0, 1), slice(0, 1))) == X
    assert V.block(rows=(slice(1, 3), slice(1, 2))) == Y


def test_block_assembly_matches_parameters():
    A = matrix_op([[2]])
    Bop = PiOp4.from_params(Q1=[["s"]], dims=(1, 0, 0, 1))
    Cop = PiOp4.from_params(Q2=[["1 - s"]], dims=(0, 1, 1, 0))
    D = PiOp4.from_params(R0=[[3]], R1=[["th"]], dims=(0, 0, 1, 1))
    M = block4([[A, Bop], [Cop, D]])
    want = PiOp4.from_params(P=[[2]], Q1=[["s"]], Q2=[["1 - s"]], R0=[[3]], R1=[["th"]])
    assert M == want


# --------------------------------------------------------------- application
def test_identity_application():
    xi = PolyMat([[parse_poly("s^2")], [parse_poly("1 - th*0 + s")]])
    fin, dist = apply_exact(identity4(1, 2), ([Fraction(3)], xi))
    assert fin == PolyMat([[3]]) and dist == xi


def test_heat_operator_on_constant():
    # (T 1)(s) = -int_0^s th dth - int_s^1 s dth = s^2/2 - s
    _, dist = apply_exact(heat_T(), (None, PolyMat([[1]])))
    assert dist == PolyMat([["s^2/2 - s"]])
    _, q = quad_apply(heat_T(), (None, lambda s: np.ones((1, np.size(s)))), np.array([0.25, 0.8]))
    assert np.allclose(q[0], [0.25**2 / 2 - 0.25, 0.8**2 / 2 - 0.8], atol=1e-13)


def test_zero_input_gives_zero_output():
    X = rand_op(10, (1, 1, 2, 2))
    fin, dist = apply_exact(X, ([0], PolyMat.zeros(2, 1)))
    assert fin.is_zero and dist.is_zero


@given(st.integers(0, 10**6))
def test_exact_application_matches_quadrature(seed):
    rng = random.Random(seed)
    dom = (Fraction(-1), Fraction(2))
    X = random_piop(rng, (1, 1, 2, 1), 3, dom)
    v = random_column(rng, 1, 3)
    fin, dist = apply_exact(X, ([Fraction(1, 2)], v))
    s = np.linspace(-1, 2, 5)
    qf, qd = quad_apply(X, ([0.5], lambda t: np.atleast_2d(v[0, 0].eval(np.asarray(t, float)))), s)
    ref = np.array([[dist[i, 0].eval(x) for x in s] for i in range(2)], dtype=float)
    assert np.allclose(qd, ref, rtol=1e-11, atol=1e-11 * max(1, np.abs(ref).max()))
    assert np.allclose(qf, fin.to_float().ravel(), rtol=1e-11, atol=1e-11)


def test_algebra_oracle_on_a_pair():
    rng = random.Random(11)
    X = random_piop(rng, (1, 1, 1, 2), 4)
    Y = random_piop(rng, (1, 2, 2, 1), 4)
    res = algebra_checks(X, Y, seed=1, n_quad=200, points=4)
    assert max(res["compose"], res["add"], res["adjoint"]) < 1e-10


def test_json_round_trip():
    X = rand_op(12, (1, 2, 2, 1), dom=("1/2", 3))
    assert PiOp4.from_json(X.to_json()) == X
