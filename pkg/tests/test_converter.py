import random
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pieforge.converter import (InadmissibleError, ModelError, build_BQ, build_BT, build_T_Q, build_Tmaps,
                                build_U, check_admissible, convert_gpde, convert_subsystem, deviation_report,
                                direct_assembly, fundamental_of, reconstruct)
from pieforge.gpde import ContinuityVector, GpdeModel, layout
from pieforge.io import load_builtin
from pieforge.oracle import bc_residual, random_column, random_model
from pieforge.piops import apply_exact
from pieforge.polyalg import PolyMat, rat_inv


def M(rows):
    return PolyMat(rows)


# ------------------------------------------------------------ T, Q, U
def test_T_Q_for_second_order_state():
    tq = build_T_Q(ContinuityVector((0, 0, 1)))
    assert tq["T"] == M([[1, "s"], [0, 1]])
    assert tq["Q"] == M([["s"], [1]])


def test_T_for_mixed_vector():
    T = build_T_Q(ContinuityVector((0, 2, 1)))["T"]
    want = M([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, "s"], [0, 0, 0, 1]])
    assert T == want


@given(st.lists(st.integers(0, 3), min_size=2, max_size=5))
def test_T_is_identity_at_zero_and_unit_upper_triangular(nv):
    n = ContinuityVector(tuple(nv))
    T = build_T_Q(n)["T"]
    assert T.subs("s", 0) == PolyMat.eye(n.n_S)
    for i in range(T.rows):
        assert T[i, i] == T[i, i].const(1)
        for j in range(i):
            assert T[i, j].is_zero


def test_U_for_second_order_state():
    u = build_U(ContinuityVector((0, 0, 1)))
    assert u["U2"] == M([[1, 0], [0, 1], [0, 0]])
    assert u["U1"] == M([[0], [0], [1]])


@given(st.lists(st.integers(0, 3), min_size=1, max_size=5))
def test_U_is_a_selection_of_F(nv):
    n = ContinuityVector(tuple(nv))
    u = build_U(n)
    W = PolyMat.hstack([u["U1"], u["U2"]]).to_float()
    assert W.shape == (n.width_F, n.width_F)
    assert np.array_equal(W.T @ W, np.eye(n.width_F))
    assert set(np.unique(W)) <= {0.0, 1.0}


def test_U_for_mixed_vector():
    u = build_U(ContinuityVector((0, 2, 1)))
    U2 = u["U2"].to_float()
    assert np.array_equal(U2[:3, :3], np.eye(3))
    assert U2[5, 3] == 1 and U2.sum() == 4


# ------------------------------------------------------------ B_T, B_Q
def test_entropy_boundary_matrices():
    m = load_builtin("entropy")
    assert build_BT(m) == M([[2, "1/2"], [2, "3/2"]])
    assert build_BQ(m) == M([["(1-s)*s/4"], ["(1-s)*(-1)"]])
    info = check_admissible(m)
    assert info["admissible"] and info["det"] == 2


def _dirichlet(n):
    cv = ContinuityVector(n)
    B = PolyMat.hstack([PolyMat.eye(cv.n_S), PolyMat.zeros(cv.n_S, cv.n_S)])
    return GpdeModel.build(cv, B=B)


@pytest.mark.parametrize("n", [(0, 1), (1, 0, 2), (0, 2, 1), (2, 1, 1, 1)])
def test_dirichlet_type_conditions(n):
    m = _dirichlet(n)
    assert build_BT(m) == PolyMat.eye(m.n.n_S)
    tq = build_T_Q(m.n)
    b = m.n.b
    Qr = tq["Q"].compose_affine(-1, 0, b)  # Q(b - s)
    want = -(rat_inv(build_BT(m)) @ m.B @ PolyMat.vstack([PolyMat.zeros(m.n.n_S, m.n.n_xhat), Qr]))
    assert build_BQ(m) == want


def test_singular_boundary_conditions_rejected():
    m = GpdeModel.build((0, 0, 1), B=[[1, 0, 0, 0], [1, 0, 0, 0]], A0=[[0, 0, 1]])
    assert not check_admissible(m)["admissible"]
    with pytest.raises(InadmissibleError):
        build_Tmaps(m)


def test_wrong_number_of_conditions_rejected():
    m = GpdeModel.build((0, 0, 1), B=[[1, 0, 0, 0]], A0=[[0, 0, 1]])
    with pytest.raises(InadmissibleError):
        convert_gpde(m)


def test_invalid_model_rejected():
    m = load_builtin("heat").replace(A0=[[0, 1]])
    with pytest.raises(ModelError):
        convert_gpde(m)


def test_poor_conditioning_warns():
    # B_T = [[1, 0], [1, eps]]
    m = GpdeModel.build((0, 0, 1), B=[[1, 0, 0, 0], [1, "1/10000000000000", 0, 0]], A0=[[0, 0, 1]])
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        b = build_Tmaps(m)
    assert b.det != 0
    assert any("poorly conditioned" in str(x.message) for x in w)


# ------------------------------------------------------------ state maps
def test_heat_state_map_kernels():
    pie = convert_gpde(load_builtin("heat"))
    assert pie.ops["T"].R1 == M([["-th"]])
    assert pie.ops["T"].R2 == M([["-s"]])
    assert pie.ops["T"].R0.is_zero
    assert pie.ops["A"].R0 == M([[1]])


@pytest.mark.parametrize("name", ["heat", "entropy", "datko", "timoshenko", "chemical_reactor",
                                  "reaction_diffusion", "wave_sturm_liouville"])
def test_bundle_invariants_on_examples(name):
    m = load_builtin(name)
    b = build_Tmaps(m)
    assert b.B_T @ b.B_T_inv == PolyMat.eye(b.B_T.rows)
    n0 = m.n.n[0]
    assert b.G1 - b.G2 == PolyMat.vstack([PolyMat.zeros(n0, m.n.n_xhat), b.Q1.compose_affine(1, -1, 0)])
    assert b.G0 == PolyMat.block_diag([PolyMat.eye(n0), PolyMat.zeros(m.n.n_xhat - n0, m.n.n_xhat - n0)])


@settings(max_examples=25)
@given(st.integers(0, 10**6))
def test_round_trip_on_random_models(seed):
    rng = random.Random(seed)
    m = random_model(rng)
    b = build_Tmaps(m)
    xi = random_column(rng, m.n.n_xhat, 3)
    v = [rng.randint(-3, 3) for _ in range(m.dims["v"])]
    xh = apply_exact(b.That, (None, xi))[1] + apply_exact(b.Tv, (v, None))[1]
    assert fundamental_of(m.n, xh) == xi
    assert np.max(np.abs(bc_residual(m, xh, v)), initial=0) <= 1e-10


def test_timoshenko_kernel_identity():
    # the cubic part of G1 - G2 for the twice-differentiable group is (s - th)^3 / 6
    b = build_Tmaps(load_builtin("timoshenko"))
    diff = b.G1 - b.G2
    assert diff[0, 0] == diff[0, 0].const(0)
    assert any(diff[i, j] == PolyMat([["(s - th)^3/6"]])[0, 0] for i in range(diff.rows) for j in range(diff.cols))


def test_reconstruct_zero_and_random():
    pie = convert_gpde(load_builtin("datko"))
    d = pie.dims
    x, xh = reconstruct(pie, ([0] * d["x"], PolyMat.zeros(d["xhat"], 1)), [0] * d["w"], [0] * d["u"])
    assert x.is_zero and xh.is_zero
    rng = random.Random(3)
    xi = random_column(rng, d["xhat"], 3)
    x, xh = reconstruct(pie, ([1], xi), [0] * d["w"], [0] * d["u"])
    assert fundamental_of(pie.model.n, xh) == xi


# ------------------------------------------------------------ full PIE
@pytest.mark.parametrize("name", ["entropy", "datko", "chemical_reactor", "reaction_diffusion"])
def test_concatenated_assembly_matches_direct_parameters(name):
    m = load_builtin(name)
    pie = convert_gpde(m)
    direct = direct_assembly(m, pie.bundle, pie.subsystem)
    assert pie.ops["T"] == direct["T"]
    assert pie.ops["A"] == direct["A"]


def test_decoupled_model_is_block_diagonal():
    heat = load_builtin("heat")
    m = GpdeModel.build(heat.n, B=heat.B, A0=heat.A0, A=[[-2]], B_xw=[[1]], C_z=[[3]], D_zw=[[5]], D_zu=[[7]],
                        B_xu=[[1]])
    pie = convert_gpde(m)
    A = pie.ops["A"]
    assert A.P == M([[-2]]) and A.Q1.is_zero and A.Q2.is_zero
    assert A.R0 == convert_subsystem(m)["Ahat"].R0
    assert pie.ops["D11"].P == M([[5]]) and pie.ops["D12"].P == M([[7]])
    assert pie.ops["T"].Q2.is_zero


def test_pie_operator_dimensions_follow_signal_flow():
    pie = convert_gpde(load_builtin("datko"))
    d = pie.dims
    state = (d["x"], d["xhat"])
    for key, (rows, cols) in {"T": ("s", "s"), "A": ("s", "s"), "Tw": ("s", "w"), "Tu": ("s", "u"),
                              "B1": ("s", "w"), "B2": ("s", "u"), "C1": ("z", "s"), "C2": ("y", "s"),
                              "D11": ("z", "w"), "D12": ("z", "u"), "D21": ("y", "w"), "D22": ("y", "u")}.items():
        m, n, p, q = pie.ops[key].dims
        out = state if rows == "s" else (d[rows], 0)
        inp = state if cols == "s" else (d[cols], 0)
        assert (m, p) == out and (n, q) == inp, key


def test_deviation_report_entries():
    rep = {e["object"]: e for e in deviation_report(convert_gpde(load_builtin("chemical_reactor")))}
    assert rep["T.R1"]["status"] == "deviation"
    assert rep["A.R0"]["status"] == "match"
    rep_e = {e["object"]: e["status"] for e in deviation_report(convert_gpde(load_builtin("entropy")))}
    assert rep_e["B_T"] == "match" and rep_e["B_Q"] == "match" and rep_e["G2"] == "deviation"


def test_pie_json_round_trip():
    pie = convert_gpde(load_builtin("timoshenko"))
    from pieforge.converter import PieSystem

    back = PieSystem.from_json(pie.to_json())
    assert all(back.ops[k] == pie.ops[k] for k in pie.ops)
    assert back.continuity == (2, 0, 1, 0, 1)
    assert layout(ContinuityVector(back.continuity)).n.n_S == pie.model.n.n_S
