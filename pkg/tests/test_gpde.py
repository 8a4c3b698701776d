import pytest
from hypothesis import given
from hypothesis import strategies as st

from pieforge.gpde import ContinuityVector, GpdeModel, layout, validate
from pieforge.io import load_builtin
from pieforge.polyalg import PolyMat

cont = st.lists(st.integers(0, 3), min_size=1, max_size=5)


def test_derived_sizes_for_three_group_vector():
    n = ContinuityVector((0, 2, 1))
    assert (n.N, n.n_xhat, n.n_S) == (2, 3, 4)
    assert (n.width_F, n.width_B) == (7, 8)


def test_layout_order_for_three_group_vector():
    lay = layout(ContinuityVector((0, 2, 1)))
    # states 0 and 1 are once differentiable, state 2 twice
    assert [(e.state, e.order) for e in lay.F] == [(0, 0), (1, 0), (2, 0), (0, 1), (1, 1), (2, 1), (2, 2)]
    assert len(lay.B) == 8
    assert lay.labels("B")[:4] == ["x1(a)", "x2(a)", "x3(a)", "d1(x3)(a)"]


def test_single_undifferentiated_state_has_no_boundary_rows():
    n = ContinuityVector((1,))
    lay = layout(n)
    assert n.n_S == 0 and lay.B == () and lay.C == ()
    model = GpdeModel.build(n, A0=[[-1]])
    assert validate(model) == []


@given(cont)
def test_layout_blocks_partition_F(nv):
    n = ContinuityVector(tuple(nv))
    lay = layout(n)
    assert sum(n.n_S_i(i) for i in range(1, n.N + 1)) == n.n_S
    assert n.n_S_i(0) == n.n_xhat
    covered = []
    for i in range(n.N + 1):
        blk = lay.F_block(i)
        covered.extend(range(blk.start, blk.stop))
        assert all(lay.F[k].order == i for k in range(blk.start, blk.stop))
    assert covered == list(range(n.n_xhat + n.n_S))
    assert len(lay.C) == n.n_S and len(lay.B) == 2 * n.n_S
    assert layout(n) == lay


def test_zero_groups_keep_their_place():
    n = ContinuityVector((0, 0, 1))
    assert n.group_offset(2) == 0 and n.n_S_i(1) == 1 and n.n_S_i(2) == 1


@pytest.mark.parametrize("bad", [(), (-1, 2)])
def test_invalid_continuity_vectors(bad):
    with pytest.raises(ValueError):
        ContinuityVector(bad)


def test_empty_domain_rejected():
    with pytest.raises(ValueError):
        ContinuityVector((0, 1), 1, 1)


def test_entropy_model_validates_clean():
    assert validate(load_builtin("entropy")) == []


def test_too_few_boundary_conditions_reported():
    m = load_builtin("entropy")
    short = m.replace(B=m.B[0:1, :], B_I=m.B_I[0:1, :], B_v=PolyMat.zeros(1, 0))
    diags = validate(short)
    assert any(d.field == "B" and "n_BC (1) != n_S (2)" in d.message for d in diags)


def test_wrong_width_names_the_field():
    m = load_builtin("heat")
    bad = m.replace(A0=[[0, 1]])
    errs = [d for d in validate(bad) if d.level == "error"]
    assert [d.field for d in errs] == ["A0"]
    assert "(1, 2)" in errs[0].message and "(1, 3)" in errs[0].message


def test_constant_and_univariate_fields_enforced():
    m = load_builtin("heat")
    errs = validate(m.replace(B=[["s", 0, 0, 0], [0, 0, 0, 1]], A0=[[0, "th", 1]]))
    fields = sorted(d.field for d in errs)
    assert fields == ["A0", "B"]


def test_missing_fields_default_to_zero_matrices():
    m = GpdeModel.build((0, 1), B=[[1, 0]], A0=[[1, 0]])
    assert m.B_I.shape == (1, 2) and m.B_I.is_zero
    assert m.A.shape == (0, 0)
    assert m.dims["bc"] == 1


def test_unknown_field_rejected():
    with pytest.raises(KeyError):
        GpdeModel.build((0, 1), Bogus=[[1]])


def test_signal_sizes_inferred():
    m = load_builtin("reaction_diffusion")
    assert {k: m.dims[k] for k in ("x", "w", "u", "z", "v", "r")} == {"x": 1, "w": 1, "u": 1, "z": 2, "v": 2, "r": 1}
