"""Conversion of a coupled ODE-PDE model into an equivalent PIE system.

The PDE state ``xh`` is replaced by its fundamental state ``xf = D xh`` (the
highest spatial derivative of every state).  The boundary conditions are
folded into the map ``xh = That xf + Tv v``; afterwards the whole model is
expressed with bounded PI operators:

    T xf' = A xf + B1 w + B2 u - Tw w' - Tu u'
    z     = C1 xf + D11 w + D12 u
    y     = C2 xf + D21 w + D22 u

All arithmetic is exact.  The only inverse taken is of the constant matrix
``B_T``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .gpde import GpdeModel, layout, validate
from .piops import (PiOp3, PiOp4, apply_exact, block4, compose4, hconcat4,
                    matrix_op, vconcat4)
from .polyalg import PolyMat, Polynomial, contract, rat_det, rat_inv

__all__ = [
    "InadmissibleError",
    "ModelError",
    "TMapBundle",
    "PieSystem",
    "build_T_Q",
    "build_U",
    "build_BT",
    "check_admissible",
    "build_BQ",
    "build_Tmaps",
    "convert_subsystem",
    "convert_gpde",
    "reconstruct",
    "fundamental_of",
    "deviation_report",
    "PIE_OPERATORS",
]

PIE_OPERATORS = ("T", "Tw", "Tu", "A", "B1", "B2", "C1", "C2", "D11", "D12", "D21", "D22")
COND_WARN = 1e12


class ModelError(ValueError):
    """The model is dimensionally inconsistent."""


class InadmissibleError(ValueError):
    """``B_T`` is singular or not square."""


# ------------------------------------------------------------ state maps
def _tau(k: int) -> Polynomial:
    return Polynomial.tau(k)


def build_T_Q(n) -> dict:
    """Taylor-expansion matrices ``T(s)`` and ``Q(s)`` for continuity vector ``n``.

    ``C xh(s) = T(s - a) C xh(a) + int_a^s Q(s - th) xf(th) dth``.  ``T1`` and
    ``Q1`` are the first block rows, which reproduce the differentiable states.
    """
    N = n.N
    nS = n.n_S
    T = np.empty((nS, nS), dtype=object)
    Q = np.empty((nS, n.n_xhat), dtype=object)
    for idx in np.ndindex(T.shape):
        T[idx] = Polynomial()
    for idx in np.ndindex(Q.shape):
        Q[idx] = Polynomial()
    lay = layout(n)
    # every row of C xh: state in group k, derivative order i-1 (block i)
    for r, er in enumerate(lay.C):
        i = er.order + 1
        for c, ec in enumerate(lay.C):
            j = ec.order + 1
            # same state, higher block: Taylor coefficient of order j - i
            if ec.state == er.state and j >= i:
                T[r, c] = _tau(j - i)
        k = er.group
        Q[r, er.state] = _tau(k - i)
    T, Q = PolyMat(T), PolyMat(Q)
    n1 = n.n_S_i(1) if N >= 1 else 0
    return {"T": T, "Q": Q, "T1": T[0:n1, :], "Q1": Q[0:n1, :]}


def build_U(n) -> dict:
    """Selection matrices with ``F xh = U1 xf + U2 C xh``."""
    lay = layout(n)
    U1 = [[0] * n.n_xhat for _ in lay.F]
    U2 = [[0] * n.n_S for _ in lay.F]
    c_index = {(e.state, e.order): e.offset for e in lay.C}
    for e in lay.F:
        if e.order == e.group:
            U1[e.offset][e.state] = 1
        else:
            U2[e.offset][c_index[(e.state, e.order)]] = 1
    return {"U1": PolyMat.from_rationals(U1) if lay.F else PolyMat.zeros(0, n.n_xhat),
            "U2": PolyMat.from_rationals(U2) if lay.F and n.n_S else PolyMat.zeros(len(lay.F), n.n_S)}


def _require_valid(model: GpdeModel):
    errs = [d for d in validate(model) if d.level == "error"]
    if errs:
        raise ModelError("; ".join(str(d) for d in errs))
    if model.n_bc != model.n.n_S:
        raise InadmissibleError(
            f"n_BC ({model.n_bc}) != n_S ({model.n.n_S}); B_T would not be square")


def build_BT(model: GpdeModel, tq=None, u=None) -> PolyMat:
    """``B_T = B [T(0); T(b - a)] - int_a^b B_I(s) U2 T(s - a) ds`` (exact)."""
    _require_valid(model)
    n = model.n
    a, b = n.a, n.b
    tq = tq or build_T_Q(n)
    u = u or build_U(n)
    T = tq["T"]
    stacked = PolyMat.vstack([T.subs("s", 0), T.subs("s", b - a)])
    integrand = model.B_I @ u["U2"] @ T.shift("s", -a)
    return model.B @ stacked - integrand.integrate("s", a, b)


def check_admissible(model: GpdeModel) -> dict:
    """Exact determinant of ``B_T`` plus a floating-point condition number."""
    BT = build_BT(model)
    det = rat_det(BT)
    cond = float(np.linalg.cond(BT.to_float())) if BT.rows else 1.0
    return {"admissible": det != 0, "det": det, "cond": cond, "B_T": BT}


def build_BQ(model: GpdeModel, tq=None, u=None, BT_inv=None) -> PolyMat:
    """``B_Q(s)``, giving ``C xh(a) = int B_Q xf + B_T^{-1} B_v v``."""
    n = model.n
    a, b = n.a, n.b
    tq = tq or build_T_Q(n)
    u = u or build_U(n)
    if BT_inv is None:
        BT_inv = _invert(build_BT(model, tq, u))
    Q = tq["Q"]
    nS = n.n_S
    # int_s^b B_I(th) U2 Q(th - s) dth, computed with the free variable in th
    BI_t = model.B_I.swap_vars()
    kern = (u["U2"] @ Q).compose_affine(1, -1, 0)
    tail = contract(BI_t, kern, "th", b).swap_vars()
    edge = PolyMat.vstack([PolyMat.zeros(nS, n.n_xhat), Q.compose_affine(-1, 0, b)])
    return BT_inv @ (model.B_I @ u["U1"] + tail - model.B @ edge)


def _invert(BT: PolyMat) -> PolyMat:
    try:
        return rat_inv(BT)
    except ZeroDivisionError as exc:
        raise InadmissibleError("B_T is singular; the boundary conditions are not admissible") from exc


@dataclass(frozen=True, eq=False)
class TMapBundle:
    """Every intermediate object of the boundary elimination step."""

    T: PolyMat
    T1: PolyMat
    Q: PolyMat
    Q1: PolyMat
    U1: PolyMat
    U2: PolyMat
    B_T: PolyMat
    B_T_inv: PolyMat
    det: Fraction
    cond: float
    B_Q: PolyMat
    G0: PolyMat
    G1: PolyMat
    G2: PolyMat
    Gv: PolyMat
    That: PiOp4
    Tv: PiOp4

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("T", "T1", "Q", "Q1", "U1", "U2", "B_T",
                                               "B_T_inv", "B_Q", "G0", "G1", "G2", "Gv", "That", "Tv")}


def build_Tmaps(model: GpdeModel) -> TMapBundle:
    """Assemble ``That`` and ``Tv`` with ``xh = That xf + Tv v``."""
    _require_valid(model)
    n = model.n
    a, b = n.a, n.b
    tq = build_T_Q(n)
    u = build_U(n)
    BT = build_BT(model, tq, u)
    det = rat_det(BT)
    if det == 0:
        raise InadmissibleError("B_T is singular; the boundary conditions are not admissible")
    cond = float(np.linalg.cond(BT.to_float())) if BT.rows else 1.0
    if cond > COND_WARN:
        warnings.warn(f"B_T is poorly conditioned (cond = {cond:.3g})", RuntimeWarning, stacklevel=2)
    BT_inv = _invert(BT)
    BQ = build_BQ(model, tq, u, BT_inv)

    nx, n0, nv = n.n_xhat, n.n[0], model.dims["v"]
    T1a = tq["T1"].shift("s", -a)
    G0 = PolyMat.block_diag([PolyMat.eye(n0), PolyMat.zeros(nx - n0, nx - n0)])
    G2 = PolyMat.vstack([PolyMat.zeros(n0, nx), T1a @ BQ.swap_vars()])
    G1 = PolyMat.vstack([PolyMat.zeros(n0, nx), tq["Q1"].compose_affine(1, -1, 0)]) + G2
    Gv = PolyMat.vstack([PolyMat.zeros(n0, nv), T1a @ BT_inv @ model.B_v])
    dom = (a, b)
    That = PiOp4.from_params(R0=G0, R1=G1, R2=G2, dims=(0, 0, nx, nx), dom=dom)
    Tv = PiOp4.from_params(Q2=Gv, dims=(0, nv, nx, 0), dom=dom)
    return TMapBundle(tq["T"], tq["T1"], tq["Q"], tq["Q1"], u["U1"], u["U2"], BT, BT_inv,
                      det, cond, BQ, G0, G1, G2, Gv, That, Tv)


# ------------------------------------------------------------ subsystem
def convert_subsystem(model: GpdeModel, bundle: TMapBundle = None) -> dict:
    """PI operators of the PDE subsystem in terms of ``xf`` and ``v``.

    Returns ``Ahat`` (``xf -> xh'``), ``Bv_op`` (``v -> xh'``), ``Cr_op``
    (``xf -> r``), ``Drv_op`` (``v -> r``) together with the intermediate
    operators ``Upsilon`` and ``Xi`` whose composition yields them.
    """
    bundle = bundle or build_Tmaps(model)
    n = model.n
    a, b = n.a, n.b
    nx, nv, nr, nS = n.n_xhat, model.dims["v"], model.dims["r"], n.n_S
    tq_T, tq_Q = bundle.T, bundle.Q
    U1, U2, BQ, BTi = bundle.U1, bundle.U2, bundle.B_Q, bundle.B_T_inv
    Ta = tq_T.shift("s", -a)
    Tba = tq_T.subs("s", b - a)
    RD2 = U2 @ Ta @ BQ.swap_vars()
    RD1 = RD2 + U2 @ tq_Q.compose_affine(1, -1, 0)
    BTiBv = BTi @ model.B_v
    dom = (a, b)

    # (v, xf) -> ([v; B xh], F xh)
    Ups = PiOp4.from_params(
        P=PolyMat.vstack([PolyMat.eye(nv), BTiBv, Tba @ BTiBv]),
        Q1=PolyMat.vstack([PolyMat.zeros(nv, nx), BQ, Tba @ BQ + tq_Q.compose_affine(-1, 0, b)]),
        Q2=U2 @ Ta @ BTiBv,
        R0=U1, R1=RD1, R2=RD2,
        dims=(nv + 2 * nS, nv, n.width_F, nx), dom=dom)
    # ([v; B xh], F xh) -> (r, xh')
    Xi = PiOp4.from_params(
        P=PolyMat.hstack([PolyMat.zeros(nr, nv), model.D_rb]),
        Q1=model.C_r,
        Q2=PolyMat.hstack([model.B_xv, model.B_xb]),
        R0=model.A0, R1=model.A1, R2=model.A2,
        dims=(nr, nv + 2 * nS, nx, n.width_F), dom=dom)
    sub = compose4(Xi, Ups)
    fin_all, dist_all = slice(0, nr), slice(0, nx)
    none = slice(0, 0)
    Drv = sub.block(rows=(fin_all, none), cols=(slice(0, nv), none))
    Cr = sub.block(rows=(fin_all, none), cols=(none, dist_all))
    Bv = sub.block(rows=(none, dist_all), cols=(slice(0, nv), none))
    Ahat = sub.block(rows=(none, dist_all), cols=(none, dist_all))
    return {"Ahat": Ahat, "Bv_op": Bv, "Cr_op": Cr, "Drv_op": Drv,
            "Upsilon": Ups, "Xi": Xi, "RD1": RD1, "RD2": RD2, "combined": sub}


# ------------------------------------------------------------ full system
@dataclass(frozen=True, eq=False)
class PieSystem:
    """The twelve PI operators of a PIE together with the data that produced them."""

    ops: dict
    dims: dict
    bundle: TMapBundle = None
    subsystem: dict = field(default_factory=dict)
    model: GpdeModel = None
    continuity: tuple = None

    def __getattr__(self, key):
        ops = self.__dict__.get("ops")
        if ops is not None and key in ops:
            return ops[key]
        raise AttributeError(key)

    @property
    def dom(self):
        return self.ops["T"].dom

    def to_json(self, extra=None) -> dict:
        out = {"format": "pieforge-pie/1", "dims": dict(self.dims),
               "operators": {k: self.ops[k].to_json() for k in PIE_OPERATORS}}
        if self.bundle is not None:
            out["B_T"] = self.bundle.B_T.to_strings()
            out["det_B_T"] = str(self.bundle.det)
            out["cond_B_T"] = self.bundle.cond
            out["state_map"] = {"That": self.bundle.That.to_json(), "Tv": self.bundle.Tv.to_json()}
        if self.model is not None:
            out["continuity"] = list(self.model.n.n)
            out["name"] = self.model.name
        if extra:
            out.update(extra)
        return out

    @classmethod
    def from_json(cls, data) -> "PieSystem":
        ops = {k: PiOp4.from_json(data["operators"][k]) for k in PIE_OPERATORS}
        cont = tuple(data["continuity"]) if "continuity" in data else None
        return cls(ops, dict(data.get("dims", {})), continuity=cont)


def convert_gpde(model: GpdeModel) -> PieSystem:
    """Convert ``model`` into its PIE representation."""
    bundle = build_Tmaps(model)
    sub = convert_subsystem(model, bundle)
    d = model.dims
    n = model.n
    nx, nxh = d["x"], n.n_xhat
    dom = (n.a, n.b)
    M = lambda key: matrix_op(model.params[key], dom)  # noqa: E731
    Ahat, Bv, Cr, Drv = sub["Ahat"], sub["Bv_op"], sub["Cr_op"], sub["Drv_op"]
    Tv = bundle.Tv
    That = bundle.That

    ops = {}
    ops["T"] = block4([[matrix_op(PolyMat.eye(nx), dom), PiOp4.from_params(dims=(nx, 0, 0, nxh), dom=dom)],
                       [Tv @ M("C_v"), That]])
    ops["Tw"] = vconcat4(PiOp4.from_params(dims=(nx, d["w"], 0, 0), dom=dom), Tv @ M("D_vw"))
    ops["Tu"] = vconcat4(PiOp4.from_params(dims=(nx, d["u"], 0, 0), dom=dom), Tv @ M("D_vu"))
    ops["A"] = block4([[M("A") + M("B_xr") @ Drv @ M("C_v"), M("B_xr") @ Cr],
                       [Bv @ M("C_v"), Ahat]])
    ops["B1"] = vconcat4(M("B_xw") + M("B_xr") @ Drv @ M("D_vw"), Bv @ M("D_vw"))
    ops["B2"] = vconcat4(M("B_xu") + M("B_xr") @ Drv @ M("D_vu"), Bv @ M("D_vu"))
    ops["C1"] = hconcat4(M("C_z") + M("D_zr") @ Drv @ M("C_v"), M("D_zr") @ Cr)
    ops["C2"] = hconcat4(M("C_y") + M("D_yr") @ Drv @ M("C_v"), M("D_yr") @ Cr)
    ops["D11"] = M("D_zw") + M("D_zr") @ Drv @ M("D_vw")
    ops["D12"] = M("D_zu") + M("D_zr") @ Drv @ M("D_vu")
    ops["D21"] = M("D_yw") + M("D_yr") @ Drv @ M("D_vw")
    ops["D22"] = M("D_yu") + M("D_yr") @ Drv @ M("D_vu")
    dims = {"x": nx, "xhat": nxh, "w": d["w"], "u": d["u"], "z": d["z"], "y": d["y"]}
    return PieSystem(ops, dims, bundle, sub, model, tuple(n.n))


def direct_assembly(model: GpdeModel, bundle: TMapBundle, sub: dict) -> dict:
    """The state operators ``T`` and ``A`` built parameter by parameter.

    Serves as an independent check on the concatenation-based assembly in
    :func:`convert_gpde`.
    """
    p = model.params
    Ahat, Bv, Cr, Drv = sub["Ahat"], sub["Bv_op"], sub["Cr_op"], sub["Drv_op"]
    dom = (model.n.a, model.n.b)
    nx = model.dims["x"]
    T = PiOp4(PolyMat.eye(nx), PolyMat.zeros(nx, model.n.n_xhat), bundle.Gv @ p["C_v"],
              PiOp3(bundle.G0, bundle.G1, bundle.G2), dom)
    A = PiOp4(p["A"] + p["B_xr"] @ Drv.P @ p["C_v"], p["B_xr"] @ Cr.Q1, Bv.Q2 @ p["C_v"],
              Ahat.R, dom)
    return {"T": T, "A": A}


# ------------------------------------------------------------ state maps
def reconstruct(pie: PieSystem, state, w=None, u=None):
    """Primal state ``(x, xh)`` from the PIE state ``(x, xf)`` and the inputs.

    ``state = (x, xf)`` with ``x`` a vector and ``xf`` a column of polynomials;
    ``w`` and ``u`` are vectors of input values.  The result is exact.
    """
    x, xf = state
    d = pie.dims
    out_f, out_d = apply_exact(pie.ops["T"], (x, xf))
    for key, sig, size in (("Tw", w, d["w"]), ("Tu", u, d["u"])):
        if size:
            vals = [0] * size if sig is None else list(sig)
            f2, d2 = apply_exact(pie.ops[key], (vals, None))
            out_f, out_d = out_f + f2, out_d + d2
    return out_f, out_d


def fundamental_of(n, xh: PolyMat) -> PolyMat:
    """``D xh``: differentiate each state as often as its continuity class."""
    rows = []
    for k, count in enumerate(n.n):
        off = n.group_offset(k)
        rows.extend([xh[off + j, 0].diff("s", k)] for j in range(count))
    return PolyMat(rows) if rows else PolyMat.zeros(0, 1)


# ------------------------------------------------------------ deviation report
def _objects(pie: PieSystem) -> dict:
    objs = {}
    b = pie.bundle
    if b is not None:
        for name, v in b.as_dict().items():
            if isinstance(v, PiOp4):
                objs.update({f"{name}.{k}": p for k, p in v.params().items()})
            else:
                objs[name] = v
    for name, op in pie.ops.items():
        for k, v in op.params().items():
            objs[f"{name}.{k}"] = v
    for name in ("Ahat", "Bv_op", "Cr_op", "Drv_op"):
        if name in pie.subsystem:
            for k, v in pie.subsystem[name].params().items():
                objs[f"{name}.{k}"] = v
    return objs


def deviation_report(pie: PieSystem, reference: dict = None) -> list:
    """Compare computed objects with printed reference values.

    ``reference`` maps object names such as ``"B_T"``, ``"G2"`` or ``"T.R1"``
    to matrices (nested lists of numbers or polynomial strings).  Each entry
    of the result records both values and whether they agree exactly.
    """
    reference = reference if reference is not None else (pie.model.reference if pie.model else {})
    objs = _objects(pie)
    out = []
    for key, printed in reference.items():
        if key.startswith("_"):
            continue
        entry = {"object": key}
        if key not in objs:
            entry.update(status="unknown-object", printed=printed)
            out.append(entry)
            continue
        computed = objs[key]
        try:
            ref = PolyMat.from_json(printed)
        except Exception as exc:  # malformed reference text
            entry.update(status="unparsed", printed=printed, computed=computed.to_strings(), error=str(exc))
            out.append(entry)
            continue
        entry["printed"] = ref.to_strings()
        entry["computed"] = computed.to_strings()
        if ref.shape != computed.shape:
            entry["status"] = "shape-mismatch"
            entry["printed_shape"], entry["computed_shape"] = list(ref.shape), list(computed.shape)
        elif ref == computed:
            entry["status"] = "match"
        else:
            entry["status"] = "deviation"
            diff = computed - ref
            entry["difference"] = diff.to_strings()
            entry["mismatched_entries"] = [
                [i, j] for (i, j), p in np.ndenumerate(diff.entries) if not p.is_zero
            ]
        out.append(entry)
    return out
