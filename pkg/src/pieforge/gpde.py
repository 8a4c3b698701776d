"""Parameters of coupled ODE-PDE models and their dimension bookkeeping.

The distributed state ``xh`` is partitioned by the continuity vector
``n = (n_0, ..., n_N)``: the ``n_i`` states of group ``i`` are ``i`` times
differentiable in space.  Three derived vectors are used throughout:

``F xh``
    every well-defined term, block ``i = 0..N`` holds ``d^i/ds^i`` of the
    states in groups ``k >= i``; width ``n_xh + n_S``.
``C xh``
    every absolutely continuous term, block ``i = 1..N`` holds
    ``d^(i-1)/ds^(i-1)`` of the states in groups ``k >= i``; width ``n_S``.
``B xh``
    ``[C xh(a); C xh(b)]``; width ``2 n_S``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .polyalg import PolyMat, to_fraction

__all__ = [
    "ContinuityVector",
    "LayoutEntry",
    "Layout",
    "layout",
    "Diagnostic",
    "GpdeModel",
    "ODE_FIELDS",
    "BC_FIELDS",
    "PDE_FIELDS",
    "FIELD_DIMS",
    "validate",
]


@dataclass(frozen=True)
class ContinuityVector:
    """Continuity vector ``n`` together with the spatial domain ``[a, b]``."""

    n: tuple
    a: Fraction = Fraction(0)
    b: Fraction = Fraction(1)

    def __post_init__(self):
        n = tuple(int(k) for k in self.n)
        if not n:
            raise ValueError("continuity vector must have at least one entry")
        if any(k < 0 for k in n):
            raise ValueError(f"negative entry in continuity vector {n}")
        a, b = to_fraction(self.a), to_fraction(self.b)
        if not a < b:
            raise ValueError(f"domain [{a}, {b}] is empty")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def N(self) -> int:
        return len(self.n) - 1

    @property
    def n_xhat(self) -> int:
        return sum(self.n)

    def n_S_i(self, i: int) -> int:
        return sum(self.n[i:])

    @property
    def n_S(self) -> int:
        return sum(self.n_S_i(i) for i in range(1, self.N + 1))

    @property
    def width_F(self) -> int:
        return self.n_xhat + self.n_S

    @property
    def width_B(self) -> int:
        return 2 * self.n_S

    def group_offset(self, k: int) -> int:
        """Position of the first state of group ``k`` inside ``xh``."""
        return sum(self.n[:k])


@dataclass(frozen=True)
class LayoutEntry:
    """One row of ``F xh``, ``C xh`` or ``B xh``.

    ``state`` indexes ``xh``, ``group`` is its continuity class, ``order`` the
    spatial derivative taken and ``side`` is ``"a"``/``"b"`` for boundary rows.
    """

    offset: int
    state: int
    group: int
    order: int
    side: str = ""


@dataclass(frozen=True)
class Layout:
    n: ContinuityVector
    F: tuple
    C: tuple
    B: tuple

    def F_block(self, i: int) -> slice:
        start = sum(self.n.n_S_i(j) for j in range(i))
        return slice(start, start + self.n.n_S_i(i))

    def C_block(self, i: int) -> slice:
        start = sum(self.n.n_S_i(j) for j in range(1, i))
        return slice(start, start + self.n.n_S_i(i))

    def labels(self, which: str = "F", names=None) -> list:
        names = names or [f"x{k + 1}" for k in range(self.n.n_xhat)]
        out = []
        for e in getattr(self, which):
            base = names[e.state]
            lab = base if e.order == 0 else f"d{e.order}({base})"
            if e.side:
                lab += f"({e.side})"
            out.append(lab)
        return out


def layout(n: ContinuityVector) -> Layout:
    """Row-by-row description of ``F xh``, ``C xh`` and ``B xh``."""
    F, C = [], []
    for i in range(n.N + 1):
        for k in range(i, n.N + 1):
            for j in range(n.n[k]):
                F.append(LayoutEntry(len(F), n.group_offset(k) + j, k, i))
    for i in range(1, n.N + 1):
        for k in range(i, n.N + 1):
            for j in range(n.n[k]):
                C.append(LayoutEntry(len(C), n.group_offset(k) + j, k, i - 1))
    B = []
    for side in ("a", "b"):
        for e in C:
            B.append(LayoutEntry(len(B), e.state, e.group, e.order, side))
    return Layout(n, tuple(F), tuple(C), tuple(B))


# ----------------------------------------------------------- parameter table
ODE_FIELDS = ("A", "B_xw", "B_xu", "B_xr", "C_z", "D_zw", "D_zu", "D_zr",
              "C_y", "D_yw", "D_yu", "D_yr", "C_v", "D_vw", "D_vu")
BC_FIELDS = ("B", "B_I", "B_v")
PDE_FIELDS = ("A0", "A1", "A2", "B_xv", "B_xb", "C_r", "D_rb")

# (row dim, column dim) of every field; "F"/"Bw" are layout widths, "xh" the
# distributed state count, "bc" the number of boundary conditions
FIELD_DIMS = {
    "A": ("x", "x"), "B_xw": ("x", "w"), "B_xu": ("x", "u"), "B_xr": ("x", "r"),
    "C_z": ("z", "x"), "D_zw": ("z", "w"), "D_zu": ("z", "u"), "D_zr": ("z", "r"),
    "C_y": ("y", "x"), "D_yw": ("y", "w"), "D_yu": ("y", "u"), "D_yr": ("y", "r"),
    "C_v": ("v", "x"), "D_vw": ("v", "w"), "D_vu": ("v", "u"),
    "B": ("bc", "Bw"), "B_I": ("bc", "F"), "B_v": ("bc", "v"),
    "A0": ("xh", "F"), "A1": ("xh", "F"), "A2": ("xh", "F"),
    "B_xv": ("xh", "v"), "B_xb": ("xh", "Bw"), "C_r": ("r", "F"), "D_rb": ("r", "Bw"),
}
SIGNALS = ("x", "w", "u", "z", "y", "v", "r")
CONSTANT_FIELDS = set(ODE_FIELDS) | {"B", "B_v", "D_rb"}
BIVARIATE_FIELDS = {"A1", "A2"}


@dataclass(frozen=True)
class Diagnostic:
    level: str  # "error" or "warning"
    field: str
    message: str

    def __str__(self):
        return f"{self.level}: {self.field}: {self.message}"


@dataclass(frozen=True, eq=False)
class GpdeModel:
    """An ODE subsystem coupled to a PDE subsystem through ``v`` and ``r``.

    ``params`` maps every field name of :data:`FIELD_DIMS` to a
    :class:`PolyMat`; ``dims`` maps signal names to sizes.  Use
    :meth:`build` to construct a model with zero defaults.
    """

    n: ContinuityVector
    params: dict
    dims: dict
    name: str = ""
    reference: dict = field(default_factory=dict)

    @classmethod
    def build(cls, n, domain=(0, 1), name="", reference=None, dims=None, **fields):
        """Create a model; omitted fields become zero matrices.

        Signal sizes are inferred from the supplied matrices unless given in
        ``dims``.  Mismatched shapes are kept as supplied and reported by
        :func:`validate` rather than corrected.
        """
        unknown = set(fields) - set(FIELD_DIMS)
        if unknown:
            raise KeyError(f"unknown model fields: {sorted(unknown)}")
        cv = n if isinstance(n, ContinuityVector) else ContinuityVector(tuple(n), *domain)
        mats = {k: PolyMat.coerce(v) for k, v in fields.items() if v is not None}
        sizes = dict(dims or {})
        fixed = {"xh": cv.n_xhat, "F": cv.width_F, "Bw": cv.width_B}
        for key in sorted(mats, key=lambda k: list(FIELD_DIMS).index(k)):
            for dim_name, size in zip(FIELD_DIMS[key], mats[key].shape):
                if dim_name in fixed:
                    continue
                sizes.setdefault(dim_name, size)
        for sig in SIGNALS:
            sizes.setdefault(sig, 0)
        sizes.setdefault("bc", cv.n_S)
        full = dict(sizes, **fixed)
        for key, (r, c) in FIELD_DIMS.items():
            if key not in mats:
                mats[key] = PolyMat.zeros(full[r], full[c])
        return cls(cv, mats, sizes, name, dict(reference or {}))

    def __getattr__(self, key):
        params = self.__dict__.get("params")
        if params is not None and key in params:
            return params[key]
        raise AttributeError(key)

    def replace(self, **fields) -> "GpdeModel":
        mats = dict(self.params)
        mats.update({k: PolyMat.coerce(v) for k, v in fields.items()})
        return GpdeModel(self.n, mats, dict(self.dims), self.name, self.reference)

    @property
    def layout(self) -> Layout:
        return layout(self.n)

    @property
    def n_bc(self) -> int:
        return self.params["B"].rows

    def expected_shape(self, key):
        r, c = FIELD_DIMS[key]
        full = dict(self.dims, xh=self.n.n_xhat, F=self.n.width_F, Bw=self.n.width_B)
        return (full[r], full[c])


def validate(model: GpdeModel) -> list:
    """Return a list of :class:`Diagnostic`; empty means the model is consistent."""
    out = []
    n_bc = model.params["B"].rows
    for key in FIELD_DIMS:
        mat = model.params[key]
        exp = model.expected_shape(key)
        if key in BC_FIELDS:
            exp = (n_bc, exp[1])
        if mat.shape != exp:
            out.append(Diagnostic("error", key, f"shape {mat.shape} does not match expected {exp}"))
            continue
        if key in CONSTANT_FIELDS and not mat.is_constant():
            out.append(Diagnostic("error", key, "must be a constant matrix"))
        elif key not in BIVARIATE_FIELDS and mat.depends_on("th"):
            out.append(Diagnostic("error", key, "may depend on s only"))
    if n_bc != model.n.n_S:
        out.append(Diagnostic("warning", "B", f"n_BC ({n_bc}) != n_S ({model.n.n_S}); "
                                              "admissibility requires as many boundary conditions as n_S"))
    return out
