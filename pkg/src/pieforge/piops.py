"""3-PI and 4-PI operators with exact parametric algebra.

A 4-PI operator with dimensions ``(m, n, p, q)`` maps ``R^n x L2^q[a,b]`` to
``R^m x L2^p[a,b]`` through

    [ P u + int_a^b Q1(s) v(s) ds ]
    [ Q2(s) u + (P_R v)(s)        ]

where the 3-PI part is

    (P_R v)(s) = R0(s) v(s) + int_a^s R1(s,th) v(th) dth + int_s^b R2(s,th) v(th) dth.

Addition, composition, adjoint and block concatenation all act on the
parameters directly and never touch sampled functions.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .polyalg import PolyMat, Polynomial, contract, to_fraction

__all__ = [
    "PiOp3",
    "PiOp4",
    "add4",
    "compose4",
    "adjoint4",
    "hconcat4",
    "vconcat4",
    "apply_exact",
    "identity4",
    "zero4",
    "matrix_op",
    "PiDimensionError",
]


class PiDimensionError(ValueError):
    """Operands of a PI operation have incompatible dimensions or domains."""


def _frac_dom(dom):
    a, b = dom
    a, b = to_fraction(a), to_fraction(b)
    if not a < b:
        raise ValueError(f"empty domain [{a}, {b}]")
    return (a, b)


@dataclass(frozen=True, eq=False)
class PiOp3:
    """Multiplier plus lower and upper Volterra kernels, all ``p x q``."""

    R0: PolyMat
    R1: PolyMat
    R2: PolyMat

    def __post_init__(self):
        shapes = {self.R0.shape, self.R1.shape, self.R2.shape}
        if len(shapes) != 1:
            raise PiDimensionError(f"3-PI kernels disagree in shape: {shapes}")
        if self.R0.depends_on("th"):
            raise ValueError("R0 must not depend on th")

    @property
    def shape(self):
        return self.R0.shape

    def __eq__(self, other):
        return isinstance(other, PiOp3) and self.R0 == other.R0 and self.R1 == other.R1 and self.R2 == other.R2


@dataclass(frozen=True, eq=False)
class PiOp4:
    """4-PI operator ``{P, Q1, Q2, {R0, R1, R2}}`` on the interval ``dom``."""

    P: PolyMat
    Q1: PolyMat
    Q2: PolyMat
    R: PiOp3
    dom: tuple = field(default=(Fraction(0), Fraction(1)))

    def __post_init__(self):
        object.__setattr__(self, "dom", _frac_dom(self.dom))
        m, n = self.P.shape
        p, q = self.R.shape
        if self.Q1.shape != (m, q):
            raise PiDimensionError(f"Q1 has shape {self.Q1.shape}, expected {(m, q)}")
        if self.Q2.shape != (p, n):
            raise PiDimensionError(f"Q2 has shape {self.Q2.shape}, expected {(p, n)}")
        if not self.P.is_constant():
            raise ValueError("P must be a constant matrix")
        if self.Q1.depends_on("th") or self.Q2.depends_on("th"):
            raise ValueError("Q1 and Q2 must be functions of s only")

    # ------------------------------------------------------------ constructors
    @classmethod
    def from_params(cls, P=None, Q1=None, Q2=None, R0=None, R1=None, R2=None, dims=None, dom=(0, 1)):
        """Build an operator, filling missing parameters with zeros.

        ``dims = (m, n, p, q)`` is required whenever it cannot be inferred
        from the supplied parameters.
        """
        given = {k: (PolyMat.coerce(v) if v is not None else None) for k, v in
                 dict(P=P, Q1=Q1, Q2=Q2, R0=R0, R1=R1, R2=R2).items()}
        m = n = p = q = None
        if dims is not None:
            m, n, p, q = dims
        for key, (r, c) in (("P", ("m", "n")), ("Q1", ("m", "q")), ("Q2", ("p", "n")),
                            ("R0", ("p", "q")), ("R1", ("p", "q")), ("R2", ("p", "q"))):
            mat = given[key]
            if mat is None:
                continue
            local = dict(m=m, n=n, p=p, q=q)
            for name, val in ((r, mat.rows), (c, mat.cols)):
                if local[name] is None:
                    local[name] = val
                elif local[name] != val:
                    raise PiDimensionError(f"{key} has shape {mat.shape}, inconsistent with dims")
            m, n, p, q = local["m"], local["n"], local["p"], local["q"]
        m, n, p, q = (0 if d is None else d for d in (m, n, p, q))

        def pick(key, r, c):
            return given[key] if given[key] is not None else PolyMat.zeros(r, c)

        R = PiOp3(pick("R0", p, q), pick("R1", p, q), pick("R2", p, q))
        return cls(pick("P", m, n), pick("Q1", m, q), pick("Q2", p, n), R, dom)

    # -------------------------------------------------------------- properties
    @property
    def R0(self):
        return self.R.R0

    @property
    def R1(self):
        return self.R.R1

    @property
    def R2(self):
        return self.R.R2

    @property
    def dims(self):
        """``(m, n, p, q)``: output finite, input finite, output L2, input L2."""
        return (self.P.rows, self.P.cols, self.R.shape[0], self.R.shape[1])

    @property
    def out_dims(self):
        return (self.P.rows, self.R.shape[0])

    @property
    def in_dims(self):
        return (self.P.cols, self.R.shape[1])

    def params(self):
        return {"P": self.P, "Q1": self.Q1, "Q2": self.Q2, "R0": self.R0, "R1": self.R1, "R2": self.R2}

    @property
    def is_zero(self):
        return all(v.is_zero for v in self.params().values())

    def max_degree(self):
        return max(v.max_degree() for v in self.params().values())

    # --------------------------------------------------------------- algebra
    def map_params(self, fn) -> "PiOp4":
        d = {k: fn(v) for k, v in self.params().items()}
        return PiOp4(d["P"], d["Q1"], d["Q2"], PiOp3(d["R0"], d["R1"], d["R2"]), self.dom)

    def __add__(self, other):
        return add4(self, other)

    def __sub__(self, other):
        return add4(self, -other)

    def __neg__(self):
        return self.map_params(lambda m: -m)

    def __mul__(self, k):
        k = to_fraction(k)
        return self.map_params(lambda m: m * k)

    __rmul__ = __mul__

    def __matmul__(self, other):
        return compose4(self, other)

    @property
    def adj(self):
        return adjoint4(self)

    def __eq__(self, other):
        if not isinstance(other, PiOp4):
            return NotImplemented
        if self.dims != other.dims or self.dom != other.dom:
            return False
        mine, theirs = self.params(), other.params()
        return all(mine[k] == theirs[k] for k in mine)

    __hash__ = None

    def diff_report(self, other) -> dict:
        """Names of parameters that differ from ``other`` (same dims assumed)."""
        mine, theirs = self.params(), other.params()
        return {k: (mine[k].to_strings(), theirs[k].to_strings()) for k in mine if mine[k] != theirs[k]}

    def block(self, rows=None, cols=None) -> "PiOp4":
        """Select finite/distributed row and column ranges.

        ``rows = (finite_slice, distributed_slice)`` and likewise ``cols``.
        """
        m, n, p, q = self.dims
        fr, dr = rows if rows is not None else (slice(0, m), slice(0, p))
        fc, dc = cols if cols is not None else (slice(0, n), slice(0, q))
        return PiOp4(self.P[fr, fc], self.Q1[fr, dc], self.Q2[dr, fc],
                     PiOp3(self.R0[dr, dc], self.R1[dr, dc], self.R2[dr, dc]), self.dom)

    # ------------------------------------------------------------ json
    def to_json(self) -> dict:
        out = {"dims": list(self.dims), "domain": [str(self.dom[0]), str(self.dom[1])]}
        out["P"] = self.P.to_strings()
        for k in ("Q1", "Q2", "R0", "R1", "R2"):
            out[k] = self.params()[k].to_json()
        return out

    @classmethod
    def from_json(cls, data) -> "PiOp4":
        m, n, p, q = data["dims"]
        dom = tuple(to_fraction(x) for x in data.get("domain", (0, 1)))
        shapes = {"P": (m, n), "Q1": (m, q), "Q2": (p, n), "R0": (p, q), "R1": (p, q), "R2": (p, q)}
        mats = {}
        for k, shp in shapes.items():
            raw = data.get(k)
            if raw is None or 0 in shp:
                mats[k] = PolyMat.zeros(*shp)
            else:
                mats[k] = PolyMat.from_json(raw, shape=shp)
        return cls.from_params(dims=(m, n, p, q), dom=dom, **mats)

    def __repr__(self):
        return f"PiOp4(dims={self.dims}, dom={tuple(str(x) for x in self.dom)})"


# ---------------------------------------------------------------- builders
def zero4(dims, dom=(0, 1)) -> PiOp4:
    return PiOp4.from_params(dims=dims, dom=dom)


def identity4(n: int, p: int, dom=(0, 1)) -> PiOp4:
    """Identity on ``R^n x L2^p``."""
    return PiOp4.from_params(P=PolyMat.eye(n), R0=PolyMat.eye(p), dims=(n, n, p, p), dom=dom)


def matrix_op(M, dom=(0, 1)) -> PiOp4:
    """A constant matrix seen as a 4-PI operator on the finite channel only."""
    M = PolyMat.coerce(M)
    return PiOp4.from_params(P=M, dims=(M.rows, M.cols, 0, 0), dom=dom)


# ---------------------------------------------------------------- algebra
def _same_dom(X: PiOp4, Y: PiOp4):
    if X.dom != Y.dom:
        raise PiDimensionError(f"domains differ: {X.dom} vs {Y.dom}")


def add4(X: PiOp4, Y: PiOp4) -> PiOp4:
    """Parameter-wise sum of two operators with equal dimensions."""
    _same_dom(X, Y)
    if X.dims != Y.dims:
        raise PiDimensionError(f"cannot add operators of dims {X.dims} and {Y.dims}")
    x, y = X.params(), Y.params()
    s = {k: x[k] + y[k] for k in x}
    return PiOp4(s["P"], s["Q1"], s["Q2"], PiOp3(s["R0"], s["R1"], s["R2"]), X.dom)


def compose4(X: PiOp4, Y: PiOp4) -> PiOp4:
    """Parameters of the composition ``X o Y``.

    With ``X = {A, B1, B2, {C0, C1, C2}}`` and ``Y = {P, Q1, Q2, {R0, R1, R2}}``
    every integral over an intermediate variable is evaluated exactly by
    :func:`~pieforge.polyalg.contract`.
    """
    _same_dom(X, Y)
    m, k, p, l = X.dims
    k2, n, l2, q = Y.dims
    if (k, l) != (k2, l2):
        raise PiDimensionError(f"cannot compose dims {X.dims} with {Y.dims}")
    a, b = X.dom
    A, B1, B2, C0, C1, C2 = X.P, X.Q1, X.Q2, X.R0, X.R1, X.R2
    P, Q1, Q2, R0, R1, R2 = Y.P, Y.Q1, Y.Q2, Y.R0, Y.R1, Y.R2

    # B1 and R0 as functions of the intermediate variable placed second
    B1t = B1.swap_vars()
    Q1t = Q1.swap_vars()
    R0t = R0.swap_vars()

    Ph = A @ P + (B1 @ Q2).integrate("s", a, b)

    # int_s^b B1(eta) R1(eta, s) + int_a^s B1(eta) R2(eta, s): computed with the
    # free variable in th, then renamed to s
    Q1h = A @ Q1 + B1 @ R0 + (contract(B1t, R1, "th", b) + contract(B1t, R2, a, "th")).swap_vars()

    Q2h = B2 @ P + C0 @ Q2 + contract(C1, Q2, a, "s") + contract(C2, Q2, "s", b)

    R0h = C0 @ R0
    cross = B2 @ Q1t
    R1h = (cross + C0 @ R1 + C1 @ R0t
           + contract(C1, R2, a, "th") + contract(C1, R1, "th", "s") + contract(C2, R1, "s", b))
    R2h = (cross + C0 @ R2 + C2 @ R0t
           + contract(C1, R2, a, "s") + contract(C2, R2, "s", "th") + contract(C2, R1, "th", b))
    return PiOp4(Ph, Q1h, Q2h, PiOp3(R0h, R1h, R2h), X.dom)


def adjoint4(X: PiOp4) -> PiOp4:
    """Adjoint with respect to the ``R^n x L2`` inner product."""
    return PiOp4(X.P.T, X.Q2.T, X.Q1.T,
                 PiOp3(X.R0.T, X.R2.T.swap_vars(), X.R1.T.swap_vars()), X.dom)


def hconcat4(*ops: PiOp4) -> PiOp4:
    """``[X, Y, ...]``: operators sharing output dims, inputs stacked."""
    ops = list(ops)
    for Y in ops[1:]:
        _same_dom(ops[0], Y)
        if Y.out_dims != ops[0].out_dims:
            raise PiDimensionError(f"hconcat output dims differ: {ops[0].dims} vs {Y.dims}")
    return PiOp4(
        PolyMat.hstack([X.P for X in ops]),
        PolyMat.hstack([X.Q1 for X in ops]),
        PolyMat.hstack([X.Q2 for X in ops]),
        PiOp3(*(PolyMat.hstack([getattr(X, k) for X in ops]) for k in ("R0", "R1", "R2"))),
        ops[0].dom,
    )


def vconcat4(*ops: PiOp4) -> PiOp4:
    """``[X; Y; ...]``: operators sharing input dims, outputs stacked."""
    ops = list(ops)
    for Y in ops[1:]:
        _same_dom(ops[0], Y)
        if Y.in_dims != ops[0].in_dims:
            raise PiDimensionError(f"vconcat input dims differ: {ops[0].dims} vs {Y.dims}")
    return PiOp4(
        PolyMat.vstack([X.P for X in ops]),
        PolyMat.vstack([X.Q1 for X in ops]),
        PolyMat.vstack([X.Q2 for X in ops]),
        PiOp3(*(PolyMat.vstack([getattr(X, k) for X in ops]) for k in ("R0", "R1", "R2"))),
        ops[0].dom,
    )


def block4(rows) -> PiOp4:
    """Assemble ``[[X11, X12], [X21, X22]]`` from operator blocks."""
    return vconcat4(*(hconcat4(*r) for r in rows))


def apply_exact(X: PiOp4, z):
    """Apply ``X`` to ``(u, v)`` with ``u`` constant and ``v`` polynomial in s.

    ``u`` is anything :meth:`PolyMat.coerce` accepts as an ``n x 1`` column,
    ``v`` a ``q x 1`` :class:`PolyMat`.  Returns ``(finite, distributed)`` as
    two column :class:`PolyMat` values.
    """
    u, v = z
    m, n, p, q = X.dims
    u = _column(u, n)
    v = _column(v, q)
    if v.depends_on("th"):
        raise ValueError("distributed input must be a function of s only")
    a, b = X.dom
    fin = X.P @ u + (X.Q1 @ v).integrate("s", a, b)
    dist = X.Q2 @ u + X.R0 @ v + contract(X.R1, v, a, "s") + contract(X.R2, v, "s", b)
    return fin, dist


def _column(x, size):
    if x is None:
        return PolyMat.zeros(size, 1)
    if isinstance(x, PolyMat):
        col = x
    elif isinstance(x, Polynomial):
        col = PolyMat([[x]])
    else:
        col = PolyMat([[e] for e in x]) if size else PolyMat.zeros(0, 1)
    if col.shape != (size, 1):
        raise PiDimensionError(f"expected a column of length {size}, got shape {col.shape}")
    return col
