"""Dense-matrix realization of PI operators on a Chebyshev collocation grid.

Distributed functions are represented by their values at the ``M + 1``
Chebyshev-Gauss-Lobatto nodes of ``[a, b]``.  A vector acted on by a
discretized operator is laid out as ``[finite part, channel 0 values,
channel 1 values, ...]``.

Operator matrices are built by applying the operator exactly (rational
arithmetic) to the shifted Chebyshev polynomials ``T_0..T_M``.  An exact image
may have degree above ``M``; it is sampled on a finer Gauss-Lobatto grid,
converted to Chebyshev coefficients and truncated to degree ``M`` before being
evaluated at the basis nodes.  Truncation rather than interpolation matters:
the node polynomial vanishes at every node, so interpolating, for example,
the Volterra integral of its derivative would give a zero column.  A final
well-conditioned change of basis turns the columns into images of the
Lagrange cardinal functions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np
from numpy.polynomial import chebyshev as C

from .piops import PiOp4, apply_exact
from .polyalg import PolyMat, Polynomial

__all__ = ["SpectralBasis", "DiscretePie", "discretize", "discretize_pie",
           "differentiation_matrix", "spectral_derivative", "sample_poly"]

M_MIN, M_MAX, M_DEFAULT = 4, 256, 32


class SpectralBasis:
    """Chebyshev-Gauss-Lobatto collocation basis of degree ``M`` on ``[a, b]``."""

    def __init__(self, M: int = M_DEFAULT, a=0, b=1, check: bool = True):
        M = int(M)
        if check and not M_MIN <= M <= M_MAX:
            raise ValueError(f"basis degree must lie in [{M_MIN}, {M_MAX}], got {M}")
        self.M = M
        self.a_exact, self.b_exact = Fraction(a), Fraction(b)
        self.a, self.b = float(a), float(b)
        j = np.arange(M + 1)
        self.xref = -np.cos(np.pi * j / M)
        self.xref[0], self.xref[-1] = -1.0, 1.0
        if M % 2 == 0:
            self.xref[M // 2] = 0.0
        self.nodes = self.a + (self.b - self.a) * (self.xref + 1) / 2
        self.nodes[0], self.nodes[-1] = self.a, self.b
        bw = (-1.0) ** j
        bw[0] *= 0.5
        bw[-1] *= 0.5
        self.bary_weights = bw
        # columns: Chebyshev coefficients of the cardinal functions
        self.card_coeffs = np.linalg.inv(C.chebvander(self.xref, M))
        ints = np.zeros(M + 1)
        ints[::2] = 2.0 / (1.0 - np.arange(0, M + 1, 2) ** 2)
        self.weights = (self.b - self.a) / 2 * (ints @ self.card_coeffs)
        self._cache = {}

    @property
    def size(self) -> int:
        return self.M + 1

    def __repr__(self):
        return f"SpectralBasis(M={self.M}, a={self.a}, b={self.b})"

    @cached_property
    def exact_nodes(self):
        return [Fraction(float(x)) for x in self.nodes]

    @cached_property
    def node_ratios(self):
        return [float(x).as_integer_ratio() for x in self.nodes]

    @cached_property
    def exact_chebyshev(self):
        """Shifted Chebyshev polynomials ``T_k((2s - a - b)/(b - a))`` as exact polynomials."""
        a, b = self.a_exact, self.b_exact
        y = Polynomial({(1, 0): 2 / (b - a), (0, 0): -(a + b) / (b - a)})
        out = [Polynomial.const(1), y]
        for _ in range(2, self.M + 1):
            out.append(2 * y * out[-1] - out[-2])
        return out[: self.M + 1]

    def to_ref(self, s):
        return (2 * np.asarray(s, dtype=float) - self.a - self.b) / (self.b - self.a)

    def coefficients(self, values) -> np.ndarray:
        """Chebyshev coefficients of the interpolant (last axis = nodes)."""
        return np.asarray(values, dtype=float) @ self.card_coeffs.T

    def interpolate(self, values, s) -> np.ndarray:
        """Evaluate the interpolant of nodal ``values`` at points ``s``."""
        coef = self.coefficients(values)
        return C.chebval(self.to_ref(s), coef.T if coef.ndim > 1 else coef)

    def integrate(self, values) -> float:
        return np.asarray(values, dtype=float) @ self.weights

    def inner(self, f, g) -> float:
        """L2 inner product of two multichannel nodal arrays ``(channels, M+1)``."""
        f = np.atleast_2d(f)
        g = np.atleast_2d(g)
        return float(np.sum((f * g) @ self.weights))

    def sample(self, fn) -> np.ndarray:
        return np.asarray(fn(self.nodes), dtype=float)

    def projector(self, degree: int):
        """``(fine, P)``: a Gauss-Lobatto basis able to hold polynomials of
        ``degree`` and the matrix taking values on it to values at these nodes
        of the Chebyshev series truncated to degree ``M``."""
        D = max(int(degree), self.M)
        key = ("proj", D)
        if key not in self._cache:
            if D == self.M:
                self._cache[key] = (self, np.eye(self.size))
            else:
                fine = SpectralBasis(D, self.a_exact, self.b_exact, check=False)
                V = C.chebvander(self.xref, self.M)
                self._cache[key] = (fine, V @ fine.card_coeffs[: self.M + 1, :])
        return self._cache[key]


def _eval_exact(p: Polynomial, ratios) -> np.ndarray:
    # exact evaluation of a polynomial in s at rational points given as
    # (numerator, denominator) pairs, rounded once at the end
    c = p.coeffs[:, 0] if p.coeffs.shape[1] == 1 else None
    if c is None:
        raise ValueError("expected a polynomial in s only")
    den = 1
    for v in c:
        d = int(v.denominator)
        den = den * d // math.gcd(den, d)
    ints = [int(v * den) for v in c]
    d = len(ints) - 1
    out = np.empty(len(ratios))
    for k, (num, q) in enumerate(ratios):
        acc = ints[d]
        qp = 1
        for i in range(d - 1, -1, -1):
            qp *= q
            acc = acc * num + ints[i] * qp
        out[k] = acc / (den * qp)
    return out


def sample_poly(col: PolyMat, basis: SpectralBasis, exact=True) -> np.ndarray:
    """Values of a column of polynomials at the nodes, shape ``(rows, M+1)``.

    With ``exact=True`` each value is computed in exact arithmetic at the
    (binary) node and rounded once.
    """
    out = np.zeros((col.rows, basis.size))
    for i in range(col.rows):
        p = col[i, 0]
        if p.is_zero:
            continue
        if exact:
            out[i] = _eval_exact(p, basis.node_ratios)
        else:
            out[i] = p.eval(basis.nodes)
    return out


def differentiation_matrix(basis: SpectralBasis, k: int = 1) -> np.ndarray:
    """Chebyshev collocation matrix for ``d^k/ds^k`` on the basis nodes."""
    M = basis.M
    if k < 0 or k > M:
        raise ValueError(f"derivative order must lie in [0, {M}]")
    if k == 0:
        return np.eye(M + 1)
    x = np.cos(np.pi * np.arange(M + 1) / M)  # decreasing reference nodes
    c = np.ones(M + 1)
    c[0] = c[-1] = 2.0
    c *= (-1.0) ** np.arange(M + 1)
    X = np.tile(x, (M + 1, 1)).T
    dX = X - X.T
    D = np.outer(c, 1.0 / c) / (dX + np.eye(M + 1))
    D -= np.diag(D.sum(axis=1))
    # nodes are stored increasing, so reverse both axes
    D = D[::-1, ::-1] * (2.0 / (basis.b - basis.a))
    return np.linalg.matrix_power(D, k)


def spectral_derivative(values, basis: SpectralBasis, k: int = 1) -> np.ndarray:
    """``k``-th derivative of nodal data, computed in Chebyshev coefficient space."""
    coef = basis.coefficients(values)
    scale = (2.0 / (basis.b - basis.a)) ** k
    d = C.chebder(coef, k, axis=-1) * scale if k else coef
    xr = basis.xref
    return C.chebval(xr, d.T if d.ndim > 1 else d)


def discretize(op: PiOp4, basis: SpectralBasis) -> np.ndarray:
    """Dense matrix of ``op`` acting on ``R^n x (nodal values)^q``.

    Multiplier terms (``R0``, ``Q2``) act pointwise at the nodes; the images
    of the integral terms (``R1``, ``R2``) are projected by Chebyshev
    truncation.
    """
    m, n, p, q = op.dims
    N1 = basis.size
    out = np.zeros((m + p * N1, n + q * N1))
    if op.is_zero:
        return out
    local = PiOp4.from_params(P=op.P, Q1=op.Q1, Q2=op.Q2, R0=op.R0, dims=op.dims, dom=op.dom)
    integral = PiOp4.from_params(R1=op.R1, R2=op.R2, dims=op.dims, dom=op.dom)
    # an integral kernel of total degree d maps degree M to degree M + d + 1
    deg = basis.M + max(op.R1.max_degree(), op.R2.max_degree()) + 1
    fine, proj = basis.projector(deg)

    def column(z) -> np.ndarray:
        fin, dist = apply_exact(local, z)
        f = fin.to_float().ravel() if fin.rows else np.zeros(0)
        d = sample_poly(dist, basis) if dist.rows else np.zeros((0, N1))
        if dist.rows and not integral.is_zero:
            d = d + sample_poly(apply_exact(integral, z)[1], fine) @ proj.T
        return np.concatenate([f, d.ravel()])

    for i in range(n):
        e = [1 if r == i else 0 for r in range(n)]
        out[:, i] = column((e, None))
    if q:
        cheb = basis.exact_chebyshev
        for ch in range(q):
            if all(op.Q1[r, ch].is_zero for r in range(m)) and all(
                    op.R0[r, ch].is_zero and op.R1[r, ch].is_zero and op.R2[r, ch].is_zero
                    for r in range(p)):
                continue
            imgs = np.zeros((m + p * N1, N1))
            for k, Tk in enumerate(cheb):
                v = PolyMat([[Tk if r == ch else Polynomial()] for r in range(q)])
                imgs[:, k] = column(([0] * n, v))
            out[:, n + ch * N1: n + (ch + 1) * N1] = imgs @ basis.card_coeffs
    return out


@dataclass
class DiscretePie:
    """Matrices of all twelve PIE operators on one basis."""

    basis: SpectralBasis
    mats: dict
    dims: dict
    pie: object = None
    extra: dict = field(default_factory=dict)

    @property
    def n_state(self) -> int:
        return self.dims["x"] + self.dims["xhat"] * self.basis.size

    def split_state(self, vec):
        """``(x, channels)`` with channels shaped ``(xhat, M+1)``."""
        vec = np.asarray(vec)
        nx = self.dims["x"]
        return vec[..., :nx], vec[..., nx:].reshape(vec.shape[:-1] + (self.dims["xhat"], self.basis.size))

    def join_state(self, x, channels):
        return np.concatenate([np.ravel(x), np.ravel(channels)])


def discretize_pie(pie, basis: SpectralBasis, extra_ops=None) -> DiscretePie:
    """Discretize every operator of a :class:`~pieforge.converter.PieSystem`."""
    mats = {k: discretize(op, basis) for k, op in pie.ops.items()}
    extra = {k: discretize(op, basis) for k, op in (extra_ops or {}).items()}
    return DiscretePie(basis, mats, dict(pie.dims), pie, extra)
