"""Exact bivariate polynomials in ``(s, th)`` and matrices of them.

Every kernel of a PI operator is stored as a :class:`PolyMat`, a dense matrix
of :class:`Polynomial` entries with rational coefficients.  Constant matrices
(the finite-dimensional blocks) are simply polynomial matrices of degree zero.

Coefficients are exact rationals (``gmpy2.mpq``, which compares, hashes and
prints like :class:`fractions.Fraction` and accepts it everywhere); floats only
appear when a caller asks for them (:meth:`Polynomial.float_coeffs`,
:meth:`PolyMat.to_float`).
"""
from __future__ import annotations

import math
import re
from fractions import Fraction
from numbers import Rational

import numpy as np
from gmpy2 import mpq

__all__ = [
    "Polynomial",
    "PolyMat",
    "PolyParseError",
    "parse_poly",
    "poly_add",
    "poly_mul",
    "poly_scale",
    "integrate",
    "substitute_shift",
    "swap_vars",
    "poly_eval",
    "contract",
    "to_fraction",
    "rat_inv",
    "rat_det",
    "S",
    "TH",
]

VARS = ("s", "th")
_ZERO = mpq(0)
_ONE = mpq(1)


def to_fraction(x) -> mpq:
    """Convert ``x`` to an exact rational.

    Floats go through their shortest ``repr`` so that ``0.1`` becomes ``1/10``
    rather than the binary expansion; strings accept ``"3/4"`` and decimals.
    """
    if type(x) is mpq:
        return x
    if isinstance(x, (bool, np.bool_)):
        return mpq(int(x))
    if isinstance(x, (int, np.integer)):
        return mpq(int(x))
    if isinstance(x, Rational):
        return mpq(int(x.numerator), int(x.denominator))
    if isinstance(x, (float, np.floating)):
        if not math.isfinite(x):
            raise ValueError(f"non-finite coefficient {x!r}")
        f = Fraction(repr(float(x)))
        return mpq(f.numerator, f.denominator)
    if isinstance(x, str):
        f = Fraction(x.strip())
        return mpq(f.numerator, f.denominator)
    raise TypeError(f"cannot convert {type(x).__name__} to a rational")


def _frac_str(c) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _zeros(shape) -> np.ndarray:
    out = np.empty(shape, dtype=object)
    out.fill(_ZERO)
    return out


def _trim(c: np.ndarray) -> np.ndarray:
    if c.size == 0:
        return _zeros((0, 0))
    # common case: the leading row and column are already nonzero
    if any(map(bool, c[-1])) and any(map(bool, c[:, -1])):
        return c
    nz = np.fromiter(map(bool, c.flat), dtype=bool, count=c.size).reshape(c.shape)
    rows, cols = np.flatnonzero(nz.any(axis=1)), np.flatnonzero(nz.any(axis=0))
    if rows.size == 0:
        return _zeros((0, 0))
    return c[: rows[-1] + 1, : cols[-1] + 1]


class Polynomial:
    """A polynomial ``sum c[i, j] s**i th**j`` with rational coefficients.

    Instances are immutable.  The coefficient grid is trimmed so that its shape
    is exactly ``(deg_s + 1, deg_th + 1)``; the zero polynomial has an empty
    grid and both degrees equal to ``-inf``.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs=None):
        if coeffs is None:
            c = _zeros((0, 0))
        elif isinstance(coeffs, dict):
            if coeffs:
                ds = max(i for i, _ in coeffs)
                dt = max(j for _, j in coeffs)
                c = _zeros((ds + 1, dt + 1))
                for (i, j), v in coeffs.items():
                    if i < 0 or j < 0:
                        raise ValueError("negative exponent in coefficient table")
                    c[i, j] = c[i, j] + to_fraction(v)
            else:
                c = _zeros((0, 0))
        else:
            arr = np.asarray(coeffs, dtype=object)
            if arr.ndim == 0:
                arr = arr.reshape(1, 1)
            elif arr.ndim == 1:
                arr = arr.reshape(-1, 1)
            c = _zeros(arr.shape)
            for idx, v in np.ndenumerate(arr):
                c[idx] = to_fraction(v)
        c = _trim(c)
        c.flags.writeable = False
        self._c = c

    @classmethod
    def _raw(cls, c: np.ndarray) -> "Polynomial":
        # c must already hold exact rationals
        p = cls.__new__(cls)
        c = _trim(c)
        c.flags.writeable = False
        p._c = c
        return p

    # ------------------------------------------------------------ constructors
    @classmethod
    def const(cls, value) -> "Polynomial":
        return cls({(0, 0): value})

    @classmethod
    def monomial(cls, i: int, j: int = 0, coeff=1) -> "Polynomial":
        return cls({(i, j): coeff})

    @classmethod
    def tau(cls, i: int) -> "Polynomial":
        """``s**i / i!``, the Taylor-coefficient monomial."""
        return cls({(i, 0): mpq(1, math.factorial(i))})

    # ------------------------------------------------------------- properties
    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    @property
    def is_zero(self) -> bool:
        return self._c.size == 0

    @property
    def deg_s(self):
        return self._c.shape[0] - 1 if self._c.size else -math.inf

    @property
    def deg_th(self):
        return self._c.shape[1] - 1 if self._c.size else -math.inf

    @property
    def degrees(self):
        return (self.deg_s, self.deg_th)

    @property
    def total_degree(self):
        if self.is_zero:
            return -math.inf
        nz = np.argwhere(self._c != 0)
        return int(nz.sum(axis=1).max())

    def is_constant(self) -> bool:
        return self._c.shape[0] <= 1 and self._c.shape[1] <= 1

    def depends_on(self, var: str) -> bool:
        return self._c.shape[0 if var == "s" else 1] > 1

    def constant_value(self) -> mpq:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return self._c[0, 0] if self._c.size else _ZERO

    def terms(self):
        """Yield ``((i, j), c)`` for every nonzero coefficient."""
        for (i, j), v in np.ndenumerate(self._c):
            if v != 0:
                yield (i, j), v

    # -------------------------------------------------------------- arithmetic
    def _coerce(self, other):
        if isinstance(other, Polynomial):
            return other
        return Polynomial.const(other)

    def __add__(self, other):
        other = self._coerce(other)
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        a, b = self._c, other._c
        if a.shape == b.shape:
            return Polynomial._raw(a + b)
        shape = (max(a.shape[0], b.shape[0]), max(a.shape[1], b.shape[1]))
        c = _zeros(shape)
        c[: a.shape[0], : a.shape[1]] = a
        c[: b.shape[0], : b.shape[1]] += b
        return Polynomial._raw(c)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw(-self._c) if not self.is_zero else self

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            k = to_fraction(other)
            if k == 0 or self.is_zero:
                return Polynomial()
            return Polynomial._raw(self._c * k)
        if self.is_zero or other.is_zero:
            return Polynomial()
        a, b = self._c, other._c
        if b.size < a.size:
            a, b = b, a
        if a.size == 1:
            return Polynomial._raw(a[0, 0] * b)
        c = _zeros((a.shape[0] + b.shape[0] - 1, a.shape[1] + b.shape[1] - 1))
        bs, bt = b.shape
        for (i, j), v in np.ndenumerate(a):
            if v != 0:
                c[i : i + bs, j : j + bt] += v * b
        return Polynomial._raw(c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * (1 / to_fraction(other))

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        out = Polynomial.const(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            try:
                other = Polynomial.const(other)
            except (TypeError, ValueError):
                return NotImplemented
        return self._c.shape == other._c.shape and bool(np.all(self._c == other._c))

    def __hash__(self):
        return hash(tuple(self.terms()))

    # ----------------------------------------------------------------- calculus
    def diff(self, var: str = "s", order: int = 1) -> "Polynomial":
        c = self._c
        for _ in range(order):
            if c.size == 0:
                break
            if var == "s":
                if c.shape[0] <= 1:
                    return Polynomial()
                c = c[1:, :] * np.arange(1, c.shape[0], dtype=object)[:, None]
            else:
                if c.shape[1] <= 1:
                    return Polynomial()
                c = c[:, 1:] * np.arange(1, c.shape[1], dtype=object)[None, :]
        return Polynomial._raw(np.array(c, dtype=object))

    def antiderivative(self, var: str = "s") -> "Polynomial":
        """Antiderivative in ``var`` vanishing at ``var = 0``."""
        if self.is_zero:
            return self
        ds, dt = self._c.shape
        if var == "s":
            c = _zeros((ds + 1, dt))
            for i in range(ds):
                c[i + 1, :] = self._c[i, :] / (i + 1)
        else:
            c = _zeros((ds, dt + 1))
            for j in range(dt):
                c[:, j + 1] = self._c[:, j] / (j + 1)
        return Polynomial._raw(c)

    def subs(self, var: str, value) -> "Polynomial":
        """Substitute ``var`` by a number or by the other variable's name."""
        if self.is_zero:
            return self
        c = self._c
        if isinstance(value, str):
            if value == var:
                return self
            if value not in VARS:
                raise ValueError(f"unknown variable {value!r}")
            # collapse both variables onto the surviving one
            ds, dt = c.shape
            out = _zeros((ds + dt - 1, 1)) if value == "s" else _zeros((1, ds + dt - 1))
            for (i, j), v in np.ndenumerate(c):
                if v != 0:
                    if value == "s":
                        out[i + j, 0] += v
                    else:
                        out[0, i + j] += v
            return Polynomial._raw(out)
        x = to_fraction(value)
        if var == "s":
            powers = np.array([x**i for i in range(c.shape[0])], dtype=object)
            row = (c * powers[:, None]).sum(axis=0)
            return Polynomial._raw(np.array(row, dtype=object).reshape(1, -1))
        powers = np.array([x**j for j in range(c.shape[1])], dtype=object)
        col = (c * powers[None, :]).sum(axis=1)
        return Polynomial._raw(np.array(col, dtype=object).reshape(-1, 1))

    def integrate(self, var: str, lower, upper) -> "Polynomial":
        """Definite integral over ``var`` with constant or symbolic bounds."""
        for bound in (lower, upper):
            if isinstance(bound, str) and bound == var:
                raise ValueError(f"bound {bound!r} references the integration variable")
        F = self.antiderivative(var)
        return F.subs(var, upper) - F.subs(var, lower)

    # ------------------------------------------------------------ substitution
    def swap_vars(self) -> "Polynomial":
        if self.is_zero:
            return self
        return Polynomial._raw(np.array(self._c.T, dtype=object))

    def compose_affine(self, cs=0, cth=0, c0=0) -> "Polynomial":
        """Evaluate a univariate-in-``s`` polynomial at ``cs*s + cth*th + c0``."""
        if self.depends_on("th"):
            raise ValueError("compose_affine expects a polynomial in s only")
        if self.is_zero:
            return self
        arg = Polynomial({(1, 0): cs, (0, 1): cth, (0, 0): c0})
        out = Polynomial()
        for i in range(self._c.shape[0] - 1, -1, -1):
            out = out * arg + self._c[i, 0]
        return out

    def shift(self, var: str, offset) -> "Polynomial":
        """``p`` with ``var`` replaced by ``var + offset``."""
        p = self if var == "s" else self.swap_vars()
        offset = to_fraction(offset)
        if offset == 0 or p.is_zero:
            return self
        ds, dt = p._c.shape
        c = _zeros((ds, dt))
        for i in range(ds):
            row = p._c[i, :]
            if not any(v != 0 for v in row):
                continue
            for k in range(i + 1):
                c[k, :] += row * (math.comb(i, k) * offset ** (i - k))
        q = Polynomial._raw(c)
        return q if var == "s" else q.swap_vars()

    # -------------------------------------------------------------- evaluation
    def __call__(self, s=0, th=0):
        return self.eval(s, th)

    def eval(self, s=0, th=0):
        """Horner evaluation; exact for rationals, float for floats."""
        if self.is_zero:
            return 0 * s + 0 * th
        c = self._c
        out = 0
        for i in range(c.shape[0] - 1, -1, -1):
            inner = 0
            for j in range(c.shape[1] - 1, -1, -1):
                inner = inner * th + _num(c[i, j], s, th)
            out = out * s + inner
        return out

    def float_coeffs(self) -> np.ndarray:
        if self.is_zero:
            return np.zeros((1, 1))
        return np.array(self._c, dtype=float)

    # ------------------------------------------------------------ text / json
    def to_string(self) -> str:
        if self.is_zero:
            return "0"
        terms = sorted(self.terms(), key=lambda t: (-(t[0][0] + t[0][1]), -t[0][0]))
        parts = []
        for (i, j), v in terms:
            mono = []
            if i:
                mono.append("s" if i == 1 else f"s^{i}")
            if j:
                mono.append("th" if j == 1 else f"th^{j}")
            mag = abs(v)
            if mono and mag == 1:
                body = "*".join(mono)
            else:
                body = "*".join([_frac_str(mag)] + mono)
            parts.append(("-" if v < 0 else "+", body))
        sign, body = parts[0]
        out = ("-" if sign == "-" else "") + body
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    __str__ = to_string

    def __repr__(self):
        return f"Polynomial({self.to_string()!r})"

    def to_json(self) -> list:
        return [[i, j, _frac_str(v)] for (i, j), v in self.terms()]

    @classmethod
    def from_json(cls, data) -> "Polynomial":
        if isinstance(data, str):
            return parse_poly(data)
        if isinstance(data, (int, float, Rational)):
            return cls.const(data)
        table = {}
        for entry in data:
            i, j, v = entry
            table[(int(i), int(j))] = table.get((int(i), int(j)), _ZERO) + to_fraction(v)
        return cls(table)


def _num(c, s, th):
    # keep float arithmetic in float, exact arithmetic exact
    if isinstance(s, (float, np.floating, np.ndarray)) or isinstance(th, (float, np.floating, np.ndarray)):
        return float(c)
    return c


S = Polynomial({(1, 0): 1})
TH = Polynomial({(0, 1): 1})


# ---------------------------------------------------------------------- parser
class PolyParseError(ValueError):
    """Raised for malformed polynomial expressions; carries the character offset."""

    def __init__(self, message: str, pos: int, text: str = ""):
        super().__init__(f"{message} at position {pos}" + (f" in {text!r}" if text else ""))
        self.pos = pos


_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)|(?P<id>[A-Za-z_]\w*)|(?P<op>\*\*|[-+*/^()]))")


def _tokenize(text: str):
    pos = 0
    tokens = []
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise PolyParseError(f"unexpected character {text[pos]!r}", pos, text)
        start = m.start(m.lastgroup)
        kind = m.lastgroup
        value = m.group(kind)
        if kind == "op" and value == "**":
            value = "^"
        tokens.append((kind, value, start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    # expr   := term (('+'|'-') term)*
    # term   := unary (('*'|'/') unary)*
    # unary  := ('+'|'-') unary | power
    # power  := atom ('^' integer)?
    # atom   := number | s | th | '(' expr ')'

    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        raise PolyParseError(msg, tok[2], self.text)

    def parse(self) -> Polynomial:
        if self.peek()[0] == "end":
            self.fail("empty expression")
        out = self.expr()
        if self.peek()[0] != "end":
            self.fail(f"unexpected token {self.peek()[1]!r}")
        return out

    def expr(self):
        out = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            out = out + rhs if op == "+" else out - rhs
        return out

    def term(self):
        out = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in ("*", "/"):
            op_tok = self.take()
            rhs = self.unary()
            if op_tok[1] == "*":
                out = out * rhs
            else:
                if not rhs.is_constant():
                    self.fail("division by a non-constant expression", op_tok)
                if rhs.is_zero:
                    self.fail("division by zero", op_tok)
                out = out / rhs.constant_value()
        return out

    def unary(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] in ("+", "-"):
            self.take()
            inner = self.unary()
            return -inner if tok[1] == "-" else inner
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            tok = self.take()
            if tok[0] != "num" or not tok[1].isdigit():
                self.fail("exponent must be a nonnegative integer literal", tok)
            return base ** int(tok[1])
        return base

    def atom(self):
        tok = self.take()
        kind, value, _ = tok
        if kind == "num":
            return Polynomial.const(to_fraction(value))
        if kind == "id":
            if value == "s":
                return S
            if value in ("th", "theta"):
                return TH
            self.fail(f"unknown identifier {value!r}", tok)
        if kind == "op" and value == "(":
            inner = self.expr()
            if self.peek()[1] != ")":
                self.fail("expected ')'")
            self.take()
            return inner
        self.fail(f"unexpected token {value!r}" if value else "unexpected end of expression", tok)


def parse_poly(text: str) -> Polynomial:
    """Parse an arithmetic expression in ``s`` and ``th`` into a polynomial.

    >>> parse_poly("3*s^2 - s*th + 1").to_json()
    [[0, 0, '1'], [1, 1, '-1'], [2, 0, '3']]
    """
    return _Parser(text).parse()


# ------------------------------------------------------ functional interface
def poly_add(a: Polynomial, b: Polynomial) -> Polynomial:
    return a + b


def poly_mul(a: Polynomial, b: Polynomial) -> Polynomial:
    return a * b


def poly_scale(a: Polynomial, c) -> Polynomial:
    return a * to_fraction(c)


def integrate(p: Polynomial, var: str, lower, upper) -> Polynomial:
    return p.integrate(var, lower, upper)


def substitute_shift(p: Polynomial, var: str, offset) -> Polynomial:
    return p.shift(var, offset)


def swap_vars(p: Polynomial) -> Polynomial:
    return p.swap_vars()


def poly_eval(p: Polynomial, s, th=0):
    return p.eval(s, th)


def _contract_poly(f: Polynomial, g: Polynomial, lower, upper) -> Polynomial:
    # h(s, th) = int_lower^upper f(s, t) g(t, th) dt ; bounds: number, "s" or "th"
    if f.is_zero or g.is_zero:
        return Polynomial()
    fc, gc = f.coeffs, g.coeffs
    fx, ft = fc.shape
    gt, gy = gc.shape
    nt = ft + gt - 1
    # m[:, :, k] holds the coefficient grid of t^k in f(s, t) g(t, th)
    m = _zeros((fx, gy, nt))
    for j in range(ft):
        fj = fc[:, j]
        if not any(fj):
            continue
        for k in range(gt):
            gk = gc[k, :]
            if any(gk):
                m[:, :, j + k] += np.multiply.outer(fj, gk)
    # antiderivative in t: t^k -> t^(k+1)/(k+1)
    anti = [m[:, :, k] / (k + 1) for k in range(nt)]

    def at(bound):
        if isinstance(bound, str):
            if bound == "s":
                out = _zeros((fx + nt, gy))
                for k in range(nt):
                    out[k + 1 : k + 1 + fx, :] += anti[k]
            elif bound == "th":
                out = _zeros((fx, gy + nt))
                for k in range(nt):
                    out[:, k + 1 : k + 1 + gy] += anti[k]
            else:
                raise ValueError(f"unknown bound {bound!r}")
            return out
        x = to_fraction(bound)
        out = _zeros((fx, gy))
        xp = x
        for k in range(nt):
            out += anti[k] * xp
            xp *= x
        return out

    up, lo = at(upper), at(lower)
    shape = (max(up.shape[0], lo.shape[0]), max(up.shape[1], lo.shape[1]))
    c = _zeros(shape)
    c[: up.shape[0], : up.shape[1]] = up
    c[: lo.shape[0], : lo.shape[1]] -= lo
    return Polynomial._raw(c)


def contract(f, g, lower, upper):
    """Integral contraction ``h(s, th) = int_L^U f(s, t) g(t, th) dt``.

    ``f`` is read as a function of ``(s, t)`` and ``g`` as a function of
    ``(t, th)``; bounds are numbers or the names ``"s"``/``"th"``.  Works on
    polynomials and on conformable polynomial matrices (matrix product).
    """
    if isinstance(f, Polynomial) and isinstance(g, Polynomial):
        return _contract_poly(f, g, lower, upper)
    f, g = PolyMat.coerce(f), PolyMat.coerce(g)
    if f.cols != g.rows:
        raise ValueError(f"inner dimension mismatch {f.shape} x {g.shape}")
    out = np.empty((f.rows, g.cols), dtype=object)
    for i in range(f.rows):
        for j in range(g.cols):
            acc = Polynomial()
            for k in range(f.cols):
                a, b = f.entries[i, k], g.entries[k, j]
                if not a.is_zero and not b.is_zero:
                    acc = acc + _contract_poly(a, b, lower, upper)
            out[i, j] = acc
    return PolyMat(out)


# ------------------------------------------------------------------ matrices
class PolyMat:
    """Dense matrix of :class:`Polynomial` entries; either dimension may be 0."""

    __slots__ = ("entries",)

    def __init__(self, entries=None, shape=None):
        if entries is None:
            r, c = shape if shape is not None else (0, 0)
            arr = np.empty((r, c), dtype=object)
            for idx in np.ndindex(r, c):
                arr[idx] = Polynomial()
        elif isinstance(entries, np.ndarray) and entries.dtype == object and entries.ndim == 2 and all(
            isinstance(e, Polynomial) for e in entries.flat
        ):
            arr = entries
        else:
            rows = [list(r) for r in entries] if not isinstance(entries, np.ndarray) else entries.tolist()
            if shape is not None and not rows:
                r, c = shape
            else:
                r = len(rows)
                c = len(rows[0]) if rows else 0
            if any(len(row) != c for row in rows):
                raise ValueError("ragged matrix rows")
            arr = np.empty((r, c), dtype=object)
            for i, row in enumerate(rows):
                for j, v in enumerate(row):
                    arr[i, j] = _as_poly(v)
        arr.flags.writeable = False
        self.entries = arr

    # ------------------------------------------------------------ constructors
    @classmethod
    def coerce(cls, x) -> "PolyMat":
        if isinstance(x, PolyMat):
            return x
        if isinstance(x, Polynomial):
            return cls([[x]])
        return cls(x)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "PolyMat":
        return cls(shape=(rows, cols))

    @classmethod
    def eye(cls, n: int, scale=1) -> "PolyMat":
        arr = np.empty((n, n), dtype=object)
        for i, j in np.ndindex(n, n):
            arr[i, j] = Polynomial.const(scale) if i == j else Polynomial()
        return cls(arr)

    @classmethod
    def from_rationals(cls, rows) -> "PolyMat":
        arr = np.asarray(rows, dtype=object)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1) if arr.size else arr.reshape(0, 0)
        out = np.empty(arr.shape, dtype=object)
        for idx, v in np.ndenumerate(arr):
            out[idx] = Polynomial.const(v)
        return cls(out)

    @classmethod
    def hstack(cls, mats) -> "PolyMat":
        mats = [cls.coerce(m) for m in mats]
        rows = {m.rows for m in mats if m.cols}
        if len(rows) > 1:
            raise ValueError(f"hstack row mismatch: {[m.shape for m in mats]}")
        r = rows.pop() if rows else (mats[0].rows if mats else 0)
        parts = [m.entries for m in mats if m.cols]
        if not parts:
            return cls.zeros(r, 0)
        return cls(np.concatenate(parts, axis=1))

    @classmethod
    def vstack(cls, mats) -> "PolyMat":
        mats = [cls.coerce(m) for m in mats]
        cols = {m.cols for m in mats if m.rows}
        if len(cols) > 1:
            raise ValueError(f"vstack column mismatch: {[m.shape for m in mats]}")
        c = cols.pop() if cols else (mats[0].cols if mats else 0)
        parts = [m.entries for m in mats if m.rows]
        if not parts:
            return cls.zeros(0, c)
        return cls(np.concatenate(parts, axis=0))

    @classmethod
    def block(cls, rows) -> "PolyMat":
        return cls.vstack([cls.hstack(r) for r in rows])

    @classmethod
    def block_diag(cls, mats) -> "PolyMat":
        mats = [cls.coerce(m) for m in mats]
        R = sum(m.rows for m in mats)
        C = sum(m.cols for m in mats)
        out = np.empty((R, C), dtype=object)
        for idx in np.ndindex(R, C):
            out[idx] = Polynomial()
        r = c = 0
        for m in mats:
            out[r : r + m.rows, c : c + m.cols] = m.entries
            r += m.rows
            c += m.cols
        return cls(out)

    # -------------------------------------------------------------- properties
    @property
    def shape(self):
        return self.entries.shape

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    @property
    def is_zero(self) -> bool:
        return all(e.is_zero for e in self.entries.flat)

    def is_constant(self) -> bool:
        return all(e.is_constant() for e in self.entries.flat)

    def depends_on(self, var: str) -> bool:
        return any(e.depends_on(var) for e in self.entries.flat)

    def max_degree(self) -> int:
        degs = [e.total_degree for e in self.entries.flat if not e.is_zero]
        return int(max(degs)) if degs else 0

    def __getitem__(self, key):
        sub = self.entries[key]
        if isinstance(sub, Polynomial):
            return sub
        if sub.ndim == 1:
            raise IndexError("use 2-D slices on PolyMat")
        return PolyMat(np.array(sub, dtype=object))

    # -------------------------------------------------------------- arithmetic
    def _check_same(self, other):
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")

    def __add__(self, other):
        other = PolyMat.coerce(other)
        self._check_same(other)
        return PolyMat(np.array(self.entries + other.entries, dtype=object).reshape(self.shape))

    def __sub__(self, other):
        other = PolyMat.coerce(other)
        self._check_same(other)
        return PolyMat(np.array(self.entries - other.entries, dtype=object).reshape(self.shape))

    def __neg__(self):
        return self.map(lambda p: -p)

    def __mul__(self, k):
        if isinstance(k, (PolyMat,)):
            raise TypeError("use @ for matrix products")
        if isinstance(k, Polynomial):
            return self.map(lambda p: p * k)
        k = to_fraction(k)
        return self.map(lambda p: p * k)

    __rmul__ = __mul__

    def __matmul__(self, other):
        other = PolyMat.coerce(other)
        if self.cols != other.rows:
            raise ValueError(f"inner dimension mismatch {self.shape} @ {other.shape}")
        out = np.empty((self.rows, other.cols), dtype=object)
        for i in range(self.rows):
            for j in range(other.cols):
                acc = Polynomial()
                for k in range(self.cols):
                    a, b = self.entries[i, k], other.entries[k, j]
                    if not a.is_zero and not b.is_zero:
                        acc = acc + a * b
                out[i, j] = acc
        return PolyMat(out)

    def __eq__(self, other):
        if not isinstance(other, PolyMat):
            try:
                other = PolyMat.coerce(other)
            except (TypeError, ValueError):
                return NotImplemented
        return self.shape == other.shape and all(a == b for a, b in zip(self.entries.flat, other.entries.flat))

    __hash__ = None

    @property
    def T(self) -> "PolyMat":
        return PolyMat(np.array(self.entries.T, dtype=object))

    def map(self, fn) -> "PolyMat":
        out = np.empty(self.shape, dtype=object)
        for idx, p in np.ndenumerate(self.entries):
            out[idx] = fn(p)
        return PolyMat(out)

    def swap_vars(self) -> "PolyMat":
        return self.map(Polynomial.swap_vars)

    def diff(self, var="s", order=1) -> "PolyMat":
        return self.map(lambda p: p.diff(var, order))

    def integrate(self, var, lower, upper) -> "PolyMat":
        return self.map(lambda p: p.integrate(var, lower, upper))

    def subs(self, var, value) -> "PolyMat":
        return self.map(lambda p: p.subs(var, value))

    def shift(self, var, offset) -> "PolyMat":
        return self.map(lambda p: p.shift(var, offset))

    def compose_affine(self, cs=0, cth=0, c0=0) -> "PolyMat":
        return self.map(lambda p: p.compose_affine(cs, cth, c0))

    # -------------------------------------------------------------- evaluation
    def eval(self, s=0, th=0) -> np.ndarray:
        out = np.empty(self.shape, dtype=object)
        for idx, p in np.ndenumerate(self.entries):
            out[idx] = p.eval(s, th)
        return out

    def constant_values(self) -> np.ndarray:
        """Object array of exact rationals; raises if any entry is not constant."""
        out = np.empty(self.shape, dtype=object)
        for idx, p in np.ndenumerate(self.entries):
            out[idx] = p.constant_value()
        return out

    def to_float(self) -> np.ndarray:
        return np.array(self.constant_values(), dtype=float).reshape(self.shape)

    # ------------------------------------------------------------ text / json
    def to_json(self) -> list:
        return [[p.to_json() for p in row] for row in self.entries]

    def to_strings(self) -> list:
        return [[p.to_string() for p in row] for row in self.entries]

    @classmethod
    def from_json(cls, data, shape=None) -> "PolyMat":
        if data is None:
            return cls.zeros(*shape)
        if not isinstance(data, list):
            data = [[data]]
        elif data and not isinstance(data[0], list):
            data = [data]
        if not data:
            return cls.zeros(*(shape or (0, 0)))
        # a coefficient-list entry is itself a list of [i, j, c] triples
        rows = []
        for row in data:
            if not isinstance(row, list):
                raise ValueError("matrix rows must be lists")
            rows.append([_entry_from_json(e) for e in row])
        mat = cls(rows)
        if shape is not None and mat.shape != tuple(shape) and 0 not in shape:
            raise ValueError(f"expected shape {tuple(shape)}, got {mat.shape}")
        return mat

    def __repr__(self):
        return f"PolyMat({self.to_strings()!r})"

    def __str__(self):
        return "[" + "; ".join(", ".join(r) for r in self.to_strings()) + "]"


def _entry_from_json(e) -> Polynomial:
    if isinstance(e, Polynomial):
        return e
    if isinstance(e, list):
        if e and isinstance(e[0], list):
            return Polynomial.from_json(e)
        if not e:
            return Polynomial()
        raise ValueError(f"bad polynomial entry {e!r}")
    if isinstance(e, str):
        return parse_poly(e)
    return Polynomial.const(e)


def _as_poly(v) -> Polynomial:
    if isinstance(v, Polynomial):
        return v
    if isinstance(v, str):
        return parse_poly(v)
    return Polynomial.const(v)


# ------------------------------------------------------------ rational linalg
def _rat_array(m) -> list:
    if isinstance(m, PolyMat):
        vals = m.constant_values()
        return [[vals[i, j] for j in range(m.cols)] for i in range(m.rows)]
    return [[to_fraction(v) for v in row] for row in m]


def rat_inv(m) -> PolyMat:
    """Exact inverse of a constant matrix by Gauss-Jordan elimination.

    Pivots are chosen by largest rational magnitude in the column.
    Raises ``ZeroDivisionError`` for singular input.
    """
    a = _rat_array(m)
    n = len(a)
    if any(len(row) != n for row in a):
        raise ValueError("matrix is not square")
    aug = [row[:] + [_ONE if i == j else _ZERO for j in range(n)] for i, row in enumerate(a)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(aug[r][col]))
        if aug[piv][col] == 0:
            raise ZeroDivisionError("singular matrix")
        aug[col], aug[piv] = aug[piv], aug[col]
        pv = aug[col][col]
        prow = [v / pv for v in aug[col]]
        aug[col] = prow
        nz = [j for j, v in enumerate(prow) if v != 0]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                row = aug[r]
                for j in nz:
                    row[j] -= f * prow[j]
    return PolyMat.from_rationals([row[n:] for row in aug]) if n else PolyMat.zeros(0, 0)


def rat_det(m) -> mpq:
    """Exact determinant by Gaussian elimination over the rationals."""
    a = _rat_array(m)
    n = len(a)
    if any(len(row) != n for row in a):
        raise ValueError("matrix is not square")
    det = _ONE
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(a[r][col]))
        if a[piv][col] == 0:
            return _ZERO
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        pv = a[col][col]
        det *= pv
        for r in range(col + 1, n):
            if a[r][col] != 0:
                f = a[r][col] / pv
                for j in range(col, n):
                    a[r][j] -= f * a[col][j]
    return det
