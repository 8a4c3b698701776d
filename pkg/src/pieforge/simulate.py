"""Time integration of a discretized PIE with the trapezoidal rule.

The discrete system is

    M_T x' = M_A x + M_B1 w + M_B2 u - M_Tw w' - M_Tu u'

and one step of size ``dt`` solves

    (M_T - dt/2 M_A) x+ = (M_T + dt/2 M_A) x + dt/2 (f + f+)

with ``f`` collecting the input terms.  The step matrix is factored once.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .discretize import DiscretePie, SpectralBasis, discretize_pie, spectral_derivative
from .expr import compile_expr

__all__ = ["SignalSpec", "SimConfig", "Trajectory", "SimulationError", "run",
           "reconstruct_trajectory", "pencil_eigenvalues", "gain_row", "initial_state",
           "write_outputs_csv", "write_states_csv", "read_states_csv"]

COND_LIMIT = 1e13


class SimulationError(RuntimeError):
    """The step matrix is singular or too ill-conditioned, or inputs are missing."""


class SignalSpec:
    """A vector-valued input signal and optionally its time derivative.

    ``value`` may be a callable ``f(t) -> array``, a list of expression
    strings in ``t`` (one per component), a single expression, a constant,
    or a sampled series ``{"t": [...], "values": [[...], ...]}`` interpolated
    linearly.
    """

    def __init__(self, value, derivative=None, size=None):
        self.size = size
        self._f = self._compile(value)
        self._df = self._compile(derivative) if derivative is not None else None

    def _compile(self, spec):
        if spec is None:
            return None
        if callable(spec):
            return lambda t: np.atleast_1d(np.asarray(spec(t), dtype=float))
        if isinstance(spec, dict):
            ts = np.asarray(spec["t"], dtype=float)
            vals = np.atleast_2d(np.asarray(spec["values"], dtype=float))
            if vals.shape[0] == ts.size and vals.shape[1] != ts.size:
                vals = vals.T
            return lambda t: np.array([np.interp(t, ts, row) for row in vals])
        comps = spec if isinstance(spec, (list, tuple)) else [spec]
        fns = [compile_expr(c, "t") for c in comps]
        return lambda t: np.array([float(f(t)) for f in fns])

    @property
    def has_derivative(self):
        return self._df is not None

    def __call__(self, t):
        return self._f(t)

    def derivative(self, t):
        if self._df is None:
            raise SimulationError("signal derivative requested but not supplied")
        return self._df(t)


@dataclass
class SimConfig:
    dt: float = 1e-3
    t_end: float = 1.0
    M: int = 32
    stride: int = 1
    x0: list = None
    xf0: list = None
    primal0: list = None

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.t_end < 0:
            raise ValueError("t_end must be nonnegative")
        if self.stride < 1:
            raise ValueError("stride must be at least 1")


@dataclass
class Trajectory:
    t: np.ndarray
    x: np.ndarray
    z: np.ndarray
    y: np.ndarray
    w: np.ndarray
    u: np.ndarray
    energy: np.ndarray
    disc: DiscretePie = field(repr=False, default=None)

    def state_channels(self, k):
        return self.disc.split_state(self.x[k])


def _zero_signal(size):
    return SignalSpec(lambda t: np.zeros(size), lambda t: np.zeros(size))


def _channel_values(spec, basis: SpectralBasis):
    if spec is None:
        return np.zeros(basis.size)
    if callable(spec):
        return np.asarray(spec(basis.nodes), dtype=float)
    if isinstance(spec, (list, tuple, np.ndarray)) and np.size(spec) == basis.size:
        return np.asarray(spec, dtype=float)
    return compile_expr(spec, "s")(basis.nodes)


def initial_state(disc: DiscretePie, cfg: SimConfig) -> np.ndarray:
    """Initial PIE state from ``cfg.x0`` and either ``cfg.xf0`` or ``cfg.primal0``.

    A primal initial profile is converted to the fundamental state by
    differentiating every state as often as its continuity class requires.
    """
    basis = disc.basis
    nx, nxh = disc.dims["x"], disc.dims["xhat"]
    x0 = np.zeros(nx) if cfg.x0 is None else np.asarray(cfg.x0, dtype=float).reshape(nx)
    ch = np.zeros((nxh, basis.size))
    if cfg.xf0 is not None:
        for i, spec in enumerate(cfg.xf0):
            ch[i] = _channel_values(spec, basis)
    elif cfg.primal0 is not None:
        cont = getattr(disc.pie, "continuity", None)
        if cont is None:
            raise SimulationError("a primal initial profile needs the continuity vector of the model")
        off = 0
        for k, count in enumerate(cont):
            for j in range(count):
                vals = _channel_values(cfg.primal0[off + j], basis)
                ch[off + j] = spectral_derivative(vals, basis, k)
            off += count
    return disc.join_state(x0, ch)


def gain_row(disc: DiscretePie, K_x=None, k_xf=None) -> np.ndarray:
    """Discrete row(s) of ``u = K_x x + sum_c int k_c(s) xf_c(s) ds``.

    ``k_xf`` is a list (per input row) of lists (per channel) of expressions
    in ``s`` or callables.
    """
    nu = disc.dims["u"]
    basis = disc.basis
    nx, nxh = disc.dims["x"], disc.dims["xhat"]
    K = np.zeros((nu, disc.n_state))
    if K_x is not None:
        K[:, :nx] = np.asarray(K_x, dtype=float).reshape(nu, nx)
    if k_xf is not None:
        rows = k_xf if isinstance(k_xf[0], (list, tuple)) else [k_xf]
        for r, row in enumerate(rows):
            for c, spec in enumerate(row):
                vals = _channel_values(spec, basis)
                K[r, nx + c * basis.size: nx + (c + 1) * basis.size] = vals * basis.weights
    return K


def _energy_weights(disc: DiscretePie) -> np.ndarray:
    nx, nxh = disc.dims["x"], disc.dims["xhat"]
    return np.concatenate([np.ones(nx), np.tile(disc.basis.weights, nxh)])


def run(pie, cfg: SimConfig, w: SignalSpec = None, u: SignalSpec = None, K=None,
        disc: DiscretePie = None) -> Trajectory:
    """Integrate from ``t = 0`` to ``cfg.t_end`` with constant step ``cfg.dt``.

    ``pie`` is a :class:`~pieforge.converter.PieSystem` (discretized with
    ``cfg.M``) unless ``disc`` is supplied.  ``K`` is an optional static
    state-feedback gain (from :func:`gain_row`) added to ``u``.
    """
    disc = disc or discretize_pie(pie, SpectralBasis(cfg.M, pie.dom[0], pie.dom[1]))
    Mx = disc.mats
    nw, nu = disc.dims["w"], disc.dims["u"]
    w = w or _zero_signal(nw)
    u = u or _zero_signal(nu)
    needs_wdot = nw and np.any(Mx["Tw"])
    needs_udot = nu and np.any(Mx["Tu"])
    if needs_wdot and not w.has_derivative:
        raise SimulationError("Tw is nonzero, so the derivative of w must be supplied")
    if needs_udot and not u.has_derivative:
        raise SimulationError("Tu is nonzero, so the derivative of u must be supplied")

    T, A = Mx["T"], Mx["A"]
    if K is not None:
        K = np.atleast_2d(np.asarray(K, dtype=float))
        T = T + Mx["Tu"] @ K
        A = A + Mx["B2"] @ K
    dt = float(cfg.dt)
    lhs = T - 0.5 * dt * A
    cond = np.linalg.cond(lhs)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SimulationError(f"step matrix is singular or ill-conditioned (cond = {cond:.3g})")
    lu = scipy.linalg.lu_factor(lhs)
    rhs_mat = T + 0.5 * dt * A

    def forcing(t):
        wt, ut = w(t), u(t)
        f = Mx["B1"] @ wt + Mx["B2"] @ ut
        if needs_wdot:
            f = f - Mx["Tw"] @ w.derivative(t)
        if needs_udot:
            f = f - Mx["Tu"] @ u.derivative(t)
        return f, wt, ut

    steps = int(round(cfg.t_end / dt))
    x = initial_state(disc, cfg)
    ew = _energy_weights(disc)
    rec_t, rec_x, rec_z, rec_y, rec_w, rec_u, rec_e = [], [], [], [], [], [], []

    def record(t, x, wt, ut):
        uu = ut + (K @ x if K is not None else 0.0)
        rec_t.append(t)
        rec_x.append(x.copy())
        rec_z.append(Mx["C1"] @ x + Mx["D11"] @ wt + Mx["D12"] @ uu)
        rec_y.append(Mx["C2"] @ x + Mx["D21"] @ wt + Mx["D22"] @ uu)
        rec_w.append(wt)
        rec_u.append(uu)
        Tx = T @ x
        rec_e.append(float(np.sum(ew * Tx * Tx)))

    f, wt, ut = forcing(0.0)
    record(0.0, x, wt, ut)
    for k in range(steps):
        t1 = (k + 1) * dt
        f1, wt1, ut1 = forcing(t1)
        x = scipy.linalg.lu_solve(lu, rhs_mat @ x + 0.5 * dt * (f + f1))
        if not np.all(np.isfinite(x)):
            raise SimulationError(f"non-finite state at t = {t1:g}")
        f = f1
        if (k + 1) % cfg.stride == 0 or k + 1 == steps:
            record(t1, x, wt1, ut1)
    arr = lambda seq, width: np.array(seq).reshape(len(seq), width)  # noqa: E731
    return Trajectory(np.array(rec_t), np.array(rec_x), arr(rec_z, disc.dims["z"]), arr(rec_y, disc.dims["y"]),
                      arr(rec_w, nw), arr(rec_u, nu), np.array(rec_e), disc)


def reconstruct_trajectory(traj: Trajectory):
    """Primal states ``T x + Tw w + Tu u`` at every recorded step.

    Returns ``(x_ode, channels)`` with ``channels`` of shape
    ``(steps, n_xhat, M+1)`` sampled at the basis nodes.
    """
    disc = traj.disc
    Mx = disc.mats
    full = traj.x @ Mx["T"].T
    if disc.dims["w"]:
        full = full + traj.w @ Mx["Tw"].T
    if disc.dims["u"]:
        full = full + traj.u @ Mx["Tu"].T
    return disc.split_state(full)


def pencil_eigenvalues(disc: DiscretePie, K=None) -> np.ndarray:
    """Finite generalized eigenvalues of ``(M_A, M_T)``, optionally closed loop."""
    T, A = disc.mats["T"], disc.mats["A"]
    if K is not None:
        K = np.atleast_2d(np.asarray(K, dtype=float))
        T = T + disc.mats["Tu"] @ K
        A = A + disc.mats["B2"] @ K
    ev = scipy.linalg.eigvals(A, T)
    return ev[np.isfinite(ev)]


def write_outputs_csv(traj: Trajectory, path) -> None:
    """CSV with columns ``t, z1.., y1.., energy``."""
    nz, ny = traj.z.shape[1], traj.y.shape[1]
    header = ["t"] + [f"z{i + 1}" for i in range(nz)] + [f"y{i + 1}" for i in range(ny)] + ["energy"]
    data = np.column_stack([traj.t, traj.z, traj.y, traj.energy])
    np.savetxt(path, data, delimiter=",", header=",".join(header), comments="", fmt="%.17g")


def write_states_csv(traj: Trajectory, path) -> None:
    """CSV of the PIE state: one row per (step, node).

    Columns are ``t, s, x1.., w1.., u1.., xf1..``.  ODE states and input
    values are repeated on every node row of a step.
    """
    disc = traj.disc
    nodes = disc.basis.nodes
    nx, nxh = disc.dims["x"], disc.dims["xhat"]
    nw, nu = traj.w.shape[1], traj.u.shape[1]
    rows = []
    for k, t in enumerate(traj.t):
        xo, ch = disc.split_state(traj.x[k])
        for j, s in enumerate(nodes):
            rows.append(np.concatenate([[t, s], xo, traj.w[k], traj.u[k], ch[:, j]]))
    header = (["t", "s"] + [f"x{i + 1}" for i in range(nx)] + [f"w{i + 1}" for i in range(nw)]
              + [f"u{i + 1}" for i in range(nu)] + [f"xf{i + 1}" for i in range(nxh)])
    np.savetxt(path, np.array(rows).reshape(len(rows), len(header)), delimiter=",",
               header=",".join(header), comments="", fmt="%.17g")


def read_states_csv(path):
    """Inverse of :func:`write_states_csv`.

    Returns ``(t, nodes, steps)`` where each step is a dict with keys ``x``,
    ``w``, ``u`` (vectors) and ``xf`` (array ``(channels, nodes)``).
    """
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    data = np.atleast_2d(np.loadtxt(path, delimiter=",", skiprows=1))
    if data.size == 0 or header[:2] != ["t", "s"]:
        raise ValueError(f"{path}: not a state CSV (expected header starting with t,s)")
    cols = {key: [i for i, h in enumerate(header) if h.rstrip("0123456789") == key]
            for key in ("x", "w", "u", "xf")}
    ts = np.unique(data[:, 0])
    nodes = data[data[:, 0] == ts[0], 1]
    steps = []
    for t in ts:
        block = data[data[:, 0] == t]
        if len(block) != len(nodes):
            raise ValueError(f"{path}: step t={t:g} has {len(block)} rows, expected {len(nodes)}")
        steps.append({"x": block[0, cols["x"]], "w": block[0, cols["w"]], "u": block[0, cols["u"]],
                      "xf": block[:, cols["xf"]].T})
    return ts, nodes, steps
