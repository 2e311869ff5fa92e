"""Leading-order semiclassical propagation of wavepacket parameters.

The parameter flow

    dq/dt = p,    dp/dt = -grad V(q),
    dQ/dt = P,    dP/dt = -Hess V(q) Q,

with the action S(t) accumulating (|p|^2/2 - V(q)), transports a wavepacket
family along the classical trajectory.  A Stoermer-Verlet splitting treats
the vector and matrix halves with the same kick-drift-kick pattern, which
preserves the symplectic pair conditions exactly for quadratic potentials.
The square-root branch of det(Q_t)^{-1/2} is tracked by continuity from
step to step, since the flow routinely winds around the branch cut.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .params import ParameterSet, require_valid, validate

__all__ = [
    "QuadraticPotential",
    "CallablePotential",
    "harmonic_potential",
    "quartic_potential",
    "TrajectoryState",
    "initial_state",
    "step",
    "propagate",
    "harmonic_reference",
    "write_trajectory_csv",
]


@dataclass(frozen=True)
class QuadraticPotential:
    """V(x) = x^T H x / 2 + g^T x + v0 with symmetric H."""

    H: np.ndarray
    g: np.ndarray = None
    v0: float = 0.0

    def __post_init__(self):
        H = np.atleast_2d(np.asarray(self.H, dtype=float))
        if np.max(np.abs(H - H.T)) > 1e-12:
            raise ValueError("quadratic potential needs a symmetric Hessian")
        object.__setattr__(self, "H", H)
        g = np.zeros(H.shape[0]) if self.g is None else np.asarray(self.g, dtype=float)
        object.__setattr__(self, "g", g)

    def value(self, q):
        return 0.5 * q @ self.H @ q + self.g @ q + self.v0

    def gradient(self, q):
        return self.H @ q + self.g

    def hessian(self, q):
        return self.H


@dataclass(frozen=True)
class CallablePotential:
    """Potential given by callables for the value, gradient, and Hessian."""

    value_fn: callable
    gradient_fn: callable
    hessian_fn: callable

    def value(self, q):
        return float(self.value_fn(q))

    def gradient(self, q):
        return np.asarray(self.gradient_fn(q), dtype=float)

    def hessian(self, q):
        return np.atleast_2d(np.asarray(self.hessian_fn(q), dtype=float))


def harmonic_potential(d=1, omega=1.0):
    return QuadraticPotential(omega**2 * np.eye(d))


def quartic_potential(d=1, strength=0.25):
    """V(x) = strength * sum_j x_j^4 (anharmonic test case)."""

    return CallablePotential(
        value_fn=lambda q: strength * float(np.sum(np.asarray(q) ** 4)),
        gradient_fn=lambda q: 4 * strength * np.asarray(q) ** 3,
        hessian_fn=lambda q: np.diag(12 * strength * np.asarray(q) ** 2),
    )


@dataclass(frozen=True)
class TrajectoryState:
    """Parameters, accumulated action, and the tracked determinant branch."""

    t: float
    params: ParameterSet
    S: float
    det_phase: complex

    def invariant_residual(self):
        r = validate(self.params)
        return max(r.symmetry_residual, r.normalization_residual)


def _continued_det_phase(Q, previous):
    """det(Q)^{-1/2} on the branch nearest the previous value."""
    root = 1.0 / np.sqrt(np.linalg.det(Q))
    return root if abs(root - previous) <= abs(-root - previous) else -root


def initial_state(params, validation_tol=1e-10):
    require_valid(params, validation_tol)
    return TrajectoryState(
        t=0.0,
        params=params,
        S=0.0,
        det_phase=complex(1.0 / np.sqrt(np.linalg.det(params.Q))),
    )


def step(state, potential, dt, validation_tol=1e-8):
    """One kick-drift-kick step applied jointly to (q, p) and (Q, P).

    The Hessian is evaluated at the position of each kick.  The action
    advances by the midpoint rule, matching the integrator's order.  Steps
    that drift out of the symplectic conditions beyond the tolerance are
    rejected with a diagnostic.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    params = state.params
    q, p = params.q.copy(), params.p.copy()
    Q, P = params.Q.copy(), params.P.copy()

    half = 0.5 * dt
    p_half = p - half * potential.gradient(q)
    P_half = P - half * potential.hessian(q) @ Q
    q_new = q + dt * p_half
    Q_new = Q + dt * P_half
    p_new = p_half - half * potential.gradient(q_new)
    P_new = P_half - half * potential.hessian(q_new) @ Q_new

    s_new = state.S + dt * (
        0.5 * float(p_half @ p_half) - potential.value(0.5 * (q + q_new))
    )
    new_params = ParameterSet(params.epsilon, q_new, p_new, Q_new, P_new)
    report = validate(new_params, validation_tol)
    if not report.passed:
        raise RuntimeError(
            f"step to t={state.t + dt:g} rejected, symplectic drift beyond "
            f"{validation_tol:g}:\n{report}"
        )
    return TrajectoryState(
        t=state.t + dt,
        params=new_params,
        S=s_new,
        det_phase=_continued_det_phase(Q_new, state.det_phase),
    )


def propagate(state0, potential, T, dt, validation_tol=1e-8):
    """Propagate to time T in steps of dt, returning the full trajectory.

    dt must divide T up to rounding.  On a rejected step the partial
    trajectory is attached to the raised error.
    """
    if T <= 0:
        raise ValueError("T must be positive")
    n_steps = max(1, round(T / dt))
    if abs(n_steps * dt - T) > 0.51 * dt:
        raise ValueError("dt must divide T to within one step")
    states = [state0]
    for _ in range(n_steps):
        try:
            states.append(step(states[-1], potential, dt, validation_tol))
        except RuntimeError as exc:
            exc.partial_trajectory = states
            raise
    return states


def harmonic_reference(state0, t, H):
    """Exact state at time t for the pure quadratic potential x^T H x / 2.

    The linear flow is the matrix exponential of [[0, Id], [-H, 0]] t applied
    to both the vector (q, p) and matrix (Q, P) data; the action has the
    closed form (p_t . q_t - p_0 . q_0) / 2.
    """
    H = np.atleast_2d(np.asarray(H, dtype=float))
    d = H.shape[0]
    params = state0.params
    block = np.block([[np.zeros((d, d)), np.eye(d)], [-H, np.zeros((d, d))]])
    flow = expm(block * t)
    qp = flow @ np.concatenate([params.q, params.p])
    QP = flow @ np.vstack([params.Q, params.P])
    q_t, p_t = qp[:d], qp[d:]
    Q_t, P_t = QP[:d], QP[d:]
    new_params = ParameterSet(params.epsilon, q_t, p_t, Q_t, P_t)
    S_t = state0.S + 0.5 * (float(p_t @ q_t) - float(params.p @ params.q))
    return TrajectoryState(
        t=state0.t + t,
        params=new_params,
        S=S_t,
        det_phase=_continued_det_phase(Q_t, state0.det_phase),
    )


def write_trajectory_csv(states, path, metadata=None):
    """Trajectory CSV: t, q, p, Re/Im of Q and P (row-major), S, residual.

    Metadata lines are '#'-prefixed; floats are serialized with round-trip
    precision so identical runs diff identically.
    """
    d = states[0].params.d
    header = (
        ["t"]
        + [f"q{i}" for i in range(d)]
        + [f"p{i}" for i in range(d)]
        + [f"Q{i}{j}_{part}" for i in range(d) for j in range(d) for part in ("re", "im")]
        + [f"P{i}{j}_{part}" for i in range(d) for j in range(d) for part in ("re", "im")]
        + ["S", "symplectic_residual"]
    )
    with open(path, "w", newline="") as fh:
        for line in metadata or []:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for st in states:
            pr = st.params
            row = [repr(float(st.t))]
            row += [repr(float(v)) for v in pr.q]
            row += [repr(float(v)) for v in pr.p]
            for M in (pr.Q, pr.P):
                for i in range(d):
                    for j in range(d):
                        row += [repr(float(M[i, j].real)), repr(float(M[i, j].imag))]
            row += [repr(float(st.S)), repr(float(st.invariant_residual()))]
            writer.writerow(row)
