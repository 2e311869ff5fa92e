"""Wavepacket parameter sets and their symplectic linear algebra.

A parameter set (epsilon, q, p, Q, P) is admissible when the complex width
matrices satisfy

    Q^T P - P^T Q = 0,        Q^* P - P^* Q = 2i Id,

equivalently when the real block matrix F = [[Re Q, Im Q], [Re P, Im P]] is
symplectic.  Everything downstream (wavepacket evaluation, phase-space
transforms, propagation) refuses parameter sets that fail these conditions.
"""

import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ParameterSet",
    "ValidationReport",
    "SymplecticEmbedding",
    "SqueezeData",
    "ValidationError",
    "hermite_params",
    "validate",
    "require_valid",
    "width_matrix",
    "symplectic_embed",
    "from_squeeze",
    "to_squeeze",
    "polar_normalize",
    "fourier_dual",
    "random_parameter_set",
    "hermitian_sqrt",
    "polar_factors",
    "det_rsqrt_posreal",
]

DEFAULT_TOL = 1e-10


class ValidationError(ValueError):
    """Raised when an operation receives parameters violating the symplectic conditions."""


def _as_vector(v, name):
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if v.ndim != 1:
        raise ValueError(f"{name} must be a vector, got shape {v.shape}")
    return v


def _as_matrix(m, name):
    m = np.atleast_2d(np.asarray(m, dtype=complex))
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {m.shape}")
    return m


@dataclass(frozen=True)
class ParameterSet:
    """The tuple (epsilon, q, p, Q, P) defining one wavepacket family."""

    epsilon: float
    q: np.ndarray
    p: np.ndarray
    Q: np.ndarray
    P: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "epsilon", float(self.epsilon))
        object.__setattr__(self, "q", _as_vector(self.q, "q"))
        object.__setattr__(self, "p", _as_vector(self.p, "p"))
        object.__setattr__(self, "Q", _as_matrix(self.Q, "Q"))
        object.__setattr__(self, "P", _as_matrix(self.P, "P"))
        d = self.q.shape[0]
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        for name in ("p",):
            if getattr(self, name).shape != (d,):
                raise ValueError("q and p must have equal length")
        for name in ("Q", "P"):
            if getattr(self, name).shape != (d, d):
                raise ValueError(f"{name} must be {d}x{d} to match q")
        for name in ("q", "p", "Q", "P"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"{name} contains non-finite entries")
        for arr in (self.q, self.p, self.Q, self.P):
            arr.setflags(write=False)

    @property
    def d(self):
        return self.q.shape[0]

    def with_center(self, q, p):
        return ParameterSet(self.epsilon, q, p, self.Q, self.P)


@dataclass(frozen=True)
class ValidationReport:
    """Named residuals of the symplectic conditions, plus the verdict."""

    tol: float
    symmetry_residual: float        # max |Q^T P - P^T Q|
    normalization_residual: float   # max |Q^* P - P^* Q - 2i Id|
    min_eig_im_width: float         # smallest eigenvalue of Im(P Q^{-1})
    min_sv_q: float
    min_sv_p: float
    passed: bool

    def __str__(self):
        rows = [
            ("|Q^T P - P^T Q|_max", self.symmetry_residual, f"<= {self.tol:g}"),
            ("|Q^* P - P^* Q - 2i|_max", self.normalization_residual, f"<= {self.tol:g}"),
            ("min eig Im(PQ^-1)", self.min_eig_im_width, "> 0"),
            ("min sv(Q)", self.min_sv_q, f"> {self.tol:g}"),
            ("min sv(P)", self.min_sv_p, f"> {self.tol:g}"),
        ]
        lines = [f"  {name:<26} {value: .3e}   (require {req})" for name, value, req in rows]
        lines.append("  verdict: " + ("PASS" if self.passed else "FAIL"))
        return "\n".join(lines)


@dataclass(frozen=True)
class SymplecticEmbedding:
    """Real 2d x 2d symplectic matrix built from Re/Im blocks of (Q, P)."""

    F: np.ndarray
    F_inv: np.ndarray


@dataclass(frozen=True)
class SqueezeData:
    """Squeeze matrix W and the unitary polar phase V of Q - iP."""

    W: np.ndarray
    V: np.ndarray


def hermite_params(d=1, epsilon=1.0):
    """The reference parameters (q=p=0, Q=Id, P=i Id) reducing to Hermite functions."""
    eye = np.eye(d)
    return ParameterSet(epsilon, np.zeros(d), np.zeros(d), eye, 1j * eye)


def _residuals(params):
    cached = getattr(params, "_residual_cache", None)
    if cached is not None:
        return cached
    Q, P = params.Q, params.P
    d = params.d
    sym = float(np.max(np.abs(Q.T @ P - P.T @ Q)))
    norm = float(np.max(np.abs(Q.conj().T @ P - P.conj().T @ Q - 2j * np.eye(d))))
    sv_q = float(np.linalg.svd(Q, compute_uv=False)[-1])
    sv_p = float(np.linalg.svd(P, compute_uv=False)[-1])
    try:
        im_c = np.linalg.eigvalsh((np.linalg.solve(Q.T, P.T).T).imag)
        min_eig = float(im_c[0])
    except np.linalg.LinAlgError:
        min_eig = -np.inf
    cached = (sym, norm, min_eig, sv_q, sv_p)
    object.__setattr__(params, "_residual_cache", cached)
    return cached


def validate(params, tol=DEFAULT_TOL):
    """Check the symplectic conditions and invertibility; report all residuals."""
    sym, norm, min_eig, sv_q, sv_p = _residuals(params)
    passed = sym <= tol and norm <= tol and min_eig > 0 and sv_q > tol and sv_p > tol
    return ValidationReport(tol, sym, norm, min_eig, sv_q, sv_p, passed)


def require_valid(params, tol=DEFAULT_TOL):
    """Validate (cached per ParameterSet instance), raising on failure."""
    report = validate(params, tol)
    if not report.passed:
        raise ValidationError("parameter set fails symplectic validation:\n" + str(report))


def width_matrix(params, tol=DEFAULT_TOL):
    """The complex symmetric width matrix C = P Q^{-1}."""
    require_valid(params, tol)
    return np.linalg.solve(params.Q.T, params.P.T).T


def symplectic_embed(params, tol=DEFAULT_TOL):
    """Assemble F = [[Re Q, Im Q], [Re P, Im P]] and its symplectic inverse -J F^T J."""
    require_valid(params, tol)
    Q, P = params.Q, params.P
    d = params.d
    F = np.block([[Q.real, Q.imag], [P.real, P.imag]])
    J = np.block([[np.zeros((d, d)), -np.eye(d)], [np.eye(d), np.zeros((d, d))]])
    F_inv = -J @ F.T @ J
    return SymplecticEmbedding(F, F_inv)


def hermitian_sqrt(A, tol=1e-12):
    """Principal square root of a Hermitian positive semidefinite matrix.

    Eigenvalues in [-tol, 0) are clamped to zero; smaller ones raise.
    """
    A = np.asarray(A, dtype=complex)
    w, V = np.linalg.eigh(0.5 * (A + A.conj().T))
    if np.min(w) < -tol:
        raise ValueError(f"matrix is not positive semidefinite (min eig {np.min(w):.3e})")
    w = np.clip(w, 0.0, None)
    return (V * np.sqrt(w)) @ V.conj().T


def polar_factors(A, tol=1e-12):
    """Decompose A = |A| V* with |A| = (A A*)^{1/2} Hermitian and V unitary."""
    mod = hermitian_sqrt(A @ A.conj().T, tol)
    V = np.linalg.solve(mod, A).conj().T
    return mod, V


def det_rsqrt_posreal(A):
    """det(A)^{-1/2} for complex symmetric A with positive definite real part.

    Computed as the product of principal inverse square roots of the
    eigenvalues, which all lie in the right half plane; this is the branch
    produced by the Gaussian integral of exp(-x^T A x).
    """
    lam = np.linalg.eigvals(np.asarray(A, dtype=complex))
    if np.min(lam.real) <= 0:
        raise ValueError("matrix eigenvalues must have positive real part")
    return complex(np.prod(lam ** -0.5))


def from_squeeze(q, p, W, epsilon=1.0, tol=DEFAULT_TOL):
    """Build the parameter set of the squeezed state with squeeze matrix W.

    Q = (Id + W)(Id - W* W)^{-1/2} and P = i (Id - W)(Id - W* W)^{-1/2},
    which satisfy the symplectic conditions whenever W = W^T and all
    eigenvalues of W* W lie strictly below one.
    """
    W = _as_matrix(W, "W")
    d = W.shape[0]
    if np.max(np.abs(W - W.T)) > tol:
        raise ValueError("squeeze matrix W must be complex symmetric")
    gram = W.conj().T @ W
    if np.max(np.linalg.eigvalsh(gram)) >= 1.0:
        raise ValueError("W* W must have all eigenvalues strictly below 1")
    root = np.linalg.inv(hermitian_sqrt(np.eye(d) - gram, tol))
    Q = (np.eye(d) + W) @ root
    P = 1j * (np.eye(d) - W) @ root
    params = ParameterSet(epsilon, q, p, Q, P)
    require_valid(params, tol)
    return params


def to_squeeze(params, tol=DEFAULT_TOL):
    """Extract the squeeze matrix W = (Q + iP)(Q - iP)^{-1} and the polar phase V.

    V comes from Q - iP = |Q - iP| V*.  Rebuilding parameters with
    from_squeeze(q, p, W) yields (QV, PV), so right-multiplying that output
    by V* recovers (Q, P).
    """
    require_valid(params, tol)
    Q, P = params.Q, params.P
    A = Q - 1j * P
    try:
        W = np.linalg.solve(A.T, (Q + 1j * P).T).T
    except np.linalg.LinAlgError as exc:  # pragma: no cover - impossible for valid params
        raise RuntimeError("Q - iP is singular despite valid parameters") from exc
    W = 0.5 * (W + W.T)
    _, V = polar_factors(A, tol)
    return SqueezeData(W, V)


def polar_normalize(params, tol=DEFAULT_TOL):
    """Rotate (Q, P) to the representative (|Q|, P U) with |Q| Hermitian.

    Q = |Q| U* with unitary U; the rotated pair satisfies the symplectic
    conditions and shares the width matrix P Q^{-1}.
    """
    require_valid(params, tol)
    modQ, U = polar_factors(params.Q, tol)
    out = ParameterSet(params.epsilon, params.q, params.p, modQ, params.P @ U)
    require_valid(out, tol)
    return out, U


def fourier_dual(params, tol=DEFAULT_TOL):
    """Parameter map of the scaled Fourier transform, with its exact phase.

    The Fourier transform of every member of the family [q, p, Q, P] is the
    corresponding member of [p, -q, P, -Q] times one k-independent unimodular
    constant

        phase = det(Q)^{-1/2} det(-iC)^{-1/2} det(P)^{1/2} exp(-i p^T q / eps),

    where all determinant roots are principal.  The determinant factor keeps
    the identity exact for the principal-branch normalization used by
    gaussian_eval; it reduces to exp(i pi/4) per dimension for the Hermite
    case, where the familiar eigenvalue relation is recovered because
    [0, 0, P, -Q] then regenerates the same family.
    """
    require_valid(params, tol)
    C = width_matrix(params, tol)
    dual = ParameterSet(params.epsilon, params.p, -params.q, params.P, -params.Q)
    require_valid(dual, tol)
    sigma = (
        det_rsqrt_posreal(-1j * C)
        / np.sqrt(np.linalg.det(params.Q))
        * np.sqrt(np.linalg.det(params.P))
    )
    phase = sigma * np.exp(-1j * params.p @ params.q / params.epsilon)
    return dual, complex(phase)


def random_parameter_set(rng, d=1, epsilon=1.0, real_q=False):
    """Draw a random admissible parameter set (for tests, demos, benchmarks).

    Built as Q0 = B^{-1/2}, P0 = (A + iB) Q0 from a random real symmetric A
    and random SPD B, then rotated by a random unitary, which exhausts the
    admissible pairs up to the rotation.  With real_q=True the unitary
    rotation is skipped and Q stays real symmetric.
    """
    A = rng.standard_normal((d, d))
    A = 0.5 * (A + A.T)
    B = rng.standard_normal((d, d))
    B = B @ B.T + 0.3 * np.eye(d)
    Q0 = np.linalg.inv(hermitian_sqrt(B))
    P0 = (A + 1j * B) @ Q0
    if not real_q:
        Z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        V, _ = np.linalg.qr(Z)
        Q0, P0 = Q0 @ V, P0 @ V
    q = rng.uniform(-1, 1, size=d)
    p = rng.uniform(-1, 1, size=d)
    params = ParameterSet(epsilon, q, p, Q0, P0)
    require_valid(params)
    return params
