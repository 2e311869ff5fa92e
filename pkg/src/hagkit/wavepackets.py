"""Construction and evaluation of Hagedorn wavepackets.

The k-th wavepacket of a parameter family is a multivariate polynomial
p_k times the family's complex Gaussian, normalized by sqrt(2^|k| k!).
Production evaluation runs the vector three-term recurrence once per point
and shares the sweep across all indices of a downward-closed set; the sum
rule, Rodriguez-type generation, and Gaussian moment recursion are kept as
independent cross-validation paths.
"""

import math

import numpy as np

from ._polynd import PolyND
from .indices import CoefficientVector, IndexSet, unit_vectors
from .params import ParameterSet, det_rsqrt_posreal, require_valid, width_matrix

__all__ = [
    "gaussian_eval",
    "polys_eval",
    "wavepacket_eval",
    "wavepacket_table",
    "poly_translate",
    "poly_rodriguez",
    "gaussian_moment",
    "raise_coeffs",
    "lower_coeffs",
    "position_action",
    "momentum_action",
    "translate_params",
    "heisenberg_weyl_apply",
    "eigenspace_indices",
    "eigenspace_vector",
    "norm_factor",
    "reconstruct_on_grid",
]

RODRIGUEZ_DEGREE_CAP = 8
EIGENSPACE_SIZE_CAP = 256


def _points(x, d, dtype=float):
    """Coerce x to an (n, d) array; remember whether input was one point."""
    x = np.asarray(x, dtype=dtype)
    single = x.ndim == 1 or (d == 1 and x.ndim == 0)
    pts = np.atleast_1d(x).reshape(-1, d)
    return pts, single


def norm_factor(k):
    """sqrt(2^|k| k!) for a multi-index k (k! is the product of factorials)."""
    n2 = 2 ** sum(k)
    for kj in k:
        n2 *= math.factorial(kj)
    return math.sqrt(n2)


def gaussian_eval(params: ParameterSet, x):
    """Evaluate the family's normalized complex Gaussian at points x.

    The determinant branch of det(Q)^{-1/2} is the principal complex square
    root, fixed once per parameter set; all phase-sensitive identities in
    this package are stated and tested under that branch.
    """
    require_valid(params)
    pts, single = _points(x, params.d)
    C = width_matrix(params)
    u = pts - params.q
    quad = np.einsum("ni,ij,nj->n", u, C, u)
    phase = np.exp(1j * (0.5 * quad + u @ params.p) / params.epsilon)
    amp = (np.pi * params.epsilon) ** (-params.d / 4) / np.sqrt(np.linalg.det(params.Q))
    vals = amp * phase
    return vals[0] if single else vals


def polys_eval(params: ParameterSet, iset: IndexSet, x):
    """Sweep the polynomial three-term recurrence over a downward-closed set.

    Returns a dict multi-index -> values of p_k at the points x (complex
    arguments allowed).  One sweep serves every index of the set:

        p_{k+e_j} = (2/sqrt(eps)) (Q^{-1}(x-q))_j p_k
                    - 2 [Q^{-1} conj(Q) (k_j p_{k-e_j})_j]_j .
    """
    require_valid(params)
    if not iset.downward_closed:
        raise ValueError("polynomial sweep needs a downward-closed index set")
    if iset.d != params.d:
        raise ValueError("index set dimension does not match parameters")
    pts, single = _points(x, params.d, dtype=complex)
    y = np.linalg.solve(params.Q, (pts - params.q).T).T * (2 / math.sqrt(params.epsilon))
    M = 2 * np.linalg.solve(params.Q, np.conj(params.Q))
    table = {}
    zero = (0,) * params.d
    table[zero] = np.ones(len(pts), dtype=complex)
    for k in iset:
        if k == zero:
            continue
        j = next(i for i, v in enumerate(k) if v > 0)
        m = k[:j] + (k[j] - 1,) + k[j + 1 :]
        acc = y[:, j] * table[m]
        for l in range(params.d):
            if m[l] > 0:
                acc = acc - M[j, l] * m[l] * table[m[:l] + (m[l] - 1,) + m[l + 1 :]]
        table[k] = acc
    if single:
        table = {k: v[0] for k, v in table.items()}
    return table


def wavepacket_table(params: ParameterSet, iset: IndexSet, x):
    """Values of the normalized wavepackets for every index of the set at x.

    Runs the recurrence directly on normalized values (overflow-safe), seeded
    by the Gaussian:

        sqrt(k_j+1) phi_{k+e_j} = sqrt(2/eps) (Q^{-1}(x-q))_j phi_k
                                  - [Q^{-1} conj(Q) (sqrt(k_j) phi_{k-e_j})_j]_j .
    """
    require_valid(params)
    if not iset.downward_closed:
        raise ValueError("wavepacket sweep needs a downward-closed index set")
    pts, single = _points(x, params.d)
    y = np.linalg.solve(params.Q, (pts - params.q).T).T * math.sqrt(2 / params.epsilon)
    M = np.linalg.solve(params.Q, np.conj(params.Q))
    zero = (0,) * params.d
    table = {zero: np.atleast_1d(gaussian_eval(params, pts))}
    for k in iset:
        if k == zero:
            continue
        j = next(i for i, v in enumerate(k) if v > 0)
        m = k[:j] + (k[j] - 1,) + k[j + 1 :]
        acc = y[:, j] * table[m]
        for l in range(params.d):
            if m[l] > 0:
                acc = acc - M[j, l] * math.sqrt(m[l]) * table[m[:l] + (m[l] - 1,) + m[l + 1 :]]
        table[k] = acc / math.sqrt(k[j])
    if single:
        table = {k: v[0] for k, v in table.items()}
    return table


def wavepacket_eval(params: ParameterSet, k, x):
    """Evaluate one wavepacket phi_k at points x.

    Moderate degrees use the shared polynomial sweep with the exact
    normalization; beyond |k| = 100 the normalized-value recurrence is used
    to avoid factorial overflow (the two paths agree on their overlap).
    """
    k = tuple(int(v) for v in k)
    box = IndexSet.box(k)
    if sum(k) <= 100:
        table = polys_eval(params, box, np.asarray(x, dtype=float))
        vals = table[k] / norm_factor(k) * gaussian_eval(params, x)
    else:
        vals = wavepacket_table(params, box, x)[k]
    if not np.all(np.isfinite(np.atleast_1d(vals))):
        raise OverflowError(f"wavepacket evaluation overflowed at index {k}")
    return vals


def reconstruct_on_grid(params: ParameterSet, coeffs: CoefficientVector, x):
    """Evaluate sum_k c_k phi_k at points x with a single table sweep."""
    table = wavepacket_table(params, coeffs.iset, x)
    pts, single = _points(x, params.d)
    out = np.zeros(len(pts), dtype=complex)
    for k, c in zip(coeffs.iset, coeffs.coeffs):
        if c != 0:
            out += c * np.atleast_1d(table[k])
    return out[0] if single else out


def poly_translate(params: ParameterSet, k, x, z):
    """Translated polynomial value p_k(x + z) from a table at x.

    p_k(x+z) = sum_{nu <= k} binom(k, nu) ((2/sqrt(eps)) Q^{-1} z)^{k-nu} p_nu(x).
    """
    k = tuple(int(v) for v in k)
    box = IndexSet.box(k)
    table = polys_eval(params, box, x)
    u = np.linalg.solve(params.Q, np.asarray(z, dtype=complex)) * (
        2 / math.sqrt(params.epsilon)
    )
    total = 0
    for nu in box:
        binom = math.prod(math.comb(k[j], nu[j]) for j in range(params.d))
        power = math.prod(u[j] ** (k[j] - nu[j]) for j in range(params.d))
        total = total + binom * power * table[nu]
    return total


def _gaussian_sq_exponent(params):
    """G with |phi_0(x)|^2 proportional to exp(-(x-q)^T G (x-q)/eps): G = (QQ*)^{-1}."""
    QQ = params.Q @ params.Q.conj().T
    return np.linalg.inv(QQ.real)


def poly_rodriguez(params: ParameterSet, k, x, degree_cap=RODRIGUEZ_DEGREE_CAP):
    """Generate p_k by repeated directional derivatives of the Gaussian density.

    p_k = |phi_0|^{-2} (-sqrt(eps) Q^* grad)^k |phi_0|^2, carried out exactly
    on the polynomial prefactor (each directional derivative of a
    polynomial-times-Gaussian is again polynomial-times-Gaussian).  This is a
    cross-validation path; degrees above the cap are rejected.
    """
    require_valid(params)
    k = tuple(int(v) for v in k)
    if sum(k) > degree_cap:
        raise ValueError(f"rodriguez path capped at degree {degree_cap}, got |k|={sum(k)}")
    d = params.d
    G = _gaussian_sq_exponent(params)
    A = params.Q.conj().T @ G * (2 / math.sqrt(params.epsilon))
    R = PolyND.constant(1.0, d)
    for j in range(d):
        for _ in range(k[j]):
            # (-sqrt(eps) Q^* grad)_j (R e^{-u^T G u / eps})
            #   = [A_j . u * R - sqrt(eps) (Q^* grad R)_j] e^{...}
            grad = [R.derivative(a) for a in range(d)]
            term = PolyND.linear(0.0, A[j], d) * R
            for a in range(d):
                term = term - math.sqrt(params.epsilon) * params.Q.conj().T[j, a] * grad[a]
            R = term
    u = np.asarray(x, dtype=complex) - params.q
    return R(u)


def gaussian_moment(params: ParameterSet, M, k, z):
    """Gaussian integral of the translated polynomial against a widened weight.

    Computes  integral p_k(x+z) exp(-(x-q)^T (Im C + M)(x-q)/eps) dx  via the
    translation sum rule and the even-moment recursion

        c_0 = (pi eps)^{d/2} det(Im C + M)^{-1/2},   c_nu = 0 for odd |nu|,
        (c_{nu+e_j})_j = -2 (Id + Q^* M Q)^{-1} Q^* M conj(Q) (nu_j c_{nu-e_j})_j.

    The determinant root is the principal branch for matrices with positive
    definite real part; at M = 0 it reduces to |det Q|.
    """
    require_valid(params)
    d = params.d
    k = tuple(int(v) for v in k)
    M = np.asarray(M, dtype=complex)
    C = width_matrix(params)
    imc = np.linalg.inv((params.Q @ params.Q.conj().T).real)
    weight = imc + M
    if np.min(np.linalg.eigvalsh(weight.real + weight.real.T) / 2) <= 0:
        raise ValueError("Im(C) + Re(M) must be positive definite")
    QsMQ = params.Q.conj().T @ M @ params.Q
    lhs = np.eye(d) + QsMQ
    if abs(np.linalg.det(lhs)) < 1e-14:
        raise ValueError("Id + Q^* M Q is not invertible")
    transfer = -2 * np.linalg.solve(lhs, params.Q.conj().T @ M @ np.conj(params.Q))
    c0 = (np.pi * params.epsilon) ** (d / 2) * det_rsqrt_posreal(weight)
    box = IndexSet.box(k)
    zero = (0,) * d
    c = {zero: complex(c0)}
    for nu in box:
        if nu == zero:
            continue
        if sum(nu) % 2 == 1:
            c[nu] = 0.0
            continue
        j = next(i for i, v in enumerate(nu) if v > 0)
        m = nu[:j] + (nu[j] - 1,) + nu[j + 1 :]
        acc = 0.0
        for l in range(d):
            if m[l] > 0:
                acc = acc + transfer[j, l] * m[l] * c[m[:l] + (m[l] - 1,) + m[l + 1 :]]
        c[nu] = acc
    u = np.linalg.solve(params.Q, np.asarray(z, dtype=complex)) * (
        2 / math.sqrt(params.epsilon)
    )
    total = 0.0
    for nu in box:
        binom = math.prod(math.comb(k[j], nu[j]) for j in range(d))
        power = math.prod(u[j] ** (k[j] - nu[j]) for j in range(d))
        total = total + binom * power * c[nu]
    return complex(total)


def raise_coeffs(cv: CoefficientVector, j):
    """Index-space raising along axis j on an expansion sum c_k phi_k.

    The output lives on the set extended by one shell along j.
    """
    if not cv.iset.downward_closed:
        raise ValueError("ladder actions need downward-closed coefficient sets")
    out_set = cv.iset.raised_by(j)
    out = np.zeros(len(out_set), dtype=complex)
    for k, c in zip(cv.iset, cv.coeffs):
        m = k[:j] + (k[j] + 1,) + k[j + 1 :]
        out[out_set.position(m)] += c * math.sqrt(m[j])
    return CoefficientVector(out_set, out)


def lower_coeffs(cv: CoefficientVector, j):
    """Index-space lowering along axis j (support shrinks within the same set)."""
    if not cv.iset.downward_closed:
        raise ValueError("ladder actions need downward-closed coefficient sets")
    out = np.zeros(len(cv.iset), dtype=complex)
    for k, c in zip(cv.iset, cv.coeffs):
        if k[j] > 0:
            m = k[:j] + (k[j] - 1,) + k[j + 1 :]
            out[cv.iset.position(m)] += c * math.sqrt(k[j])
    return CoefficientVector(cv.iset, out)


def _mixed_ladder(params, cv, j, first, second):
    """sqrt(eps/2) (first A + second A^dagger)_j applied to a coefficient vector."""
    d = params.d
    coeff = math.sqrt(params.epsilon / 2)
    out = None
    for m in range(d):
        low = lower_coeffs(cv, m).padded_to(cv.iset.raised_by(m))
        high = raise_coeffs(cv, m)
        term_set = low.iset
        term = CoefficientVector(
            term_set, coeff * (first[j, m] * low.coeffs + second[j, m] * high.coeffs)
        )
        if out is None:
            out = term
        else:
            union = IndexSet(
                list(out.iset.indices) + list(term.iset.indices),
                require_downward_closed=False,
            )
            out = CoefficientVector(
                union, out.padded_to(union).coeffs + term.padded_to(union).coeffs
            )
    return out


def position_action(params: ParameterSet, cv: CoefficientVector, j):
    """Coefficient-space action of multiplication by (x_j - q_j).

    Inverting the ladder definitions with the symplectic conditions gives
    (x - q) = sqrt(eps/2) (conj(Q) A + Q A^dagger) componentwise; note the
    conjugate sits on the lowering side, which the grid oracle confirms for
    complex Q.
    """
    require_valid(params)
    return _mixed_ladder(params, cv, j, np.conj(params.Q), params.Q)


def momentum_action(params: ParameterSet, cv: CoefficientVector, j):
    """Coefficient-space action of (-i eps d/dx_j - p_j).

    (-i eps grad - p) = sqrt(eps/2) (conj(P) A + P A^dagger) componentwise.
    """
    require_valid(params)
    return _mixed_ladder(params, cv, j, np.conj(params.P), params.P)


def translate_params(params: ParameterSet, shift_q, shift_p):
    """Shift the phase-space center, returning the new parameters and phase.

    T_{a,b} phi_k[q,p,Q,P] = phase * phi_k[q+a, p+b, Q, P] with the
    k-independent phase exp(i b^T (2q + a) / (2 eps)); for q = p = 0 this is
    the familiar exp(i b^T a / (2 eps)) rule.
    """
    require_valid(params)
    a = np.asarray(shift_q, dtype=float)
    b = np.asarray(shift_p, dtype=float)
    shifted = params.with_center(params.q + a, params.p + b)
    phase = np.exp(0.5j * (b @ (2 * params.q + a)) / params.epsilon)
    return shifted, complex(phase)


def heisenberg_weyl_apply(f, shift_q, shift_p, epsilon):
    """The translation operator as a grid-function transform (oracle support).

    (T_{a,b} f)(x) = exp(i b^T (x - a/2) / eps) f(x - a).
    """
    a = np.asarray(shift_q, dtype=float)
    b = np.asarray(shift_p, dtype=float)

    def translated(x):
        x = np.asarray(x, dtype=float)
        phase = np.exp(1j * ((x - 0.5 * a) @ b) / epsilon)
        return phase * f(x - a)

    return translated


def eigenspace_indices(d, n):
    """The redundant level-n enumeration and its first-occurrence mask.

    Level n has d^n slots; slot j*d^{n-1} + i at level n holds the level-
    (n-1) slot-i index raised along axis j.  Repeats (which the recursion
    zeroes out) are marked False in the mask.
    """
    indices = [(0,) * d]
    for _ in range(n):
        indices = [
            k[:j] + (k[j] + 1,) + k[j + 1 :] for j in range(d) for k in indices
        ]
    seen = set()
    mask = []
    for k in indices:
        mask.append(k not in seen)
        seen.add(k)
    return indices, np.array(mask)


def eigenspace_vector(params: ParameterSet, n, x, size_cap=EIGENSPACE_SIZE_CAP):
    """The redundant d^n-vector of level-n wavepacket values at a point x.

    Entries at first occurrences carry phi_k(x); repeated slots are zero,
    mirroring the vanishing normalization factors of the redundant raising
    recursion.  Deliberately exponential in n; exists for the Kronecker
    rotation identity between a family and its polar-normalized form.
    """
    require_valid(params)
    d = params.d
    if d**n > size_cap:
        raise ValueError(f"eigenspace vector of size {d**n} exceeds cap {size_cap}")
    indices, mask = eigenspace_indices(d, n)
    iset = IndexSet.box((n,) * d) if n > 0 else IndexSet([(0,) * d])
    table = wavepacket_table(params, iset, np.asarray(x, dtype=float))
    out = np.zeros(d**n, dtype=complex)
    for slot, (k, first) in enumerate(zip(indices, mask)):
        if first:
            out[slot] = table[k]
    return out
