"""Phase-space transforms of wavepackets: Wigner, FBI, and Husimi.

Three independent evaluation paths for the cross Wigner transform are kept
deliberately separate so they can arbitrate each other:

* a closed form built from single-variable Laguerre kernels of the complex
  vector z = -i (P^T (x - q) - Q^T (xi - p)),
* a derivative-free three-term recurrence filling a whole table of index
  pairs from the Gaussian seed, and
* a metaplectic change of coordinates reducing everything to the Hermite
  reference kernels through the inverse symplectic block matrix.

The recurrence signs and the kernel branch placement below were fixed by a
brute-force quadrature oracle of the defining integral; printed versions of
these relations occasionally differ in the sign of the z-term and in which
slot carries the conjugate, and the oracle is authoritative here.
"""

import math

import numpy as np

from .indices import CoefficientVector, IndexSet
from .params import require_valid, symplectic_embed, width_matrix
from .scalars import hermite_wigner, laguerre_kernel_one, laguerre_poly
from .wavepackets import gaussian_moment, norm_factor

__all__ = [
    "z_vector",
    "wigner_closed",
    "wigner_table",
    "wigner_superposition",
    "eigenspace_trace",
    "fbi_closed",
    "husimi",
    "wigner_metaplectic",
    "phase_ladder_residual",
]


def split_point(point, d):
    """Split concatenated phase-space points (..., 2d) into x and xi parts."""
    pts = np.asarray(point, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if pts.shape[-1] != 2 * d:
        raise ValueError(f"phase-space points must have 2*{d} columns")
    return pts[:, :d], pts[:, d:], single


def z_vector(params, point):
    """The complex vector z(x, xi) = -i (P^T (x - q) - Q^T (xi - p)).

    Returns shape (n, d) for stacked points, (d,) for a single point.  Its
    real and imaginary parts equal F^{-1} (x - q, xi - p) for the symplectic
    block embedding F of (Q, P).
    """
    require_valid(params)
    x, xi, single = split_point(point, params.d)
    z = -1j * ((x - params.q) @ params.P - (xi - params.p) @ params.Q)
    return z[0] if single else z


def _wigner_seed(params, z):
    r2 = np.sum(z.real**2 + z.imag**2, axis=-1)
    return (np.pi * params.epsilon) ** (-params.d) * np.exp(-r2 / params.epsilon)


def wigner_closed(params, k, l, point):
    """Closed-form cross Wigner transform of phi_k and phi_l.

    (pi eps)^{-d} e^{-|z|^2/eps} (-1)^{|l|} / sqrt(2^{|k|+|l|} k! l!)
        * prod_j kernel(k_j, l_j, z_j / sqrt(eps)).
    """
    require_valid(params)
    k = tuple(int(v) for v in k)
    l = tuple(int(v) for v in l)
    x, xi, single = split_point(point, params.d)
    z = np.atleast_2d(z_vector(params, np.asarray(point, dtype=float)))
    amp = (-1.0) ** sum(l) / (norm_factor(k) * norm_factor(l))
    val = _wigner_seed(params, z) * amp
    rt = math.sqrt(params.epsilon)
    for j in range(params.d):
        val = val * laguerre_kernel_one(k[j], l[j], z[:, j] / rt)
    return complex(val[0]) if single else val


def wigner_table(params, iset, point, fill="l-first"):
    """Table of cross Wigner values over iset x iset at given points.

    Built from the Gaussian seed by the derivative-free recurrences

        sqrt(k_j+1) W[k+e_j, l] = sqrt(2/eps) z_j      W[k, l] - sqrt(l_j) W[k, l-e_j]
        sqrt(l_j+1) W[k, l+e_j] = sqrt(2/eps) conj(z_j) W[k, l] - sqrt(k_j) W[k-e_j, l]

    whose z-term sign and conjugation are the quadrature-resolved ones.  The
    two fill orders ("l-first" raises l at k = 0 then raises k; "k-first"
    mirrors it) must agree, and every entry matches wigner_closed.

    Returns a dict (k, l) -> values, plus z, as attributes of a small record.
    """
    require_valid(params)
    if not iset.downward_closed:
        raise ValueError("wigner_table needs a downward-closed index set")
    pts = np.atleast_2d(np.asarray(point, dtype=float))
    single = np.asarray(point).ndim == 1
    z = np.atleast_2d(z_vector(params, pts))
    zl = [z[:, j] for j in range(params.d)]
    zbar = [np.conj(z[:, j]) for j in range(params.d)]
    root = math.sqrt(2.0 / params.epsilon)
    zero = (0,) * params.d
    values = {(zero, zero): _wigner_seed(params, z)}

    def sub(k, j):
        return k[:j] + (k[j] - 1,) + k[j + 1 :]

    def raise_l(k, l):
        j = next(i for i, v in enumerate(l) if v > 0)
        m = sub(l, j)
        acc = root * zbar[j] * values[(k, m)]
        if k[j] > 0:
            acc = acc - math.sqrt(k[j]) * values[(sub(k, j), m)]
        values[(k, l)] = acc / math.sqrt(l[j])

    def raise_k(k, l):
        j = next(i for i, v in enumerate(k) if v > 0)
        m = sub(k, j)
        acc = root * zl[j] * values[(m, l)]
        if l[j] > 0:
            acc = acc - math.sqrt(l[j]) * values[(m, sub(l, j))]
        values[(k, l)] = acc / math.sqrt(k[j])

    if fill == "l-first":
        for l in iset:
            if l != zero:
                raise_l(zero, l)
        for k in iset:
            if k == zero:
                continue
            for l in iset:
                raise_k(k, l)
    elif fill == "k-first":
        for k in iset:
            if k != zero:
                raise_k(k, zero)
        for l in iset:
            if l == zero:
                continue
            for k in iset:
                raise_l(k, l)
    else:
        raise ValueError(f"unknown fill order {fill!r}")

    if single:
        values = {kl: v[0] for kl, v in values.items()}
        z = z[0]
    return WignerTable(point=point, z=z, values=values)


class WignerTable:
    """Per-point map (k, l) -> cross Wigner value over a downward-closed set."""

    def __init__(self, point, z, values):
        self.point = point
        self.z = z
        self.values = values

    def __getitem__(self, kl):
        return self.values[tuple(map(tuple, kl))]


def wigner_superposition(params, coeffs: CoefficientVector, points, method="recurrence"):
    """Wigner function of an expansion sum_k c_k phi_k at many points.

    W(psi) = sum_{k,l} conj(c_k) c_l W[k, l]; terms are accumulated in
    graded lexicographic order for determinism.  The result of the bilinear
    sum is real up to rounding; its imaginary residue is checked against
    1e-10 of the magnitude and discarded.
    """
    require_valid(params)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    single = np.asarray(points).ndim == 1
    iset = coeffs.iset
    total = np.zeros(len(pts), dtype=complex)
    if method == "recurrence":
        table = wigner_table(params, iset, pts)
        for k, ck in zip(iset, coeffs.coeffs):
            for l, cl in zip(iset, coeffs.coeffs):
                total += np.conj(ck) * cl * np.atleast_1d(table[(k, l)])
    elif method == "closed":
        for k, ck in zip(iset, coeffs.coeffs):
            for l, cl in zip(iset, coeffs.coeffs):
                total += np.conj(ck) * cl * wigner_closed(params, k, l, pts)
    else:
        raise ValueError(f"unknown method {method!r}")
    scale = float(np.max(np.abs(total))) or 1.0
    resid = float(np.max(np.abs(total.imag)))
    if resid > 1e-10 * scale:
        raise RuntimeError(
            f"wigner_superposition: imaginary residue {resid:.2e} exceeds 1e-10 of scale {scale:.2e}"
        )
    out = total.real
    return float(out[0]) if single else out


def eigenspace_trace(params, n, point):
    """Trace of the level-n matrix Wigner transform in closed form.

    (-1)^n (pi eps)^{-d} e^{-|z|^2/eps} L_n^{(d-1)}(2 |z|^2 / eps); equals the
    sum of the diagonal transforms over all |k| = n.
    """
    require_valid(params)
    x, xi, single = split_point(point, params.d)
    z = np.atleast_2d(z_vector(params, np.asarray(point, dtype=float)))
    r2 = np.sum(z.real**2 + z.imag**2, axis=-1)
    val = (
        (-1.0) ** n
        * _wigner_seed(params, z)
        * laguerre_poly(n, params.d - 1, 2 * r2 / params.epsilon).real
    )
    return float(val[0]) if single else val


def fbi_closed(params, k, point):
    """Closed-form FBI transform of phi_k at a phase-space point.

    Reduction to the origin by the translation covariance contributes the
    k-independent prefactor e^{i xi.(x-q)/eps}; the origin value combines the
    window-times-Gaussian moment recursion with w = (Id - iC)^{-1} z and
    M = (Id - i conj(C))/2, z = (x - q) - i (xi - p).  The phase (tested
    against the quadrature oracle, not assumed) and the principal-branch
    det(Q)^{-1/2} make this exactly the transform of the same function that
    gaussian_eval produces.  When C = i Id the moment sum collapses and the
    direct special form below is used.
    """
    require_valid(params)
    k = tuple(int(v) for v in k)
    point = np.asarray(point, dtype=float)
    if point.ndim > 1:
        return np.array([fbi_closed(params, k, pt) for pt in point])
    d = params.d
    eps = params.epsilon
    x, xi = point[:d], point[d:]
    C = width_matrix(params)
    z = (x - params.q) - 1j * (xi - params.p)
    norm = norm_factor(k) * 2 ** (d / 2)
    det_root = np.sqrt(np.linalg.det(params.Q))
    phase = np.exp(1j * (xi @ (x - params.q)) / eps)
    if np.max(np.abs(C - 1j * np.eye(d))) < 1e-13:
        # C = i Id collapses the moment recursion to its seed
        u = np.linalg.solve(params.Q, z) / math.sqrt(eps)
        r2 = float(np.sum(np.abs(z) ** 2))
        val = (
            (np.pi * eps) ** (-d / 2)
            / (det_root * norm)
            * np.exp(-r2 / (4 * eps) - 0.5j * ((x - params.q) @ (xi - params.p)) / eps)
            * np.prod(u ** np.array(k))
        )
        return complex(phase * val)
    ic = np.eye(d) - 1j * C
    w = np.linalg.solve(ic, z)
    M = 0.5 * (np.eye(d) - 1j * np.conj(C))
    moment = gaussian_moment(params, M, k, w)
    amp = (np.pi * eps) ** (-d) / (det_root * norm)
    expo = -float((x - params.q) @ (x - params.q)) / (2 * eps) + (w @ (ic @ w)) / (2 * eps)
    return complex(phase * amp * np.exp(expo) * moment)


def husimi(params, k, point):
    """Husimi transform of phi_k: the squared modulus of the FBI transform."""
    vals = fbi_closed(params, k, point)
    return np.abs(vals) ** 2 if np.ndim(vals) else abs(vals) ** 2


def wigner_metaplectic(params, k, l, point):
    """Cross Wigner transform through the metaplectic coordinate change.

    eps^{-d} prod_j hermite_wigner(k_j, l_j, Re(z_j)/sqrt(eps), Im(z_j)/sqrt(eps))
    with (Re z, Im z) obtained from the assembled inverse symplectic block
    matrix, a second derivation independent of the Laguerre-kernel route.
    """
    require_valid(params)
    k = tuple(int(v) for v in k)
    l = tuple(int(v) for v in l)
    x, xi, single = split_point(point, params.d)
    emb = symplectic_embed(params)
    uv = np.concatenate([x - params.q, xi - params.p], axis=1) @ emb.F_inv.T
    rz, iz = uv[:, : params.d], uv[:, params.d :]
    rt = math.sqrt(params.epsilon)
    val = np.full(len(x), params.epsilon ** (-params.d), dtype=complex)
    for j in range(params.d):
        val = val * hermite_wigner(k[j], l[j], rz[:, j] / rt, iz[:, j] / rt)
    return complex(val[0]) if single else val


def phase_ladder_residual(params, k, l, point, h=None):
    """Residual of the first-order phase-space ladder identities at one point.

    The four operators below, applied to the cross Wigner transform, must
    reproduce index-shifted transforms:

        K+ W[k,l] = 2 sqrt(k_j+1) W[k+e_j, l]    K- W[k,l] = 2 sqrt(k_j) W[k-e_j, l]
        L+ W[k,l] = 2 sqrt(l_j+1) W[k, l+e_j]    L- W[k,l] = 2 sqrt(l_j) W[k, l-e_j]

    with (all derivatives via central differences of step h)

        K+ = -i/sqrt(2 eps) (P^T [2(x-q) + D_xi] - Q^T [2(xi-p) - D_x])
        K- = +i/sqrt(2 eps) (P^* [2(x-q) + D_xi] - Q^* [2(xi-p) - D_x])
        L+ = +i/sqrt(2 eps) (P^* [2(x-q) - D_xi] - Q^* [2(xi-p) + D_x])
        L- = -i/sqrt(2 eps) (P^T [2(x-q) - D_xi] - Q^T [2(xi-p) + D_x])

    where D = -i eps grad.  The overall signs of K+ and K- are the
    oracle-resolved ones (they flip relative to some printed forms; the
    second-slot operators L+- do not).  Returns the max residual over the
    four identities and all axes; O(h^2) by construction.
    """
    require_valid(params)
    d = params.d
    eps = params.epsilon
    if h is None:
        h = 1e-3 * math.sqrt(eps)
    k = tuple(int(v) for v in k)
    l = tuple(int(v) for v in l)
    point = np.asarray(point, dtype=float)
    x, xi = point[:d], point[d:]

    def W(kk, ll, pt):
        return wigner_closed(params, kk, ll, pt)

    def grad_x(kk, ll):
        out = np.empty(d, dtype=complex)
        for j in range(d):
            e = np.zeros(2 * d)
            e[j] = h
            out[j] = (W(kk, ll, point + e) - W(kk, ll, point - e)) / (2 * h)
        return out

    def grad_xi(kk, ll):
        out = np.empty(d, dtype=complex)
        for j in range(d):
            e = np.zeros(2 * d)
            e[d + j] = h
            out[j] = (W(kk, ll, point + e) - W(kk, ll, point - e)) / (2 * h)
        return out

    w0 = W(k, l, point)
    dx = -1j * eps * grad_x(k, l)
    dxi = -1j * eps * grad_xi(k, l)
    pos = 2 * (x - params.q) * w0
    mom = 2 * (xi - params.p) * w0
    c = 1j / math.sqrt(2 * eps)
    lhs = {
        "K+": -c * (params.P.T @ (pos + dxi) - params.Q.T @ (mom - dx)),
        "K-": +c * (params.P.conj().T @ (pos + dxi) - params.Q.conj().T @ (mom - dx)),
        "L+": +c * (params.P.conj().T @ (pos - dxi) - params.Q.conj().T @ (mom + dx)),
        "L-": -c * (params.P.T @ (pos - dxi) - params.Q.T @ (mom + dx)),
    }
    resid = 0.0
    for j in range(d):
        e = tuple(1 if i == j else 0 for i in range(d))
        up_k = tuple(a + b for a, b in zip(k, e))
        up_l = tuple(a + b for a, b in zip(l, e))
        rhs_kp = 2 * math.sqrt(k[j] + 1) * W(up_k, l, point)
        rhs_lp = 2 * math.sqrt(l[j] + 1) * W(k, up_l, point)
        rhs_km = 2 * math.sqrt(k[j]) * W(tuple(a - b for a, b in zip(k, e)), l, point) if k[j] else 0.0
        rhs_lm = 2 * math.sqrt(l[j]) * W(k, tuple(a - b for a, b in zip(l, e)), point) if l[j] else 0.0
        resid = max(resid, abs(lhs["K+"][j] - rhs_kp), abs(lhs["K-"][j] - rhs_km),
                    abs(lhs["L+"][j] - rhs_lp), abs(lhs["L-"][j] - rhs_lm))
    return float(resid)
