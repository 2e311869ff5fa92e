"""Brute-force integration oracles for cross-validating every closed form.

Two tensor-product schemes: Gauss-Hermite for Gaussian-weighted polynomial
integrands (exact up to the rule's degree), and a truncated trapezoid rule
for oscillatory kernels (spectrally accurate for smooth decaying
integrands).  Intended for dimensions one and two; node-level summation is
in fixed order, so identical specs give bitwise identical results.

All integrand callables must accept point arrays of shape (n, d).
"""

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .wavepackets import gaussian_eval, wavepacket_eval

__all__ = [
    "QuadratureSpec",
    "TruncationWarning",
    "tensor_rule",
    "inner_product",
    "wigner_quadrature",
    "fbi_quadrature",
    "fourier_quadrature",
    "husimi_convolution",
    "node_doubling_delta",
    "wavepacket_fn",
    "gaussian_fn",
]


class TruncationWarning(UserWarning):
    """The integrand is not negligible at the truncation boundary."""


@dataclass(frozen=True)
class QuadratureSpec:
    """Node count per axis, scheme, and truncation radius (trapezoid only).

    The radius is measured in units of the caller-supplied scale, which
    should be sqrt(eps) times the relevant Gaussian spread.
    """

    nodes_per_axis: int = 160
    scheme: str = "trapezoid"  # or "gauss-hermite"
    radius: float = 8.0

    def __post_init__(self):
        if self.nodes_per_axis < 2:
            raise ValueError("need at least two nodes per axis")
        if self.scheme not in ("trapezoid", "gauss-hermite"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.radius <= 0:
            raise ValueError("truncation radius must be positive")

    def doubled(self):
        return replace(self, nodes_per_axis=2 * self.nodes_per_axis)


def _axis_rule(spec, center, scale):
    if spec.scheme == "trapezoid":
        half = spec.radius * scale
        nodes = np.linspace(center - half, center + half, spec.nodes_per_axis)
        weights = np.full(spec.nodes_per_axis, nodes[1] - nodes[0])
        return nodes, weights
    t, w = np.polynomial.hermite.hermgauss(spec.nodes_per_axis)
    # fold the e^{-t^2} weight back so the rule integrates plain functions
    return center + scale * t, scale * w * np.exp(t * t)


def tensor_rule(spec, center, scale):
    """Tensor-product nodes (m, d) and weights (m,) around a center."""
    center = np.atleast_1d(np.asarray(center, dtype=float))
    d = center.shape[0]
    scale = np.broadcast_to(np.asarray(scale, dtype=float), (d,))
    axes = [_axis_rule(spec, center[j], scale[j]) for j in range(d)]
    grids = np.meshgrid(*[a[0] for a in axes], indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=-1)
    weights = np.ones(1)
    for _, w in axes:
        weights = np.outer(weights, w).ravel()
    return nodes, weights


def _boundary_check(values, nodes_shape, what):
    vals = np.abs(values.reshape(nodes_shape))
    interior = float(np.max(vals))
    if interior == 0:
        return
    edge = 0.0
    for ax in range(vals.ndim):
        sl0 = [slice(None)] * vals.ndim
        sl1 = [slice(None)] * vals.ndim
        sl0[ax], sl1[ax] = 0, -1
        edge = max(edge, float(np.max(vals[tuple(sl0)])), float(np.max(vals[tuple(sl1)])))
    if edge > 1e-3 * interior:
        warnings.warn(
            f"{what}: integrand magnitude {edge:.2e} at the truncation boundary "
            f"(interior max {interior:.2e}); enlarge the radius",
            TruncationWarning,
            stacklevel=3,
        )


def inner_product(f, g, spec, center, scale=1.0):
    """<f, g> = integral conj(f) g over the truncated window."""
    nodes, weights = tensor_rule(spec, center, scale)
    vals = np.conj(f(nodes)) * g(nodes)
    if spec.scheme == "trapezoid":
        _boundary_check(vals, (spec.nodes_per_axis,) * np.atleast_1d(center).shape[0],
                        "inner_product")
    return complex(np.sum(weights * vals))


def wigner_quadrature(f, g, epsilon, point, spec, y_halfwidth=None):
    """Defining Wigner integral of the pair (f, g) at phase-space points.

    (2 pi eps)^{-d} integral conj(f)(x + y/2) g(x - y/2) e^{i y.xi / eps} dy,
    by trapezoid in y.  `point` is (x, xi) concatenated, shape (2d,) or
    (n, 2d).  Node demand grows as 1/eps; intended for eps >= 0.05 at d = 1
    and eps >= 0.2 at d = 2.
    """
    pts = np.atleast_2d(np.asarray(point, dtype=float))
    d = pts.shape[1] // 2
    x, xi = pts[:, :d], pts[:, d:]
    if y_halfwidth is None:
        y_halfwidth = 2.0 * spec.radius * math.sqrt(epsilon)
    n = spec.nodes_per_axis
    axis = np.linspace(-y_halfwidth, y_halfwidth, n)
    step = axis[1] - axis[0]
    grids = np.meshgrid(*([axis] * d), indexing="ij")
    y = np.stack([gg.ravel() for gg in grids], axis=-1)
    m = len(y)
    plus = (x[:, None, :] + 0.5 * y[None, :, :]).reshape(-1, d)
    minus = (x[:, None, :] - 0.5 * y[None, :, :]).reshape(-1, d)
    fa = np.conj(np.asarray(f(plus)).reshape(len(pts), m))
    gb = np.asarray(g(minus)).reshape(len(pts), m)
    osc = np.exp(1j * (y @ xi.T).T / epsilon)
    vals = fa * gb
    _boundary_check(vals[0], (n,) * d, "wigner_quadrature")
    out = (2 * np.pi * epsilon) ** (-d) * step**d * np.sum(vals * osc, axis=1)
    return out if np.asarray(point).ndim > 1 else complex(out[0])


def fbi_quadrature(f, epsilon, point, spec, center=None, scale=None):
    """Defining FBI integral: windowed inner product with the Gaussian packet.

    T(f)(x, xi) = (2 pi eps)^{-d/2} (pi eps)^{-d/4}
                  integral e^{-|y-x|^2/(2 eps) - i xi.(y-x)/eps} f(y) dy.
    """
    point = np.asarray(point, dtype=float)
    d = point.shape[0] // 2
    x, xi = point[:d], point[d:]
    if center is None:
        center = x
    if scale is None:
        scale = math.sqrt(epsilon)
    nodes, weights = tensor_rule(spec, center, scale)
    u = nodes - x
    window = np.exp(-np.sum(u * u, axis=1) / (2 * epsilon) - 1j * (u @ xi) / epsilon)
    vals = window * f(nodes)
    if spec.scheme == "trapezoid":
        _boundary_check(vals, (spec.nodes_per_axis,) * d, "fbi_quadrature")
    amp = (2 * np.pi * epsilon) ** (-d / 2) * (np.pi * epsilon) ** (-d / 4)
    return complex(amp * np.sum(weights * vals))


def fourier_quadrature(f, epsilon, xi, spec, center=0.0, scale=None):
    """Scaled Fourier transform (2 pi eps)^{-d/2} integral f(x) e^{-i x.xi/eps} dx."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    d = xi.shape[0]
    if scale is None:
        scale = math.sqrt(epsilon)
    nodes, weights = tensor_rule(spec, np.broadcast_to(center, (d,)), scale)
    vals = f(nodes) * np.exp(-1j * (nodes @ xi) / epsilon)
    _boundary_check(vals, (spec.nodes_per_axis,) * d, "fourier_quadrature")
    return complex((2 * np.pi * epsilon) ** (-d / 2) * np.sum(weights * vals))


def husimi_convolution(x_nodes, xi_nodes, wigner_values, epsilon, point):
    """Husimi value at one point by smoothing a sampled Wigner grid.

    Discrete convolution with the phase-space Gaussian
    G(z) = (pi eps)^{-d} exp(-|z|^2/eps) over a d = 1 grid (x_nodes by
    xi_nodes, values shaped (len(x_nodes), len(xi_nodes))).
    """
    x_nodes = np.asarray(x_nodes, dtype=float)
    xi_nodes = np.asarray(xi_nodes, dtype=float)
    W = np.asarray(wigner_values)
    if W.shape != (x_nodes.size, xi_nodes.size):
        raise ValueError("wigner grid shape mismatch")
    x0, xi0 = float(point[0]), float(point[1])
    reach = 6 * math.sqrt(epsilon)
    if (x_nodes[0] > x0 - reach or x_nodes[-1] < x0 + reach
            or xi_nodes[0] > xi0 - reach or xi_nodes[-1] < xi0 + reach):
        warnings.warn(
            "husimi_convolution: grid does not cover the smoothing Gaussian's support",
            TruncationWarning,
            stacklevel=2,
        )
    dx = x_nodes[1] - x_nodes[0]
    dxi = xi_nodes[1] - xi_nodes[0]
    gx = (x0 - x_nodes) ** 2
    gxi = (xi0 - xi_nodes) ** 2
    G = np.exp(-(gx[:, None] + gxi[None, :]) / epsilon) / (np.pi * epsilon)
    return float(np.real(np.sum(G * W) * dx * dxi))


def node_doubling_delta(oracle, spec):
    """Evaluate an oracle at the spec and at doubled nodes; return both and the delta."""
    v1 = oracle(spec)
    v2 = oracle(spec.doubled())
    return v1, v2, abs(v2 - v1)


def wavepacket_fn(params, k):
    """phi_k as a plain callable on (n, d) point arrays (oracle plumbing)."""
    return lambda x: wavepacket_eval(params, k, x)


def gaussian_fn(params):
    """phi_0 as a plain callable on (n, d) point arrays."""
    return lambda x: gaussian_eval(params, x)
