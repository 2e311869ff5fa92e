"""Projection of smooth functions onto wavepacket bases over hyperbolic sets.

A function psi is approximated by sum_{k in K} c_k phi_k with coefficients
c_k = <phi_k, psi>, the index set K being the hyperbolic cross
{ k : prod_j (1 + k_j) <= K }.  The Wigner function of the approximant is
then available through the fast phase-space recurrence, inheriting the
projection accuracy through the transform's bilinearity.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .indices import CoefficientVector, IndexSet
from .params import require_valid
from .phasespace import wigner_superposition
from .quadrature import QuadratureSpec, tensor_rule
from .wavepackets import reconstruct_on_grid, wavepacket_table

__all__ = [
    "hyperbolic_set",
    "default_projection_spec",
    "projection_rule",
    "project",
    "reconstruct",
    "error_report",
    "wigner_of_function",
    "ApproximationReport",
]

HYPERBOLIC_SIZE_CAP = 200_000


def hyperbolic_set(d, K, size_cap=HYPERBOLIC_SIZE_CAP):
    """The hyperbolic cross { k in N^d : prod_j (1 + k_j) <= K }."""
    if d < 1 or K < 1:
        raise ValueError("need d >= 1 and K >= 1")
    indices = [()]
    for _ in range(d):
        indices = [
            k + (j,)
            for k in indices
            for j in range(K // math.prod(1 + v for v in k))
            if math.prod(1 + v for v in k) * (1 + j) <= K
        ]
        if len(indices) > size_cap:
            raise ValueError(f"hyperbolic set exceeds size cap {size_cap}")
    return IndexSet(indices)


def default_projection_spec(epsilon, nodes=160):
    """Trapezoid rule sized for coefficient integrals at the given scale.

    The window shrinks like sqrt(eps) while the integrand oscillates at
    frequencies ~ 1/eps, so the node count grows like 1/sqrt(eps).
    """
    return QuadratureSpec(
        nodes_per_axis=max(2, int(round(nodes / math.sqrt(epsilon)))),
        scheme="trapezoid",
        radius=8.0,
    )


def projection_rule(params, spec, spread=None):
    """Quadrature nodes and weights covering the basis family's support."""
    if spread is None:
        # per-axis Gaussian spread of |phi_0|^2, inflated for excited states
        QQ = (params.Q @ params.Q.conj().T).real
        spread = np.sqrt(np.diag(QQ))
    scale = np.sqrt(params.epsilon) * np.asarray(spread, dtype=float)
    return tensor_rule(spec, params.q, scale)


def project(psi, params, iset, spec=None, spread=None):
    """Expansion coefficients c_k = <phi_k, psi> over the index set.

    psi must accept point arrays of shape (n, d).  All wavepacket values
    come from one recurrence sweep over the quadrature nodes.  A Bessel
    check (sum |c_k|^2 <= |psi|^2 + tol) guards against quadrature windows
    too small for psi.
    """
    require_valid(params)
    if spec is None:
        spec = default_projection_spec(params.epsilon)
    nodes, weights = projection_rule(params, spec, spread)
    table = wavepacket_table(params, iset, nodes)
    psi_vals = np.asarray(psi(nodes), dtype=complex)
    coeffs = np.array(
        [np.sum(weights * np.conj(table[k]) * psi_vals) for k in iset]
    )
    psi_norm_sq = float(np.sum(weights * np.abs(psi_vals) ** 2).real)
    defect = psi_norm_sq - float(np.sum(np.abs(coeffs) ** 2))
    if defect < -1e-8 * max(psi_norm_sq, 1.0):
        warnings.warn(
            f"projection violates the Bessel bound by {-defect:.2e}; "
            "the quadrature window is likely too small for psi",
            stacklevel=2,
        )
    return CoefficientVector(iset, coeffs)


def reconstruct(coeffs, params, x):
    """Evaluate the expansion sum_k c_k phi_k at points x."""
    return reconstruct_on_grid(params, coeffs, x)


@dataclass(frozen=True)
class ApproximationReport:
    """L2 residual, Bessel defect, and per-shell coefficient energies."""

    l2_residual: float
    bessel_defect: float
    shell_energy: dict

    def __str__(self):
        lines = [
            f"  l2 residual:   {self.l2_residual:.6e}",
            f"  bessel defect: {self.bessel_defect:.6e}",
        ]
        for n in sorted(self.shell_energy):
            lines.append(f"  shell |k|={n:<3d} energy {self.shell_energy[n]:.6e}")
        return "\n".join(lines)


def error_report(psi, coeffs, params, spec=None, spread=None):
    """Quadrature L2 residual of the expansion plus shell-resolved energies."""
    require_valid(params)
    if spec is None:
        spec = default_projection_spec(params.epsilon)
    nodes, weights = projection_rule(params, spec, spread)
    psi_vals = np.asarray(psi(nodes), dtype=complex)
    rec = reconstruct_on_grid(params, coeffs, nodes)
    resid = math.sqrt(abs(float(np.sum(weights * np.abs(psi_vals - rec) ** 2))))
    psi_norm_sq = float(np.sum(weights * np.abs(psi_vals) ** 2).real)
    defect = psi_norm_sq - float(np.sum(np.abs(coeffs.coeffs) ** 2))
    shells = {}
    for k, c in zip(coeffs.iset, coeffs.coeffs):
        shells[sum(k)] = shells.get(sum(k), 0.0) + abs(c) ** 2
    return ApproximationReport(resid, defect, shells)


def wigner_of_function(coeffs, params, points, method="recurrence"):
    """Wigner function of the approximant at the given phase-space points."""
    return wigner_superposition(params, coeffs, points, method=method)
