"""Dense multivariate polynomials with complex coefficients.

Coefficients live in an ndarray indexed by exponent per axis; used for the
exact symbolic paths (Rodriguez-type generation, differential operators
applied to polynomial-times-Gaussian functions).  Degrees stay small, so
dense storage is fine.
"""

import numpy as np


class PolyND:
    """Polynomial sum_alpha c[alpha] * u^alpha in d variables."""

    def __init__(self, coeffs, d=None):
        if np.isscalar(coeffs):
            if d is None:
                raise ValueError("scalar PolyND needs the dimension")
            coeffs = np.full((1,) * d, coeffs, dtype=complex)
        self.c = np.asarray(coeffs, dtype=complex)
        self.d = self.c.ndim

    @classmethod
    def constant(cls, value, d):
        return cls(value, d=d)

    @classmethod
    def linear(cls, const, grad, d):
        """const + sum_j grad[j] * u_j."""
        c = np.zeros((2,) * d, dtype=complex)
        c[(0,) * d] = const
        for j in range(d):
            idx = tuple(1 if i == j else 0 for i in range(d))
            c[idx] = grad[j]
        return cls(c)

    def _padded_pair(self, other):
        shape = tuple(max(a, b) for a, b in zip(self.c.shape, other.c.shape))
        a = np.zeros(shape, dtype=complex)
        b = np.zeros(shape, dtype=complex)
        a[tuple(slice(0, s) for s in self.c.shape)] = self.c
        b[tuple(slice(0, s) for s in other.c.shape)] = other.c
        return a, b

    def __add__(self, other):
        if np.isscalar(other):
            other = PolyND.constant(other, self.d)
        a, b = self._padded_pair(other)
        return PolyND(a + b)

    def __sub__(self, other):
        if np.isscalar(other):
            other = PolyND.constant(other, self.d)
        a, b = self._padded_pair(other)
        return PolyND(a - b)

    def __mul__(self, other):
        if np.isscalar(other):
            return PolyND(self.c * other)
        shape = tuple(a + b - 1 for a, b in zip(self.c.shape, other.c.shape))
        out = np.zeros(shape, dtype=complex)
        it = np.nditer(other.c, flags=["multi_index"])
        for v in it:
            if v == 0:
                continue
            idx = it.multi_index
            out[tuple(slice(i, i + s) for i, s in zip(idx, self.c.shape))] += v * self.c
        return PolyND(out)

    __rmul__ = __mul__

    def derivative(self, axis):
        n = self.c.shape[axis]
        if n == 1:
            return PolyND(np.zeros((1,) * self.d))
        sl = [slice(None)] * self.d
        sl[axis] = slice(1, None)
        factors = np.arange(1, n).reshape(
            tuple(n - 1 if i == axis else 1 for i in range(self.d))
        )
        return PolyND(self.c[tuple(sl)] * factors)

    def __call__(self, u):
        """Evaluate at points u of shape (..., d)."""
        u = np.asarray(u, dtype=complex)
        scalar_in = u.ndim == 1
        pts = np.atleast_2d(u)
        out = np.zeros(pts.shape[:-1], dtype=complex)
        # Horner along the last axis, direct powers along the others.
        powers = [
            pts[..., j, None] ** np.arange(self.c.shape[j]) for j in range(self.d)
        ]
        it = np.nditer(self.c, flags=["multi_index"])
        for v in it:
            if v == 0:
                continue
            idx = it.multi_index
            term = np.full(pts.shape[:-1], complex(v))
            for j in range(self.d):
                term = term * powers[j][..., idx[j]]
            out += term
        return out[0] if scalar_in else out

    def max_abs_coeff(self):
        return float(np.max(np.abs(self.c)))
