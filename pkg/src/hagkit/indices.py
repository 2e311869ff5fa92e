"""Multi-index sets and coefficient vectors for wavepacket expansions.

Multi-indices are plain tuples of nonnegative ints.  Index sets are kept in
graded lexicographic order (by total degree, then lexicographic), which is
the sweep order used by every recurrence in the package.
"""

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "IndexSet",
    "CoefficientVector",
    "graded_lex_key",
    "unit_vectors",
]


def graded_lex_key(k):
    """Sort key putting multi-indices in graded lexicographic order."""
    return (sum(k), k)


def unit_vectors(d):
    """The d standard unit multi-indices e_0, ..., e_{d-1}."""
    return [tuple(1 if i == j else 0 for i in range(d)) for j in range(d)]


def _as_multi_index(k):
    k = tuple(int(v) for v in k)
    if any(v < 0 for v in k):
        raise ValueError(f"multi-index must be nonnegative, got {k}")
    return k


class IndexSet:
    """An ordered set of multi-indices of a common dimension.

    Parameters
    ----------
    indices : iterable of tuples
        The multi-indices.  They are deduplicated and sorted into graded
        lexicographic order.
    require_downward_closed : bool
        If True (default), construction fails unless the set is downward
        closed, i.e. contains every nu <= k for each of its members k.
    """

    def __init__(self, indices, require_downward_closed=True):
        indices = sorted({_as_multi_index(k) for k in indices}, key=graded_lex_key)
        if not indices:
            raise ValueError("index set must be nonempty")
        d = len(indices[0])
        if any(len(k) != d for k in indices):
            raise ValueError("all multi-indices must share one dimension")
        self.indices = indices
        self.d = d
        self._position = {k: i for i, k in enumerate(indices)}
        if require_downward_closed and not self.is_downward_closed():
            raise ValueError("index set is not downward closed")
        self.downward_closed = require_downward_closed or self.is_downward_closed()

    @classmethod
    def box(cls, shape):
        """All k with k_j <= shape_j componentwise."""
        shape = _as_multi_index(shape)
        grids = np.meshgrid(*[np.arange(s + 1) for s in shape], indexing="ij")
        return cls(zip(*(g.ravel() for g in grids)))

    @classmethod
    def simplex(cls, d, n):
        """All k in dimension d with |k| <= n."""
        out = [()]
        for _ in range(d):
            out = [k + (j,) for k in out for j in range(n + 1 - sum(k))]
        return cls(out)

    def is_downward_closed(self):
        members = self._position
        for k in self.indices:
            for j in range(self.d):
                if k[j] > 0:
                    down = k[:j] + (k[j] - 1,) + k[j + 1 :]
                    if down not in members:
                        return False
        return True

    def position(self, k):
        return self._position[_as_multi_index(k)]

    def union(self, other_indices):
        return IndexSet(
            list(self.indices) + [_as_multi_index(k) for k in other_indices],
            require_downward_closed=False,
        )

    def raised_by(self, j):
        """The set extended by one shell along axis j (stays downward closed)."""
        e = tuple(1 if i == j else 0 for i in range(self.d))
        shifted = [tuple(a + b for a, b in zip(k, e)) for k in self.indices]
        return IndexSet(list(self.indices) + shifted)

    def max_degree(self):
        return max(sum(k) for k in self.indices)

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, k):
        return tuple(k) in self._position

    def __eq__(self, other):
        return isinstance(other, IndexSet) and self.indices == other.indices

    def __repr__(self):
        return f"IndexSet(d={self.d}, size={len(self)})"


@dataclass
class CoefficientVector:
    """Complex expansion coefficients aligned with an IndexSet's ordering."""

    iset: IndexSet
    coeffs: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.coeffs is None:
            self.coeffs = np.zeros(len(self.iset), dtype=complex)
        else:
            self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.shape != (len(self.iset),):
            raise ValueError("coefficient array does not match index set size")
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("coefficients must be finite")

    @classmethod
    def unit(cls, iset, k):
        c = np.zeros(len(iset), dtype=complex)
        c[iset.position(k)] = 1.0
        return cls(iset, c)

    def __getitem__(self, k):
        return self.coeffs[self.iset.position(k)]

    def padded_to(self, iset):
        """The same expansion re-indexed over a superset."""
        c = np.zeros(len(iset), dtype=complex)
        for k, v in zip(self.iset, self.coeffs):
            c[iset.position(k)] = v
        return CoefficientVector(iset, c)

    def norm_sq(self):
        return float(np.sum(np.abs(self.coeffs) ** 2))
