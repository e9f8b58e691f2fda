"""Latin hypercubes and the basis-aligned decompositions built from them.

A Latin hypercube ``L`` on ``[n]^{d-1}`` turns into the index set
``{(i_1, ..., i_{d-1}, L(i_1, ..., i_{d-1}))}``.  Two distinct indices differ
in at least two positions, so the basis terms ``e_{i_1} ⊗ ... ⊗ e_{i_d}`` form
a two-orthogonal decomposition.  Everything here is 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Sequence

import numpy as np

from .tensor_core import Decomposition, RankOneTerm, basis_vector, validate_shape


@dataclass(frozen=True, eq=False)
class LatinHypercube:
    """``values[i_1, ..., i_{d-1}]`` in ``range(n)``; every axis line is a permutation."""

    n: int
    values: np.ndarray

    @property
    def d_minus_1(self) -> int:
        return self.values.ndim

    def index_set(self) -> list[tuple[int, ...]]:
        return [idx + (int(self.values[idx]),) for idx in np.ndindex(*self.values.shape)]


def latin_hypercube(n: int, d: int, kind: str = "sum", shift: int = 0) -> LatinHypercube:
    """Cyclic Latin hypercube on ``[n]^{d-1}``.

    ``sum``: ``L = i_1 + ... + i_{d-1} + shift (mod n)``.
    ``alternating``: ``L = i_{d-1} + sum_{k=1}^{d-2} (-1)^{k+1} i_k + shift (mod n)``.
    """
    if n < 2 or d < 2:
        raise ValueError(f"need n >= 2 and d >= 2, got n={n}, d={d}")
    grids = np.indices((n,) * (d - 1))
    if kind == "sum":
        values = grids.sum(axis=0)
    elif kind == "alternating":
        signs = np.array([(-1) ** k for k in range(d - 2)] + [1])
        values = np.tensordot(signs, grids, axes=1)
    else:
        raise ValueError(f"unknown kind {kind!r}")
    return LatinHypercube(n, np.mod(values + shift, n))


def is_latin(cube: LatinHypercube) -> bool:
    """Every axis-aligned line is a permutation of ``range(n)``."""
    v = cube.values
    if v.shape != (cube.n,) * v.ndim:
        return False
    target = np.arange(cube.n)
    return all(np.array_equal(np.sort(v, axis=k), np.broadcast_to(
        target.reshape([-1 if j == k else 1 for j in range(v.ndim)]), v.shape)) for k in range(v.ndim))


def hamming_distance(a: Sequence[int], b: Sequence[int]) -> int:
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
    return sum(1 for x, y in zip(a, b) if x != y)


def maximal_index_set(shape: Sequence[int]) -> list[tuple[int, ...]]:
    """Index tuples of a maximal two-orthogonal basis decomposition of ``shape``.

    Axes are sorted ascending, a sum Latin hypercube on the second largest
    dimension is cut down to the smaller axes, and the axis order is restored.
    """
    shape = validate_shape(shape)
    d = len(shape)
    perm = np.argsort(shape, kind="stable")
    dims = [shape[k] for k in perm]
    cube = latin_hypercube(dims[d - 2], d, "sum")
    out = []
    for idx in product(*(range(m) for m in dims[:-1])):
        sorted_idx = idx + (int(cube.values[idx]),)
        full = [0] * d
        for pos, k in enumerate(perm):
            full[k] = sorted_idx[pos]
        out.append(tuple(full))
    return out


def random_weights(r: int, rng_seed: int = 0) -> np.ndarray:
    """Uniform on [0.5, 2] with a random sign."""
    rng = np.random.default_rng(rng_seed)
    return rng.uniform(0.5, 2.0, r) * rng.choice([-1.0, 1.0], r)


def basis_decomposition(shape: Sequence[int], indices: Sequence[Sequence[int]],
                        weights: Sequence[float] | None = None) -> Decomposition:
    shape = validate_shape(shape)
    terms = [RankOneTerm(tuple(basis_vector(n, i) for n, i in zip(shape, idx))) for idx in indices]
    return Decomposition(shape, terms, weights)


def maximal_two_orthogonal_decomposition(shape: Sequence[int], weights: Sequence[float] | None = None,
                                         rng_seed: int = 0) -> Decomposition:
    """Basis-aligned two-orthogonal decomposition with the maximal number of terms."""
    idx = maximal_index_set(shape)
    if weights is None:
        weights = random_weights(len(idx), rng_seed)
    elif len(weights) != len(idx):
        raise ValueError(f"{len(weights)} weights given for {len(idx)} terms")
    return basis_decomposition(shape, idx, weights)


def distance3_subset(n: int, d: int) -> list[tuple[int, ...]]:
    """``n - 1`` tuples of the alternating index set with pairwise Hamming distance >= 3."""
    if n < 2:
        raise ValueError("need n >= 2")
    if d < 3:
        raise ValueError("need d >= 3")
    if d % 2 == 0:
        return [(i,) * d for i in range(1, n)]
    if n % 2 == 1:
        return [(i,) * (d - 1) + (2 * i % n,) for i in range(1, n)]
    low = [(i,) * (d - 1) + (2 * i % n,) for i in range(1, n // 2 + 1)]
    high = [(i,) * (d - 2) + ((i + 1) % n, 2 * i + 1 - n) for i in range(n // 2 + 1, n)]
    return low + high
