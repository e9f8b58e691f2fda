"""Parametrized families of two-orthogonal tensors and their dimension.

The family behind the dimension lower bound is

    phi(λ, θ^(1), ..., θ^(d)) = sum_{i in I} λ_i u_{i_1}(θ^(1)) ⊗ ... ⊗ u_{i_d}(θ^(d)),

where ``I`` is the index set of an alternating Latin hypercube and the
columns ``u_k(θ)`` of a triangular frame ``U(θ)`` are pairwise orthogonal.
The dimension of its image is estimated by the numerical rank of a
central-difference Jacobian.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Callable, Sequence

import numpy as np

from .latin import latin_hypercube
from .tensor_core import Decomposition, TensorError

FD_STEP = 1e-6
RANK_RTOL = 1e-7
FRAME_COND_LIMIT = 1e12


def frame_pairs(n: int) -> list[tuple[int, int]]:
    """Positions ``(i, j)``, ``i > j``, of the free entries of ``U(θ)`` in parameter order."""
    return [(i, j) for i in range(1, n) for j in range(i)]


def orthogonal_frame(n: int, theta: Sequence[float]) -> np.ndarray:
    """``U(θ)`` with unit diagonal, ``θ`` below it and orthogonal columns.

    Entries above the diagonal are solved column by column: the unknown
    top part ``x`` of column ``j`` satisfies ``U[:j, :j]^T x = -U[j:, :j]^T U[j:, j]``.
    """
    theta = np.asarray(theta, dtype=float).reshape(-1)
    pairs = frame_pairs(n)
    if theta.size != len(pairs):
        raise TensorError(f"a frame in dimension {n} needs {len(pairs)} parameters, got {theta.size}")
    if not np.all(np.isfinite(theta)):
        raise TensorError("frame parameters must be finite")
    u = np.eye(n)
    for (i, j), v in zip(pairs, theta):
        u[i, j] = v
    for j in range(1, n):
        a = u[:j, :j].T
        if np.linalg.cond(a) > FRAME_COND_LIMIT:
            raise TensorError("frame parameters are outside the region where the columns can be completed")
        u[:j, j] = np.linalg.solve(a, -u[j:, :j].T @ u[j:, j])
    return u


def alternating_index_set(n: int, d: int) -> list[tuple[int, ...]]:
    """``{(i_1, ..., i_{d-1}, L(i))}`` for the alternating hypercube.

    ``L`` is written for indices starting at 1; in 0-based form this adds 1
    for odd ``d`` (the alternating sum of d - 2 ones).
    """
    return latin_hypercube(n, d, "alternating", shift=d % 2).index_set()


def multilinear(core: np.ndarray, frames: Sequence[np.ndarray]) -> np.ndarray:
    """``core ×_1 U_1 ×_2 ... ×_d U_d``: column ``i_k`` of ``U_k`` replaces basis vector ``i_k``."""
    out = core
    for k, u in enumerate(frames):
        out = np.moveaxis(np.tensordot(u, out, axes=([1], [k])), 0, k)
    return out


@dataclass(frozen=True)
class PhiParametrization:
    """``phi`` as a map from a flat parameter vector ``(λ, θ^(1), ..., θ^(d))``."""

    n: int
    d: int

    @property
    def index_set(self) -> list[tuple[int, ...]]:
        return alternating_index_set(self.n, self.d)

    @property
    def num_params(self) -> int:
        return self.n ** (self.d - 1) + self.d * comb(self.n, 2)

    @property
    def expected_dimension(self) -> int:
        return self.num_params

    def split(self, x: Sequence[float]):
        x = np.asarray(x, dtype=float)
        if x.size != self.num_params:
            raise TensorError(f"expected {self.num_params} parameters, got {x.size}")
        m = self.n ** (self.d - 1)
        c = comb(self.n, 2)
        return x[:m], [x[m + k * c: m + (k + 1) * c] for k in range(self.d)]

    def point(self, lambdas: Sequence[float], thetas: Sequence[Sequence[float]] | None = None) -> np.ndarray:
        if thetas is None:
            thetas = [np.zeros(comb(self.n, 2))] * self.d
        return np.concatenate([np.asarray(lambdas, dtype=float)] + [np.asarray(t, dtype=float) for t in thetas])

    def tensor(self, x: Sequence[float]) -> np.ndarray:
        lambdas, thetas = self.split(x)
        core = np.zeros((self.n,) * self.d)
        for lam, idx in zip(lambdas, self.index_set):
            core[idx] = lam
        return multilinear(core, [orthogonal_frame(self.n, t) for t in thetas])

    def __call__(self, x: Sequence[float]) -> np.ndarray:
        return self.tensor(x).ravel()


def phi_map(n: int, d: int, lambdas: Sequence[float], thetas: Sequence[Sequence[float]] | None = None) -> np.ndarray:
    p = PhiParametrization(n, d)
    return p.tensor(p.point(lambdas, thetas))


def finite_difference_jacobian(f: Callable[[np.ndarray], np.ndarray], x: Sequence[float],
                               h: float = FD_STEP) -> np.ndarray:
    """Central differences, one column per parameter."""
    if h <= 0:
        raise ValueError("step must be positive")
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        col = (np.asarray(f(x + e)) - np.asarray(f(x - e))) / (2 * h)
        if not np.all(np.isfinite(col)):
            raise TensorError(f"map is not finite near the point along parameter {i}")
        cols.append(col.ravel())
    return np.stack(cols, axis=1)


def jacobian_singular_values(f, x, h: float = FD_STEP) -> np.ndarray:
    return np.linalg.svd(finite_difference_jacobian(f, x, h), compute_uv=False)


def jacobian_rank(f, x, h: float = FD_STEP, rtol: float = RANK_RTOL) -> int:
    s = jacobian_singular_values(f, x, h)
    return int(np.sum(s > rtol * s[0])) if s.size and s[0] > 0 else 0


# Non-basis-aligned family in (R^4)^{⊗3}

_GIVENS_PAIRS = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]

# Each term lists, per factor, which frame vector it uses: 0..3 are e1..e4,
# 4..7 are e1'..e4' (e1', e2' rotate inside span{e1, e2}, e3', e4' inside span{e3, e4}).
PRESET_444_TERMS = [
    ("111", (0, 0, 0)), ("122", (0, 1, 1)), ("133", (4, 2, 2)), ("144", (4, 3, 3)),
    ("212", (1, 0, 1)), ("221", (1, 1, 0)), ("234", (5, 2, 3)), ("243", (5, 3, 2)),
    ("313", (2, 4, 6)), ("324", (2, 5, 7)), ("331", (6, 6, 4)), ("342", (6, 7, 5)),
    ("414", (3, 4, 7)), ("423", (3, 5, 6)), ("432", (7, 6, 5)), ("441", (7, 7, 4)),
]
PRESET_444_PARAMS = 40


def givens_frame(angles: Sequence[float]) -> np.ndarray:
    """Orthonormal 4-frame as a product of the six plane rotations."""
    q = np.eye(4)
    for (i, j), a in zip(_GIVENS_PAIRS, angles):
        g = np.eye(4)
        c, s = np.cos(a), np.sin(a)
        g[i, i] = g[j, j] = c
        g[i, j], g[j, i] = -s, s
        q = q @ g
    return q


def preset_444_vectors(block: Sequence[float]) -> np.ndarray:
    """The eight vectors e1..e4, e1'..e4' of one factor as columns of a 4x8 matrix."""
    q = givens_frame(block[:6])
    b, g = block[6], block[7]
    e1, e2, e3, e4 = q.T
    primes = [np.cos(b) * e1 + np.sin(b) * e2, -np.sin(b) * e1 + np.cos(b) * e2,
              np.cos(g) * e3 + np.sin(g) * e4, -np.sin(g) * e3 + np.cos(g) * e4]
    return np.column_stack([e1, e2, e3, e4] + primes)


def preset_444_terms(params: Sequence[float]):
    """``(weights, factor vectors)`` of the 16 terms; params are 3 x 8 angles then 16 weights."""
    params = np.asarray(params, dtype=float)
    if params.size != PRESET_444_PARAMS:
        raise TensorError(f"expected {PRESET_444_PARAMS} parameters, got {params.size}")
    vecs = [preset_444_vectors(params[8 * k: 8 * k + 8]) for k in range(3)]
    lambdas = params[24:]
    factors = [tuple(vecs[k][:, which[k]] for k in range(3)) for _, which in PRESET_444_TERMS]
    return lambdas, factors


def preset_444_map(params: Sequence[float]) -> np.ndarray:
    lambdas, factors = preset_444_terms(params)
    out = np.zeros((4, 4, 4))
    for lam, (a, b, c) in zip(lambdas, factors):
        out += lam * np.einsum("i,j,k->ijk", a, b, c)
    return out.ravel()


def random_preset_444_params(rng_seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(rng_seed)
    angles = rng.uniform(-np.pi, np.pi, 24)
    weights = rng.uniform(0.5, 2.0, 16) * rng.choice([-1.0, 1.0], 16)
    return np.concatenate([angles, weights])


def preset_444(params: Sequence[float] | None = None, rng_seed: int = 0) -> np.ndarray:
    """Assembled tensor of the 16-term family; random parameters when none are given."""
    if params is None:
        params = random_preset_444_params(rng_seed)
    return preset_444_map(params).reshape(4, 4, 4)


def preset_444_decomposition(params: Sequence[float] | None = None, rng_seed: int = 0):
    if params is None:
        params = random_preset_444_params(rng_seed)
    lambdas, factors = preset_444_terms(params)
    return Decomposition((4, 4, 4), [f for f in factors], lambdas)
