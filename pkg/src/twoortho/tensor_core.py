"""Dense real tensors, rank-one terms and decompositions.

Tensors are plain ``numpy.ndarray`` objects of dtype float64 with C (row-major)
layout, so ``t.ravel()`` is the coordinate vector with the last index running
fastest.  Indices are 0-based throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

MAX_TENSOR_SIZE = 10**6
RANK_RTOL = 1e-9


class TensorError(ValueError):
    """Invalid shape, mismatched dimensions or non-finite data."""


class ZeroFactorError(TensorError):
    """A rank-one term has a zero factor vector."""


def validate_shape(shape: Iterable[int]) -> tuple[int, ...]:
    shape = tuple(int(n) for n in shape)
    if len(shape) < 2:
        raise TensorError(f"a tensor needs at least 2 factors, got shape {shape}")
    if any(n < 2 for n in shape):
        raise TensorError(f"every factor dimension must be >= 2, got shape {shape}")
    if int(np.prod(shape, dtype=object)) > MAX_TENSOR_SIZE:
        raise TensorError(f"shape {shape} exceeds the desk-scale cap of {MAX_TENSOR_SIZE} entries")
    return shape


def as_tensor(t, shape: Sequence[int] | None = None) -> np.ndarray:
    """Return ``t`` as a validated float64 tensor, optionally checking its shape."""
    arr = np.array(t, dtype=float)
    validate_shape(arr.shape)
    if shape is not None and arr.shape != tuple(shape):
        raise TensorError(f"expected shape {tuple(shape)}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise TensorError("tensor has non-finite entries")
    return arr


def basis_vector(n: int, i: int) -> np.ndarray:
    e = np.zeros(n)
    e[i] = 1.0
    return e


def outer(*vectors: np.ndarray) -> np.ndarray:
    """Outer product ``v_1 ⊗ ... ⊗ v_d`` as a dense array."""
    out = np.asarray(vectors[0], dtype=float)
    for v in vectors[1:]:
        out = np.multiply.outer(out, np.asarray(v, dtype=float))
    return out


@dataclass(frozen=True, eq=False)
class RankOneTerm:
    """A rank-one tensor ``x_1 ⊗ ... ⊗ x_d`` stored through its factors."""

    factors: tuple[np.ndarray, ...]

    def __post_init__(self):
        factors = tuple(np.array(f, dtype=float).reshape(-1) for f in self.factors)
        if len(factors) < 2:
            raise TensorError("a rank-one term needs at least 2 factors")
        for k, f in enumerate(factors):
            if not np.all(np.isfinite(f)):
                raise TensorError(f"factor {k} has non-finite entries")
            if not np.any(f):
                raise ZeroFactorError(f"factor {k} is the zero vector")
        object.__setattr__(self, "factors", factors)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(f.size for f in self.factors)

    @property
    def order(self) -> int:
        return len(self.factors)

    @property
    def scale(self) -> float:
        """Frobenius norm of the term, the product of the factor norms."""
        return float(np.prod([np.linalg.norm(f) for f in self.factors]))

    def unit_factors(self) -> tuple[np.ndarray, ...]:
        return tuple(f / np.linalg.norm(f) for f in self.factors)

    def to_tensor(self, weight: float = 1.0) -> np.ndarray:
        return term_to_tensor(self, weight)


@dataclass(eq=False)
class Decomposition:
    """A weighted sum of rank-one terms ``sum_i w_i x^(i)`` in a fixed shape."""

    shape: tuple[int, ...]
    terms: list[RankOneTerm] = field(default_factory=list)
    weights: np.ndarray | None = None

    def __post_init__(self):
        self.shape = validate_shape(self.shape)
        self.terms = [t if isinstance(t, RankOneTerm) else RankOneTerm(tuple(t)) for t in self.terms]
        for i, term in enumerate(self.terms):
            if term.shape != self.shape:
                raise TensorError(f"term {i} has shape {term.shape}, decomposition shape is {self.shape}")
        if self.weights is None:
            self.weights = np.ones(len(self.terms))
        else:
            self.weights = np.array(self.weights, dtype=float).reshape(-1)
            if self.weights.size != len(self.terms):
                raise TensorError(
                    f"{self.weights.size} weights given for {len(self.terms)} terms"
                )

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def order(self) -> int:
        return len(self.shape)

    def term_tensor(self, i: int) -> np.ndarray:
        return term_to_tensor(self.terms[i], self.weights[i])

    def term_tensors(self) -> list[np.ndarray]:
        return [self.term_tensor(i) for i in range(len(self))]

    def subset(self, indices: Iterable[int]) -> "Decomposition":
        idx = list(indices)
        return Decomposition(self.shape, [self.terms[i] for i in idx], self.weights[idx])

    def normalized(self) -> "Decomposition":
        """Same tensor, unit factors, with every scale moved into the weights."""
        terms = [RankOneTerm(t.unit_factors()) for t in self.terms]
        weights = np.array([w * t.scale for w, t in zip(self.weights, self.terms)])
        return Decomposition(self.shape, terms, weights)


def term_to_tensor(term: RankOneTerm, weight: float = 1.0) -> np.ndarray:
    return weight * outer(*term.factors)


def assemble(decomp: Decomposition) -> np.ndarray:
    """Sum of the weighted terms; the empty decomposition gives the zero tensor."""
    total = np.zeros(decomp.shape)
    for term, w in zip(decomp.terms, decomp.weights):
        if term.shape != decomp.shape:
            raise TensorError(f"term shape {term.shape} does not match {decomp.shape}")
        total += term_to_tensor(term, w)
    return total


def _same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise TensorError(f"shape mismatch: {a.shape} vs {b.shape}")


def inner_product(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    _same_shape(a, b)
    return float(np.dot(a.ravel(), b.ravel()))


def frobenius_norm(t) -> float:
    return float(np.linalg.norm(np.asarray(t, dtype=float).ravel()))


def contract_all_but(t, k: int, vectors: Sequence[np.ndarray]) -> np.ndarray:
    """Evaluate ``T(x_1, ..., x_{k-1}, ., x_{k+1}, ..., x_d)``.

    ``vectors`` holds the d-1 vectors for the factors other than ``k`` in
    factor order.  The result is a vector of length ``n_k``.
    """
    t = np.asarray(t, dtype=float)
    d = t.ndim
    if not 0 <= k < d:
        raise TensorError(f"factor index {k} out of range for order {d}")
    if len(vectors) != d - 1:
        raise TensorError(f"expected {d - 1} vectors, got {len(vectors)}")
    out = t
    # Contract from the last axis backwards so axis numbers stay valid.
    others = [j for j in range(d) if j != k]
    for j, v in zip(reversed(others), reversed(list(vectors))):
        v = np.asarray(v, dtype=float)
        if v.shape != (t.shape[j],):
            raise TensorError(f"vector for factor {j} has length {v.size}, expected {t.shape[j]}")
        out = np.tensordot(out, v, axes=([j], [0]))
    return out


def flattening(t, subset: Iterable[int]) -> np.ndarray:
    """Matrix reshaping with the factors in ``subset`` as rows, the rest as columns."""
    t = np.asarray(t, dtype=float)
    rows = sorted(set(int(k) for k in subset))
    cols = [k for k in range(t.ndim) if k not in rows]
    if not rows or not cols or any(not 0 <= k < t.ndim for k in rows):
        raise TensorError(f"subset {rows} must be a nonempty proper subset of range({t.ndim})")
    m = int(np.prod([t.shape[k] for k in rows]))
    return np.transpose(t, rows + cols).reshape(m, -1)


def numerical_rank(mat: np.ndarray, rtol: float = RANK_RTOL) -> int:
    s = np.linalg.svd(mat, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def flattening_rank(t, subset: Iterable[int], rtol: float = RANK_RTOL) -> int:
    return numerical_rank(flattening(t, subset), rtol)


def flattening_rank_bound(t, rtol: float = RANK_RTOL) -> int:
    """Largest flattening rank over all bipartitions, a lower bound on border rank."""
    t = np.asarray(t, dtype=float)
    d = t.ndim
    best = 0
    for size in range(1, d // 2 + 1):
        for subset in combinations(range(d), size):
            best = max(best, flattening_rank(t, subset, rtol))
    return best


# JSON wire formats

def tensor_to_json(t) -> dict:
    t = np.asarray(t, dtype=float)
    return {"shape": list(t.shape), "coords": t.ravel().tolist()}


def tensor_from_json(obj: dict) -> np.ndarray:
    try:
        shape = validate_shape(obj["shape"])
        coords = np.array(obj["coords"], dtype=float)
    except (KeyError, TypeError) as exc:
        raise TensorError(f"malformed tensor JSON: {exc}") from None
    if coords.size != int(np.prod(shape)):
        raise TensorError(f"{coords.size} coordinates given for shape {shape}")
    return as_tensor(coords.reshape(shape))


def decomposition_to_json(decomp: Decomposition) -> dict:
    return {
        "shape": list(decomp.shape),
        "terms": [{"factors": [f.tolist() for f in term.factors]} for term in decomp.terms],
        "weights": np.asarray(decomp.weights, dtype=float).tolist(),
    }


def decomposition_from_json(obj: dict) -> Decomposition:
    try:
        shape = obj["shape"]
        terms = [RankOneTerm(tuple(term["factors"])) for term in obj["terms"]]
    except (KeyError, TypeError) as exc:
        raise TensorError(f"malformed decomposition JSON: {exc}") from None
    return Decomposition(shape, terms, obj.get("weights"))
