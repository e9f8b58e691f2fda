"""Verification of two-orthogonal decompositions and the deflation driver.

A decomposition ``sum_i w_i x^(i)`` is two-orthogonal when every pair of
terms has orthogonal factor vectors in at least two factor positions.
Such decompositions are exactly the ones whose terms can be peeled off as
critical rank-one approximations in any order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Sequence

import numpy as np

from .latin import maximal_index_set
from .svt import SvtConfig, best_rank_one, critical_residual, enumerate_svts
from .tensor_core import (
    Decomposition,
    RankOneTerm,
    TensorError,
    as_tensor,
    assemble,
    frobenius_norm,
    validate_shape,
)

ORTHO_TOL = 1e-9
EXACT_RTOL = 1e-8
MAX_SUBSET_TERMS = 12
MAX_STRONG_ORDER = 20


class DeflationError(ValueError):
    """A given-order deflation step is not a critical rank-one approximation."""

    def __init__(self, step: int, residual: float):
        self.step = step
        self.residual = residual
        super().__init__(f"step {step}: term is not a critical rank-one approximation "
                         f"of the current residual (residual {residual:.3e})")


@dataclass
class OrthogonalityProfile:
    """For each unordered pair of terms, the factors in which they are orthogonal."""

    r: int
    order: int
    pairs: dict[tuple[int, int], frozenset[int]] = field(default_factory=dict)

    def factors(self, i: int, j: int) -> frozenset[int]:
        return self.pairs[(min(i, j), max(i, j))]

    def matrix(self) -> list[list[list[int]]]:
        """``r x r`` nested list of sorted factor sets (diagonal holds every factor)."""
        out = [[list(range(self.order)) if i == j else [] for j in range(self.r)] for i in range(self.r)]
        for (i, j), ks in self.pairs.items():
            out[i][j] = out[j][i] = sorted(ks)
        return out

    def failing_pairs(self) -> list[tuple[int, int]]:
        return [p for p, ks in sorted(self.pairs.items()) if len(ks) < 2]


def _cosines(decomp: Decomposition) -> np.ndarray:
    """``cos[k, i, j]``: absolute cosine between factor k of terms i and j."""
    r = len(decomp)
    out = np.ones((decomp.order, r, r))
    for k in range(decomp.order):
        if r == 0:
            break
        m = np.stack([term.factors[k] / np.linalg.norm(term.factors[k]) for term in decomp.terms])
        out[k] = np.abs(m @ m.T)
    return out


def orthogonality_profile(decomp: Decomposition, tol: float = ORTHO_TOL) -> OrthogonalityProfile:
    cos = _cosines(decomp)
    prof = OrthogonalityProfile(len(decomp), decomp.order)
    for i, j in combinations(range(len(decomp)), 2):
        prof.pairs[(i, j)] = frozenset(int(k) for k in np.flatnonzero(cos[:, i, j] <= tol))
    return prof


def is_two_orthogonal(decomp: Decomposition, tol: float = ORTHO_TOL) -> bool:
    return not orthogonality_profile(decomp, tol).failing_pairs()


def is_strong_two_orthogonal(decomp: Decomposition, tol: float = ORTHO_TOL) -> tuple[bool, frozenset[int] | None]:
    """Search for a bipartition ``J | J^c`` of the factors witnessing every pair on both sides.

    Returns ``(True, J)`` for the first witness in order of increasing size
    then lexicographic order, or ``(False, None)``.
    """
    d = decomp.order
    if d > MAX_STRONG_ORDER:
        raise TensorError(f"order {d} exceeds the exhaustive search limit {MAX_STRONG_ORDER}")
    sets = list(orthogonality_profile(decomp, tol).pairs.values())
    for size in range(1, d):
        for sub in combinations(range(d), size):
            j = frozenset(sub)
            if all(ks & j and ks - j for ks in sets):
                return True, j
    return False, None


def is_basis_aligned(decomp: Decomposition, tol: float = ORTHO_TOL) -> bool:
    cos = _cosines(decomp)
    return bool(np.all((cos <= tol) | (cos >= 1.0 - tol)))


def order_independence_check(decomp: Decomposition, cfg: SvtConfig | None = None) -> bool:
    """Whether every term stays a critical rank-one approximation after removing any other terms.

    For each ``j`` and every subset ``I`` of the remaining terms, the weighted
    term ``w_j x^(j)`` must satisfy the singular vector tuple equations of
    ``t - sum_{i in I} w_i x^(i)`` with singular value equal to its own scale.
    """
    cfg = cfg or SvtConfig()
    r = len(decomp)
    if r > MAX_SUBSET_TERMS:
        raise TensorError(f"{r} terms exceeds the subset enumeration limit {MAX_SUBSET_TERMS}")
    t = assemble(decomp)
    tol = cfg.svt_tol * max(1.0, frobenius_norm(t))
    parts = decomp.term_tensors()
    for j in range(r):
        others = [i for i in range(r) if i != j]
        for size in range(len(others) + 1):
            for sub in combinations(others, size):
                s = t - sum((parts[i] for i in sub), np.zeros(decomp.shape))
                if critical_residual(s, decomp.terms[j], decomp.weights[j]) > tol:
                    return False
    return True


def pythagoras_check(decomp: Decomposition) -> bool:
    """``|t|^2 = sum_i |w_i x^(i)|^2`` to relative 1e-10."""
    total = frobenius_norm(assemble(decomp)) ** 2
    parts = sum((w * term.scale) ** 2 for term, w in zip(decomp.terms, decomp.weights))
    return bool(abs(total - parts) <= 1e-10 * max(total, 1e-300))


@dataclass
class DeflationResult:
    """Terms in subtraction order, residual norm after each step, and exactness."""

    decomposition: Decomposition
    residual_norms: list[float]
    exact: bool

    @property
    def residual_norm(self) -> float:
        return self.residual_norms[-1] if self.residual_norms else float("nan")


def deflate(t, strategy: str = "greedy", max_terms: int = 100, tol: float = EXACT_RTOL,
            cfg: SvtConfig | None = None, targets: Sequence[float] | None = None,
            order: Decomposition | None = None) -> DeflationResult:
    """Repeatedly subtract a critical rank-one approximation from the residual.

    ``strategy`` picks the approximation at each step:

    ``greedy``
        the best rank-one approximation of the residual;
    ``by-weight``
        the singular vector tuple whose ``|λ|`` is closest to ``targets[j]``
        (at most ``len(targets)`` steps);
    ``given-order``
        the terms of ``order`` in sequence, each checked to be critical for
        the current residual; a failure raises :class:`DeflationError`
        naming the 1-based step.

    Stops once the residual norm is at most ``tol * |t|``.  ``exact`` reports
    whether the final residual is below ``1e-8 * |t|``.
    """
    cfg = cfg or SvtConfig()
    t = as_tensor(t)
    if max_terms < 1:
        raise ValueError("max_terms must be at least 1")
    tnorm = frobenius_norm(t)
    if strategy == "given-order":
        if order is None:
            raise ValueError("given-order needs a decomposition")
        if tuple(order.shape) != t.shape:
            raise TensorError(f"decomposition shape {order.shape} does not match tensor {t.shape}")
        max_terms = min(max_terms, len(order))
    elif strategy == "by-weight":
        if not targets:
            raise ValueError("by-weight needs a list of target weights")
        max_terms = min(max_terms, len(targets))
    elif strategy != "greedy":
        raise ValueError(f"unknown strategy {strategy!r}")

    s = t.copy()
    terms, weights, norms = [], [], []
    svt_tol = cfg.svt_tol * max(1.0, tnorm)
    for step in range(max_terms):
        if frobenius_norm(s) <= tol * tnorm:
            break
        if strategy == "given-order":
            term, w = order.terms[step], float(order.weights[step])
            res = critical_residual(s, term, w)
            if res > svt_tol:
                raise DeflationError(step + 1, res)
        else:
            if strategy == "greedy":
                rec = best_rank_one(s, cfg)
            else:
                recs = [r for r in enumerate_svts(s, cfg) if r.singular_value != 0.0]
                if not recs:
                    break
                rec = min(recs, key=lambda r: abs(abs(r.singular_value) - abs(targets[step])))
            term, w = rec.to_term(), rec.singular_value
        s = s - term.to_tensor(w)
        terms.append(term)
        weights.append(w)
        norms.append(frobenius_norm(s))
    decomp = Decomposition(t.shape, terms, weights)
    exact = frobenius_norm(s) <= EXACT_RTOL * tnorm
    return DeflationResult(decomp, norms, exact)


def max_two_orthogonal_length(shape: Sequence[int]) -> int:
    """``min_k prod_{j != k} n_j``: the largest possible two-orthogonal length."""
    shape = validate_shape(shape)
    total = int(np.prod(shape, dtype=object))
    return min(total // n for n in shape)


# Partially symmetric tensors

@dataclass(frozen=True)
class PartiallySymmetricShape:
    """Symmetric blocks ``S^{d_i} R^{m_i}`` given as ``(m_i, d_i)`` followed by plain factors."""

    symmetric_blocks: tuple[tuple[int, int], ...]
    plain_factors: tuple[int, ...] = ()

    def __post_init__(self):
        blocks = tuple((int(m), int(d)) for m, d in self.symmetric_blocks)
        plain = tuple(int(n) for n in self.plain_factors)
        if any(m < 2 or d < 2 for m, d in blocks) or any(n < 2 for n in plain):
            raise TensorError("block dimensions, multiplicities and plain dimensions must be >= 2")
        object.__setattr__(self, "symmetric_blocks", blocks)
        object.__setattr__(self, "plain_factors", plain)

    def expanded_shape(self) -> tuple[int, ...]:
        """Shape of the ambient plain tensor space, each block repeated d_i times."""
        out = []
        for m, d in self.symmetric_blocks:
            out.extend([m] * d)
        return tuple(out) + self.plain_factors


@dataclass(frozen=True, eq=False)
class PSTerm:
    """``l_1^{d_1} ⊗ ... ⊗ l_p^{d_p} ⊗ u_1 ⊗ ... ⊗ u_q``."""

    forms: tuple[np.ndarray, ...]
    plains: tuple[np.ndarray, ...] = ()

    def __post_init__(self):
        forms = tuple(np.array(f, dtype=float).reshape(-1) for f in self.forms)
        plains = tuple(np.array(u, dtype=float).reshape(-1) for u in self.plains)
        for v in forms + plains:
            if not np.any(v):
                raise TensorError("partially symmetric term has a zero linear form or vector")
        object.__setattr__(self, "forms", forms)
        object.__setattr__(self, "plains", plains)


def _check_ps_term(shape: PartiallySymmetricShape, term: PSTerm) -> None:
    dims = [m for m, _ in shape.symmetric_blocks]
    if [f.size for f in term.forms] != dims or [u.size for u in term.plains] != list(shape.plain_factors):
        raise TensorError("partially symmetric term does not match the shape")


def max_length_partially_symmetric(shape: PartiallySymmetricShape) -> int:
    """``m_1 ... m_p n_1 ... n_{q-1}`` with the plain factors sorted ascending."""
    if not shape.plain_factors:
        raise TensorError("the maximal length needs at least one plain factor")
    plain = sorted(shape.plain_factors)
    return int(np.prod([m for m, _ in shape.symmetric_blocks] + plain[:-1], dtype=object))


def is_two_orthogonal_partially_symmetric(shape: PartiallySymmetricShape, terms: Sequence[PSTerm],
                                          tol: float = ORTHO_TOL) -> bool:
    """Every pair orthogonal in at least two slots, a block counting ``d_i`` slots."""
    for term in terms:
        _check_ps_term(shape, term)

    def cos(a, b):
        return abs(a @ b) / (np.linalg.norm(a) * np.linalg.norm(b))

    for a, b in combinations(terms, 2):
        count = sum(d for (_, d), f, g in zip(shape.symmetric_blocks, a.forms, b.forms) if cos(f, g) <= tol)
        count += sum(1 for u, v in zip(a.plains, b.plains) if cos(u, v) <= tol)
        if count < 2:
            return False
    return True


def ps_to_decomposition(shape: PartiallySymmetricShape, terms: Sequence[PSTerm],
                        weights: Sequence[float] | None = None) -> Decomposition:
    """The same terms as an ordinary decomposition with each form repeated ``d_i`` times."""
    out = []
    for term in terms:
        _check_ps_term(shape, term)
        factors = []
        for (_, d), f in zip(shape.symmetric_blocks, term.forms):
            factors.extend([f] * d)
        out.append(RankOneTerm(tuple(factors) + term.plains))
    return Decomposition(shape.expanded_shape(), out, weights)


def maximal_partially_symmetric_terms(shape: PartiallySymmetricShape) -> list[PSTerm]:
    """Basis terms over every block index combined with a maximal plain index set."""
    if not shape.plain_factors:
        raise TensorError("the construction needs at least one plain factor")
    plain = shape.plain_factors
    plain_set = [(0,)] if len(plain) == 1 else maximal_index_set(plain)
    block_ranges = [range(m) for m, _ in shape.symmetric_blocks]
    terms = []
    for idx in product(*block_ranges):
        for j in plain_set:
            forms = tuple(np.eye(m)[i] for (m, _), i in zip(shape.symmetric_blocks, idx))
            plains = tuple(np.eye(n)[i] for n, i in zip(plain, j))
            terms.append(PSTerm(forms, plains))
    return terms


def verification_report(decomp: Decomposition, tol: float = ORTHO_TOL, cfg: SvtConfig | None = None) -> dict:
    """Summary used by the command line; pairs and factors are reported 1-based."""
    prof = orthogonality_profile(decomp, tol)
    failures = [
        f"pair ({i + 1},{j + 1}): orthogonal factors {{{','.join(str(k + 1) for k in sorted(prof.factors(i, j)))}}} < 2"
        for i, j in prof.failing_pairs()
    ]
    two = not failures
    strong, witness = is_strong_two_orthogonal(decomp, tol) if decomp.order <= MAX_STRONG_ORDER else (False, None)
    report = {
        "terms": len(decomp),
        "shape": list(decomp.shape),
        "max_length": max_two_orthogonal_length(decomp.shape),
        "profile": [[[k + 1 for k in ks] for ks in row] for row in prof.matrix()],
        "two_orthogonal": two,
        "strong_two_orthogonal": strong,
        "strong_witness": sorted(k + 1 for k in witness) if witness else None,
        "basis_aligned": is_basis_aligned(decomp, tol),
        "pythagoras": pythagoras_check(decomp),
        "failures": failures,
    }
    if len(decomp) <= MAX_SUBSET_TERMS:
        report["order_independent"] = order_independence_check(decomp, cfg)
    return report
