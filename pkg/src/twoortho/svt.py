"""Singular vector tuples: critical rank-one approximations of a tensor.

A unit rank-one tensor ``x = x_1 ⊗ ... ⊗ x_d`` is a singular vector tuple of
``T`` with singular value ``λ`` when ``T(x_1, .., ., .., x_d) = λ x_k`` for
every factor ``k``.  Real tuples are found by multistart: alternating power
iteration (which converges to local maxima of ``|<T, x>|``) plus a damped
Newton solve started directly from random points (which also reaches the
saddle-type tuples that power iteration never converges to).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from ._newton import damped_newton
from .tensor_core import (
    Decomposition,
    RankOneTerm,
    TensorError,
    as_tensor,
    assemble,
    contract_all_but,
    frobenius_norm,
    inner_product,
    outer,
)

_LETTERS = "abcdefghijklmnopqrstuvwxy"
SIGN_TOL = 1e-8


class SvtError(ValueError):
    pass


@dataclass(frozen=True)
class SvtConfig:
    num_starts: int = 200
    power_max_iters: int = 500
    newton_max_iters: int = 25
    svt_tol: float = 1e-10
    dedupe_tol: float = 1e-7
    rng_seed: int = 0

    def __post_init__(self):
        for name in ("num_starts", "power_max_iters", "newton_max_iters"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.svt_tol < self.dedupe_tol:
            raise ValueError("need 0 < svt_tol < dedupe_tol")


@dataclass(frozen=True, eq=False)
class SvtRecord:
    """Unit factors, singular value and the residual of the defining equations."""

    factors: tuple[np.ndarray, ...]
    singular_value: float
    residual: float

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(f.size for f in self.factors)

    def unit_tensor(self) -> np.ndarray:
        return outer(*self.factors)

    def tensor(self) -> np.ndarray:
        """The critical rank-one approximation ``λ x``."""
        return self.singular_value * outer(*self.factors)

    def to_term(self) -> RankOneTerm:
        return RankOneTerm(self.factors)

    def to_json(self) -> dict:
        return {
            "factors": [f.tolist() for f in self.factors],
            "lambda": float(self.singular_value),
            "residual": float(self.residual),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SvtRecord":
        return cls(tuple(np.array(f, dtype=float) for f in obj["factors"]),
                   float(obj["lambda"]), float(obj["residual"]))


def canonical_sign(factors: Sequence[np.ndarray], lam: float) -> tuple[tuple[np.ndarray, ...], float]:
    """Make the first non-negligible entry of every factor positive.

    Each flip is pushed into ``lam`` so the tensor ``lam * x`` is unchanged.
    """
    out = []
    for f in factors:
        f = np.array(f, dtype=float)
        big = np.flatnonzero(np.abs(f) > SIGN_TOL)
        if big.size and f[big[0]] < 0:
            f = -f
            lam = -lam
        out.append(f)
    return tuple(out), float(lam) + 0.0


def make_record(t: np.ndarray, factors: Sequence[np.ndarray]) -> SvtRecord:
    """Normalize ``factors``, evaluate the residual against ``t`` and fix the sign."""
    unit = [np.asarray(f, dtype=float) / np.linalg.norm(f) for f in factors]
    res, lam = _residual_unit(t, unit, None)
    unit, lam = canonical_sign(unit, lam)
    return SvtRecord(unit, lam, res)


def _residual_unit(t: np.ndarray, unit: Sequence[np.ndarray], lam: float | None) -> tuple[float, float]:
    if lam is None:
        lam = float(contract_all_but(t, 0, unit[1:]) @ unit[0])
    res = 0.0
    for k in range(t.ndim):
        others = [unit[j] for j in range(t.ndim) if j != k]
        res = max(res, float(np.linalg.norm(contract_all_but(t, k, others) - lam * unit[k])))
    return res, lam


def _factors_of(term) -> tuple[np.ndarray, ...]:
    if isinstance(term, RankOneTerm):
        return term.factors
    if isinstance(term, SvtRecord):
        return term.factors
    return RankOneTerm(tuple(term)).factors


def svt_residual(t, term, weight: float | None = None) -> tuple[float, float]:
    """Violation of the singular vector tuple equations for the direction of ``term``.

    Returns ``(residual, lam)`` with ``lam = <t, x>`` for the normalized term
    ``x`` and ``residual = max_k ||T(x_{-k}) - lam x_k||``.  When ``weight`` is
    given the singular value is fixed to it instead, so a zero residual means
    ``weight * x`` is a critical rank-one approximation of ``t``.
    """
    t = np.asarray(t, dtype=float)
    factors = _factors_of(term)
    if len(factors) != t.ndim or any(f.size != n for f, n in zip(factors, t.shape)):
        raise TensorError(f"term shape {tuple(f.size for f in factors)} does not match {t.shape}")
    norms = [np.linalg.norm(f) for f in factors]
    if min(norms) == 0.0:
        raise TensorError("term has a zero factor")
    unit = [f / n for f, n in zip(factors, norms)]
    return _residual_unit(t, unit, weight)


def critical_residual(t, term, weight: float = 1.0) -> float:
    """Residual of ``weight * term`` as a critical rank-one approximation of ``t``."""
    factors = _factors_of(term)
    signed = weight * float(np.prod([np.linalg.norm(f) for f in factors]))
    return svt_residual(t, factors, weight=signed)[0]


def is_singular_vector_tuple(t, term, cfg: SvtConfig | None = None) -> bool:
    cfg = cfg or SvtConfig()
    return svt_residual(t, term)[0] <= cfg.svt_tol


def tangent_residual(r, factors: Sequence[np.ndarray]) -> float:
    """Largest component of ``r`` along the tangent space of the Segre cone at ``x``.

    ``T_x X`` is spanned by ``x_1 ⊗ .. ⊗ R^{n_k} ⊗ .. ⊗ x_d``; projecting onto
    the k-th piece is contraction of ``r`` with the unit factors other than k.
    """
    r = np.asarray(r, dtype=float)
    unit = [np.asarray(f, dtype=float) / np.linalg.norm(f) for f in factors]
    worst = 0.0
    for k in range(r.ndim):
        others = [unit[j] for j in range(r.ndim) if j != k]
        worst = max(worst, float(np.linalg.norm(contract_all_but(r, k, others))))
    return worst


# Batched kernels: every array below carries a leading batch axis ``z``.

_PATHS: dict = {}


def _batch_contract(t: np.ndarray, xs: Sequence[np.ndarray], keep: tuple[int, ...]) -> np.ndarray:
    d = t.ndim
    if len(keep) == d:
        return np.broadcast_to(np.transpose(t, keep), (len(xs[0]),) + tuple(t.shape[k] for k in keep))
    subs = [_LETTERS[:d]]
    ops = [t]
    for j in range(d):
        if j not in keep:
            subs.append("z" + _LETTERS[j])
            ops.append(xs[j])
    expr = ",".join(subs) + "->z" + "".join(_LETTERS[k] for k in keep)
    key = (expr, t.shape, len(xs[0]))
    path = _PATHS.get(key)
    if path is None:
        path = _PATHS[key] = np.einsum_path(expr, *ops, optimize="greedy")[0]
    return np.einsum(expr, *ops, optimize=path)


def _power_sweep(t: np.ndarray, xs: list[np.ndarray]) -> np.ndarray:
    lam = None
    for k in range(t.ndim):
        v = _batch_contract(t, xs, (k,))
        nrm = np.linalg.norm(v, axis=1)
        ok = nrm > 0
        xs[k] = np.where(ok[:, None], v / np.where(ok, nrm, 1.0)[:, None], xs[k])
        lam = nrm
    return lam


def power_iteration(t, factors: Sequence[np.ndarray], max_iters: int = 500, tol: float = 1e-15):
    """Alternating (higher-order) power iteration from one start.

    Each step replaces ``x_k`` by the normalized contraction ``T(x_{-k})``.
    Returns the unit factors and the objective ``|<T, x>|`` recorded after
    every single-factor update, which never decreases.
    """
    t = np.asarray(t, dtype=float)
    xs = [np.asarray(f, dtype=float)[None, :] / np.linalg.norm(f) for f in factors]
    history = [abs(float(_batch_contract(t, xs, (0,))[0] @ xs[0][0]))]
    for _ in range(max_iters):
        before = history[-1]
        for k in range(t.ndim):
            v = _batch_contract(t, xs, (k,))[0]
            nrm = np.linalg.norm(v)
            if nrm == 0.0:
                return tuple(x[0] for x in xs), history
            xs[k] = (v / nrm)[None, :]
            history.append(float(nrm))
        if history[-1] - before <= tol * max(1.0, history[-1]):
            break
    return tuple(x[0] for x in xs), history


def _newton_system(t: np.ndarray, xs: list[np.ndarray], mu: np.ndarray):
    """Square system ``T(x_{-k}) - mu_k x_k = 0``, ``(|x_k|^2 - 1)/2 = 0``.

    One multiplier per factor keeps the system square; at a solution all
    multipliers coincide with the singular value.
    """
    d = t.ndim
    dims = t.shape
    offs = np.concatenate([[0], np.cumsum(dims)])
    s = int(offs[-1])
    b = xs[0].shape[0]
    size = s + d
    F = np.zeros((b, size))
    J = np.zeros((b, size, size))
    for k in range(d):
        rk = slice(offs[k], offs[k + 1])
        v = _batch_contract(t, xs, (k,))
        F[:, rk] = v - mu[:, k, None] * xs[k]
        F[:, s + k] = 0.5 * (np.sum(xs[k] ** 2, axis=1) - 1.0)
        J[:, rk, rk] = -mu[:, k, None, None] * np.eye(dims[k])
        J[:, rk, s + k] = -xs[k]
        J[:, s + k, rk] = xs[k]
        for j in range(d):
            if j != k:
                rj = slice(offs[j], offs[j + 1])
                J[:, rk, rj] = _batch_contract(t, xs, (k, j))
    return F, J


def _split(z: np.ndarray, dims: Sequence[int]):
    offs = np.concatenate([[0], np.cumsum(dims)])
    xs = [z[:, offs[k]:offs[k + 1]] for k in range(len(dims))]
    mu = z[:, offs[-1]:]
    return xs, mu


def _newton_batch(t: np.ndarray, xs: list[np.ndarray], max_iters: int, scale: float) -> list[np.ndarray]:
    dims = t.shape
    lam = np.einsum("za,za->z", _batch_contract(t, xs, (0,)), xs[0])
    mu = np.repeat(lam[:, None], t.ndim, axis=1)

    def system(z):
        zxs, zmu = _split(z, dims)
        return _newton_system(t, list(zxs), zmu)

    z, _ = damped_newton(system, np.concatenate(xs + [mu], axis=1), max_iters, scale)
    zxs, _ = _split(z, dims)
    return [np.array(x) for x in zxs]


def _random_starts(shape: Sequence[int], cfg: SvtConfig) -> list[np.ndarray]:
    xs = [np.empty((cfg.num_starts, n)) for n in shape]
    for s in range(cfg.num_starts):
        rng = np.random.default_rng([cfg.rng_seed, s])
        for k, n in enumerate(shape):
            v = rng.standard_normal(n)
            xs[k][s] = v / np.linalg.norm(v)
    return xs


def _power_batch(t: np.ndarray, xs: list[np.ndarray], max_iters: int) -> list[np.ndarray]:
    xs = [x.copy() for x in xs]
    prev = None
    for _ in range(max_iters):
        lam = _power_sweep(t, xs)
        if prev is not None and np.max(np.abs(lam - prev)) <= 1e-15 * max(1.0, float(np.max(lam))):
            break
        prev = lam
    return xs


def _collect(t: np.ndarray, xs: list[np.ndarray], cfg: SvtConfig, tnorm: float) -> list[SvtRecord]:
    records = []
    for s in range(xs[0].shape[0]):
        factors = [x[s] for x in xs]
        norms = [np.linalg.norm(f) for f in factors]
        if min(norms) == 0.0 or not all(np.all(np.isfinite(f)) for f in factors):
            continue
        rec = make_record(t, factors)
        if rec.residual <= cfg.svt_tol * max(1.0, tnorm):
            records.append(rec)
    return records


def record_distance(a: SvtRecord, b: SvtRecord) -> float:
    """Sign-invariant distance between two records (unit tensors and |λ|)."""
    xa, xb = a.unit_tensor(), b.unit_tensor()
    direction = min(np.linalg.norm(xa - xb), np.linalg.norm(xa + xb))
    return float(max(direction, abs(abs(a.singular_value) - abs(b.singular_value))))


def _sort_key(rec: SvtRecord):
    flat = np.concatenate(rec.factors)
    return (-round(abs(rec.singular_value), 9), tuple(np.round(flat, 9)))


def dedupe_records(records: Sequence[SvtRecord], tol: float) -> list[SvtRecord]:
    """Merge records closer than ``tol``, keeping the one with smaller residual."""
    kept: list[SvtRecord] = []
    for rec in sorted(records, key=lambda r: (r.residual, _sort_key(r))):
        if all(record_distance(rec, k) > tol for k in kept):
            kept.append(rec)
    return sorted(kept, key=_sort_key)


def match_record_sets(a: Sequence[SvtRecord], b: Sequence[SvtRecord], tol: float) -> bool:
    """True when the two record lists are the same set up to ``tol``."""
    if len(a) != len(b):
        return False
    unused = list(b)
    for rec in a:
        dists = [record_distance(rec, other) for other in unused]
        if not dists:
            return False
        i = int(np.argmin(dists))
        if dists[i] > tol:
            return False
        unused.pop(i)
    return True


def _check_nonzero(t: np.ndarray) -> float:
    tnorm = frobenius_norm(t)
    if tnorm == 0.0:
        raise SvtError("the zero tensor has no critical rank-one approximation")
    return tnorm


def enumerate_svts(t, cfg: SvtConfig | None = None) -> list[SvtRecord]:
    """Real singular vector tuples, sorted by ``|λ|`` descending.

    Tuples with singular value 0 are included; they count towards the
    generic number of tuples of a format.

    Every start is used twice: power iteration followed by Newton polishing,
    and Newton directly from the random point.
    """
    cfg = cfg or SvtConfig()
    t = as_tensor(t)
    tnorm = _check_nonzero(t)
    starts = _random_starts(t.shape, cfg)
    powered = _newton_batch(t, _power_batch(t, starts, cfg.power_max_iters), cfg.newton_max_iters, tnorm)
    direct = _newton_batch(t, starts, 4 * cfg.newton_max_iters, tnorm)
    records = _collect(t, powered, cfg, tnorm) + _collect(t, direct, cfg, tnorm)
    return dedupe_records(records, cfg.dedupe_tol)


def best_rank_one(t, cfg: SvtConfig | None = None) -> SvtRecord:
    """Singular vector tuple with the largest ``|λ|``.

    The global maximizer of ``|<T, x>|`` is an attracting fixed point of power
    iteration, so only the power route is run here.  Ties within 1e-10 go to
    the record earliest in canonical order.  If nothing meets ``svt_tol`` the
    best candidate is returned with a warning; its ``residual`` shows it.
    """
    cfg = cfg or SvtConfig()
    t = as_tensor(t)
    tnorm = _check_nonzero(t)
    xs = _newton_batch(t, _power_batch(t, _random_starts(t.shape, cfg), cfg.power_max_iters),
                       cfg.newton_max_iters, tnorm)
    lam = np.abs(np.einsum("za,za->z", _batch_contract(t, xs, (0,)), xs[0]))
    lam /= np.prod([np.linalg.norm(x, axis=1) for x in xs], axis=0)
    order = np.argsort(-lam, kind="stable")
    candidates = [make_record(t, [x[s] for x in xs]) for s in order[: min(len(order), 16)]]
    good = [c for c in candidates if c.residual <= cfg.svt_tol * max(1.0, tnorm)]
    if not good:
        best = min(candidates, key=lambda c: c.residual)
        warnings.warn(f"best_rank_one did not converge (residual {best.residual:.2e})", RuntimeWarning)
        return best
    top = max(abs(c.singular_value) for c in good)
    ties = [c for c in good if abs(c.singular_value) >= top - 1e-10 * max(1.0, top)]
    ties = dedupe_records(ties, cfg.dedupe_tol)
    return sorted(ties, key=lambda r: tuple(np.round(np.concatenate(r.factors), 9)))[0]


def brute_force_svts_222(t, samples: int = 20000) -> list[SvtRecord]:
    """Independent enumeration for shape (2, 2, 2) by scanning the third factor.

    For ``w = (cos θ, sin θ)`` every singular pair ``(u, v)`` of the slice
    ``T(., ., w)`` already satisfies the first two equations; the tuple is
    singular exactly when ``T(u, v, .)`` is parallel to ``w``.  The signed
    defect ``det[w, T(u, v, .)]`` is π-periodic, so its sign changes on a
    shifted grid over one period bracket every tuple, which is then refined
    by Brent's method.  Where the slice has a repeated singular value its
    singular pairs form a circle; those slices are located by minimizing
    the singular gap, the circle is scanned the same way and the candidates
    are polished by Newton's method.
    """
    t = as_tensor(t, (2, 2, 2))
    tnorm = _check_nonzero(t)

    def pairs(theta):
        w = np.array([np.cos(theta), np.sin(theta)])
        m = np.einsum("abc,c->ab", t, w)
        u, s, vt = np.linalg.svd(m)
        return w, u, s, vt

    def defect(theta, i):
        w, u, s, vt = pairs(theta)
        z = np.einsum("abc,a,b->c", t, u[:, i], vt[i])
        return w[0] * z[1] - w[1] * z[0]

    thetas = np.pi * (np.arange(samples + 1) + 0.3819660112501051) / samples
    ws = np.stack([np.cos(thetas), np.sin(thetas)], axis=1)
    u, _, vt = np.linalg.svd(np.einsum("abc,zc->zab", t, ws))
    found = []
    for i in range(2):
        z = np.einsum("abc,za,zb->zc", t, u[:, :, i], vt[:, i, :])
        vals = ws[:, 0] * z[:, 1] - ws[:, 1] * z[:, 0]
        for a in np.flatnonzero(vals[:-1] * vals[1:] <= 0):
            if vals[a] == 0.0:
                root = thetas[a]
            elif vals[a + 1] == 0.0:
                continue
            else:
                root = brentq(defect, thetas[a], thetas[a + 1], args=(i,), xtol=1e-16, rtol=1e-15, maxiter=200)
            w, uu, s, vv = pairs(root)
            rec = make_record(t, [uu[:, i], vv[i], w])
            if rec.residual <= 1e-9 * max(1.0, tnorm):
                found.append(rec)
    found += _degenerate_slices_222(t, thetas, tnorm)
    return dedupe_records(found, 1e-7)


def _degenerate_slices_222(t: np.ndarray, thetas: np.ndarray, tnorm: float,
                           circle_samples: int = 4000) -> list[SvtRecord]:
    ws = np.stack([np.cos(thetas), np.sin(thetas)], axis=1)
    s = np.linalg.svd(np.einsum("abc,zc->zab", t, ws), compute_uv=False)
    gap = s[:, 0] - s[:, 1]

    def gap_at(theta):
        m = np.einsum("abc,c->ab", t, [np.cos(theta), np.sin(theta)])
        sv = np.linalg.svd(m, compute_uv=False)
        return sv[0] - sv[1]

    phis = np.pi * (np.arange(circle_samples + 1) + 0.3819660112501051) / circle_samples
    us = np.stack([np.cos(phis), np.sin(phis)], axis=1)
    candidates = []
    for a in range(1, len(thetas) - 1):
        if not (gap[a] <= gap[a - 1] and gap[a] <= gap[a + 1] and gap[a] <= 1e-2 * tnorm):
            continue
        opt = minimize_scalar(gap_at, bounds=(thetas[a - 1], thetas[a + 1]), method="bounded",
                              options={"xatol": 1e-14})
        if opt.fun > 1e-6 * tnorm:
            continue
        w = np.array([np.cos(opt.x), np.sin(opt.x)])
        m = np.einsum("abc,c->ab", t, w)
        vs = us @ m
        vs /= np.linalg.norm(vs, axis=1, keepdims=True)
        z = np.einsum("abc,za,zb->zc", t, us, vs)
        vals = w[0] * z[:, 1] - w[1] * z[:, 0]
        for b in np.flatnonzero(vals[:-1] * vals[1:] <= 0):
            # Linear interpolation is enough here; Newton polishes below.
            step = vals[b + 1] - vals[b]
            phi = phis[b] - vals[b] * (phis[b + 1] - phis[b]) / step if step else phis[b]
            u = np.array([np.cos(phi), np.sin(phi)])
            v = u @ m
            candidates.append((u, v / np.linalg.norm(v), w))
    if not candidates:
        return []
    xs = [np.array([c[k] for c in candidates]) for k in range(3)]
    xs = _newton_batch(t, xs, 30, max(1.0, tnorm))
    out = []
    for i in range(len(candidates)):
        rec = make_record(t, [x[i] for x in xs])
        if rec.residual <= 1e-9 * max(1.0, tnorm):
            out.append(rec)
    return out


def is_critical_rank_k(t, prefix: Decomposition, rtol: float = 1e-9) -> bool:
    """Whether ``t - assemble(prefix)`` is normal to the Segre cone at every prefix term.

    Under Terracini's lemma the tangent space of the k-th secant variety at
    the prefix sum is spanned by these tangent spaces, so this is the
    criticality test for the rank-k truncation.
    """
    t = as_tensor(t)
    r = t - assemble(prefix)
    bound = rtol * max(frobenius_norm(t), 1e-300)
    return all(tangent_residual(r, term.factors) <= bound for term in prefix.terms)


def rank_one_residual_identity(t, rec: SvtRecord) -> float:
    """Relative defect of ``|t - λx|² + λ² = |t|²`` for a record."""
    t = np.asarray(t, dtype=float)
    lhs = frobenius_norm(t - rec.tensor()) ** 2 + rec.singular_value ** 2
    rhs = inner_product(t, t)
    return abs(lhs - rhs) / rhs
