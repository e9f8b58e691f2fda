"""The two-orthogonal variety of 2x2x2 tensors.

``W = Z(f) ∪ W2^{23} ∪ W2^{13} ∪ W2^{12}`` where ``f`` is a quartic built
from the elliptope cubic ``g`` and each ``W2`` component is cut out by two
quadrics.  This module evaluates those certificates, classifies tensors
into strata, writes down the singular vector tuples of the generic
representatives in closed form, recovers decompositions from singular
vector tuples, and computes nearest points on ``W``.

Coordinates are ``t[i, j, k]`` with 0-based indices; flat vectors follow
``t.ravel()`` (``t000, t001, t010, ..., t111``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations, product
from typing import NamedTuple, Sequence

import numpy as np

from ._newton import damped_newton
from .svt import SvtConfig, SvtRecord, enumerate_svts, make_record
from .tensor_core import Decomposition, RankOneTerm, TensorError, as_tensor, frobenius_norm

STRATA = ("RankOne", "Odeco", "W2_23", "W2_13", "W2_12", "W3", "W4", "NotTwoOrthogonal")
W2_COMPONENTS = ("23", "13", "12")
CLASSIFY_TOL = 1e-9
# Factor permutations taking a component to {2,3}: swap factors 1,2 for {1,3}; 1,3 for {1,2}.
_SWAPS = {"23": (0, 1, 2), "13": (1, 0, 2), "12": (2, 1, 0)}


def eval_elliptope_g(z1, z2, z3, z4):
    return 2 * z1 * z2 * z3 + z1 ** 2 * z4 + z2 ** 2 * z4 + z3 ** 2 * z4 - z4 ** 3


def _batch(t) -> tuple[np.ndarray, bool]:
    """View input as ``(B, 2, 2, 2)``; remembers whether it was a single tensor."""
    arr = np.asarray(t, dtype=float)
    if arr.shape == (2, 2, 2):
        return arr[None], True
    if arr.ndim == 4 and arr.shape[1:] == (2, 2, 2):
        return arr, False
    raise TensorError(f"expected shape (2, 2, 2), got {arr.shape}")


def _out(values: np.ndarray, single: bool):
    return float(values[0]) if single else values


def eval_det(t):
    """Cayley's hyperdeterminant."""
    b, single = _batch(t)
    a = {f"{i}{j}{k}": b[:, i, j, k] for i, j, k in product(range(2), repeat=3)}
    v = (a["000"] ** 2 * a["111"] ** 2 + a["001"] ** 2 * a["110"] ** 2
         + a["010"] ** 2 * a["101"] ** 2 + a["100"] ** 2 * a["011"] ** 2
         - 2 * a["000"] * a["001"] * a["110"] * a["111"]
         - 2 * a["000"] * a["010"] * a["101"] * a["111"]
         - 2 * a["000"] * a["100"] * a["011"] * a["111"]
         - 2 * a["001"] * a["100"] * a["011"] * a["110"]
         - 2 * a["001"] * a["010"] * a["101"] * a["110"]
         - 2 * a["010"] * a["100"] * a["011"] * a["101"]
         + 4 * a["000"] * a["011"] * a["101"] * a["110"]
         + 4 * a["001"] * a["010"] * a["100"] * a["111"])
    return _out(v, single)


def eval_f(t):
    """``sum (-1)^{i+j+k} t_ijk g(t_{i+1,j,k}, t_{i,j+1,k}, t_{i,j,k+1}, t_{i+1,j+1,k+1})``, indices mod 2."""
    b, single = _batch(t)
    v = np.zeros(len(b))
    for i, j, k in product(range(2), repeat=3):
        v += (-1) ** (i + j + k) * b[:, i, j, k] * eval_elliptope_g(
            b[:, 1 - i, j, k], b[:, i, 1 - j, k], b[:, i, j, 1 - k], b[:, 1 - i, 1 - j, 1 - k])
    return _out(v, single)


def _w2_23(b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    t = lambda s: b[:, int(s[0]), int(s[1]), int(s[2])]  # noqa: E731
    qa = -t("000") * t("101") + t("100") * t("001") - t("010") * t("111") + t("110") * t("011")
    qb = -t("000") * t("110") + t("100") * t("010") - t("001") * t("111") + t("101") * t("011")
    return qa, qb


def eval_w2_quadrics(t) -> dict:
    """``{"23": (qa, qb), "13": ..., "12": ...}``, the two quadrics of each component."""
    b, single = _batch(t)
    out = {}
    for comp in W2_COMPONENTS:
        perm = _SWAPS[comp]
        qa, qb = _w2_23(np.transpose(b, (0,) + tuple(p + 1 for p in perm)))
        out[comp] = (_out(qa, single), _out(qb, single))
    return out


def flattening_minors(t) -> np.ndarray:
    """All 2x2 minors of the three flattenings, shape ``(18,)`` or ``(B, 18)``."""
    b, single = _batch(t)
    vals = []
    for k in range(3):
        m = np.moveaxis(b, k + 1, 1).reshape(len(b), 2, 4)
        for c1, c2 in combinations(range(4), 2):
            vals.append(m[:, 0, c1] * m[:, 1, c2] - m[:, 0, c2] * m[:, 1, c1])
    out = np.stack(vals, axis=1)
    return out[0] if single else out


# Polynomial data for gradients and Hessians

_SYMBOLS = [f"t{i}{j}{k}" for i, j, k in product(range(2), repeat=3)]


class PolyArray:
    """A polynomial in the 8 coordinates as coefficient and exponent arrays."""

    def __init__(self, coefs: np.ndarray, exps: np.ndarray):
        self.coefs = np.asarray(coefs, dtype=float)
        self.exps = np.asarray(exps, dtype=int).reshape(-1, 8)

    @classmethod
    def from_sympy(cls, expr, symbols) -> "PolyArray":
        import sympy

        poly = sympy.Poly(sympy.expand(expr), *symbols)
        terms = poly.terms()
        if not terms:
            return cls(np.zeros(0), np.zeros((0, 8), dtype=int))
        exps, coefs = zip(*terms)
        return cls(np.array([float(c) for c in coefs]), np.array(exps))

    def __len__(self) -> int:
        return len(self.coefs)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        """Evaluate at rows of ``x`` (shape ``(B, 8)``)."""
        x = np.asarray(x, dtype=float).reshape(-1, 8)
        if not len(self):
            return np.zeros(len(x))
        mono = np.prod(x[:, None, :] ** self.exps[None, :, :], axis=2)
        return mono @ self.coefs


class PolySet:
    """A polynomial with its gradient and Hessian, evaluated through one shared monomial table."""

    def __init__(self, value: PolyArray, grad: Sequence[PolyArray], hess: Sequence[Sequence[PolyArray]]):
        self.value = value
        self.grad = tuple(grad)
        self.hess = tuple(tuple(row) for row in hess)
        polys = [value, *self.grad, *(p for row in self.hess for p in row)]
        exps = sorted({tuple(e) for p in polys for e in p.exps})
        col = {e: i for i, e in enumerate(exps)}
        self._exps = np.array(exps, dtype=int).reshape(-1, 8)
        self._coefs = np.zeros((len(polys), len(exps)))
        for r, p in enumerate(polys):
            for c, e in zip(p.coefs, p.exps):
                self._coefs[r, col[tuple(e)]] += c
        self._degree = int(self._exps.max()) if len(exps) else 0

    def evaluate(self, x: np.ndarray):
        x = np.asarray(x, dtype=float).reshape(-1, 8)
        powers = np.stack([x ** p for p in range(self._degree + 1)], axis=2)
        mono = np.prod(powers[:, np.arange(8)[None, :], self._exps], axis=2)
        out = mono @ self._coefs.T
        return out[:, 0], out[:, 1:9], out[:, 9:].reshape(-1, 8, 8)


def _sympy_tensor():
    import sympy

    syms = sympy.symbols(_SYMBOLS)
    t = np.empty((2, 2, 2), dtype=object)
    for s, (i, j, k) in zip(syms, product(range(2), repeat=3)):
        t[i, j, k] = s
    return syms, t


def sympy_f():
    """``f`` as an expanded sympy expression in ``t000, ..., t111``."""
    import sympy

    syms, t = _sympy_tensor()
    expr = 0
    for i, j, k in product(range(2), repeat=3):
        expr += (-1) ** (i + j + k) * t[i, j, k] * eval_elliptope_g(
            t[1 - i, j, k], t[i, 1 - j, k], t[i, j, 1 - k], t[1 - i, 1 - j, 1 - k])
    return sympy.expand(expr), syms


def sympy_w2(component: str):
    import sympy

    syms, t = _sympy_tensor()
    tt = np.transpose(t, _SWAPS[component])
    qa = -tt[0, 0, 0] * tt[1, 0, 1] + tt[1, 0, 0] * tt[0, 0, 1] - tt[0, 1, 0] * tt[1, 1, 1] + tt[1, 1, 0] * tt[0, 1, 1]
    qb = -tt[0, 0, 0] * tt[1, 1, 0] + tt[1, 0, 0] * tt[0, 1, 0] - tt[0, 0, 1] * tt[1, 1, 1] + tt[1, 0, 1] * tt[0, 1, 1]
    return sympy.expand(qa), sympy.expand(qb), syms


def _polyset(expr, syms) -> PolySet:
    import sympy

    grads = [sympy.diff(expr, s) for s in syms]
    return PolySet(
        PolyArray.from_sympy(expr, syms),
        tuple(PolyArray.from_sympy(g, syms) for g in grads),
        tuple(tuple(PolyArray.from_sympy(sympy.diff(g, s), syms) for s in syms) for g in grads),
    )


@lru_cache(maxsize=None)
def f_polyset() -> PolySet:
    expr, syms = sympy_f()
    return _polyset(expr, syms)


@lru_cache(maxsize=None)
def w2_polysets(component: str) -> tuple[PolySet, PolySet]:
    qa, qb, syms = sympy_w2(component)
    return _polyset(qa, syms), _polyset(qb, syms)


# Classification

@dataclass
class StratumCertificate:
    """Scale-normalized certificate values and the resulting stratum."""

    flattening_minors_max: float
    odeco_quadrics_max: float
    w2_quadrics_max: dict[str, float]
    det_value: float
    f_value: float
    stratum: str
    zero: bool = False
    tol: float = CLASSIFY_TOL

    @property
    def margins(self) -> dict[str, float]:
        """``tol - value`` per certificate; small magnitudes flag a stratum boundary."""
        out = {"flattening_minors": self.tol - self.flattening_minors_max,
               "odeco": self.tol - self.odeco_quadrics_max}
        out.update({f"w2_{c}": self.tol - v for c, v in self.w2_quadrics_max.items()})
        out["det"] = self.tol - abs(self.det_value)
        out["f"] = self.tol - abs(self.f_value)
        return out

    def to_json(self) -> dict:
        return {
            "flattening_minors_max": self.flattening_minors_max,
            "odeco_quadrics_max": self.odeco_quadrics_max,
            "w2_quadrics_max": dict(self.w2_quadrics_max),
            "det_value": self.det_value,
            "f_value": self.f_value,
            "stratum": self.stratum,
            "zero": self.zero,
            "tol": self.tol,
            "margins": self.margins,
        }


def certificates(t, tol: float = CLASSIFY_TOL) -> dict:
    """Vectorized certificates for a batch ``(B, 2, 2, 2)``.

    Every polynomial is evaluated on ``t / |t|``, which equals dividing a
    degree-k value by ``|t|^k``.  Zero tensors are RankOne.
    """
    b, _ = _batch(t)
    norms = np.sqrt(np.sum(b.reshape(len(b), -1) ** 2, axis=1))
    zero = norms == 0.0
    nb = b / np.where(zero, 1.0, norms)[:, None, None, None]
    minors = np.max(np.abs(flattening_minors(nb)), axis=1)
    quad = eval_w2_quadrics(nb)
    w2 = {c: np.maximum(np.abs(quad[c][0]), np.abs(quad[c][1])) for c in W2_COMPONENTS}
    odeco = np.max(np.stack([w2[c] for c in W2_COMPONENTS]), axis=0)
    det = eval_det(nb)
    f = eval_f(nb)
    stratum = np.full(len(b), "NotTwoOrthogonal", dtype=object)
    # Assign from the largest stratum down so smaller ones overwrite.
    stratum[np.abs(f) <= tol] = "W4"
    stratum[(np.abs(f) <= tol) & (np.abs(det) <= tol)] = "W3"
    for c in reversed(W2_COMPONENTS):
        stratum[w2[c] <= tol] = "W2_" + c
    stratum[odeco <= tol] = "Odeco"
    stratum[(minors <= tol) | zero] = "RankOne"
    return {"minors": minors, "w2": w2, "odeco": odeco, "det": det, "f": f,
            "stratum": stratum, "zero": zero, "quadrics": quad}


def classify_222(t, tol: float = CLASSIFY_TOL) -> StratumCertificate:
    as_tensor(t, (2, 2, 2))
    c = certificates(t, tol)
    return StratumCertificate(
        flattening_minors_max=float(c["minors"][0]),
        odeco_quadrics_max=float(c["odeco"][0]),
        w2_quadrics_max={k: float(v[0]) for k, v in c["w2"].items()},
        det_value=float(c["det"][0]),
        f_value=float(c["f"][0]),
        stratum=str(c["stratum"][0]),
        zero=bool(c["zero"][0]),
        tol=tol,
    )


# Representatives of the strata

def w4_representative(lambdas: Sequence[float]) -> np.ndarray:
    l1, l2, l3, l4 = lambdas
    t = np.zeros((2, 2, 2))
    t[0, 0, 0], t[0, 1, 1], t[1, 0, 1], t[1, 1, 0] = l1, l2, l3, l4
    return t


def w3_representative(lambdas: Sequence[float]) -> np.ndarray:
    return w4_representative(list(lambdas[:3]) + [0.0])


def w2_representative(component: str, l1: float, l2: float, u: Sequence[float]) -> np.ndarray:
    """``l1 e0⊗e0⊗e0 + l2 x`` with ``u`` in the factor outside the component."""
    e0, e1 = np.eye(2)
    u = np.asarray(u, dtype=float)
    factors = {"23": (u, e1, e1), "13": (e1, u, e1), "12": (e1, e1, u)}[component]
    return l1 * np.einsum("i,j,k->ijk", e0, e0, e0) + l2 * np.einsum("i,j,k->ijk", *factors)


def w2_closed_form_tensor(lam: float, y0: float) -> np.ndarray:
    """``e0⊗e0⊗e0 + lam e1⊗e1⊗(y0, 1)``, the W2^{12} form used for the closed forms."""
    t = np.zeros((2, 2, 2))
    t[0, 0, 0] = 1.0
    t[1, 1] = lam * np.array([y0, 1.0])
    return t


# Closed-form singular vector tuples

class ClosedFormSvts(NamedTuple):
    records: list[SvtRecord]
    complete: bool


def closed_form_svts_w4(lambdas: Sequence[float]) -> ClosedFormSvts:
    """Singular vector tuples of ``l1 e000 + l2 e011 + l3 e101 + l4 e110``.

    The four basis tuples plus, when the radicand is positive, the pair
    with ``u1 = v1 = w1 = 1`` and
    ``w0^2 = g(l1,l2,l4,l3) g(l1,l3,l4,l2) / (g(l1,l2,l3,l4) g(l2,l3,l4,l1))``,
    ``u0 = g(l1,l2,l3,l4) / g(l1,l3,l4,l2) w0``, ``v0 = g(l1,l2,l3,l4) / g(l1,l2,l4,l3) w0``.
    """
    l1, l2, l3, l4 = (float(x) for x in lambdas)
    t = w4_representative((l1, l2, l3, l4))
    e0, e1 = np.eye(2)
    basis = [(e0, e0, e0), (e0, e1, e1), (e1, e0, e1), (e1, e1, e0)]
    records = [make_record(t, f) for f in basis]
    g = {
        "g(l1,l2,l3,l4)": eval_elliptope_g(l1, l2, l3, l4),
        "g(l1,l3,l4,l2)": eval_elliptope_g(l1, l3, l4, l2),
        "g(l1,l2,l4,l3)": eval_elliptope_g(l1, l2, l4, l3),
        "g(l2,l3,l4,l1)": eval_elliptope_g(l2, l3, l4, l1),
    }
    for name, v in g.items():
        if v == 0.0:
            raise ZeroDivisionError(f"{name} vanishes; the closed form does not apply")
    g1234, g1342, g1243, g2341 = g.values()
    radicand = g1243 * g1342 / (g1234 * g2341)
    if radicand <= 0:
        return ClosedFormSvts(records, False)
    for s in (1.0, -1.0):
        w0 = s * np.sqrt(radicand)
        u0 = g1234 / g1342 * w0
        v0 = g1234 / g1243 * w0
        records.append(make_record(t, (np.array([u0, 1.0]), np.array([v0, 1.0]), np.array([w0, 1.0]))))
    return ClosedFormSvts(records, True)


def closed_form_svts_w2(lam: float, y0: float) -> ClosedFormSvts:
    """Singular vector tuples of ``e000 + lam e1⊗e1⊗(y0, 1)``.

    The two summands plus, with ``u1 = v1 = w1 = 1``,
    ``(±√a, ±√a, lam/(1 - lam y0))`` and ``(∓√b, ±√b, -lam/(1 + lam y0))`` where
    ``a = (lam²y0² + lam² - lam y0)/(1 - lam y0)`` and
    ``b = (lam²y0² + lam² + lam y0)/(1 + lam y0)``.
    """
    lam, y0 = float(lam), float(y0)
    t = w2_closed_form_tensor(lam, y0)
    e0, e1 = np.eye(2)
    records = [make_record(t, (e0, e0, e0))]
    if lam == 0.0:
        return ClosedFormSvts(records, True)
    for name, v in (("1 - lam*y0", 1 - lam * y0), ("1 + lam*y0", 1 + lam * y0)):
        if v == 0.0:
            raise ZeroDivisionError(f"{name} vanishes; the closed form does not apply")
    records.append(make_record(t, (e1, e1, np.array([y0, 1.0]))))
    base = lam ** 2 * y0 ** 2 + lam ** 2
    a = (base - lam * y0) / (1 - lam * y0)
    b = (base + lam * y0) / (1 + lam * y0)
    complete = True
    if a >= 0:
        for s in (1.0, -1.0):
            r = s * np.sqrt(a)
            records.append(make_record(t, (np.array([r, 1.0]), np.array([r, 1.0]),
                                           np.array([lam / (1 - lam * y0), 1.0]))))
    else:
        complete = False
    if b >= 0:
        for s in (1.0, -1.0):
            r = s * np.sqrt(b)
            records.append(make_record(t, (np.array([-r, 1.0]), np.array([r, 1.0]),
                                           np.array([-lam / (1 + lam * y0), 1.0]))))
    else:
        complete = False
    return ClosedFormSvts(records, complete)


# Recovery of the decomposition from singular vector tuples

class RecoveryError(RuntimeError):
    pass


@dataclass
class Recovery:
    decomposition: Decomposition
    alternatives: list[Decomposition] = field(default_factory=list)

    @property
    def unique(self) -> bool:
        return not self.alternatives


def _orthogonal_count(a: SvtRecord, b: SvtRecord, tol: float) -> int:
    return sum(1 for x, y in zip(a.factors, b.factors) if abs(x @ y) <= tol)


def recover_decomposition_222(t, cfg: SvtConfig | None = None, ortho_tol: float = 1e-7,
                              accept_rtol: float = 1e-8) -> Recovery:
    """Two-orthogonal decompositions assembled from the singular vector tuples of ``t``.

    Every set of pairwise compatible tuples (orthogonal in at least two
    factors) is tried with weights ``<t, x_j>``; sets reproducing ``t`` to
    ``accept_rtol`` are accepted.  The one with fewest terms (then
    lexicographic in its sorted tuple indices) is returned, the others are
    listed as alternatives.
    """
    t = as_tensor(t, (2, 2, 2))
    tnorm = frobenius_norm(t)
    if tnorm == 0.0:
        raise RecoveryError("the zero tensor has the empty decomposition only")
    stratum = classify_222(t).stratum
    if stratum == "NotTwoOrthogonal":
        raise RecoveryError("the tensor is not two-orthogonal")
    records = [r for r in enumerate_svts(t, cfg) if abs(r.singular_value) > 1e-9 * tnorm]
    n = len(records)
    ok = np.zeros((n, n), dtype=bool)
    for i, j in combinations(range(n), 2):
        ok[i, j] = ok[j, i] = _orthogonal_count(records[i], records[j], ortho_tol) >= 2
    accepted = []
    for size in range(1, n + 1):
        for sub in combinations(range(n), size):
            if not all(ok[i, j] for i, j in combinations(sub, 2)):
                continue
            parts = [records[i].tensor() for i in sub]
            if frobenius_norm(t - sum(parts)) <= accept_rtol * tnorm:
                accepted.append(sub)
    if not accepted:
        raise RecoveryError(
            f"numerical recovery failed: {n} singular vector tuples, no compatible set reproduces the tensor")
    decomps = [Decomposition((2, 2, 2), [records[i].to_term() for i in sub],
                             [records[i].singular_value for i in sub]) for sub in accepted]
    return Recovery(decomps[0], decomps[1:])


# Nearest point on W

@dataclass
class CriticalPoint:
    tensor: np.ndarray
    distance: float
    kkt_residual: float
    multipliers: np.ndarray


@dataclass
class NearestResult:
    nearest: np.ndarray
    component: str
    distance: float
    census: dict[str, list[CriticalPoint]]


def _lagrange_system(t_flat: np.ndarray, polys: Sequence[PolySet]):
    m = len(polys)

    def system(z):
        s, mu = z[:, :8], z[:, 8:]
        vals, grads, hess = zip(*(p.evaluate(s) for p in polys))
        F = np.zeros((len(z), 8 + m))
        J = np.zeros((len(z), 8 + m, 8 + m))
        F[:, :8] = t_flat - s
        J[:, :8, :8] = -np.eye(8)
        for c in range(m):
            F[:, :8] -= mu[:, c, None] * grads[c]
            J[:, :8, :8] -= mu[:, c, None, None] * hess[c]
            J[:, :8, 8 + c] = -grads[c]
            F[:, 8 + c] = vals[c]
            J[:, 8 + c, :8] = grads[c]
        return F, J

    return system


def _kkt(t_flat: np.ndarray, s: np.ndarray, grads: np.ndarray) -> float:
    """Norm of the part of ``t - S`` tangent to the component (orthogonal to the gradients)."""
    r = t_flat - s
    q, _ = np.linalg.qr(grads.T)
    return float(np.linalg.norm(r - q @ (q.T @ r)))


def _critical_points(t: np.ndarray, polys: Sequence[PolySet], num_starts: int, rng_seed: int,
                     kkt_tol: float) -> list[CriticalPoint]:
    t_flat = t.ravel()
    scale = max(1.0, frobenius_norm(t))
    rng = np.random.default_rng([rng_seed, len(polys)])
    s0 = t_flat + rng.standard_normal((num_starts, 8)) * scale / np.sqrt(8) * rng.uniform(0.1, 2.0, (num_starts, 1))
    m = len(polys)
    grads0 = np.stack([p.evaluate(s0)[1] for p in polys], axis=2)
    mu0 = np.stack([np.linalg.lstsq(g, t_flat - s, rcond=None)[0] for g, s in zip(grads0, s0)])
    z, fn = damped_newton(_lagrange_system(t_flat, polys), np.concatenate([s0, mu0.reshape(-1, m)], axis=1),
                          60, scale)
    found: list[CriticalPoint] = []
    for zi, fi in zip(z, fn):
        if not np.all(np.isfinite(zi)) or fi > 1e-10 * scale ** 3:
            continue
        s = zi[:8]
        grads = np.stack([p.evaluate(s)[1][0] for p in polys])
        gnorm = max(1.0, np.linalg.norm(s)) ** 3
        sv = np.linalg.svd(grads, compute_uv=False)
        # Singular points of the component are not smooth critical points.
        if sv[-1] <= 1e-8 * gnorm:
            continue
        if max(abs(p.value(s[None])[0]) for p in polys) > 1e-10 * gnorm * max(1.0, np.linalg.norm(s)):
            continue
        kkt = _kkt(t_flat, s, grads)
        if kkt > kkt_tol * scale:
            continue
        if any(np.linalg.norm(s - c.tensor.ravel()) <= 1e-6 * scale for c in found):
            continue
        found.append(CriticalPoint(s.reshape(2, 2, 2), float(np.linalg.norm(t_flat - s)), kkt, zi[8:]))
    return sorted(found, key=lambda c: c.distance)


def nearest_two_orthogonal_222(t, num_starts: int = 500, rng_seed: int = 0,
                               kkt_tol: float = 1e-7) -> NearestResult:
    """Closest point of ``W`` to ``t`` among real critical points of the squared distance.

    Critical points are computed separately on the quartic ``Z(f)`` and on
    each ``W2`` component by Newton's method on the Lagrange system from
    random starts.  The census lists the distinct smooth critical points per
    component (``"W4"`` for ``Z(f)``).
    """
    t = as_tensor(t, (2, 2, 2))
    census = {"W4": _critical_points(t, [f_polyset()], num_starts, rng_seed, kkt_tol)}
    for comp in W2_COMPONENTS:
        census["W2_" + comp] = _critical_points(t, list(w2_polysets(comp)), num_starts, rng_seed, kkt_tol)
    best = None
    for comp, points in census.items():
        for p in points:
            if classify_222(p.tensor).stratum == "NotTwoOrthogonal":
                continue
            if best is None or p.distance < best[1].distance:
                best = (comp, p)
    if best is None:
        raise RuntimeError("no critical point found on any component")
    return NearestResult(best[1].tensor, best[0], best[1].distance, census)


def random_rotation_2(rng) -> np.ndarray:
    a = rng.uniform(0, 2 * np.pi)
    return np.array([[np.cos(a), -np.sin(a)], [np.sin(a), np.cos(a)]])


def rotate(t: np.ndarray, rotations: Sequence[np.ndarray]) -> np.ndarray:
    return np.einsum("ai,bj,ck,ijk->abc", rotations[0], rotations[1], rotations[2], t)


def rotate_decomposition(decomp: Decomposition, rotations: Sequence[np.ndarray]) -> Decomposition:
    terms = [RankOneTerm(tuple(q @ f for q, f in zip(rotations, term.factors))) for term in decomp.terms]
    return Decomposition(decomp.shape, terms, decomp.weights)
