from itertools import permutations

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from twoortho.svt import brute_force_svts_222, enumerate_svts, match_record_sets
from twoortho.tensor_core import Decomposition, assemble, frobenius_norm
from twoortho.w222 import (
    STRATA,
    RecoveryError,
    certificates,
    classify_222,
    closed_form_svts_w2,
    closed_form_svts_w4,
    eval_det,
    eval_elliptope_g,
    eval_f,
    eval_w2_quadrics,
    f_polyset,
    flattening_minors,
    nearest_two_orthogonal_222,
    random_rotation_2,
    recover_decomposition_222,
    rotate,
    rotate_decomposition,
    sympy_f,
    sympy_w2,
    w2_closed_form_tensor,
    w2_representative,
    w3_representative,
    w4_representative,
)

from .helpers import E0, E1, even_parity, term


def _random_lambdas(rng, k):
    return rng.uniform(0.5, 2.0, k) * rng.choice([-1.0, 1.0], k)


def _unit(rng):
    v = rng.normal(size=2)
    return v / np.linalg.norm(v)


def _rotations(rng):
    return [random_rotation_2(rng) for _ in range(3)]


def test_elliptope_g_values():
    assert eval_elliptope_g(0, 0, 0, 1) == -1
    assert eval_elliptope_g(1, 1, 1, 1) == 4


def test_elliptope_g_symmetric(rng):
    z = rng.normal(size=4)
    vals = [eval_elliptope_g(*p, z[3]) for p in permutations(z[:3])]
    assert np.allclose(vals, vals[0], rtol=1e-13)


def test_det_values(rng):
    assert eval_det(term(E0, E0, E0).to_tensor()) == 0
    diag = np.zeros((2, 2, 2))
    diag[0, 0, 0] = diag[1, 1, 1] = 1
    assert eval_det(diag) == 1
    for _ in range(10):
        assert abs(eval_det(w3_representative(_random_lambdas(rng, 3)))) <= 1e-12


def test_det_wrong_shape():
    with pytest.raises(Exception):
        eval_det(np.zeros((2, 2, 3)))


def test_f_has_40_monomials():
    expr, _ = sympy_f()
    assert len(expr.as_ordered_terms()) == 40
    assert sympy.Poly(expr).is_homogeneous and sympy.Poly(expr).total_degree() == 4
    assert len(f_polyset().value) == 40


def test_f_matches_symbolic_on_integers(rng):
    expr, syms = sympy_f()
    for _ in range(5):
        t = rng.integers(-4, 5, size=(2, 2, 2))
        exact = expr.subs({s: int(v) for s, v in zip(syms, t.ravel())})
        assert eval_f(t.astype(float)) == pytest.approx(float(exact), abs=1e-9)


def test_f_vanishes_on_w4(rng):
    for _ in range(20):
        t = w4_representative(_random_lambdas(rng, 4))
        assert abs(eval_f(t)) <= 1e-10 * frobenius_norm(t) ** 4


def test_f_generic_nonzero(rng):
    for _ in range(20):
        t = rng.normal(size=(2, 2, 2))
        assert abs(eval_f(t)) / frobenius_norm(t) ** 4 > 1e-6


def test_f_flip_invariance(rng):
    t = rng.normal(size=(2, 2, 2))
    for axis in range(3):
        assert abs(eval_f(np.flip(t, axis))) == pytest.approx(abs(eval_f(t)), rel=1e-12)


def test_f_scaling(rng):
    t = rng.normal(size=(2, 2, 2))
    assert eval_f(2.5 * t) == pytest.approx(2.5 ** 4 * eval_f(t), rel=1e-12)
    assert eval_det(2.5 * t) == pytest.approx(2.5 ** 4 * eval_det(t), rel=1e-12)


def test_w2_quadric_display_23():
    # Golden values of the displayed {2,3} pair on an integer tensor.
    t = np.arange(1.0, 9.0).reshape(2, 2, 2)
    (a, b) = eval_w2_quadrics(t)["23"]
    t000, t001, t010, t011, t100, t101, t110, t111 = t.ravel()
    assert a == -t000 * t101 + t100 * t001 - t010 * t111 + t110 * t011
    assert b == -t000 * t110 + t100 * t010 - t001 * t111 + t101 * t011


def test_w2_swap_convention_golden(rng):
    # Each component vanishes on its own representative family and not on the others.
    for comp in ("23", "13", "12"):
        t = w2_representative(comp, *_random_lambdas(rng, 2), _unit(rng))
        q = eval_w2_quadrics(t)
        assert max(abs(v) for v in q[comp]) <= 1e-12
        for other in {"23", "13", "12"} - {comp}:
            assert max(abs(v) for v in q[other]) > 1e-3


def test_w2_symbolic_quadrics_match(rng):
    t = rng.normal(size=(2, 2, 2))
    for comp in ("23", "13", "12"):
        qa, qb, syms = sympy_w2(comp)
        subs = dict(zip(syms, t.ravel()))
        assert float(qa.subs(subs)) == pytest.approx(eval_w2_quadrics(t)[comp][0], abs=1e-12)
        assert float(qb.subs(subs)) == pytest.approx(eval_w2_quadrics(t)[comp][1], abs=1e-12)


def test_odeco_diagonal_in_all_w2():
    t = np.zeros((2, 2, 2))
    t[0, 0, 0], t[1, 1, 1] = 2.0, -0.7
    q = eval_w2_quadrics(t)
    assert all(max(abs(v) for v in q[c]) <= 1e-15 for c in q)
    assert classify_222(t).stratum == "Odeco"


def test_flattening_minors_rank_one(rng):
    t = term(_unit(rng), _unit(rng), _unit(rng)).to_tensor()
    assert flattening_minors(t).shape == (18,)
    assert np.max(np.abs(flattening_minors(t))) <= 1e-15
    assert classify_222(3 * t).stratum == "RankOne"


def test_classify_representatives(rng):
    for _ in range(10):
        assert classify_222(w3_representative(_random_lambdas(rng, 3))).stratum == "W3"
        assert classify_222(w4_representative(_random_lambdas(rng, 4))).stratum == "W4"
        for comp in ("23", "13", "12"):
            assert classify_222(w2_representative(comp, *_random_lambdas(rng, 2), _unit(rng))).stratum == "W2_" + comp
        assert classify_222(rng.normal(size=(2, 2, 2))).stratum == "NotTwoOrthogonal"


def test_classify_zero_tensor():
    cert = classify_222(np.zeros((2, 2, 2)))
    assert cert.stratum == "RankOne" and cert.zero


def test_certificate_json_and_margins(rng):
    cert = classify_222(w4_representative(_random_lambdas(rng, 4)))
    js = cert.to_json()
    assert js["stratum"] in STRATA
    assert set(js["w2_quadrics_max"]) == {"23", "13", "12"}
    assert cert.margins["f"] > 0
    assert "margins" in js


def test_certificates_batched(rng):
    ts = rng.normal(size=(5, 2, 2, 2))
    batch = certificates(ts)
    for i in range(5):
        single = classify_222(ts[i])
        assert batch["stratum"][i] == single.stratum
        assert batch["f"][i] == pytest.approx(single.f_value, rel=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from(["W3", "W4", "W2_23", "W2_13", "W2_12", "Odeco"]))
def test_classification_rotation_invariant(seed, stratum):
    rng = np.random.default_rng(seed)
    if stratum == "W3":
        t = w3_representative(_random_lambdas(rng, 3))
    elif stratum == "W4":
        t = w4_representative(_random_lambdas(rng, 4))
    elif stratum == "Odeco":
        t = w4_representative([1.0, 0, 0, 0]) + 0.5 * term(E1, E1, E1).to_tensor()
    else:
        t = w2_representative(stratum[3:], *_random_lambdas(rng, 2), _unit(rng))
    assert classify_222(rotate(t, _rotations(rng))).stratum == stratum


def test_closed_form_w4_matches_brute_force(rng):
    for _ in range(25):
        lam = _random_lambdas(rng, 4)
        cf = closed_form_svts_w4(lam)
        bf = brute_force_svts_222(w4_representative(lam))
        assert match_record_sets(cf.records, bf, 1e-8)
        assert len(cf.records) == (6 if cf.complete else 4)


def test_closed_form_w4_extra_pair_not_orthogonal():
    cf = closed_form_svts_w4((1.0, 2.0, 3.0, 4.0))
    assert cf.complete and len(cf.records) == 6
    for extra in cf.records[4:]:
        for f in extra.factors:
            assert 1e-6 < f[0] ** 2 < 1 - 1e-6
        for other in cf.records:
            if other is extra:
                continue
            assert sum(abs(a @ b) <= 1e-8 for a, b in zip(extra.factors, other.factors)) < 2


def test_closed_form_w4_complex_case():
    cf = closed_form_svts_w4((3.0, 2.0, 1.0, 0.5))
    assert not cf.complete
    assert len(cf.records) == 4
    assert match_record_sets(cf.records, brute_force_svts_222(w4_representative((3.0, 2.0, 1.0, 0.5))), 1e-8)


def test_closed_form_w4_vanishing_g():
    with pytest.raises(ZeroDivisionError, match="vanishes"):
        closed_form_svts_w4((0.0, 0.0, 0.0, 0.0))


def test_closed_form_w4_small_l4_continuity():
    lam = (1.0, 1.5, 2.0, 1e-4)
    cf = closed_form_svts_w4(lam)
    assert match_record_sets(cf.records, enumerate_svts(w4_representative(lam)), 1e-6)


def test_closed_form_w2_matches_brute_force(rng):
    for _ in range(25):
        lam, y0 = rng.uniform(0.2, 2.0) * rng.choice([-1, 1]), rng.uniform(-2, 2)
        cf = closed_form_svts_w2(lam, y0)
        bf = brute_force_svts_222(w2_closed_form_tensor(lam, y0))
        assert match_record_sets(cf.records, bf, 1e-8)


def test_closed_form_w2_example():
    cf = closed_form_svts_w2(0.7, 0.3)
    assert cf.complete and len(cf.records) == 6
    assert match_record_sets(cf.records, brute_force_svts_222(w2_closed_form_tensor(0.7, 0.3)), 1e-8)
    # Only the two summands are orthogonal in at least two factors.
    recs = cf.records
    pairs = [(i, j) for i in range(6) for j in range(i + 1, 6)
             if sum(abs(a @ b) <= 1e-8 for a, b in zip(recs[i].factors, recs[j].factors)) >= 2]
    assert pairs == [(0, 1)]


def test_closed_form_w2_degenerate():
    assert len(closed_form_svts_w2(0.0, 0.4).records) == 1
    with pytest.raises(ZeroDivisionError):
        closed_form_svts_w2(2.0, 0.5)


def _match_decomposition(found: Decomposition, truth: Decomposition, tol: float) -> bool:
    """Match terms up to permutation and sign; compare factor angles."""
    if len(found) != len(truth):
        return False
    used = set()
    for w, x in zip(truth.weights, truth.terms):
        hit = None
        for j, (w2, y) in enumerate(zip(found.weights, found.terms)):
            if j in used:
                continue
            angles = [np.arccos(min(1.0, abs(a @ b) / np.linalg.norm(a) / np.linalg.norm(b)))
                      for a, b in zip(x.factors, y.factors)]
            if max(angles) <= tol and abs(abs(w2 * np.prod([np.linalg.norm(f) for f in y.factors]))
                                          - abs(w * np.prod([np.linalg.norm(f) for f in x.factors]))) <= 1e-8:
                hit = j
                break
        if hit is None:
            return False
        used.add(hit)
    return True


def test_recovery_w4_rotated(rng):
    for _ in range(5):
        lam = _random_lambdas(rng, 4)
        truth = Decomposition((2, 2, 2), [term(E0, E0, E0), term(E0, E1, E1), term(E1, E0, E1), term(E1, E1, E0)],
                              lam)
        rot = _rotations(rng)
        truth = rotate_decomposition(truth, rot)
        rec = recover_decomposition_222(assemble(truth))
        assert rec.unique
        assert _match_decomposition(rec.decomposition, truth, 1e-7)


@pytest.mark.parametrize("comp", ["23", "13", "12"])
def test_recovery_w2(comp, rng):
    t = w2_representative(comp, *_random_lambdas(rng, 2), _unit(rng))
    rec = recover_decomposition_222(rotate(t, _rotations(rng)))
    assert rec.unique
    assert len(rec.decomposition) == 2


def test_recovery_even_parity_reports_both():
    t, basis, two = even_parity(3)
    rec = recover_decomposition_222(t)
    sizes = sorted([len(rec.decomposition)] + [len(a) for a in rec.alternatives])
    assert sizes[0] == 2 and 4 in sizes
    assert len(rec.decomposition) == 2
    for d in [rec.decomposition] + rec.alternatives:
        assert np.max(np.abs(assemble(d) - t)) <= 1e-10


def test_recovery_rejects_generic(rng):
    with pytest.raises(RecoveryError):
        recover_decomposition_222(rng.normal(size=(2, 2, 2)))
    with pytest.raises(RecoveryError):
        recover_decomposition_222(np.zeros((2, 2, 2)))


def test_nearest_point_perturbed_w4(rng):
    t0 = w4_representative(_random_lambdas(rng, 4))
    t = t0 + 1e-3 * rng.normal(size=(2, 2, 2))
    res = nearest_two_orthogonal_222(t, num_starts=200)
    assert res.distance <= 1e-2
    assert classify_222(res.nearest, tol=1e-7).stratum == "W4"
    assert len(res.census["W4"]) <= 12
    assert all(len(res.census["W2_" + c]) <= 4 for c in ("23", "13", "12"))


def test_nearest_point_kkt(rng):
    res = nearest_two_orthogonal_222(rng.normal(size=(2, 2, 2)), num_starts=200)
    assert set(res.census) == {"W4", "W2_23", "W2_13", "W2_12"}
    pts = [p for pts in res.census.values() for p in pts]
    assert pts
    assert all(p.kkt_residual <= 1e-7 for p in pts)
    assert res.distance == min(p.distance for p in pts if classify_222(p.tensor).stratum != "NotTwoOrthogonal")
