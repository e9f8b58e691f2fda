import numpy as np


from twoortho.tensor_core import Decomposition, RankOneTerm

E0, E1 = np.eye(2)


def term(*factors):
    return RankOneTerm(tuple(np.asarray(f, dtype=float) for f in factors))


def example_1_1() -> Decomposition:
    """``e1⊗(e0+e1)⊗(e0−e1) + e0⊗e1⊗e1 + e0⊗e0⊗e0``."""
    return Decomposition((2, 2, 2), [term(E1, E0 + E1, E0 - E1), term(E0, E1, E1), term(E0, E0, E0)])


def sey_decomposition() -> Decomposition:
    """``3 e0⊗e0⊗e0 + e1⊗e1⊗(½e0 + 2e1) + e0⊗e1⊗e2`` in R^2⊗R^2⊗R^3."""
    f = np.eye(3)
    return Decomposition((2, 2, 3), [term(E0, E0, f[0]), term(E1, E1, 0.5 * f[0] + 2 * f[1]), term(E0, E1, f[2])],
                         [3.0, 1.0, 1.0])


def sey_alpha_tensors() -> list[np.ndarray]:
    """The two other critical rank-two approximations, one per root of ``505a² − 1010a + 144``."""
    out = []
    for a in np.roots([505.0, -1010.0, 144.0]):
        s = np.zeros((2, 2, 3))
        s[0, 0, 0] = (120 - 63 * a) / 38
        s[1, 1, 0] = (72 - 53 * a) / 76
        s[0, 0, 1] = (12 - 12 * a) / 19
        s[1, 1, 1] = a
        s[0, 1, 2] = 1.0
        out.append(s)
    return out


def even_parity(d: int):
    """The tensor with ones at even-weight indices, with its basis and its 2-term decompositions."""
    idx = [i for i in np.ndindex(*(2,) * d) if sum(i) % 2 == 0]
    basis = Decomposition((2,) * d, [term(*(np.eye(2)[k] for k in i)) for i in idx])
    plus, minus = E0 + E1, E0 - E1
    two = Decomposition((2,) * d, [term(*(plus,) * d), term(*(minus,) * d)], [0.5, 0.5])
    t = np.zeros((2,) * d)
    for i in idx:
        t[i] = 1.0
    return t, basis, two
