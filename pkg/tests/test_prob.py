from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from brc.prob import (DiscretePMF, ProbError, entropy, factorizes, is_markov_chain, marginalize,
                      markov_violation, mutual_information, point_mass, random_pmf, uniform)


def h2(p):
    return -p * np.log2(p) - (1 - p) * np.log2(1 - p)


def bsc_joint(p, exact=False):
    if exact:
        p = Fraction(p)
        probs = np.array([(1 - p) / 2, p / 2, p / 2, (1 - p) / 2], dtype=object)
    else:
        probs = np.array([(1 - p) / 2, p / 2, p / 2, (1 - p) / 2])
    return DiscretePMF(("X", "Y"), (2, 2), probs)


# -- construction ---------------------------------------------------------

def test_rejects_bad_tables():
    with pytest.raises(ProbError):
        DiscretePMF(("X",), (2,), [0.5, 0.6])
    with pytest.raises(ProbError):
        DiscretePMF(("X",), (2,), [1.5, -0.5])
    with pytest.raises(ProbError):
        DiscretePMF(("X", "X"), (2, 2), np.full(4, 0.25))
    with pytest.raises(ProbError):
        DiscretePMF(("X",), (0,), [])
    with pytest.raises(ProbError):
        DiscretePMF(("X",), (3,), [0.5, 0.5])


def test_rational_tables_are_exact():
    p = DiscretePMF(("X",), (3,), np.array(["1/3", "1/3", "1/3"], dtype=object))
    assert p.exact and sum(p.probs.flat) == 1
    with pytest.raises(ProbError):
        DiscretePMF(("X",), (2,), np.array([Fraction(1, 3), Fraction(1, 3)], dtype=object))


def test_json_round_trip():
    rng = np.random.default_rng(0)
    for exact in (False, True):
        p = random_pmf(("A", "B"), (2, 3), rng, exact=exact)
        q = DiscretePMF.from_json(p.to_json())
        assert q.names == p.names and q.sizes == p.sizes and q.exact == exact
        assert np.array_equal(q.probs, p.probs)


def test_json_is_row_major_last_fastest():
    p = DiscretePMF.from_json({"variables": [{"name": "A", "size": 2}, {"name": "B", "size": 2}],
                               "probs": [0.1, 0.2, 0.3, 0.4]})
    assert p.probs[0, 1] == 0.2 and p.probs[1, 0] == 0.3


# -- marginalize ----------------------------------------------------------

def test_marginal_of_uniform_is_uniform():
    m = marginalize(uniform(("X", "Y"), (2, 2)), {"X"})
    assert m.names == ("X",) and np.allclose(m.probs, [0.5, 0.5])


def test_marginal_over_everything_is_identity():
    p = random_pmf(("X", "Y"), (2, 3), np.random.default_rng(1))
    assert marginalize(p, {"X", "Y"}) is p


def test_marginal_of_copy():
    probs = np.array([[0.3, 0.0], [0.0, 0.7]])
    m = marginalize(DiscretePMF(("X", "Y"), (2, 2), probs), {"Y"})
    assert np.allclose(m.probs, [0.3, 0.7])


def test_marginal_unknown_variable():
    with pytest.raises(ProbError):
        marginalize(uniform(("X",), (2,)), {"Q"})


# -- entropy and information ------------------------------------------------

def test_entropy_examples():
    assert entropy(uniform(("X",), (2,)), {"X"}) == pytest.approx(1.0)
    assert entropy(point_mass(("X",), (4,), (2,)), {"X"}) == 0.0
    b = DiscretePMF(("X",), (2,), [0.89, 0.11])
    # -(0.11 log2 0.11 + 0.89 log2 0.89) by hand: 0.3503 + 0.1496
    assert entropy(b, {"X"}) == pytest.approx(0.4999, abs=1e-4)


def test_mutual_information_examples():
    assert mutual_information(uniform(("X", "Y"), (2, 2)), {"X"}, {"Y"}) == pytest.approx(0.0)
    copy = DiscretePMF(("X", "Y"), (2, 2), [0.5, 0, 0, 0.5])
    assert mutual_information(copy, {"X"}, {"Y"}) == pytest.approx(1.0)
    assert mutual_information(bsc_joint(0.11), {"X"}, {"Y"}) == pytest.approx(0.5001, abs=1e-4)
    assert mutual_information(bsc_joint(0.11), "X", "Y") == pytest.approx(1 - h2(0.11), abs=1e-12)


def test_overlapping_sets_rejected():
    with pytest.raises(ProbError):
        mutual_information(uniform(("X", "Y"), (2, 2)), {"X"}, {"X", "Y"})


def test_markov_examples():
    # X -> BSC -> Y -> BSC -> Z
    p, q = 0.1, 0.2
    t = np.zeros((2, 2, 2))
    for x, y, z in np.ndindex(2, 2, 2):
        t[x, y, z] = 0.5 * (p if x != y else 1 - p) * (q if y != z else 1 - q)
    cascade = DiscretePMF(("X", "Y", "Z"), (2, 2, 2), t)
    assert is_markov_chain(cascade, {"X"}, {"Y"}, {"Z"})
    t = np.zeros((2, 2, 2))
    for x, y in np.ndindex(2, 2):
        t[x, y, x ^ y] = 0.25
    xor = DiscretePMF(("X", "Y", "Z"), (2, 2, 2), t)
    assert not is_markov_chain(xor, {"X"}, {"Y"}, {"Z"})
    three = random_pmf(("A", "B", "C"), (2, 2, 2), np.random.default_rng(3))
    # conditioning on A itself: A - (A, C) - B holds trivially when A is in the middle
    assert is_markov_chain(three, {"B"}, {"A", "C"}, set())


def test_exact_factorization_gives_zero():
    t = np.empty((2, 2, 2), dtype=object)
    px, kxy, kyz = [Fraction(1, 3), Fraction(2, 3)], Fraction(1, 10), Fraction(1, 5)
    for x, y, z in np.ndindex(2, 2, 2):
        t[x, y, z] = px[x] * (kxy if x != y else 1 - kxy) * (kyz if y != z else 1 - kyz)
    p = DiscretePMF(("X", "Y", "Z"), (2, 2, 2), t)
    assert factorizes(p, {"X"}, {"Y"}, {"Z"})
    assert markov_violation(p, {"X"}, {"Y"}, {"Z"}) == 0.0


# -- properties ------------------------------------------------------------

names = ("A", "B", "C", "D")


@st.composite
def pmfs(draw, exact=False):
    sizes = tuple(draw(st.lists(st.integers(1, 3), min_size=4, max_size=4)))
    seed = draw(st.integers(0, 2**32 - 1))
    alpha = draw(st.sampled_from([0.2, 1.0, 5.0]))
    return random_pmf(names, sizes, np.random.default_rng(seed), exact=exact, alpha=alpha)


@settings(max_examples=60, deadline=None)
@given(pmfs())
def test_information_properties(p):
    A, B, C, D = ({n} for n in names)
    assert mutual_information(p, A, B, C) >= 0
    assert mutual_information(p, A, B, C) == pytest.approx(mutual_information(p, B, A, C),
                                                           abs=1e-12)
    lhs = mutual_information(p, A, B | D, C)
    rhs = mutual_information(p, A, B, C) + mutual_information(p, A, D, B | C)
    assert lhs == pytest.approx(rhs, abs=1e-10)
    assert entropy(p, A | B) <= np.log2(p.size_of("A") * p.size_of("B")) + 1e-12


@settings(max_examples=25, deadline=None)
@given(pmfs(exact=True))
def test_symmetry_is_exact_in_rational_mode(p):
    assert mutual_information(p, {"A"}, {"B", "C"}, {"D"}) == \
        mutual_information(p, {"B", "C"}, {"A"}, {"D"})


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_data_processing(seed):
    rng = np.random.default_rng(seed)
    pa = rng.dirichlet(np.ones(3))
    kab = rng.dirichlet(np.ones(3), size=3)
    kbc = rng.dirichlet(np.ones(2), size=3)
    t = pa[:, None, None] * kab[:, :, None] * kbc[None, :, :]
    p = DiscretePMF(("A", "B", "C"), (3, 3, 2), t)
    assert is_markov_chain(p, {"A"}, {"B"}, {"C"}, tol=1e-10)
    assert mutual_information(p, {"A"}, {"C"}) <= mutual_information(p, {"A"}, {"B"}) + 1e-10
