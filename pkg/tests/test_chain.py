import itertools

import numpy as np
import pytest
import scipy.sparse.csgraph
from hypothesis import given, settings
from hypothesis import strategies as st

from revembed.chain import (
    GeneratorMatrix,
    ProbabilityDistribution,
    closed_classes,
    invariant_distribution,
    is_irreducible,
    is_reversible,
    kolmogorov_triangle,
    restrict_to_largest_closed_class,
    validate_generator,
    validate_stochastic,
)
from revembed.errors import NotGenerator, NotSquare, NotStochastic, Singular, WrongDimension
from revembed.simulation import random_reversible_stochastic

from conftest import EXAMPLE_1, EXAMPLE_2, EXAMPLE_3, EXAMPLE_4


def random_stochastic(rng, n, zeros=0.0):
    A = rng.uniform(0.01, 1.0, size=(n, n))
    A[rng.random((n, n)) < zeros] = 0.0
    A[np.arange(n), rng.integers(0, n, size=n)] += 0.1
    return A / A.sum(axis=1, keepdims=True)


class TestValidateStochastic:
    def test_accepts_exact(self):
        P = validate_stochastic([[0.5, 0.5], [0.3, 0.7]])
        assert P.n == 2
        assert P.clamped == ()

    def test_row_sum_violation(self):
        with pytest.raises(NotStochastic) as info:
            validate_stochastic([[0.5, 0.6], [0.3, 0.7]])
        assert info.value.row == 0
        assert info.value.value == pytest.approx(1.1)

    def test_negative_entry(self):
        with pytest.raises(NotStochastic) as info:
            validate_stochastic([[1.1, -0.1], [0.3, 0.7]])
        assert (info.value.row, info.value.col) == (0, 1)

    def test_example_1_accepted(self):
        P = validate_stochastic(EXAMPLE_1)
        np.testing.assert_allclose(P.matrix.sum(axis=1), 1.0, atol=1e-12)

    def test_clamps_tiny_negative(self):
        P = validate_stochastic([[1.0 + 1e-12, -1e-12], [0.5, 0.5]])
        assert P.matrix[0, 1] == 0.0
        assert P.clamped == ((0, 1, -1e-12),)
        assert abs(P.matrix[0].sum() - 1.0) <= 1e-12

    def test_is_read_only(self):
        P = validate_stochastic(EXAMPLE_4)
        with pytest.raises(ValueError):
            P.matrix[0, 0] = 1.0

    def test_not_square(self):
        with pytest.raises(NotSquare):
            validate_stochastic([[0.5, 0.5]])


class TestValidateGenerator:
    def test_accepts(self):
        assert isinstance(validate_generator([[-1.0, 1.0], [1.0, -1.0]]), GeneratorMatrix)

    def test_row_sum_violation(self):
        with pytest.raises(NotGenerator) as info:
            validate_generator([[-1.0, 0.5], [1.0, -1.0]])
        assert info.value.row == 0 and info.value.col is None
        assert info.value.value == pytest.approx(-0.5)

    def test_negative_rate(self):
        with pytest.raises(NotGenerator) as info:
            validate_generator([[1.0, -1.0], [1.0, -1.0]])
        assert (info.value.row, info.value.col) == (0, 1)

    def test_zero_matrix(self):
        Q = validate_generator(np.zeros((3, 3)))
        assert np.all(Q.matrix == 0)

    def test_clamp_fixes_row_sum(self):
        Q = validate_generator([[-1.0 + 1e-11, 1.0, -1e-11], [1.0, -1.0, 0.0], [0.0, 1.0, -1.0]])
        assert Q.matrix[0, 2] == 0.0
        assert abs(Q.matrix[0].sum()) <= 1e-15


class TestIrreducible:
    def test_identity(self):
        assert not is_irreducible(np.eye(2))

    def test_positive(self, rng):
        assert is_irreducible(rng.uniform(0.1, 1, size=(5, 5)))

    def test_absorbing(self):
        assert not is_irreducible([[0.5, 0.5, 0], [0, 0.5, 0.5], [0, 0, 1]])

    def test_cycle(self):
        assert is_irreducible([[0, 1, 0], [0, 0, 1], [1, 0, 0]])

    def test_agrees_with_scc_oracle(self, rng):
        for _ in range(300):
            n = int(rng.integers(1, 8))
            P = random_stochastic(rng, n, zeros=0.7)
            n_comp, _ = scipy.sparse.csgraph.connected_components(P > 0, directed=True, connection="strong")
            assert is_irreducible(P) == (n_comp == 1)


class TestClosedClasses:
    def test_two_absorbing_blocks(self):
        P = np.array([
            [0.2, 0.3, 0.5, 0.0, 0.0],
            [0.0, 0.5, 0.5, 0.0, 0.0],
            [0.0, 0.5, 0.5, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, 0.0, 1.0, 0.0],
        ])
        classes = sorted(c.tolist() for c in closed_classes(P))
        assert classes == [[1, 2], [3, 4]]
        sub, keep = restrict_to_largest_closed_class(P)
        assert keep.tolist() == [1, 2]
        np.testing.assert_allclose(sub.matrix, [[0.5, 0.5], [0.5, 0.5]])


class TestInvariantDistribution:
    @pytest.mark.parametrize("P", [EXAMPLE_1, EXAMPLE_2, EXAMPLE_3, EXAMPLE_4])
    def test_doubly_stochastic_examples_are_uniform(self, P):
        np.testing.assert_allclose(invariant_distribution(P).probabilities, 1 / 3, atol=1e-12)

    def test_two_state(self):
        # mu = ((1-q), (1-p)) / (2-p-q) for p=0.9, q=0.8
        mu = invariant_distribution([[0.9, 0.1], [0.2, 0.8]])
        np.testing.assert_allclose(mu.probabilities, [2 / 3, 1 / 3], rtol=1e-14)

    def test_periodic(self):
        np.testing.assert_allclose(invariant_distribution([[0.0, 1.0], [1.0, 0.0]]).probabilities, 0.5)

    def test_reducible_raises(self):
        with pytest.raises(Singular):
            invariant_distribution(np.eye(2))

    def test_random_irreducible(self, rng):
        for _ in range(100):
            n = int(rng.integers(1, 9))
            P = random_stochastic(rng, n)
            mu = invariant_distribution(P).probabilities
            assert np.all(mu > 0)
            assert np.max(np.abs(mu @ P - mu)) <= 1e-10

    def test_random_doubly_stochastic(self, rng):
        for n in range(2, 9):
            # convex combination of permutations
            P = sum(w * np.eye(n)[rng.permutation(n)] for w in rng.dirichlet(np.ones(4)))
            P = 0.5 * P + 0.5 / n
            np.testing.assert_allclose(invariant_distribution(P).probabilities, 1 / n, atol=1e-12)

    def test_permutation_equivariance(self, rng):
        for _ in range(30):
            n = int(rng.integers(2, 8))
            P = random_stochastic(rng, n)
            perm = rng.permutation(n)
            Pi = np.eye(n)[perm]
            mu = invariant_distribution(P).probabilities
            mu_perm = invariant_distribution(Pi @ P @ Pi.T).probabilities
            np.testing.assert_allclose(mu_perm, Pi @ mu, atol=1e-13)


class TestProbabilityDistribution:
    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            ProbabilityDistribution([1.0, 0.0])

    def test_rejects_bad_sum(self):
        with pytest.raises(ValueError):
            ProbabilityDistribution([0.5, 0.6])


class TestReversibility:
    def test_examples(self):
        assert not is_reversible(EXAMPLE_1, invariant_distribution(EXAMPLE_1))
        assert is_reversible(EXAMPLE_2, invariant_distribution(EXAMPLE_2))
        assert is_reversible(EXAMPLE_3, invariant_distribution(EXAMPLE_3))

    def test_symmetric_uniform(self, rng):
        A = rng.uniform(size=(4, 4))
        A = A + A.T
        # Sinkhorn to a symmetric doubly stochastic matrix
        for _ in range(500):
            A /= A.sum(axis=1, keepdims=True)
            A = 0.5 * (A + A.T)
        assert is_reversible(A, np.full(4, 0.25))

    def test_kolmogorov_examples(self):
        assert not kolmogorov_triangle(EXAMPLE_1)
        assert kolmogorov_triangle(EXAMPLE_3)
        assert kolmogorov_triangle(EXAMPLE_4)

    def test_kolmogorov_wrong_dimension(self):
        with pytest.raises(WrongDimension):
            kolmogorov_triangle(np.eye(2))

    def test_kolmogorov_agrees_with_detailed_balance(self, rng):
        for k in range(400):
            if k % 2:
                P = random_reversible_stochastic(3, rng)
            else:
                P = random_stochastic(rng, 3, zeros=0.2)
            if not is_irreducible(P):
                continue
            mu = invariant_distribution(P)
            assert kolmogorov_triangle(P) == is_reversible(P, mu)

    def test_reversibility_is_permutation_invariant(self, rng):
        for k in range(40):
            P = random_reversible_stochastic(4, rng) if k % 2 else random_stochastic(rng, 4)
            for perm in itertools.islice(itertools.permutations(range(4)), 0, 24, 5):
                Pi = np.eye(4)[list(perm)]
                Pp = Pi @ P @ Pi.T
                assert is_reversible(Pp, invariant_distribution(Pp)) == is_reversible(P, invariant_distribution(P))


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_reversible_construction_passes(n, seed):
    P = random_reversible_stochastic(n, np.random.default_rng(seed))
    assert is_reversible(P, invariant_distribution(P))
