import numpy as np
import pytest

from oemde.core import Individual, RngStream
from oemde.operators import (
    F_HIGH,
    F_LOW,
    FULL_POOL,
    FixedScaleFactor,
    MutationScheme,
    apply_mutation_scheme,
    crossover,
    greedy_select,
    pick_scheme,
    sample_scale_factors,
    select_parents,
)
from oemde.utils import ConfigurationError, ContractViolation


def ind(*xs, fitness=None):
    return Individual(np.array(xs, dtype=float), fitness)


def test_scale_factor_distribution():
    f = sample_scale_factors(10 ** 6, RngStream(3))
    assert f.min() >= F_LOW
    assert f.max() < F_HIGH
    assert abs(f.mean() - 0.8) < 0.01


def test_scale_factor_independent_per_dimension():
    f = sample_scale_factors(30, RngStream(0))
    assert len(set(f.tolist())) == 30


def test_fixed_scale_factor_consumes_no_draws():
    rng = RngStream(5)
    assert np.array_equal(FixedScaleFactor(0.5).sample(4, rng), [0.5] * 4)
    assert rng.random() == RngStream(5).random()


def test_pick_scheme_uniform():
    rng = RngStream(11)
    draws = 10 ** 5
    counts = {s: 0 for s in FULL_POOL}
    for _ in range(draws):
        counts[pick_scheme(FULL_POOL, rng)] += 1
    expected = draws / len(FULL_POOL)
    chi2 = sum((c - expected) ** 2 / expected for c in counts.values())
    assert chi2 < 18.47


def test_pick_scheme_singleton_and_empty():
    rng = RngStream(0)
    assert pick_scheme((MutationScheme.BEST2,), rng) is MutationScheme.BEST2
    with pytest.raises(ConfigurationError):
        pick_scheme((), rng)


@pytest.mark.parametrize('scheme', list(MutationScheme))
def test_select_parents(scheme):
    rng = RngStream(2)
    j = scheme.parent_count
    for target in range(6):
        parents = select_parents(6, target, j, rng)
        assert len(set(parents)) == j
        assert target not in parents


def test_select_parents_small_population():
    with pytest.raises(ConfigurationError):
        select_parents(5, 0, 5, RngStream(0))


def test_mutation_formulas():
    x = ind(1.0, 1.0)
    best = ind(2.0, 0.0)
    ps = [ind(3.0, 1.0), ind(1.0, 2.0), ind(0.0, 0.0)]
    f = np.array([0.5, 1.0])
    v = apply_mutation_scheme(MutationScheme.RAND1, x, best, ps, f)
    assert np.array_equal(v, [3.5, 3.0])
    v = apply_mutation_scheme(MutationScheme.BEST1, x, best, ps[:2], f)
    assert np.array_equal(v, [3.0, -1.0])
    v = apply_mutation_scheme(
        MutationScheme.TARGET_TO_BEST1, x, best, ps[:2], f
    )
    assert np.array_equal(v, [2.5, -1.0])
    five = ps + [ind(1.0, 1.0), ind(0.0, 1.0)]
    v = apply_mutation_scheme(MutationScheme.RAND2, x, best, five, f)
    assert np.array_equal(v, [4.0, 3.0])
    v = apply_mutation_scheme(MutationScheme.BEST2, x, best, five[:4], f)
    assert np.array_equal(v, [2.5, -2.0])


def test_mutation_parent_count_mismatch():
    x = ind(0.0)
    with pytest.raises(ContractViolation):
        apply_mutation_scheme(
            MutationScheme.RAND2, x, x, [x, x, x], np.ones(1)
        )


def test_scheme_labels():
    assert MutationScheme.TARGET_TO_BEST1.label == 'DE/target-to-best/1'
    assert MutationScheme.RAND2.label == 'DE/rand/2'


def test_crossover_cr_zero_keeps_one_mutant_dimension():
    rng = RngStream(9)
    parent, mutant = np.zeros(8), np.ones(8)
    for _ in range(100):
        u = crossover(parent, mutant, 0.0, rng)
        assert u.sum() == 1.0


def test_crossover_cr_one_takes_mutant():
    u = crossover(np.zeros(8), np.ones(8), 1.0, RngStream(0))
    assert np.array_equal(u, np.ones(8))


def test_crossover_rejects_bad_rate():
    with pytest.raises(ContractViolation):
        crossover(np.zeros(2), np.ones(2), 1.5, RngStream(0))


def test_greedy_select():
    parent = ind(0.0, fitness=1.0)
    better = ind(1.0, fitness=0.5)
    equal = ind(2.0, fitness=1.0)
    worse = ind(3.0, fitness=2.0)
    assert greedy_select(parent, better) is better
    assert greedy_select(parent, equal) is equal
    assert greedy_select(parent, worse) is parent
    with pytest.raises(ContractViolation):
        greedy_select(parent, ind(0.0))


def test_rand1_is_linear_in_scale_factor():
    rng = RngStream(21)
    for _ in range(100):
        x, best, *ps = [Individual(rng.uniform(-5, 5, 7)) for _ in range(5)]
        f = sample_scale_factors(7, rng)
        v1 = apply_mutation_scheme(MutationScheme.RAND1, x, best, ps, f)
        v2 = apply_mutation_scheme(MutationScheme.RAND1, x, best, ps, 2 * f)
        base = ps[0].position
        assert np.allclose(v2 - base, 2 * (v1 - base), rtol=0, atol=1e-12)


@pytest.mark.parametrize('scheme', list(MutationScheme))
def test_constant_inputs_give_constant_mutant(scheme):
    c = ind(1.5, -2.0, 0.25)
    parents = [ind(1.5, -2.0, 0.25) for _ in range(scheme.parent_count)]
    f = sample_scale_factors(3, RngStream(0))
    v = apply_mutation_scheme(scheme, c, c, parents, f)
    assert np.array_equal(v, c.position)


def test_best2_without_scaling_is_best():
    rng = RngStream(13)
    x, best, *ps = [Individual(rng.uniform(-5, 5, 4)) for _ in range(6)]
    v = apply_mutation_scheme(MutationScheme.BEST2, x, best, ps, np.zeros(4))
    assert np.array_equal(v, best.position)
