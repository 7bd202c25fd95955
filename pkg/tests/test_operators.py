import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gauss_evolve.genome import BinaryGenome, GeneBounds, RealGenome
from gauss_evolve.operators import (
    MutationParams,
    bit_flip_mutate,
    boundary_mutate,
    clamped_gaussian_kernel,
    direction_based_crossover,
    gaussian_mutate_clamped,
    gaussian_mutate_truncated,
    one_point_crossover,
    q_gaussian_mutate,
    roulette_indices,
    roulette_select,
    tournament_indices,
    tournament_select,
    truncated_gaussian_kernel,
    uniform_mutate,
)
from gauss_evolve.population import Individual, Population
from gauss_evolve.stochastic import DomainError, RngStream, box_muller

from oracles import truncated_normal_bisection

UNIT = GeneBounds(0.0, 1.0)


def make_pop(objectives, n=2):
    objectives = np.asarray(objectives, dtype=float)
    size = objectives.size
    genes = np.linspace(0, 1, size * n).reshape(size, n)
    return Population(genes, np.full((size, 1), 0.1), objectives, np.zeros(n), np.ones(n))


# --- clamped Gaussian -----------------------------------------------------


def test_clamped_tiny_sigma_returns_parent():
    assert gaussian_mutate_clamped(0.3, 1e-300, UNIT, RngStream(0)) == 0.3


def test_clamped_forced_overshoot(scripted):
    # z chosen so that x + sigma*z = b + 1
    x, sigma = 0.5, 0.5
    z = (UNIT.b + 1 - x) / sigma
    stream = scripted([math.exp(-z * z / 2), 0.0])
    assert gaussian_mutate_clamped(x, sigma, UNIT, stream) == UNIT.b


def test_clamped_rejects_nonpositive_sigma():
    with pytest.raises(DomainError):
        gaussian_mutate_clamped(0.5, 0.0, UNIT, RngStream(0))


def test_clamped_boundary_atoms():
    n = 1_000_000
    u = RngStream(8).uniforms(2 * n)
    out = clamped_gaussian_kernel(0.5, 0.2, 0.0, 1.0, box_muller(u[0::2], u[1::2]))
    assert out.min() >= 0.0 and out.max() <= 1.0
    tail = 0.5 * math.erfc(2.5 / math.sqrt(2.0))  # P(N(0.5, 0.2^2) > 1)
    se = math.sqrt(tail * (1 - tail) / n)
    for freq in (np.mean(out == 1.0), np.mean(out == 0.0)):
        assert freq > 0
        assert abs(freq - tail) <= 3 * se


# --- truncated Gaussian ---------------------------------------------------


def test_truncated_symmetric_midpoint():
    assert gaussian_mutate_truncated(0.0, 0.3, GeneBounds(-1, 1), 0.5) == 0.0


def test_truncated_endpoints():
    b = GeneBounds(-1, 1)
    lo = gaussian_mutate_truncated(0.2, 0.3, b, 1e-15)
    hi = gaussian_mutate_truncated(0.2, 0.3, b, 1 - 1e-15)
    assert -1 <= lo < -1 + 1e-6
    assert 1 - 1e-6 < hi <= 1


def test_truncated_frozen_value():
    # CDF-bisection oracle value for x=0.2, sigma=0.1, bounds (0,1), u=0.7
    expected = 0.25441330470523416
    assert gaussian_mutate_truncated(0.2, 0.1, UNIT, 0.7) == pytest.approx(expected, abs=1e-8)
    assert truncated_normal_bisection(0.2, 0.1, 0.0, 1.0, 0.7) == pytest.approx(expected, abs=1e-12)


def test_truncated_degenerate_gene():
    assert gaussian_mutate_truncated(2.0, 0.1, GeneBounds(2, 2), 0.3) == 2.0


@pytest.mark.parametrize("u", [0.0, 1.0, -0.1, 1.5])
def test_truncated_rejects_bad_uniform(u):
    with pytest.raises(DomainError):
        gaussian_mutate_truncated(0.5, 0.1, UNIT, u)


def test_truncated_monotone_in_u():
    u = np.linspace(1e-6, 1 - 1e-6, 5001)
    out = truncated_gaussian_kernel(0.8, 0.05, 0.0, 1.0, u)
    assert np.all(np.diff(out) >= 0)


def test_truncated_against_bisection_grid():
    gen = np.random.default_rng(12345)
    for _ in range(300):
        a = gen.uniform(-10, 10)
        b = a + gen.uniform(0.01, 10)
        x = gen.uniform(a, b)
        sigma = 10 ** gen.uniform(-3, 0)
        u = gen.uniform(0.001, 0.999)
        got = gaussian_mutate_truncated(x, sigma, GeneBounds(a, b), u)
        assert got == pytest.approx(truncated_normal_bisection(x, sigma, a, b, u), abs=1e-8)


# --- other mutations ------------------------------------------------------


def test_q_gaussian_mutate_within_bounds():
    s = RngStream(2)
    out = [q_gaussian_mutate(0.9, 0.3, 2.5, UNIT, s) for _ in range(2000)]
    assert min(out) >= 0 and max(out) <= 1


def test_q_gaussian_mutate_q1_matches_clamped():
    a, b = RngStream(6), RngStream(6)
    assert [q_gaussian_mutate(0.4, 0.2, 1.0, UNIT, a) for _ in range(30)] == [
        gaussian_mutate_clamped(0.4, 0.2, UNIT, b) for _ in range(30)
    ]


def test_boundary_mutate():
    assert boundary_mutate(0.0, GeneBounds(0, 0), RngStream(0)) == 0.0
    s = RngStream(5)
    assert {boundary_mutate(0.3, UNIT, s) for _ in range(100)} == {0.0, 1.0}


def test_boundary_frequency():
    n = 1_000_000
    u = RngStream(13).uniforms(n)
    freq_a = np.mean(u < 0.5)  # the rule boundary_mutate applies to its uniform
    assert 0.498 <= freq_a <= 0.502
    s = RngStream(13)
    assert all(boundary_mutate(0.5, UNIT, s) == (0.0 if v < 0.5 else 1.0) for v in u[:1000])


def test_uniform_mutate_range():
    s = RngStream(1)
    out = [uniform_mutate(0.0, GeneBounds(-2, 3), s) for _ in range(1000)]
    assert min(out) >= -2 and max(out) <= 3


def test_bit_flip_examples():
    g = BinaryGenome("0000")
    assert bit_flip_mutate(g, 0.0, RngStream(0)) == g
    assert str(bit_flip_mutate(g, 1.0, RngStream(0))) == "1111"
    assert bit_flip_mutate(bit_flip_mutate(g, 1.0, RngStream(1)), 1.0, RngStream(2)) == g


def test_bit_flip_rate():
    p, n = 0.3, 1_000_000
    g = BinaryGenome(np.zeros(n, dtype=np.uint8))
    frac = bit_flip_mutate(g, p, RngStream(77)).bits.mean()
    assert abs(frac - p) <= 3 * math.sqrt(p * (1 - p) / n)


def test_mutation_params_validation():
    with pytest.raises(DomainError):
        MutationParams(rate=1.5)
    with pytest.raises(DomainError):
        MutationParams(sigma_override=0.0)


# --- crossover ------------------------------------------------------------


def test_one_point_examples():
    a, b = BinaryGenome("000000"), BinaryGenome("111111")
    c1, c2 = one_point_crossover(a, b, 2)
    assert (str(c1), str(c2)) == ("001111", "110000")
    assert one_point_crossover(a, b, 0) == (b, a)
    assert one_point_crossover(a, b, 6) == (a, b)


def test_one_point_real_splices_sigma():
    bounds = [UNIT] * 3
    p1 = RealGenome([0.1, 0.2, 0.3], bounds, [0.01, 0.02, 0.03])
    p2 = RealGenome([0.7, 0.8, 0.9], bounds, [0.07, 0.08, 0.09])
    c1, c2 = one_point_crossover(p1, p2, 1)
    assert c1.values.tolist() == [0.1, 0.8, 0.9]
    assert c1.sigma.tolist() == [0.01, 0.08, 0.09]
    assert c2.values.tolist() == [0.7, 0.2, 0.3]


def test_one_point_errors():
    with pytest.raises(DomainError):
        one_point_crossover(BinaryGenome("01"), BinaryGenome("011"), 1)
    p1 = RealGenome([0.5], [UNIT])
    p2 = RealGenome([0.5], [GeneBounds(0, 2)])
    with pytest.raises(DomainError):
        one_point_crossover(p1, p2, 0)
    with pytest.raises(DomainError):
        one_point_crossover(BinaryGenome("01"), BinaryGenome("10"), 3)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 12).flatmap(lambda n: st.tuples(
    st.lists(st.integers(0, 1), min_size=n, max_size=n),
    st.lists(st.integers(0, 1), min_size=n, max_size=n),
    st.integers(0, n))))
def test_one_point_conserves_genes(case):
    bits1, bits2, cut = case
    c1, c2 = one_point_crossover(BinaryGenome(bits1), BinaryGenome(bits2), cut)
    for i in range(len(bits1)):
        assert sorted([c1.bits[i], c2.bits[i]]) == sorted([bits1[i], bits2[i]])
        assert (c1.bits[i], c2.bits[i]) in ((bits1[i], bits2[i]), (bits2[i], bits1[i]))


def test_direction_examples():
    b = [GeneBounds(0, 10)]
    same = RealGenome([3.0], b)
    assert direction_based_crossover(same, same, 0.7) == same
    assert direction_based_crossover(RealGenome([2.0], b), RealGenome([1.0], b), 0.5).values[0] == 2.5
    assert direction_based_crossover(RealGenome([9.0], b), RealGenome([1.0], b), 0.5).values[0] == 10.0


def test_direction_copies_strategy_of_better():
    b = [UNIT]
    better = RealGenome([0.4], b, [0.05], q=1.3)
    worse = RealGenome([0.6], b, [0.5], q=2.0)
    child = direction_based_crossover(better, worse, 0.5)
    assert child.sigma.tolist() == [0.05] and child.q == 1.3


def test_direction_bounds_mismatch():
    with pytest.raises(DomainError):
        direction_based_crossover(RealGenome([0.5], [UNIT]), RealGenome([0.5], [GeneBounds(0, 2)]), 0.5)


# --- selection ------------------------------------------------------------


def test_tournament_full_coverage_returns_best(scripted):
    objectives = [3.0, 1.0, 4.0, 0.5, 2.0]
    pop = make_pop(objectives)
    n = len(objectives)
    stream = scripted([(i + 0.5) / n for i in range(n)])
    winner = tournament_select(pop, n, stream)
    assert winner.objective == 0.5


def test_tournament_k1_is_uniform():
    pop = make_pop([5.0, 1.0, 3.0, 2.0])
    s = RngStream(10)
    counts = np.bincount(
        [int(np.argmax(pop.objective == tournament_select(pop, 1, s).objective)) for _ in range(4000)],
        minlength=4,
    )
    assert np.all(np.abs(counts / 4000 - 0.25) < 0.03)


def test_tournament_single_member():
    pop = make_pop([7.0])
    assert tournament_select(pop, 1, RngStream(0)).objective == 7.0


def test_tournament_ties_lowest_index():
    objective = np.array([2.0, 1.0, 1.0, 1.0])
    assert tournament_indices(objective, np.array([[3, 2, 1]]))[0] == 1
    assert tournament_indices(objective, np.array([[3, 2]]))[0] == 2


def test_tournament_bad_k():
    with pytest.raises(DomainError):
        tournament_select(make_pop([1.0, 2.0]), 3, RngStream(0))


def test_roulette_single():
    assert roulette_select(make_pop([4.0]), RngStream(0)).objective == 4.0


def test_roulette_uniform_when_equal():
    n_draws, size = 1_000_000, 4
    idx = roulette_indices(np.full(size, 2.0), RngStream(31).uniforms(n_draws))
    freq = np.bincount(idx, minlength=size) / n_draws
    se = math.sqrt(0.25 * 0.75 / n_draws)
    assert np.all(np.abs(freq - 0.25) <= 3 * se)


def test_roulette_weight_ratio():
    n_draws = 1_000_000
    idx = roulette_indices(np.array([0.0, 1.0]), RngStream(32).uniforms(n_draws))
    w0, w1 = 1.0 + 0.01, 0.0 + 0.01
    p0 = w0 / (w0 + w1)
    freq0 = np.mean(idx == 0)
    assert abs(freq0 - p0) <= 3 * math.sqrt(p0 * (1 - p0) / n_draws)


def test_roulette_scalar_matches_kernel():
    pop = make_pop([0.3, 0.1, 0.9])
    s = RngStream(4)
    u = RngStream(4).uniforms(50)
    got = [roulette_select(pop, s).objective for _ in range(50)]
    assert got == pop.objective[roulette_indices(pop.objective, u)].tolist()


def test_selection_empty_population():
    with pytest.raises(DomainError):
        Population(np.zeros((0, 2)), np.zeros((0, 1)), np.zeros(0), np.zeros(2), np.ones(2))


# --- universal bounds property -------------------------------------------

bounds_st = st.tuples(st.floats(-50, 50), st.floats(0, 20)).map(lambda t: GeneBounds(t[0], t[0] + t[1]))


@settings(max_examples=300, deadline=None)
@given(bounds_st, st.floats(0, 1), st.floats(1e-4, 2.0), st.floats(1.0, 2.9),
       st.integers(0, 2**32), st.floats(1e-9, 1 - 1e-9))
def test_every_mutation_respects_bounds(bounds, frac, sigma, q, seed, u):
    x = min(max(bounds.a + frac * bounds.width, bounds.a), bounds.b)
    s = RngStream(seed)
    outputs = [
        gaussian_mutate_clamped(x, sigma, bounds, s),
        gaussian_mutate_truncated(x, sigma, bounds, u),
        q_gaussian_mutate(x, sigma, q, bounds, s),
        boundary_mutate(x, bounds, s),
        uniform_mutate(x, bounds, s),
    ]
    for out in outputs:
        assert bounds.a <= out <= bounds.b


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1)), min_size=1, max_size=6),
       st.floats(0.01, 0.99), st.data())
def test_crossovers_respect_bounds(pairs, r, data):
    bounds = [GeneBounds(0, 1)] * len(pairs)
    p1 = RealGenome([p[0] for p in pairs], bounds)
    p2 = RealGenome([p[1] for p in pairs], bounds)
    cut = data.draw(st.integers(0, len(pairs)))
    for child in (*one_point_crossover(p1, p2, cut), direction_based_crossover(p1, p2, r)):
        assert np.all((child.values >= 0) & (child.values <= 1))
