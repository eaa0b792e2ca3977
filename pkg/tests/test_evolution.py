import numpy as np
import pytest

from genqsvm import (EvolutionConfig, GeneticFeatureMapClassifier, Genome,
                     Individual, Objectives, apply_scaler, best_individual,
                     crossover, crowding_distance, decode_genome, dominates,
                     evaluate, fit_scaler, hypervolume, make_moons, mutate,
                     non_dominated_sort, random_genome, run, select_mu,
                     size_metric, split, weights_control)
from genqsvm import svm
from genqsvm.errors import ConfigError


def obj(acc, wc, sm=None):
    return Objectives(acc, wc, wc if sm is None else sm)


def individuals(pairs):
    out = []
    for k, (acc, wc) in enumerate(pairs):
        genome = Genome(np.unpackbits(np.arange(20, dtype=np.uint8) + k)[:20]
                        .astype(bool), 1, 4, 1)
        out.append(Individual(genome, obj(acc, wc)))
    return out


def small_split(seed=0, n=40):
    ds = make_moons(n, noise=0.2, seed=seed)
    train, test = split(ds, 0.7, seed=seed)
    scaler = fit_scaler(train)
    return apply_scaler(scaler, train), apply_scaler(scaler, test)


def test_size_metric_values():
    assert size_metric(6, 1, 3) == pytest.approx(8 / 3, rel=1e-15)
    assert size_metric(0, 0, 5) == 0.0
    assert size_metric(4, 2, 2) == 4.0
    with pytest.raises(ValueError):
        size_metric(1, 1, 0)


def test_weights_control_values():
    assert weights_control(8 / 3, 1.0) == pytest.approx(16 / 3, rel=1e-15)
    assert weights_control(3.7, 0.0) == 3.7
    assert weights_control(0.0, 0.9) == 0.0


def test_evaluate_all_zero_genome_is_constant_baseline():
    # odd n makes the training majority unambiguous
    train, test = small_split(seed=3, n=61)
    assert np.bincount(train.labels)[0] != np.bincount(train.labels)[1]
    genome = Genome(np.zeros(2 * 2 * 5, dtype=bool), 2, 2, 2)
    objectives = evaluate(genome, train, test)
    assert objectives.size_metric == 0.0
    assert objectives.weights_control == 0.0
    # all-ones gram collapses the decision function to its bias: the model
    # predicts one constant class, the training majority
    circuit = decode_genome(genome)
    model = svm.fit(circuit, train.features, train.labels)
    predicted = svm.predict(model, circuit, train.features, test.features)
    assert len(set(predicted.tolist())) == 1
    constant = predicted[0]
    assert constant == np.bincount(train.labels).argmax()
    assert objectives.accuracy == pytest.approx(
        float(np.mean(test.labels == constant)))


def test_evaluate_all_zero_genome_balanced_tie():
    # with a perfectly balanced training set the bias lands on 0 and the
    # tie resolves to the negative side of the class pair
    train, test = small_split(seed=3, n=60)
    assert np.bincount(train.labels)[0] == np.bincount(train.labels)[1]
    genome = Genome(np.zeros(2 * 2 * 5, dtype=bool), 2, 2, 2)
    circuit = decode_genome(genome)
    model = svm.fit(circuit, train.features, train.labels)
    predicted = svm.predict(model, circuit, train.features, test.features)
    assert set(predicted.tolist()) == {1}
    assert evaluate(genome, train, test).accuracy == pytest.approx(
        float(np.mean(test.labels == 1)))


def test_evaluate_deterministic():
    train, test = small_split(seed=4)
    genome = random_genome(2, 3, 2, np.random.default_rng(5))
    a = evaluate(genome, train, test)
    b = evaluate(genome, train, test)
    assert a == b
    assert a.weights_control == pytest.approx(
        a.size_metric * (1.0 + a.accuracy ** 2), rel=1e-15)


def test_dominates_cases():
    assert dominates(obj(0.9, 2.0), obj(0.8, 3.0))
    assert not dominates(obj(0.9, 3.0), obj(0.8, 2.0))
    assert not dominates(obj(0.8, 2.0), obj(0.9, 3.0))
    assert not dominates(obj(0.9, 2.0), obj(0.9, 2.0))
    assert dominates(obj(0.9, 2.0), obj(0.9, 2.5))


def test_non_dominated_sort_single():
    fronts = non_dominated_sort(individuals([(0.5, 1.0)]))
    assert len(fronts) == 1 and len(fronts[0]) == 1
    assert fronts[0][0].rank == 0


def test_non_dominated_sort_incomparable():
    pop = individuals([(0.9, 3.0), (0.8, 2.0), (0.7, 1.0)])
    fronts = non_dominated_sort(pop)
    assert len(fronts) == 1 and len(fronts[0]) == 3


def test_non_dominated_sort_chain():
    pop = individuals([(0.9, 1.0), (0.8, 2.0), (0.7, 3.0)])
    fronts = non_dominated_sort(pop)
    assert [len(f) for f in fronts] == [1, 1, 1]
    assert [f[0].objectives.accuracy for f in fronts] == [0.9, 0.8, 0.7]


def test_non_dominated_sort_matches_bruteforce(rng):
    for _ in range(20):
        pairs = [(float(rng.integers(0, 5)) / 4, float(rng.integers(0, 5)))
                 for _ in range(12)]
        pop = individuals(pairs)
        fronts = non_dominated_sort(pop)
        # brute force: rank = longest domination chain above the point
        def dominated_by(a, b):
            return dominates(b.objectives, a.objectives)
        remaining = list(pop)
        level = 0
        while remaining:
            front = [p for p in remaining
                     if not any(dominated_by(p, q) for q in remaining)]
            assert sorted(id(p) for p in front) == sorted(
                id(p) for p in fronts[level])
            remaining = [p for p in remaining if p not in front]
            level += 1


def test_crowding_small_fronts_infinite():
    for pairs in ([(0.5, 1.0)], [(0.5, 1.0), (0.6, 2.0)]):
        pop = individuals(pairs)
        assert crowding_distance(pop) == [float("inf")] * len(pairs)


def test_crowding_collinear_three_points():
    pop = individuals([(0.2, 1.0), (0.5, 1.0), (0.8, 1.0)])
    distances = crowding_distance(pop)
    assert distances[0] == float("inf")
    assert distances[2] == float("inf")
    assert distances[1] == pytest.approx(1.0)  # (0.8 - 0.2) / 0.6


def test_crowding_four_point_front_hand_computed():
    # accuracy 0, 1, 4, 6 (scaled by /6) and cost 0, 1, 4, 6: interior
    # distances are neighbor gaps normalized by the span, summed per axis
    pop = individuals([(0.0, 0.0), (1 / 6, 1.0), (4 / 6, 4.0), (1.0, 6.0)])
    distances = crowding_distance(pop)
    assert distances[0] == float("inf") and distances[3] == float("inf")
    assert distances[1] == pytest.approx((4 / 6 - 0.0) / 1.0 + (4 - 0) / 6)
    assert distances[2] == pytest.approx((1.0 - 1 / 6) / 1.0 + (6 - 1) / 6)


def test_select_mu_takes_rank_zero():
    front = individuals([(0.9, 1.0), (0.8, 0.5), (0.7, 0.2)])
    dominated = individuals([(0.5, 2.0), (0.4, 3.0)])
    chosen = select_mu(front + dominated, 3)
    assert sorted(id(i) for i in chosen) == sorted(id(i) for i in front)


def test_select_mu_identity_when_pool_equals_mu():
    pop = individuals([(0.9, 1.0), (0.5, 2.0), (0.4, 3.0)])
    chosen = select_mu(pop, 3)
    assert sorted(id(i) for i in chosen) == sorted(id(i) for i in pop)


def test_select_mu_keeps_best_accuracy(rng):
    for _ in range(20):
        pairs = [(float(rng.random()), float(rng.random()) * 5)
                 for _ in range(20)]
        pop = individuals(pairs)
        best_acc = max(p[0] for p in pairs)
        chosen = select_mu(pop, 5)
        assert any(i.objectives.accuracy == best_acc for i in chosen)


def test_select_mu_pool_too_small():
    with pytest.raises(ValueError):
        select_mu(individuals([(0.5, 1.0)]), 2)


def test_mutate_extremes(rng):
    genome = random_genome(2, 3, 2, rng)
    same = mutate(genome, 0.0, rng)
    assert same == genome
    flipped = mutate(genome, 1.0, rng)
    assert np.array_equal(flipped.bits, ~genome.bits)


def test_mutate_rate_statistics():
    rng = np.random.default_rng(11)
    genome = Genome(np.zeros(4 * 5 * 5, dtype=bool), 4, 5, 2)
    flips = 0
    trials = 1000
    for _ in range(trials):
        flips += mutate(genome, 0.2, rng).bits.sum()
    rate = flips / (trials * 100)
    assert 0.19 <= rate <= 0.21


class _FixedCuts:
    def __init__(self, a, b):
        self.cuts = np.array([a, b])

    def integers(self, low, high, size):
        return self.cuts


def test_crossover_identical_parents(rng):
    genome = random_genome(2, 2, 2, rng)
    c1, c2 = crossover(genome, genome, rng)
    assert c1 == genome and c2 == genome


def test_crossover_zero_length_interval(rng):
    g1 = random_genome(2, 2, 2, rng)
    g2 = random_genome(2, 2, 2, rng)
    c1, c2 = crossover(g1, g2, _FixedCuts(7, 7))
    assert c1 == g1 and c2 == g2


def test_crossover_swaps_contiguous_interval():
    zeros = Genome(np.zeros(10, dtype=bool), 1, 2, 1)
    ones = Genome(np.ones(10, dtype=bool), 1, 2, 1)
    c1, c2 = crossover(zeros, ones, _FixedCuts(2, 5))
    assert c1.to_string() == "0011100000"
    assert c2.to_string() == "1100011111"


def test_crossover_length_mismatch(rng):
    with pytest.raises(ValueError):
        crossover(random_genome(1, 2, 1, rng), random_genome(1, 3, 1, rng),
                  rng)


def test_hypervolume_staircase():
    objs = [obj(1.0, 1.0), obj(0.5, 0.5)]
    # sorted desc by accuracy: (1, wc 1), (0.5, wc 0.5); ref wc_max = 2
    expected = (1.0 - 0.5) * (2.0 - 1.0) + (0.5 - 0.0) * (2.0 - 0.5)
    assert hypervolume(objs, 2.0) == pytest.approx(expected)
    assert hypervolume([obj(0.0, 2.0)], 2.0) == 0.0


def test_config_validation():
    EvolutionConfig().validate()
    for bad in (
        EvolutionConfig(population_size=0),
        EvolutionConfig(p_crossover=1.5),
        EvolutionConfig(generations=-1),
        EvolutionConfig(C=0.0),
        EvolutionConfig(objective="other"),
        EvolutionConfig(weight_scheme="bogus"),
        EvolutionConfig(n_jobs=0),
    ):
        with pytest.raises(ConfigError):
            bad.validate()


def small_config(**kwargs):
    defaults = dict(num_qubits=2, max_layers=2, population_size=8,
                    offspring_size=4, generations=6, seed=9,
                    target_accuracy=None, patience=0)
    defaults.update(kwargs)
    return EvolutionConfig(**defaults)


def test_run_zero_generations():
    train, test = small_split(seed=5)
    front, history = run(small_config(generations=0), train, test)
    assert len(history) == 1 and history[0].generation == 0
    assert front
    for ind in front:
        assert ind.rank == 0


def test_run_deterministic_history():
    train, test = small_split(seed=6)
    _, h1 = run(small_config(), train, test)
    _, h2 = run(small_config(), train, test)
    assert h1 == h2


def test_run_threaded_matches_serial():
    train, test = small_split(seed=6)
    front1, h1 = run(small_config(), train, test)
    front2, h2 = run(small_config(n_jobs=4), train, test)
    assert h1 == h2
    assert [i.genome.to_string() for i in front1] == \
        [i.genome.to_string() for i in front2]


def test_run_invariants_observed():
    train, test = small_split(seed=7, n=50)
    config = small_config(generations=12, population_size=10,
                          offspring_size=5)
    sizes, fronts_ok, best_accs, front_objs = [], [], [], []

    def observe(gen, population, front):
        sizes.append(len(population))
        ok = True
        for a in front:
            for b in front:
                if a is not b and dominates(a.objectives, b.objectives):
                    ok = False
        fronts_ok.append(ok)
        best_accs.append(max(i.objectives.accuracy for i in population))
        front_objs.append([i.objectives for i in front])

    front, history = run(config, train, test, on_generation=observe)
    assert sizes == [10] * 13
    assert all(fronts_ok)
    assert all(b >= a - 1e-15 for a, b in zip(best_accs, best_accs[1:]))
    hv = [hypervolume(objs, 4.0 * config.max_layers) for objs in front_objs]
    assert all(b >= a - 1e-12 for a, b in zip(hv, hv[1:]))
    assert [h.hypervolume for h in history] == hv


def test_run_evaluate_agrees_with_recomputation():
    train, test = small_split(seed=8)
    front, _ = run(small_config(), train, test)
    for ind in front[:3]:
        again = evaluate(ind.genome, train, test)
        assert again == ind.objectives


def test_run_rejects_bad_config():
    train, test = small_split(seed=9)
    with pytest.raises(ConfigError):
        run(small_config(offspring_size=0), train, test)


def test_early_stop_on_target():
    train, test = small_split(seed=10)
    config = small_config(generations=50, target_accuracy=0.0, patience=0)
    front, history = run(config, train, test)
    assert history[-1].generation == 1  # stops at the first checked gen


def test_best_individual_ordering():
    pop = individuals([(0.9, 2.0), (0.9, 1.0), (0.8, 0.1)])
    assert best_individual(pop).objectives.weights_control == 1.0


def test_estimator_search(rng):
    ds = make_moons(40, noise=0.15, seed=12)
    clf = GeneticFeatureMapClassifier(
        num_qubits=2, max_layers=2, population_size=8, offspring_size=4,
        generations=4, random_state=3, target_accuracy=None)
    clf.fit(ds.features, ds.labels)
    assert clf.best_circuit_.num_features == 2
    assert clf.history_ and clf.pareto_front_
    labels = clf.predict(ds.features)
    assert labels.shape == (40,)
    assert clf.get_params()["population_size"] == 8
