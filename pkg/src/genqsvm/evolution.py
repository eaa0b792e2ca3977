"""NSGA-II search over circuit genomes with mu+lambda elitism.

Each individual is scored on two objectives: test accuracy (maximized) and
a size cost (minimized).  The size cost defaults to the weights-control
value ``SM * (1 + accuracy^2)``, which raises the pressure on circuit size
as accuracy saturates; plain ``SM`` can be selected instead.

Selection fills the next population front by front, splitting the last
admitted front by crowding distance, with a lexicographic genome tie-break
so runs replay exactly.  Offspring are produced by binary tournament on
(rank, crowding), contiguous-substring crossover with probability
``p_crossover``, then per-child bit-flip mutation with probability
``p_mutation`` (each bit flipping with ``p_bitflip``).
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils import check_X_y
from sklearn.utils.validation import check_is_fitted

from . import svm
from .datasets import Dataset
from .datasets import split as dataset_split
from .errors import ConfigError, DegenerateDataError
from .genome import (DEFAULT_WEIGHT_SCHEME, WEIGHT_SCHEMES, Genome,
                     count_gates, decode_genome, random_genome)
from .rng import stream_rngs

OBJECTIVE_MODES = ("weights_control", "size_metric")


def size_metric(n_local: int, n_cnot: int, n_qubits: int) -> float:
    """Gate-count cost with entanglers double weighted, per qubit."""
    if n_qubits < 1:
        raise ValueError("n_qubits must be >= 1")
    return (n_local + 2.0 * n_cnot) / n_qubits


def weights_control(sm: float, accuracy: float) -> float:
    """Size cost rescaled by ``1 + accuracy^2``."""
    return sm + sm * accuracy ** 2


@dataclass(frozen=True)
class Objectives:
    accuracy: float
    weights_control: float
    size_metric: float


@dataclass
class Individual:
    genome: Genome
    objectives: Objectives | None = None
    rank: int | None = None
    crowding: float = 0.0


@dataclass
class EvolutionConfig:
    """Hyperparameters of one evolutionary run."""

    num_qubits: int = 6
    max_layers: int = 6
    population_size: int = 100
    offspring_size: int = 15
    generations: int = 5000
    p_crossover: float = 0.3
    p_mutation: float = 0.7
    p_bitflip: float = 0.2
    C: float = 1.0
    tol: float = 1e-3
    squared: bool = False
    weight_scheme: str = DEFAULT_WEIGHT_SCHEME
    objective: str = "weights_control"
    target_accuracy: float | None = 1.0
    patience: int = 200
    seed: int = 0
    n_jobs: int = 1

    def validate(self) -> None:
        if self.num_qubits < 1 or self.max_layers < 1:
            raise ConfigError("num_qubits and max_layers must be >= 1")
        if self.population_size < 1 or self.offspring_size < 1:
            raise ConfigError("population_size and offspring_size must be >= 1")
        if self.generations < 0:
            raise ConfigError("generations must be >= 0")
        for name in ("p_crossover", "p_mutation", "p_bitflip"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1]")
        if self.C <= 0 or self.tol <= 0:
            raise ConfigError("C and tol must be positive")
        if self.objective not in OBJECTIVE_MODES:
            raise ConfigError(f"objective must be one of {OBJECTIVE_MODES}")
        if self.weight_scheme not in WEIGHT_SCHEMES:
            raise ConfigError(
                f"weight_scheme must be one of {tuple(WEIGHT_SCHEMES)}")
        if self.target_accuracy is not None and not 0.0 <= self.target_accuracy <= 1.0:
            raise ConfigError("target_accuracy must lie in [0, 1]")
        if self.patience < 0:
            raise ConfigError("patience must be >= 0")
        if self.n_jobs < 1:
            raise ConfigError("n_jobs must be >= 1")


@dataclass
class GenerationStats:
    generation: int
    best_accuracy: float
    best_sm: float
    front_size: int
    hypervolume: float


def evaluate(genome: Genome, train: Dataset, test: Dataset, C: float = 1.0,
             tol: float = 1e-3, squared: bool = False,
             weight_scheme: str = DEFAULT_WEIGHT_SCHEME) -> Objectives:
    """Score one genome: decode, train on ``train``, measure on ``test``.

    Degenerate training data scores accuracy 0 instead of raising, keeping
    the search total over the genome space.
    """
    circuit = decode_genome(genome, weight_scheme=weight_scheme)
    n_local, n_cnot = count_gates(circuit)
    sm = size_metric(n_local, n_cnot, genome.num_qubits)
    try:
        model = svm.fit(circuit, train.features, train.labels, C=C, tol=tol,
                        squared=squared)
        predicted = svm.predict(model, circuit, train.features, test.features,
                                squared=squared)
        acc = svm.accuracy(predicted, test.labels)
    except DegenerateDataError:
        acc = 0.0
    return Objectives(acc, weights_control(sm, acc), sm)


def _cost(obj: Objectives, objective: str) -> float:
    return obj.weights_control if objective == "weights_control" else obj.size_metric


def dominates(a: Objectives, b: Objectives,
              objective: str = "weights_control") -> bool:
    """True when ``a`` is at least as good on both axes and better on one."""
    ca, cb = _cost(a, objective), _cost(b, objective)
    if a.accuracy < b.accuracy or ca > cb:
        return False
    return a.accuracy > b.accuracy or ca < cb


def non_dominated_sort(population: Sequence[Individual],
                       objective: str = "weights_control") -> list[list[Individual]]:
    """Partition into Pareto fronts and record each individual's rank."""
    n = len(population)
    acc = np.array([ind.objectives.accuracy for ind in population])
    cost = np.array([_cost(ind.objectives, objective) for ind in population])
    at_least = (acc[:, None] >= acc[None, :]) & (cost[:, None] <= cost[None, :])
    strict = (acc[:, None] > acc[None, :]) | (cost[:, None] < cost[None, :])
    dom = at_least & strict  # dom[i, j]: i dominates j

    dominators = dom.sum(axis=0)
    unassigned = np.ones(n, dtype=bool)
    fronts: list[list[Individual]] = []
    while unassigned.any():
        current = unassigned & (dominators == 0)
        members = np.flatnonzero(current)
        for i in members:
            population[i].rank = len(fronts)
        fronts.append([population[i] for i in members])
        unassigned &= ~current
        dominators = dominators - dom[members].sum(axis=0)
    return fronts


def crowding_distance(front: Sequence[Individual],
                      objective: str = "weights_control") -> list[float]:
    """Assign the NSGA-II density estimate within one front.

    Boundary individuals of each objective get infinity; interior ones sum
    normalized neighbor gaps.  Objectives with zero span are skipped so the
    result does not depend on sort-order accidents among equal values.
    """
    n = len(front)
    if n == 0:
        raise ValueError("front must be nonempty")
    distances = [0.0] * n
    if n <= 2:
        distances = [float("inf")] * n
    else:
        for values in (
            [ind.objectives.accuracy for ind in front],
            [_cost(ind.objectives, objective) for ind in front],
        ):
            order = np.argsort(np.asarray(values), kind="stable")
            span = values[order[-1]] - values[order[0]]
            if span == 0:
                continue
            distances[order[0]] = float("inf")
            distances[order[-1]] = float("inf")
            for k in range(1, n - 1):
                if distances[order[k]] != float("inf"):
                    distances[order[k]] += (
                        values[order[k + 1]] - values[order[k - 1]]
                    ) / span
    for ind, dist in zip(front, distances):
        ind.crowding = dist
    return distances


def select_mu(pool: Sequence[Individual], mu: int,
              objective: str = "weights_control") -> list[Individual]:
    """Keep ``mu`` individuals by rank, then crowding, then genome order."""
    if len(pool) < mu:
        raise ValueError("selection pool is smaller than the population size")
    fronts = non_dominated_sort(pool, objective)
    selected: list[Individual] = []
    for front in fronts:
        crowding_distance(front, objective)
        if len(selected) + len(front) <= mu:
            selected.extend(front)
        else:
            remaining = sorted(front,
                               key=lambda ind: (-ind.crowding, ind.genome.key()))
            selected.extend(remaining[: mu - len(selected)])
            break
    return selected


def mutate(genome: Genome, p_bitflip: float,
           rng: np.random.Generator) -> Genome:
    """Flip each bit independently with probability ``p_bitflip``."""
    if not 0.0 <= p_bitflip <= 1.0:
        raise ValueError("p_bitflip must lie in [0, 1]")
    flips = rng.random(genome.bits.shape[0]) < p_bitflip
    return Genome(genome.bits ^ flips, genome.num_qubits, genome.max_layers,
                  genome.num_features)


def crossover(g1: Genome, g2: Genome,
              rng: np.random.Generator) -> tuple[Genome, Genome]:
    """Exchange a uniformly random contiguous bit interval between parents."""
    if g1.bits.shape != g2.bits.shape:
        raise ValueError("parents must have equal genome lengths")
    n_bits = g1.bits.shape[0]
    a, b = sorted(rng.integers(0, n_bits + 1, size=2).tolist())
    c1 = g1.bits.copy()
    c2 = g2.bits.copy()
    c1[a:b], c2[a:b] = g2.bits[a:b], g1.bits[a:b]
    return (Genome(c1, g1.num_qubits, g1.max_layers, g1.num_features),
            Genome(c2, g2.num_qubits, g2.max_layers, g2.num_features))


def hypervolume(objectives: Sequence[Objectives], wc_max: float) -> float:
    """Dominated area of the (accuracy, weights-control) front.

    Measured against the reference point (accuracy 0, weights-control
    ``wc_max``), maximizing accuracy and minimizing weights control.
    """
    points = sorted({(o.accuracy, o.weights_control) for o in objectives},
                    reverse=True)
    total = 0.0
    for k, (acc, wc) in enumerate(points):
        next_acc = points[k + 1][0] if k + 1 < len(points) else 0.0
        total += (acc - next_acc) * max(wc_max - wc, 0.0)
    return total


def best_individual(individuals: Sequence[Individual]) -> Individual:
    """Highest accuracy, breaking ties toward smaller circuits."""
    return min(individuals,
               key=lambda ind: (-ind.objectives.accuracy,
                                ind.objectives.weights_control,
                                ind.objectives.size_metric,
                                ind.genome.key()))


def _tournament(population: Sequence[Individual],
                rng: np.random.Generator) -> Individual:
    i, j = rng.integers(0, len(population), size=2)
    a, b = population[int(i)], population[int(j)]
    if (a.rank, -a.crowding) <= (b.rank, -b.crowding):
        return a
    return b


def _make_offspring(population: Sequence[Individual], config: EvolutionConfig,
                    tournament_rng: np.random.Generator,
                    variation_rng: np.random.Generator) -> list[Individual]:
    offspring: list[Individual] = []
    while len(offspring) < config.offspring_size:
        p1 = _tournament(population, tournament_rng)
        p2 = _tournament(population, tournament_rng)
        g1, g2 = p1.genome, p2.genome
        if variation_rng.random() < config.p_crossover:
            g1, g2 = crossover(g1, g2, variation_rng)
        for child in (g1, g2):
            if variation_rng.random() < config.p_mutation:
                child = mutate(child, config.p_bitflip, variation_rng)
            offspring.append(Individual(child))
    return offspring[: config.offspring_size]


def _evaluate_all(individuals: Sequence[Individual], train: Dataset,
                  test: Dataset, config: EvolutionConfig) -> None:
    pending = [ind for ind in individuals if ind.objectives is None]

    def score(ind: Individual) -> Objectives:
        return evaluate(ind.genome, train, test, C=config.C, tol=config.tol,
                        squared=config.squared,
                        weight_scheme=config.weight_scheme)

    if config.n_jobs == 1 or len(pending) < 2:
        results = [score(ind) for ind in pending]
    else:
        with ThreadPoolExecutor(max_workers=config.n_jobs) as pool:
            results = list(pool.map(score, pending))
    for ind, objectives in zip(pending, results):
        ind.objectives = objectives


def _stats(generation: int, population: Sequence[Individual],
           front: Sequence[Individual], wc_max: float) -> GenerationStats:
    best_acc = max(ind.objectives.accuracy for ind in population)
    best_sm = min(ind.objectives.size_metric for ind in population
                  if ind.objectives.accuracy == best_acc)
    hv = hypervolume([ind.objectives for ind in front], wc_max)
    return GenerationStats(generation, best_acc, best_sm, len(front), hv)


def run(config: EvolutionConfig, train: Dataset, test: Dataset,
        on_generation: Callable[[int, list[Individual], list[Individual]], None] | None = None,
        ) -> tuple[list[Individual], list[GenerationStats]]:
    """Evolve feature maps against a pre-split, pre-scaled dataset.

    Returns the final rank-0 front and the per-generation statistics.  The
    optional ``on_generation`` observer receives the generation index, the
    selected population, and its rank-0 front after every selection step
    (including the initial population as generation 0).
    """
    config.validate()
    if train.n_features != test.n_features:
        raise ConfigError("train and test partitions disagree on features")
    rngs = stream_rngs(config.seed)
    wc_max = 4.0 * config.max_layers

    population = [
        Individual(random_genome(config.num_qubits, config.max_layers,
                                 train.n_features, rngs["init"]))
        for _ in range(config.population_size)
    ]
    _evaluate_all(population, train, test, config)
    fronts = non_dominated_sort(population, config.objective)
    for f in fronts:
        crowding_distance(f, config.objective)
    front = fronts[0]
    history = [_stats(0, population, front, wc_max)]
    if on_generation is not None:
        on_generation(0, population, front)

    stall = 0
    target_sm: float | None = None
    for generation in range(1, config.generations + 1):
        offspring = _make_offspring(population, config, rngs["tournament"],
                                    rngs["variation"])
        _evaluate_all(offspring, train, test, config)
        population = select_mu(list(population) + offspring,
                               config.population_size, config.objective)
        front = [ind for ind in population if ind.rank == 0]
        history.append(_stats(generation, population, front, wc_max))
        if on_generation is not None:
            on_generation(generation, population, front)

        if config.target_accuracy is not None:
            stats = history[-1]
            if stats.best_accuracy >= config.target_accuracy:
                reached = [ind.objectives.size_metric for ind in population
                           if ind.objectives.accuracy >= config.target_accuracy]
                current = min(reached)
                if target_sm is None or current < target_sm:
                    target_sm = current
                    stall = 0
                else:
                    stall += 1
                if stall >= config.patience:
                    break
            else:
                target_sm = None
                stall = 0
    return front, history


class GeneticFeatureMapClassifier(BaseEstimator, ClassifierMixin):
    """Classifier that evolves its own feature-map circuit.

    ``fit`` holds out ``test_fraction`` of the data (stratified) to score
    candidate circuits, runs the evolutionary search, then trains the final
    kernel SVM on the training portion with the best circuit found.  Inputs
    are expected pre-scaled to roughly [-1, 1]; compose with
    :class:`~genqsvm.datasets.SymmetricMinMaxScaler` in a pipeline.

    After fitting: ``best_circuit_``, ``best_objectives_``, ``pareto_front_``
    and ``history_`` expose the search outcome.
    """

    def __init__(self, num_qubits: int = 6, max_layers: int = 6,
                 population_size: int = 100, offspring_size: int = 15,
                 generations: int = 500, p_crossover: float = 0.3,
                 p_mutation: float = 0.7, p_bitflip: float = 0.2,
                 C: float = 1.0, tol: float = 1e-3, squared: bool = False,
                 weight_scheme: str = DEFAULT_WEIGHT_SCHEME,
                 objective: str = "weights_control",
                 test_fraction: float = 0.3,
                 target_accuracy: float | None = 1.0, patience: int = 200,
                 random_state: int = 0, n_jobs: int = 1):
        self.num_qubits = num_qubits
        self.max_layers = max_layers
        self.population_size = population_size
        self.offspring_size = offspring_size
        self.generations = generations
        self.p_crossover = p_crossover
        self.p_mutation = p_mutation
        self.p_bitflip = p_bitflip
        self.C = C
        self.tol = tol
        self.squared = squared
        self.weight_scheme = weight_scheme
        self.objective = objective
        self.test_fraction = test_fraction
        self.target_accuracy = target_accuracy
        self.patience = patience
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64)
        self.classes_ = np.unique(y)
        encoded = np.searchsorted(self.classes_, y)
        dataset = Dataset(X, encoded,
                          class_names=self.classes_.tolist())
        rngs = stream_rngs(self.random_state)
        train, test = dataset_split(dataset, 1.0 - self.test_fraction,
                                    rngs["split"])
        config = EvolutionConfig(
            num_qubits=self.num_qubits, max_layers=self.max_layers,
            population_size=self.population_size,
            offspring_size=self.offspring_size, generations=self.generations,
            p_crossover=self.p_crossover, p_mutation=self.p_mutation,
            p_bitflip=self.p_bitflip, C=self.C, tol=self.tol,
            squared=self.squared, weight_scheme=self.weight_scheme,
            objective=self.objective,
            target_accuracy=self.target_accuracy, patience=self.patience,
            seed=self.random_state, n_jobs=self.n_jobs,
        )
        self.pareto_front_, self.history_ = run(config, train, test)
        best = best_individual(self.pareto_front_)
        self.best_genome_ = best.genome
        self.best_circuit_ = decode_genome(best.genome,
                                           weight_scheme=self.weight_scheme)
        self.best_objectives_ = best.objectives
        self.svc_ = svm.QuantumKernelSVC(self.best_circuit_, C=self.C,
                                         tol=self.tol, squared=self.squared)
        self.svc_.fit(train.features, self.classes_[train.labels])
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "svc_")
        return self.svc_.predict(X)
