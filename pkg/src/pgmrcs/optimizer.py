"""Genetic algorithm over integer compositions of a fixed cell budget.

Genomes are count vectors ``m`` with ``sum(m) == N_total`` and ``m_i >= min_count``
at all times: crossover results are repaired back onto the budget and mutation
moves units between two entries, so no individual ever leaves the feasible set.

Randomness comes from a single ``numpy.random.Generator`` (PCG64) seeded from
``GaConfig.rng_seed``; fitness evaluation consumes no randomness, so running the
evaluations through a parallel ``map_fn`` gives the same trajectory as the serial
default.
"""
from __future__ import annotations

import math
from collections.abc import Callable, Iterable, Sequence
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ValidationError
from .metrics import WeightVector

DEFAULT_BUDGET = 1600


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 64
    generations: int = 200
    tournament_size: int = 3
    elitism_count: int = 1
    mutation_rate: float = 0.3
    mutation_mean: float = 8.0
    rng_seed: int = 0
    min_count: int = 0

    def __post_init__(self):
        if self.population_size < 2:
            raise ValidationError("population_size must be >= 2")
        if self.generations < 1:
            raise ValidationError("generations must be >= 1")
        if not (1 <= self.tournament_size <= self.population_size):
            raise ValidationError("tournament_size must lie in [1, population_size]")
        if not (0 <= self.elitism_count < self.population_size):
            raise ValidationError("elitism_count must lie in [0, population_size)")
        if not (0.0 <= self.mutation_rate <= 1.0):
            raise ValidationError("mutation_rate must lie in [0, 1]")
        if not self.mutation_mean >= 1.0:
            raise ValidationError("mutation_mean must be >= 1 (geometric distribution on {1, 2, ...})")
        if not (0 <= self.rng_seed < 2**64):
            raise ValidationError("rng_seed must be a 64-bit unsigned integer")
        if self.min_count < 0:
            raise ValidationError("min_count must be >= 0")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class GaResult:
    best: WeightVector
    best_fitness: float
    history: list[tuple[float, float]] = field(default_factory=list)
    evaluations: int = 0

    def to_dict(self) -> dict:
        return {
            "best": list(self.best.counts),
            "best_fitness": self.best_fitness,
            "history": [{"best": b, "mean": m} for b, m in self.history],
            "evaluations": self.evaluations,
        }


def repair(raw: Sequence[int], N_total: int, rng: np.random.Generator | None = None, min_count: int = 0) -> WeightVector:
    """Project an integer vector onto ``{m : sum(m) = N_total, m_i >= min_count}``.

    Entries below ``min_count`` are clamped up, then single units are added or
    removed at indices visited round-robin in a shuffled order until the sum is
    exact. Entries at ``min_count`` are skipped when removing.
    """
    m = np.maximum(np.asarray(raw, dtype=np.int64), min_count)
    n = m.size
    if n < 2:
        raise ValidationError("need at least two entries")
    if n * min_count > N_total:
        raise ValidationError(f"min_count {min_count} x {n} types exceeds the budget {N_total}")
    diff = int(N_total - m.sum())
    if diff == 0:
        return WeightVector(tuple(m))
    rng = np.random.default_rng(0) if rng is None else rng
    order = rng.permutation(n)
    if diff > 0:
        q, r = divmod(diff, n)
        m += q
        m[order[:r]] += 1
    else:
        excess = -diff
        while excess:
            eligible = order[m[order] > min_count]
            take = eligible[:excess]
            m[take] -= 1
            excess -= take.size
    return WeightVector(tuple(m))


def crossover(parent_a: WeightVector, parent_b: WeightVector, rng: np.random.Generator, min_count: int = 0) -> WeightVector:
    """Uniform per-gene crossover followed by :func:`repair`."""
    a, b = parent_a.as_array(), parent_b.as_array()
    if a.shape != b.shape or parent_a.total != parent_b.total:
        raise ValidationError("parents must have the same length and budget")
    pick = rng.random(a.size) < 0.5
    return repair(np.where(pick, a, b), parent_a.total, rng, min_count)


def mutate(w: WeightVector, cfg: GaConfig, rng: np.random.Generator) -> WeightVector:
    """Move ``k ~ Geometric(1 / mutation_mean)`` units between two random entries.

    ``k`` is truncated so the donor does not drop below ``cfg.min_count``.
    """
    if cfg.mutation_rate == 0.0 or rng.random() >= cfg.mutation_rate:
        return w
    m = w.as_array()
    donor, receiver = rng.choice(m.size, size=2, replace=False)
    k = int(rng.geometric(1.0 / cfg.mutation_mean))
    k = min(k, int(m[donor]) - cfg.min_count)
    if k <= 0:
        return w
    m[donor] -= k
    m[receiver] += k
    return WeightVector(tuple(m))


def _random_composition(n, N_total, min_count, rng):
    free = N_total - n * min_count
    p = rng.dirichlet(np.ones(n))
    return WeightVector(tuple(rng.multinomial(free, p) + min_count))


def _tournament(fit, k, rng):
    idx = rng.integers(0, fit.size, size=k)
    return int(idx[np.argmin(fit[idx])])


def ga_optimize(
    fitness: Callable[[WeightVector], float],
    n_types: int,
    N_total: int = DEFAULT_BUDGET,
    cfg: GaConfig | None = None,
    map_fn: Callable[[Callable, Iterable], Iterable] = map,
    initial: Sequence[WeightVector] = (),
) -> GaResult:
    """Minimise ``fitness`` over compositions of ``N_total`` into ``n_types`` parts.

    Generational GA: tournament selection, uniform crossover with repair,
    unit-transfer mutation and elitism. ``history[g]`` holds the best and mean
    fitness of generation ``g``; with ``elitism_count >= 1`` the best column is
    non-increasing. Fitness values are cached per genome, so ``fitness`` must be
    deterministic.

    ``initial`` individuals (optional) replace the first random ones.
    """
    cfg = GaConfig() if cfg is None else cfg
    if n_types < 2:
        raise ValidationError("n_types must be >= 2")
    if N_total < n_types:
        raise ValidationError(f"budget {N_total} smaller than the number of types {n_types}")
    if n_types * cfg.min_count > N_total:
        raise ValidationError("min_count too large for the budget")
    rng = np.random.default_rng(cfg.rng_seed)
    cache: dict[tuple[int, ...], float] = {}

    pop = [_random_composition(n_types, N_total, cfg.min_count, rng) for _ in range(cfg.population_size)]
    for i, w in enumerate(list(initial)[: cfg.population_size]):
        if len(w) != n_types or w.total != N_total:
            raise ValidationError(f"initial individual {i} does not match ({n_types} types, budget {N_total})")
        pop[i] = w

    best_w, best_f = None, math.inf
    history = []
    for gen in range(cfg.generations):
        todo = list(dict.fromkeys(w.counts for w in pop if w.counts not in cache))
        for key, val in zip(todo, map_fn(fitness, [WeightVector(k) for k in todo])):
            cache[key] = float(val)
        fit = np.array([cache[w.counts] for w in pop])
        i_best = int(np.argmin(fit))
        if fit[i_best] < best_f:
            best_f, best_w = float(fit[i_best]), pop[i_best]
        history.append((float(fit[i_best]), float(np.mean(fit))))
        if gen == cfg.generations - 1:
            break
        elite = [pop[i] for i in np.argsort(fit, kind="stable")[: cfg.elitism_count]]
        children = []
        while len(children) < cfg.population_size - len(elite):
            a = pop[_tournament(fit, cfg.tournament_size, rng)]
            b = pop[_tournament(fit, cfg.tournament_size, rng)]
            child = crossover(a, b, rng, cfg.min_count)
            children.append(mutate(child, cfg, rng))
        pop = elite + children
    return GaResult(best_w, best_f, history, len(cache))


def exhaustive_two(fitness: Callable[[WeightVector], float], N_total: int) -> tuple[WeightVector, float]:
    """Brute-force minimum over all ``N_total + 1`` two-part compositions."""
    best = min(range(N_total + 1), key=lambda a: (fitness(WeightVector((a, N_total - a))), a))
    w = WeightVector((best, N_total - best))
    return w, fitness(w)
