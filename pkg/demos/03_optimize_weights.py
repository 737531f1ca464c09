"""
Searching for the weight vector
===============================

A genetic algorithm over integer compositions of 1600 cells. The objective is
the worst (highest) RCSR over 11.3-32.3 GHz, to be minimised.
"""
from pgmrcs.cellmodel import SurrogateProvider, reference_palette
from pgmrcs.metrics import FrequencyGrid, SpectrumObjective, WeightVector
from pgmrcs.optimizer import GaConfig, ga_optimize

provider = SurrogateProvider(reference_palette())
objective = SpectrumObjective(provider, FrequencyGrid(10, 35, 251).freqs, "minimax", (11.3, 32.3))

print("uniform weights:", round(objective(WeightVector.uniform(7, 1600)), 4), "dB")

result = ga_optimize(objective, 7, 1600, GaConfig(rng_seed=1))
print("GA best:", result.best.counts, round(result.best_fitness, 4), "dB after", result.evaluations, "evaluations")
for gen in (0, 5, 20, 199):
    b, m = result.history[gen]
    print(f"  generation {gen:3d}: best {b:.4f}  mean {m:.4f}")

# forcing every type to appear at least 104 times (the smallest reference count)
constrained = ga_optimize(objective, 7, 1600, GaConfig(rng_seed=1, min_count=104))
print("with min_count=104:", constrained.best.counts, round(constrained.best_fitness, 4), "dB")
