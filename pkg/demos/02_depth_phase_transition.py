"""Local search depth: only the right depth finds the optimum.

The sectioned path function rewards climbing D steps into each section.
Stopping too early leaves the offspring worse than its parent, and climbing
past depth D moves it away from the hidden targets, which sit two bit flips
from the depth-D stopping point.
"""

from memetic_balance import MAConfig, SectionedPathFn, SectionedPathParams, derive_seed, every_tau, run
from memetic_balance.engine import copies_of

params = SectionedPathParams(dim=28, k=3, D=10, gap=4, sections=30)
f = SectionedPathFn(params)
start = f.path[0]
print(f"path length {len(f.path)}, sections of {f.section_length} points, target fitness {f.target_fitness}")

replicates, budget = 20, 70
for delta in (6, 10, 14):
    wins = 0
    for i in range(replicates):
        cfg = MAConfig(
            f.dim, mu=1, lam=28, schedule=every_tau(1), delta=delta,
            init=copies_of(start), max_generations=budget, seed=derive_seed(3, i),
        )
        wins += run(cfg, f).outcome.value == "OPTIMUM_FOUND"
    print(f"delta={delta:2d}: {wins}/{replicates} runs reach a target within {budget} generations")
