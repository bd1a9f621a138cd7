"""Long paths: why a pure hill climber is slow and a (1+1) EA is not.

A long k-path is a sequence of Hamming neighbours whose length grows
exponentially with the dimension. Climbing it one step at a time takes
exactly (length - 1) moves, while mutation can jump ahead by flipping a few
bits at once.
"""

import numpy as np

from memetic_balance import BitString, LongPathFn, MAConfig, build_long_k_path, derive_seed, local_search, run

print("dim  path length  hill-climb moves  (1+1) EA median evaluations")
for dim in (7, 11, 15, 19):
    path = build_long_k_path(dim, 2)
    f = LongPathFn(dim, 2, path=path)
    climb = local_search(BitString.zeros(dim), f, None)
    evals = [run(MAConfig(dim, max_evaluations=10**7, seed=derive_seed(1, i)), f).total_evals for i in range(30)]
    print(f"{dim:3d}  {len(path):11d}  {climb.iterations_used:16d}  {np.median(evals):12.0f}")

path = build_long_k_path(5, 2)
print("\nthe first points of the dim-5 path:")
print("  " + " -> ".join(str(x) for x in path.points[:8]))
