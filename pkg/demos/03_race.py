"""The race between a connected and an unconnected path.

Local search climbs the connected path; only mutation can hop between the
peaks of the unconnected one. Which end is reached first decides the run.
At small dimensions mutation alone also climbs the connected path quickly,
so changing how often local search runs barely moves the outcome.
"""

from memetic_balance import MAConfig, RaceFn, RaceParams, derive_seed, every_tau, run
from memetic_balance.engine import copies_of

f = RaceFn(RaceParams(half_dim=13, k=4, L_con=18, L_unc=3, variant="con"))
start = f.point(0, 0)
for tau in (1, 8, 64):
    outcomes = {}
    for i in range(30):
        cfg = MAConfig(
            f.dim, schedule=every_tau(tau), delta=4, init=copies_of(start),
            max_generations=20000, seed=derive_seed(4, i),
        )
        rec = run(cfg, f)
        outcomes[rec.outcome.value] = outcomes.get(rec.outcome.value, 0) + 1
    print(f"tau={tau:3d}: {outcomes}")
