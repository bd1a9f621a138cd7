"""Looking at a landscape exhaustively.

For small dimensions the whole improving-move graph fits in memory: its
sinks are the local optima and its longest path bounds every hill climb.
A random walk gives the autocorrelation, a measure of ruggedness.
"""

import math

from memetic_balance import (
    LongPathFn,
    OneMax,
    RngStream,
    SectionedPathFn,
    SectionedPathParams,
    autocorrelation,
    build_state_graph,
    longest_improving_path,
    sinks,
)

f = SectionedPathFn(SectionedPathParams(dim=7, k=3, D=4, gap=2, sections=2))
g = build_state_graph(f)
print(f"f_d on 7 bits: {g.edge_count} improving moves, {len(g.sink_ids())} local optima")
for x in sorted(sinks(g), key=f.evaluate, reverse=True)[:6]:
    print(f"  {x}  fitness {f.evaluate(x)}")

length, walk = longest_improving_path(build_state_graph(LongPathFn(9, 2)))
print(f"\nlongest improving path on the 9-bit long path: {length} moves, from {walk[0]} to {walk[-1]}")

ac = autocorrelation(OneMax(50), 200_000, 5, RngStream(0))
print("\nOneMax(50) random-walk autocorrelation:", " ".join(f"{r:.3f}" for r in ac.r))
print(f"correlation length {ac.correlation_length:.1f} (closed form {-1 / math.log(1 - 2 / 50):.1f})")
