"""Numerical experiments: convergence order, comparison principle, Gamma limit.

Each call returns plain dictionaries or rows that the command line tool also
writes as CSV tables.
"""

import numpy as np

from phaseflow.graph import complete_graph, cycle_graph, path_graph
from phaseflow.lab import convergence_order_experiment, cp2_experiment, gamma_convergence_experiment, pinning_map
from phaseflow.spectral import decompose

g = cycle_graph(6)
dec = decompose(g)

u0 = 0.5 + 0.05 * np.array([1, -1, 1, -1, 1, -1.0])
res = convergence_order_experiment(g, dec, 1.0, u0, 0.4, [0.2, 0.1, 0.05, 0.025], tau_ref=1 / 1024)
for row in res["rows"]:
    print(f"tau={row['tau']:.3f}  error={row['error']:.3e}")
print(f"fitted order {res['slope']:.3f}")

rng = np.random.default_rng(0)
u0 = rng.random(6)
v0 = np.clip(u0 - 0.2, 0, 1)
print("ordered data stay ordered:", cp2_experiment(g, dec, 0.5, u0, v0, T=1.0)["passed"])

for name, h in (("P3", path_graph(3)), ("K3", complete_graph(3))):
    gam = gamma_convergence_experiment(h, [1.0, 0.5, 0.25, 0.125], K=20)
    print(name, "minimizer distances:", [r["minimizer_distance"] for r in gam["rows"]])

for row in pinning_map(path_graph(4), [0.5])[:4]:
    print(row)
