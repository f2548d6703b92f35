"""Graph calculus and the heat semigroup on small graphs.

Builds a few weighted graphs, evaluates Dirichlet energy and total variation,
and diffuses an indicator function with the spectral heat kernel.
"""

import numpy as np

from phaseflow.graph import (cut_weight, cycle_graph, dirichlet_energy, indicator, total_variation,
                             two_cluster_graph, vertex_inner)
from phaseflow.spectral import decompose, heat_apply, operator_norm

g = two_cluster_graph(8, inter=0.1)
chi = indicator(8, range(4))
print("two-cluster graph:", g)
print("TV of the left cluster =", total_variation(g, chi), "= cut weight", cut_weight(g, range(4)))
print("Dirichlet energy =", dirichlet_energy(g, chi))

dec = decompose(g)
print("spectrum:", np.round(dec.eigenvalues, 4))
print("operator norm of the Laplacian:", operator_norm(dec))

# diffusion conserves mass and relaxes towards the mean
for t in (0.0, 0.5, 2.0, 10.0):
    v = heat_apply(dec, t, chi)
    print(f"t={t:5.1f}  u={np.round(v, 3)}  mass={vertex_inner(g, v, np.ones(8)):.6f}")

# r = 1 gives the random-walk normalisation
c = cycle_graph(6, r=1.0)
print("cycle with r=1, vertex weights:", c.vertex_weights)
