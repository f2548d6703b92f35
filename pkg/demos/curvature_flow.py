"""Set-valued curvature flows on graphs.

Runs the distance-penalised and heat-penalised set schemes, the residual of
the MBO energy against total variation, and the Elmo-type ODE flow.
"""

import numpy as np

from phaseflow.graph import cycle_graph, path_graph, random_graph, total_variation
from phaseflow.mcf import augment_complete, elmo_mcf_flow, mbo_residual_ratio, new_mcf_step, vggob_mcf_step
from phaseflow.spectral import decompose

p = path_graph(6)
S = np.array([False, True, True, True, False, False])
print("distance scheme on P6:", vggob_mcf_step(p, S, 1.0).astype(int))
print("heat scheme on P6:    ", new_mcf_step(p, decompose(p), S, 0.5).astype(int))

# every vertex of the augmented complete graph touches the boundary
aug = augment_complete(path_graph(4), 1e-6)
print("augmented P4, S={0,1}:", vggob_mcf_step(aug, np.array([True, True, False, False]), 1.0).astype(int))

c = cycle_graph(8)
dec = decompose(c)
for tau in (0.04, 0.02, 0.01):
    print(f"tau={tau:.3f}  |J/tau - TV| = {mbo_residual_ratio(c, dec, [0, 1, 2], tau):.5f}")

g = random_graph(8, seed=4, r=1.0)
traj = elmo_mcf_flow(g, np.random.default_rng(4).random(8), 2.0, 0.01, 100)
tv = [total_variation(g, u) for u in traj.states]
print(f"Elmo flow: TV {tv[0]:.4f} -> {tv[-1]:.4f} over {len(traj) - 1} steps")
