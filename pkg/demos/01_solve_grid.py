# coding: utf-8

# # Solving a grid Laplacian

# A weighted 2D grid gives a singular Laplacian system. We solve it with the
# one-shot solver and with a two-level recursion, then compare both against a
# dense least-squares solution.

# In[1]:

import numpy as np

from lapsolve import RecursionPlan, one_shot_solve, recursive_solve
from lapsolve.generators import grid2d, laplacian_system


# In[2]:

a, b = laplacian_system(grid2d(20, seed=1, spread=2), seed=1)
print(a.n, "vertices,", (a.nnz - a.n) // 2, "edges")


# The reference solution has zero mean, like the solver output.

# In[3]:

xs = np.linalg.lstsq(a.toarray(), b, rcond=None)[0]


# In[4]:

x1, rep1 = one_shot_solve(a, b, eps=1e-8)
print("one-shot:", rep1.iterations, "iterations, error",
      np.linalg.norm(x1 - xs) / np.linalg.norm(xs))


# In[5]:

x2, rep2 = recursive_solve(a, b, eps=1e-8, plan=RecursionPlan(depth=2))
print("depth 2:", rep2.iterations, "outer iterations, error",
      np.linalg.norm(x2 - xs) / np.linalg.norm(xs))


# Each level reports its size after trimming and the work spent in inner solves.

# In[6]:

for lv in rep2.systems[0].levels:
    print(f"level {lv.level}: n={lv.n} |S|={lv.extra_edges} reduced to {lv.reduced_n}, "
          f"inner solves {lv.inner_solves}, inner iterations {lv.inner_iterations}")
