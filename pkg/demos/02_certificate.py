# coding: utf-8

# # A preconditioner and its certificate

# The preconditioner is a low-stretch spanning tree plus a few augmentation
# edges. Routing every edge of the graph through it yields an upper bound on
# the relative condition number, which we compare with the exact value.

# In[1]:

import math

from lapsolve import audit, kappa_f_oracle, precondition
from lapsolve.generators import random_connected
from lapsolve.graph import laplacian_of


# In[2]:

g = random_connected(200, seed=3, spread=6)
t = math.ceil(g.m ** (3 / 13))
pre = precondition(g, t)
print(pre.summary())


# The dense oracle works on the range of the pencil.

# In[3]:

exact = kappa_f_oracle(laplacian_of(g), pre.matrix())
print(f"oracle {exact:.4g} <= certificate {pre.certificate.bound:.4g}")


# The number of augmentation edges stays within its budget.

# In[4]:

print(len(pre.extra), "augmentation edges, budget", pre.size_budget)
print("budget violations:", audit.size_budget(pre))


# In[5]:

for s in pre.levels:
    print(s)
