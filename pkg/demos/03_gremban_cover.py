# coding: utf-8

# # Positive off-diagonal entries

# A diagonally dominant matrix with some positive off-diagonals is solved on
# its double cover, which is a Laplacian. The two halves of the cover
# solution are negatives of each other.

# In[1]:

import numpy as np

from lapsolve import classify, cover_solve
from lapsolve.generators import gremban_system


# In[2]:

a, b = gremban_system(80, seed=5, excess=0.3)
print(classify(a))


# In[3]:

x, xc, rep = cover_solve(a, b, eps=1e-8)
print("cover used:", rep.gremban, "cover size:", len(xc))


# In[4]:

h = len(xc) // 2
print("antisymmetry:", np.linalg.norm(xc[:h] + xc[h:]) / np.linalg.norm(xc[:h]))
print("error:", np.linalg.norm(x - np.linalg.solve(a.toarray(), b)) / np.linalg.norm(x))
