"""
Gradients from a tape
=====================

Every arithmetic operation on a ``Var`` is appended to a tape.  One reverse
sweep over the tape gives the gradient of a scalar with respect to every leaf.
"""

import numpy as np

from ehdcnn import autodiff as ad
from ehdcnn import diffgeo

tape = ad.Tape()
x = tape.const([0.3, 0.4])
loss = ad.sum(diffgeo.log0(diffgeo.exp0(x, 1.0), 1.0) * np.array([1.0, -2.0]))
tape.backward(loss)
print("nodes on the tape:", len(tape))
print("d loss / d x =", x.grad, "(log0 undoes exp0, so this is [1, -2])")

# compare against central differences
f = lambda v: ad.sum(diffgeo.mobius_add(v, np.array([0.1, -0.6]), 1.0))
print("max relative FD error:", ad.finite_difference_check(f, [0.2, 0.5]))

# relu has subgradient 0 at 0
tape = ad.Tape()
z = tape.const([-1.0, 0.0, 2.0])
tape.backward(ad.sum(ad.relu(z)))
print("relu gradient:", z.grad)
