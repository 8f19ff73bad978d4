"""
Expansive hyperbolic convolution layers
=======================================

A filter of span s has s+1 taps.  The expansive convolution pads fully, so a
length-n input becomes length n+s, and a depth-L network grows its width by s
per layer.  Hyperbolic layers convolve in the tangent space at the origin and
add a bias with Möbius addition.
"""

import numpy as np

from ehdcnn import geometry as geo
from ehdcnn import nn

# the convolution is a polynomial product: (1 + 2z)(3 + 4z)
print("expansive [1,2]*[3,4] =", nn.expansive_conv([1, 2], [3, 4]))
print("contractive [1,2]*[3,4] =", nn.contractive_conv([1, 2], [3, 4]))

params = nn.init_params(n=10, s=8, L=4, c=1.0, seed=0)
print("layer widths:", params.dims)

x = np.random.default_rng(0).uniform(-1, 1, size=(3, 10))
pred = nn.forward(params, x)
print("predictions (tangent space):", pred.tangent)
print("every hidden state inside the ball:", all(geo.in_ball(h, 1.0) for h in pred.hidden))

# at c = 0 the same parameters give the plain Euclidean network
flat = nn.ModelParams(params.layers, params.output_vec, 0.0, params.n_in)
print("Euclidean predictions:", nn.forward(flat, x).tangent)
