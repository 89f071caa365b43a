"""
Grids and a classic Kohonen map
===============================

A map is a grid of units.  Distances on the grid use the Chebyshev metric,
so the radius-1 neighbourhood of an inner unit is a 3 x 3 block.  Cylinders
wrap the columns and tori wrap both axes.
"""

import numpy as np

from kdisjmap import GridSpec, grid_distance, neighbors
from kdisjmap.grid import distance_matrix
from kdisjmap.som import quantization_error, init_codebook, train_quantitative

spec = GridSpec(5, 5)
print("units:", spec.n_units)
print("distance from corner to centre:", grid_distance(spec, 0, 12))
print("radius-1 neighbours of unit 0:", sorted(neighbors(spec, 0, 1)))

# on a torus the corner touches the opposite edges
torus = GridSpec(5, 5, "torus")
print("torus neighbours of unit 0:", sorted(neighbors(torus, 0, 1)))

###############################################################################
# Train an 8 x 8 map on points drawn uniformly in the unit square.  After
# training, units that are next to each other on the grid hold code vectors
# that are close in the plane.

data = np.random.default_rng(0).random((2000, 2))
spec = GridSpec(8, 8)
start = init_codebook(spec, 2, data.min(0), data.max(0), seed=0)
cb = train_quantitative(data, spec, seed=0)
print("quantization error before %.3f, after %.3f"
      % (quantization_error(start, data), quantization_error(cb, data)))

V = cb.vectors
E = np.sqrt(((V[:, None] - V[None]) ** 2).sum(-1))
G = distance_matrix(spec)
print("mean distance between adjacent units %.3f" % E[G == 1].mean())
print("mean distance between other pairs    %.3f" % E[G > 1].mean())

# first coordinate of each code vector, laid out on the grid
print(np.round(V[:, 0].reshape(8, 8), 2))
