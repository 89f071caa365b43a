"""
Individuals and modalities on one map
=====================================

Three clusters are planted in synthetic survey data.  A joint map places
individuals and modalities on the same 7 x 7 grid; a Ward cut of the code
vectors regroups the units into three super classes.
"""

import numpy as np

from kdisjmap import (GridSpec, adjust, classify_individuals, classify_modalities, contiguity_report, cut,
                      encode, generate_synthetic, hierarchical_cluster, positive_deviation_rate, render_map, train)
from kdisjmap.synth import planted_plan

dataset, truth = generate_synthetic(planted_plan(n=600), seed=1)
D = encode(dataset.records, dataset.schema)
Dc = adjust(D)
print("table:", Dc.values.shape)

spec = GridSpec(7, 7)
model = train(Dc, spec, seed=1)
iu = classify_individuals(model, Dc)
mu = classify_modalities(model, Dc)

###############################################################################
# Cluster the individual part of the code vectors and cut into three classes.

sc = cut(hierarchical_cluster(model.codebook, restrict=model.individual_part), 3)
labels = sc.labels[iu]
purity = sum(np.bincount(truth[labels == k]).max() for k in range(3)) / len(truth)
print("purity against the planted clusters: %.3f" % purity)
print("classes contiguous on the grid:", contiguity_report(sc, spec).contiguous)
print("modalities over-represented in their class: %.2f"
      % positive_deviation_rate(model, sc, D, labels, Dc))

###############################################################################
# The map: modality labels, the super class in brackets, then the number of
# individuals split by the planted cluster.

short = [name.split(".", 1)[1] for name in Dc.names]
print(render_map(spec, iu, mu, short, split=[str(c) for c in truth],
                 split_levels=["0", "1", "2"], superclasses=sc.labels))
