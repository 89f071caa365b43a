"""
From survey answers to the adjusted disjunctive table
=====================================================

Each qualitative answer becomes a one-hot block.  The adjusted table divides
every entry by ``sqrt(K * column count)`` so plain Euclidean distance behaves
like the chi-square distance of correspondence analysis.
"""

import numpy as np

from kdisjmap import CategoricalSchema, adjust, encode, rarest_modality

schema = CategoricalSchema.from_dict({
    "CONTRACT": ["OEC", "FTC"],
    "SAT": ["SAT1", "SAT2", "SAT3"],
})
records = [
    ["OEC", "SAT1"],
    ["OEC", "SAT1"],
    ["OEC", "SAT2"],
    ["FTC", "SAT3"],
]
D = encode(records, schema)
print(schema.modality_names())
print(D.values)

###############################################################################
# Every column of the adjusted table has squared norm 1/K, whatever its
# frequency, so rare modalities get large entries.

Dc = adjust(D)
print(np.round(Dc.values, 3))
print("column squared norms:", np.round((Dc.values ** 2).sum(axis=0), 6))

###############################################################################
# The rarest modality of an individual is the one held by the fewest people;
# it is also the largest entry of that individual's adjusted row.

for i in range(D.n_rows):
    j = rarest_modality(Dc, i)
    print(records[i], "->", Dc.names[j])
