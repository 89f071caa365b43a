"""
A full run on survey-shaped data
================================

Synthetic data with the shape of a part-time work survey: 827 employees,
14 qualitative variables (39 modalities) and 5 working-time quantities.
The whole pipeline writes its tables and maps into a directory.
"""

import tempfile
from pathlib import Path

from kdisjmap import RunConfig, generate_synthetic, run_pipeline
from kdisjmap.synth import survey_plan

dataset, _ = generate_synthetic(survey_plan(), seed=827)
config = RunConfig(rows=7, cols=7, superclasses=10, seed=827, split_variable="GENDER")

out = Path(tempfile.mkdtemp(prefix="kdisjmap-"))
art = run_pipeline(config, dataset, out)
print("artifacts in", out)
print(sorted(p.name for p in out.iterdir()))

###############################################################################
# Class sizes, and the first lines of the class report.

print("sizes:", art.profile.sizes.tolist(), "total", art.profile.sizes.sum())
print("\n".join((out / "report.txt").read_text().splitlines()[:25]))

###############################################################################
# The map with each cell split by gender: ``count(men,women)``.

print((out / "map.txt").read_text())
