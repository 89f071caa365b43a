"""Kohonen maps of individuals and modalities described by qualitative variables."""

from .dataio import Dataset, RunConfig, load, load_config
from .disjunctive import (AdjustedTable, CategoricalSchema, CategoricalVariable, DisjunctiveTable,
                          adjust, column_counts, decode, encode, rarest_modality)
from .errors import ConfigError, DataError, KdisjError, NumericError
from .grid import GridSpec, grid_distance, is_connected, neighbors
from .kdisj import (KdisjModel, classify_individuals, classify_modalities, extended_vector,
                    step_individual, step_modality, train)
from .pipeline import run_pipeline
from .render import render_map, render_svg
from .som import (Codebook, ComponentRange, Schedule, classify, init_codebook, train_quantitative,
                  update_step, winner)
from .superclass import (class_means, class_sizes, contiguity_report, cut, deviation, fisher_f,
                         hierarchical_cluster, modality_percentages, positive_deviation_rate)
from .synth import generate_synthetic, survey_plan, planted_plan

__version__ = "0.1.0"
