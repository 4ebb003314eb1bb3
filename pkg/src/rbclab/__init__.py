"""Spin systems with random i.i.d. symmetric boundary conditions.

Five model families on finite volumes, an exact-enumeration Gibbs oracle,
certified boundary-energy statistics, a validated Metropolis layer, and
empirical-metastate diagnostics, all behind one deterministic seeding
scheme and a config-driven CLI (`rbclab run`, `rbclab validate`).
"""

__version__ = "0.1.0"

from .boundary import (ScalingFit, TailSum, WindowProbability, fit_loglog,
                       hurwitz_coefficients, interval_boundary_energy,
                       metastate_weight, nn2d_boundary_gap, sample_W_plus,
                       scaling_fit, tail_sum, w_plus_exact_std,
                       window_probability)
from .exact import (GibbsTable, MixtureFit, expectation, fit_mixture_weight,
                    gibbs_table, log_partition_function, partition_function,
                    plus_phase_weight, total_variation)
from .metastate import (FlipRecord, MetastateHistogram, VolumeSequence,
                        csd_flip_statistics, empirical_metastate,
                        is_strictly_sparse, make_volume_sequence,
                        null_recurrence_frequency)
from .models import (BoundaryCondition, DisorderRealization, ModelSpec,
                     SpinConfiguration, Volume, finite_volume_energy,
                     gauge_boundary, gauge_partner, gauge_transform)
from .montecarlo import McRun, batch_means_stderr, metropolis_run

__all__ = [
    "__version__",
    "BoundaryCondition", "DisorderRealization", "ModelSpec",
    "SpinConfiguration", "Volume", "finite_volume_energy", "gauge_boundary",
    "gauge_partner", "gauge_transform",
    "GibbsTable", "MixtureFit", "expectation", "fit_mixture_weight",
    "gibbs_table", "log_partition_function", "partition_function",
    "plus_phase_weight", "total_variation",
    "ScalingFit", "TailSum", "WindowProbability", "fit_loglog",
    "hurwitz_coefficients", "interval_boundary_energy", "metastate_weight",
    "nn2d_boundary_gap", "sample_W_plus", "scaling_fit", "tail_sum",
    "w_plus_exact_std", "window_probability",
    "FlipRecord", "MetastateHistogram", "VolumeSequence",
    "csd_flip_statistics", "empirical_metastate", "is_strictly_sparse",
    "make_volume_sequence", "null_recurrence_frequency",
    "McRun", "batch_means_stderr", "metropolis_run",
]
