"""Classical and quantum dynamics of the round-off triangle map.

The package reproduces, at desk scale, the chaos diagnostics of the map:
Lyapunov-exponent estimators, classical out-of-time-order correlators under
three averaging schemes, split-step Floquet evolution with coherent-state
OTOCs, and the quantum-classical comparison layer.  See the ``trimap`` CLI
for reproducible sweeps.
"""

__version__ = "0.1.0"

from ._kernels import BACKEND
from .analysis import (GrowthFit, OtocSeries, delta_qc, ehrenfest_time,
                       fit_growth_rate, matched_classical_r)
from .classical_otoc import (GaussianEnsembleSpec, crossover_time,
                             otoc_classical, otoc_phase_space,
                             random_ensemble_spec, sample_ensemble)
from .dynamics import (PhasePoint, ReturnTimeModel, TangentFrame,
                       TrajectoryRecord, evolve, map_step, return_time_stats,
                       tangent_step, wrap)
from .lyapunov import (LyapunovEstimates, estimate_all, lyapunov_local_max,
                       lyapunov_numerical, lyapunov_series, lyapunov_simple,
                       lyapunov_star, max_eigenvalue_product)
from .params import DEFAULT_ALPHA, MapParams
from .potential import (RegionTag, classify_region, potential_deriv,
                        potential_second_deriv, potential_value)
from .quantum import (FloquetSpec, apply_momentum, apply_position,
                      build_coherent_state, dense_oracle, dim_for_hbar_exponent,
                      floquet_apply, hbar_for_exponent, momentum_representation)
from .quantum_otoc import QuantumOtocJob, growth_rate_vs_hbar, otoc_quantum

__all__ = [
    "BACKEND", "DEFAULT_ALPHA", "MapParams", "PhasePoint", "TangentFrame",
    "TrajectoryRecord", "ReturnTimeModel", "RegionTag", "GaussianEnsembleSpec",
    "OtocSeries", "GrowthFit", "LyapunovEstimates", "FloquetSpec",
    "QuantumOtocJob", "wrap", "map_step", "tangent_step", "evolve",
    "return_time_stats", "classify_region", "potential_value",
    "potential_deriv", "potential_second_deriv", "lyapunov_numerical",
    "lyapunov_series", "lyapunov_simple", "lyapunov_local_max",
    "lyapunov_star", "max_eigenvalue_product", "estimate_all",
    "sample_ensemble", "random_ensemble_spec", "otoc_classical",
    "otoc_phase_space", "crossover_time", "fit_growth_rate", "delta_qc",
    "matched_classical_r", "ehrenfest_time", "build_coherent_state",
    "floquet_apply", "apply_position", "apply_momentum", "dense_oracle",
    "momentum_representation", "hbar_for_exponent", "dim_for_hbar_exponent",
    "otoc_quantum", "growth_rate_vs_hbar",
]
