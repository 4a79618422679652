"""RIS-assisted point-to-point MIMO link simulator with weighted DFT-codebook
reflection design, plus the benchmark schemes and sweep tooling around it."""

__version__ = "0.1.0"

from .channel import (ArrayGeometry, ChannelRealization, LinkAngles, LinkStatistics,
                      derive_los_angles, path_loss, sample_channels, sample_rician,
                      ula_steering, upa_steering)
from .codebook import (Codebook, dft_codebook, dft_matrix, environment_aware_order,
                       random_codebook)
from .errors import (ConfigError, DegenerateGeometryError, NoChannelError,
                     NumericalRankError)
from .precoding import (CapacityRecord, PrecoderSolution, capacity,
                        effective_channel, svd_precoder, waterfill)
from .rng import SeedPath
from .schemes import SchemeSpec, TrialEnv, run_scheme
from .training import (StackedChannel, TrainingObservation, collect_observations,
                       estimate_composite, estimate_stacked, orthogonal_pilot,
                       stack_channels, uplink_receive)
from .weights import (WeightProblem, WeightSolution, block_gram, compose_reflection,
                      initial_weights, optimize_weights, stream_basis)

__all__ = [
    "__version__",
    "ArrayGeometry", "ChannelRealization", "LinkAngles", "LinkStatistics",
    "derive_los_angles", "path_loss", "sample_channels", "sample_rician",
    "ula_steering", "upa_steering",
    "Codebook", "dft_codebook", "dft_matrix", "environment_aware_order",
    "random_codebook",
    "ConfigError", "DegenerateGeometryError", "NoChannelError", "NumericalRankError",
    "CapacityRecord", "PrecoderSolution", "capacity", "effective_channel",
    "svd_precoder", "waterfill",
    "SeedPath",
    "SchemeSpec", "TrialEnv", "run_scheme",
    "StackedChannel", "TrainingObservation", "collect_observations",
    "estimate_composite", "estimate_stacked", "orthogonal_pilot", "stack_channels",
    "uplink_receive",
    "WeightProblem", "WeightSolution", "block_gram", "compose_reflection",
    "initial_weights", "optimize_weights", "stream_basis",
]
