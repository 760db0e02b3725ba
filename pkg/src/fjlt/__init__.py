"""Fast Johnson-Lindenstrauss transform via subsampled Hadamard rows.

The map is y -> (1/sqrt(k)) * Phi * diag(b) * y with Phi built from k rows
of the unnormalized Hadamard matrix and b a random sign pattern; applying it
costs O(n log n) through the fast Walsh-Hadamard butterfly. Companion
estimators measure restricted-isometry constants, the deviation supremum
over B2 ∩ alpha*Binf, distortion over point sets, and concentration of the
embedded norm.
"""

from fjlt.decomposition import HeavyLightSplit, split_heavy_light
from fjlt.estimators import (
    ConcentrationReport,
    CrossTermStats,
    DistortionReport,
    EAlphaEstimate,
    RipReport,
    concentration_check,
    cross_term_stats,
    deviation_matrix,
    distortion_stats,
    estimate_e_alpha,
    rip_constant_bruteforce,
    spectral_norm,
)
from fjlt.hadamard import (
    KERNEL,
    RowIndexSet,
    fwht_in_place,
    hadamard_entry,
    naive_hadamard_apply,
    subsampled_apply,
)
from fjlt.transform import (
    FastJLTransform,
    TransformParams,
    sample_transform,
    sparsity_level,
    target_dimension,
)

__version__ = "0.1.0"
