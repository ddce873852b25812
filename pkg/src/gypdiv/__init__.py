"""f-divergences and their finite-partition lower bounds."""

from .divergence import divergence, renyi, renyi_from_tsallis, tsallis, tsallis_from_renyi
from .errors import (
    AccuracyError,
    DefinitionError,
    DomainError,
    GeneratorDefinitionError,
    GypDivError,
    InfiniteDivergenceError,
    LengthMismatchError,
    NegativeEntryError,
    NotNormalizedError,
    SizeGuardError,
)
from .generator import (
    Generator,
    NormalizedGenerator,
    boundary_limits,
    builtin_generator,
    chi_square,
    eval_generator,
    hellinger,
    kl,
    level_threshold,
    lower_level_threshold,
    normalize,
    subgradient,
    total_variation,
    tsallis_generator,
)
from .gyp import (
    ApproxResult,
    InfinityEvidence,
    SweepRow,
    convergence_sweep,
    detect_infinite,
    gyp_approximate,
)
from .measure import (
    CountablePair,
    DiscretePair,
    DivergenceValue,
    GaussianPair,
    GridPair,
    Interval,
    MeasurePair,
    countable_pair,
    gaussian_pair,
    grid_pair,
    load_pair,
    make_discrete_pair,
    named_countable_pair,
    pair_from_dict,
)
from .partition import (
    Partition,
    brute_force_supremum,
    coarsen,
    common_refinement,
    merge,
    partition_divergence,
    refine,
    renyi_partition_bound,
)

__version__ = "0.1.0"
