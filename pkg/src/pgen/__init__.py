"""Empirical Poisson-genericity measurements for symbolic sequences.

The package counts overlapping k-block occurrences of deterministic or
seeded symbol streams over exact rational position sets, compares the
resulting occupancy laws against Poisson references, evaluates the
closed-form concentration and total-variation bounds, decides membership
in the rational-grid deviation test sets, and runs the annealed/quenched
Monte Carlo experiments at desk scale.
"""

__version__ = "0.1.0"

from .blockcount import (
    BlockHistogram,
    CountsOfCounts,
    Interval,
    IntervalUnion,
    PositionSet,
    count_blocks,
    counts_of_counts,
    decode_block,
    encode_block,
    incremental_lambda_sweep,
    positions_from_interval_union,
    z_statistic,
)
from .bounds import (
    annealed_tv_bound,
    janson_tv_bound,
    k0_threshold,
    mcdiarmid_bound,
    o_k_measure_bound,
    o_k_measure_partial_sum,
    quenched_parameters,
    tail_bound,
)
from .errors import DataFormatError, PgenError, ResourceLimitError, UsageError
from .mltest import (
    BadWitness,
    MltestConfig,
    bad_membership,
    enumerate_L_k,
    o_k_membership,
    required_prefix_length,
    t_m_report,
)
from .seqgen import (
    Alphabet,
    SymbolSource,
    along_squares,
    champernowne_source,
    derive_stream_seed,
    fibonacci_concat_source,
    file_source,
    iid_uniform_source,
    read_ascii,
    read_packed,
    rudin_shapiro_term,
    thue_morse_term,
    write_ascii,
    write_packed,
)
from .stats import (
    EmpiricalLaw,
    PoissonLaw,
    binomial_pmf,
    kallenberg_diagnostic,
    lambda_continuity_gap,
    poisson_pmf,
    poisson_sf,
    sup_deviation,
    tv_between,
    tv_distance,
)
from .synth import SynthConfig, SynthState, greedy_extend, new_state, score_prefix
