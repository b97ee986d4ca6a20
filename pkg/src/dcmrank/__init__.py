"""PageRank on directed configuration models and its thorny-branching-tree approximation."""

__version__ = "0.1.0"

from .degree_model import (  # noqa: E402
    Algorithm1Config,
    BiDegreeSequence,
    DegreeParams,
    calibrate_lambda2,
    run_algorithm1,
    sample_target_sequences,
)
from .graph import MultiDigraph, build_dcm, explore_and_couple  # noqa: E402
from .pagerank import (  # noqa: E402
    PageRankConfig,
    RankVector,
    apply_M,
    power_iterate_converged,
    power_iterate_k,
    solve_exact,
)
from .tbt import CouplingStats, Tbt, grow_tbt, sample_size_biased, tree_pagerank  # noqa: E402
