"""Performance-preserving sparsification of linear consensus networks."""

__version__ = "0.1.0"

from .graph import (  # noqa: E402
    DisconnectedGraphError,
    GraphError,
    WeightedGraph,
    degrees,
    from_gain_matrix,
    is_connected,
    laplacian,
    read_edgelist,
    sparsity_l0,
    sparsity_s01,
    write_edgelist,
)
from .spectral import (  # noqa: E402
    decompose,
    effective_resistances,
    loewner_epsilon,
    pseudoinverse,
    spectrum,
    sylvester_solve,
)
from .measures import MeasureDescriptor, catalog, normalized_index, parse_measure, relative_loss  # noqa: E402
from .abstraction import (  # noqa: E402
    AbstractionResult,
    PartitionedNetwork,
    abstract,
    abstract_localized,
    abstract_parallel,
    abstract_until,
    sampling_distribution,
    superiorize,
    tradeoff_check,
)
from .bounds import (  # noqa: E402
    h2_error_exact,
    h2_error_report,
    h2_error_trace_bound,
    output_error_bound,
    relative_h2_error_bound,
)
