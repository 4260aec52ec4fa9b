"""Qualitative independence and covering-array toolkit.

Covering arrays of strength two (construction, verification, starter
search, size bounds), qualitative independence graphs on set partitions
(cliques, colourings, homomorphisms, covering arrays on graphs), and the
exact spectral theory of the meet-class relations on uniform partitions
(equitable partitions, spectra with exact multiplicities, eigenmatrices,
association-scheme verification).
"""

from .covering import (
    CoveringArray,
    CoveringError,
    LatinSquareSet,
    SearchResult,
    StarterVector,
    VerificationReport,
    binary_can,
    block_recursive,
    ca_from_text,
    ca_to_mols,
    ca_to_text,
    construct_finite_field_ca,
    expand_starter,
    is_balanced,
    iterate_block_recursive,
    search_starter,
    size_bounds,
    starter_from_text,
    starter_to_text,
    strip_to_disjoint,
    verify,
    verify_starter,
)
from .graphs import (
    CapExceeded,
    Graph,
    GraphError,
    GraphSpec,
    build_graph,
    chromatic_number,
    core_project,
    covering_array_on_graph,
    find_homomorphism,
    graph_from_text,
    graph_to_text,
    max_clique,
    max_independent_set,
    qi2_chain_coloring,
    regularity_and_diameter,
)
from .partitions import (
    ChainDecomposition,
    OneFactorization,
    Partition,
    PartitionError,
    baranyai_factorization,
    count_partitions,
    enumerate_partitions,
    is_qualitatively_independent,
    iter_labels,
    meet_cells,
    meet_value,
    stirling2,
    symmetric_chain_decomposition,
)
from .spectra import (
    EigenMatrix,
    MeetClassPartition,
    MeetTable,
    SchemeVerdict,
    SpectraError,
    Spectrum,
    StreamCapExceeded,
    Surd,
    canonical_form,
    char_poly,
    char_poly_dense,
    check_association_scheme,
    eigenmatrix_from_text,
    eigenmatrix_to_text,
    equitable_partition,
    kneser_eigenvalues,
    kneser_fix_quotient,
    meet_table,
    modified_eigenmatrix,
    quotient_matrix,
    ratio_bounds,
    scheme_quotients,
    simple_split_quotient,
    spectrum,
    spectrum_from_text,
    spectrum_to_text,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
