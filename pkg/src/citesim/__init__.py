"""Link-based similarity measures and retrieval evaluation for citation graphs."""

from .errors import ConfigError, DataError
from .graph import (
    CitationGraph,
    GraphStats,
    LoadReport,
    PaperId,
    PaperMeta,
    classify_connector,
    load_graph,
    load_graph_files,
    read_edge_list,
    read_metadata,
)
from .matrix import DENSE_NODE_LIMIT, SimilarityMatrix, read_matrix_csv, write_matrix_csv
from .engine import (
    ITERATIVE_MEASURES,
    MEASURES,
    NORMALIZATIONS,
    IdentityCheck,
    IterationReport,
    MeasureConfig,
    ReductionReport,
    TopKEntry,
    amsler,
    cocitation,
    compute,
    converge,
    coupling,
    crank_jaccard,
    iterate_pairwise,
    iteration_scores,
    na_mask,
    reduction_check,
    top_k,
    write_iteration_csv,
)
from .evaluate import (
    CASE_TAGS,
    CaseRow,
    CaseTable,
    CorpusReport,
    EvalCorpus,
    Histogram,
    PrecisionTable,
    TracePoint,
    case_analysis,
    convergence_trace,
    load_corpus,
    precision_at_m,
    run_benchmark,
    score_histogram,
    write_cases_csv,
    write_histogram_csv,
    write_precision_csv,
    write_trace_csv,
)

__version__ = "0.1.0"

__all__ = [
    "CASE_TAGS",
    "CaseRow",
    "CaseTable",
    "CitationGraph",
    "ConfigError",
    "CorpusReport",
    "DENSE_NODE_LIMIT",
    "DataError",
    "EvalCorpus",
    "GraphStats",
    "Histogram",
    "ITERATIVE_MEASURES",
    "IdentityCheck",
    "IterationReport",
    "LoadReport",
    "MEASURES",
    "MeasureConfig",
    "NORMALIZATIONS",
    "PaperId",
    "PaperMeta",
    "PrecisionTable",
    "ReductionReport",
    "SimilarityMatrix",
    "TopKEntry",
    "TracePoint",
    "amsler",
    "case_analysis",
    "classify_connector",
    "cocitation",
    "compute",
    "converge",
    "convergence_trace",
    "coupling",
    "crank_jaccard",
    "iterate_pairwise",
    "iteration_scores",
    "load_corpus",
    "load_graph",
    "load_graph_files",
    "na_mask",
    "precision_at_m",
    "read_edge_list",
    "read_matrix_csv",
    "read_metadata",
    "reduction_check",
    "run_benchmark",
    "score_histogram",
    "top_k",
    "write_cases_csv",
    "write_histogram_csv",
    "write_iteration_csv",
    "write_matrix_csv",
    "write_precision_csv",
    "write_trace_csv",
]
