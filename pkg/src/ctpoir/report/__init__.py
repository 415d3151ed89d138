"""Case reports, overlays and benchmark summaries"""

from .analysis import (  # noqa
    AnalysisConfig,
    CaseAnalysis,
    CaseReport,
    FilterMode,
    MaskSource,
    SliceArea,
    analyze_case,
    read_report,
    run_case,
    write_report,
)
from .benchmark import (  # noqa
    BenchmarkCase,
    MetricsSummary,
    evaluate_benchmark,
    load_benchmark,
    read_classifier_csv,
    read_summary,
    write_summary,
)
from .overlays import emit_overlays  # noqa
