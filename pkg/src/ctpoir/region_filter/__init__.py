"""Region-level false positive filtering"""

from .regions import (  # noqa
    FilterConfig,
    Patch,
    ScoredRegion,
    extract_candidates,
    filter_regions,
    score_regions,
    write_patches,
)
from .scorers import ConstantScorer, HeuristicScorer, SidecarScorer  # noqa
