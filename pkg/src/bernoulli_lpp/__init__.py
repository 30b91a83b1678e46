"""Bernoulli last-passage percolation: exact gap-penalty regions, the coupled
discrete TASEP, and seeded Monte-Carlo experiments near the soft edge."""

from .env import (
    Alignment,
    BernoulliField,
    Environment,
    IndependentBernoulli,
    WeightGrid,
    Word,
    alignment_env,
    coupled_field,
    format_env,
    gen_bernoulli_env,
    gen_geometric_grid,
    gen_word,
    parse_env,
    read_env,
    write_env,
)
from .lpp import (
    Path,
    PathStats,
    Penalty,
    Step,
    corner_growth_T,
    mgm_stats,
    passage_G,
    path_score,
    path_stats,
    reconstruct_path,
    strategy_S_path,
)
from .parametric import (
    RegionDecomposition,
    brute_force_envelope,
    critical_penalties,
    region_count,
    region_summary,
    totient_region_bound,
)
from .seeds import SeedSpec

__version__ = "0.1.0"

__all__ = [
    "Alignment", "BernoulliField", "Environment", "IndependentBernoulli", "WeightGrid", "Word",
    "alignment_env", "coupled_field", "format_env", "gen_bernoulli_env", "gen_geometric_grid",
    "gen_word", "parse_env", "read_env", "write_env",
    "Path", "PathStats", "Penalty", "Step", "corner_growth_T", "mgm_stats", "passage_G",
    "path_score", "path_stats", "reconstruct_path", "strategy_S_path",
    "RegionDecomposition", "brute_force_envelope", "critical_penalties", "region_count",
    "region_summary", "totient_region_bound", "SeedSpec",
]
