"""Sequential unsharp measurements and the sharing of tripartite nonlocality."""

from .measure import BlochDirection, Sharpness, effect, luders_update, observable, projector, sqrt_effect
from .protocol import (
    Charlie,
    InequalityReport,
    InitialState,
    PartySettings,
    ScenarioConfig,
    analytic_chain,
    avg_correlation,
    averaged_post_state,
    evaluate,
    joint_probability,
    mermin_value,
    oracle_joint_distribution,
    paper_scenario,
    svetlichny_value,
)
from .search import SearchResult, SearchSpec, max_observers, optimize, sharpness_window, sweep

__version__ = "0.1.0"
