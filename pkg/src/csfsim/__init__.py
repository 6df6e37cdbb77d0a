"""Monte Carlo baseball seasons and contest-success-function model selection."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    DomainError,
    difference_win_pct,
    expected_wins,
    james_win_pct,
    luck,
    tullock_win_pct,
)
from .estimate import (  # noqa: E402
    ComparisonReport,
    FitOptions,
    FitReport,
    aic,
    compare_models,
    evidence_ratio,
    fit_model,
    gaussian_loglik,
    log_odds,
    ols,
)
from .sim import (  # noqa: E402
    GameResult,
    LeagueConfig,
    Schedule,
    SimDataset,
    TeamParams,
    TeamSeasonLine,
    build_round_robin_schedule,
    derive_stream_seed,
    run_experiment,
    simulate_game,
    simulate_season,
    synthetic_teams,
)
