"""Nash equilibria and FTRL learning dynamics of three-player matching m-action games."""

from .diagnostics import (
    RegimeLabel,
    classify_trajectory,
    divergence_G,
    g_dot_analytic,
    sync_V,
    v_dot_analytic,
)
from .dynamics import (
    IntegratorConfig,
    LearnerState,
    Mode,
    Regularizer,
    Trajectory,
    conjugate_value,
    mirror_map,
    simulate,
    simulate_batch,
)
from .equilibrium import RegimeClass, classify_regime, enumerate_equilibria, expand_points
from .game import DerivedParams, GameScores, Profile, derive_params, payoff, payoff_gradient, scores_from_derived
from .verifier import deviation_gain, grid_oracle, is_epsilon_nash, stationarity_check

__version__ = "0.1.0"
