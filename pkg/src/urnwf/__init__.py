"""urnwf: exact, simulated, and limiting behavior of an urn-driven
Wright-Fisher model with indirect selection."""

from .errors import (
    CoverageError,
    DegenerateUrnError,
    DomainError,
    EmptyRegionError,
    InfeasibleSizeError,
)
from .diffusion import (
    PathMoments,
    SdeConfig,
    SdePath,
    em_simulate,
    path_moments,
)
from .limit_analytic import (
    DiffusionCoeffs,
    LimitEval,
    LimitPoint,
    VsEval,
    diffusion_coeffs,
    diffusion_coeffs_grid,
    eval_limit,
    eval_u_tilde,
    eval_vs,
    solve_T,
    solve_T_grid,
    vs_grid,
)
from .season_exact import (
    OracleResult,
    PairProbs,
    QTable,
    ReproProbs,
    SeasonMoments,
    UrnState,
    enumerate_oracle,
    exact_q,
    exact_q_tilde,
    finite_diffs,
    p_black,
    p_white,
    pair_probs,
    repro_probs,
    season_moments_exact,
)
from .season_mc import (
    EstimateWithError,
    RngStream,
    SeasonOutcome,
    TailCheckRow,
    ThirdMomentRow,
    estimate_probs,
    simulate_coupled_batch,
    simulate_coupled_urns,
    simulate_season,
    simulate_seasons,
    tail_check,
    third_moment_check,
)
from .harness import (
    RATE_TARGETS,
    BetaShiftResult,
    ComparisonReport,
    InfinitesimalReport,
    InfinitesimalRow,
    RateTable,
    Region,
    beta_shift_check,
    chain_vs_diffusion,
    infinitesimal_check,
    rate_sweep_q,
)
from .wf_chain import (
    ChainConfig,
    Trajectory,
    chain_final_batch,
    chain_step,
    classical_one_step_samples,
    classical_success_prob,
    classical_wf_step,
    one_step_samples,
    run_chain,
    ztilde_prob,
)

__version__ = "1.0.0"
