"""Secrecy-rate optimization for an IRS-assisted Gaussian MIMO wiretap channel."""

from .channel import (
    ChannelSet,
    Dims,
    LinkDistances,
    RateTriple,
    ScenarioConfig,
    effective_channels,
    generate_channels,
    identity_phases,
    no_irs_phases,
    path_loss_gain,
    power_from_dbm,
    secrecy_rate,
    trial_rng,
)
from .errors import (
    BracketFailure,
    InfeasiblePoint,
    InfeasibleQoS,
    InsufficientPower,
    IrsSecrecyError,
    IterationCap,
    LineSearchStalled,
    NoNullSpace,
    NotPositiveDefinite,
    RankTooHigh,
    SingularSystem,
    ZeroChannel,
)
from .numerics import (
    DuplicationMaps,
    TransmitCovariance,
    duplication_maps,
    log_det_pd,
    max_eigenvalue_herm,
    rank1_eigenvalue,
    water_filling,
    water_filling_capacity,
)
from .phase_mm import MmState, build_mm_state, mm_solve, mm_update, surrogate_value
from .phase_obo import OboElementData, element_data, obo_sweep, optimize_element
from .saddle import (
    BarrierConfig,
    NoiseCov,
    SaddleResult,
    SaddleState,
    barrier_objective,
    kkt_system,
    newton_iterate,
    solve_saddle,
)
from .schemes import (
    AnResult,
    AoConfig,
    AoResult,
    PowerMinResult,
    actual_secrecy_rate,
    an_covariance,
    ao_full_csi,
    ao_power_min,
    min_power_given_q,
)
from .bench import (
    ExperimentSpec,
    TrialRecord,
    default_spec,
    emit_csv,
    parse_csv,
    run_experiment,
)

__all__ = [name for name in dir() if not name.startswith("_")]
