"""Corruption-robust fixed-budget best-arm identification."""

from .core import (
    BanditError,
    BanditInstance,
    HorizonTooShort,
    InvalidInstance,
    InvalidU,
    NonUniqueBest,
    OutOfRange,
    TooFewArms,
    make_instance,
    num_phases,
    pss_schedule,
    sh_schedule,
    two_group_instance,
)
from .engine import (
    BudgetExceeded,
    ProtocolError,
    RangeViolation,
    TrialResult,
    mix_seed,
    replay_check,
    run_trial,
    trial_seeds,
)
from .agents import PSSAgent, SHAgent, UPAgent, make_agent
from .adversaries import (
    CouplingAttack,
    NoopAdversary,
    OneToZeroAttack,
    ScheduleAttack,
    ZeroToOneAttack,
    make_adversary,
    sh_schedule_attack,
)
from .analysis import comparison_table, cps_regime, h2, h2_tilde, pss_guarantee
from .harness import (
    ExperimentConfig,
    ExperimentSummary,
    load_config,
    run_experiment,
    run_sweep,
    wilson_interval,
    write_csv,
)

__version__ = "0.1.0"
