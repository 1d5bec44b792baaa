# Models Package
from src.models.errors import (
    LqLiftError,
    InvalidParameterError,
    InvalidConfigError,
    QuadratureDisagreementError,
    AllInfeasibleError,
    NumericalFailureError,
    RankDeficiencyError
)
from src.models.state import (
    ThresholdKind,
    Mode,
    SweepMode,
    SignMode,
    Branch,
    QuadratureScheme,
    SolverKind,
    Command,
    ScalarProblem,
    InnerMaxResult,
    QuadratureSpec,
    LogExpectation,
    SphereExponent,
    LiftParams,
    ExponentValue,
    ConditionValue,
    SearchSettings,
    Q0Params,
    Q0Threshold,
    BetaSolution,
    CurveRequest,
    CurvePoint,
    ExperimentConfig,
    TrialOutcome,
    RecoveryRate,
    RunManifest
)

__all__ = [
    'LqLiftError',
    'InvalidParameterError',
    'InvalidConfigError',
    'QuadratureDisagreementError',
    'AllInfeasibleError',
    'NumericalFailureError',
    'RankDeficiencyError',
    'ThresholdKind',
    'Mode',
    'SweepMode',
    'SignMode',
    'Branch',
    'QuadratureScheme',
    'SolverKind',
    'Command',
    'ScalarProblem',
    'InnerMaxResult',
    'QuadratureSpec',
    'LogExpectation',
    'SphereExponent',
    'LiftParams',
    'ExponentValue',
    'ConditionValue',
    'SearchSettings',
    'Q0Params',
    'Q0Threshold',
    'BetaSolution',
    'CurveRequest',
    'CurvePoint',
    'ExperimentConfig',
    'TrialOutcome',
    'RecoveryRate',
    'RunManifest'
]
