"""
Bound and Experiment Data Models
Defines the value types passed between the bound solvers, the simulator and the CLI.
"""

import math
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from src.models.errors import InvalidConfigError, InvalidParameterError


class ThresholdKind(Enum):
    """Recovery notion a threshold refers to"""
    SECTIONAL = "sectional"
    STRONG = "strong"
    WEAK = "weak"


class Mode(Enum):
    """Lifted exponent or its c3 -> 0 corollary"""
    LIFTED = "lifted"
    LIMIT = "limit"


class SweepMode(Enum):
    """Which modes a curve sweep evaluates"""
    LIFTED = "lifted"
    LIMIT = "limit"
    BOTH = "both"

    def modes(self) -> Tuple[Mode, ...]:
        if self is SweepMode.BOTH:
            return (Mode.LIMIT, Mode.LIFTED)
        return (Mode(self.value),)


class SignMode(Enum):
    """Sign of the nu|w|^q term in a scalar problem"""
    PLUS = "plus"
    MINUS = "minus"


class Branch(Enum):
    """Which candidate won a scalar maximization"""
    AT_ZERO = "at_zero"
    INTERIOR_POS = "interior_pos"
    INTERIOR_NEG = "interior_neg"


class QuadratureScheme(Enum):
    """Rule used for Gaussian expectations"""
    GAUSS_HERMITE = "gauss_hermite"
    ADAPTIVE_PANEL = "adaptive_panel"


class SolverKind(Enum):
    """Empirical recovery procedure"""
    L1_LP = "l1_lp"
    IRLS_LQ = "irls_lq"
    NULLSPACE_PROBE = "nullspace_probe"


class Command(Enum):
    """CLI sub-commands"""
    CURVE = "curve"
    Q0 = "q0"
    EMPIRICAL = "empirical"
    SELFTEST = "selftest"


def check_scalar_params(q: float, nu: float, gamma: float):
    """Raise InvalidParameterError unless q in [0, 1], nu >= 0 and gamma > 0."""
    if not 0.0 <= q <= 1.0:
        raise InvalidParameterError(f"q must lie in [0, 1], got {q}")
    if not nu >= 0.0:
        raise InvalidParameterError(f"nu must be nonnegative, got {nu}")
    if not gamma > 0.0:
        raise InvalidParameterError(f"gamma must be positive, got {gamma}")


def round_half_up(x: float) -> int:
    """Conventional rounding used for m = round(alpha n) and k = round(beta n)."""
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class ScalarProblem:
    """One per-coordinate maximization inside an expectation integrand"""
    h_mag: float
    q: float
    nu: float
    gamma: float
    sign_mode: SignMode = SignMode.PLUS
    mu: float = 0.0

    def __post_init__(self):
        check_scalar_params(self.q, self.nu, self.gamma)
        if self.mu < 0.0:
            raise InvalidParameterError(f"mu must be nonnegative, got {self.mu}")
        if self.h_mag < 0.0 and self.mu == 0.0:
            raise InvalidParameterError("signed h is only admitted for the weak on-support case (mu > 0)")


@dataclass(frozen=True)
class InnerMaxResult:
    """Maximizer and maximum of a scalar problem"""
    w_star: float
    value: float
    branch: Branch
    sign_b: Optional[int] = None  # strong case only


@dataclass(frozen=True)
class QuadratureSpec:
    """Resolution and rule for Gaussian expectations"""
    node_count: int = 256
    scheme: QuadratureScheme = QuadratureScheme.ADAPTIVE_PANEL
    tail_cut: float = 10.0
    check_agreement: bool = False
    agreement_tol: float = 1e-6

    def __post_init__(self):
        if self.node_count < 32:
            raise InvalidParameterError(f"node_count must be >= 32, got {self.node_count}")
        if self.tail_cut < 8.0:
            raise InvalidParameterError(f"tail_cut must be >= 8, got {self.tail_cut}")
        if self.agreement_tol <= 0.0:
            raise InvalidParameterError("agreement_tol must be positive")

    def doubled(self) -> 'QuadratureSpec':
        return replace(self, node_count=2 * self.node_count, check_agreement=False)


@dataclass(frozen=True)
class LogExpectation:
    """log E[e^{c3 M(h)}] with its integrability flag"""
    log_value: float
    finite: bool


@dataclass(frozen=True)
class SphereExponent:
    """Closed-form sphere term and its stationary gamma"""
    gamma_hat: float
    value: float


@dataclass(frozen=True)
class LiftParams:
    """Lifting and dual variables at an optimum (c3 = 0 marks the limit endpoint)"""
    c3: float
    gamma: float
    nu1: float = 0.0
    nu2: float = 0.0
    mu: float = 0.0

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


@dataclass(frozen=True)
class ExponentValue:
    """Minimized exponent I_kind with its argmin"""
    value: float
    argmin: LiftParams
    feasible: bool
    mode: Mode
    converged: bool = True
    evaluations: int = 0


@dataclass(frozen=True)
class ConditionValue:
    """Value of the certification condition; negative certifies the point"""
    value: float
    argmin: Optional[LiftParams]
    mode: Mode
    flags: Tuple[str, ...] = ()

    @property
    def certified(self) -> bool:
        return self.value < 0.0


@dataclass(frozen=True)
class SearchSettings:
    """Knobs of the nested optimization, the c3 / mu searches and the bisection"""
    restarts: int = 5
    max_evals: int = 400
    xatol: float = 1e-6
    fatol: float = 1e-10
    c3_min: float = 1e-3
    c3_max: float = 1e3
    c3_scan_points: int = 25
    c3_golden_tol: float = 1e-3
    mu_min: float = 1e-3
    mu_max: float = 1e3
    mu_scan_points: int = 7
    mu_golden_tol: float = 1e-2
    probe_mu_infinity: bool = True
    include_limit_endpoint: bool = True
    bisection_max_iter: int = 40
    beta_floor: float = 1e-4
    rescan_step: float = 1e-3

    def __post_init__(self):
        if self.restarts < 1 or self.max_evals < 10:
            raise InvalidParameterError("restarts must be >= 1 and max_evals >= 10")
        if not 0.0 < self.c3_min < self.c3_max:
            raise InvalidParameterError(f"invalid c3 range [{self.c3_min}, {self.c3_max}]")
        if not 0.0 < self.mu_min < self.mu_max:
            raise InvalidParameterError(f"invalid mu range [{self.mu_min}, {self.mu_max}]")
        if self.c3_scan_points < 3 or self.mu_scan_points < 3:
            raise InvalidParameterError("coarse scans need at least 3 points")


@dataclass(frozen=True)
class Q0Params:
    """Variables of the q -> 0 closed-form conditions; slack = 1 - 2b"""
    c3: float
    b: float
    nu_g: float
    alpha: float
    beta: float
    slack: Optional[float] = None

    def __post_init__(self):
        if self.slack is None:
            object.__setattr__(self, 'slack', 1.0 - 2.0 * self.b)
        if not self.c3 > 0.0:
            raise InvalidParameterError(f"c3 must be positive, got {self.c3}")
        if not (self.slack > 0.0 and self.b > 0.0):
            raise InvalidParameterError(f"b must lie in (0, 1/2), got b={self.b}, 1-2b={self.slack}")
        if self.nu_g < 0.0:
            raise InvalidParameterError(f"nu_g must be nonnegative, got {self.nu_g}")
        if not (0.0 < self.alpha <= 1.0 and 0.0 <= self.beta < 1.0):
            raise InvalidParameterError(f"alpha={self.alpha}, beta={self.beta} out of range")

    @classmethod
    def from_slack(cls, c3: float, slack: float, nu_g: float, alpha: float, beta: float) -> 'Q0Params':
        return cls(c3=c3, b=0.5 * (1.0 - slack), nu_g=nu_g, alpha=alpha, beta=beta, slack=slack)

    @classmethod
    def large_c3_choice(cls, c3: float, alpha: float, beta: float) -> 'Q0Params':
        """1 - 2b = alpha / c3^2 and nu_g = log(c3^2 / alpha); requires c3^2 > alpha."""
        if c3 * c3 <= alpha:
            raise InvalidParameterError(f"large-c3 choice needs c3^2 > alpha, got c3={c3}")
        return cls.from_slack(c3, alpha / (c3 * c3), math.log(c3 * c3 / alpha), alpha, beta)


@dataclass(frozen=True)
class Q0Threshold:
    """Best certified beta of a q -> 0 closed form"""
    alpha: float
    kind: ThresholdKind
    c3_max: float
    beta: float
    margin: float
    params: Optional[Q0Params]

    def to_dict(self) -> Dict[str, Any]:
        p = self.params
        return {
            'alpha': self.alpha,
            'kind': self.kind.value,
            'c3_max': self.c3_max,
            'beta': self.beta,
            'margin': self.margin,
            'c3_star': p.c3 if p else None,
            'b_star': p.b if p else None,
            'slack_star': p.slack if p else None,
            'nu_g_star': p.nu_g if p else None,
        }


@dataclass
class BetaSolution:
    """Largest certified beta at one (kind, alpha, q, mode)"""
    beta: float
    kind: ThresholdKind
    alpha: float
    q: float
    mode: Mode
    argmin: Optional[LiftParams] = None
    residual_below: Optional[float] = None
    residual_above: Optional[float] = None
    evaluations: int = 0
    flags: List[str] = field(default_factory=list)


@dataclass(frozen=True)
class CurveRequest:
    """One curve sweep over a (q, alpha) grid"""
    kind: ThresholdKind
    q_list: Tuple[float, ...]
    alpha_grid: Tuple[float, ...]
    mode: SweepMode = SweepMode.BOTH
    beta_tol: float = 1e-4
    spec: QuadratureSpec = field(default_factory=QuadratureSpec)
    seed: int = 0
    settings: SearchSettings = field(default_factory=SearchSettings)

    def __post_init__(self):
        if not self.q_list or not self.alpha_grid:
            raise InvalidParameterError("q_list and alpha_grid must be non-empty")
        if any(not 0.0 <= q <= 1.0 for q in self.q_list):
            raise InvalidParameterError(f"q values must lie in [0, 1]: {self.q_list}")
        if any(not 0.0 < a <= 1.0 for a in self.alpha_grid):
            raise InvalidParameterError(f"alpha values must lie in (0, 1]: {self.alpha_grid}")
        if any(b <= a for a, b in zip(self.alpha_grid, self.alpha_grid[1:])):
            raise InvalidParameterError("alpha_grid must be strictly increasing")
        if self.beta_tol < 1e-5:
            raise InvalidParameterError(f"beta_tol must be >= 1e-5, got {self.beta_tol}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            'kind': self.kind.value,
            'q_list': list(self.q_list),
            'alpha_grid': list(self.alpha_grid),
            'mode': self.mode.value,
            'beta_tol': self.beta_tol,
            'spec': {
                'node_count': self.spec.node_count,
                'scheme': self.spec.scheme.value,
                'tail_cut': self.spec.tail_cut,
                'check_agreement': self.spec.check_agreement,
            },
            'seed': self.seed,
            'settings': asdict(self.settings),
        }


CURVE_COLUMNS = [
    'alpha', 'q', 'beta_lifted', 'beta_limit',
    'c3_star', 'gamma_star', 'nu_star', 'mu_star', 'flags',
]


@dataclass
class CurvePoint:
    """One emitted point of a threshold curve"""
    alpha: float
    q: float
    kind: ThresholdKind
    beta_lifted: Optional[float] = None
    beta_limit: Optional[float] = None
    diagnostics: Optional[LiftParams] = None
    residual_below: Optional[float] = None
    residual_above: Optional[float] = None
    flags: List[str] = field(default_factory=list)

    def to_row(self) -> Dict[str, Any]:
        d = self.diagnostics
        return {
            'alpha': self.alpha,
            'q': self.q,
            'beta_lifted': self.beta_lifted,
            'beta_limit': self.beta_limit,
            'c3_star': d.c3 if d else None,
            'gamma_star': d.gamma if d else None,
            'nu_star': d.nu1 if d else None,
            'mu_star': d.mu if d else None,
            'flags': ';'.join(self.flags),
        }


@dataclass(frozen=True)
class ExperimentConfig:
    """One Monte Carlo recovery experiment"""
    n: int
    alpha: float
    beta: float
    q: float = 1.0
    trials: int = 200
    seed: int = 0
    solver: SolverKind = SolverKind.L1_LP
    kind: ThresholdKind = ThresholdKind.WEAK
    restarts: int = 1
    probes: int = 100
    magnitude: str = 'unit'
    recovery_tol: float = 1e-6
    irls_eps0: float = 1.0
    irls_eps_min: float = 1e-12
    irls_max_iter: int = 500

    def __post_init__(self):
        if self.n < 3 or self.trials < 1:
            raise InvalidConfigError(f"need n >= 3 and trials >= 1, got n={self.n}, trials={self.trials}")
        if not 0.0 <= self.q <= 1.0:
            raise InvalidConfigError(f"q must lie in [0, 1], got {self.q}")
        if self.solver is SolverKind.IRLS_LQ and self.q == 0.0:
            raise InvalidConfigError("the IRLS solver needs q > 0")
        if self.magnitude not in ('unit', 'gaussian'):
            raise InvalidConfigError(f"unknown magnitude law '{self.magnitude}'")
        m, k = self.m, self.k
        if not (1 <= k < m < self.n):
            raise InvalidConfigError(
                f"need 1 <= k < m < n, got k={k}, m={m}, n={self.n} "
                f"(alpha={self.alpha}, beta={self.beta})"
            )

    @property
    def m(self) -> int:
        return round_half_up(self.alpha * self.n)

    @property
    def k(self) -> int:
        return round_half_up(self.beta * self.n)


@dataclass(frozen=True)
class TrialOutcome:
    """Result of one recovery trial"""
    trial: int
    recovered: bool
    residual: float
    condition_violated: bool = False
    error: Optional[str] = None


@dataclass(frozen=True)
class RecoveryRate:
    """Aggregated success rate with its binomial interval"""
    alpha: float
    beta: float
    q: float
    n: int
    m: int
    k: int
    trials: int
    successes: int
    discarded: int
    rate: float
    ci_low: float
    ci_high: float
    solver: str
    seed: int
    label: str = ''
    bound_weak_limit: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class RunManifest:
    """Provenance of one CLI run"""
    command: Command
    request: Dict[str, Any]
    version: str
    config_hash: str
    started_at: str = ''
    wall_clock_seconds: float = 0.0
    point_status: List[Dict[str, Any]] = field(default_factory=list)

    def header(self) -> Dict[str, Any]:
        """Deterministic part embedded in every data file."""
        return {
            'command': self.command.value,
            'request': self.request,
            'version': self.version,
            'config_hash': self.config_hash,
        }

    def to_dict(self) -> Dict[str, Any]:
        payload = self.header()
        payload.update({
            'started_at': self.started_at,
            'wall_clock_seconds': self.wall_clock_seconds,
            'point_status': self.point_status,
        })
        return payload
