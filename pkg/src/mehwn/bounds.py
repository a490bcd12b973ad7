"""Closed-form bounds: edge occupancy, component size/diameter series, delay ratios.

All series are evaluated as truncated sums with compensated (exact-rounding)
accumulation.  The size and diameter series converge only for occupation
probability p < 1/3 (the size-bound terms decay like n^(1-(p+1)/(2p)));
above that the truncated value is still reported but flagged, and the
divergence policy decides between flag-and-continue and a hard error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DivergentSeriesError, ParameterError

DEFAULT_KAPPA = 1.7
DEFAULT_LAMBDA_L = 1.44

# Baseline expected-cluster-size approximation and its looser delay-ratio
# upper bound, used for comparison columns in reports.
WANG_SIZE_COEFF = 1.2841
WANG_SIZE_POLE = 2.4886

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class ModelParams:
    """Network model parameters used by the closed-form bounds."""

    lam: float
    g: float
    r0: float = 1.0
    lambda_l: float = DEFAULT_LAMBDA_L
    lambda_i: float | None = None
    kappa: float = DEFAULT_KAPPA

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lam) and self.lam >= 0):
            raise ParameterError(f"density must be finite and non-negative, got {self.lam}")
        if not (math.isfinite(self.g) and 0.0 <= self.g <= 1.0):
            raise ParameterError(f"link probability must be in [0, 1], got {self.g}")
        if not (math.isfinite(self.r0) and self.r0 > 0):
            raise ParameterError(f"range must be positive, got {self.r0}")
        if not (math.isfinite(self.lambda_l) and self.lambda_l > 0):
            raise ParameterError(f"long-term critical density must be positive, got {self.lambda_l}")
        if not (math.isfinite(self.kappa) and self.kappa > 0):
            raise ParameterError(f"kappa must be positive, got {self.kappa}")

    @property
    def q(self) -> float:
        return math.sqrt(self.g)


@dataclass(frozen=True)
class SeriesControl:
    """Truncation and divergence handling for the series bounds."""

    n_max: int
    tail_tol: float = 1e-9
    divergence_policy: str = "warn"

    def __post_init__(self) -> None:
        if self.n_max < 2:
            raise ParameterError(f"n_max must be at least 2, got {self.n_max}")
        if not (math.isfinite(self.tail_tol) and self.tail_tol > 0):
            raise ParameterError(f"tail tolerance must be positive, got {self.tail_tol}")
        if self.divergence_policy not in ("error", "warn"):
            raise ParameterError(
                f"divergence policy must be 'error' or 'warn', got {self.divergence_policy!r}"
            )


@dataclass(frozen=True)
class SeriesValue:
    """A truncated series value with its convergence diagnostics.

    Convergence is decided analytically by the exponent test (p < 1/3);
    ``tail_met`` additionally reports whether the last term fell under the
    configured relative tolerance at this particular truncation.
    """

    value: float
    n_max: int
    tail_met: bool
    divergent: bool

    @property
    def converged(self) -> bool:
        return not self.divergent


def occupation_probability(params: ModelParams) -> float:
    """Probability that a lattice edge's disk contains at least one node.

    Node activity thins the process to intensity lam*sqrt(g); the disk has
    area pi*r0^2/4, so p = 1 - exp(-lam*sqrt(g)*pi*r0^2/4).
    """
    exponent = params.lam * math.sqrt(params.g) * math.pi * params.r0 ** 2 / 4.0
    return -math.expm1(-exponent)


def series_divergent(p: float) -> bool:
    """True when the size/diameter series cannot converge (p >= 1/3).

    The bound terms behave like n^(-(p+1)/(2p)); the size series needs
    that exponent above 2, i.e. p < 1/3.
    """
    return p >= 1.0 / 3.0


def size_prob_upper(n: int, p: float) -> float:
    """Upper bound on the occurrence probability of a size-n component.

    The n = 2 bound is p itself (an occupied, isolated edge); each extra
    vertex multiplies by 2np / (2np + p + 1).  Strictly decreasing in n.
    """
    if n < 2:
        raise ParameterError(f"component size must be at least 2, got {n}")
    if not (0.0 < p < 1.0):
        raise ParameterError(f"occupation probability must be in (0, 1), got {p}")
    value = p
    for k in range(3, n + 1):
        value *= 2 * k * p / (2 * k * p + p + 1)
    return value


def _size_prob_vector(p: float, n_max: int) -> np.ndarray:
    """p-bar values indexed by n: [0]=0, [1]=1 (defined bound), [n>=2] per recurrence."""
    out = np.zeros(n_max + 1, dtype=np.float64)
    out[1] = 1.0
    if p <= 0.0:
        return out
    out[2] = p
    if n_max >= 3:
        k = np.arange(3, n_max + 1, dtype=np.float64)
        ratios = 2 * k * p / (2 * k * p + p + 1)
        out[3:] = p * np.cumprod(ratios)
    return out


def _check_policy(p: float, ctrl: SeriesControl, what: str) -> bool:
    divergent = series_divergent(p)
    if divergent and ctrl.divergence_policy == "error":
        raise DivergentSeriesError(
            f"{what} series diverges for occupation probability p={p:.6g} >= 1/3"
        )
    return divergent


def size_series(p: float, ctrl: SeriesControl) -> SeriesValue:
    """Truncated expected-component-size bound: sum of n * p-bar_n for n <= n_max.

    The n = 1 term uses the only universal bound (1), so the result stays a
    true upper bound of the expected size.
    """
    divergent = _check_policy(p, ctrl, "expected-size")
    pbar = _size_prob_vector(p, ctrl.n_max)
    n = np.arange(ctrl.n_max + 1, dtype=np.float64)
    terms = n * pbar
    total = math.fsum(terms[1:])
    tail_met = bool(terms[ctrl.n_max] < ctrl.tail_tol * total)
    return SeriesValue(total, ctrl.n_max, tail_met, divergent)


def expected_size_upper(p: float, ctrl: SeriesControl) -> float:
    return size_series(p, ctrl).value


def _log_factorials(m: int) -> np.ndarray:
    """log(a!) for a = 0..m."""
    return np.concatenate([[0.0], np.cumsum(np.log(np.arange(1, m + 1, dtype=np.float64)))])


def diameter_prob_upper(n: int, k: int) -> float:
    """Upper bound on the probability that an n-vertex component has diameter k.

    Sum over a = k..n-1 of C(n-1, a) * (1/2)^(n-1) * (1/k)^(a-k), evaluated
    through logarithms so it stays finite for n in the tens of thousands.
    """
    if n < 2:
        raise ParameterError(f"component size must be at least 2, got {n}")
    if not (1 <= k <= n - 1):
        raise ParameterError(f"diameter must be in [1, {n - 1}], got {k}")
    if k == n - 1:
        # Single term a = n-1 with C(n-1, n-1) = 1.
        return 0.5 ** (n - 1)
    if k == 1:
        # All (1/k)^(a-k) factors are 1; the binomial sum closes to 1 - 2^(1-n).
        return -math.expm1(-(n - 1) * _LN2)
    lg = _log_factorials(n - 1)
    a = np.arange(k, n)
    log_terms = (
        lg[n - 1] - lg[a] - lg[n - 1 - a]
        - (n - 1) * _LN2
        - (a - k) * math.log(k)
    )
    peak = log_terms.max()
    return float(math.exp(peak) * math.fsum(np.exp(log_terms - peak)))


def expected_diameter_upper(n: int) -> float:
    """Upper bound on the expected diameter of an n-vertex component.

    Zero for a single vertex; otherwise the k-weighted sum of the diameter
    probability bounds over k = 1..n-1.
    """
    if n < 1:
        raise ParameterError(f"component size must be at least 1, got {n}")
    if n == 1:
        return 0.0
    return math.fsum(k * diameter_prob_upper(n, k) for k in range(1, n))


def _tilt_sums(n_max: int) -> np.ndarray:
    """S(a) = sum over k = 1..a of k^(k-a+1), for a = 0..n_max.

    This is the inner double sum of the expected-diameter bound after
    swapping the (k, a) summation order.  Terms fall off at least
    geometrically away from k = a, so each S(a) needs only the trailing
    window plus the constant k = 1 term.
    """
    out = np.zeros(n_max + 1, dtype=np.float64)
    for a in range(1, n_max + 1):
        lo = max(2, a - 60)
        k = np.arange(lo, a + 1, dtype=np.float64)
        # k = 1 contributes exactly 1 for every a; k below the window is < 2^-59 relative.
        out[a] = math.fsum(k ** (k - a + 1)) + 1.0
    return out


def _expected_diameter_upper_many(n_max: int) -> np.ndarray:
    """expected_diameter_upper(n) for all n = 0..n_max via the swapped sum.

    E_D(n) = sum over a = 1..n-1 of C(n-1, a) (1/2)^(n-1) S(a); identical to
    the k-first definition by positivity, but O(n) per n.
    """
    s = _tilt_sums(max(n_max - 1, 1))
    out = np.zeros(n_max + 1, dtype=np.float64)
    lg = _log_factorials(n_max)
    for n in range(2, n_max + 1):
        a = np.arange(1, n)
        logw = lg[n - 1] - lg[a] - lg[n - 1 - a] - (n - 1) * _LN2
        out[n] = float(np.exp(logw) @ s[1:n])
    return out


def diameter_series(p: float, ctrl: SeriesControl) -> SeriesValue:
    """Truncated expected-global-diameter bound: sum of p-bar_n * E_D(n), n >= 2."""
    divergent = _check_policy(p, ctrl, "expected-diameter")
    pbar = _size_prob_vector(p, ctrl.n_max)
    ed = _expected_diameter_upper_many(ctrl.n_max)
    terms = pbar * ed
    total = math.fsum(terms[2:])
    tail_met = bool(terms[ctrl.n_max] < ctrl.tail_tol * total) if total > 0 else True
    return SeriesValue(total, ctrl.n_max, tail_met, divergent)


def expected_global_diameter_upper(p: float, ctrl: SeriesControl) -> float:
    return diameter_series(p, ctrl).value


def gamma_lower(params: ModelParams, ctrl: SeriesControl) -> float:
    """Closed-form lower bound on the delay-to-distance ratio.

    1 / ((E_D + 1) * r0), where E_D is the truncated expected-global-
    diameter bound at the configured occupation probability.
    """
    p = occupation_probability(params)
    ed = diameter_series(p, ctrl).value
    return 1.0 / ((ed + 1.0) * params.r0)


def link_delay_pmf(z: int, g: float) -> float:
    """Probability that a link first succeeds after exactly z failed slots."""
    if z < 0:
        raise ParameterError(f"slot count must be non-negative, got {z}")
    if not (0.0 < g <= 1.0):
        raise ParameterError(f"link probability must be in (0, 1], got {g}")
    return (1.0 - g) ** z * g


def expected_link_delay(g: float) -> float:
    """Mean waiting slots per link: 1/g - 1."""
    if not (0.0 < g <= 1.0):
        raise ParameterError(f"link probability must be in (0, 1], got {g}")
    return 1.0 / g - 1.0


def gamma_upper(params: ModelParams) -> float:
    """Upper bound on the delay-to-distance ratio: kappa * (1/g - 1).

    This is the ratio of the critical-density subnetwork, which dominates
    the denser network's ratio.
    """
    return params.kappa * expected_link_delay(params.g)


def wang_size_approx(lam: float) -> float:
    """Baseline expected-cluster-size approximation with a pole at 2.4886."""
    if not (math.isfinite(lam) and lam >= 0):
        raise ParameterError(f"density must be finite and non-negative, got {lam}")
    if lam >= WANG_SIZE_POLE:
        raise ParameterError(f"size approximation undefined for density >= {WANG_SIZE_POLE}")
    return WANG_SIZE_COEFF * lam / (WANG_SIZE_POLE - lam)


def wang_gamma_upper(params: ModelParams) -> float:
    """Baseline delay-ratio upper bound: kappa * sqrt(lam/lambda_l) * (1/g - 1)."""
    if params.lam < params.lambda_l:
        raise ParameterError(
            f"baseline bound needs density >= lambda_l ({params.lambda_l}), got {params.lam}"
        )
    return params.kappa * math.sqrt(params.lam / params.lambda_l) * expected_link_delay(params.g)


@dataclass(frozen=True)
class BoundsReport:
    """Every closed-form quantity for one parameter point."""

    lam: float
    g: float
    r0: float
    p: float
    p_bar: tuple[float, ...]
    expected_size_upper: float
    expected_diameter_upper: float
    gamma_lower: float
    expected_link_delay: float
    gamma_upper: float | None
    wang_size_approx: float | None
    wang_gamma_upper: float | None
    converged: bool
    size_tail_met: bool
    diameter_tail_met: bool
    divergent: bool
    n_max: int
    notes: tuple[str, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "g": self.g,
            "r0": self.r0,
            "p": self.p,
            "p_bar": list(self.p_bar),
            "E_size_upper": self.expected_size_upper,
            "E_diam_upper": self.expected_diameter_upper,
            "gamma_lower": self.gamma_lower,
            "expected_link_delay": self.expected_link_delay,
            "gamma_upper": self.gamma_upper,
            "wang_size_approx": self.wang_size_approx,
            "wang_gamma_upper": self.wang_gamma_upper,
            "converged_flag": self.converged,
            "size_tail_met": self.size_tail_met,
            "diameter_tail_met": self.diameter_tail_met,
            "divergent": self.divergent,
            "n_max": self.n_max,
            "notes": list(self.notes),
        }


def build_bounds_report(params: ModelParams, ctrl: SeriesControl, p_bar_count: int = 10) -> BoundsReport:
    """Evaluate all bounds for one parameter point.

    Under the 'error' policy a divergent series raises; under 'warn' the
    truncated values are reported with the non-convergence flag set.  The
    baseline columns are omitted (None) below the critical density, where
    they are undefined.
    """
    p = occupation_probability(params)
    if series_divergent(p) and ctrl.divergence_policy == "error":
        raise DivergentSeriesError(
            f"series diverges at lambda={params.lam:.6g}: p={p:.6g} >= 1/3"
        )
    notes: list[str] = []
    size = size_series(p, ctrl)
    diam = diameter_series(p, ctrl)
    if size.divergent:
        notes.append(
            f"size/diameter series diverge (p={p:.6g} >= 1/3); values are truncated sums at n_max={ctrl.n_max}"
        )
    elif not (size.tail_met and diam.tail_met):
        notes.append(
            f"tail term still above tail_tol={ctrl.tail_tol:g} at n_max={ctrl.n_max}; "
            "increase n_max for more digits"
        )
    glower = 1.0 / ((diam.value + 1.0) * params.r0)
    g_upper = gamma_upper(params) if params.g > 0 else None
    if params.lam <= params.lambda_l:
        notes.append(
            f"density {params.lam:.6g} not above lambda_l={params.lambda_l:.6g}; "
            "ratio bounds describe the super-critical regime"
        )
    wang_gamma = wang_gamma_upper(params) if params.lam >= params.lambda_l and params.g > 0 else None
    wang_size = wang_size_approx(params.lam) if params.lam < WANG_SIZE_POLE else None
    if wang_size is None:
        notes.append(f"baseline size approximation undefined at density >= {WANG_SIZE_POLE}")
    pbar_vec = _size_prob_vector(p, max(2, p_bar_count + 1))
    return BoundsReport(
        lam=params.lam,
        g=params.g,
        r0=params.r0,
        p=p,
        p_bar=tuple(float(x) for x in pbar_vec[2:p_bar_count + 2]),
        expected_size_upper=size.value,
        expected_diameter_upper=diam.value,
        gamma_lower=glower,
        expected_link_delay=expected_link_delay(params.g) if params.g > 0 else math.inf,
        gamma_upper=g_upper,
        wang_size_approx=wang_size,
        wang_gamma_upper=wang_gamma,
        converged=size.converged and diam.converged,
        size_tail_met=size.tail_met,
        diameter_tail_met=diam.tail_met,
        divergent=size.divergent,
        n_max=ctrl.n_max,
        notes=tuple(notes),
    )
