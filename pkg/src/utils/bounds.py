"""
Achievability and converse rate constants for noisy COMP and DD.

The constant-column functions take (alpha, beta, d) in their closed feasible
intervals and return the prefactors c in m = c * k * log(n/k). The optimizers
minimize the largest constant over the free parameters.

Optimization scheme: every constant is monotone in alpha and in beta (and in
zeta for the Bernoulli design), so for a fixed density d the inner minimax
is solved exactly by nested vectorized bisection on the crossing points. The
remaining profile over d is searched on a log-spaced grid and refined with a
multistart zoom search.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Iterable, Optional

import numpy as np
from numpy.typing import ArrayLike

from .errors import DomainError, NoisyGTError, OptimizationError
from .kl_math import ChannelParams, channel_capacity, kl_bernoulli, scaled_kl_limit
from .models import Algorithm, DesignKind
from .optimize import (
    BISECT_ITERS,
    bisect_increasing,
    golden_section,
    local_minima,
    minimax_crossing,
    zoom_minimize,
)

logger = logging.getLogger(__name__)

LOG2 = math.log(2.0)
DOMAIN_TOL = 1e-12
ZETA_RANGE = (1e-2, 1.0 - 1e-3)

ROW_FIELDS = [
    "theta",
    "p",
    "q",
    "design",
    "algorithm",
    "prefactor",
    "rate_bits",
    "alpha",
    "beta",
    "d",
    "z",
    "zeta",
    "binding",
    "status",
    "error",
]


# ── Types ──────────────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class OptimizerSettings:
    """Search ranges and resolution of the bound optimizers."""

    d_min: float = 0.02
    d_max: float = 6.0
    grid_points: int = 200
    starts: int = 3
    bisect_iters: int = BISECT_ITERS
    zoom_points: int = 9
    zoom_tol: float = 1e-9

    def __post_init__(self):
        if not 0 < self.d_min < self.d_max:
            raise DomainError(
                f"Density range must satisfy 0 < d_min < d_max, got "
                f"[{self.d_min}, {self.d_max}]"
            )
        if self.grid_points < 3:
            raise DomainError("The density grid needs at least 3 points")

    @classmethod
    def from_settings(cls, settings: Any) -> "OptimizerSettings":
        return cls(
            d_min=settings.D_MIN,
            d_max=settings.D_MAX,
            grid_points=settings.GRID_POINTS,
        )


@dataclass(frozen=True)
class BoundQuery:
    theta: float
    channel: ChannelParams
    design: DesignKind = DesignKind.CONSTANT_COLUMN
    algorithm: Algorithm = Algorithm.COMP
    k_limit: Optional[float] = None

    def __post_init__(self):
        _check_theta(self.theta)
        object.__setattr__(self, "design", DesignKind(self.design))
        object.__setattr__(self, "algorithm", Algorithm(self.algorithm))


@dataclass(frozen=True)
class BoundResult:
    """
    Optimized prefactor of one bound together with its minimizer.

    ``algorithm`` is an ``Algorithm`` value or one of the reference labels
    ``optimal`` / ``counting``.
    """

    theta: Optional[float]
    channel: ChannelParams
    design: str
    algorithm: str
    prefactor: float
    binding_constraint: str
    d_star: Optional[float] = None
    alpha_star: Optional[float] = None
    beta_star: Optional[float] = None
    z_star: Optional[float] = None
    zeta_star: Optional[float] = None
    constants: dict[str, float] = field(default_factory=dict)

    @property
    def rate_bits(self) -> float:
        return 1.0 / (self.prefactor * LOG2)

    def as_row(self) -> dict[str, Any]:
        return {
            "theta": self.theta,
            "p": self.channel.raw_p,
            "q": self.channel.raw_q,
            "design": self.design,
            "algorithm": self.algorithm,
            "prefactor": self.prefactor,
            "rate_bits": self.rate_bits,
            "alpha": self.alpha_star,
            "beta": self.beta_star,
            "d": self.d_star,
            "z": self.z_star,
            "zeta": self.zeta_star,
            "binding": self.binding_constraint,
            "status": "ok",
            "error": "",
        }


def error_row(
    theta: Optional[float], p: float, q: float, design: str, algorithm: str, message: str
) -> dict[str, Any]:
    """Table row standing in for a bound that could not be computed."""
    row = dict.fromkeys(ROW_FIELDS)
    row.update(
        theta=theta,
        p=p,
        q=q,
        design=design,
        algorithm=algorithm,
        status="error",
        error=message,
    )
    return row


# ── Validation ─────────────────────────────────────────────────────────────────


def _check_theta(theta: float) -> None:
    if not 0.0 < theta < 1.0:
        raise DomainError(f"theta must lie in (0, 1), got {theta}")


def _check_positive_d(d: ArrayLike) -> None:
    if np.any(np.asarray(d, dtype=float) <= 0):
        raise DomainError("d must be positive")


def _check_interval(name: str, value: ArrayLike, lo: ArrayLike, hi: ArrayLike) -> np.ndarray:
    value = np.asarray(value, dtype=float)
    if np.any(value < np.asarray(lo) - DOMAIN_TOL) or np.any(value > np.asarray(hi) + DOMAIN_TOL):
        raise DomainError(f"{name}={value} outside its feasible interval [{lo}, {hi}]")
    return np.clip(value, lo, hi)


# ── Shared geometry ────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class _Geometry:
    """Per-density quantities shared by every constant."""

    d: np.ndarray
    e: np.ndarray  # e^{-d}: fraction of truly negative tests
    upper: np.ndarray  # e^{-d}(1-p) + (1-e^{-d})q: right end of the alpha range
    w: np.ndarray  # e^{-d}p + (1-e^{-d})(1-q)
    s: np.ndarray  # e^{-d}p / w
    beta_hi: np.ndarray  # e^{-d}(1-q)
    beta_lo_ber: np.ndarray  # e^{-d}p


def _geometry(d: ArrayLike, ch: ChannelParams) -> _Geometry:
    d = np.asarray(d, dtype=float)
    e = np.exp(-d)
    one_minus_e = -np.expm1(-d)
    w = e * ch.p + one_minus_e * (1.0 - ch.q)
    return _Geometry(
        d=d,
        e=e,
        upper=e * (1.0 - ch.p) + one_minus_e * ch.q,
        w=w,
        s=e * ch.p / w,
        beta_hi=e * (1.0 - ch.q),
        beta_lo_ber=e * ch.p,
    )


def _ratio(numerator: ArrayLike, exponent: ArrayLike) -> np.ndarray:
    """numerator / exponent with 1/0 = inf and 1/inf = 0."""
    exponent = np.maximum(np.asarray(exponent, dtype=float), 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.asarray(numerator, dtype=float) / exponent


def _kl(r: ArrayLike, s: ArrayLike) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.asarray(kl_bernoulli(r, s), dtype=float)


def _as_output(values: dict[str, np.ndarray]) -> dict[str, Any]:
    return {
        key: float(value) if np.ndim(value) == 0 else value
        for key, value in values.items()
    }


# ── Constant-column COMP ───────────────────────────────────────────────────────


def _comp_terms(alpha: np.ndarray, g: _Geometry, theta: float, ch: ChannelParams) -> dict:
    return {
        "b1": _ratio(theta / (1.0 - theta), g.d * _kl(alpha, ch.q)),
        "b2": _ratio(1.0 / (1.0 - theta), g.d * _kl(alpha, g.upper)),
    }


def comp_constants(alpha: ArrayLike, d: ArrayLike, theta: float, ch: ChannelParams) -> dict:
    """
    Noisy COMP constants under the constant-column design.

    Args:
        alpha: Threshold fraction in [q, e^{-d}(1-p) + (1-e^{-d})q].
        d: Test density.
        theta: Sparsity exponent in (0, 1).
        ch: Normalized channel.

    Returns:
        Dict with ``b1`` (infected items pass the threshold) and ``b2``
        (healthy items fall below it).
    """
    _check_theta(theta)
    _check_positive_d(d)
    g = _geometry(d, ch)
    alpha = _check_interval("alpha", alpha, ch.q, g.upper)
    return _as_output(_comp_terms(alpha, g, theta, ch))


def _comp_solve(d: np.ndarray, theta: float, ch: ChannelParams, iters: int) -> dict:
    g = _geometry(d, ch)

    def evaluate(alpha):
        terms = _comp_terms(alpha, g, theta, ch)
        return terms["b2"], terms["b1"]

    alpha, value = minimax_crossing(evaluate, np.full_like(g.d, ch.q), g.upper, iters)
    return {"value": value, "alpha": alpha}


# ── Constant-column DD ─────────────────────────────────────────────────────────


def _dd_divergence(z: np.ndarray, beta: np.ndarray, g: _Geometry) -> np.ndarray:
    """KL(z||w) + 1{beta > z s} z KL(beta/z || s)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        solo = np.where(beta > z * g.s, z * _kl(beta / z, g.s), 0.0)
    return _kl(z, g.w) + solo


def _dd_z_opt(beta: np.ndarray, g: _Geometry, iters: int) -> np.ndarray:
    """
    Unconstrained minimizer over z in (0, 1] of the convex c4 exponent.

    The minimizer over [1-alpha, 1] is its projection onto that interval.
    """
    beta = np.asarray(beta, dtype=float)
    active = beta > g.w * g.s
    with np.errstate(divide="ignore", invalid="ignore"):
        lo = np.maximum(g.w, beta)
        hi = np.minimum(1.0, np.where(g.s > 0, beta / g.s, np.inf))

        def slope(z):
            tilt = np.log(z) - np.log1p(-z) - np.log(g.w) + np.log1p(-g.w)
            solo = np.where(beta > z * g.s, np.log1p(-beta / z) - np.log1p(-g.s), 0.0)
            return tilt + solo

        root = bisect_increasing(slope, lo, np.where(active, hi, lo), iters)
    return np.where(active, root, g.w)


def _dd_terms(
    alpha: np.ndarray,
    beta: np.ndarray,
    g: _Geometry,
    theta: float,
    ch: ChannelParams,
    z0: np.ndarray,
) -> dict:
    z = np.clip(z0, 1.0 - alpha, 1.0)
    ratio = theta / (1.0 - theta)
    return {
        "c1": _ratio(ratio, g.d * _kl(alpha, ch.q)),
        "c2": _ratio(1.0, g.d * _kl(alpha, g.upper)),
        "c3": _ratio(ratio, g.d * _kl(beta, g.beta_hi)),
        "c4": _ratio(1.0 / (1.0 - theta), g.d * _dd_divergence(z, beta, g)),
        "z_star": z,
    }


def dd_constants(
    alpha: ArrayLike,
    beta: ArrayLike,
    d: ArrayLike,
    theta: float,
    ch: ChannelParams,
    iters: int = BISECT_ITERS,
) -> dict:
    """
    Noisy DD constants under the constant-column design.

    Args:
        alpha: Stage-one threshold fraction in [q, e^{-d}(1-p) + (1-e^{-d})q].
        beta: Stage-two threshold fraction in [0, e^{-d}(1-q)].
        d: Test density.
        theta: Sparsity exponent in (0, 1).
        ch: Normalized channel.
        iters: Bisection steps for the inner maximization over z.

    Returns:
        Dict with ``c1`` .. ``c4`` and ``z_star``, the z in [1-alpha, 1]
        attaining the maximum inside ``c4``.
    """
    _check_theta(theta)
    _check_positive_d(d)
    g = _geometry(d, ch)
    alpha = _check_interval("alpha", alpha, ch.q, g.upper)
    beta = _check_interval("beta", beta, 0.0, g.beta_hi)
    z0 = _dd_z_opt(beta, g, iters)
    return _as_output(_dd_terms(alpha, beta, g, theta, ch, z0))


def _dd_solve(d: np.ndarray, theta: float, ch: ChannelParams, iters: int) -> dict:
    g = _geometry(d, ch)
    ratio = theta / (1.0 - theta)
    alpha_lo = np.full_like(g.d, ch.q)

    def best_alpha(beta):
        z0 = _dd_z_opt(beta, g, iters)

        def evaluate(alpha):
            terms = _dd_terms(alpha, beta, g, theta, ch, z0)
            return np.maximum(terms["c2"], terms["c4"]), terms["c1"]

        return minimax_crossing(evaluate, alpha_lo, g.upper, iters)

    def evaluate(beta):
        c3 = _ratio(ratio, g.d * _kl(beta, g.beta_hi))
        return c3, best_alpha(beta)[1]

    beta, value = minimax_crossing(evaluate, np.zeros_like(g.d), g.beta_hi, iters)
    alpha, _ = best_alpha(beta)
    return {"value": value, "alpha": alpha, "beta": beta}


# ── Bernoulli design ───────────────────────────────────────────────────────────


def _bernoulli_exponent(
    x: np.ndarray, y: np.ndarray, d: np.ndarray, k_limit: Optional[float]
) -> np.ndarray:
    """k KL(xd/k || yd/k), or its large-k limit d (KL(x||y) + v(x, y))."""
    with np.errstate(divide="ignore", invalid="ignore"):
        if k_limit is None or math.isinf(k_limit):
            return np.asarray(scaled_kl_limit(x, y, d), dtype=float)
        return k_limit * _kl(x * d / k_limit, y * d / k_limit)


def _check_k_limit(k_limit: Optional[float], d: ArrayLike) -> None:
    if k_limit is None or math.isinf(k_limit):
        return
    if k_limit <= 0 or np.any(np.asarray(d) > k_limit):
        raise DomainError(f"k={k_limit} must be positive and at least the density d")


def _bernoulli_comp_terms(alpha, g: _Geometry, theta, ch, k_limit) -> dict:
    return {
        "b1": _ratio(theta / (1.0 - theta), _bernoulli_exponent(alpha, ch.q, g.d, k_limit)),
        "b2": _ratio(1.0 / (1.0 - theta), _bernoulli_exponent(alpha, g.upper, g.d, k_limit)),
    }


def bernoulli_comp_constants(
    alpha: ArrayLike,
    d: ArrayLike,
    theta: float,
    ch: ChannelParams,
    k_limit: Optional[float] = None,
) -> dict:
    """
    Noisy COMP constants under the Bernoulli design.

    ``k_limit=None`` (or ``inf``) evaluates the large-k limit of
    k KL(xd/k || yd/k); a finite value evaluates it exactly at that k.
    """
    _check_theta(theta)
    _check_positive_d(d)
    _check_k_limit(k_limit, d)
    g = _geometry(d, ch)
    alpha = _check_interval("alpha", alpha, ch.q, g.upper)
    return _as_output(_bernoulli_comp_terms(alpha, g, theta, ch, k_limit))


def _bernoulli_dd_terms(alpha, beta, zeta, g: _Geometry, theta, ch, k_limit) -> dict:
    ratio = theta / (1.0 - theta)
    return {
        "c1": _ratio(ratio, _bernoulli_exponent(alpha, ch.q, g.d, k_limit)),
        "c2": _ratio(
            (1.0 - zeta) / (1.0 - theta),
            _bernoulli_exponent(alpha, g.upper, g.d, k_limit),
        ),
        "c3": _ratio(ratio, _bernoulli_exponent(beta, g.beta_hi, g.d, k_limit)),
        "c4": _ratio(
            zeta / (1.0 - theta),
            _bernoulli_exponent(beta, g.beta_lo_ber, g.d, k_limit),
        ),
    }


def bernoulli_dd_constants(
    alpha: ArrayLike,
    beta: ArrayLike,
    d: ArrayLike,
    theta: float,
    zeta: float,
    ch: ChannelParams,
    k_limit: Optional[float] = None,
) -> dict:
    """
    Noisy DD constants under the Bernoulli design.

    Args:
        alpha: Stage-one threshold fraction in [q, e^{-d}(1-p) + (1-e^{-d})q].
        beta: Stage-two threshold fraction in [e^{-d}p, e^{-d}(1-q)].
        d: Test density.
        theta: Sparsity exponent in (0, 1).
        zeta: Split of the healthy-item budget, in (0, theta).
        ch: Normalized channel.
        k_limit: Number of infected items, or None for the large-k limit.

    Returns:
        Dict with ``c1`` .. ``c4``.
    """
    _check_theta(theta)
    _check_positive_d(d)
    _check_k_limit(k_limit, d)
    if not 0.0 < zeta < theta:
        raise DomainError(f"zeta must lie in (0, theta={theta}), got {zeta}")
    g = _geometry(d, ch)
    alpha = _check_interval("alpha", alpha, ch.q, g.upper)
    beta = _check_interval("beta", beta, g.beta_lo_ber, g.beta_hi)
    return _as_output(_bernoulli_dd_terms(alpha, beta, zeta, g, theta, ch, k_limit))


def _bernoulli_comp_solve(d, theta, ch, iters, k_limit) -> dict:
    g = _geometry(d, ch)

    def evaluate(alpha):
        terms = _bernoulli_comp_terms(alpha, g, theta, ch, k_limit)
        return terms["b2"], terms["b1"]

    alpha, value = minimax_crossing(evaluate, np.full_like(g.d, ch.q), g.upper, iters)
    return {"value": value, "alpha": alpha}


def _bernoulli_dd_solve(d, theta, ch, iters, k_limit) -> dict:
    g = _geometry(d, ch)
    ratio = theta / (1.0 - theta)
    alpha_lo = np.full_like(g.d, ch.q)

    def alpha_part(zeta):
        def evaluate(alpha):
            c1 = _ratio(ratio, _bernoulli_exponent(alpha, ch.q, g.d, k_limit))
            c2 = _ratio(
                (1.0 - zeta) / (1.0 - theta),
                _bernoulli_exponent(alpha, g.upper, g.d, k_limit),
            )
            return c2, c1

        return minimax_crossing(evaluate, alpha_lo, g.upper, iters)

    def beta_part(zeta):
        def evaluate(beta):
            c3 = _ratio(ratio, _bernoulli_exponent(beta, g.beta_hi, g.d, k_limit))
            c4 = _ratio(
                zeta / (1.0 - theta),
                _bernoulli_exponent(beta, g.beta_lo_ber, g.d, k_limit),
            )
            return c3, c4

        return minimax_crossing(evaluate, g.beta_lo_ber, g.beta_hi, iters)

    def evaluate(zeta):
        return beta_part(zeta)[1], alpha_part(zeta)[1]

    zeta_lo = np.full_like(g.d, theta * ZETA_RANGE[0])
    zeta_hi = np.full_like(g.d, theta * ZETA_RANGE[1])
    zeta, value = minimax_crossing(evaluate, zeta_lo, zeta_hi, iters)
    alpha, _ = alpha_part(zeta)
    beta, _ = beta_part(zeta)
    return {"value": value, "alpha": alpha, "beta": beta, "zeta": zeta}


# ── Outer search over d ────────────────────────────────────────────────────────


def _search_density(
    solve: Callable[[np.ndarray], dict],
    opts: OptimizerSettings,
    d_cap: Optional[float] = None,
) -> dict[str, float]:
    """
    Minimize a per-density profile over d in [d_min, d_max].

    Returns the solver's details at the optimum plus ``d``.
    """
    d_max = opts.d_max if d_cap is None else min(opts.d_max, d_cap)
    lo, hi = math.log(opts.d_min), math.log(d_max)
    grid = np.linspace(lo, hi, opts.grid_points)
    coarse = solve(np.exp(grid))["value"]

    starts = local_minima(coarse, opts.starts)
    if starts.size == 0:
        raise OptimizationError("Bound objective is infinite on the whole feasible grid")
    logger.debug(f"Density search starts at d={np.exp(grid[starts])}")

    best = zoom_minimize(
        lambda x: solve(np.exp(x))["value"],
        grid[starts],
        lo,
        hi,
        width=grid[1] - grid[0],
        points=opts.zoom_points,
        tol=opts.zoom_tol,
    )
    d_star = math.exp(best.x)
    details = {key: float(value[0]) for key, value in solve(np.array([d_star])).items()}
    if not math.isfinite(details["value"]):
        raise OptimizationError("Bound objective did not reach a finite value")
    details["d"] = d_star
    return details


def _binding(constants: dict[str, float]) -> str:
    labels = [key for key in constants if key != "z_star"]
    return max(labels, key=lambda key: constants[key])


def _log_result(result: BoundResult) -> BoundResult:
    logger.info(
        f"{result.design}/{result.algorithm} theta={result.theta} "
        f"p={result.channel.p:g} q={result.channel.q:g}: "
        f"c={result.prefactor:.6g} (binding {result.binding_constraint})"
    )
    return result


# ── Optimizers ─────────────────────────────────────────────────────────────────


def optimize_comp(query: BoundQuery, opts: Optional[OptimizerSettings] = None) -> BoundResult:
    """Minimize max{b1, b2} over (alpha, d) for the constant-column design."""
    opts = opts or OptimizerSettings()
    theta, ch = query.theta, query.channel
    best = _search_density(lambda d: _comp_solve(d, theta, ch, opts.bisect_iters), opts)
    constants = comp_constants(best["alpha"], best["d"], theta, ch)
    return _log_result(
        BoundResult(
            theta=theta,
            channel=ch,
            design=DesignKind.CONSTANT_COLUMN.value,
            algorithm=Algorithm.COMP.value,
            prefactor=best["value"],
            binding_constraint=_binding(constants),
            d_star=best["d"],
            alpha_star=best["alpha"],
            constants=constants,
        )
    )


def optimize_dd(query: BoundQuery, opts: Optional[OptimizerSettings] = None) -> BoundResult:
    """Minimize max{c1, c2, c3, c4} over (alpha, beta, d) for the constant-column design."""
    opts = opts or OptimizerSettings()
    theta, ch = query.theta, query.channel
    best = _search_density(lambda d: _dd_solve(d, theta, ch, opts.bisect_iters), opts)
    constants = dd_constants(best["alpha"], best["beta"], best["d"], theta, ch, opts.bisect_iters)
    return _log_result(
        BoundResult(
            theta=theta,
            channel=ch,
            design=DesignKind.CONSTANT_COLUMN.value,
            algorithm=Algorithm.DD.value,
            prefactor=best["value"],
            binding_constraint=_binding(constants),
            d_star=best["d"],
            alpha_star=best["alpha"],
            beta_star=best["beta"],
            z_star=constants["z_star"],
            constants=constants,
        )
    )


def optimize_bernoulli_comp(
    query: BoundQuery, opts: Optional[OptimizerSettings] = None
) -> BoundResult:
    """Minimize the Bernoulli-design COMP constants over (alpha, d)."""
    opts = opts or OptimizerSettings()
    theta, ch, k = query.theta, query.channel, query.k_limit
    best = _search_density(
        lambda d: _bernoulli_comp_solve(d, theta, ch, opts.bisect_iters, k), opts, k
    )
    constants = bernoulli_comp_constants(best["alpha"], best["d"], theta, ch, k)
    return _log_result(
        BoundResult(
            theta=theta,
            channel=ch,
            design=DesignKind.BERNOULLI.value,
            algorithm=Algorithm.COMP.value,
            prefactor=best["value"],
            binding_constraint=_binding(constants),
            d_star=best["d"],
            alpha_star=best["alpha"],
            constants=constants,
        )
    )


def optimize_bernoulli_dd(
    query: BoundQuery, opts: Optional[OptimizerSettings] = None
) -> BoundResult:
    """Minimize the Bernoulli-design DD constants over (alpha, beta, d, zeta)."""
    opts = opts or OptimizerSettings()
    theta, ch, k = query.theta, query.channel, query.k_limit
    best = _search_density(
        lambda d: _bernoulli_dd_solve(d, theta, ch, opts.bisect_iters, k), opts, k
    )
    constants = bernoulli_dd_constants(
        best["alpha"], best["beta"], best["d"], theta, best["zeta"], ch, k
    )
    return _log_result(
        BoundResult(
            theta=theta,
            channel=ch,
            design=DesignKind.BERNOULLI.value,
            algorithm=Algorithm.DD.value,
            prefactor=best["value"],
            binding_constraint=_binding(constants),
            d_star=best["d"],
            alpha_star=best["alpha"],
            beta_star=best["beta"],
            zeta_star=best["zeta"],
            constants=constants,
        )
    )


def converse_constant(ch: ChannelParams, theta: Optional[float] = None) -> BoundResult:
    """Counting bound 1 / C with C the channel capacity in nats."""
    capacity = channel_capacity(ch)
    return BoundResult(
        theta=theta,
        channel=ch,
        design="any",
        algorithm=Algorithm.CONVERSE.value,
        prefactor=1.0 / capacity.capacity_nats,
        binding_constraint="converse",
        d_star=capacity.d_heuristic,
    )


def solve_bound(query: BoundQuery, opts: Optional[OptimizerSettings] = None) -> BoundResult:
    """Dispatch a query to the optimizer of its design and algorithm."""
    if query.algorithm is Algorithm.CONVERSE:
        return converse_constant(query.channel, query.theta)
    if query.design is DesignKind.BERNOULLI:
        if query.algorithm is Algorithm.COMP:
            return optimize_bernoulli_comp(query, opts)
        return optimize_bernoulli_dd(query, opts)
    if query.algorithm is Algorithm.COMP:
        return optimize_comp(query, opts)
    return optimize_dd(query, opts)


def rate_sweep(
    template: BoundQuery,
    theta_grid: Iterable[float],
    opts: Optional[OptimizerSettings] = None,
) -> list[dict[str, Any]]:
    """
    One table row per theta for the template's design and algorithm.

    Failures are kept as rows with ``status="error"``.
    """
    return [bound_row(replace(template, theta=float(theta)), opts) for theta in theta_grid]


def bound_row(query: BoundQuery, opts: Optional[OptimizerSettings] = None) -> dict[str, Any]:
    """Solve one query as a table row; failures become ``status="error"`` rows."""
    try:
        return solve_bound(query, opts).as_row()
    except NoisyGTError as exc:
        logger.warning(
            f"{query.algorithm.value} bound failed at theta={query.theta}, "
            f"p={query.channel.raw_p}, q={query.channel.raw_q}: {exc}"
        )
        return error_row(
            query.theta,
            query.channel.raw_p,
            query.channel.raw_q,
            query.design.value,
            query.algorithm.value,
            str(exc),
        )


# ── Reference curves and reduced forms ─────────────────────────────────────────


def counting_constant() -> float:
    """Noiseless counting bound 1 / log 2."""
    return 1.0 / LOG2


def noiseless_optimal_constant(theta: float) -> float:
    """Best known noiseless non-adaptive prefactor max{theta/((1-theta) log^2 2), 1/log 2}."""
    _check_theta(theta)
    return max(theta / ((1.0 - theta) * LOG2**2), counting_constant())


def reference_result(theta: float, ch: ChannelParams, label: str) -> BoundResult:
    """Reference row ``optimal`` or ``counting`` for bound tables."""
    if label == "optimal":
        value = noiseless_optimal_constant(theta)
    elif label == "counting":
        value = counting_constant()
    else:
        raise DomainError(f"Unknown reference curve: {label}")
    return BoundResult(
        theta=theta,
        channel=ch,
        design="any",
        algorithm=label,
        prefactor=value,
        binding_constraint=label,
    )


def special_channel_constant(
    theta: float,
    ch: ChannelParams,
    algorithm: Algorithm,
    opts: Optional[OptimizerSettings] = None,
) -> float:
    """
    Reduced-form constant-column prefactor for the noiseless, Z and reverse-Z channels.

    These forms drop the parameters that the channel pins to a boundary
    (alpha = 1/Delta on the reverse Z channel, beta = 1/Delta on the Z
    channel) and serve as consistency checks for the general optimizers.

    Raises:
        DomainError: If the channel and algorithm have no reduced form.
    """
    _check_theta(theta)
    algorithm = Algorithm(algorithm)
    opts = opts or OptimizerSettings()
    kind = ch.kind
    ratio = theta / (1.0 - theta)

    if kind == "noiseless":
        if algorithm is Algorithm.COMP:
            return 1.0 / ((1.0 - theta) * LOG2**2)
        if algorithm is Algorithm.DD:
            return max(1.0, ratio) / LOG2**2

    if kind == "reverse-Z" and algorithm is Algorithm.COMP:
        def profile(log_d: float) -> float:
            d = math.exp(log_d)
            return float(_ratio(1.0, -d * math.log1p(-math.exp(-d) * (1.0 - ch.p))))

        best = golden_section(profile, math.log(opts.d_min), math.log(opts.d_max))
        return best.minimum / (1.0 - theta)

    if kind == "Z" and algorithm is Algorithm.DD:
        def solve(d):
            g = _geometry(d, ch)
            c3 = _ratio(ratio, -g.d * np.log1p(-g.beta_hi))

            def evaluate(alpha):
                c1 = _ratio(ratio, g.d * _kl(alpha, ch.q))
                c2 = _ratio(1.0, g.d * _kl(alpha, g.upper))
                return c2, c1

            _, value = minimax_crossing(
                evaluate, np.full_like(g.d, ch.q), g.upper, opts.bisect_iters
            )
            return {"value": np.maximum(value, c3)}

        return _search_density(solve, opts)["value"]

    if kind == "reverse-Z" and algorithm is Algorithm.DD:
        def solve(d):
            g = _geometry(d, ch)
            negatives = -g.d * np.log1p(-g.e * (1.0 - ch.p))
            c2 = _ratio(1.0, negatives)

            def evaluate(beta):
                c3 = _ratio(ratio, g.d * _kl(beta, g.e))
                solo = np.where(beta > g.s, _kl(beta, g.s), 0.0)
                c4 = _ratio(1.0 / (1.0 - theta), negatives + g.d * solo)
                return c3, c4

            _, value = minimax_crossing(evaluate, np.zeros_like(g.d), g.e, opts.bisect_iters)
            return {"value": np.maximum(c2, value)}

        return _search_density(solve, opts)["value"]

    raise DomainError(f"No reduced form for {algorithm.value} on the {kind} channel")
