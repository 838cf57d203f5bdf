"""
Information-theoretic primitives for the p-q noise channel.

All logarithms are natural; rates in bits are derived only when results are
presented. Every function accepts scalars or numpy arrays and broadcasts.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike
from scipy.special import entr, expit, kl_div, rel_entr
from scipy.stats import binom

from .errors import DomainError

logger = logging.getLogger(__name__)

IDENTITY_TOL = 1e-12


def _out(value: np.ndarray) -> float | np.ndarray:
    """Return plain floats for 0-d results, arrays otherwise."""
    if np.ndim(value) == 0:
        return float(value)
    return value


# ── Channel ────────────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class ChannelParams:
    """
    Flip probabilities of the p-q channel.

    ``p`` is the probability that a truly negative test displays positive and
    ``q`` the probability that a truly positive test displays negative. Inputs
    with p+q>1 are normalized once, here, to (1-p, 1-q); ``flipped`` records
    that displayed outcomes must be inverted before decoding.
    """

    p: float
    q: float
    flipped: bool = False

    def __post_init__(self):
        p, q = float(self.p), float(self.q)
        if not (0.0 <= p <= 1.0 and 0.0 <= q <= 1.0):
            raise DomainError(f"Flip probabilities must lie in [0,1], got p={p}, q={q}")
        if math.isclose(p + q, 1.0, rel_tol=0.0, abs_tol=IDENTITY_TOL):
            raise DomainError(
                "p + q = 1: test outcomes are independent of the inputs"
            )
        flipped = self.flipped
        if p + q > 1.0:
            p, q = 1.0 - p, 1.0 - q
            flipped = not flipped
            logger.info(f"Normalized channel to p={p:g}, q={q:g} (outputs flipped)")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "flipped", flipped)

    @property
    def raw_p(self) -> float:
        """False-positive rate of the physical channel, before normalization."""
        return 1.0 - self.p if self.flipped else self.p

    @property
    def raw_q(self) -> float:
        """False-negative rate of the physical channel, before normalization."""
        return 1.0 - self.q if self.flipped else self.q

    @property
    def kind(self) -> str:
        if self.p == 0.0 and self.q == 0.0:
            return "noiseless"
        if self.p == 0.0:
            return "Z"
        if self.q == 0.0:
            return "reverse-Z"
        if self.p == self.q:
            return "BSC"
        return "general"


@dataclass(frozen=True)
class CapacityResult:
    """Shannon capacity of the p-q channel and the associated signalling."""

    capacity_nats: float
    phi: float
    gamma_star: float
    d_heuristic: float
    capacity_alt_nats: float

    @property
    def capacity_bits(self) -> float:
        return self.capacity_nats / math.log(2)


# ── Scalar primitives ──────────────────────────────────────────────────────────


def kl_bernoulli(r: ArrayLike, s: ArrayLike) -> float | np.ndarray:
    """
    Bernoulli relative entropy KL(r || s) in nats.

    Boundary values follow continuity: 0 log 0 = 0, and the result is ``inf``
    when s is 0 or 1 and r differs from s.
    """
    r = np.asarray(r, dtype=float)
    s = np.asarray(s, dtype=float)
    return _out(rel_entr(r, s) + rel_entr(1.0 - r, 1.0 - s))


def binary_entropy(r: ArrayLike) -> float | np.ndarray:
    """Binary entropy h(r) in nats, with h(0) = h(1) = 0."""
    r = np.asarray(r, dtype=float)
    return _out(entr(r) + entr(1.0 - r))


def kl_correction_v(x: ArrayLike, y: ArrayLike) -> float | np.ndarray:
    """
    Finite-k correction v(x, y) = y - x + (1-x) log((1-y)/(1-x)).

    The value is never positive. Both arguments must lie strictly in (0, 1).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any((x <= 0) | (x >= 1) | (y <= 0) | (y >= 1)):
        raise DomainError("kl_correction_v requires x, y in (0, 1)")
    return _out(y - x + (1.0 - x) * (np.log1p(-y) - np.log1p(-x)))


def scaled_kl(k: int, x: ArrayLike, y: ArrayLike, d: ArrayLike) -> float | np.ndarray:
    """
    Exact k * KL(xd/k || yd/k).

    Evaluated with ``log1p`` so that the tiny per-test probabilities of large
    k keep full precision.
    """
    if k <= 0:
        raise DomainError(f"k must be positive, got {k}")
    a = np.asarray(x, dtype=float) * np.asarray(d, dtype=float) / k
    b = np.asarray(y, dtype=float) * np.asarray(d, dtype=float) / k
    if np.any((a <= 0) | (a >= 1) | (b <= 0) | (b >= 1)):
        raise DomainError("scaled_kl requires xd/k and yd/k in (0, 1)")
    value = a * np.log(a / b) + (1.0 - a) * (np.log1p(-a) - np.log1p(-b))
    return _out(k * value)


def scaled_kl_limit(x: ArrayLike, y: ArrayLike, d: ArrayLike) -> float | np.ndarray:
    """
    Large-k limit d * (KL(x||y) + v(x, y)) = d * (x log(x/y) - x + y).

    Extended by continuity to x = 0 (value d*y) and y = 0 (value inf for x > 0).
    """
    d = np.asarray(d, dtype=float)
    return _out(d * kl_div(np.asarray(x, dtype=float), np.asarray(y, dtype=float)))


def mutual_information(gamma: ArrayLike, ch: ChannelParams) -> float | np.ndarray:
    """I(X;Y) of the p-q channel when P(X=0) = gamma."""
    gamma = np.asarray(gamma, dtype=float)
    t = (1.0 - ch.p) * gamma + ch.q * (1.0 - gamma)
    return _out(
        binary_entropy(t)
        - (gamma * binary_entropy(ch.p) + (1.0 - gamma) * binary_entropy(ch.q))
    )


def channel_capacity(ch: ChannelParams) -> CapacityResult:
    """
    Capacity of the p-q channel, its optimal input law and the density heuristic.

    Returns phi = (h(p) - h(q)) / (1-p-q), C = KL(q || 1/(1+e^phi)), the
    capacity-achieving P(X=0) and d_ch = log(1-p-q) - log(1/(1+e^phi) - q).
    """
    gap = 1.0 - ch.p - ch.q
    if gap <= 0:
        raise DomainError(f"Capacity requires p + q < 1, got p={ch.p}, q={ch.q}")

    phi = (binary_entropy(ch.p) - binary_entropy(ch.q)) / gap
    t_star = float(expit(-phi))
    capacity = kl_bernoulli(ch.q, t_star)
    capacity_alt = kl_bernoulli(ch.p, float(expit(phi)))
    gamma_star = (t_star - ch.q) / gap
    d_heuristic = math.log(gap) - math.log(t_star - ch.q)

    logger.debug(
        f"Capacity p={ch.p:g} q={ch.q:g}: C={capacity:.12g} nats, "
        f"gamma*={gamma_star:.6g}, d_ch={d_heuristic:.6g}"
    )
    return CapacityResult(
        capacity_nats=capacity,
        phi=phi,
        gamma_star=gamma_star,
        d_heuristic=d_heuristic,
        capacity_alt_nats=capacity_alt,
    )


# ── Chernoff helpers ───────────────────────────────────────────────────────────


def chernoff_exponent(delta: int, alpha: float, q: float) -> float:
    """Chernoff estimate exp(-delta * KL(alpha || q)) of a binomial tail."""
    return math.exp(-delta * kl_bernoulli(alpha, q))


def binomial_upper_tail(delta: int, q: float, alpha: float) -> float:
    """Exact P(Bin(delta, q) >= ceil(alpha * delta))."""
    threshold = math.ceil(alpha * delta - 1e-9)
    return float(binom.sf(threshold - 1, delta, q))
