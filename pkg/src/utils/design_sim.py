"""
Pooling designs, infection vectors and the noisy test channel.

Designs are stored as a sparse item-by-test incidence matrix. Every random
draw comes from its own seeded stream (see ``make_rng``) so that the design,
the infected set and the channel noise of a trial are reproducible on their
own.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike
from scipy import sparse
from scipy.special import gammaln

from .errors import ParameterError
from .kl_math import ChannelParams
from .models import DesignKind, Stage

logger = logging.getLogger(__name__)

STREAMS = {"design": 0, "infection": 1, "channel": 2}


def make_rng(seed: int, trial: int = 0, stream: str = "design") -> np.random.Generator:
    """Independent generator for one (seed, trial, stream) triple."""
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(trial, STREAMS[stream])))
    )


# ── Types ──────────────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class PoolingDesign:
    """
    Bipartite item/test design.

    ``incidence`` is an n x m CSR matrix with a 1 where the item joins the
    test. ``delta`` is the exact per-item degree of a constant-column design
    and the nominal expected degree of a Bernoulli design.
    """

    n: int
    m: int
    delta: float
    kind: DesignKind
    seed: int
    incidence: sparse.csr_matrix

    @property
    def item_tests(self) -> list[np.ndarray]:
        """Sorted test indices of every item."""
        ptr, idx = self.incidence.indptr, self.incidence.indices
        return [idx[ptr[i] : ptr[i + 1]] for i in range(self.n)]

    @property
    def test_items(self) -> list[np.ndarray]:
        """Sorted item indices of every test."""
        by_test = self.incidence.T.tocsr()
        by_test.sort_indices()
        ptr, idx = by_test.indptr, by_test.indices
        return [idx[ptr[a] : ptr[a + 1]] for a in range(self.m)]

    @property
    def item_degrees(self) -> np.ndarray:
        return np.diff(self.incidence.indptr)

    @property
    def test_degrees(self) -> np.ndarray:
        return np.asarray(self.incidence.getnnz(axis=0), dtype=np.int64)


@dataclass(frozen=True)
class InfectionVector:
    n: int
    infected: np.ndarray

    @property
    def k(self) -> int:
        return int(self.infected.size)

    @property
    def mask(self) -> np.ndarray:
        mask = np.zeros(self.n, dtype=bool)
        mask[self.infected] = True
        return mask

    @classmethod
    def from_mask(cls, mask: ArrayLike) -> "InfectionVector":
        mask = np.asarray(mask, dtype=bool)
        return cls(n=mask.size, infected=np.flatnonzero(mask))


@dataclass(frozen=True)
class OutcomeVector:
    m: int
    bits: np.ndarray
    stage: Stage


@dataclass(frozen=True)
class TestStatistics:
    """Counts of truly negative/positive tests and how the channel treated them."""

    __test__ = False  # not a pytest class

    m0: int
    m1: int
    m0f: int
    m0u: int
    m1f: int
    m1u: int
    gamma_min: int
    gamma_max: int


@dataclass(frozen=True)
class DesignSizes:
    k: int
    m: int
    delta: int


# ── Design generation ──────────────────────────────────────────────────────────


def incidence_from_pairs(n: int, m: int, rows: np.ndarray, cols: np.ndarray) -> sparse.csr_matrix:
    data = np.ones(rows.size, dtype=np.int8)
    incidence = sparse.csr_matrix((data, (rows, cols)), shape=(n, m))
    incidence.sort_indices()
    return incidence


def constant_column_design(
    n: int, m: int, delta: int, seed: int, trial: int = 0
) -> PoolingDesign:
    """
    Each item joins ``delta`` tests drawn uniformly without replacement.

    Raises:
        ParameterError: If n or m is not positive or delta is outside [1, m].
    """
    if n < 1 or m < 1:
        raise ParameterError(f"Design needs n, m >= 1, got n={n}, m={m}")
    if not 1 <= delta <= m:
        raise ParameterError(f"delta must lie in [1, m={m}], got {delta}")

    rng = make_rng(seed, trial, "design")
    tests = np.sort(rng.integers(0, m, size=(n, delta)), axis=1)
    repeated = np.flatnonzero(np.any(np.diff(tests, axis=1) == 0, axis=1))
    for item in repeated:
        tests[item] = np.sort(rng.choice(m, size=delta, replace=False))

    rows = np.repeat(np.arange(n), delta)
    incidence = incidence_from_pairs(n, m, rows, tests.ravel())
    logger.debug(f"Constant-column design n={n} m={m} delta={delta}: {repeated.size} rows redrawn")
    return PoolingDesign(
        n=n, m=m, delta=delta, kind=DesignKind.CONSTANT_COLUMN, seed=seed, incidence=incidence
    )


def bernoulli_design(n: int, m: int, nu: float, seed: int, trial: int = 0) -> PoolingDesign:
    """
    Each (item, test) pair is included independently with probability ``nu``.

    Inclusion positions are drawn as geometric gaps along the flattened
    n x m grid.

    Raises:
        ParameterError: If nu is outside (0, 1] or n, m are not positive.
    """
    if n < 1 or m < 1:
        raise ParameterError(f"Design needs n, m >= 1, got n={n}, m={m}")
    if not 0.0 < nu <= 1.0:
        raise ParameterError(f"Inclusion probability must lie in (0, 1], got {nu}")

    rng = make_rng(seed, trial, "design")
    total = n * m
    expected = nu * total
    batch = int(expected + 10.0 * math.sqrt(expected) + 16)

    chunks = []
    position = -1
    while position < total - 1:
        gaps = rng.geometric(nu, size=batch)
        steps = position + np.cumsum(gaps)
        chunks.append(steps)
        position = int(steps[-1])
    positions = np.concatenate(chunks)
    positions = positions[positions < total]

    incidence = incidence_from_pairs(n, m, positions // m, positions % m)
    return PoolingDesign(
        n=n, m=m, delta=nu * m, kind=DesignKind.BERNOULLI, seed=seed, incidence=incidence
    )


def sample_infection(n: int, k: int, seed: int, trial: int = 0) -> InfectionVector:
    """Uniformly random set of ``k`` infected items out of ``n``."""
    if not 0 <= k <= n:
        raise ParameterError(f"k must lie in [0, n={n}], got {k}")
    rng = make_rng(seed, trial, "infection")
    return InfectionVector(n=n, infected=np.sort(rng.choice(n, size=k, replace=False)))


# ── Outcomes ───────────────────────────────────────────────────────────────────


def true_outcomes(design: PoolingDesign, sigma: InfectionVector) -> OutcomeVector:
    """A test is truly positive iff its pool contains an infected item."""
    if design.n != sigma.n:
        raise ParameterError(f"Design has {design.n} items, infection vector {sigma.n}")
    hits = design.incidence.T.dot(sigma.mask.astype(np.int64))
    return OutcomeVector(m=design.m, bits=np.asarray(hits).ravel() > 0, stage=Stage.TRUE)


def apply_channel(
    outcomes: OutcomeVector, ch: ChannelParams, seed: int, trial: int = 0
) -> OutcomeVector:
    """
    Send true outcomes through the physical p-q channel.

    Uses the channel's raw flip probabilities, so a normalized channel with
    ``flipped`` set still simulates the original p, q.
    """
    if outcomes.stage is not Stage.TRUE:
        raise ParameterError("apply_channel expects true outcomes")
    rng = make_rng(seed, trial, "channel")
    u = rng.random(outcomes.m)
    flip = np.where(outcomes.bits, u < ch.raw_q, u < ch.raw_p)
    return OutcomeVector(m=outcomes.m, bits=outcomes.bits ^ flip, stage=Stage.DISPLAYED)


def collect_statistics(
    design: PoolingDesign,
    sigma: InfectionVector,
    true_out: OutcomeVector,
    displayed: OutcomeVector,
) -> TestStatistics:
    if not (design.n == sigma.n and design.m == true_out.m == displayed.m):
        raise ParameterError("Design, infection and outcome dimensions disagree")
    truth, shown = true_out.bits, displayed.bits
    m1 = int(truth.sum())
    m0f = int(np.count_nonzero(~truth & shown))
    m1f = int(np.count_nonzero(truth & ~shown))
    gamma = design.test_degrees
    return TestStatistics(
        m0=design.m - m1,
        m1=m1,
        m0f=m0f,
        m0u=design.m - m1 - m0f,
        m1f=m1f,
        m1u=m1 - m1f,
        gamma_min=int(gamma.min()),
        gamma_max=int(gamma.max()),
    )


# ── Per-item counts ────────────────────────────────────────────────────────────


def _as_mask(items: ArrayLike, n: int) -> np.ndarray:
    items = np.asarray(items)
    if items.dtype == bool:
        if items.size != n:
            raise ParameterError(f"Item mask has length {items.size}, expected {n}")
        return items
    mask = np.zeros(n, dtype=bool)
    mask[items.astype(np.int64)] = True
    return mask


def negative_counts(design: PoolingDesign, displayed: OutcomeVector) -> np.ndarray:
    """N[x]: displayed-negative tests that item x appears in."""
    counts = design.incidence.dot((~displayed.bits).astype(np.int64))
    return np.asarray(counts).ravel()


def _unclassified_per_test(design: PoolingDesign, definitely_healthy: np.ndarray) -> np.ndarray:
    return np.asarray(design.incidence.T.dot((~definitely_healthy).astype(np.int64))).ravel()


def positive_solo_counts(
    design: PoolingDesign, displayed: OutcomeVector, definitely_healthy: ArrayLike
) -> np.ndarray:
    """
    P[x]: displayed-positive tests of x whose other members are all definitely healthy.

    ``definitely_healthy`` is a boolean mask or an index array.
    """
    healthy = _as_mask(definitely_healthy, design.n)
    others = _unclassified_per_test(design, healthy)
    positive = displayed.bits
    solo_if_open = (positive & (others == 1)).astype(np.int64)
    solo_if_healthy = (positive & (others == 0)).astype(np.int64)
    open_counts = np.asarray(design.incidence.dot(solo_if_open)).ravel()
    healthy_counts = np.asarray(design.incidence.dot(solo_if_healthy)).ravel()
    return np.where(healthy, healthy_counts, open_counts)


def definitely_healthy_test_count(design: PoolingDesign, definitely_healthy: ArrayLike) -> int:
    """Number of tests whose whole pool is definitely healthy."""
    healthy = _as_mask(definitely_healthy, design.n)
    return int(np.count_nonzero(_unclassified_per_test(design, healthy) == 0))


# ── Sizing ─────────────────────────────────────────────────────────────────────


def design_sizes(
    n: int,
    theta: float,
    prefactor: float,
    d: float,
    multiplier: float = 1.0,
    k_design: Optional[int] = None,
) -> DesignSizes:
    """
    Integer k, m and Delta for m = multiplier * c * k log(n/k) tests at density d.

    ``k_design`` sizes the design for a different number of infected items
    than the sampled ``round(n**theta)``.
    """
    k = int(round(n**theta))
    k_sizing = k if k_design is None else int(k_design)
    if not 1 <= k_sizing < n:
        raise ParameterError(f"Design sizing needs 1 <= k < n, got k={k_sizing}, n={n}")
    scale = multiplier * prefactor * math.log(n / k_sizing)
    m = max(1, math.ceil(scale * k_sizing))
    delta = min(m, max(1, round(scale * d)))
    return DesignSizes(k=k, m=m, delta=delta)


def rate_bits_exact(n: int, k: int, m: int) -> float:
    """Finite-n rate log C(n, k) / (m log 2)."""
    log_binom = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
    return float(log_binom / (m * math.log(2.0)))
