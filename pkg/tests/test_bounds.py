"""
Unit tests for bounds.py
"""

import math
from unittest.mock import patch

import numpy as np
import pytest

from src.utils.bounds import (
    ROW_FIELDS,
    BoundQuery,
    OptimizerSettings,
    bernoulli_comp_constants,
    bernoulli_dd_constants,
    comp_constants,
    converse_constant,
    counting_constant,
    dd_constants,
    noiseless_optimal_constant,
    optimize_bernoulli_comp,
    optimize_bernoulli_dd,
    optimize_comp,
    optimize_dd,
    rate_sweep,
    reference_result,
    solve_bound,
    special_channel_constant,
)
from src.utils.errors import DomainError, OptimizationError
from src.utils.kl_math import ChannelParams, kl_bernoulli
from src.utils.models import Algorithm, DesignKind

LOG2 = math.log(2.0)
THETAS = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
NOISELESS = ChannelParams(0.0, 0.0)


def query(theta, p, q, design=DesignKind.CONSTANT_COLUMN, algorithm=Algorithm.COMP):
    return BoundQuery(theta=theta, channel=ChannelParams(p, q), design=design, algorithm=algorithm)


class TestConstants:
    """Test the closed-form constants at fixed parameters."""

    def test_comp_constants_match_formula(self):
        ch = ChannelParams(0.02, 0.1)
        alpha, d, theta = 0.3, 0.7, 0.4
        values = comp_constants(alpha, d, theta, ch)
        upper = math.exp(-d) * (1 - ch.p) + (1 - math.exp(-d)) * ch.q
        assert values["b1"] == pytest.approx(
            theta / (1 - theta) / (d * kl_bernoulli(alpha, ch.q)), rel=1e-12
        )
        assert values["b2"] == pytest.approx(
            1 / (1 - theta) / (d * kl_bernoulli(alpha, upper)), rel=1e-12
        )

    def test_comp_b1_example(self):
        values = comp_constants(0.1, 1.0, 0.5, ChannelParams(0.0, 0.02))
        assert values["b1"] == pytest.approx(1.0 / kl_bernoulli(0.1, 0.02), rel=1e-12)
        assert values["b1"] == pytest.approx(11.862, abs=1e-3)

    def test_comp_constants_vectorize(self):
        values = comp_constants(np.array([0.2, 0.25, 0.3]), 0.7, 0.4, ChannelParams(0.02, 0.1))
        assert values["b1"].shape == (3,)
        assert np.all(np.diff(values["b1"]) < 0)
        assert np.all(np.diff(values["b2"]) > 0)

    def test_alpha_outside_interval_raises(self):
        with pytest.raises(DomainError):
            comp_constants(0.05, 0.7, 0.4, ChannelParams(0.02, 0.1))
        with pytest.raises(DomainError):
            comp_constants(0.3, -1.0, 0.4, ChannelParams(0.02, 0.1))

    def test_theta_outside_interval_raises(self):
        with pytest.raises(DomainError):
            comp_constants(0.3, 0.7, 1.0, ChannelParams(0.02, 0.1))

    @pytest.mark.parametrize("alpha", [0.15, 0.3, 0.45])
    @pytest.mark.parametrize("beta", [0.05, 0.2, 0.4])
    def test_dd_inner_maximum_beats_grid(self, alpha, beta):
        ch = ChannelParams(0.05, 0.1)
        d, theta = 0.7, 0.4
        values = dd_constants(alpha, beta, d, theta, ch)

        e = math.exp(-d)
        w = e * ch.p + (1 - e) * (1 - ch.q)
        s = e * ch.p / w

        def divergence(z):
            solo = z * kl_bernoulli(beta / z, s) if beta > z * s else 0.0
            return kl_bernoulli(z, w) + solo

        grid = [1.0 / ((1 - theta) * d * divergence(z)) for z in np.linspace(1 - alpha, 1, 64)]
        assert values["c4"] >= max(grid) * (1 - 1e-9)
        assert values["c4"] == pytest.approx(max(grid), rel=1e-2)
        assert 1 - alpha - 1e-12 <= values["z_star"] <= 1.0

    def test_dd_shares_comp_infected_constant(self):
        ch = ChannelParams(0.05, 0.1)
        comp = comp_constants(0.3, 0.7, 0.4, ch)
        dd = dd_constants(0.3, 0.2, 0.7, 0.4, ch)
        assert dd["c1"] == pytest.approx(comp["b1"], rel=1e-12)
        assert dd["c2"] == pytest.approx(comp["b2"] * (1 - 0.4), rel=1e-12)

    def test_bernoulli_constants_exceed_constant_column(self):
        ch = ChannelParams(0.02, 0.1)
        cc = comp_constants(0.3, 0.7, 0.4, ch)
        ber = bernoulli_comp_constants(0.3, 0.7, 0.4, ch)
        assert ber["b1"] >= cc["b1"]
        assert ber["b2"] >= cc["b2"]

    def test_bernoulli_finite_k_approaches_limit(self):
        ch = ChannelParams(0.02, 0.1)
        limit = bernoulli_comp_constants(0.3, 0.7, 0.4, ch)
        exact = bernoulli_comp_constants(0.3, 0.7, 0.4, ch, k_limit=1e6)
        assert exact["b1"] == pytest.approx(limit["b1"], rel=1e-4)
        assert exact["b2"] == pytest.approx(limit["b2"], rel=1e-4)

    def test_bernoulli_dd_zeta_domain(self):
        ch = ChannelParams(0.02, 0.1)
        with pytest.raises(DomainError):
            bernoulli_dd_constants(0.3, 0.2, 0.7, 0.4, 0.5, ch)
        values = bernoulli_dd_constants(0.3, 0.2, 0.7, 0.4, 0.2, ch)
        assert set(values) == {"c1", "c2", "c3", "c4"}


class TestNoiselessClosedForms:
    """Test the optimizers against the noiseless corollaries."""

    @pytest.mark.parametrize("theta", THETAS)
    def test_comp(self, theta):
        result = optimize_comp(BoundQuery(theta, NOISELESS, algorithm=Algorithm.COMP))
        expected = 1.0 / ((1.0 - theta) * LOG2**2)
        assert result.prefactor == pytest.approx(expected, rel=1e-3)
        assert result.d_star == pytest.approx(LOG2, rel=1e-2)

    @pytest.mark.parametrize("theta", THETAS)
    def test_dd(self, theta):
        result = optimize_dd(BoundQuery(theta, NOISELESS, algorithm=Algorithm.DD))
        expected = max(1.0, theta / (1.0 - theta)) / LOG2**2
        assert result.prefactor == pytest.approx(expected, rel=1e-3)

    @pytest.mark.parametrize("theta", [0.2, 0.5, 0.8])
    def test_special_forms_match(self, theta):
        comp = special_channel_constant(theta, NOISELESS, Algorithm.COMP)
        dd = special_channel_constant(theta, NOISELESS, Algorithm.DD)
        assert comp == pytest.approx(1.0 / ((1.0 - theta) * LOG2**2))
        assert dd == pytest.approx(max(1.0, theta / (1.0 - theta)) / LOG2**2)


class TestResults:
    """Test result records, dispatch and sweeps."""

    def test_result_row_fields(self):
        result = optimize_comp(query(0.5, 0.0, 0.1))
        row = result.as_row()
        assert list(row) == ROW_FIELDS
        assert row["status"] == "ok"
        assert row["rate_bits"] == pytest.approx(1.0 / (result.prefactor * LOG2))
        assert row["binding"] in {"b1", "b2"}
        assert row["q"] == 0.1

    def test_rows_report_physical_channel(self):
        result = optimize_comp(query(0.5, 0.9, 0.95))
        assert result.channel.flipped
        row = result.as_row()
        assert row["p"] == pytest.approx(0.9)
        assert row["q"] == pytest.approx(0.95)

    def test_flipped_channel_has_same_bound(self):
        plain = optimize_comp(query(0.5, 0.1, 0.05))
        flipped = optimize_comp(query(0.5, 0.9, 0.95))
        assert flipped.prefactor == pytest.approx(plain.prefactor, rel=1e-9)

    def test_comp_thresholds_are_feasible(self):
        result = optimize_comp(query(0.4, 0.05, 0.1))
        d = result.d_star
        upper = math.exp(-d) * 0.95 + (1 - math.exp(-d)) * 0.1
        assert 0.1 <= result.alpha_star <= upper
        values = comp_constants(result.alpha_star, d, 0.4, ChannelParams(0.05, 0.1))
        assert max(values.values()) == pytest.approx(result.prefactor, rel=1e-9)

    @pytest.mark.parametrize("p, q", [(0.0, 0.0), (0.0, 0.1), (0.05, 0.0), (0.05, 0.1)])
    def test_comp_prefactor_nondecreasing_in_theta(self, p, q):
        prefactors = [optimize_comp(query(theta, p, q)).prefactor for theta in THETAS]
        for lower, higher in zip(prefactors, prefactors[1:]):
            assert higher >= lower * (1 - 1e-6)

    def test_converse(self):
        noiseless = converse_constant(NOISELESS)
        assert noiseless.prefactor == pytest.approx(1.0 / LOG2)
        assert noiseless.d_star == pytest.approx(LOG2)
        bsc = converse_constant(ChannelParams(0.1, 0.1))
        assert bsc.prefactor == pytest.approx(2.71692, abs=1e-5)

    def test_solve_bound_dispatches(self):
        converse = solve_bound(query(0.3, 0.0, 0.0, algorithm=Algorithm.CONVERSE))
        assert converse.algorithm == "converse"
        ber = solve_bound(query(0.3, 0.0, 0.0, design=DesignKind.BERNOULLI))
        assert ber.design == "bernoulli"

    def test_reference_curves(self):
        assert counting_constant() == pytest.approx(1.0 / LOG2)
        assert noiseless_optimal_constant(0.2) == pytest.approx(1.0 / LOG2)
        assert noiseless_optimal_constant(0.8) == pytest.approx(4.0 / LOG2**2)
        row = reference_result(0.5, NOISELESS, "optimal").as_row()
        assert row["algorithm"] == "optimal"
        with pytest.raises(DomainError):
            reference_result(0.5, NOISELESS, "best")

    def test_rate_sweep_rows(self):
        rows = rate_sweep(query(0.5, 0.0, 0.0), [0.2, 0.5])
        assert [row["theta"] for row in rows] == [0.2, 0.5]
        assert all(row["status"] == "ok" for row in rows)

    def test_rate_sweep_keeps_failures(self):
        with patch(
            "src.utils.bounds.solve_bound", side_effect=OptimizationError("no finite value")
        ):
            rows = rate_sweep(query(0.5, 0.0, 0.1), [0.2, 0.5])
        assert [row["status"] for row in rows] == ["error", "error"]
        assert rows[0]["error"] == "no finite value"
        assert rows[0]["prefactor"] is None
        assert list(rows[0]) == ROW_FIELDS

    def test_optimizer_settings_validation(self):
        with pytest.raises(DomainError):
            OptimizerSettings(d_min=1.0, d_max=0.5)
        with pytest.raises(DomainError):
            OptimizerSettings(grid_points=2)

    def test_narrow_density_range_is_respected(self):
        opts = OptimizerSettings(d_min=1.5, d_max=3.0)
        result = optimize_comp(query(0.5, 0.0, 0.0), opts)
        assert 1.5 - 1e-9 <= result.d_star <= 3.0 + 1e-9
        assert result.prefactor > 1.0 / (0.5 * LOG2**2)


class TestSpecialChannels:
    """Test the reduced forms against the general optimizers."""

    def test_reverse_z_comp(self):
        ch = ChannelParams(0.1, 0.0)
        general = optimize_comp(BoundQuery(0.5, ch))
        assert special_channel_constant(0.5, ch, Algorithm.COMP) == pytest.approx(
            general.prefactor, rel=1e-6
        )

    def test_z_dd(self):
        ch = ChannelParams(0.0, 0.1)
        general = optimize_dd(BoundQuery(0.5, ch, algorithm=Algorithm.DD))
        assert special_channel_constant(0.5, ch, Algorithm.DD) == pytest.approx(
            general.prefactor, rel=1e-6
        )

    def test_reverse_z_dd(self):
        ch = ChannelParams(0.1, 0.0)
        general = optimize_dd(BoundQuery(0.5, ch, algorithm=Algorithm.DD))
        assert special_channel_constant(0.5, ch, Algorithm.DD) == pytest.approx(
            general.prefactor, rel=1e-4
        )

    @pytest.mark.parametrize("p, q", [(0.1, 0.1), (0.05, 0.1)])
    def test_no_reduced_form(self, p, q):
        with pytest.raises(DomainError):
            special_channel_constant(0.5, ChannelParams(p, q), Algorithm.DD)


CHANNEL_VALUES = [0.0, 0.01, 0.05, 0.1, 0.2]
CHANNEL_GRID = [(p, q) for p in CHANNEL_VALUES for q in CHANNEL_VALUES]


@pytest.mark.slow
class TestOrdering:
    """Test the orderings between bounds over theta x p x q."""

    @pytest.mark.parametrize("p, q", CHANNEL_GRID)
    def test_converse_below_dd(self, p, q):
        ch = ChannelParams(p, q)
        converse = converse_constant(ch).prefactor
        for theta in THETAS:
            dd = optimize_dd(BoundQuery(theta, ch, algorithm=Algorithm.DD))
            assert converse <= dd.prefactor * (1 + 1e-9)

    @pytest.mark.parametrize("p", CHANNEL_VALUES[1:])
    def test_dd_below_comp_on_reverse_z(self, p):
        ch = ChannelParams(p, 0.0)
        for theta in THETAS:
            comp = optimize_comp(BoundQuery(theta, ch))
            dd = optimize_dd(BoundQuery(theta, ch, algorithm=Algorithm.DD))
            assert dd.prefactor <= comp.prefactor * (1 + 1e-6)

    @pytest.mark.parametrize("p, q", CHANNEL_GRID)
    def test_bernoulli_comp_above_constant_column(self, p, q):
        ch = ChannelParams(p, q)
        for theta in THETAS:
            cc = optimize_comp(BoundQuery(theta, ch))
            ber = optimize_bernoulli_comp(BoundQuery(theta, ch, design=DesignKind.BERNOULLI))
            assert ber.prefactor >= cc.prefactor * (1 - 1e-6)

    @pytest.mark.parametrize("q", CHANNEL_VALUES[1:])
    def test_bernoulli_dd_above_constant_column_on_z(self, q):
        ch = ChannelParams(0.0, q)
        for theta in THETAS:
            cc = optimize_dd(BoundQuery(theta, ch, algorithm=Algorithm.DD))
            ber = optimize_bernoulli_dd(
                BoundQuery(theta, ch, design=DesignKind.BERNOULLI, algorithm=Algorithm.DD)
            )
            assert ber.prefactor > cc.prefactor
            assert theta * 1e-2 <= ber.zeta_star <= theta

    def test_dd_below_comp_on_z_channel(self):
        ch = ChannelParams(0.0, 0.1)
        for theta in [0.1, 0.3, 0.5, 0.7, 0.9]:
            comp = optimize_comp(BoundQuery(theta, ch))
            dd = optimize_dd(BoundQuery(theta, ch, algorithm=Algorithm.DD))
            assert dd.prefactor <= comp.prefactor * (1 + 1e-6)
