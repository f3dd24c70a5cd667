import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from chanalloc.radio import (
    LinkState,
    OutageInversionError,
    RadioParams,
    invert_outage,
    mean_sir_linear,
    outage_capacity,
    outage_capacity_batch,
    outage_prob_multi,
    outage_prob_single,
    path_loss_db,
    rho,
)
from conftest import build_scenario
from oracles import bisect_outage_capacity, bisect_outage_threshold

PARAMS = RadioParams()


class TestPathLoss:
    def test_reference_distance(self):
        assert path_loss_db(15.0, PARAMS) == 70.28

    def test_one_decade(self):
        assert path_loss_db(150.0, PARAMS) == pytest.approx(90.28, abs=1e-12)

    def test_double_distance(self):
        expected = 70.28 + 20.0 * math.log10(2.0)
        assert path_loss_db(30.0, PARAMS) == pytest.approx(expected, abs=1e-12)
        assert path_loss_db(30.0, PARAMS) == pytest.approx(76.30, abs=5e-3)

    @pytest.mark.parametrize("bad", [0.0, -1.0])
    def test_rejects_nonpositive_distance(self, bad):
        with pytest.raises(ValueError):
            path_loss_db(bad, PARAMS)


class TestMeanSir:
    def test_symmetric_cancellation(self):
        p = RadioParams(ref_path_loss_db=70.0)
        assert mean_sir_linear(20.0, 15.0, p) == pytest.approx(1.0, abs=1e-12)

    def test_reference_geometry(self):
        # gamma_bar_dB = 20 - 70.28 - (-50) = -0.28 dB
        assert mean_sir_linear(20.0, 15.0, PARAMS) == pytest.approx(
            10.0 ** (-0.028), rel=1e-12
        )

    def test_higher_power(self):
        assert mean_sir_linear(25.0, 15.0, PARAMS) == pytest.approx(
            10.0 ** 0.472, rel=1e-12
        )

    def test_rejects_nonpositive_distance(self):
        with pytest.raises(ValueError):
            mean_sir_linear(20.0, 0.0, PARAMS)


class TestOutageSingle:
    def test_rayleigh_at_mean(self):
        assert outage_prob_single(1.0, LinkState(1.0, 0.0)) == 0.5

    def test_dead_link(self):
        assert outage_prob_single(1.0, LinkState(0.0, 7.0)) == 1.0

    def test_rician_at_mean(self):
        expected = 0.5 * math.exp(-0.5)
        assert outage_prob_single(1.0, LinkState(1.0, 1.0)) == pytest.approx(
            expected, rel=1e-12
        )

    def test_rejects_nonpositive_threshold(self):
        with pytest.raises(ValueError):
            outage_prob_single(0.0, LinkState(1.0, 0.0))

    def test_strictly_increasing_in_threshold(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            g = float(rng.uniform(0.01, 100.0))
            k = float(rng.uniform(0.0, 40.0))
            link = LinkState(g, k)
            thresholds = np.sort(rng.uniform(1e-6, 1e3, size=100))
            probs = [outage_prob_single(float(t), link) for t in thresholds]
            assert all(b > a for a, b in zip(probs, probs[1:]))

    @given(
        gamma_th=st.floats(1e-9, 1e6),
        g=st.floats(0.0, 1e6),
        k=st.floats(0.0, 100.0),
    )
    def test_codomain(self, gamma_th, g, k):
        p = outage_prob_single(gamma_th, LinkState(g, k))
        assert 0.0 <= p <= 1.0


class TestOutageMulti:
    def test_independence_product(self):
        link = LinkState(1.0, 0.0)
        assert outage_prob_multi(1.0, [link, link]) == 0.25

    def test_empty_product(self):
        assert outage_prob_multi(1.0, []) == 1.0

    def test_mixed_product(self):
        links = [LinkState(1.0, 1.0), LinkState(1.0, 0.0)]
        expected = 0.5 * math.exp(-0.5) * 0.5
        assert outage_prob_multi(1.0, links) == pytest.approx(expected, rel=1e-12)
        assert outage_prob_multi(1.0, links) == pytest.approx(0.151635, abs=5e-6)

    def test_extra_link_never_hurts(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            links = [
                LinkState(float(rng.uniform(0, 5)), float(rng.uniform(0, 30)))
                for _ in range(int(rng.integers(1, 5)))
            ]
            extra = LinkState(float(rng.uniform(0, 5)), float(rng.uniform(0, 30)))
            for t in rng.uniform(1e-3, 10.0, size=20):
                p_small = outage_prob_multi(float(t), links)
                p_big = outage_prob_multi(float(t), links + [extra])
                assert p_big <= p_small


class TestOutageCapacity:
    def test_empty_set(self):
        assert outage_capacity([], PARAMS) == 0.0

    def test_all_dead_links(self):
        assert outage_capacity([LinkState(0.0, 25.0)] * 3, PARAMS) == 0.0

    def test_duplicate_link_not_worse(self):
        link = LinkState(0.8, PARAMS.rician_ref_linear)
        one = outage_capacity([link], PARAMS)
        two = outage_capacity([link, link], PARAMS)
        assert two >= one > 0.0

    def test_rayleigh_closed_form(self):
        # K = 0 allows solving the single-link outage equation in closed form:
        # gamma* = eps/(1 - eps).
        link = LinkState(1.0, 0.0)
        gamma_star = PARAMS.epsilon / (1.0 - PARAMS.epsilon)
        closed = PARAMS.bandwidth_hz * math.log1p(gamma_star) / math.log(2.0) / 1e6
        got = outage_capacity([link], PARAMS)
        assert got == pytest.approx(closed, rel=2e-3)
        assert got == pytest.approx(2.885e-8, rel=1e-2)
        oracle = bisect_outage_capacity([link], PARAMS)
        assert got == pytest.approx(oracle, rel=2e-3)

    def test_matches_bisection_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            links = [
                LinkState(float(rng.uniform(0.001, 30.0)),
                          float(rng.choice([0.0, PARAMS.rician_ref_linear])))
                for _ in range(int(rng.integers(1, 7)))
            ]
            got = outage_capacity(links, PARAMS)
            oracle = bisect_outage_capacity(links, PARAMS)
            assert got == pytest.approx(oracle, rel=3e-3)

    def test_inversion_tolerance_invariant(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            gains = list(rng.uniform(0.001, 30.0, size=int(rng.integers(1, 7))))
            ricians = list(rng.choice([0.0, PARAMS.rician_ref_linear], size=len(gains)))
            gamma = invert_outage(gains, ricians, PARAMS.epsilon)
            links = [LinkState(g, k) for g, k in zip(gains, ricians)]
            p = outage_prob_multi(gamma, links)
            assert abs(p - PARAMS.epsilon) <= 1.001e-3 * PARAMS.epsilon

    def test_monotone_under_inclusion(self):
        rng = np.random.default_rng(9)
        for _ in range(100):
            n = int(rng.integers(1, 6))
            links = [
                LinkState(float(rng.uniform(0.0, 20.0)),
                          float(rng.uniform(0.0, 30.0)))
                for _ in range(n)
            ]
            sub = links[: int(rng.integers(0, n))]
            assert outage_capacity(links, PARAMS) >= outage_capacity(sub, PARAMS)


class TestBatch:
    def test_matches_scalar(self):
        rng = np.random.default_rng(21)
        gains = rng.uniform(0.0, 10.0, size=6)
        gains[2] = 0.0
        ricians = rng.choice([0.0, PARAMS.rician_ref_linear], size=6)
        masks = rng.random((40, 6)) < 0.5
        batch = outage_capacity_batch(masks, gains, ricians, PARAMS)
        for i, row in enumerate(masks):
            links = [LinkState(float(gains[j]), float(ricians[j]))
                     for j in range(6) if row[j]]
            scalar = outage_capacity(links, PARAMS)
            if scalar == 0.0:
                assert batch[i] == 0.0
            else:
                assert batch[i] == pytest.approx(scalar, rel=3e-3)

    def test_empty_rows(self):
        out = outage_capacity_batch(
            np.zeros((3, 4), dtype=bool), np.ones(4), np.ones(4), PARAMS
        )
        assert (out == 0.0).all()


class TestRho:
    def scenario(self):
        return build_scenario(
            bs_specs=[((0.0, 0.0), 20.0, 2), ((0.0, 10.0), 20.0, 1)],
            tenant_specs=[((10.0, 5.0), 0.15, 20.0), ((30.0, 5.0), 0.15, 20.0)],
        )

    def test_empty_set(self):
        assert rho(0, frozenset(), self.scenario()) == 0.0

    def test_monotone_in_set(self):
        scn = self.scenario()
        assert rho(0, {0}, scn) <= rho(0, {0, 1}, scn) <= rho(0, {0, 1, 2}, scn)

    def test_colocated_duplicate_squares_outage(self):
        # two identical channels square the joint outage probability, which
        # strictly raises the achievable rate
        scn = build_scenario(
            bs_specs=[((0.0, 0.0), 20.0, 2)],
            tenant_specs=[((10.0, 5.0), 0.15, 20.0)],
        )
        one = rho(0, {0}, scn)
        both = rho(0, {0, 1}, scn)
        assert both > one
        link = scn.link_state(0, 0)
        gamma_two = bisect_outage_threshold([link, link], scn.params.epsilon)
        expected = scn.params.bandwidth_hz * math.log1p(gamma_two) / math.log(2) / 1e6
        assert both == pytest.approx(expected, rel=3e-3)

    def test_assignment_independent(self):
        scn = self.scenario()
        before = rho(0, {0, 2}, scn)
        rho(1, {1}, scn)  # "assign" a channel to the other tenant
        after = rho(0, {0, 2}, scn)
        assert before == after

    def test_unknown_ids_raise(self):
        scn = self.scenario()
        with pytest.raises(KeyError):
            rho(5, {0}, scn)
        with pytest.raises(KeyError):
            rho(0, {99}, scn)

    def test_cache_is_bit_stable(self):
        scn = self.scenario()
        first = rho(0, {0, 1, 2}, scn)
        scn.bundle_cache.clear()
        second = rho(0, {0, 1, 2}, scn)
        assert first == second


def test_invert_outage_raises_on_impossible_cap(monkeypatch):
    import chanalloc.radio as radio_mod

    monkeypatch.setattr(radio_mod, "MAX_INVERSION_ITER", 1)
    gains = [0.5, 2.0, 0.01]
    ricians = [25.0, 25.0, 0.0]
    with pytest.raises(OutageInversionError):
        invert_outage(gains, ricians, 1e-9)


def test_params_validation():
    with pytest.raises(ValueError):
        RadioParams(bandwidth_hz=0.0)
    with pytest.raises(ValueError):
        RadioParams(epsilon=1.5)
    with pytest.raises(ValueError):
        LinkState(-1.0, 0.0)
