import numpy as np
import pytest

from abandonq import (
    IDLE,
    ActionSet,
    Criterion,
    ModelParams,
    Payment,
    reward_rate,
    transition_rates,
    validate,
)
from conftest import sec6_params


class TestRewardRate:
    def test_idle_empty_system(self):
        assert reward_rate(sec6_params(), 0, IDLE) == pytest.approx(1.0)

    def test_active_arrival(self):
        # 0.5*2 - 2 - 3*1*0.5 - 4
        assert reward_rate(sec6_params(), 2, (4.0, 4.0)) == pytest.approx(-6.5)

    def test_active_completion(self):
        p = sec6_params(payment=Payment.COMPLETION)
        # 4*2 - 1 - 0 - 4
        assert reward_rate(p, 1, (4.0, 4.0)) == pytest.approx(3.0)

    def test_idle_at_positive_state(self):
        p = sec6_params()
        assert reward_rate(p, 3, IDLE) == pytest.approx(1.0 - 3.0 - 1.5 * 3)

    def test_completion_idle(self):
        p = sec6_params(payment=Payment.COMPLETION)
        assert reward_rate(p, 2, IDLE) == pytest.approx(-2.0 - 3.0)

    def test_finite_capacity_forfeits_arrival_reward(self):
        p = sec6_params(capacity=4)
        full = reward_rate(p, 4, (2.0, 1.0))
        interior = reward_rate(p, 3, (2.0, 1.0))
        # moving 3 -> 4 with the same action: -h - c*theta extra, minus lam*r
        assert full == pytest.approx(interior - 1.0 - 1.5 - 1.0)

    def test_completion_finite_capacity_unmodified(self):
        p = sec6_params(payment=Payment.COMPLETION, capacity=4)
        q = sec6_params(payment=Payment.COMPLETION)
        assert reward_rate(p, 4, (2.0, 1.0)) == reward_rate(q, 4, (2.0, 1.0))

    def test_active_at_zero_rejected(self):
        with pytest.raises(ValueError):
            reward_rate(sec6_params(), 0, (2.0, 1.0))

    def test_above_capacity_rejected(self):
        with pytest.raises(ValueError):
            reward_rate(sec6_params(capacity=3), 4, IDLE)

    def test_convention_gap_is_mu_r_minus_lam_r(self):
        pa = sec6_params()
        pc = sec6_params(payment=Payment.COMPLETION)
        for i in (1, 2, 7):
            for mu, f in ((0.7, 0.1), (4.0, 4.0), (12.0, 36.0)):
                gap = reward_rate(pc, i, (mu, f)) - reward_rate(pa, i, (mu, f))
                assert gap == pytest.approx(mu * pa.r - pa.lam * pa.r)


class TestTransitionRates:
    def test_empty_system(self):
        assert transition_rates(sec6_params(), 0, IDLE) == {"up": 0.5, "down": 0.0}

    def test_active(self):
        rates = transition_rates(sec6_params(), 3, (2.0, 1.0))
        assert rates == {"up": 0.5, "down": 2.0 + 2 * 0.5}

    def test_idle(self):
        assert transition_rates(sec6_params(), 3, IDLE) == {"up": 0.5, "down": 1.5}

    def test_blocked_at_capacity(self):
        assert transition_rates(sec6_params(capacity=3), 3, (2.0, 1.0))["up"] == 0.0

    def test_down_rate_nondecreasing_in_state(self):
        p = sec6_params()
        downs = [transition_rates(p, i, (2.0, 1.0))["down"] for i in range(1, 12)]
        assert all(b >= a for a, b in zip(downs, downs[1:]))

    def test_idle_matches_appended_point(self):
        # the idle convention: rates of IDLE equal rates of the point
        # (theta, c*theta) treated as an active action, at every i >= 1
        p = sec6_params()
        for i in range(1, 8):
            assert transition_rates(p, i, IDLE) == transition_rates(p, i, p.idle_point())


class TestValidate:
    def test_bad_lambda_named(self):
        p = sec6_params(lam=0.0)
        vr = validate(p, ActionSet.from_points([(1.0, 1.0)]))
        assert any("lambda" in e for e in vr.errors)

    def test_empty_action_set(self):
        vr = validate(sec6_params(), ActionSet.from_points([]))
        assert any("empty" in e for e in vr.errors)

    def test_sec6_config_appends_idle(self):
        p = sec6_params()
        acts = ActionSet.grid(0.5, 30.0, 0.1, lambda m: 0.25 * m**2)
        vr = validate(p, acts)
        assert vr.ok
        assert vr.idle_appended
        assert vr.actions.contains_point((0.5, 1.5))

    def test_idle_not_duplicated(self):
        p = sec6_params()
        acts = ActionSet.from_points([(0.5, 1.5), (2.0, 1.0)])
        vr = validate(p, acts)
        assert vr.ok and not vr.idle_appended and len(vr.actions) == 2

    def test_discounted_requires_alpha(self):
        p = sec6_params(criterion=Criterion.DISCOUNTED, alpha=None)
        vr = validate(p, ActionSet.from_points([(1.0, 1.0)]))
        assert any("alpha" in e for e in vr.errors)

    def test_nonpositive_mu_rejected(self):
        vr = validate(sec6_params(), ActionSet.from_points([(0.0, 1.0)]))
        assert any("mu" in e for e in vr.errors)

    def test_negative_f_allowed(self):
        vr = validate(sec6_params(), ActionSet.from_points([(1.0, -2.0)]))
        assert vr.ok

    def test_bad_capacity(self):
        vr = validate(sec6_params(capacity=0), ActionSet.from_points([(1.0, 1.0)]))
        assert any("capacity" in e for e in vr.errors)


def test_grid_resolution():
    acts = ActionSet.grid(0.5, 2.0, 0.5, lambda m: m)
    assert acts.grid_resolution() == pytest.approx(0.5)
    assert ActionSet.from_points([(1.0, 1.0)]).grid_resolution() == 0.0


def test_policy_accessors():
    from abandonq import Policy

    pol = Policy(mu=np.array([1.0, 2.0]), f=np.array([0.5, 1.5]))
    assert len(pol) == 2
    assert pol.action(2) == (2.0, 1.5)
    with pytest.raises(ValueError):
        Policy(mu=np.array([1.0]), f=np.array([1.0, 2.0]))
