import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from abandonq import (
    ActionSet,
    Criterion,
    Payment,
    best_action,
    lower_envelope,
    prune,
    slope_cap,
)
from conftest import sec6_params, sec6_actions, prepared


def brute_force_envelope_value(points, q):
    """Independent oracle for f*(q): the cheapest chord of the cloud over q
    (single points count as degenerate chords)."""
    best = np.inf
    for m, f in points:
        if m == q:
            best = min(best, f)
    for i in range(len(points)):
        for j in range(len(points)):
            (m1, f1), (m2, f2) = points[i], points[j]
            if m1 < q < m2:
                chord = f1 + (f2 - f1) * (q - m1) / (m2 - m1)
                best = min(best, chord)
    return best


class TestLowerEnvelope:
    def test_four_point_example(self):
        env = lower_envelope([(1, 2), (2, 0.5), (2, 3), (3, 2)])
        assert env.breakpoints() == [(1.0, 2.0), (2.0, 0.5), (3.0, 2.0)]

    def test_single_point(self):
        env = lower_envelope([(2, 1)])
        assert env.breakpoints() == [(2.0, 1.0)]

    def test_collinear_interior_dropped(self):
        env = lower_envelope([(1, 1), (2, 2), (3, 3)])
        assert env.breakpoints() == [(1.0, 1.0), (3.0, 3.0)]

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            lower_envelope([])

    def test_slope_conventions(self):
        env = lower_envelope([(1, 2), (2, 0.5), (3, 2)])
        assert env.left_slopes[0] == -np.inf
        assert env.right_slopes[-1] == np.inf
        assert np.allclose(env.slopes, [-1.5, 1.5])

    @given(
        st.lists(
            st.tuples(
                st.floats(0.1, 50.0, allow_nan=False),
                st.floats(-20.0, 50.0, allow_nan=False),
            ),
            min_size=1,
            max_size=40,
        )
    )
    @settings(max_examples=60, deadline=None)
    def test_envelope_properties(self, points):
        env = lower_envelope(points)
        mu = np.array([p[0] for p in points])
        f = np.array([p[1] for p in points])
        # strictly increasing rates, nondecreasing slopes
        assert np.all(np.diff(env.mu) > 0)
        assert np.all(np.diff(env.slopes) >= -1e-9)
        # every breakpoint is a member of the cloud
        for m, y in env.breakpoints():
            assert np.any((mu == m) & (f == y))
        # no point lies below the envelope
        inside = (mu >= env.mu[0]) & (mu <= env.mu[-1])
        assert np.all(f[inside] >= env.value(mu[inside]) - 1e-9 * (1 + np.abs(f[inside])))

    @given(
        st.lists(
            st.tuples(st.floats(0.1, 20.0), st.floats(-5.0, 20.0)),
            min_size=2,
            max_size=14,
        )
    )
    @settings(max_examples=40, deadline=None)
    def test_against_brute_force(self, points):
        env = lower_envelope(points)
        expected = brute_force_lower_hull(points)
        got = env.breakpoints()
        assert len(got) == len(expected)
        for (m1, f1), (m2, f2) in zip(got, expected):
            assert m1 == pytest.approx(m2, abs=1e-12)
            assert f1 == pytest.approx(f2, abs=1e-9)


class TestPrune:
    def test_sec6_grid_cap(self):
        params = sec6_params()
        acts = prepared(params, sec6_actions(step=0.01))
        env = lower_envelope(acts)
        pruned = prune(env, params)
        # cap (h + c*theta)/theta = 5 on chords of the quadratic: mu <= 10
        assert pruned.mu.max() == pytest.approx(10.0, abs=0.011)
        # brute force over the raw grid chords
        mu = np.sort(np.unique(acts.mu))
        fvals = 0.25 * mu**2
        fvals[mu == 0.5] = min(0.25 * 0.25, 1.5)
        chord = np.diff(fvals) / np.diff(mu)
        expected_max = mu[1:][chord <= 5.0].max()
        assert pruned.mu.max() == pytest.approx(expected_max)

    def test_infinite_cap_no_change(self):
        params = sec6_params(h=1e12)
        acts = prepared(params, sec6_actions(step=0.5))
        env = lower_envelope(acts)
        assert len(prune(env, params)) == len(env)

    def test_decreasing_envelope_keeps_only_rightmost(self):
        # min f >= 0 and strictly decreasing f*: only mu_+ can be optimal
        params = sec6_params()
        env = lower_envelope([(1.0, 3.0), (2.0, 2.0), (4.0, 0.5)])
        pruned = prune(env, params)
        assert pruned.breakpoints() == [(4.0, 0.5)]

    def test_negative_f_disables_right_slope_filter(self):
        params = sec6_params()
        env = lower_envelope([(1.0, 3.0), (2.0, 2.0), (4.0, -0.5)])
        pruned = prune(env, params)
        assert len(pruned) == 3

    def test_cap_values(self):
        assert slope_cap(sec6_params()) == pytest.approx(5.0)
        assert slope_cap(sec6_params(payment=Payment.COMPLETION)) == pytest.approx(7.0)
        assert slope_cap(
            sec6_params(criterion=Criterion.DISCOUNTED, alpha=1.0)
        ) == pytest.approx(5.0 / 3.0)

    @given(st.data())
    @settings(max_examples=40, deadline=None)
    def test_prune_preserves_best_action_in_band(self, data):
        pts = data.draw(
            st.lists(
                st.tuples(st.floats(0.2, 15.0), st.floats(0.0, 30.0)),
                min_size=2,
                max_size=25,
            )
        )
        params = sec6_params(
            h=data.draw(st.floats(0.1, 4.0)), c=data.draw(st.floats(0.0, 4.0))
        )
        env = lower_envelope(pts)
        pruned = prune(env, params)
        cap = slope_cap(params)
        beta = -data.draw(st.floats(0.0, 1.0)) * cap
        assert best_action(env, beta) == best_action(pruned, beta)


class TestBestAction:
    ENV = [(1.0, 2.0), (2.0, 0.5), (3.0, 2.0)]

    def test_pure_cost_minimization(self):
        assert best_action(lower_envelope(self.ENV), 0.0) == (2.0, 0.5)

    def test_negative_beta_prefers_fast(self):
        assert best_action(lower_envelope(self.ENV), -10.0) == (3.0, 2.0)

    def test_incumbent_retained_on_tie(self):
        # scores at beta=1.5: -3.5, -3.5, -6.5
        env = lower_envelope(self.ENV)
        assert best_action(env, 1.5, incumbent=(1.0, 2.0)) == (1.0, 2.0)
        # without an incumbent the smaller rate wins the tie
        assert best_action(env, 1.5) == (1.0, 2.0)

    def test_incumbent_dropped_when_beaten(self):
        env = lower_envelope(self.ENV)
        assert best_action(env, -10.0, incumbent=(1.0, 2.0)) == (3.0, 2.0)

    @given(st.data())
    @settings(max_examples=60, deadline=None)
    def test_matches_brute_force(self, data):
        pts = data.draw(
            st.lists(
                st.tuples(st.floats(0.2, 15.0), st.floats(-8.0, 25.0)),
                min_size=1,
                max_size=25,
            )
        )
        beta = data.draw(st.floats(-8.0, 8.0))
        env = lower_envelope(pts)
        scores = -env.f - env.mu * beta
        got = best_action(env, beta)
        assert -got[1] - got[0] * beta == pytest.approx(scores.max(), abs=1e-9)
        # smallest-mu exact maximizer
        winners = env.mu[scores >= scores.max()]
        assert got[0] == winners.min()

    @given(st.data())
    @settings(max_examples=40, deadline=None)
    def test_invariant_under_dominated_points(self, data):
        pts = data.draw(
            st.lists(
                st.tuples(st.floats(0.5, 10.0), st.floats(0.0, 10.0)),
                min_size=2,
                max_size=15,
            )
        )
        beta = data.draw(st.floats(-5.0, 5.0))
        env = lower_envelope(pts)
        # add points strictly above the envelope
        extra_mu = np.linspace(env.mu[0], env.mu[-1], 7)
        extra = [(m, env.value(m) + 1.0 + i) for i, m in enumerate(extra_mu)]
        env2 = lower_envelope(list(pts) + extra)
        assert best_action(env, beta) == best_action(env2, beta)

    @given(st.data())
    @settings(max_examples=40, deadline=None)
    def test_mu_nonincreasing_in_beta(self, data):
        pts = data.draw(
            st.lists(
                st.tuples(st.floats(0.2, 12.0), st.floats(-5.0, 20.0)),
                min_size=1,
                max_size=20,
            )
        )
        env = lower_envelope(pts)
        betas = sorted(data.draw(st.lists(st.floats(-6.0, 6.0), min_size=2, max_size=8)))
        mus = [best_action(env, b)[0] for b in betas]
        assert all(m2 <= m1 for m1, m2 in zip(mus, mus[1:]))
