import json
import math

import numpy as np
import pytest

from cssolve.energy import d_theta_j_tilde, weak_gradient
from cssolve.gauge import big_n
from cssolve.grid import RadialFunction, dilate, make_grid
from cssolve.nonlinearity import power_model
from cssolve.verify import (
    bhs_inequality,
    distinctness,
    ledger_identity,
    nehari_residual,
    pohozaev_residual,
    residual_pde,
    truncation_bounds,
    verification_report,
)

from oracles import bl_ground_state


@pytest.fixture(scope="module")
def grid():
    return make_grid(8.0, 4097)


@pytest.fixture(scope="module")
def gauss(grid):
    return RadialFunction(grid, np.exp(-grid.nodes**2))


@pytest.fixture(scope="module")
def model():
    return power_model(2.0, 1.0)


def random_profiles(grid, count, seed=0):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        amp = rng.uniform(0.2, 3.0)
        sig = rng.uniform(0.5, 2.0)
        yield RadialFunction(grid, amp * np.exp(-((grid.nodes / sig) ** 2)))


class TestResidualPde:
    def test_zero_profile(self, grid, model):
        sup, l2 = residual_pde(RadialFunction(grid, np.zeros(grid.n)), 1.0, model)
        assert sup == 0.0 and l2 == 0.0

    def test_oracle_ground_state(self, model):
        g = make_grid(24.0, 8193)
        u = RadialFunction(g, bl_ground_state(g.nodes))
        sup, _ = residual_pde(u, 0.0, model)
        assert sup < 1e-6

    def test_gaussian_analytic_residual(self, gauss, grid, model):
        # q = 0: residual is -Delta u + u - u^2 with u = e^{-r^2}
        sup, _ = residual_pde(gauss, 0.0, model)
        r = grid.nodes
        exact = -(4 * r**2 - 4) * np.exp(-(r**2)) + np.exp(-(r**2)) - np.exp(-2 * r**2)
        assert abs(sup - np.max(np.abs(exact))) < 1e-8


class TestIdentities:
    def test_nehari_equals_weak_gradient(self, grid, model):
        for u in random_profiles(grid, 20, seed=3):
            assert nehari_residual(u, 0.02, model) == weak_gradient(0.0, u, 0.02, model, u)

    def test_pohozaev_equals_theta_derivative(self, grid, model):
        for u in random_profiles(grid, 20, seed=4):
            assert pohozaev_residual(u, 0.02, model) == d_theta_j_tilde(0.0, u, 0.02, model)

    def test_zero_profile(self, grid, model):
        zero = RadialFunction(grid, np.zeros(grid.n))
        assert nehari_residual(zero, 1.0, model) == 0.0
        assert pohozaev_residual(zero, 1.0, model) == 0.0


class TestLedgerIdentity:
    def test_machine_precision_on_random_inputs(self, grid, model):
        rng = np.random.default_rng(6)
        for u in random_profiles(grid, 50, seed=6):
            theta = rng.uniform(-0.5, 0.5)
            q = rng.uniform(0.0, 0.2)
            scale = max(1.0, abs(2 * d_theta_j_tilde(theta, u, q, model)))
            assert ledger_identity(theta, u, q, model) < 1e-12 * scale

    def test_both_cutoff_branches(self, gauss, model):
        n_val = big_n(gauss)
        for s_target in (0.5, 1.5, 3.0):
            q = s_target / n_val
            assert ledger_identity(0.0, gauss, q, model) < 1e-12

    def test_saturated_cutoff_zeroes_c_and_d(self, gauss, model):
        q = 2.5 / big_n(gauss)
        c, d = truncation_bounds(0.0, gauss, q)
        assert c == 0.0 and d == 0.0

    def test_truncation_bounds_in_range(self, grid, model):
        rng = np.random.default_rng(8)
        for u in random_profiles(grid, 50, seed=8):
            theta = rng.uniform(-0.5, 0.5)
            q = rng.uniform(0.0, 0.2)
            if q * math.exp(4 * theta) * big_n(u) < 2.0:
                c, d = truncation_bounds(theta, u, q)
                assert 0.0 <= c < 2.0
                assert abs(d) < 16.0


class TestBhsInequality:
    def test_holds_on_gaussian(self, gauss):
        assert bhs_inequality(gauss)

    def test_holds_on_random_profiles(self, grid):
        for u in random_profiles(grid, 100, seed=10):
            assert bhs_inequality(u)

    def test_dilation_invariant(self, gauss):
        for tau in (0.5, 2.0):
            assert bhs_inequality(dilate(gauss, tau)) == bhs_inequality(gauss)

    def test_rejects_zero(self, grid):
        with pytest.raises(ValueError):
            bhs_inequality(RadialFunction(grid, np.zeros(grid.n)))


class _FakeReport:
    def __init__(self, u, level):
        self.u = u
        self.level = level


class TestDistinctness:
    def test_duplicate_flagged(self, gauss):
        reports = [_FakeReport(gauss, 1.0), _FakeReport(gauss, 1.0)]
        dist, gaps, flagged = distinctness(reports)
        assert dist[0, 1] == 0.0
        assert flagged == [(0, 1)]

    def test_sign_pair_distance(self, gauss, grid):
        neg = RadialFunction(grid, -gauss.values)
        dist, _, flagged = distinctness([_FakeReport(gauss, 1.0), _FakeReport(neg, 1.0)])
        two_norms = 2.0 * math.sqrt(math.pi / 2.0)  # 2 ||e^{-r^2}||_2
        assert abs(dist[0, 1] - two_norms) < 1e-10
        assert flagged == []

    def test_needs_two_reports(self, gauss):
        with pytest.raises(ValueError):
            distinctness([_FakeReport(gauss, 1.0)])

    def test_grid_mismatch(self, gauss):
        other = make_grid(8.0, 129)
        v = RadialFunction(other, np.zeros(129))
        with pytest.raises(ValueError):
            distinctness([_FakeReport(gauss, 1.0), _FakeReport(v, 1.0)])


class TestVerificationReport:
    def test_json_fields(self, gauss, model):
        data = json.loads(verification_report(gauss, 0.01, model).to_json())
        assert set(data) == {
            "residual_pde_sup", "residual_pde_l2", "nehari", "pohozaev",
            "q_n_check", "bhs_inequality_ok", "ledger_identity_err",
        }

    def test_reports_unconditionally(self, gauss, model):
        rep = verification_report(gauss, 0.01, model)
        assert np.isfinite(rep.residual_pde_sup)
        assert np.isfinite(rep.nehari)
        assert rep.q_n_check  # qN well below 1 for this profile/coupling
