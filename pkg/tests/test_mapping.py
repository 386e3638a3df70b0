import json
import math

import pytest
from easypy.tokens import FORMAT2

from lognormal_surrogates.configuration import CONF
from lognormal_surrogates.dists import Lognormal, AlphaMu, KappaMu, EtaMu
from lognormal_surrogates.exceptions import (
    ParameterError, InfeasibleTarget, SingularMomentOrders, CascadeFileError,
)
from lognormal_surrogates.mapping import (
    NAKAGAMI_PRODUCT, INV_NAKAGAMI_PRODUCT, ALPHA_MU, KAPPA_MU, ETA_MU, MOMENTS, QUADRATURE,
    solve_shape, forward, forward_nakagami, forward_inv_nakagami, min_inv_factors,
    reverse_alpha_mu_product, reverse_kappa_mu_product, reverse_eta_mu_product,
    CascadeSpec, reverse_cascade_blocks, combine_blocks, reverse_cascade,
)
from lognormal_surrogates.products import NakagamiProductParams, InvNakagamiProductParams


class TestForwardSuite:

    @pytest.mark.parametrize("nu, sigma, n, m, omega_nak, omega_inv", [
        (0.5, 0.5, 5, 5.48, 4.35, 4.65),
        (-1.0, 1.0, 5, 1.69, 0.69, 2.37),
        (-1.0, 1.0, 10, 2.97, 0.80, 1.39),
        (0.5, 0.5, 10, 10.49, 4.41, 4.56),
    ])
    def test_published_parameters(self, nu, sigma, n, m, omega_nak, omega_inv):
        """Test the forward mapping reproduces the published two-decimal surrogate parameters"""
        target = Lognormal(nu, sigma)
        nak = forward_nakagami(target, n)
        assert abs(nak.m - m) <= 0.01
        assert abs(nak.omega - omega_nak) <= 0.01
        inv = forward_inv_nakagami(target, n)
        assert inv.m == nak.m
        assert abs(inv.omega - omega_inv) <= 0.01

    @pytest.mark.parametrize("family", [NAKAGAMI_PRODUCT, INV_NAKAGAMI_PRODUCT])
    @pytest.mark.parametrize("nu", [-1.0, 0.5, 3.0])
    @pytest.mark.parametrize("sigma", [0.2, 0.5, 1.0])
    @pytest.mark.parametrize("n", [2, 5, 10])
    def test_round_trip(self, family, nu, sigma, n):
        """Test the surrogate's log-statistics reproduce the target"""
        if family == INV_NAKAGAMI_PRODUCT and n < min_inv_factors(sigma):
            pytest.skip("infeasible for the inverse family")
        target = Lognormal(nu, sigma)
        solution = forward(target, n, family)
        log_mean, log_var = solution.to_product().log_stats()
        assert abs(log_mean - nu) < 1e-8
        assert abs(log_var - sigma ** 2) < 1e-8
        assert max(map(abs, solution.residuals)) < 1e-8

    def test_solution_types(self):
        target = Lognormal(0.5, 0.5)
        assert isinstance(forward(target, 3, NAKAGAMI_PRODUCT).to_product(), NakagamiProductParams)
        assert isinstance(forward(target, 3, INV_NAKAGAMI_PRODUCT).to_product(), InvNakagamiProductParams)

    def test_as_dict(self):
        solution = forward_nakagami(Lognormal(0.5, 0.5), 5)
        record = solution.as_dict()
        assert record["family"] == "nakagami-product"
        assert record["n"] == 5
        assert set(record) == {"family", "n", "m", "omega", "log_omega", "residual_nu", "residual_sigma2"}
        assert math.isclose(record["omega"], math.exp(record["log_omega"]))

    @pytest.mark.parametrize("sigma", [0.1, 0.5, 1.0, 3.0])
    def test_shape_decreases_with_sigma(self, sigma):
        assert solve_shape(sigma, 5) > solve_shape(sigma * 1.1, 5)

    def test_shape_grows_with_factors(self):
        assert solve_shape(0.5, 10) > solve_shape(0.5, 5)

    @pytest.mark.parametrize("sigma, n_min", [(0.5, 1), (1.0, 3), (2.0, 10)])
    def test_min_inverse_factors(self, sigma, n_min):
        assert min_inv_factors(sigma) == n_min
        assert n_min * math.pi ** 2 / 24 > sigma ** 2

    def test_infeasible_inverse_target(self):
        with pytest.raises(InfeasibleTarget) as exc:
            forward_inv_nakagami(Lognormal(-1.0, 1.0), 2)
        assert "use N >= 3" in exc.value.render(color=False)

    def test_just_beyond_feasibility(self):
        sigma = math.sqrt(1.0001 * 4 * math.pi ** 2 / 24)
        with pytest.raises(InfeasibleTarget):
            forward_inv_nakagami(Lognormal(0.0, sigma), 4)

    @pytest.mark.parametrize("n", [0, -2, 2.5])
    def test_invalid_factor_count(self, n):
        with pytest.raises(ParameterError):
            forward_nakagami(Lognormal(0.0, 1.0), n)


class TestReverseSuite:

    def test_alpha_mu_statistics_add(self):
        hops = [AlphaMu(4.45, 1.13, 2.98), AlphaMu(2.97, 2.95, 4.60)]
        target = reverse_alpha_mu_product(hops)
        assert math.isclose(target.nu, hops[0].log_mean() + hops[1].log_mean(), rel_tol=1e-14)
        assert math.isclose(target.sigma ** 2, hops[0].log_var() + hops[1].log_var(), rel_tol=1e-14)

    def test_kappa_mu_small_order_approaches_log_variance(self):
        """Test the moment-matched log-variance tends to the exact one as the moment order shrinks"""
        hops = [KappaMu(2.83, 2.16, 2.66), KappaMu(3.83, 4.35, 3.66)]
        exact = reverse_kappa_mu_product(hops, method=QUADRATURE)
        small = reverse_kappa_mu_product(hops, k=0.01, method=MOMENTS)
        assert abs(small.nu - exact.nu) < 1e-12
        assert abs(small.sigma ** 2 - exact.sigma ** 2) < 5e-3

    def test_eta_mu_orders_must_differ(self):
        with pytest.raises(SingularMomentOrders):
            reverse_eta_mu_product([EtaMu(2.04, 4.51, 4.50)], k1=0.5, k2=0.5)

    def test_eta_mu_lognormal_limit(self):
        """Test the two-moment fit recovers nu and sigma from the exact moments of small orders"""
        hops = [EtaMu(3.95, 1.24, 4.62), EtaMu(3.77, 1.81, 1.61)]
        fitted = reverse_eta_mu_product(hops, k1=0.01, k2=0.02)
        assert abs(fitted.nu - sum(h.log_mean() for h in hops)) < 1e-3
        assert abs(fitted.sigma ** 2 - sum(h.log_var() for h in hops)) < 1e-2

    def test_empty_block(self):
        with pytest.raises(ParameterError):
            reverse_alpha_mu_product([])


class TestCascadeSuite:

    @pytest.fixture
    def table2(self):
        return CascadeSpec.from_json(CONF.cascade_table2)

    def test_published_blocks(self, table2):
        """Test the fifteen-hop cascade blocks reproduce the published Lognormal parameters"""
        blocks = {b.family: b for b in reverse_cascade_blocks(table2)}
        assert set(blocks) == {ALPHA_MU, KAPPA_MU, ETA_MU}
        for family, (nu, sigma) in [(ALPHA_MU, (4.23, 0.67)), (KAPPA_MU, (3.94, 0.56)), (ETA_MU, (5.27, 0.60))]:
            assert abs(blocks[family].target.nu - nu) <= 0.01
            assert abs(blocks[family].target.sigma - sigma) <= 0.01
            assert blocks[family].hops == 5
        assert blocks[KAPPA_MU].orders == dict(k=0.2)
        assert blocks[ETA_MU].orders == dict(k1=0.2, k2=0.4)

    def test_combined_cascade(self, table2):
        total = reverse_cascade(table2)
        assert abs(total.nu - 13.44) <= 0.03
        blocks = reverse_cascade_blocks(table2)
        assert math.isclose(total.sigma ** 2, sum(b.target.sigma ** 2 for b in blocks), rel_tol=1e-14)

    def test_blocks_keep_first_appearance_order(self):
        spec = CascadeSpec.from_entries([
            {"family": "eta-mu", "eta": 0.5, "mu": 1.0, "r_hat": 1.0},
            {"family": "alpha-mu", "alpha": 2.0, "mu": 1.0, "r_hat": 1.0},
            {"family": "eta-mu", "eta": 0.7, "mu": 2.0, "r_hat": 1.5},
        ])
        assert [b.family for b in reverse_cascade_blocks(spec)] == [ETA_MU, ALPHA_MU]
        assert [b.hops for b in reverse_cascade_blocks(spec)] == [2, 1]

    def test_combine_blocks_adds_moments(self):
        spec = CascadeSpec.from_entries([{"family": "alpha-mu", "alpha": 2.0, "mu": 1.5, "r_hat": 1.0}] * 4)
        single = CascadeSpec.from_entries([{"family": "alpha-mu", "alpha": 2.0, "mu": 1.5, "r_hat": 1.0}] * 2)
        whole, half = reverse_cascade(spec), reverse_cascade(single)
        doubled = combine_blocks(reverse_cascade_blocks(single) * 2)
        assert math.isclose(whole.nu, 2 * half.nu, rel_tol=1e-14)
        assert math.isclose(doubled.sigma, whole.sigma, rel_tol=1e-14)

    def test_format_override(self):
        spec = CascadeSpec.from_entries([{"family": "eta-mu", "eta": 0.5, "mu": 1.0, "r_hat": 1.0}],
                                        eta_mu_format=FORMAT2)
        assert spec.hops[0].format == FORMAT2
        spec = CascadeSpec.from_entries([{"family": "eta-mu", "eta": 3.0, "mu": 1.0, "r_hat": 1.0,
                                          "format": "format1"}], eta_mu_format=FORMAT2)
        assert spec.hops[0].h == pytest.approx(4 / 3)

    @pytest.mark.parametrize("entries", [
        [{"family": "kappa-mu", "kappa": 1.0, "mu": 1.0, "r_hat": 1.0, "k": 0.2},
         {"family": "kappa-mu", "kappa": 1.0, "mu": 1.0, "r_hat": 1.0, "k": 0.3}],
        [{"family": "alpha-mu", "alpha": 2.0, "r_hat": 1.0}],
        [{"alpha": 2.0, "mu": 1.0, "r_hat": 1.0}],
        [{"family": "alpha-mu", "alpha": "wide", "mu": 1.0, "r_hat": 1.0}],
    ])
    def test_invalid_entries(self, entries):
        with pytest.raises(CascadeFileError):
            CascadeSpec.from_entries(entries)

    def test_unknown_family(self):
        with pytest.raises(ParameterError) as exc:
            CascadeSpec.from_entries([{"family": "rician", "k": 1.0}])
        assert "use one of" in exc.value.render(color=False)

    @pytest.mark.parametrize("content", ["[]", "{\"family\": \"alpha-mu\"}", "not json"])
    def test_invalid_file(self, tmp_path, content):
        path = tmp_path / "cascade.json"
        path.write_text(content)
        with pytest.raises(CascadeFileError):
            CascadeSpec.from_json(str(path))

    def test_missing_file(self, tmp_path):
        with pytest.raises(CascadeFileError):
            CascadeSpec.from_json(str(tmp_path / "missing.json"))

    def test_file_round_trip(self, tmp_path):
        # Preparation
        entries = [{"family": "alpha-mu", "alpha": 4.45, "mu": 1.13, "r_hat": 2.98}]
        path = tmp_path / "cascade.json"
        path.write_text(json.dumps(entries))

        # Execution
        spec = CascadeSpec.from_json(str(path))

        # Assertion
        assert spec.hops == (AlphaMu(4.45, 1.13, 2.98),)
