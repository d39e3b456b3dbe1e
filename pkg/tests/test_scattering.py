"""Scattering matrix: closed form, time iteration, unitarity, transmission."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from tailwalk import build_E
from tailwalk.internal_spectral import spectral_decompose
from tailwalk.scattering import (
    NoConvergence,
    SigmaEvaluator,
    closed_form_sigma,
    stationary_iterate,
    transmission_curve,
    unitarity_defect,
)


def test_sigma_is_identity_at_zero_coupling(im_c4a):
    ev = SigmaEvaluator(im_c4a.at(0.0))
    for lam in (0.3, 1.0, 2.5):
        assert_allclose(ev.sigma(lam), np.eye(3), atol=1e-14)


def test_unitarity_on_a_grid(suite_graphs):
    for name, tg in suite_graphs.items():
        im = build_E(tg, 0.25)
        ev = SigmaEvaluator(im)
        for lam in np.linspace(0.0, 2 * np.pi, 37):
            d = unitarity_defect(ev.sigma(lam))
            assert d < 1e-9, f"{name}: defect {d:.2e} at lam={lam:.3f}"


def test_embedded_states_do_not_couple_to_ports(im_k4a):
    # the persistent eigenvalues at +-1 stay on the circle at eps = 0.25;
    # the closed form is only valid because their port coupling vanishes
    ev = SigmaEvaluator(im_k4a.at(0.25))
    on = [c for c in ev.sd.clusters if c.on_circle]
    assert len(on) == 2
    assert ev.skipped_coupling < 1e-12


def test_closed_form_against_time_iteration(im_c4a):
    """Two independent routes to Sigma(lambda): spectral sum vs dynamics."""
    im = im_c4a.at(0.25)
    sd = spectral_decompose(im.E)
    rng = np.random.default_rng(42)
    lams = [0.7, 2.1, np.pi]  # exp(-i pi) = -1 sits on top of a persistent state
    for lam in lams:
        alpha = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        alpha /= np.linalg.norm(alpha)
        rec = stationary_iterate(im, lam, alpha)
        direct = closed_form_sigma(im, lam, sd=sd) @ alpha
        assert_allclose(rec.outgoing, direct, atol=1e-7)
        assert rec.method == "iteration"
        assert rec.steps > 0 and rec.window_delta >= 0.0


def test_iteration_on_the_embedded_value_k4(im_k4a):
    # z = exp(-i lam) = -1 is an embedded eigenvalue of E at eps=0.25 on K4;
    # the iteration must still converge because the inflow never excites it
    im = im_k4a.at(0.25)
    lam = np.pi
    alpha = np.zeros(3, dtype=complex)
    alpha[0] = 1.0
    rec = stationary_iterate(im, lam, alpha)
    direct = closed_form_sigma(im, lam) @ alpha
    assert_allclose(rec.outgoing, direct, atol=1e-7)


def test_iteration_raises_when_budget_too_small(im_c4a):
    im = im_c4a.at(0.25)
    with pytest.raises(NoConvergence):
        stationary_iterate(im, 0.9, np.array([1.0, 0, 0]), max_steps=25)


def test_outflow_norm_equals_inflow_norm(im_k4a):
    im = im_k4a.at(0.5)
    ev = SigmaEvaluator(im)
    rng = np.random.default_rng(3)
    for lam in (0.2, 1.4, 4.0):
        a = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        assert_allclose(
            np.linalg.norm(ev.sigma(lam) @ a), np.linalg.norm(a), rtol=1e-10
        )


class TestTransmissionCurve:
    def test_flux_conservation(self, im_c4a):
        im = im_c4a.at(0.25)
        grid = np.linspace(0, 2 * np.pi, 65)
        out = transmission_curve(im, grid, inflow=0)
        assert set(out) == {
            "lambda",
            "re_exp_minus_i_lambda",
            "im_exp_minus_i_lambda",
            "tau_sq",
            "reflection_sq",
        }
        assert_allclose(out["tau_sq"] + out["reflection_sq"], 1.0, atol=1e-12)
        assert np.all(out["tau_sq"] >= -1e-13)
        z = out["re_exp_minus_i_lambda"] + 1j * out["im_exp_minus_i_lambda"]
        assert_allclose(z, np.exp(-1j * grid), atol=1e-14)

    def test_zero_coupling_transmits_nothing(self, im_c4a):
        out = transmission_curve(im_c4a.at(0.0), np.linspace(0, 3, 7), inflow=1)
        assert_allclose(out["tau_sq"], 0.0, atol=1e-13)
        assert_allclose(out["reflection_sq"], 1.0, atol=1e-13)

    def test_vector_inflow_is_normalised(self, im_k4a):
        im = im_k4a.at(0.25)
        out = transmission_curve(im, np.array([1.0]), inflow=[2.0, 0.0, 0.0])
        assert_allclose(out["tau_sq"] + out["reflection_sq"], 1.0, atol=1e-12)
        with pytest.raises(ValueError):
            transmission_curve(im, np.array([1.0]), inflow=[1.0, 0.0])
        with pytest.raises(ValueError):
            transmission_curve(im, np.array([1.0]), inflow=7)


@settings(max_examples=15, deadline=None)
@given(
    st.floats(min_value=0.05, max_value=0.95),
    st.floats(min_value=0.0, max_value=2 * np.pi),
)
def test_unitarity_property(eps, lam):
    from tailwalk import attach_tails, preset_graph

    tg = attach_tails(preset_graph("cycle:4"), (0, 1, 3))
    sigma = closed_form_sigma(build_E(tg, eps), lam)
    assert unitarity_defect(sigma) < 1e-9
