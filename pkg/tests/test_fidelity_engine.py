import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import eval_laguerre

from cvteleport.channel_model import SchemeParams, make_channel
from cvteleport.errors import NoClosedForm, UseEntanglementMetrics
from cvteleport.fidelity_engine import (
    chi_sq_bs,
    chi_sq_pa,
    closed_form_fidelity,
    entanglement_fidelity,
    fidelity_via_fock_oracle,
)
from cvteleport.fock_numerics import QuadratureGrid
from cvteleport.gaussian_core import InputSpec

COH = InputSpec.coherent(3 + 3j)
NBAR = math.sinh(1) ** 2


def radial_fock_oracle(N, sigma_sq):
    """BS Fock fidelity as a 1-D integral in u = (x^2 + y^2)/4."""
    a = 2 / sigma_sq
    val, _ = quad(lambda u: a * math.exp(-(a + 1) * u) * eval_laguerre(N, u) ** 2, 0, np.inf, epsabs=1e-13)
    return val


def test_chi_bs_values():
    for spec in (COH, InputSpec.fock(3), InputSpec.thermal(2.0)):
        assert chi_sq_bs(spec, 0.0, 0.0) == pytest.approx(1)
    assert chi_sq_bs(InputSpec.fock(1), math.sqrt(2), math.sqrt(2)) == pytest.approx(0, abs=1e-15)
    assert chi_sq_bs(InputSpec.thermal(NBAR), 2.0, 0.0) == pytest.approx(math.exp(-3.7622), abs=1e-5)
    assert chi_sq_bs(InputSpec.thermal(NBAR), 2.0, 0.0) == pytest.approx(0.02323, abs=1e-5)


@pytest.mark.parametrize("spec", [COH, InputSpec.fock(0), InputSpec.fock(4), InputSpec.thermal(NBAR)])
def test_chi_pa_reduces_without_squeezing(spec):
    x, y = np.meshgrid(np.linspace(-5, 5, 11), np.linspace(-3, 4, 8))
    assert np.allclose(chi_sq_pa(spec, x, y, 0.0), chi_sq_bs(spec, x, y), atol=1e-8)


def test_chi_pa_values():
    assert chi_sq_pa(COH, 0.0, 0.0, 0.2) < 1
    for eps in (0.1, 0.9):
        assert chi_sq_pa(InputSpec.fock(0), 0.0, 0.0, eps) == pytest.approx(1 / math.cosh(eps))


def test_epr_inputs_rejected():
    with pytest.raises(UseEntanglementMetrics):
        chi_sq_bs(InputSpec.epr(1), 0, 0)
    with pytest.raises(UseEntanglementMetrics):
        entanglement_fidelity(SchemeParams("BS", 0.9), InputSpec.epr(1))


@pytest.mark.parametrize("spec", [COH, InputSpec.fock(2), InputSpec.thermal(NBAR)])
def test_perfect_bs_channel(spec):
    assert entanglement_fidelity(SchemeParams("BS"), spec).value == pytest.approx(1)


def test_bs_values():
    p = SchemeParams("BS", 0.9)
    r = entanglement_fidelity(p, COH)
    assert r.method == "closed-form"
    assert r.value == pytest.approx(0.81)
    r = entanglement_fidelity(p, InputSpec.fock(1))
    assert r.method == "quadrature"
    s2 = make_channel(p).sigma_sq
    a = 2 / s2
    c = a + 1
    assert a == pytest.approx(4.26316, abs=1e-5)
    assert r.value == pytest.approx(a * (1 / c - 2 / c**2 + 2 / c**3), abs=1e-8)
    assert r.value == pytest.approx(0.5607, abs=1e-4)


@pytest.mark.parametrize("N", [0, 1, 2, 3, 5, 8])
@pytest.mark.parametrize("eta", [0.6, 0.85, 0.95])
def test_bs_fock_vs_radial_oracle(N, eta):
    p = SchemeParams("BS", eta)
    val = entanglement_fidelity(p, InputSpec.fock(N)).value
    assert val == pytest.approx(radial_fock_oracle(N, make_channel(p).sigma_sq), abs=1e-7)


@pytest.mark.parametrize("spec", [COH, InputSpec.thermal(NBAR), InputSpec.thermal(0.2)])
@pytest.mark.parametrize("eta", [0.55, 0.75, 0.95])
def test_bs_quadrature_matches_closed_form(spec, eta):
    p = SchemeParams("BS", eta)
    q = entanglement_fidelity(p, spec, method="quadrature")
    assert q.method == "quadrature"
    assert q.value == pytest.approx(closed_form_fidelity(p, spec).value, abs=1e-6)


def test_closed_form_values():
    assert closed_form_fidelity(SchemeParams("BS", 0.9), InputSpec.thermal(1.3811)).value == pytest.approx(
        0.5312, abs=1e-4
    )
    assert closed_form_fidelity(SchemeParams("BS"), COH).value == 1
    lossless = closed_form_fidelity(SchemeParams("PA", 1.0, R=3), COH).value
    G = math.cosh(3)
    assert lossless == pytest.approx(math.exp(-18 / (4 * G**4)), abs=1e-4)
    assert lossless == pytest.approx(0.99956, abs=1e-4)
    with pytest.raises(NoClosedForm):
        closed_form_fidelity(SchemeParams("BS", 0.9), InputSpec.fock(1))
    with pytest.raises(NoClosedForm):
        closed_form_fidelity(SchemeParams("PA", 0.9, R=2), InputSpec.thermal(1.0))
    with pytest.raises(NoClosedForm):
        closed_form_fidelity(SchemeParams("PA", 0.9, R=2), COH, form="lossless")


def test_pa_coherent_vs_closed_forms():
    p = SchemeParams("PA", 0.7, R=3)
    q = entanglement_fidelity(p, COH).value
    assert q == pytest.approx(closed_form_fidelity(p, COH, form="large-gain").value, abs=1e-3)
    assert q == pytest.approx(0.9944, abs=1e-3)
    p1 = SchemeParams("PA", 1.0, R=3)
    assert entanglement_fidelity(p1, COH).value == pytest.approx(closed_form_fidelity(p1, COH).value, abs=1e-10)


@pytest.mark.parametrize("R", [0.3, 1.0, 2.5])
def test_pa_lossless_exact(R):
    p = SchemeParams("PA", 1.0, R=R)
    spec = InputSpec.coherent(1.2 - 0.7j)
    assert entanglement_fidelity(p, spec).value == pytest.approx(
        closed_form_fidelity(p, spec, form="lossless").value, abs=1e-10
    )


@pytest.mark.parametrize("spec", [COH, InputSpec.fock(1), InputSpec.fock(5), InputSpec.thermal(NBAR)])
def test_small_squeezing_limit(spec):
    p = SchemeParams("PA", 0.7, R=6)
    sig = make_channel(p).sigma_sq
    bs_eta = math.sqrt(1 / (1 + sig / 2))  # BS scheme with the same noise
    ref = entanglement_fidelity(SchemeParams("BS", bs_eta), spec).value
    assert make_channel(SchemeParams("BS", bs_eta)).sigma_sq == pytest.approx(sig)
    assert entanglement_fidelity(p, spec).value == pytest.approx(ref, abs=1e-4)


MONOTONE_CASES = [
    (scheme, spec)
    for scheme in ("BS", 1.0, 3.0)
    for spec in (COH, InputSpec.fock(1), InputSpec.fock(5), InputSpec.thermal(NBAR))
    # large coherent amplitudes at low gain are the known exception, see below
    if not (scheme == 1.0 and spec is COH)
]


@pytest.mark.parametrize("scheme,spec", MONOTONE_CASES)
def test_monotone_in_eta(scheme, spec):
    def params(e):
        return SchemeParams("BS", e) if scheme == "BS" else SchemeParams("PA", e, R=scheme)

    vals = [entanglement_fidelity(params(e), spec).value for e in np.linspace(0.5, 1.0, 11)]
    assert np.all(np.diff(vals) >= -1e-9)


def test_low_gain_coherent_fidelity_peaks_below_unit_eta():
    # at R = 1 the residual squeezing, not the loss noise, limits |alpha|^2 = 18;
    # extra noise smears the squeezed output back over the target
    lossless = closed_form_fidelity(SchemeParams("PA", 1.0, R=1), COH, form="lossless").value
    lossy = entanglement_fidelity(SchemeParams("PA", 0.7, R=1), COH).value
    assert lossless == pytest.approx(0.264043, abs=1e-6)
    assert lossy == pytest.approx(0.273828, abs=1e-6)
    assert lossy > lossless


@pytest.mark.parametrize("eta", [0.6, 0.8, 0.95])
def test_bs_fock_drops_with_N(eta):
    vals = [entanglement_fidelity(SchemeParams("BS", eta), InputSpec.fock(n)).value for n in range(7)]
    assert np.all(np.diff(vals) < 0)


def test_large_gain_recovers_input():
    f = [entanglement_fidelity(SchemeParams("PA", 0.7, R=r), COH).value for r in (1, 3, 6)]
    assert f[2] > f[1] > f[0]
    assert f[2] > 0.99


def test_symmetric_noise_option():
    p = SchemeParams("PA", 0.7, R=1)
    a = entanglement_fidelity(p, COH).value
    b = entanglement_fidelity(p, COH, symmetric=True).value
    assert abs(a - b) > 1e-4


def test_grid_choice_does_not_matter():
    p = SchemeParams("PA", 0.6, R=0.4)
    ref = entanglement_fidelity(p, InputSpec.fock(3), grid=QuadratureGrid(nodes_per_axis=640, rel_tol=1e-9, max_nodes=2560))
    val = entanglement_fidelity(p, InputSpec.fock(3))
    assert val.value == pytest.approx(ref.value, rel=1e-6)


def test_fock_oracle_examples():
    assert fidelity_via_fock_oracle(SchemeParams("BS"), InputSpec.fock(3)).value == pytest.approx(1, abs=1e-8)
    p = SchemeParams("BS", 0.9)
    assert fidelity_via_fock_oracle(p, InputSpec.coherent(0.3 + 0.1j)).value == pytest.approx(0.81, abs=1e-4)
    assert fidelity_via_fock_oracle(p, InputSpec.fock(1)).value == pytest.approx(0.5607, abs=1e-3)


@pytest.mark.slow
@pytest.mark.parametrize("spec", [InputSpec.coherent(1 - 1j), InputSpec.fock(2)])
@pytest.mark.parametrize("p", [SchemeParams("PA", 0.8, R=1.5), SchemeParams("PA", 0.95, R=0.8)])
def test_fock_oracle_pa(spec, p):
    assert fidelity_via_fock_oracle(p, spec).value == pytest.approx(entanglement_fidelity(p, spec).value, abs=1e-4)
