import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qvernam.channels import (
    PRESETS,
    InterceptResendAttack,
    PauliChannel,
    UnitaryAttack,
    apply_intercept_resend,
    apply_pauli_channel,
    apply_unitary_attack,
    channel_entropy,
    preset,
    shannon,
)
from qvernam.sim import DenseState, StabilizerState, partial_trace, random_state


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_preset_class_frequencies(name, rng):
    ch = preset(name, 3)
    x, z = ch.sample_bits(rng, 40_000)
    cls = x + 2 * z
    for code, label in enumerate(["I", "X", "Z", "XZ"]):
        want = PRESETS[name].get(label, 0.0)
        got = (cls == code).mean()
        assert abs(got - want) < 5 * np.sqrt(want * (1 - want) / cls.size) + 1e-12


@pytest.mark.parametrize(
    "name, bits",
    [("noiseless", 0.0), ("z-measure-all", 1.0), ("depolarizing-complete", 2.0), ("paper-mix", 0.5 + 0.5 * np.log2(6))],
)
def test_preset_entropy(name, bits):
    assert channel_entropy(preset(name, 4)) == pytest.approx(4 * bits)


def test_targets_restrict_errors(rng):
    ch = preset("depolarizing-complete", 5, targets=[1, 3])
    x, z = ch.sample_bits(rng, 500)
    assert not (x[:, [0, 2, 4]].any() or z[:, [0, 2, 4]].any())
    assert ch.marginal(0)["I"] == 1.0


def test_explicit_distribution(rng):
    ch = PauliChannel(2, distribution={"X0": 0.25, "Z1": 0.75})
    x, z = ch.sample_bits(rng, 4000)
    assert abs(x[:, 0].mean() - 0.25) < 0.03
    assert not x[:, 1].any()
    zr, xr = ch.flag_rates()
    assert np.allclose(zr, [0, 0.75]) and np.allclose(xr, [0.25, 0])


@pytest.mark.parametrize("bad", [{"I": 0.5}, {"I": 1.5, "X": -0.5}, {"Q": 1.0}])
def test_bad_distributions_rejected(bad):
    with pytest.raises(ValueError):
        PauliChannel(1, per_qubit=bad)


def test_unknown_preset():
    with pytest.raises(ValueError):
        preset("amplitude-damping", 1)


@given(st.lists(st.floats(0.01, 1.0), min_size=1, max_size=8))
def test_shannon_bounds(weights):
    p = np.array(weights) / sum(weights)
    h = shannon(p)
    assert -1e-12 <= h <= np.log2(len(p)) + 1e-12


def test_apply_channel_checks_width(rng):
    with pytest.raises(ValueError):
        apply_pauli_channel(StabilizerState(3), preset("noiseless", 2), [0, 1, 2], rng)


def test_unitary_attack_reproduces_pauli_channel(rng):
    ch = PauliChannel(1, distribution={"I": 0.5, "X0": 0.3, "Z0": 0.2})
    attack = UnitaryAttack.from_pauli_channel(ch)
    psi = random_state(1, rng)
    out, anc = apply_unitary_attack(psi.copy(), attack, [0])
    rho = partial_trace(out.amp, [0], out.n)
    r0 = psi.density_matrix()
    X = np.array([[0, 1], [1, 0]])
    Z = np.diag([1, -1])
    want = 0.5 * r0 + 0.3 * X @ r0 @ X + 0.2 * Z @ r0 @ Z
    assert np.allclose(rho, want, atol=1e-12)


def test_unitary_attack_validates():
    with pytest.raises(ValueError):
        UnitaryAttack(1, np.ones((4, 4)))
    with pytest.raises(ValueError):
        UnitaryAttack.from_pauli_channel(preset("paper-mix", 1))


def test_intercept_resend_collapses(rng):
    s = DenseState(1).apply("H", 0)
    s, rec = apply_intercept_resend(s, InterceptResendAttack([0], "z"), rng)
    (q, basis, bit), = rec
    assert (q, basis) == (0, "z")
    assert abs(abs(s.amp[bit]) - 1) < 1e-12


def test_intercept_bad_basis():
    with pytest.raises(ValueError):
        InterceptResendAttack([0], "y")
