import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qvernam.channels import PauliChannel, preset
from qvernam.pqc import (
    ClassicalPauliKey,
    ReplacementAttack,
    allocate_mpqc,
    analyze_acceptance,
    announce_layout,
    authenticate_message,
    frame_acceptance,
    key_average,
    mpqc_decode_accept,
    mpqc_encode,
    pqc_decrypt,
    pqc_encrypt,
    predict_test_flips,
    residual_data_error,
)
from qvernam import pqc
from qvernam.rng import stream
from qvernam.sim import BellLabel, DenseState, PauliOperator, bell_identify, random_density, random_state
from qvernam.transcript import Transcript, TranscriptOrderError


# bound to a non-Test name so pytest does not try to collect the class
Layout = pqc.TestQubitLayout


@pytest.mark.parametrize("n", [1, 2, 3])
def test_key_average_is_maximally_mixed(n, rng):
    rho = random_density(n, rng)
    assert np.allclose(key_average(rho), np.eye(2**n) / 2**n, atol=1e-12)


@given(st.lists(st.integers(0, 1), min_size=4, max_size=4), st.integers(0, 2**31 - 1))
def test_encrypt_then_decrypt(bits, seed):
    psi = random_state(2, np.random.default_rng(seed))
    s = psi.copy()
    key = ClassicalPauliKey(bits)
    pqc_decrypt(pqc_encrypt(s, [0, 1], key), [0, 1], key)
    assert np.allclose(s.amp, psi.amp)


def test_key_bit_layout():
    key = ClassicalPauliKey([1, 0, 0, 1])
    assert key.to_pauli() == PauliOperator(np.array([1, 0]), np.array([0, 1]))
    with pytest.raises(ValueError):
        ClassicalPauliKey([1, 0, 1])
    with pytest.raises(ValueError):
        pqc_encrypt(DenseState(1), [0], key)


def test_layout_shapes_and_single_use(rng):
    lay = Layout.random(3, 2, rng)
    assert lay.Sx.shape == (2, 3) and lay.Sz.shape == (2, 3) and lay.T.shape == (2, 2)
    assert lay.flip.shape == (4,)
    regs = allocate_mpqc(3, 2, "frame")
    mpqc_encode(regs, None, lay)
    with pytest.raises(ValueError):
        mpqc_encode(allocate_mpqc(3, 2, "frame"), None, lay)


def test_layout_default_keeps_empty_subsets():
    lay = Layout.random(1, 200, stream(2))
    assert not lay.Sx.all()
    lay = Layout.random(1, 200, stream(2), resample_empty=True)
    assert lay.Sx.any(axis=1).all()


def _tableau_accepts(x, z, n, r, lay, rng):
    regs = allocate_mpqc(n, r, "stabilizer")
    mpqc_encode(regs, None, lay)
    regs.state.apply_pauli(PauliOperator(x, z), regs.cipher)
    t = Transcript()
    t.post("bob", "receipt")
    accept, _ = mpqc_decode_accept(regs, None, lay, t, rng)
    labels = [bell_identify(regs.state, (d, q)) for d, q in zip(regs.data, regs.reference)]
    return accept, labels


cipher_errors = st.integers(1, 2).flatmap(
    lambda n: st.integers(1, 2).flatmap(
        lambda r: st.tuples(
            st.just(n),
            st.just(r),
            st.lists(st.integers(0, 1), min_size=n + 2 * r, max_size=n + 2 * r),
            st.lists(st.integers(0, 1), min_size=n + 2 * r, max_size=n + 2 * r),
            st.integers(0, 2**31 - 1),
        )
    )
)


@given(cipher_errors)
@settings(max_examples=60, deadline=None)
def test_predictor_matches_tableau(case):
    n, r, x, z, seed = case
    rng = np.random.default_rng(seed)
    x = np.array(x, np.uint8)
    z = np.array(z, np.uint8)
    lay = Layout.random(n, r, rng)
    accept, labels = _tableau_accepts(x, z, n, r, lay, rng)
    xf, zf = predict_test_flips(x, z, lay.Sx, lay.Sz, lay.T)
    assert accept == (not xf.any() and not zf.any())
    rx, rz = residual_data_error(x, z, lay.Sx, lay.Sz, lay.T)
    assert [lab.value for lab in labels] == [(int(b), int(a)) for a, b in zip(rx, rz)]


def test_identity_always_accepted(rng):
    acc, bad = frame_acceptance(np.zeros(5, np.uint8), np.zeros(5, np.uint8), 1, 2, 1000, rng)
    assert acc.all() and not bad.any()


def test_single_data_flip_rate(rng):
    x = np.array([1, 0, 0, 0, 0, 0, 0], np.uint8)
    acc, bad = frame_acceptance(x, np.zeros(7, np.uint8), 1, 3, 40_000, rng)
    assert abs(acc.mean() - 2**-3) < 5 * np.sqrt(2**-3 / 40_000)
    assert bad[acc].all()


def test_layout_only_after_receipt(rng):
    lay = Layout.random(1, 1, rng)
    with pytest.raises(TranscriptOrderError):
        announce_layout(Transcript(), lay)


def test_full_cipher_decrypts(rng):
    psi = random_state(2, rng)
    regs = allocate_mpqc(2, 2, "dense", message=psi)
    key = ClassicalPauliKey.generate(2, rng)
    lay = Layout.random(2, 2, rng)
    mpqc_encode(regs, key, lay)
    t = Transcript()
    t.post("bob", "receipt")
    accept, recyclable = mpqc_decode_accept(regs, key, lay, t, rng)
    assert accept and recyclable
    rho = regs.state.density_matrix(regs.data)
    assert np.real(np.vdot(psi.amp, rho @ psi.amp)) == pytest.approx(1, abs=1e-9)


def test_authenticate_message_noiseless_and_replacement(rng):
    psi = random_state(1, rng)
    ok, fid = authenticate_message(psi, Layout.random(1, 2, rng), None, rng)
    assert ok and fid == pytest.approx(1, abs=1e-9)
    rejected = 0
    for t in range(200):
        ok, _ = authenticate_message(psi, Layout.random(1, 2, stream(9, t)), ReplacementAttack(), stream(9, t, 1))
        rejected += not ok
    assert rejected > 100


def test_analyze_acceptance_bounds(rng):
    ch = PauliChannel(1, per_qubit={"I": 0.7, "X": 0.1, "Z": 0.1, "XZ": 0.1})
    ana = analyze_acceptance(ch, 1, 3, 5000, rng)
    assert ana.coefficients["I" * 7] == 1.0
    assert ana.prob_accept <= ana.upper_bound + 0.02
    assert ana.eve_entropy_bound_bits is not None and 0 <= ana.eve_entropy_bound_bits <= 1
    assert set(ana.to_json_dict()) >= {"probAccept", "maxNontrivialC", "eveEntropyBoundBits"}
    with pytest.raises(ValueError):
        analyze_acceptance(ch, 1, 3, 10, rng)


def test_wegman_carter_key_size():
    from qvernam.pqc import wegman_carter_key_size

    assert wegman_carter_key_size(1024, 32) == (2308, 1426)
    with pytest.raises(ValueError):
        wegman_carter_key_size(0, 1)
