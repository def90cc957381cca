"""Oracle construction tests: the purified-access definition, access-model
reductions, the encoding unitaries, garbage independence, and query counting."""
import math

import numpy as np
import pytest

from qdtest import oracles as orc
from qdtest import reference as ref
from qdtest import statevec as sv
from qdtest.distributions import (BITSTRING, Distribution, point_mass,
                                  random_distribution, uniform)

from helpers import parity_set_distribution, random_bitstring_distribution

STYLES = (("basis", None), ("haar", 99))


def oracle_columns(oracle):
    """(A, B) amplitude table of the oracle on the all-zeros input."""
    state = sv.new_basis_state(oracle.workspace_layout())
    sv.apply(oracle.op, state)
    d_a = oracle.a_reg[1]
    return state.amplitudes.reshape(d_a, -1)


# --- the purified-access definition ------------------------------------------------

def test_basis_garbage_columns():
    oracle = orc.make_purified_oracle(Distribution(np.array([0.5, 0.5])))
    table = oracle_columns(oracle)
    assert abs(table[0, 0] - math.sqrt(0.5)) < 1e-12
    assert abs(table[1, 1] - math.sqrt(0.5)) < 1e-12
    assert abs(table[0, 1]) < 1e-12 and abs(table[1, 0]) < 1e-12


def test_point_mass_is_exact():
    oracle = orc.make_purified_oracle(Distribution(np.array([1.0, 0.0])))
    table = oracle_columns(oracle)
    assert table[0, 0] == 1.0
    assert np.abs(table).sum() == 1.0


@pytest.mark.parametrize("style,seed", STYLES)
@pytest.mark.parametrize("n", [2, 5, 8, 16])
def test_definition_invariant(style, seed, n):
    """Amplitudes are sqrt(p_i) against orthonormal garbage states."""
    rng = np.random.default_rng(n)
    dist = random_distribution(n, rng)
    oracle = orc.make_purified_oracle(dist, style, seed=seed)
    table = oracle_columns(oracle)
    gram = table.conj().T @ table
    padded = np.zeros(oracle.sample_dim)
    padded[:n] = dist.weights
    assert np.abs(gram - np.diag(padded)).max() < 1e-10


def test_haar_measurement_reproduces_distribution():
    rng = np.random.default_rng(5)
    dist = random_distribution(8, rng)
    oracle = orc.make_purified_oracle(dist, "haar", seed=17)
    state = sv.new_basis_state(oracle.workspace_layout())
    sv.apply(oracle.op, state)
    outcomes = sv.sample_register(state, "B", 100000, rng)
    freq = np.bincount(outcomes, minlength=8) / 100000
    assert np.abs(freq - dist.weights).max() < 0.01


def test_invalid_distribution_rejected():
    from qdtest.distributions import DistributionError
    with pytest.raises(DistributionError):
        orc.make_purified_oracle(Distribution(np.array([0.5, 0.6])))
    with pytest.raises(ValueError):
        orc.make_purified_oracle(uniform(4), "squeezed")


# --- reductions from the other access models ----------------------------------------

def test_from_pure_state_hadamard():
    oracle = orc.from_pure_state_oracle(np.array([[1, 1], [1, -1]]) / math.sqrt(2))
    assert np.allclose(oracle.distribution.weights, [0.5, 0.5])
    table = oracle_columns(oracle)
    gram = table.conj().T @ table
    assert np.abs(gram - np.diag([0.5, 0.5])).max() < 1e-10


def test_from_pure_state_identity_is_point_mass():
    oracle = orc.from_pure_state_oracle(np.eye(4))
    assert np.allclose(oracle.distribution.weights, [1, 0, 0, 0])


def test_from_pure_state_random_prep_satisfies_definition():
    rng = np.random.default_rng(23)
    weights = random_distribution(8, rng).weights
    prep = orc.reflection_completion(np.sqrt(weights))
    oracle = orc.from_pure_state_oracle(prep)
    table = oracle_columns(oracle)
    gram = table.conj().T @ table
    assert np.abs(gram - np.diag(weights)).max() < 1e-10


def test_from_pure_state_rejects_non_unitary():
    with pytest.raises(ValueError):
        orc.from_pure_state_oracle(np.array([[1.0, 0.0], [1.0, 0.0]]))


def test_from_discrete_identity_table():
    oracle = orc.from_discrete_oracle([0, 1, 2, 3])
    assert np.allclose(oracle.distribution.weights, 0.25)


def test_from_discrete_constant_table():
    oracle = orc.from_discrete_oracle([1, 1, 1, 1], omega=4)
    assert np.allclose(oracle.distribution.weights, [0, 1, 0, 0])


def test_from_discrete_two_to_one():
    table = [0, 0, 1, 1, 2, 2, 3, 3]
    oracle = orc.from_discrete_oracle(table)
    assert np.allclose(oracle.distribution.weights, 0.25)
    cols = oracle_columns(oracle)  # A is 8-dim (inputs), B is 4-dim (outputs)
    gram = cols.conj().T @ cols
    assert np.abs(gram - np.diag([0.25] * 4)).max() < 1e-10
    # garbage states are uniform superpositions over the preimages
    phi0 = cols[:, 0] / math.sqrt(0.25)
    assert np.allclose(np.abs(phi0[:2]), math.sqrt(0.5), atol=1e-12)
    assert np.abs(phi0[2:]).max() < 1e-12


def test_discrete_oracle_works_in_encoder():
    oracle = orc.from_discrete_oracle([0, 0, 1, 2, 2, 2, 3, 3])
    enc = orc.probability_encoder(oracle)
    state = sv.new_basis_state(orc.encoder_layout(oracle))
    sv.apply(enc, state)
    assert np.abs(state.amplitudes[:8][:4] - oracle.distribution.weights).max() < 1e-10


# --- copy unitary --------------------------------------------------------------------

def test_u_copy_action():
    lay = sv.RegisterLayout([("B", 4), ("C", 4)])
    state = sv.new_basis_state(lay, {"B": 3})
    sv.apply(orc.u_copy(4), state)
    assert state.amplitude({"B": 3, "C": 3}) == 1.0
    sv.apply(orc.u_copy(4), state)  # XOR is an involution
    assert state.amplitude({"B": 3, "C": 0}) == 1.0


def test_u_copy_self_inverse_on_random_state():
    rng = np.random.default_rng(3)
    lay = sv.RegisterLayout([("B", 8), ("C", 8)])
    amps = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    state = sv.StateVector(lay, amps / np.linalg.norm(amps))
    before = state.amplitudes.copy()
    sv.apply(orc.u_copy(8), state)
    sv.apply(orc.u_copy(8), state)
    assert np.abs(state.amplitudes - before).max() < 1e-12


def test_u_copy_rejects_non_pow2():
    with pytest.raises(ValueError):
        orc.u_copy(6)


# --- probability encoder -------------------------------------------------------------

@pytest.mark.parametrize("style,seed", STYLES)
def test_probability_readout(style, seed):
    rng = np.random.default_rng(8)
    dist = random_distribution(8, rng)
    oracle = orc.make_purified_oracle(dist, style, seed=seed)
    ledger = sv.QueryLedger()
    state = sv.new_basis_state(orc.encoder_layout(oracle))
    sv.apply(orc.probability_encoder(oracle), state, ledger=ledger)
    assert np.abs(state.amplitudes[:8] - dist.weights).max() < 1e-10
    assert ledger.get(oracle.label) == {"forward": 1, "inverse": 1,
                                        "ctrl_forward": 0, "ctrl_inverse": 0}


def test_probability_readout_point_mass():
    oracle = orc.make_purified_oracle(point_mass(4, 2))
    state = sv.new_basis_state(orc.encoder_layout(oracle))
    sv.apply(orc.probability_encoder(oracle), state)
    assert abs(state.amplitude({"A": 0, "B": 0, "C": 2}) - 1.0) < 1e-12
    # no residual outside the readout component
    assert abs(sv.projector_norm_sq(state, sv.Projector({"A": 0, "B": 0})) - 1.0) < 1e-12


def test_probability_readout_padded_space():
    rng = np.random.default_rng(9)
    dist = random_distribution(6, rng)  # pads to 8
    oracle = orc.make_purified_oracle(dist, "haar", seed=2)
    state = sv.new_basis_state(orc.encoder_layout(oracle))
    sv.apply(orc.probability_encoder(oracle), state)
    readout = state.amplitudes[:8]
    assert np.abs(readout[:6] - dist.weights).max() < 1e-10
    assert np.abs(readout[6:]).max() < 1e-12


# --- closeness unitary ---------------------------------------------------------------

def closeness_mass(p, q, style="basis", seeds=(None, None)):
    op = orc.make_purified_oracle(p, style, seed=seeds[0], label="p")
    oq = orc.make_purified_oracle(q, style, seed=seeds[1], label="q")
    layout, unitary, proj = orc.closeness_instance(op, oq)
    state = sv.new_basis_state(layout)
    ledger = sv.QueryLedger()
    sv.apply(unitary, state, ledger=ledger)
    return sv.projector_norm_sq(state, proj), ledger


def test_identical_distributions_zero_mass():
    u = uniform(8)
    mass, _ = closeness_mass(u, u)
    assert mass == 0.0


def test_disjoint_point_masses():
    mass, _ = closeness_mass(point_mass(2, 0), point_mass(2, 1))
    assert abs(mass - 0.5) < 1e-10


def test_two_point_pair_mass():
    p, q = ref.gen_l2_pair(8, 0.2)
    mass, _ = closeness_mass(p, q)
    assert abs(mass - 0.2 ** 2 / 8) < 1e-12  # eps^2 / 8 = 0.005


def test_closeness_ledger_counts():
    p, q = ref.gen_l2_pair(4, 0.5)
    _, ledger = closeness_mass(p, q)
    for label in ("p", "q"):
        assert ledger.get(label) == {"forward": 0, "inverse": 0,
                                     "ctrl_forward": 1, "ctrl_inverse": 1}


def test_closeness_requires_same_space():
    p = uniform(4)
    q = uniform(8)
    op = orc.make_purified_oracle(p, label="p")
    oq = orc.make_purified_oracle(q, label="q")
    with pytest.raises(ValueError):
        orc.closeness_unitary(op, oq)


def test_closeness_requires_distinct_labels():
    p = uniform(4)
    op = orc.make_purified_oracle(p, label="p")
    oq = orc.make_purified_oracle(p, label="p")
    with pytest.raises(ValueError):
        orc.closeness_unitary(op, oq)


@pytest.mark.parametrize("n", [2, 4, 8, 16])
def test_closeness_mass_random_pairs(n):
    rng = np.random.default_rng(n + 100)
    p, q = random_distribution(n, rng), random_distribution(n, rng)
    mass, _ = closeness_mass(p, q, "haar", seeds=(1, 2))
    assert abs(mass - ref.lp_distance(p, q, 2) ** 2 / 4) < 1e-10


# --- garbage independence -------------------------------------------------------------

def test_garbage_independence_of_encoded_quantities():
    rng = np.random.default_rng(77)
    p, q = random_distribution(8, rng), random_distribution(8, rng)
    masses = []
    for style, seeds in (("basis", (None, None)), ("haar", (4, 5))):
        masses.append(closeness_mass(p, q, style, seeds)[0])
    assert abs(masses[0] - masses[1]) < 1e-10

    dist = random_bitstring_distribution(3, rng)
    amplitudes = []
    for style, seed in STYLES:
        oracle = orc.make_purified_oracle(dist, style, seed=seed)
        layout, unitary, _ = orc.kwise_instance(oracle, 2)
        state = sv.new_basis_state(layout)
        sv.apply(unitary, state)
        stride = layout.total_dim // 8
        amplitudes.append(np.array([state.amplitudes[s * stride] for s in range(8)]))
    assert np.abs(amplitudes[0] - amplitudes[1]).max() < 1e-10


# --- subset superposition and the k-wise encoder ---------------------------------------

def test_subset_superposition_n2_k1():
    op = orc.subset_superposition(2, 1)
    lay = sv.RegisterLayout([("S1", 2), ("S2", 2)])
    state = sv.new_basis_state(lay)
    sv.apply(op, state)
    # |10> and |01> each at 1/sqrt(2)
    expected = np.array([0, 1, 1, 0]) / math.sqrt(2)
    assert np.abs(state.amplitudes - expected).max() < 1e-12


@pytest.mark.parametrize("n,k,count", [(4, 2, 10), (3, 3, 7), (5, 1, 5)])
def test_subset_superposition_support(n, k, count):
    op = orc.subset_superposition(n, k)
    lay = sv.RegisterLayout([(f"S{i}", 2) for i in range(1, n + 1)])
    state = sv.new_basis_state(lay)
    sv.apply(op, state)
    amps = state.amplitudes
    support = np.flatnonzero(np.abs(amps) > 1e-12)
    assert len(support) == count == ref.binom_sum(n, k)
    assert np.abs(amps[support] - 1 / math.sqrt(count)).max() < 1e-12
    sizes = [bin(x).count("1") for x in support]
    assert min(sizes) >= 1 and max(sizes) <= k


def test_subset_superposition_range_check():
    with pytest.raises(ValueError):
        orc.subset_superposition(3, 0)
    with pytest.raises(ValueError):
        orc.subset_superposition(3, 4)


def kwise_amplitudes(dist, k, style="basis", seed=None):
    oracle = orc.make_purified_oracle(dist, style, seed=seed)
    layout, unitary, proj = orc.kwise_instance(oracle, k)
    state = sv.new_basis_state(layout)
    ledger = sv.QueryLedger()
    sv.apply(unitary, state, ledger=ledger)
    n = dist.n_bits
    stride = layout.total_dim // 2 ** n
    amps = np.array([state.amplitudes[s * stride] for s in range(2 ** n)])
    return amps, sv.projector_norm_sq(state, proj), ledger.get(oracle.label)


def test_kwise_uniform_has_zero_amplitudes():
    amps, mass, _ = kwise_amplitudes(uniform(16, BITSTRING), 2)
    assert np.abs(amps).max() < 1e-12
    assert mass < 1e-20


def test_kwise_spike_amplitude():
    mask = ref.mask_from_coords(4, (2, 3))
    dist = ref.gen_fourier_spike(4, mask, 0.3)
    amps, _, counts = kwise_amplitudes(dist, 2)
    scale = math.sqrt(ref.binom_sum(4, 2))
    for s in range(16):
        expected = 0.3 / scale if s == mask else 0.0
        assert abs(amps[s] - expected) < 1e-10
    assert counts == {"forward": 1, "inverse": 1, "ctrl_forward": 0, "ctrl_inverse": 0}


@pytest.mark.parametrize("style,seed", STYLES)
def test_kwise_amplitudes_match_fourier(style, seed):
    rng = np.random.default_rng(31)
    dist = random_bitstring_distribution(3, rng)
    amps, mass, _ = kwise_amplitudes(dist, 2, style, seed)
    scale = math.sqrt(ref.binom_sum(3, 2))
    expected_mass = 0.0
    for s in range(8):
        size = bin(s).count("1")
        want = ref.fourier_coefficient(dist, s) / scale if 1 <= size <= 2 else 0.0
        assert abs(amps[s] - want) < 1e-10
        expected_mass += want ** 2
    assert abs(mass - expected_mass) < 1e-10


def test_kwise_parity_set_is_exact_zero_mass():
    dist = parity_set_distribution(4)
    _, mass, _ = kwise_amplitudes(dist, 2)
    assert mass < 1e-20


def test_kwise_fourier_identity_via_character_probability():
    """The amplitude equals (1 - 2 Pr_{x~p}[chi_S(x) = -1]) / sqrt(M)."""
    rng = np.random.default_rng(41)
    dist = random_bitstring_distribution(4, rng)
    amps, _, _ = kwise_amplitudes(dist, 3)
    scale = math.sqrt(ref.binom_sum(4, 3))
    for s in range(1, 16):
        if bin(s).count("1") > 3:
            continue
        chars = ref.character_values(4, s)
        prob_minus = float(dist.weights[chars < 0].sum())
        assert abs(amps[s] - (1 - 2 * prob_minus) / scale) < 1e-10


def test_kwise_encoder_requires_bitstring():
    with pytest.raises(ValueError):
        orc.kwise_encoder(orc.make_purified_oracle(uniform(4)), 1)


def test_kwise_encoder_k_range():
    oracle = orc.make_purified_oracle(uniform(8, BITSTRING))
    with pytest.raises(ValueError):
        orc.kwise_encoder(oracle, 0)
    with pytest.raises(ValueError):
        orc.kwise_encoder(oracle, 4)


# --- completion helpers ----------------------------------------------------------------

def test_reflection_completion_first_column():
    rng = np.random.default_rng(6)
    v = np.abs(rng.standard_normal(16))
    v /= np.linalg.norm(v)
    mat = orc.reflection_completion(v)
    assert np.abs(mat[:, 0] - v).max() < 1e-14
    assert np.abs(mat.T @ mat - np.eye(16)).max() < 1e-12


def test_haar_unitary_is_unitary():
    rng = np.random.default_rng(12)
    u = orc.haar_unitary(16, rng)
    assert np.abs(u.conj().T @ u - np.eye(16)).max() < 1e-12
