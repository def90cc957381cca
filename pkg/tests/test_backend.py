"""Kernel backend tests: the numba and numpy paths agree on identical plans,
and the environment flag selects the implementation."""
import numpy as np
import pytest

from qdtest import backend
from qdtest import oracles as orc
from qdtest import reference as ref
from qdtest import statevec as sv
from qdtest.amplitude import phase_distribution

from helpers import haar_state


@pytest.fixture(autouse=True)
def restore_backend():
    before = backend.active_backend()
    yield
    backend.set_backend(before)


needs_numba = pytest.mark.skipif(not backend.HAVE_NUMBA, reason="numba unavailable")


def test_set_backend_rejects_unknown():
    with pytest.raises(ValueError):
        backend.set_backend("fortran")


def test_env_flag_selection(monkeypatch):
    monkeypatch.setenv(backend.ENV_VAR, "numpy")
    assert backend._default_backend() == "numpy"
    monkeypatch.setenv(backend.ENV_VAR, "cuda")
    with pytest.raises(ValueError):
        backend._default_backend()
    monkeypatch.delenv(backend.ENV_VAR)
    assert backend._default_backend() in ("numba", "numpy")


@needs_numba
def test_primitives_agree():
    rng = np.random.default_rng(1)
    state = haar_state(64, rng)
    mat = orc.haar_unitary(8, rng)
    bases = np.arange(0, 64, 8, dtype=np.int64)
    targets = np.arange(8, dtype=np.int64)
    w = np.abs(rng.standard_normal(8))
    gather = rng.permutation(64).astype(np.int64)
    flips = np.flatnonzero(rng.random(64) < 0.3).astype(np.int64)

    results = {}
    for name in ("numpy", "numba"):
        backend.set_backend(name)
        s1, s2, s3, s4 = state.copy(), state.copy(), state.copy(), state.copy()
        backend.apply_matrix(s1, np.ascontiguousarray(mat.T), bases, targets)
        backend.apply_reflection(s2, w, 1.7, bases, targets)
        backend.gather(s3, gather)
        backend.sign_flip(s4, flips)
        results[name] = (s1, s2, s3, s4)
    for a, b in zip(results["numpy"], results["numba"]):
        assert np.abs(a - b).max() < 1e-14


@needs_numba
def test_full_pipeline_agrees_across_backends():
    """The whole estimation pipeline gives the same distribution either way."""
    p, q = ref.gen_l2_pair(6, 0.4)
    probs = {}
    for name in ("numpy", "numba"):
        backend.set_backend(name)
        op = orc.make_purified_oracle(p, "haar", seed=3, label="p")
        oq = orc.make_purified_oracle(q, "haar", seed=4, label="q")
        layout, unitary, proj = orc.closeness_instance(op, oq)
        probs[name] = phase_distribution(unitary, layout, proj, 64).probs
    assert np.abs(probs["numpy"] - probs["numba"]).max() < 1e-12


@needs_numba
def test_warmup_runs():
    backend.set_backend("numba")
    backend.warmup()
