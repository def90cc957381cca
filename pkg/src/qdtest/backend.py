"""Kernel backend selection: numba-jitted inner loops with a pure-numpy fallback.

Every experiment spends nearly all of its time applying small dense operators,
index permutations, and sign flips to slices of a large complex state vector,
tens of thousands of times inside phase-estimation power loops.  Both backends
implement the same three primitives on identical precomputed index plans, so
they are interchangeable bit-for-bit up to floating-point rounding.

The environment variable ``QDTEST_KERNELS`` picks the backend at import time
(``numba`` or ``numpy``); the default is numba when it is importable.  Tests
and the benchmark switch at runtime via :func:`set_backend`.
"""
from __future__ import annotations

import os

import numpy as np

ENV_VAR = "QDTEST_KERNELS"

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False


# --- numpy implementations ---------------------------------------------------

def _np_apply_matrix(state: np.ndarray, mat_t: np.ndarray,
                     bases: np.ndarray, targets: np.ndarray) -> None:
    """In-place ``block <- block @ mat_t`` on every gathered register block."""
    idx = bases[:, None] + targets[None, :]
    state[idx] = state[idx] @ mat_t


def _np_apply_reflection(state: np.ndarray, w: np.ndarray, denom: float,
                         bases: np.ndarray, targets: np.ndarray) -> None:
    """In-place Householder ``block <- block - (block @ w) w^T / denom``."""
    idx = bases[:, None] + targets[None, :]
    block = state[idx]
    state[idx] = block - np.outer(block @ w, w / denom)


def _np_gather(state: np.ndarray, gather: np.ndarray) -> None:
    """In-place permutation ``state[i] <- state[gather[i]]``."""
    state[:] = state[gather]


def _np_sign_flip(state: np.ndarray, indices: np.ndarray) -> None:
    state[indices] *= -1.0


# --- numba implementations ---------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True)
    def _nb_apply_matrix(state, mat_t, bases, targets):
        nb = bases.size
        m = targets.size
        if m <= 48:
            # small operators: fused gather/mat-vec/scatter beats BLAS dispatch
            x = np.empty(m, np.complex128)
            for i in range(nb):
                b = bases[i]
                for k in range(m):
                    x[k] = state[b + targets[k]]
                for j in range(m):
                    acc = 0.0 + 0.0j
                    for k in range(m):
                        acc += x[k] * mat_t[k, j]
                    state[b + targets[j]] = acc
        else:
            block = np.empty((nb, m), np.complex128)
            for i in range(nb):
                b = bases[i]
                for j in range(m):
                    block[i, j] = state[b + targets[j]]
            out = np.dot(block, mat_t)
            for i in range(nb):
                b = bases[i]
                for j in range(m):
                    state[b + targets[j]] = out[i, j]

    @njit(cache=True)
    def _nb_apply_reflection(state, w, denom, bases, targets):
        nb = bases.size
        m = targets.size
        for i in range(nb):
            b = bases[i]
            s = 0.0 + 0.0j
            for k in range(m):
                s += state[b + targets[k]] * w[k]
            s /= denom
            for k in range(m):
                state[b + targets[k]] -= s * w[k]

    @njit(cache=True)
    def _nb_gather(state, gather):
        scratch = np.empty_like(state)
        for i in range(gather.size):
            scratch[i] = state[gather[i]]
        state[:] = scratch

    @njit(cache=True)
    def _nb_sign_flip(state, indices):
        for i in range(indices.size):
            state[indices[i]] = -state[indices[i]]


_BACKENDS = {"numpy": (_np_apply_matrix, _np_apply_reflection, _np_gather, _np_sign_flip)}
if HAVE_NUMBA:
    _BACKENDS["numba"] = (_nb_apply_matrix, _nb_apply_reflection, _nb_gather, _nb_sign_flip)

# Populated by set_backend below; module-level so the statevec hot path pays a
# single dict-free attribute lookup.
apply_matrix = None
apply_reflection = None
gather = None
sign_flip = None
_ACTIVE = ""


def set_backend(name: str) -> None:
    """Select the kernel implementation (``"numba"`` or ``"numpy"``)."""
    global apply_matrix, apply_reflection, gather, sign_flip, _ACTIVE
    if name not in _BACKENDS:
        available = ", ".join(sorted(_BACKENDS))
        raise ValueError(f"unknown kernel backend {name!r} (available: {available})")
    apply_matrix, apply_reflection, gather, sign_flip = _BACKENDS[name]
    _ACTIVE = name


def active_backend() -> str:
    return _ACTIVE


def warmup() -> None:
    """Trigger jit compilation on tiny inputs so timings exclude it."""
    state = np.array([1.0 + 0j, 0.0j])
    bases = np.zeros(1, np.int64)
    targets = np.arange(2, dtype=np.int64)
    apply_matrix(state, np.eye(2, dtype=complex), bases, targets)
    apply_reflection(state, np.zeros(2), 1.0, bases, targets)
    gather(state, np.arange(2, dtype=np.int64))
    sign_flip(state, bases)


def _default_backend() -> str:
    choice = os.environ.get(ENV_VAR, "").strip().lower()
    if choice:
        if choice not in _BACKENDS:
            raise ValueError(
                f"{ENV_VAR}={choice!r} is not available; use one of: "
                + ", ".join(sorted(_BACKENDS)))
        return choice
    return "numba" if HAVE_NUMBA else "numpy"


set_backend(_default_backend())
