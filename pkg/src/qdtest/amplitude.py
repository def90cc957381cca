"""Amplitude estimation via quantum phase estimation, and the zero tester.

Given a unitary U and projector Pi with p = ||Pi U|0>||^2, the estimator runs
phase estimation on the reflection product Q = -U S0 U^dagger S_Pi applied to
U|0>: a uniform M-point phase register is entangled with the powers Q^y of the
iterate, the inverse Fourier transform is taken along the phase axis, the
phase register is measured once, and the estimate sin^2(pi y / M) is returned.
M = 2^m is the least power of two at or above the requested iteration budget
t, so the guarantee

    |estimate - p| <= 2 pi sqrt(p (1-p)) / M + pi^2 / M^2

holds with probability at least 8/pi^2, and the estimate is exactly 0 with
certainty when p = 0.

One estimation run applies the target unitary forward M times (one initial
preparation plus M-1 iterate steps) and inverse M-1 times, all visible in the
query ledger.  The full M x dim power table is never kept entangled with a
materialized phase register; the measurement distribution is reduced
column-chunk by column-chunk from the Fourier transform of the power table,
which is the same Born rule with O(M * dim) memory (:func:`qpe_joint_state`
materializes the joint state for small systems as a cross-check).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .statevec import (MatrixOp, PhaseFlipOp, Projector, QuantumOp,
                       QueryLedger, RegisterLayout, SequenceOp, StateVector,
                       apply, inverse, new_basis_state, projector_norm_sq)

_FFT_CHUNK_ELEMENTS = 1 << 22


@dataclass(frozen=True)
class AEConfig:
    """Iteration budget t and the derived phase-register size M = 2^m >= t."""

    t: int

    def __post_init__(self):
        if self.t < 1:
            raise ValueError(f"iteration budget must be positive, got {self.t}")

    @property
    def phase_bits(self) -> int:
        return max(0, int(math.ceil(math.log2(self.t))))

    @property
    def points(self) -> int:
        return 1 << self.phase_bits


@dataclass(frozen=True)
class AEResult:
    """One estimation outcome: the phase draw y and the estimate sin^2(pi y/M)."""

    estimate: float
    phase_outcome: int
    t: int
    points: int
    queries: dict | None = None


class AEDistribution:
    """Exact outcome distribution of one estimation setup.

    The phase-register measurement distribution is deterministic given
    (U, Pi, t); sampling from it repeatedly is exactly repeating the
    estimation, and ``ledger_cost`` holds the deterministic per-run query
    counts.
    """

    __slots__ = ("t", "points", "probs", "_cdf", "ledger_cost")

    def __init__(self, t: int, points: int, probs: np.ndarray, ledger_cost: QueryLedger):
        self.t = t
        self.points = points
        self.probs = probs
        self._cdf = np.cumsum(probs)
        self.ledger_cost = ledger_cost

    def sample(self, rng: np.random.Generator) -> AEResult:
        y = int(np.searchsorted(self._cdf, rng.random(), side="right"))
        y = min(y, self.points - 1)
        return AEResult(estimate=estimate_from_phase(y, self.points),
                        phase_outcome=y, t=self.t, points=self.points)


def estimate_from_phase(y: int, points: int) -> float:
    return math.sin(math.pi * y / points) ** 2


def grover_iterate(unitary: QuantumOp, layout: RegisterLayout,
                   projector: Projector) -> QuantumOp:
    """The reflection product Q = -U S0 U^dagger S_Pi.

    S_Pi = I - 2 Pi and S0 = I - 2|0...0><0...0| over the full layout; the
    global minus sign is folded into the middle reflection so the iterate's
    eigenphases are exactly +/- 2 theta with sin^2(theta) = ||Pi U|0>||^2.
    One application costs one forward and one inverse application of U.
    """
    s_pi = PhaseFlipOp(dict(projector.fixed))
    neg_s0 = PhaseFlipOp({name: 0 for name in layout.names}, complement=True)
    return SequenceOp([s_pi, inverse(unitary), neg_s0, unitary])


def _power_table(unitary: QuantumOp, layout: RegisterLayout, projector: Projector,
                 points: int, ledger: QueryLedger | None) -> np.ndarray:
    """Rows y = Q^y U|0> for y in 0..points-1."""
    state = new_basis_state(layout)
    apply(unitary, state, ledger=ledger)
    iterate = grover_iterate(unitary, layout, projector)
    table = np.empty((points, layout.total_dim), dtype=np.complex128)
    table[0] = state.amplitudes
    for y in range(1, points):
        apply(iterate, state, ledger=ledger)
        table[y] = state.amplitudes
    return table


def _phase_probs(table: np.ndarray) -> np.ndarray:
    """Measurement distribution of the phase register after the inverse DFT.

    The joint amplitudes are table[y, s] / sqrt(M); the inverse Fourier
    transform along the phase axis is fft/sqrt(M), so the outcome mass is
    sum_s |fft(table)[y, s]|^2 / M^2, accumulated in column chunks to avoid a
    second full-size array.
    """
    points, dim = table.shape
    probs = np.zeros(points, dtype=np.float64)
    step = max(1, _FFT_CHUNK_ELEMENTS // points)
    for lo in range(0, dim, step):
        chunk = np.fft.fft(table[:, lo:lo + step], axis=0)
        probs += (chunk.real ** 2 + chunk.imag ** 2).sum(axis=1)
    probs /= float(points) ** 2
    total = probs.sum()
    if abs(total - 1.0) > 1e-9:
        raise AssertionError(f"phase distribution sums to {total}, not 1")
    return probs / total


def phase_distribution(unitary: QuantumOp, layout: RegisterLayout,
                       projector: Projector, t: int, *,
                       ledger: QueryLedger | None = None) -> AEDistribution:
    """Exact phase-measurement distribution for one estimation setup.

    Query counts for the single run it represents are recorded both in the
    passed ledger and in the returned object's ``ledger_cost``.
    """
    cfg = AEConfig(t)
    cost = QueryLedger()
    table = _power_table(unitary, layout, projector, cfg.points, cost)
    probs = _phase_probs(table)
    del table
    if ledger is not None:
        ledger.merge(cost)
    return AEDistribution(cfg.t, cfg.points, probs, cost)


def amplitude_estimation(unitary: QuantumOp, layout: RegisterLayout,
                         projector: Projector, t: int, rng: np.random.Generator,
                         *, ledger: QueryLedger | None = None) -> AEResult:
    """Run one estimation: build the phase distribution, measure once."""
    dist = phase_distribution(unitary, layout, projector, t, ledger=ledger)
    result = dist.sample(rng)
    if ledger is not None:
        result = AEResult(result.estimate, result.phase_outcome, result.t,
                          result.points, queries=ledger.snapshot())
    return result


def zero_budget(eps: float) -> int:
    """Iteration budget ceil(10 pi / sqrt(eps)) of the zero tester."""
    if not 0.0 < eps < 1.0:
        raise ValueError(f"threshold must lie in (0, 1), got {eps}")
    return math.ceil(10.0 * math.pi / math.sqrt(eps))


def zero_tester(unitary: QuantumOp, layout: RegisterLayout, projector: Projector,
                eps: float, rng: np.random.Generator, *,
                ledger: QueryLedger | None = None) -> str:
    """YES if the projected mass is 0 (with certainty), NO if it exceeds eps
    (with probability at least 8/pi^2), using O(1/sqrt(eps)) queries."""
    result = amplitude_estimation(unitary, layout, projector, zero_budget(eps),
                                  rng, ledger=ledger)
    return "YES" if result.estimate < eps / 2.0 else "NO"


def exact_amplitude(unitary: QuantumOp, layout: RegisterLayout,
                    projector: Projector) -> float:
    """Deterministic projected mass ||Pi U|0>||^2, bypassing estimation."""
    state = new_basis_state(layout)
    apply(unitary, state)
    return projector_norm_sq(state, projector)


def qpe_joint_state(unitary: QuantumOp, layout: RegisterLayout,
                    projector: Projector, t: int,
                    phase_name: str = "phase") -> tuple[StateVector, int]:
    """Materialized post-transform joint state with a real phase register.

    Cross-check path for small systems: measuring ``phase_name`` on the
    returned state reproduces :func:`phase_distribution` exactly.
    """
    cfg = AEConfig(t)
    m = cfg.points
    table = _power_table(unitary, layout, projector, m, None)
    joint_layout = RegisterLayout(((phase_name, m),) + layout.registers)
    joint = StateVector(joint_layout, (table / math.sqrt(m)).ravel())
    omega = np.exp(-2j * math.pi / m)
    dft_inv = omega ** np.outer(np.arange(m), np.arange(m)) / math.sqrt(m)
    apply(MatrixOp((phase_name,), dft_inv), joint)
    return joint, m
