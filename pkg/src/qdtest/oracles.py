"""Instrumented purified query-access oracles and the encoding unitaries.

A purified oracle for a distribution p is a unitary U_p with

    U_p |0>_A |0>_B = sum_i sqrt(p_i) |phi_i>_A |i>_B,

where the garbage states {|phi_i>} are orthonormal but otherwise arbitrary;
algorithms built on the oracle must not depend on their choice, so two styles
are provided ("basis": |phi_i> = |i>; "haar": columns of a seeded random
unitary).  Every oracle application — forward, inverse, controlled — is
counted in a :class:`~qdtest.statevec.QueryLedger` under the oracle's label;
those counts are the measured query complexity of every experiment.

Derived unitaries:

* :func:`probability_encoder` — U_p^dagger . copy(B->C) . U_p, whose
  (A=0, B=0, C=k) amplitudes equal p_k exactly;
* :func:`closeness_unitary` — the one-ancilla combination of two probability
  encoders whose projected mass equals ||p - q||_2^2 / 4;
* :func:`kwise_encoder` — the subset-superposition / character-phase circuit
  whose projected amplitudes are the density Fourier coefficients of p scaled
  by 1/sqrt(M), M = binom_sum(n, k).

Sample spaces are zero-padded to the next power of two so the XOR-cascade copy
unitary is well defined; padding elements carry zero probability and do not
affect any encoded quantity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .distributions import BITSTRING, RANGE, Distribution, next_pow2, padded_weights
from .statevec import (ControlledOp, MatrixOp, PermutationOp, Projector,
                       QuantumOp, QueryLedger, RegisterLayout, ReflectionOp,
                       SequenceOp, controlled_z, hadamard, inverse, pauli_x)

__all__ = [
    "GARBAGE_STYLES", "PurifiedOracle", "QueryLedger", "make_purified_oracle",
    "from_pure_state_oracle", "from_discrete_oracle", "u_copy",
    "probability_encoder", "encoder_layout", "closeness_unitary",
    "closeness_instance", "subset_superposition", "kwise_encoder",
    "kwise_instance", "haar_unitary", "reflection_completion", "reflection_parts",
]

GARBAGE_STYLES = ("basis", "haar")


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Gaussian with phase fix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def reflection_parts(column: np.ndarray) -> tuple[np.ndarray, float] | None:
    """Householder data (w, denom) with (I - w w^T/denom) e0 = column.

    The reflection through the hyperplane normal to w = column - e0 is the
    orthonormal completion of the column; ``None`` means the column already
    is e0 and the completion is the identity.
    """
    v = np.asarray(column, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError("completion target must be a vector")
    if abs(np.linalg.norm(v) - 1.0) > 1e-12:
        raise ValueError("completion target must be a unit vector")
    denom = 1.0 - v[0]
    if denom < 1e-15:
        return None
    w = v.copy()
    w[0] -= 1.0
    return w, denom


def reflection_completion(column: np.ndarray) -> np.ndarray:
    """Real orthogonal matrix with the given real unit vector as first column."""
    parts = reflection_parts(column)
    if parts is None:
        return np.eye(np.asarray(column).size)
    w, denom = parts
    return np.eye(w.size) - np.outer(w, w) / denom


def _prep_op(regs, column: np.ndarray, label: str | None = None) -> QuantumOp | None:
    """State-preparation reflection sending |0...0> to the given real column."""
    parts = reflection_parts(column)
    if parts is None:
        return None
    return ReflectionOp(regs, parts[0], parts[1], label=label)


def _xor_copy_perm(dim: int) -> np.ndarray:
    """Permutation of the (src, dst) joint index sending (b, c) to (b, c xor b)."""
    if dim & (dim - 1):
        raise ValueError(f"copy unitary needs a power-of-two dimension, got {dim}")
    b, c = np.divmod(np.arange(dim * dim, dtype=np.int64), dim)
    return b * dim + (c ^ b)


def u_copy(dim: int, src: str = "B", dst: str = "C") -> PermutationOp:
    """XOR-cascade copy |b>|c> -> |b>|c xor b| on two equal pow2 registers."""
    return PermutationOp((src, dst), _xor_copy_perm(dim))


@dataclass(frozen=True)
class PurifiedOracle:
    """A labelled purified query-access unitary together with its distribution.

    ``a_reg`` is the garbage workspace, ``b_regs`` the sample register(s):
    a single register of (padded) sample-space dimension for range spaces, or
    one qubit register per coordinate for bitstring spaces.
    """

    distribution: Distribution
    garbage: str
    label: str
    a_reg: tuple[str, int]
    b_regs: tuple[tuple[str, int], ...]
    op: QuantumOp = field(compare=False, repr=False)

    @property
    def sample_dim(self) -> int:
        return int(np.prod([d for _, d in self.b_regs]))

    @property
    def registers(self) -> tuple[tuple[str, int], ...]:
        return (self.a_reg,) + self.b_regs

    def workspace_layout(self) -> RegisterLayout:
        return RegisterLayout(self.registers)


def _sample_regs(dist: Distribution, b_name: str) -> tuple[tuple[str, int], ...]:
    if dist.kind == BITSTRING:
        return tuple((f"{b_name}{i}", 2) for i in range(1, dist.n_bits + 1))
    return ((b_name, next_pow2(dist.size)),)


def _assemble(dist: Distribution, prep: QuantumOp | None, garbage: str,
              rng: np.random.Generator | None, label: str,
              a_name: str, b_name: str) -> PurifiedOracle:
    b_regs = _sample_regs(dist, b_name)
    dim = int(np.prod([d for _, d in b_regs]))
    b_names = tuple(n for n, _ in b_regs)
    steps: list[QuantumOp] = [] if prep is None else [prep]
    steps.append(PermutationOp(b_names + (a_name,), _xor_copy_perm(dim)))
    if garbage == "haar":
        if rng is None:
            raise ValueError("haar garbage needs a seeded rng")
        steps.append(MatrixOp((a_name,), haar_unitary(dim, rng)))
    elif garbage != "basis":
        raise ValueError(f"unknown garbage style {garbage!r}")
    return PurifiedOracle(distribution=dist, garbage=garbage, label=label,
                          a_reg=(a_name, dim), b_regs=b_regs,
                          op=SequenceOp(steps, label=label))


def make_purified_oracle(dist: Distribution, garbage: str = "basis", *,
                         seed: int | None = None, label: str = "p",
                         a_name: str = "A", b_name: str = "B") -> PurifiedOracle:
    """Purified oracle for a distribution with the chosen garbage style.

    The construction prepares sqrt(p) on the sample register, copies it into
    the workspace, and (for haar garbage) scrambles the workspace with a
    seeded random unitary.
    """
    b_regs = _sample_regs(dist, b_name)
    prep = _prep_op(tuple(n for n, _ in b_regs), np.sqrt(padded_weights(dist)))
    rng = np.random.default_rng(seed) if garbage == "haar" else None
    return _assemble(dist, prep, garbage, rng, label, a_name, b_name)


def from_pure_state_oracle(v: np.ndarray | MatrixOp, *, kind: str = RANGE,
                           label: str = "p", a_name: str = "A",
                           b_name: str = "B") -> PurifiedOracle:
    """Purified oracle from a state-preparation unitary v|0> = sum sqrt(p_i)|i>.

    One application of the result costs one underlying preparation query; the
    garbage states are the basis states themselves.
    """
    mat = v.matrix if isinstance(v, MatrixOp) else np.asarray(v, dtype=np.complex128)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"state-preparation unitary must be square, got {mat.shape}")
    err = np.abs(mat.conj().T @ mat - np.eye(mat.shape[0])).max()
    if err > 1e-10:
        raise ValueError(f"state preparation is not norm-preserving (deviation {err:.2e})")
    column = mat[:, 0]
    if np.abs(column.imag).max() > 1e-12 or column.real.min() < -1e-12:
        raise ValueError("state preparation must produce real non-negative amplitudes")
    size = mat.shape[0]
    dim = next_pow2(size)
    if dim != size:
        padded = np.eye(dim, dtype=np.complex128)
        padded[:size, :size] = mat
        mat = padded
    weights = np.clip(column.real, 0.0, None) ** 2
    dist = Distribution(weights / weights.sum(), kind)
    b_regs = _sample_regs(dist, b_name)
    prep = MatrixOp(tuple(n for n, _ in b_regs), mat)
    return _assemble(dist, prep, "basis", None, label, a_name, b_name)


def from_discrete_oracle(table, *, omega: int | None = None, label: str = "p",
                         a_name: str = "A", b_name: str = "B") -> PurifiedOracle:
    """Purified oracle from a function table f: [n] -> omega.

    Encodes p_i = |{j : f(j) = i}| / n by querying |j>|y> -> |j>|y xor f(j)>
    on the uniform superposition over inputs; the garbage state for element i
    is the uniform superposition over its preimage.
    """
    f = np.asarray(table, dtype=np.int64)
    if f.ndim != 1 or f.size < 1:
        raise ValueError("function table must be a non-empty 1-d sequence")
    if f.min() < 0:
        raise ValueError("function values must be non-negative")
    omega = int(f.max()) + 1 if omega is None else int(omega)
    if f.max() >= omega:
        raise ValueError(f"function value {f.max()} outside sample space [{omega}]")
    n_in = f.size
    d_a, d_b = next_pow2(n_in), next_pow2(omega)

    prep = _prep_op((a_name,), np.concatenate(
        [np.full(n_in, 1.0 / math.sqrt(n_in)), np.zeros(d_a - n_in)]))
    f_padded = np.zeros(d_a, dtype=np.int64)
    f_padded[:n_in] = f
    j, y = np.divmod(np.arange(d_a * d_b, dtype=np.int64), d_b)
    query = PermutationOp((a_name, b_name), j * d_b + (y ^ f_padded[j]))

    counts = np.bincount(f, minlength=omega).astype(np.float64)
    dist = Distribution(counts / n_in, RANGE)
    steps = [query] if prep is None else [prep, query]
    return PurifiedOracle(distribution=dist, garbage="preimage", label=label,
                          a_reg=(a_name, d_a), b_regs=((b_name, d_b),),
                          op=SequenceOp(steps, label=label))


def _mirror_regs(b_regs, prefix: str) -> tuple[tuple[str, int], ...]:
    if len(b_regs) == 1:
        return ((prefix, b_regs[0][1]),)
    return tuple((f"{prefix}{i}", d) for i, (_, d) in enumerate(b_regs, start=1))


def probability_encoder(oracle: PurifiedOracle, c_prefix: str = "C") -> QuantumOp:
    """U_p^dagger . copy(B->C) . U_p: reads the probabilities into amplitudes.

    On |0>_A |0>_B |0>_C the (A=0, B=0, C=k) amplitude equals p_k for every k;
    each application costs one forward and one inverse oracle query.
    """
    c_regs = _mirror_regs(oracle.b_regs, c_prefix)
    b_names = tuple(n for n, _ in oracle.b_regs)
    c_names = tuple(n for n, _ in c_regs)
    copy = PermutationOp(b_names + c_names, _xor_copy_perm(oracle.sample_dim))
    return SequenceOp([oracle.op, copy, inverse(oracle.op)])


def encoder_layout(oracle: PurifiedOracle, c_prefix: str = "C") -> RegisterLayout:
    return RegisterLayout(oracle.registers + _mirror_regs(oracle.b_regs, c_prefix))


def _require_same_space(op: PurifiedOracle, oq: PurifiedOracle) -> None:
    if op.distribution.kind != oq.distribution.kind:
        raise ValueError("oracles have different sample-space kinds")
    if op.distribution.size != oq.distribution.size:
        raise ValueError(
            f"oracles have different sample spaces "
            f"({op.distribution.size} vs {oq.distribution.size})")
    if op.registers != oq.registers:
        raise ValueError("oracles must share workspace and sample registers")
    if op.label == oq.label:
        raise ValueError("oracles need distinct ledger labels")


def closeness_unitary(op: PurifiedOracle, oq: PurifiedOracle,
                      d_name: str = "D", label: str = "U") -> QuantumOp:
    """One-ancilla combination of two probability encoders.

    With Pi = |0><0|_A x |0><0|_B x I_C x |0><0|_D, the projected mass of the
    output on the all-zeros input is ||p - q||_2^2 / 4.  Each application
    costs one controlled-forward and one controlled-inverse query per oracle.
    """
    _require_same_space(op, oq)
    enc_p = probability_encoder(op)
    enc_q = probability_encoder(oq)
    return SequenceOp([
        pauli_x(d_name),
        hadamard(d_name),
        ControlledOp(enc_p, d_name, 0),
        ControlledOp(enc_q, d_name, 1),
        hadamard(d_name),
    ], label=label)


def closeness_instance(op: PurifiedOracle, oq: PurifiedOracle,
                       d_name: str = "D") -> tuple[RegisterLayout, QuantumOp, Projector]:
    """Layout, unitary, and projector for a closeness test of two oracles."""
    unitary = closeness_unitary(op, oq, d_name)
    c_regs = _mirror_regs(op.b_regs, "C")
    layout = RegisterLayout(op.registers + c_regs + ((d_name, 2),))
    fixed = {op.a_reg[0]: 0, d_name: 0}
    fixed.update({n: 0 for n, _ in op.b_regs})
    return layout, unitary, Projector(fixed)


def subset_superposition(n: int, k: int, prefix: str = "S") -> QuantumOp:
    """Unitary sending |0...0> to the uniform superposition over the n-bit
    indicators of all non-empty subsets of size at most k."""
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    column = np.zeros(2 ** n)
    sizes = np.array([int(x).bit_count() for x in range(2 ** n)])
    support = (sizes >= 1) & (sizes <= k)
    column[support] = 1.0 / math.sqrt(int(support.sum()))
    regs = tuple(f"{prefix}{i}" for i in range(1, n + 1))
    return _prep_op(regs, column)


def kwise_encoder(oracle: PurifiedOracle, k: int, s_prefix: str = "S",
                  label: str = "U") -> QuantumOp:
    """Subset-phase circuit whose projected amplitudes are density Fourier
    coefficients.

    Prepares the subset superposition next to U_p, applies a controlled-Z
    between subset qubit i and sample qubit i for every coordinate (a
    character phase), and uncomputes the oracle.  The amplitude on
    (S, A=0, B=0) is phi_hat(S)/sqrt(M) for 1 <= |S| <= k and zero for every
    other subset, with M the number of subsets counted by binom_sum(n, k).
    Each application costs one forward and one inverse oracle query.
    """
    if oracle.distribution.kind != BITSTRING:
        raise ValueError("k-wise encoding needs a bitstring sample space")
    n = oracle.distribution.n_bits
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    prep = subset_superposition(n, k, s_prefix)
    b_names = [name for name, _ in oracle.b_regs]
    phases = [controlled_z(f"{s_prefix}{i}", b_names[i - 1]) for i in range(1, n + 1)]
    return SequenceOp([prep, oracle.op, *phases, inverse(oracle.op)], label=label)


def kwise_instance(oracle: PurifiedOracle, k: int, s_prefix: str = "S",
                   ) -> tuple[RegisterLayout, QuantumOp, Projector]:
    """Layout, unitary, and projector for a k-wise uniformity test."""
    unitary = kwise_encoder(oracle, k, s_prefix)
    n = oracle.distribution.n_bits
    s_regs = tuple((f"{s_prefix}{i}", 2) for i in range(1, n + 1))
    layout = RegisterLayout(s_regs + oracle.registers)
    fixed = {oracle.a_reg[0]: 0}
    fixed.update({name: 0 for name, _ in oracle.b_regs})
    return layout, unitary, Projector(fixed)
