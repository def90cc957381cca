"""Finite probability distributions and their file formats.

Two sample-space kinds are supported:

* ``"range"`` — elements 0..n-1 (any n >= 1),
* ``"bitstring"`` — elements of {0,1}^n encoded as integers with coordinate 1
  as the most significant bit (n <= 20).

File formats (shared by the CLI and library loaders):

* JSON: ``{"kind": "range"|"bitstring", "n": int, "weights": [floats]}``
  where ``n`` is the number of elements for ``range`` and the number of bits
  for ``bitstring``;
* CSV: lines ``index,weight`` with 0-based indices covering 0..n-1
  (loaded as a ``range`` distribution).

Loaders renormalize weight sums within 1e-6 of one and reject anything
further off; the constructor itself requires normalization within 1e-9.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

RANGE = "range"
BITSTRING = "bitstring"

SUM_TOL = 1e-9
LOAD_SUM_TOL = 1e-6
MAX_BITS = 20


class DistributionError(ValueError):
    """Invalid weights, sample space, or file contents."""


@dataclass(frozen=True)
class Distribution:
    """Non-negative weight vector summing to one over a finite sample space."""

    weights: np.ndarray
    kind: str = RANGE

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64, copy=True)
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)
        if self.kind not in (RANGE, BITSTRING):
            raise DistributionError(f"unknown sample-space kind {self.kind!r}")
        if w.ndim != 1 or w.size < 1:
            raise DistributionError("weights must be a non-empty 1-d vector")
        if np.any(w < 0):
            raise DistributionError(f"negative weight {w.min()}")
        total = float(w.sum())
        if abs(total - 1.0) > SUM_TOL:
            raise DistributionError(f"weights sum to {total}, not 1")
        if self.kind == BITSTRING:
            n = self.n_bits
            if 2 ** n != w.size:
                raise DistributionError(
                    f"bitstring sample space needs a power-of-two size, got {w.size}")
            if n > MAX_BITS:
                raise DistributionError(f"bitstring space of {n} bits exceeds {MAX_BITS}")

    @property
    def size(self) -> int:
        return int(self.weights.size)

    @property
    def n_bits(self) -> int:
        if self.kind != BITSTRING:
            raise DistributionError("n_bits is only defined for bitstring sample spaces")
        return int(self.weights.size - 1).bit_length()

    def __eq__(self, other):
        return (isinstance(other, Distribution) and self.kind == other.kind
                and np.array_equal(self.weights, other.weights))

    def __hash__(self):
        return hash((self.kind, self.weights.tobytes()))


def next_pow2(n: int) -> int:
    return 1 << max(0, int(n - 1).bit_length())


def padded_weights(dist: Distribution) -> np.ndarray:
    """Weights zero-padded to the next power of two (used by the oracles)."""
    d = next_pow2(dist.size)
    out = np.zeros(d, dtype=np.float64)
    out[: dist.size] = dist.weights
    return out


def uniform(size: int, kind: str = RANGE) -> Distribution:
    return Distribution(np.full(size, 1.0 / size), kind)


def point_mass(size: int, element: int, kind: str = RANGE) -> Distribution:
    w = np.zeros(size)
    w[element] = 1.0
    return Distribution(w, kind)


def random_distribution(size: int, rng: np.random.Generator, kind: str = RANGE) -> Distribution:
    w = rng.random(size) + 1e-3
    return Distribution(w / w.sum(), kind)


def _normalize_loaded(weights: np.ndarray, source: str) -> np.ndarray:
    if np.any(weights < 0):
        raise DistributionError(f"{source}: negative weight")
    total = float(weights.sum())
    if abs(total - 1.0) > LOAD_SUM_TOL:
        raise DistributionError(f"{source}: weights sum to {total}, outside 1 +/- {LOAD_SUM_TOL}")
    return weights / total


def from_json(text: str, source: str = "<json>") -> Distribution:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DistributionError(f"{source}: invalid JSON ({exc})") from exc
    if not isinstance(obj, dict):
        raise DistributionError(f"{source}: expected a JSON object")
    try:
        kind = obj["kind"]
        n = int(obj["n"])
        weights = np.asarray(obj["weights"], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise DistributionError(f"{source}: need keys kind, n, weights ({exc})") from exc
    expected = 2 ** n if kind == BITSTRING else n
    if weights.size != expected:
        raise DistributionError(
            f"{source}: {weights.size} weights but n={n} implies {expected}")
    return Distribution(_normalize_loaded(weights, source), kind)


def from_csv(text: str, source: str = "<csv>") -> Distribution:
    rows: dict[int, float] = {}
    try:
        for row in csv.reader(io.StringIO(text)):
            if not row or row[0].strip().startswith("#"):
                continue
            if row[0].strip().lower() == "index":
                continue
            idx, weight = int(row[0]), float(row[1])
            if idx in rows:
                raise DistributionError(f"{source}: duplicate index {idx}")
            rows[idx] = weight
    except (ValueError, IndexError) as exc:
        raise DistributionError(f"{source}: malformed CSV row ({exc})") from exc
    if not rows:
        raise DistributionError(f"{source}: no data rows")
    n = max(rows) + 1
    if sorted(rows) != list(range(n)):
        raise DistributionError(f"{source}: indices must cover 0..{n - 1}")
    weights = np.array([rows[i] for i in range(n)], dtype=np.float64)
    return Distribution(_normalize_loaded(weights, source), RANGE)


def load(path: str | Path) -> Distribution:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".csv":
        return from_csv(text, source=str(path))
    return from_json(text, source=str(path))


def to_json(dist: Distribution) -> str:
    n = dist.n_bits if dist.kind == BITSTRING else dist.size
    return json.dumps({"kind": dist.kind, "n": n, "weights": dist.weights.tolist()})
