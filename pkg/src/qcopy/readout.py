"""Dispersive readout as IQ-plane samples, a nearest-centroid discriminator and
the shot sampler.

Random streams come from numpy's Philox4x64 counter-based generator keyed
directly by ``(seed, stream)``, so a seed names the same integer stream on every
platform.  Uniforms are the top 53 bits of each raw 64-bit word scaled by 2**-53;
Gaussians use the Box-Muller transform on consecutive uniform pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

LABELS = ("A", "B", "C")

# Second key word of the Philox key; separates independent streams per seed.
STREAM_SHOTS = 0
STREAM_IQ = 1
STREAM_CALIBRATION = 2

_MASK64 = (1 << 64) - 1


class BadDistribution(ValueError):
    pass


def _raw(seed: int, stream: int, n: int) -> np.ndarray:
    key = (seed & _MASK64) | ((stream & _MASK64) << 64)
    return np.random.Philox(key=key).random_raw(n)


def uniforms(seed: int, stream: int, n: int) -> np.ndarray:
    """``n`` doubles in [0, 1) from the keyed stream."""
    return (_raw(seed, stream, n) >> np.uint64(11)).astype(np.float64) * 2.0**-53


def normals(seed: int, stream: int, n: int) -> np.ndarray:
    """``n`` standard normals via Box-Muller on 2*ceil(n/2) uniforms."""
    m = (n + 1) // 2
    u = uniforms(seed, stream, 2 * m)
    u1, u2 = u[0::2], u[1::2]
    radius = np.sqrt(-2.0 * np.log1p(-u1))
    z = np.empty(2 * m)
    z[0::2] = radius * np.cos(2.0 * np.pi * u2)
    z[1::2] = radius * np.sin(2.0 * np.pi * u2)
    return z[:n]


def _check_probs(probs) -> np.ndarray:
    p = np.asarray(probs, dtype=float).reshape(-1)
    if p.shape != (3,) or not np.all(np.isfinite(p)):
        raise BadDistribution(f"expected three finite probabilities, got {probs!r}")
    if p.min() < -1e-9 or abs(p.sum() - 1.0) > 1e-9:
        raise BadDistribution(f"not a probability distribution: {probs!r}")
    return np.clip(p, 0.0, None)


def sample_shot_indices(probs, n: int, seed: int) -> np.ndarray:
    """Level indices (0=A, 1=B, 2=C) of ``n`` i.i.d. categorical draws."""
    p = _check_probs(probs)
    if n < 1:
        raise ValueError("need at least one shot")
    u = uniforms(seed, STREAM_SHOTS, n)
    # A iff u < p_a; B iff p_a <= u < p_a + p_b; C otherwise.
    edges = np.array([p[0], p[0] + p[1]])
    return np.searchsorted(edges, u, side="right").astype(np.int64)


def sample_shots(probs, n: int, seed: int) -> list[str]:
    return [LABELS[i] for i in sample_shot_indices(probs, n, seed)]


@dataclass(frozen=True)
class IQPoint:
    i: float
    q: float


@dataclass(frozen=True)
class ReadoutModel:
    centroids: Mapping[str, tuple[float, float]] = field(
        default_factory=lambda: {"A": (0.0, 0.0), "B": (10.0, 0.0), "C": (5.0, 8.66)}
    )
    noise_sigma: float = 1.0

    def __post_init__(self):
        if set(self.centroids) != set(LABELS):
            raise ValueError(f"centroids must cover exactly {LABELS}")
        points = {tuple(map(float, self.centroids[k])) for k in LABELS}
        if len(points) != 3:
            raise ValueError("readout centroids must be distinct")
        if not self.noise_sigma > 0:
            raise ValueError("noise_sigma must be positive")

    def centroid_array(self) -> np.ndarray:
        return np.array([self.centroids[k] for k in LABELS], dtype=float)


@dataclass(frozen=True)
class Discriminator:
    estimated_centroids: Mapping[str, tuple[float, float]]

    def centroid_array(self) -> np.ndarray:
        return np.array([self.estimated_centroids[k] for k in LABELS], dtype=float)


@dataclass(frozen=True)
class ShotRecord:
    true_label: str | None
    iq: IQPoint
    classified_label: str


def simulate_iq_many(indices: Sequence[int], model: ReadoutModel, seed: int,
                     stream: int = STREAM_IQ) -> np.ndarray:
    """IQ samples, shape (n, 2), for the given level indices."""
    idx = np.asarray(indices, dtype=np.int64)
    z = normals(seed, stream, 2 * len(idx)).reshape(-1, 2)
    return model.centroid_array()[idx] + model.noise_sigma * z


def simulate_iq(label: str, model: ReadoutModel, seed: int) -> IQPoint:
    i, q = simulate_iq_many([LABELS.index(label)], model, seed)[0]
    return IQPoint(float(i), float(q))


def calibrate(model: ReadoutModel, shots_per_state: int, seed: int) -> Discriminator:
    """Prepare each basis level ``shots_per_state`` times and average the IQ samples."""
    if shots_per_state < 10:
        raise ValueError("calibration needs at least 10 shots per state")
    est = {}
    for k, label in enumerate(LABELS):
        pts = simulate_iq_many(np.full(shots_per_state, k), model, seed,
                               stream=STREAM_CALIBRATION + k)
        est[label] = tuple(float(x) for x in pts.mean(axis=0))
    return Discriminator(est)


def classify_many(points: np.ndarray, d: Discriminator) -> np.ndarray:
    """Nearest-centroid level indices; ties go to the earlier label (A < B < C)."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    d2 = ((pts[:, None, :] - d.centroid_array()[None, :, :]) ** 2).sum(axis=-1)
    return np.argmin(d2, axis=1)


def classify(p: IQPoint, d: Discriminator) -> str:
    return LABELS[int(classify_many(np.array([[p.i, p.q]]), d)[0])]


def shot_records(probs, n: int, model: ReadoutModel, d: Discriminator, seed: int,
                 blind: bool = False) -> list[ShotRecord]:
    """Full measurement chain: sample levels, draw IQ points, classify."""
    idx = sample_shot_indices(probs, n, seed)
    iq = simulate_iq_many(idx, model, seed)
    cls = classify_many(iq, d)
    return [
        ShotRecord(None if blind else LABELS[t], IQPoint(float(x), float(y)), LABELS[c])
        for t, (x, y), c in zip(idx, iq, cls)
    ]


def misclassification_bound(model: ReadoutModel) -> float:
    """Union bound on the per-shot error from the closest centroid pair."""
    c = model.centroid_array()
    dmin = min(np.linalg.norm(c[a] - c[b]) for a in range(3) for b in range(a + 1, 3))
    return 2 * 0.5 * math.erfc(dmin / (2 * model.noise_sigma) / math.sqrt(2))
