"""Transmon device parameters and the key=value device config format."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .readout import LABELS, ReadoutModel


@dataclass(frozen=True)
class DeviceSpec:
    """Transition frequencies in GHz, relaxation times in microseconds."""

    omega_ab: float = 4.97
    omega_bc: float = 4.62
    t1: float = 30.0
    t2: float = 30.0
    readout: ReadoutModel = field(default_factory=ReadoutModel)

    def __post_init__(self):
        if self.omega_ab == self.omega_bc:
            raise ValueError("omega_ab and omega_bc must differ (zero anharmonicity)")
        if not (self.t1 > 0 and self.t2 > 0):
            raise ValueError("t1 and t2 must be positive")
        if self.t2 > 2 * self.t1 * (1 + 1e-12):
            raise ValueError("t2 cannot exceed 2*t1")

    @property
    def anharmonicity(self) -> float:
        return self.omega_bc - self.omega_ab


def _parse_centroids(text: str) -> dict[str, tuple[float, float]]:
    # A:0,0;B:10,0;C:5,8.66
    out = {}
    for item in text.split(";"):
        label, _, coords = item.partition(":")
        i, q = coords.split(",")
        out[label.strip()] = (float(i), float(q))
    return out


def format_centroids(centroids) -> str:
    return ";".join(f"{k}:{centroids[k][0]!r},{centroids[k][1]!r}" for k in LABELS)


def parse_device_config(text: str, base: DeviceSpec | None = None) -> DeviceSpec:
    """Apply ``key=value`` overrides (``#`` comments allowed) to ``base``.

    Keys: omega_ab, omega_bc, t1, t2, centroids, noise_sigma.
    """
    dev = base or DeviceSpec()
    values: dict = {}
    readout: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep:
            raise ValueError(f"line {lineno}: expected key=value")
        try:
            if key in ("omega_ab", "omega_bc", "t1", "t2"):
                values[key] = float(value)
            elif key == "noise_sigma":
                readout["noise_sigma"] = float(value)
            elif key == "centroids":
                readout["centroids"] = _parse_centroids(value)
            else:
                raise ValueError(f"unknown key {key!r}")
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    if readout:
        values["readout"] = replace(dev.readout, **readout)
    return replace(dev, **values)


def load_device(path) -> DeviceSpec:
    with open(path) as fh:
        return parse_device_config(fh.read())


