"""Phase sweeps: execute compiled schedules, sample shots, tally, compare with optics."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import dsl, readout
from .device import DeviceSpec
from .pulse import backends

BACKENDS = ("ideal", "timedomain", "lindblad")
COLUMNS = ("phi", "n_shots", "count_a", "count_b", "count_c",
           "p_transmit_hat", "ci_low", "ci_high", "p_oracle")
Z95 = 1.959963984540054
CALIBRATION_SHOTS = 1000


class MalformedCsv(ValueError):
    pass


class ReportError(ValueError):
    pass


def wilson_interval(k: int, n: int, z: float = Z95) -> tuple[float, float]:
    """Wilson score interval for ``k`` successes in ``n`` trials."""
    if n < 1:
        raise ValueError("Wilson interval needs n >= 1")
    p = k / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, min(centre - half, p)), min(1.0, max(centre + half, p))


@dataclass(frozen=True)
class SweepRow:
    phi: float
    n_shots: int
    count_a: int
    count_b: int
    count_c: int
    p_transmit_hat: float
    ci_low: float
    ci_high: float
    p_oracle: float


@dataclass
class SweepResult:
    rows: list[SweepRow] = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=float)


@dataclass(frozen=True)
class RunConfig:
    backend: str = "ideal"
    shots: int = 1000
    seed: int = 0
    dt: float | None = None  # us; default pulse_duration/2000
    device: DeviceSpec = field(default_factory=DeviceSpec)
    use_readout: bool = False
    options: dsl.CompileOptions = field(default_factory=dsl.CompileOptions)

    def __post_init__(self):
        if self.backend not in BACKENDS:
            raise ValueError(f"unknown backend {self.backend!r}; choose from {', '.join(BACKENDS)}")
        if self.shots < 1:
            raise ValueError("shots must be >= 1")
        if self.dt is not None and not self.dt > 0:
            raise ValueError("dt must be positive")

    @property
    def step(self) -> float:
        return self.dt if self.dt is not None else self.options.pulse_duration / 2000


def point_seed(base: int, index: int) -> int:
    """Per-phase seed; independent of execution order."""
    return (base ^ index) & ((1 << 64) - 1)


def level_probabilities(schedules: Sequence, cfg: RunConfig) -> np.ndarray:
    if cfg.backend == "ideal":
        return backends.ideal_probabilities(schedules, cfg.device)
    if cfg.backend == "timedomain":
        return backends.timedomain_probabilities(schedules, cfg.device, cfg.step)
    return backends.lindblad_populations(schedules, cfg.device, cfg.step)


def _tally(probs, cfg: RunConfig, seed: int, disc) -> np.ndarray:
    p = np.clip(np.asarray(probs, dtype=float), 0.0, None)
    p = p / p.sum()
    idx = readout.sample_shot_indices(p, cfg.shots, seed)
    if disc is not None:
        iq = readout.simulate_iq_many(idx, cfg.device.readout, seed)
        idx = readout.classify_many(iq, disc)
    return np.bincount(idx, minlength=3)


def run_sweep(program: str, cfg: RunConfig) -> SweepResult:
    ast = dsl.parse(program)
    compiled = dsl.compile(ast, cfg.device, cfg.options)
    probs = level_probabilities([s for _, s in compiled], cfg)
    disc = None
    if cfg.use_readout:
        disc = readout.calibrate(cfg.device.readout, CALIBRATION_SHOTS, cfg.seed)
    rows = []
    for k, ((phi, _), p) in enumerate(zip(compiled, probs)):
        counts = _tally(p, cfg, point_seed(cfg.seed, k), disc)
        n = int(counts.sum())
        lo, hi = wilson_interval(int(counts[0]), n)
        rows.append(SweepRow(
            phi=phi, n_shots=n,
            count_a=int(counts[0]), count_b=int(counts[1]), count_c=int(counts[2]),
            p_transmit_hat=counts[0] / n, ci_low=lo, ci_high=hi,
            p_oracle=dsl.oracle_transmission(ast.absorber, phi),
        ))
    rows.sort(key=lambda r: r.phi)
    return SweepResult(rows)


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".12g")


def to_csv(result: SweepResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in result.rows:
        w.writerow([_fmt(getattr(r, c)) for c in COLUMNS])
    return buf.getvalue()


def from_csv(text: str) -> SweepResult:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(h.strip() for h in header) != COLUMNS:
        raise MalformedCsv(f"expected header {','.join(COLUMNS)}")
    rows = []
    for lineno, rec in enumerate(reader, 2):
        if not rec:
            continue
        if len(rec) != len(COLUMNS):
            raise MalformedCsv(f"line {lineno}: expected {len(COLUMNS)} fields, got {len(rec)}")
        try:
            vals = dict(zip(COLUMNS, rec))
            row = SweepRow(
                phi=float(vals["phi"]),
                n_shots=int(vals["n_shots"]),
                count_a=int(vals["count_a"]),
                count_b=int(vals["count_b"]),
                count_c=int(vals["count_c"]),
                p_transmit_hat=float(vals["p_transmit_hat"]),
                ci_low=float(vals["ci_low"]),
                ci_high=float(vals["ci_high"]),
                p_oracle=float(vals["p_oracle"]),
            )
        except ValueError as exc:
            raise MalformedCsv(f"line {lineno}: {exc}") from None
        if row.n_shots < 1 or row.count_a + row.count_b + row.count_c != row.n_shots:
            raise MalformedCsv(f"line {lineno}: counts do not sum to a positive n_shots")
        rows.append(row)
    if not rows:
        raise MalformedCsv("no data rows")
    return SweepResult(rows)


@dataclass(frozen=True)
class Report:
    visibility: float
    max_abs_error: float
    ci_coverage: float
    n_rows: int

    def text(self) -> str:
        return (
            f"rows: {self.n_rows}\n"
            f"fitted visibility: {self.visibility:.6f}\n"
            f"max |p_hat - p_oracle|: {self.max_abs_error:.6f}\n"
            f"oracle inside 95% CI: {self.ci_coverage:.4f}\n"
        )


def report(result: SweepResult) -> Report:
    p = result.column("p_transmit_hat")
    hi, lo = p.max(), p.min()
    if hi + lo == 0:
        raise ReportError("visibility undefined: no ground-state counts in any row")
    oracle = result.column("p_oracle")
    inside = (result.column("ci_low") <= oracle) & (oracle <= result.column("ci_high"))
    return Report(
        visibility=float((hi - lo) / (hi + lo)),
        max_abs_error=float(np.max(np.abs(p - oracle))),
        ci_coverage=float(inside.mean()),
        n_rows=len(p),
    )
