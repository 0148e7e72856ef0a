"""Experiment description language and its compiler to pulse schedules.

A program describes the single supported topology: one source, a 1:1
beamsplitter, a phase delay (fixed or swept), a thin absorber and a detector
pair::

    source A
    beamsplitter bs1 ratio=0.5
    phase phi sweep(-3.14159265, 3.14159265, 41)
    absorber film t=0.5 r=-0.5
    detectors SPD-A SPD-B

Whitespace is insignificant and ``#`` starts a comment.  Compilation maps the
beamsplitter to a pi/2 pulse at omega_ab, the phase delay plus film to a
second omega_ab pulse at phase phi, and absorption to a pi pulse at omega_bc.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterator, Union

import numpy as np

from . import optics
from .device import DeviceSpec
from .pulse.schedule import GaussianEnvelope, PulseInstruction, PulseSchedule


class DslError(Exception):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.message = message
        self.line = line
        self.col = col
        where = f"{line}:{col}: " if line else ""
        super().__init__(f"{where}{message}")


class DslSyntaxError(DslError):
    pass


class DslSemanticError(DslError):
    pass


class UnsupportedTopology(DslError):
    pass


# -- AST ----------------------------------------------------------------------


@dataclass(frozen=True)
class Sweep:
    start: float
    stop: float
    points: int

    def values(self) -> list[float]:
        if self.points == 1:
            return [self.start]
        return [float(x) for x in np.linspace(self.start, self.stop, self.points)]


@dataclass(frozen=True)
class Source:
    port: str


@dataclass(frozen=True)
class Beamsplitter:
    name: str
    ratio: float


@dataclass(frozen=True)
class PhaseDelay:
    name: str
    value: Union[float, Sweep]

    def values(self) -> list[float]:
        if isinstance(self.value, Sweep):
            return self.value.values()
        return [self.value]


@dataclass(frozen=True)
class Absorber:
    name: str
    t: float | None = None
    r: float | None = None
    visibility: float | None = None

    @property
    def params(self) -> optics.AbsorberParams | None:
        if self.visibility is not None:
            return None
        return optics.AbsorberParams(self.t, self.r)


@dataclass(frozen=True)
class Detectors:
    names: tuple[str, str]


Element = Union[Beamsplitter, PhaseDelay, Absorber, Detectors]


@dataclass(frozen=True)
class ExperimentAst:
    source: Source
    elements: tuple[Element, ...]

    def _find(self, kind):
        return next(e for e in self.elements if isinstance(e, kind))

    @property
    def beamsplitter(self) -> Beamsplitter:
        return self._find(Beamsplitter)

    @property
    def phase(self) -> PhaseDelay:
        return self._find(PhaseDelay)

    @property
    def absorber(self) -> Absorber:
        return self._find(Absorber)

    @property
    def detectors(self) -> Detectors:
        return self._find(Detectors)


# -- lexer --------------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<newline>\n)
  | (?P<number>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_\-]*)
  | (?P<punct>[=(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "number" | "ident" | "punct" | "eol" | "eof"
    text: str
    line: int
    col: int


def tokenize(text: str) -> Iterator[Token]:
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if not m:
            raise DslSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        if kind == "newline":
            yield Token("eol", "\n", line, col)
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            yield Token(kind, m.group(), line, col)
        pos = m.end()
    yield Token("eol", "", line, pos - line_start + 1)
    yield Token("eof", "", line, pos - line_start + 1)


# -- parser -------------------------------------------------------------------

_ORDER = ("source", "beamsplitter", "phase", "absorber", "detectors")


class _Parser:
    def __init__(self, text: str):
        self.tokens = list(tokenize(text))
        self.pos = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tok
        self.pos += 1
        return tok

    def error(self, message: str, tok: Token | None = None) -> DslSyntaxError:
        tok = tok or self.tok
        return DslSyntaxError(message, tok.line, tok.col)

    def expect(self, kind: str, text: str | None = None) -> Token:
        tok = self.tok
        if tok.kind != kind or (text is not None and tok.text != text):
            want = repr(text) if text is not None else kind
            got = repr(tok.text) if tok.text.strip() else "end of line"
            raise self.error(f"expected {want}, got {got}")
        return self.advance()

    def ident(self) -> str:
        return self.expect("ident").text

    def number(self) -> float:
        return float(self.expect("number").text)

    def integer(self) -> int:
        tok = self.expect("number")
        if not re.fullmatch(r"[+-]?\d+", tok.text):
            raise self.error("expected an integer point count", tok)
        return int(tok.text)

    def keyword_value(self, key: str) -> float:
        self.expect("ident", key)
        self.expect("punct", "=")
        return self.number()

    def program(self) -> list[tuple[Token, object]]:
        stmts = []
        while self.tok.kind != "eof":
            if self.tok.kind == "eol":
                self.advance()
                continue
            head = self.tok
            stmts.append((head, self.statement()))
            if self.tok.kind != "eol":
                raise self.error(f"unexpected {self.tok.text!r} after {head.text} statement")
        return stmts

    def statement(self):
        head = self.expect("ident")
        kw = head.text
        if kw == "source":
            return Source(self.ident())
        if kw == "beamsplitter":
            name = self.ident()
            return Beamsplitter(name, self.keyword_value("ratio"))
        if kw == "phase":
            name = self.ident()
            if self.tok.kind == "punct" and self.tok.text == "=":
                self.advance()
                return PhaseDelay(name, self.number())
            self.expect("ident", "sweep")
            self.expect("punct", "(")
            start = self.number()
            self.expect("punct", ",")
            stop = self.number()
            self.expect("punct", ",")
            points_tok = self.tok
            points = self.integer()
            self.expect("punct", ")")
            if points < 1:
                raise DslSemanticError("sweep needs at least one point", points_tok.line, points_tok.col)
            return PhaseDelay(name, Sweep(start, stop, points))
        if kw == "absorber":
            name = self.ident()
            if self.tok.text == "visibility":
                return Absorber(name, visibility=self.keyword_value("visibility"))
            t = self.keyword_value("t")
            r = self.keyword_value("r")
            return Absorber(name, t=t, r=r)
        if kw == "detectors":
            return Detectors((self.ident(), self.ident()))
        raise self.error(f"unknown statement {kw!r}; expected one of {', '.join(_ORDER)}", head)


def _check_semantics(stmts) -> ExperimentAst:
    seen: dict[str, tuple[Token, object]] = {}
    for head, node in stmts:
        if head.text in seen:
            raise DslSemanticError(f"duplicate {head.text} statement", head.line, head.col)
        expected = _ORDER[len(seen)]
        if head.text != expected:
            raise DslSemanticError(
                f"topology violation: {head.text} before {expected}", head.line, head.col
            )
        seen[head.text] = (head, node)
    for kw in _ORDER:
        if kw not in seen:
            line = stmts[-1][0].line + 1 if stmts else 1
            raise DslSyntaxError(f"missing {kw}", line, 1)

    bs_head, bs = seen["beamsplitter"]
    if bs.ratio != 0.5:
        raise DslSemanticError(
            f"only a 1:1 beamsplitter is supported (ratio={bs.ratio!r})", bs_head.line, bs_head.col
        )
    ab_head, ab = seen["absorber"]
    if ab.visibility is not None:
        if not 0.0 <= ab.visibility <= 1.0:
            raise DslSemanticError(
                f"visibility {ab.visibility!r} outside [0, 1]", ab_head.line, ab_head.col
            )
    else:
        try:
            ab.params
        except ValueError as exc:
            raise DslSemanticError(str(exc), ab_head.line, ab_head.col) from None
    return ExperimentAst(seen["source"][1], tuple(seen[k][1] for k in _ORDER[1:]))


def parse(text: str) -> ExperimentAst:
    p = _Parser(text)
    stmts = p.program()
    if not stmts:
        raise DslSyntaxError("missing source", 1, 1)
    return _check_semantics(stmts)


def _num(x: float) -> str:
    return repr(float(x))


def pretty_print(ast: ExperimentAst) -> str:
    bs, ph, ab, det = ast.beamsplitter, ast.phase, ast.absorber, ast.detectors
    if isinstance(ph.value, Sweep):
        sw = ph.value
        phase = f"phase {ph.name} sweep({_num(sw.start)}, {_num(sw.stop)}, {sw.points})"
    else:
        phase = f"phase {ph.name}={_num(ph.value)}"
    if ab.visibility is not None:
        absorber = f"absorber {ab.name} visibility={_num(ab.visibility)}"
    else:
        absorber = f"absorber {ab.name} t={_num(ab.t)} r={_num(ab.r)}"
    lines = [
        f"source {ast.source.port}",
        f"beamsplitter {bs.name} ratio={_num(bs.ratio)}",
        phase,
        absorber,
        f"detectors {det.names[0]} {det.names[1]}",
    ]
    return "\n".join(lines) + "\n"


# -- compiler -----------------------------------------------------------------


@dataclass(frozen=True)
class CompileOptions:
    pulse_duration: float = 0.6
    gap: float = 0.04

    def __post_init__(self):
        if not self.pulse_duration > 0:
            raise ValueError("pulse_duration must be positive")
        if not self.gap >= 0:
            raise ValueError("gap must be non-negative")


@dataclass(frozen=True)
class AbsorberMapping:
    """How the film is represented on the transmon."""

    amp_scale: float
    # pi when the anti-symmetric mode is the lossier one: the fringe minimum moves to phi = pi.
    phase_offset: float = 0.0


def absorber_mapping(ab: Absorber) -> AbsorberMapping:
    if ab.visibility is not None:
        return AbsorberMapping(optics.visibility_to_amp_scale(ab.visibility))
    params = ab.params
    sigma_s, sigma_a = optics.eigenmode_amplitudes(params)
    if abs(sigma_s) == 0 and abs(sigma_a) == 0:
        raise UnsupportedTopology("absorber removes both eigenmodes; no transmon fringe to reproduce")
    scale = optics.visibility_to_amp_scale(optics.fringe_visibility(params))
    offset = math.pi if abs(sigma_s) > abs(sigma_a) else 0.0
    return AbsorberMapping(scale, offset)


def oracle_transmission(ab: Absorber, phi: float) -> float:
    """Optics-side transmission probability for the film at phase ``phi``.

    For t/r films this is the total detector probability, which for a non-ideal
    film need not match the normalized transmon fringe.
    """
    if ab.visibility is not None:
        return optics.fringe_transmission(ab.visibility, phi)
    p_a, p_b, _ = optics.detector_probabilities(ab.params, phi)
    return p_a + p_b


def _check_topology(ast: ExperimentAst):
    kinds = tuple(type(e) for e in ast.elements)
    if not isinstance(ast.source, Source) or kinds != (Beamsplitter, PhaseDelay, Absorber, Detectors):
        raise UnsupportedTopology("only source -> beamsplitter -> phase -> absorber -> detectors is supported")
    if ast.beamsplitter.ratio != 0.5:
        raise UnsupportedTopology("only a 1:1 beamsplitter is supported")


def compile_schedule(phi: float, dev: DeviceSpec, opts: CompileOptions,
                     mapping: AbsorberMapping = AbsorberMapping(1.0)) -> PulseSchedule:
    dur = opts.pulse_duration
    sigma = dur / 6
    step = dur + opts.gap
    phase2 = phi + mapping.phase_offset
    return PulseSchedule((
        PulseInstruction(dev.omega_ab, GaussianEnvelope(dur, sigma, math.pi / 2), 0.0, 0.0),
        PulseInstruction(dev.omega_ab, GaussianEnvelope(dur, sigma, mapping.amp_scale * math.pi / 2),
                         phase2, step),
        PulseInstruction(dev.omega_bc, GaussianEnvelope(dur, sigma, math.pi), 0.0, 2 * step),
    ))


def compile(ast: ExperimentAst, dev: DeviceSpec | None = None,
            opts: CompileOptions | None = None) -> list[tuple[float, PulseSchedule]]:
    """Lower ``ast`` to one three-pulse schedule per swept phase."""
    dev = dev or DeviceSpec()
    opts = opts or CompileOptions()
    _check_topology(ast)
    mapping = absorber_mapping(ast.absorber)
    return [(phi, compile_schedule(phi, dev, opts, mapping)) for phi in ast.phase.values()]
