import math
from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from qcopy import dsl
from qcopy.device import DeviceSpec
from qcopy.dsl import (
    Absorber,
    Beamsplitter,
    Detectors,
    DslSemanticError,
    DslSyntaxError,
    ExperimentAst,
    PhaseDelay,
    Source,
    Sweep,
    UnsupportedTopology,
    parse,
    pretty_print,
)
from qcopy.pulse import ideal_probabilities, serialize_schedule

CORPUS = sorted((Path(__file__).parent / "corpus").glob("*.qc"))


def test_reference_program(reference_program):
    ast = parse(reference_program)
    assert ast == ExperimentAst(
        Source("A"),
        (
            Beamsplitter("bs1", 0.5),
            PhaseDelay("phi", Sweep(-3.14159265, 3.14159265, 41)),
            Absorber("film", t=0.5, r=-0.5),
            Detectors(("SPD-A", "SPD-B")),
        ),
    )
    assert len(ast.phase.values()) == 41


def test_gain_absorber_is_rejected(reference_program):
    with pytest.raises(DslSemanticError, match="3.24"):
        parse(reference_program.replace("t=0.5 r=-0.5", "t=0.9 r=0.9"))


@pytest.mark.parametrize("text", ["", "   \n# nothing\n"])
def test_empty_input(text):
    with pytest.raises(DslSyntaxError, match="missing source"):
        parse(text)


@pytest.mark.parametrize(
    "edit, error, where",
    [
        (("ratio=0.5", "ratio=0.3"), DslSemanticError, (2, 1)),
        (("ratio=0.5", "ratio 0.5"), DslSyntaxError, (2, 24)),
        (("sweep(-3.14159265, 3.14159265, 41)", "sweep(-3.14159265, 3.14159265, 4.5)"), DslSyntaxError, (3, 42)),
        (("detectors SPD-A SPD-B", "detectors SPD-A"), DslSyntaxError, (5, 16)),
        (("source A", "source A extra"), DslSyntaxError, (1, 10)),
        (("absorber film", "absorber film @"), DslSyntaxError, (4, 15)),
        (("beamsplitter", "splitter"), DslSyntaxError, (2, 1)),
    ],
)
def test_diagnostics_carry_positions(reference_program, edit, error, where):
    text = reference_program.replace(*edit)
    with pytest.raises(error) as exc:
        parse(text)
    assert (exc.value.line, exc.value.col) == where


def test_topology_violations(reference_program):
    lines = reference_program.splitlines()
    swapped = "\n".join([lines[0], lines[2], lines[1], lines[3], lines[4]])
    with pytest.raises(DslSemanticError, match="topology"):
        parse(swapped)
    with pytest.raises(DslSemanticError, match="duplicate"):
        parse(reference_program + "detectors X Y\n")
    with pytest.raises(DslSyntaxError, match="missing absorber"):
        parse("\n".join(lines[:3]))


def test_visibility_range(reference_program):
    with pytest.raises(DslSemanticError):
        parse(reference_program.replace("t=0.5 r=-0.5", "visibility=1.5"))


def test_canonicalization():
    text = "source A\nbeamsplitter bs1 ratio=0.5\nphase  phi = 0.5\nabsorber film t=0.5 r=-0.5\ndetectors SPD-A SPD-B\n"
    assert "phase phi=0.5\n" in pretty_print(parse(text))


def test_sweep_printed_verbatim(reference_program):
    assert pretty_print(parse(reference_program)) == reference_program


@pytest.mark.parametrize("path", CORPUS, ids=lambda p: p.stem)
def test_corpus_round_trip(path):
    ast = parse(path.read_text())
    assert parse(pretty_print(ast)) == ast
    assert pretty_print(parse(pretty_print(ast))) == pretty_print(ast)


def test_corpus_size():
    assert len(CORPUS) == 20


idents = st.from_regex(r"[A-Za-z_][A-Za-z0-9_\-]{0,8}", fullmatch=True).filter(
    lambda s: s not in ("sweep", "visibility", "t", "r", "ratio")
)
nums = st.floats(-10, 10, allow_nan=False)


@st.composite
def asts(draw):
    if draw(st.booleans()):
        value = Sweep(draw(nums), draw(nums), draw(st.integers(1, 200)))
    else:
        value = draw(nums)
    if draw(st.booleans()):
        ab = Absorber(draw(idents), visibility=draw(st.floats(0, 1)))
    else:
        t = draw(st.floats(-0.5, 0.5))
        r = draw(st.floats(-0.5, 0.5))
        ab = Absorber(draw(idents), t=t, r=r)
    return ExperimentAst(
        Source(draw(idents)),
        (Beamsplitter(draw(idents), 0.5), PhaseDelay(draw(idents), value), ab,
         Detectors((draw(idents), draw(idents)))),
    )


@given(asts())
def test_round_trip_property(ast):
    assert parse(pretty_print(ast)) == ast


# -- compiler -------------------------------------------------------------------


def _one(program, phi_line):
    return program.replace("phase phi sweep(-3.14159265, 3.14159265, 41)", phi_line)


def test_compile_ideal_single_phase(reference_program):
    [(phi, sched)] = dsl.compile(parse(_one(reference_program, "phase phi=3.141592653589793")))
    assert phi == math.pi
    assert [p.envelope.area for p in sched] == [math.pi / 2, math.pi / 2, math.pi]
    assert [p.phase for p in sched] == [0.0, math.pi, 0.0]
    assert [p.carrier_freq for p in sched] == [4.97, 4.97, 4.62]
    assert [p.start_time for p in sched] == [0.0, 0.64, 1.28]
    assert all(p.envelope.duration == 0.6 for p in sched)
    assert all(p.envelope.sigma == pytest.approx(0.1, abs=1e-15) for p in sched)


def test_compile_visibility_scales_second_pulse(visibility_program):
    compiled = dsl.compile(parse(visibility_program))
    area = compiled[0][1].instructions[1].envelope.area
    assert area / (math.pi / 2) == pytest.approx(0.7, abs=1e-3)
    assert area == pytest.approx(2 * math.asin(0.891) / math.pi * math.pi / 2, abs=1e-15)


def test_compile_sweep_enumerates_grid(reference_program):
    compiled = dsl.compile(parse(reference_program))
    assert len(compiled) == 41
    phis = [phi for phi, _ in compiled]
    assert [s.instructions[1].phase for _, s in compiled] == phis
    assert phis[0] == -3.14159265 and phis[-1] == 3.14159265 and phis[20] == 0.0


def test_compile_is_deterministic(reference_program):
    a = [serialize_schedule(s) for _, s in dsl.compile(parse(reference_program))]
    b = [serialize_schedule(s) for _, s in dsl.compile(parse(reference_program))]
    assert a == b


def test_compile_oracle_coherence(reference_program):
    ast = parse(reference_program)
    compiled = dsl.compile(ast)
    probs = ideal_probabilities([s for _, s in compiled], DeviceSpec())
    for (phi, _), p in zip(compiled, probs):
        assert p[0] == pytest.approx(dsl.oracle_transmission(ast.absorber, phi), abs=1e-12)


def test_swapped_film_moves_fringe_minimum(reference_program):
    ast = parse(_one(reference_program, "phase phi=0").replace("r=-0.5", "r=0.5"))
    [(_, sched)] = dsl.compile(ast)
    p = ideal_probabilities([sched], DeviceSpec())[0]
    assert p[0] == pytest.approx(1.0, abs=1e-12)
    assert dsl.oracle_transmission(ast.absorber, 0.0) == pytest.approx(1.0)


def test_black_film_cannot_be_compiled(reference_program):
    with pytest.raises(UnsupportedTopology):
        dsl.compile(parse(reference_program.replace("t=0.5 r=-0.5", "t=0 r=0")))


def test_compile_rejects_hand_built_bad_topology():
    ast = ExperimentAst(Source("A"), (PhaseDelay("p", 0.0), Beamsplitter("b", 0.5),
                                      Absorber("f", t=0.5, r=-0.5), Detectors(("x", "y"))))
    with pytest.raises(UnsupportedTopology):
        dsl.compile(ast)


def test_compile_options_validation():
    with pytest.raises(ValueError):
        dsl.CompileOptions(pulse_duration=0)
    with pytest.raises(ValueError):
        dsl.CompileOptions(gap=-1)
