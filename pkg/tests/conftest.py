import math

import pytest

REFERENCE_PROGRAM = """\
source A
beamsplitter bs1 ratio=0.5
phase phi sweep(-3.14159265, 3.14159265, 41)
absorber film t=0.5 r=-0.5
detectors SPD-A SPD-B
"""

VISIBILITY_PROGRAM = REFERENCE_PROGRAM.replace("t=0.5 r=-0.5", "visibility=0.891")


def brute_force_sequence(phi, amp_scale=1.0, offset=0.0):
    """Populations after pi/2(AB, offset), scaled pi/2(AB, phi+offset), pi(BC), by hand."""

    def block(i, j, theta, phase):
        m = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
        m = [[complex(x) for x in row] for row in m]
        c, s = math.cos(theta / 2), math.sin(theta / 2)
        m[i][i] = m[j][j] = complex(c)
        m[i][j] = -1j * complex(math.cos(phase), -math.sin(phase)) * s
        m[j][i] = -1j * complex(math.cos(phase), math.sin(phase)) * s
        return m

    def matvec(m, v):
        return [sum(m[r][k] * v[k] for k in range(3)) for r in range(3)]

    v = [1 + 0j, 0j, 0j]
    v = matvec(block(0, 1, math.pi / 2, offset), v)
    v = matvec(block(0, 1, amp_scale * math.pi / 2, phi + offset), v)
    v = matvec(block(1, 2, math.pi, offset), v)
    return [abs(x) ** 2 for x in v]


@pytest.fixture
def reference_program():
    return REFERENCE_PROGRAM


@pytest.fixture
def visibility_program():
    return VISIBILITY_PROGRAM


_acceptance_lines = []


def pytest_runtest_logreport(report):
    if "test_acceptance" not in report.nodeid or report.when != "call":
        return
    label = report.nodeid.split("::")[-1]
    _acceptance_lines.append(f"{'PASS' if report.passed else 'FAIL'}  {label}")


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
