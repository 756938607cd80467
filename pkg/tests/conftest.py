import numpy as np
import pytest
from hypothesis import settings

from smallhole.geometry import ClosedCurve
from smallhole.model import FourierData, ProblemSpec, RobinNonlinearity, ScalingFamily

settings.register_profile("default", max_examples=25, deadline=None)
settings.load_profile("default")

BUILTIN_CURVES = {
    "circle": ClosedCurve.circle(1.0),
    "circle2": ClosedCurve.circle(2.0),
    "ellipse": ClosedCurve.ellipse(2.0, 1.0),
    "ellipse15": ClosedCurve.ellipse(1.5, 1.0),
    "star3": ClosedCurve.star(1.0, 0.2, 3),
    "star5": ClosedCurve.star(1.0, 0.3, 5),
    "fourier": ClosedCurve.fourier([1.0, 0.1, 0.05], [0.0, 0.0, 0.08]),
}

GENERAL_SCALING = ScalingFamily("inv_eps_log", d0=1.0, rho_kind="linear", rho_value=0.5)
G_OUTER = FourierData((0.5, 0.2), (0.0, 0.0, 0.1))
G_INNER = FourierData((0.3, 0.0, 0.2), (0.0, 0.1))


def general_spec(n=128, nonlinearity="linear", scaling=GENERAL_SCALING):
    return ProblemSpec(ClosedCurve.ellipse(1.5, 1.0), ClosedCurve.star(1.0, 0.2, 3), G_OUTER, G_INNER,
                       scaling, RobinNonlinearity(nonlinearity), n, n)


@pytest.fixture
def spec128():
    return general_spec(128)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# One verdict line per acceptance criterion, repeated in the terminal summary.
ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, title: str, passed: bool, detail: str) -> None:
    line = f"{'PASS' if passed else 'FAIL'} criterion {number}: {title} | {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
