import numpy as np
import pytest

from reflect_kernel import generate_group
from reflect_kernel.coxeter import dihedral_roots, orthogonal_roots, trivial_roots

_ACCEPTANCE = []


def record_acceptance(number, title, passed, detail):
    _ACCEPTANCE.append((number, title, bool(passed), detail))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(_ACCEPTANCE):
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {number:2d}. {title}: {detail}")


@pytest.fixture(scope="session")
def groups():
    out = {
        "free1": generate_group(trivial_roots(1)),
        "half": generate_group(orthogonal_roots(1, (1,))),
        "plane_upper": generate_group(orthogonal_roots(2, (2,))),
        "orthant2": generate_group(orthogonal_roots(2, (1, 2))),
        "orthant3": generate_group(orthogonal_roots(3, (1, 2, 3))),
    }
    for n in range(3, 9):
        out[f"D{n}"] = generate_group(dihedral_roots(n))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
