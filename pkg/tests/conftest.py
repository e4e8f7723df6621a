from functools import lru_cache

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from dirac_lab.jalgebra import Signature
from dirac_lab.potential import DiracPotential, SchurSequence, random_schur, schur_to_dirac

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

SIGNATURES = [Signature(1, 1), Signature(2, 1), Signature(1, 2), Signature(2, 2), Signature(3, 1)]
SIG_IDS = [f"{s.m1}x{s.m2}" for s in SIGNATURES]

# rho_0 = 0.5 with m1 = m2 = 1 gives this potential
C_HALF = np.array([[5 / 3, -4 / 3], [-4 / 3, 5 / 3]], dtype=complex)


@lru_cache(maxsize=None)
def sample(seed: int, r: int, m1: int, m2: int, max_norm: float = 0.8):
    """(schur, potential, chain) for a seeded random Schur sequence."""
    schur = random_schur(seed, r, Signature(m1, m2), max_norm)
    pot, chain = schur_to_dirac(schur)
    return schur, pot, chain


def potential(seed: int, r: int, sig: Signature, max_norm: float = 0.8) -> DiracPotential:
    return sample(seed, r, sig.m1, sig.m2, max_norm)[1]


def half_potential() -> DiracPotential:
    return schur_to_dirac(SchurSequence(Signature(1, 1), [[[0.5]]]))[0]


# ---------------------------------------------------------------------------
# acceptance summary: one line per criterion at the end of the run

_CRITERIA: list[tuple[str, bool, str]] = []


@pytest.fixture
def criterion():
    def record(name: str, passed: bool, detail: str = ""):
        _CRITERIA.append((name, bool(passed), detail))
        print(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _CRITERIA:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}")
