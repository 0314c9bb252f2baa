import random

import pytest

from privroute.paillier import keygen
from privroute.session import loopback_pair


@pytest.fixture(scope="session")
def keypair():
    # seeded keys are for tests only
    return keygen(1024, random.Random(20240101))


@pytest.fixture(scope="session")
def pk(keypair):
    return keypair[0]


@pytest.fixture(scope="session")
def sk(keypair):
    return keypair[1]


@pytest.fixture(scope="session")
def keypair_2048():
    return keygen(2048, random.Random(2048))


@pytest.fixture
def lp(keypair):
    with loopback_pair(keypair, record=True) as pair:
        yield pair


ACCEPTANCE = {
    "test_ac1_oracle_equivalence": "AC1 oracle equivalence (5x5 grid + 500 random pairs)",
    "test_ac2_homomorphic_laws": "AC2 homomorphic laws (add, scalar, two-party mult)",
    "test_ac3_comparison_contract": "AC3 comparison contract (sign, leq)",
    "test_ac4_benchmark_envelope": "AC4 benchmark envelope (2048-bit, 30 trials)",
    "test_ac5_information_boundary": "AC5 information boundary (Bob inbound tags)",
    "test_ac6_deconfliction": "AC6 deconfliction invariant (50 scenarios)",
    "test_ac7_attack_cost_scaling": "AC7 attack-cost scaling (raster probe)",
}


def pytest_terminal_summary(terminalreporter):
    outcomes = {}
    for status in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(status, []):
            if "test_acceptance.py" not in rep.nodeid:
                continue
            if rep.when == "call" or status == "error":
                name = rep.nodeid.split("::")[-1]
                if name in ACCEPTANCE:
                    detail = dict(rep.user_properties).get("detail", "")
                    outcomes[name] = ("PASS" if status == "passed" else "FAIL", detail)
    if not outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for name, label in ACCEPTANCE.items():
        if name in outcomes:
            verdict, detail = outcomes[name]
            terminalreporter.write_line(f"{verdict}  {label}" + (f": {detail}" if detail else ""))
