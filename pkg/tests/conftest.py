import sys

import pytest
from hypothesis import HealthCheck, settings

from prodchain import identity

settings.register_profile(
    "prodchain",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("prodchain")


@pytest.fixture(scope="session")
def wallets():
    """Three registered stakeholders, built once per session."""
    docs = [
        ("trade-license", b"ACME Foods Ltd, license 4411", "manufacturer"),
        ("national-id", b"Dana Reyes 7710-22", "distributor"),
        ("international-id", b"P1234567 Kenji Sato", "retailer"),
    ]
    return [identity.issue_wallet(identity.ProofMetrics(t, d, r)) for t, d, r in docs]


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("tests.test_acceptance")
    results = getattr(module, "RESULTS", {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        ok, title, detail = results[n]
        terminalreporter.write_line(f"criterion {n} {'PASS' if ok else 'FAIL'}: {title} ({detail})")
