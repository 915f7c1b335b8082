import shutil
import sys
from pathlib import Path

import pytest
import yaml

TESTS = Path(__file__).parent
sys.path.insert(0, str(TESTS))

FIXTURES = TESTS / "fixtures"
CASES = FIXTURES / "cases"
DATA = TESTS / "data"


def fixture_cases() -> list[dict]:
    return yaml.safe_load((CASES / "cases.yaml").read_text())


@pytest.fixture(scope="session")
def cases():
    return fixture_cases()


@pytest.fixture(scope="session")
def sarif_schema():
    import json

    return json.loads((DATA / "sarif-schema-2.1.0.json").read_text())


@pytest.fixture(scope="session")
def synth_root(tmp_path_factory):
    from kcfglint.synth import generate_corpus

    root = tmp_path_factory.mktemp("synth")
    return generate_corpus(root / "corpus")


@pytest.fixture
def all_before(tmp_path):
    """Every before-tree copied side by side under one root."""
    root = tmp_path / "before"
    for case in fixture_cases():
        shutil.copytree(CASES / case["case"] / "before", root / case["case"])
    return root


@pytest.fixture
def all_after(tmp_path):
    root = tmp_path / "after"
    for case in fixture_cases():
        shutil.copytree(CASES / case["case"] / "after", root / case["case"])
    return root


# criterion number -> (passed, title, detail); filled by test_acceptance
ACCEPTANCE: dict[int, tuple[bool, str, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, title, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n}: {title}" + (f" ({detail})" if detail else ""))
