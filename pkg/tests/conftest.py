import json
from pathlib import Path

import pytest

from ducg import EvidenceSet, VariableId, load_model

FIXTURES = Path(__file__).parent / "fixtures"


def X(i: int) -> VariableId:
    return VariableId("X", i)


def B(i: int) -> VariableId:
    return VariableId("B", i)


@pytest.fixture(scope="session")
def fig4_text() -> str:
    return (FIXTURES / "fig4_model.json").read_text(encoding="utf-8")


@pytest.fixture()
def fig4_model(fig4_text):
    return load_model(fig4_text)


@pytest.fixture()
def fig4_evidence(fig4_model):
    return EvidenceSet.for_model(fig4_model, {X(3): 0, X(4): 1, X(8): 1})


@pytest.fixture()
def fig4_evidence_5d(fig4_model):
    return EvidenceSet.for_model(
        fig4_model, {X(1): 0, X(2): 0, X(3): 0, X(4): 1, X(8): 1}
    )


def load_fixture_json(name: str) -> dict:
    return json.loads((FIXTURES / name).read_text(encoding="utf-8"))
