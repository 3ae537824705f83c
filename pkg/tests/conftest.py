from __future__ import annotations

from pathlib import Path

import hypothesis
import pytest

hypothesis.settings.register_profile("default", deadline=None)
hypothesis.settings.load_profile("default")

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def planted_dir() -> Path:
    return FIXTURES / "planted"


@pytest.fixture(scope="session")
def gett_dir() -> Path:
    return FIXTURES / "gett"


@pytest.fixture()
def make_table():
    from taxoforge.corpus import Table

    def build(table_id="t", headers=None, rows=None):
        return Table(id=table_id, headers=headers or ["a"], rows=rows or [])

    return build
