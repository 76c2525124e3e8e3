import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

from editseq.datasets import figure_trace  # noqa: E402
from editseq.pipeline import mine  # noqa: E402
from editseq.template import canonicalize  # noqa: E402

settings.register_profile("ci", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ci")

ADD_PROPERTY_SKETCH = "InsertPropertyDecl.InsertParameter.InsertAssign"


@pytest.fixture(scope="session")
def typed():
    return figure_trace("typed")


@pytest.fixture(scope="session")
def copied():
    return figure_trace("copied")


@pytest.fixture(scope="session")
def diverging():
    return figure_trace("diverging")


@pytest.fixture(scope="session")
def delete_param():
    return figure_trace("delete-param")


@pytest.fixture(scope="session")
def mined(typed, copied):
    return mine([typed, copied])


@pytest.fixture(scope="session")
def add_property_esp(mined):
    """The root pattern of the add-property sketch's dendrogram."""
    hits = [c for c in mined.candidates if str(c.sketch) == ADD_PROPERTY_SKETCH]
    assert hits, "add-property sketch produced no pattern"
    return canonicalize(max(hits, key=lambda c: c.depth).esp)
