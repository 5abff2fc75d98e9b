import json
import os

import pytest


@pytest.fixture(scope="session")
def frozen():
    path = os.path.join(os.path.dirname(__file__), "fixtures", "frozen.json")
    with open(path) as fh:
        return json.load(fh)
