import os
import sys
import warnings

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from ctxkit.scenario import Section  # noqa: E402
from ctxkit.zoo import zoo  # noqa: E402


def sec(**kw) -> Section:
    return Section({k: str(v) for k, v in kw.items()})


def load(name):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return zoo(name).model


@pytest.fixture(scope="session")
def hardy():
    return load("hardy")


@pytest.fixture(scope="session")
def table3():
    return load("table3")


@pytest.fixture(scope="session")
def table7():
    return load("table7")


@pytest.fixture(scope="session")
def ks5():
    return load("ks5")


@pytest.fixture(scope="session")
def fig3():
    return load("fig3")
