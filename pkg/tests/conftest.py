import pytest

from _laws import CATALOG, CONTINUOUS, law_id


@pytest.fixture(params=CONTINUOUS, ids=law_id)
def continuous_law(request):
    return request.param


@pytest.fixture(params=CATALOG, ids=law_id)
def any_law(request):
    return request.param
