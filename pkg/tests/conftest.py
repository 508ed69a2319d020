import pytest

from tegnas import indicators as ind
from tegnas import netgen as ng
from tegnas.data import BlobDataset, DataConfig


@pytest.fixture(scope="session")
def toy_space():
    return ng.toy_enum()


@pytest.fixture(scope="session")
def cell_space():
    return ng.cell201()


@pytest.fixture(scope="session")
def graph_space():
    return ng.graph101()


@pytest.fixture(scope="session")
def blob_data():
    return BlobDataset(DataConfig())


@pytest.fixture(scope="session")
def icfg():
    return ind.IndicatorConfig(base_seed=100)


@pytest.fixture(scope="session")
def toy_reports(toy_space, blob_data, icfg):
    """Indicator reports for the whole ToyEnum space; several tests and
    acceptance criteria share this 27-arch scoring pass."""
    reports = {}
    for arch in ng.enumerate_archs(toy_space):
        rep = ind.evaluate(arch, toy_space, blob_data, icfg)
        reports[rep.arch] = rep
    return reports


@pytest.fixture(scope="session")
def toy_table(toy_reports):
    return ind.table_from_reports(toy_reports.values())
