import numpy as np
import pytest

from isospec.arith import field
from isospec.graphs import build_family, symmetrize
from isospec.spectra import joint_diagonalize


@pytest.fixture(scope="session")
def ctx13():
    return field(13)


@pytest.fixture(scope="session")
def ctx101():
    return field(101)


def make_basis(p, ells, seed=0):
    fam = build_family(p, tuple(ells))
    return joint_diagonalize([symmetrize(fam[ell]) for ell in ells], seed=seed)


@pytest.fixture(scope="session")
def basis101():
    return make_basis(101, (2, 3, 5))


def rng(seed=0):
    return np.random.default_rng(seed)
