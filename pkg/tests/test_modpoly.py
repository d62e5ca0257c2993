"""Modular polynomial ingestion: format, lookup, and structural checks."""

import numpy as np
import pytest

from isospec.arith import field
from isospec.errors import DegreeMismatch, ParseError, Unavailable
from isospec.modpoly import (ENV_PHI_DIR, bundled, bundled_levels,
                             load_modular_polynomial)

PHI2_TABLE = {
    (3, 0): 1, (2, 2): -1, (2, 1): 1488, (2, 0): -162000,
    (1, 1): 40773375, (1, 0): 8748000000, (0, 0): -157464000000000,
}


def test_bundled_levels_cover_the_desk_scale():
    levels = bundled_levels()
    assert set(levels) >= {2, 3, 5, 7, 11, 13}          # required builtins
    assert max(levels) >= 31                            # window primes to p=5000


def test_phi2_matches_published_table():
    phi = bundled(2)
    assert dict(((i, j), c) for i, j, c in phi.monomials) == PHI2_TABLE


def test_degrees():
    assert max(i for i, _, _ in bundled(3).monomials) == 4
    for ell in (2, 3, 5, 7, 11, 13):
        grid = np.array(bundled(ell).coefficient_grid(), dtype=object)
        assert grid.shape == (ell + 2, ell + 2)
        assert grid[ell + 1][0] == 1 and grid[0][ell + 1] == 1


def test_symmetry_of_evaluation():
    ctx = field(1009)
    g = np.random.default_rng(3)
    for ell in (2, 3, 5, 7, 11, 13):
        phi = bundled(ell)
        for _ in range(100):
            x = (int(g.integers(1009)), int(g.integers(1009)))
            y = (int(g.integers(1009)), int(g.integers(1009)))
            assert phi.evaluate(x, y, ctx) == phi.evaluate(y, x, ctx)


def test_kronecker_congruence():
    # Phi_ell == (X^ell - Y)(X - Y^ell) mod ell
    for ell in (2, 3, 5, 17, 31):
        grid = np.array(bundled(ell).coefficient_grid(), dtype=object) % ell
        expect = np.zeros_like(grid)
        expect[ell + 1][0] = 1
        expect[0][ell + 1] = 1
        expect[ell][ell] = (-1) % ell
        expect[1][1] = (-1) % ell
        assert np.array_equal(grid, expect), ell


def test_file_roundtrip_and_env_dir(tmp_path, monkeypatch):
    src = bundled(2)
    lines = ["# roundtrip"] + [f"{i} {j} {c}" for i, j, c in src.monomials]
    path = tmp_path / "phi_ell_2.txt"
    path.write_text("\n".join(lines) + "\n")
    assert load_modular_polynomial(2, path).monomials == src.monomials
    assert load_modular_polynomial(2, tmp_path).monomials == src.monomials
    monkeypatch.setenv(ENV_PHI_DIR, str(tmp_path))
    assert load_modular_polynomial(2).monomials == src.monomials


def test_parse_errors(tmp_path):
    bad = tmp_path / "phi_ell_2.txt"
    bad.write_text("3 0 1\n2 2 not_an_int\n")
    with pytest.raises(ParseError):
        load_modular_polynomial(2, bad)
    bad.write_text("0 3 1\n")  # i < j
    with pytest.raises(ParseError):
        load_modular_polynomial(2, bad)
    bad.write_text("3 0 1\n3 0 2\n")  # duplicate
    with pytest.raises(ParseError):
        load_modular_polynomial(2, bad)
    bad.write_text("# only comments\n")
    with pytest.raises(ParseError):
        load_modular_polynomial(2, bad)


def test_degree_mismatch(tmp_path):
    f = tmp_path / "phi_ell_2.txt"
    f.write_text("2 0 1\n1 1 -1\n0 0 5\n")  # deg_X = 2, needs 3
    with pytest.raises(DegreeMismatch):
        load_modular_polynomial(2, f)


def test_unavailable():
    with pytest.raises(Unavailable):
        load_modular_polynomial(53)
    with pytest.raises(Unavailable):
        load_modular_polynomial(2, "/nonexistent/phi_ell_2.txt")


def test_nonprime_level_rejected(tmp_path):
    with pytest.raises(ParseError):
        load_modular_polynomial(4, tmp_path)
