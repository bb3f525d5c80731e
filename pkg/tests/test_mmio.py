import logging
from pathlib import Path

import numpy as np
import pytest

from lapsolve.generators import gremban_system
from lapsolve.mmio import (MatrixMarketError, null_vectors, random_rhs, read_matrix_market,
                           write_matrix_market, write_rhs)

FIX = Path(__file__).parent / "fixtures"


def test_edge_fixture():
    a, b, src = read_matrix_market(FIX / "edge.mtx")
    assert a.classification == "laplacian"
    assert np.allclose(a.toarray(), [[1, -1], [-1, 1]])
    assert src == "random" and abs(b.sum()) < 1e-12


def test_positive_fixture():
    a, _, _ = read_matrix_market(FIX / "positive.mtx")
    assert a.classification == "psddd-general"
    assert a.toarray()[0, 1] == 0.5


def test_companion_rhs():
    a, b, src = read_matrix_market(FIX / "path30.mtx")
    assert src.endswith("path30.rhs") and b[0] == 1.0 and b[-1] == -1.0


def test_duplicates_summed(caplog):
    with caplog.at_level(logging.WARNING, logger="lapsolve"):
        a, _, _ = read_matrix_market(FIX / "duplicates.mtx")
    assert a.toarray()[0, 0] == 1.0
    assert a.duplicates == 1
    assert "duplicate" in caplog.text


@pytest.mark.parametrize("name,line", [("bad_header.mtx", 1), ("out_of_bounds.mtx", 4),
                                       ("asymmetric.mtx", 4)])
def test_malformed(name, line):
    with pytest.raises(MatrixMarketError) as err:
        read_matrix_market(FIX / name)
    assert err.value.line == line


def test_round_trip(tmp_path):
    a, b = gremban_system(20, seed=1, excess=1.0)
    write_matrix_market(tmp_path / "m.mtx", a)
    write_rhs(tmp_path / "m.rhs", b)
    a2, b2, _ = read_matrix_market(tmp_path / "m.mtx")
    assert np.array_equal(a2.toarray(), a.toarray())
    assert np.array_equal(b2, b)


def test_rhs_length_checked(tmp_path):
    (tmp_path / "r.rhs").write_text("1.0\n2.0\n")
    with pytest.raises(MatrixMarketError):
        read_matrix_market(FIX / "path30.mtx", tmp_path / "r.rhs")


def test_random_rhs_in_range():
    a, _ = gremban_system(30, seed=2)
    nulls = null_vectors(a)
    b = random_rhs(a, seed=3)
    for v in nulls:
        assert abs(v @ b) < 1e-12
    dense = a.toarray()
    for v in nulls:
        assert np.linalg.norm(dense @ v) < 1e-10
    assert np.array_equal(b, random_rhs(a, seed=3))
