import math

import numpy as np
import pytest

import sboltz


@pytest.fixture(scope="module")
def table6():
    return sboltz.build_table(6, 0.5)


def test_collision_invariants_have_zero_eigenvalue():
    for n, l in [(0, 0), (1, 0), (0, 1)]:
        assert abs(sboltz.eigenvalue(n, l, 0.5)) <= 1e-10
    assert sboltz.eigenvalue(2, 0, 0.5) > 0


def test_table_properties_and_round_trip(table6, tmp_path):
    assert table6.n_max_energy == 6
    assert table6.mu_entries > 0
    assert len(table6.digest) == 64
    assert table6.eigenvalue(0, 2) == pytest.approx(sboltz.eigenvalue(0, 2, 0.5), rel=1e-14)
    path = str(tmp_path / "t.tbl")
    table6.save(path)
    back = sboltz.load_table(path)
    assert back == table6
    assert back.digest == table6.digest
    with pytest.raises(sboltz.CoverageError):
        table6.eigenvalue(4, 0)


def test_single_mode_decay(table6):
    init = {(0, 2, 0): 1e-3 + 0j}
    out = sboltz.solve_cascade(table6, init, [0.0, 1.0])
    lam = table6.eigenvalue(0, 2)
    assert out[1][(0, 2, 0)] == pytest.approx(1e-3 * math.exp(-lam), rel=1e-12)


def test_solvers_agree(table6):
    init = sboltz.random_state(6, 1e-2, 3)
    run = sboltz.solve_galerkin(table6, init, t_end=1.0, n_outputs=3)
    cas = sboltz.solve_cascade(table6, init, run["times"])
    for gal, exact in zip(run["states"], cas):
        diff = math.sqrt(sum(abs(gal.get(k, 0) - exact.get(k, 0)) ** 2 for k in set(gal) | set(exact)))
        assert diff <= 1e-7 * 1e-2
    assert all(b <= a for a, b in zip(run["l2_norm"], run["l2_norm"][1:]))


def test_inadmissible_init_is_rejected(table6):
    with pytest.raises(sboltz.AdmissibilityError):
        sboltz.solve_galerkin(table6, {(1, 0, 0): 1e-3 + 0j}, t_end=1.0)
    with pytest.raises(sboltz.AdmissibilityError):
        sboltz.parse_init('{"0,1,0": [1e-3, 0]}')


def test_reconstruct_mass():
    f = sboltz.reconstruct({(0, 2, 0): 1e-2 + 0j}, extent=8.0, points=64)
    assert f.shape == (64, 64, 64)
    h = 16.0 / 63
    w = np.ones(64)
    w[[0, -1]] = 0.5
    mass = np.einsum("i,j,k,ijk->", w, w, w, f) * h**3
    assert mass == pytest.approx(1.0, abs=1e-10)


def test_verification_suites(table6):
    names = sboltz.suite_names()
    assert "orthogonality" in names
    res = sboltz.run_suite("orthogonality", table6)
    assert res["passed"]
    with pytest.raises(sboltz.DomainError):
        sboltz.run_suite("nope", table6)
