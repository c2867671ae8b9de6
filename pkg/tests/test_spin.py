import numpy as np
import pytest

from echotop import (
    SpinRep,
    build_angular_momentum,
    coherent_state,
    even_parity_subspace,
    odd_parity_subspace,
    random_state,
    rotation_y,
    symmetric_coupled_subspace,
)
from echotop.models import _single_top_full_propagator
from echotop.spin import hermiticity_defect, jz_eigenvalues, unitarity_defect


def test_rep_validation():
    assert SpinRep(3.5).dim == 8
    assert SpinRep(1000).hbar_eff * 1000 == 1.0
    with pytest.raises(ValueError):
        SpinRep(0.3)
    with pytest.raises(ValueError):
        SpinRep(0)


def test_jz_defining_representation():
    _, _, jz = build_angular_momentum(SpinRep(0.5))
    assert np.allclose(jz, np.diag([0.5, -0.5]))


def test_jx_spin_one_ladder_oracle():
    # ladder amplitudes sqrt(J(J+1) - m(m+1)) for J=1 give 1/sqrt(2) in Jx
    jx, _, _ = build_angular_momentum(SpinRep(1))
    s = 1 / np.sqrt(2)
    expect = np.array([[0, s, 0], [s, 0, s], [0, s, 0]])
    assert np.abs(jx - expect).max() < 1e-14


@pytest.mark.parametrize("J", [0.5, 1, 3.5, 10, 40])
def test_su2_algebra_and_casimir(J):
    rep = SpinRep(J)
    jx, jy, jz = build_angular_momentum(rep)
    scale = 1e-12 * max(J * J, 1.0)
    assert np.abs(jx @ jy - jy @ jx - 1j * jz).max() < scale
    assert np.abs(jy @ jz - jz @ jy - 1j * jx).max() < scale
    assert np.abs(jz @ jx - jx @ jz - 1j * jy).max() < scale
    casimir = jx @ jx + jy @ jy + jz @ jz
    assert np.abs(casimir - J * (J + 1) * np.eye(rep.dim)).max() < 1e-10 * max(J * J, 1.0)
    for op in (jx, jy):
        assert hermiticity_defect(op) < 1e-12 * max(J, 1.0)


def test_rotation_half_spin_series_oracle():
    # truncated power series of exp(-i theta Jy) for the 2x2 case
    rep = SpinRep(0.5)
    theta = np.pi / 2
    _, jy, _ = build_angular_momentum(rep)
    series = np.zeros((2, 2), dtype=complex)
    term = np.eye(2, dtype=complex)
    for k in range(1, 40):
        series += term
        term = term @ (-1j * theta * jy) / k
    got = rotation_y(rep, theta)
    assert np.abs(got - series).max() < 1e-13
    c = 1 / np.sqrt(2)
    assert np.abs(got - np.array([[c, -c], [c, c]])).max() < 1e-12


@pytest.mark.parametrize("J,angle", [(4, 0.0), (4, 1.7), (25, -3.2), (10.5, 0.4)])
def test_rotation_unitary_and_identity(J, angle):
    rep = SpinRep(J)
    u = rotation_y(rep, angle)
    assert unitarity_defect(u) < 1e-12
    if angle == 0.0:
        assert np.abs(u - np.eye(rep.dim)).max() < 1e-13


def test_rotation_composition():
    rep = SpinRep(12)
    a, b = 0.83, -1.91
    lhs = rotation_y(rep, a) @ rotation_y(rep, b)
    assert np.abs(lhs - rotation_y(rep, a + b)).max() < 1e-10


def test_coherent_state_poles():
    rep = SpinRep(6)
    north = coherent_state(rep, 0.0, 0.3)
    assert abs(abs(north[0]) - 1.0) < 1e-12
    south = coherent_state(rep, np.pi, 0.0)
    assert abs(abs(south[-1]) - 1.0) < 1e-12


def test_coherent_state_direction_and_binomial_oracle():
    # oracle: log-binomial amplitude formula for |theta, phi>
    rep = SpinRep(300)
    theta, phi = 1.0, 1.0
    psi = coherent_state(rep, theta, phi)
    m = jz_eigenvalues(rep)
    mean_z = np.real(np.vdot(psi, m * psi)) / rep.J
    assert abs(mean_z - np.cos(theta)) < 2.0 / rep.J
    from scipy.special import gammaln

    j = rep.J
    logbin = gammaln(2 * j + 1) - gammaln(j + m + 1) - gammaln(j - m + 1)
    amp = np.exp(
        0.5 * logbin
        + (j + m) * np.log(np.cos(theta / 2))
        + (j - m) * np.log(np.sin(theta / 2))
    )
    amp = amp * np.exp(-1j * m * phi)
    amp /= np.linalg.norm(amp)
    # global phase is conventional; compare overlap modulus
    assert abs(abs(np.vdot(amp, psi)) - 1.0) < 1e-10


def test_coherent_state_norm():
    psi = coherent_state(SpinRep(77), 2.0, -0.7)
    assert abs(np.linalg.norm(psi) - 1.0) < 1e-12


def test_random_state_statistics():
    dim = 1000
    psi = random_state(dim, 42)
    assert abs(np.linalg.norm(psi) - 1.0) < 1e-12
    assert np.array_equal(psi, random_state(dim, 42))
    mags = np.concatenate([np.abs(random_state(dim, s)) ** 2 for s in range(100)])
    assert abs(mags.mean() - 1.0 / dim) < 0.1 / dim
    overlap = abs(np.vdot(random_state(dim, 1), random_state(dim, 2))) ** 2
    assert overlap < 10.0 / dim


def test_odd_parity_subspace_structure():
    rep = SpinRep(8)
    basis = odd_parity_subspace(rep)
    assert basis.dim == 8
    assert basis.gram_defect() < 1e-12
    # odd under the pi y-rotation
    s = rotation_y(rep, np.pi)
    for k in range(basis.dim):
        v = basis.matrix[:, k]
        assert np.abs(s @ v + v).max() < 1e-12


def test_parity_subspaces_complementary():
    rep = SpinRep(10)
    odd = odd_parity_subspace(rep)
    even = even_parity_subspace(rep)
    assert odd.dim + even.dim == rep.dim
    cross = odd.matrix.T.conj() @ even.matrix
    assert np.abs(cross).max() < 1e-14


def test_odd_subspace_invariant_under_propagator():
    rep = SpinRep(100)
    basis = odd_parity_subspace(rep)
    u0 = _single_top_full_propagator(rep, 30.0)
    p = basis.matrix
    resid = u0 @ p - p @ (p.conj().T @ u0 @ p)
    assert np.linalg.norm(resid) < 1e-10


def test_odd_subspace_rejects_bad_spins():
    with pytest.raises(ValueError):
        odd_parity_subspace(SpinRep(7))
    with pytest.raises(ValueError):
        odd_parity_subspace(SpinRep(4.5))


def test_symmetric_coupled_subspace_structure():
    rep = SpinRep(6)
    basis = symmetric_coupled_subspace(rep)
    assert basis.dim == 6 * 7
    assert basis.gram_defect() < 1e-12
    # exchange of the tensor factors fixes every basis vector
    dim = rep.dim
    mat = basis.matrix.toarray()
    swapped = mat.reshape(dim, dim, -1).transpose(1, 0, 2).reshape(dim * dim, -1)
    assert np.abs(swapped - mat).max() < 1e-12


def test_symmetric_coupled_subspace_invariance():
    from echotop import TopParams
    from echotop.models import coupled_step_factors

    rep = SpinRep(10)
    basis = symmetric_coupled_subspace(rep)
    params = TopParams(kind="coupled", J=10, eps=20.0)
    fac = coupled_step_factors(params)
    # evolve each basis vector one kick and check it stays in the span
    mat = basis.matrix.toarray()
    dim = rep.dim
    worst = 0.0
    for k in range(basis.dim):
        grid = mat[:, k].reshape(dim, dim)
        out = fac.step(grid).ravel()
        coeff = basis.project(out)
        worst = max(worst, np.linalg.norm(out - basis.embed(coeff)))
    assert worst < 1e-10
