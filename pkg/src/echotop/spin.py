"""Angular-momentum algebra for kicked-top simulations.

Builds the spin-J operator matrices, y-axis rotations, coherent and random
initial states, and the parity-symmetry subspaces that the kicked-top
propagators leave invariant.  Everything here is a pure function of its
arguments; returned arrays should be treated as read-only.

Conventions
-----------
* The computational basis is the Jz eigenbasis ordered by descending
  eigenvalue, m = J, J-1, ..., -J.
* Coherent states are labelled by the polar angle ``theta`` measured from
  the +z axis and the azimuth ``phi`` measured from +x, so that
  <J>/J points along (sin th cos ph, sin th sin ph, cos th).
* The effective Planck constant is hbar_eff = 1/J.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

__all__ = [
    "SpinRep",
    "SubspaceBasis",
    "build_angular_momentum",
    "jz_eigenvalues",
    "rotation_y",
    "coherent_state",
    "random_state",
    "odd_parity_subspace",
    "even_parity_subspace",
    "symmetric_coupled_subspace",
    "unitarity_defect",
    "hermiticity_defect",
]


@dataclass(frozen=True)
class SpinRep:
    """An su(2) representation of spin magnitude J (integer or half-integer).

    Attributes
    ----------
    J : float
        Spin magnitude.  2J must be a non-negative integer.
    """

    J: float

    def __post_init__(self):
        two_j = 2 * self.J
        if abs(two_j - round(two_j)) > 1e-9 or two_j < 1:
            raise ValueError(f"J must be a positive half-integer, got {self.J}")
        object.__setattr__(self, "J", round(two_j) / 2.0)

    @property
    def dim(self):
        """Hilbert-space dimension 2J + 1."""
        return int(round(2 * self.J)) + 1

    @property
    def hbar_eff(self):
        """Effective Planck constant 1/J (so hbar_eff * J = 1 exactly)."""
        return 1.0 / self.J


def jz_eigenvalues(rep):
    """Jz eigenvalues in basis order: J, J-1, ..., -J."""
    return rep.J - np.arange(rep.dim)


def build_angular_momentum(rep):
    """Matrices (Jx, Jy, Jz) in the descending-m Jz eigenbasis.

    Built from the ladder operators, <m+1|J+|m> = sqrt(J(J+1) - m(m+1)).

    Returns
    -------
    (jx, jy, jz) : complex ndarrays of shape (dim, dim)
        jz is diagonal; jx, jy are hermitian and satisfy [jx, jy] = i jz.
    """
    m = jz_eigenvalues(rep)
    dim = rep.dim
    jz = np.diag(m.astype(complex))
    jp = np.zeros((dim, dim), dtype=complex)
    # J+ raises m; with descending ordering that moves row index up by one
    amp = np.sqrt(rep.J * (rep.J + 1) - m[1:] * (m[1:] + 1))
    jp[np.arange(dim - 1), np.arange(1, dim)] = amp
    jm = jp.conj().T
    jx = (jp + jm) / 2.0
    jy = (jp - jm) / 2.0j
    return jx, jy, jz


# Jy eigensystems are expensive for large J and reused by every rotation,
# coherent state and propagator, so cache them per spin magnitude.
_JY_EIG_CACHE = {}


def _jy_eigensystem(rep):
    key = rep.J
    if key not in _JY_EIG_CACHE:
        _, jy, _ = build_angular_momentum(rep)
        _JY_EIG_CACHE[key] = np.linalg.eigh(jy)
    return _JY_EIG_CACHE[key]


def rotation_y(rep, angle):
    """Rotation operator exp(-i * angle * Jy).

    Exact to machine precision: Jy is diagonalized once per representation
    and only the eigenphases depend on the angle.
    """
    if not np.isfinite(angle):
        raise ValueError("rotation angle must be finite")
    w, v = _jy_eigensystem(rep)
    return (v * np.exp(-1j * angle * w)) @ v.conj().T


def coherent_state(rep, theta, phi):
    """SU(2) coherent state centred at polar angle theta, azimuth phi.

    Constructed as exp(-i phi Jz) exp(-i theta Jy) |m=J>, which makes the
    mean spin direction (sin th cos ph, sin th sin ph, cos th) exact and
    avoids overflowing binomial coefficients at large J.
    """
    if not 0.0 <= theta <= np.pi:
        raise ValueError("theta must lie in [0, pi]")
    top = np.zeros(rep.dim, dtype=complex)
    top[0] = 1.0
    psi = rotation_y(rep, theta) @ top
    psi = np.exp(-1j * phi * jz_eigenvalues(rep)) * psi
    # rotations are unitary; renormalize only to strip rounding
    return psi / np.linalg.norm(psi)


def random_state(dim, seed):
    """Normalized state with i.i.d. complex-Gaussian amplitudes.

    Deterministic for a given seed (numpy default_rng).
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = np.random.default_rng(seed)
    psi = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return psi / np.linalg.norm(psi)


@dataclass
class SubspaceBasis:
    """Orthonormal basis of an invariant subspace, as columns of a matrix.

    ``matrix`` has shape (full_dim, dim) and may be dense or scipy-sparse.
    ``symmetry_classes`` counts the discrete-symmetry classes carried by
    states in this subspace (enters the Heisenberg time).
    """

    matrix: object
    label: str = ""
    symmetry_classes: int = 1
    meta: dict = field(default_factory=dict)

    @property
    def full_dim(self):
        return self.matrix.shape[0]

    @property
    def dim(self):
        return self.matrix.shape[1]

    def project(self, psi_full):
        """Coefficients of the projection of a full-space vector."""
        out = self.matrix.conj().T @ psi_full
        return np.asarray(out).ravel()

    def embed(self, coeffs):
        """Full-space vector from subspace coefficients."""
        out = self.matrix @ coeffs
        return np.asarray(out).ravel()

    def restrict(self, op_full):
        """Restriction P^dag A P of a dense full-space operator."""
        p = self.matrix
        if sparse.issparse(p):
            left = p.conj().T @ op_full  # sparse @ dense -> dense
            return (p.conj().T @ left.conj().T).conj().T
        return p.conj().T @ op_full @ p

    def gram_defect(self):
        """Max deviation of the basis Gram matrix from the identity."""
        g = self.matrix.conj().T @ self.matrix
        if sparse.issparse(g):
            g = g.toarray()
        return np.abs(g - np.eye(self.dim)).max()


def _check_even_integer_spin(rep):
    if abs(rep.J - round(rep.J)) > 1e-12 or int(round(rep.J)) % 2 != 0:
        raise ValueError(
            f"J={rep.J}: the parity subspaces pair the +/-m levels in blocks "
            "of two, which requires an even integer J"
        )


def odd_parity_subspace(rep):
    """Invariant subspace odd under the pi rotation about the y axis.

    For even integer J this is the J-dimensional span of
    (|2m> - |-2m>)/sqrt2 and (|2m-1> + |-(2m-1)>)/sqrt2, m = 1..J/2,
    listed in that order (antisymmetric even-m pairs first).  The kicked-top
    propagator commutes with exp(-i pi Jy) and leaves this span invariant.
    """
    _check_even_integer_spin(rep)
    j = int(round(rep.J))
    dim = rep.dim
    idx = lambda m: j - m  # noqa: E731  (descending-m index)
    cols = np.zeros((dim, j))
    r = 1.0 / np.sqrt(2.0)
    for k, m in enumerate(range(1, j // 2 + 1)):
        cols[idx(2 * m), k] = r
        cols[idx(-2 * m), k] = -r
    for k, m in enumerate(range(1, j // 2 + 1)):
        cols[idx(2 * m - 1), j // 2 + k] = r
        cols[idx(-(2 * m - 1)), j // 2 + k] = r
    return SubspaceBasis(cols, label="odd-parity", meta={"J": rep.J})


def even_parity_subspace(rep):
    """Orthogonal complement of :func:`odd_parity_subspace` (dimension J+1).

    Spanned by |0>, (|2m> + |-2m>)/sqrt2 and (|2m-1> - |-(2m-1)>)/sqrt2.
    """
    _check_even_integer_spin(rep)
    j = int(round(rep.J))
    dim = rep.dim
    idx = lambda m: j - m  # noqa: E731
    cols = np.zeros((dim, j + 1))
    cols[idx(0), 0] = 1.0
    r = 1.0 / np.sqrt(2.0)
    for k, m in enumerate(range(1, j // 2 + 1)):
        cols[idx(2 * m), 1 + k] = r
        cols[idx(-2 * m), 1 + k] = r
    for k, m in enumerate(range(1, j // 2 + 1)):
        cols[idx(2 * m - 1), 1 + j // 2 + k] = r
        cols[idx(-(2 * m - 1)), 1 + j // 2 + k] = -r
    return SubspaceBasis(cols, label="even-parity", meta={"J": rep.J})


def symmetric_coupled_subspace(rep):
    """Exchange-symmetric odd(x)even parity subspace of two coupled spins.

    The span of (|a,b> + |b,a>)/sqrt2 with |a> from the odd-parity basis and
    |b> from the even-parity basis of a single spin; dimension J(J+1).  It is
    invariant under the coupled-top propagator (which commutes with the
    product of the two y-axis pi rotations and with top exchange) and every
    basis vector is fixed by the exchange of the two tops.

    The basis matrix is returned sparse: each column has at most 8 nonzero
    entries in the (2J+1)^2 product basis.
    """
    _check_even_integer_spin(rep)
    a_basis = odd_parity_subspace(rep).matrix
    b_basis = even_parity_subspace(rep).matrix
    dim = rep.dim
    n_a, n_b = a_basis.shape[1], b_basis.shape[1]
    rows, cols, vals = [], [], []
    col = 0
    r = 1.0 / np.sqrt(2.0)
    for a in range(n_a):
        ia = np.nonzero(a_basis[:, a])[0]
        va = a_basis[ia, a]
        for b in range(n_b):
            ib = np.nonzero(b_basis[:, b])[0]
            vb = b_basis[ib, b]
            for i, vi in zip(ia, va):
                for k, vk in zip(ib, vb):
                    rows.append(i * dim + k)
                    cols.append(col)
                    vals.append(vi * vk * r)
                    rows.append(k * dim + i)
                    cols.append(col)
                    vals.append(vi * vk * r)
            col += 1
    mat = sparse.csc_matrix((vals, (rows, cols)), shape=(dim * dim, n_a * n_b))
    return SubspaceBasis(mat, label="symmetric-coupled", meta={"J": rep.J})


def unitarity_defect(u):
    """Max element of |U^dag U - 1|."""
    return np.abs(u.conj().T @ u - np.eye(u.shape[0])).max()


def hermiticity_defect(a):
    """Max element of |A - A^dag|."""
    return np.abs(a - a.conj().T).max()
