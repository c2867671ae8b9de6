"""Kicked-top models: propagators, perturbation generators, derived operators.

A :class:`TopModel` bundles everything needed for echo runs, restricted to
the invariant parity subspace the initial states are projected on:

* ``u0`` -- the one-kick Floquet propagator,
* ``w``  -- the perturbation generator (W = Jz^2/2J^2 per top),
* ``v``  -- the residual perturbation V = U0^dag W U0 - W (one kick period),
* ``r``  -- the renormalized operator R = (i/hbar) [W, U0^dag W U0].

Restricting before time evolution is exact here because U0, W, V and R all
commute with the subspace projector.

The single top is
    U0 = exp(-i alpha Jz^2 / 2J) exp(-i pi Jy / 2),
the coupled pair is
    U0 = exp(-i eps Jz1 Jz2) exp(-i pi Jy1 / 2) exp(-i pi Jy2 / 2),
with the rightmost factor applied first.  For integer spins the coupling
phases exp(-i eps m1 m2) are exactly 2pi-periodic in eps, so the effective
coupling is eps reduced to (-pi, pi]; the classical counterpart uses the
reduced value times J as its torsion strength.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .spin import (
    SpinRep,
    SubspaceBasis,
    build_angular_momentum,
    jz_eigenvalues,
    odd_parity_subspace,
    rotation_y,
    symmetric_coupled_subspace,
)

__all__ = [
    "TopParams",
    "TopModel",
    "single_top",
    "coupled_tops",
    "residual_perturbation",
    "renormalized_operator",
    "perturbed_propagator",
    "coupled_step_factors",
    "COUPLED_DENSE_DIM_CAP",
]

# Dense eigendecomposition beyond this subspace dimension is impractical on a
# desk machine; the step-wise tensor path in echo.py has no such limit.
COUPLED_DENSE_DIM_CAP = 12_000


def reduced_coupling(eps):
    """Coupling phase reduced to (-pi, pi].

    Integer-spin coupled tops satisfy exp(-i eps m1 m2) = exp(-i eps' m1 m2)
    for eps' = eps mod 2pi, so only the reduced value is observable.
    """
    red = math.remainder(eps, 2 * math.pi)
    return red if red != -math.pi else math.pi


@dataclass(frozen=True)
class TopParams:
    """Defining parameters of a kicked-top model.

    kind is "single" (torsion strength ``alpha``) or "coupled" (coupling
    strength ``eps``); J is the spin magnitude of each top.
    """

    kind: str
    J: float
    alpha: float = 0.0
    eps: float = 0.0

    def __post_init__(self):
        if self.kind not in ("single", "coupled"):
            raise ValueError(f"unknown model kind {self.kind!r}")

    @property
    def rep(self):
        return SpinRep(self.J)

    @property
    def degrees_of_freedom(self):
        return 1 if self.kind == "single" else 2

    @property
    def hbar_eff(self):
        return 1.0 / self.J

    @property
    def subspace_dim(self):
        """Dimension of the invariant subspace carrying the dynamics."""
        j = int(round(self.J))
        return j if self.kind == "single" else j * (j + 1)

    @property
    def coupling_reduced(self):
        """2pi-reduced coupling phase (coupled models)."""
        return reduced_coupling(self.eps)

    def as_dict(self):
        d = {"kind": self.kind, "J": self.J}
        if self.kind == "single":
            d["alpha"] = self.alpha
        else:
            d["eps"] = self.eps
        return d


@dataclass
class TopModel:
    """A kicked top with operators restricted to its invariant subspace.

    All matrices have shape (N, N) with N = subspace dimension.  Instances
    are immutable by convention: nothing mutates them after construction and
    they are safe to share read-only across workers.
    """

    params: TopParams
    subspace: SubspaceBasis
    u0: np.ndarray
    w: np.ndarray
    v: np.ndarray
    r: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def dim(self):
        return self.u0.shape[0]

    @property
    def rep(self):
        return self.params.rep


def residual_perturbation(u0, w, tau=1.0):
    """Residual perturbation V = (U0^dag W U0 - W) / tau.

    V is hermitian, traceless, and has vanishing diagonal in the U0
    eigenbasis (it is a discrete time derivative along the unperturbed
    evolution).
    """
    return (u0.conj().T @ w @ u0 - w) / tau


def renormalized_operator(u0, w, hbar, tau=1.0):
    """Renormalized generator R = (i / tau hbar) [W, U0^dag W U0].

    Governs the post-plateau echo decay when used with the renormalized
    strength delta^2/2.
    """
    w1 = u0.conj().T @ w @ u0
    return (1j / (tau * hbar)) * (w @ w1 - w1 @ w)


def _expm_hermitian_factor(gen, scale):
    """exp(-i * scale * gen) for hermitian gen, via one eigendecomposition."""
    wvals, s = np.linalg.eigh(gen)
    return (s * np.exp(-1j * scale * wvals)) @ s.conj().T


def perturbed_propagator(model, delta, generator="residual"):
    """One-kick perturbed propagator U0 exp(-i G delta / hbar_eff).

    ``generator`` selects G: "residual" uses V (the physical perturbed top),
    "renormalized" uses R (pair it with strength delta^2/2).
    delta = 0 returns u0 itself.
    """
    if not np.isfinite(delta):
        raise ValueError("delta must be finite")
    if delta == 0.0:
        return model.u0
    gen = model.v if generator == "residual" else model.r
    return model.u0 @ _expm_hermitian_factor(gen, delta * model.params.J)


def _single_top_full_propagator(rep, alpha):
    m = jz_eigenvalues(rep)
    kick = np.exp(-1j * alpha * m**2 / (2.0 * rep.J))
    return kick[:, None] * rotation_y(rep, np.pi / 2)


def single_top(J, alpha):
    """Kicked top restricted to the odd-parity invariant subspace.

    Propagator exp(-i alpha Jz^2/2J) exp(-i pi Jy/2) with perturbation
    generator W = Jz^2/2J^2, so that V = (Jx^2 - Jz^2)/2J^2 and
    R = -(Jx Jy Jz + Jz Jy Jx)/2J^3.
    """
    params = TopParams(kind="single", J=float(J), alpha=float(alpha))
    rep = params.rep
    basis = odd_parity_subspace(rep)
    p = basis.matrix
    u0_full = _single_top_full_propagator(rep, alpha)
    u0 = p.conj().T @ u0_full @ p
    m = jz_eigenvalues(rep)
    w = p.conj().T @ ((m**2 / (2.0 * params.J**2))[:, None] * p)
    w = w.astype(complex)
    v = residual_perturbation(u0, w)
    r = renormalized_operator(u0, w, params.hbar_eff)
    return TopModel(params=params, subspace=basis, u0=u0, w=w, v=v, r=r)


def _restrict_product_operator(basis, a, b, diag_grid=None, batch=256):
    """P^dag [diag . (A (x) B)] P for the sparse coupled basis P.

    Exploits vec(A C B^T) = (A (x) B) vec(C): columns of P are unpacked to
    (dim, dim) blocks, transformed batched, optionally multiplied by a
    diagonal phase grid, and re-projected.  Cost is O(N dim^3 / batch-free),
    memory O(batch dim^2).
    """
    p = basis.matrix
    dim = a.shape[0]
    n = p.shape[1]
    pc = p.conj().T.tocsr()
    out = np.empty((n, n), dtype=complex)
    bt = b.T.copy()
    for s in range(0, n, batch):
        blk = p[:, s : s + batch].toarray()
        c = np.ascontiguousarray(blk.T).reshape(-1, dim, dim)
        tr = a @ c @ bt
        if diag_grid is not None:
            tr = tr * diag_grid[None, :, :]
        out[:, s : s + batch] = pc @ tr.reshape(len(c), dim * dim).T
    return out


def coupled_tops(J, eps, dim_cap=COUPLED_DENSE_DIM_CAP):
    """Two coupled kicked tops restricted to the symmetric invariant subspace.

    The perturbation generator is W = A (x) 1 + 1 (x) A with A = Jz^2/2J^2,
    which is diagonal in the product basis.  V and R decompose per top, with
    the same single-top forms on each factor.

    Raises if the subspace dimension J(J+1) exceeds ``dim_cap``; above the
    cap use the step-wise tensor path (`echo.CoupledStepper`) instead of
    dense spectral evolution.
    """
    params = TopParams(kind="coupled", J=float(J), eps=float(eps))
    rep = params.rep
    n_sub = params.subspace_dim
    if n_sub > dim_cap:
        raise ValueError(
            f"coupled subspace dimension {n_sub} exceeds the dense cap "
            f"{dim_cap}; use the step-wise tensor evolution path for J={J}"
        )
    basis = symmetric_coupled_subspace(rep)
    m = jz_eigenvalues(rep)
    rot = rotation_y(rep, np.pi / 2)
    # reduced coupling: exactly equivalent for integer m1*m2
    kick = np.exp(-1j * params.coupling_reduced * np.outer(m, m))
    u0 = _restrict_product_operator(basis, rot, rot, diag_grid=kick)
    w_grid = np.add.outer(m**2, m**2).ravel() / (2.0 * params.J**2)
    pc = basis.matrix.conj().T.tocsr()
    w = ((pc.multiply(w_grid[None, :])) @ basis.matrix.tocsc()).toarray()
    w = w.astype(complex)
    v = residual_perturbation(u0, w)
    r = renormalized_operator(u0, w, params.hbar_eff)
    return TopModel(params=params, subspace=basis, u0=u0, w=w, v=v, r=r)


@dataclass
class CoupledStepFactors:
    """Per-top factors for full-product-space stepping of the coupled echo.

    One unperturbed kick is psi -> kick * (rot psi rot^T) on the (dim, dim)
    coefficient grid; the perturbed kick applies ``k_pert`` on each factor
    first.  Exact because V and R are sums of one-top operators.
    """

    rot: np.ndarray
    kick_grid: np.ndarray
    k_pert: np.ndarray | None

    def step(self, grid, perturbed=False):
        if perturbed and self.k_pert is not None:
            grid = self.k_pert @ grid @ self.k_pert.T
        return self.kick_grid * (self.rot @ grid @ self.rot.T)


def coupled_step_factors(params, delta=0.0, generator="residual"):
    """Build :class:`CoupledStepFactors` for the coupled model.

    ``generator`` selects the per-top perturbation generator as in
    :func:`perturbed_propagator`.
    """
    if params.kind != "coupled":
        raise ValueError("step factors are defined for coupled models")
    rep = params.rep
    m = jz_eigenvalues(rep)
    rot = rotation_y(rep, np.pi / 2)
    kick = np.exp(-1j * params.coupling_reduced * np.outer(m, m))
    k = None
    if delta != 0.0:
        jx, jy, jz = build_angular_momentum(rep)
        if generator == "residual":
            gen = (jx @ jx - jz @ jz) / (2.0 * params.J**2)
        else:
            gen = -(jx @ jy @ jz + jz @ jy @ jx) / (2.0 * params.J**3)
        k = _expm_hermitian_factor(gen, delta * params.J)
    return CoupledStepFactors(rot=rot, kick_grid=kick, k_pert=k)
