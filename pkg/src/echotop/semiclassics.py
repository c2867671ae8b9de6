"""Classical kicked-top dynamics and semiclassical echo predictions.

The classical phase space is the unit sphere (one per top), with points
stored as rows (x, y, z) of shape (..., 3) arrays; coupled-top ensembles
concatenate the two spheres into (..., 6).  The single-top map is the pi/2
rotation about y, (x, y, z) -> (z, y, -x), followed by a rotation about z
through the angle alpha*z (torsion).  The coupled map rotates both spheres
and then applies the coupling torsion: each top turns about z through
eps_reduced * J * z_partner.  These orderings and signs are fixed against
the quantum propagators by the Ehrenfest-correspondence tests.

Predictions cover the fidelity plateau (linear response and exact via the
generating function), the transport rate sigma of the renormalized
observable, the crossover time t2, the Heisenberg time, and the
exponential/Gaussian post-plateau decay laws.
"""

import json
import warnings
from dataclasses import dataclass, asdict

import numpy as np
from scipy.special import erf

__all__ = [
    "uniform_sphere",
    "uniform_ensemble",
    "classical_map",
    "classical_map_inverse",
    "classical_kick_z",
    "w_classical",
    "r_classical",
    "classical_average",
    "kappa_cl_sq",
    "TransportRateResult",
    "transport_rate",
    "generating_function",
    "generating_function_mc",
    "plateau_prediction",
    "stationary_phase_envelope",
    "Timescales",
    "timescales",
    "decay_prediction",
    "decay_factor",
    "PredictionSet",
    "predictions_for",
]


# ---------------------------------------------------------------------------
# phase-space sampling and maps


def uniform_sphere(count, rng):
    """Uniformly distributed unit vectors, shape (count, 3)."""
    z = rng.uniform(-1.0, 1.0, count)
    phi = rng.uniform(0.0, 2.0 * np.pi, count)
    rho = np.sqrt(1.0 - z * z)
    return np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=1)


def uniform_ensemble(params, count, rng):
    """Uniform ensemble on the model's phase space: (count, 3d)."""
    if params.degrees_of_freedom == 1:
        return uniform_sphere(count, rng)
    return np.concatenate([uniform_sphere(count, rng), uniform_sphere(count, rng)], axis=1)


def _rot_z(x, y, angle):
    c, s = np.cos(angle), np.sin(angle)
    return c * x - s * y, s * x + c * y


def _single_step(pts, alpha):
    # pi/2 rotation about y, then torsion about z by alpha*z
    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
    x, z = z, -x
    xn, yn = _rot_z(x, y, alpha * z)
    return np.stack([xn, yn, z], axis=1)


def _single_step_inverse(pts, alpha):
    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
    xn, yn = _rot_z(x, y, -alpha * z)  # torsion preserves z, so this is exact
    return np.stack([-z, yn, xn], axis=1)


def _coupled_step(pts, torsion):
    p1, p2 = pts[:, :3], pts[:, 3:]
    x1, y1, z1 = p1[:, 0], p1[:, 1], p1[:, 2]
    x2, y2, z2 = p2[:, 0], p2[:, 1], p2[:, 2]
    x1, z1 = z1, -x1
    x2, z2 = z2, -x2
    # both torsion angles depend only on the (conserved) z of the partner
    x1, y1 = _rot_z(x1, y1, torsion * z2)
    x2, y2 = _rot_z(x2, y2, torsion * z1)
    return np.stack([x1, y1, z1, x2, y2, z2], axis=1)


def _coupled_step_inverse(pts, torsion):
    p1, p2 = pts[:, :3], pts[:, 3:]
    x1, y1, z1 = p1[:, 0], p1[:, 1], p1[:, 2]
    x2, y2, z2 = p2[:, 0], p2[:, 1], p2[:, 2]
    x1, y1 = _rot_z(x1, y1, -torsion * z2)
    x2, y2 = _rot_z(x2, y2, -torsion * z1)
    return np.stack([-z1, y1, x1, -z2, y2, x2], axis=1)


def _torsion_strength(params):
    # quantum coupling phases are 2pi-periodic in eps for integer spins;
    # the matching classical torsion uses the reduced coupling times J
    return params.coupling_reduced * params.J


def classical_map(pts, params):
    """One kick of the classical map matching the model's quantum propagator."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    if params.kind == "single":
        return _single_step(pts, params.alpha)
    return _coupled_step(pts, _torsion_strength(params))


def classical_map_inverse(pts, params):
    """Exact inverse of :func:`classical_map`."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    if params.kind == "single":
        return _single_step_inverse(pts, params.alpha)
    return _coupled_step_inverse(pts, _torsion_strength(params))


def classical_kick_z(pts, strength):
    """Perturbation kick generated by strength * z^2/2 on each sphere.

    A rotation about z through strength*z; this is the classical counterpart
    of exp(-i delta W / hbar) for W = Jz^2/2J^2 at strength = delta.
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=float)).copy()
    for off in range(0, pts.shape[1], 3):
        x, y, z = pts[:, off], pts[:, off + 1], pts[:, off + 2]
        xn, yn = _rot_z(x, y, strength * z)
        pts[:, off] = xn
        pts[:, off + 1] = yn
    return pts


# ---------------------------------------------------------------------------
# classical observables and averages


def w_classical(pts, params=None):
    """Classical perturbation generator: z^2/2 summed over spheres."""
    pts = np.atleast_2d(pts)
    return sum(pts[:, off + 2] ** 2 / 2.0 for off in range(0, pts.shape[1], 3))


def r_classical(pts, params=None):
    """Classical renormalized observable: -x y z summed over spheres."""
    pts = np.atleast_2d(pts)
    return sum(
        -(pts[:, off] * pts[:, off + 1] * pts[:, off + 2])
        for off in range(0, pts.shape[1], 3)
    )


def classical_average(observable, n_samples, seed, degrees_of_freedom=1, workers=1):
    """Monte Carlo phase-space average over the uniform invariant measure.

    Splits the ensemble over ``workers`` seeded substreams (deterministic for
    fixed seed and worker count) and returns (mean, standard_error).
    """
    if n_samples < 1000:
        raise ValueError("use at least 10^3 samples")
    streams = np.random.SeedSequence(seed).spawn(max(1, workers))
    chunk = int(np.ceil(n_samples / len(streams)))
    total, total_sq, count = 0.0, 0.0, 0
    for ss in streams:
        rng = np.random.default_rng(ss)
        pts = uniform_sphere(chunk, rng)
        if degrees_of_freedom == 2:
            pts = np.concatenate([pts, uniform_sphere(chunk, rng)], axis=1)
        vals = np.asarray(observable(pts), dtype=float)
        total += vals.sum()
        total_sq += (vals**2).sum()
        count += len(vals)
    mean = total / count
    var = max(total_sq / count - mean**2, 0.0)
    return mean, np.sqrt(var / count)


def kappa_cl_sq(params):
    """Classical variance of W over the uniform measure.

    For W = z^2/2 per sphere: Var(z^2/2) = <z^4>/4 - <z^2>^2/4 = 1/45, and
    independent spheres add, giving d/45.
    """
    return params.degrees_of_freedom / 45.0


# ---------------------------------------------------------------------------
# transport rate of the renormalized observable


@dataclass
class TransportRateResult:
    """Transport-rate estimate with convergence diagnostics.

    ``sigma`` is half the fitted growth slope of Var(S_n) over
    n in [n_cut, 2 n_cut], S_n the Birkhoff sum of the renormalized
    observable.  ``estimates`` holds (n, Var(S_n)/2n) rows; ``converged``
    is False when the n_cut and 2*n_cut estimates differ by over 20%.
    """

    sigma: float
    estimates: list
    converged: bool
    n_cut: int
    ensemble: int
    seed: int

    def __float__(self):
        return self.sigma


def transport_rate(params, n_cut=50, ensemble=100_000, seed=0, workers=1, observable=None):
    """Variance growth rate sigma of the Birkhoff sums of R_cl.

    sigma = lim Var(sum_{k<n} R(M^k x)) / 2n over the uniform ensemble,
    estimated from the slope of the variance on n in [n_cut, 2 n_cut].
    ``observable`` overrides the summed observable (default R_cl).
    """
    if n_cut < 10:
        raise ValueError("n_cut must be at least 10")
    if ensemble < 10_000:
        raise ValueError("ensemble must be at least 10^4")
    obs = observable if observable is not None else r_classical
    streams = np.random.SeedSequence(seed).spawn(max(1, workers))
    chunk = int(np.ceil(ensemble / len(streams)))
    n_max = 2 * n_cut
    # accumulate Var(S_n) via moments, deterministically over substreams
    sums = np.zeros(n_max + 1)
    sums_sq = np.zeros(n_max + 1)
    count = 0
    for ss in streams:
        rng = np.random.default_rng(ss)
        pts = uniform_ensemble(params, chunk, rng)
        s = np.zeros(len(pts))
        for n in range(1, n_max + 1):
            s += obs(pts, params)
            pts = classical_map(pts, params)
            sums[n] += s.sum()
            sums_sq[n] += (s**2).sum()
        count += len(pts)
    ns = np.arange(n_max + 1)
    variances = sums_sq / count - (sums / count) ** 2
    fit_ns = ns[n_cut:]
    slope = np.polyfit(fit_ns, variances[n_cut:], 1)[0]
    sigma = slope / 2.0
    est_lo = variances[n_cut] / (2.0 * n_cut)
    est_hi = variances[n_max] / (2.0 * n_max)
    converged = abs(est_hi - est_lo) <= 0.2 * max(abs(est_hi), 1e-300)
    estimates = [(int(n), float(variances[n] / (2.0 * n))) for n in (n_cut, n_max)]
    return TransportRateResult(
        sigma=float(sigma),
        estimates=estimates,
        converged=bool(converged),
        n_cut=n_cut,
        ensemble=ensemble,
        seed=seed,
    )


# ---------------------------------------------------------------------------
# generating function and plateau


def generating_function(z):
    """Classical generating function G(z) = <exp(-i z W)> for W = z^2/2.

    Closed form on one sphere:
        G(z) = sqrt(pi/2z) exp(-i pi/4) erf(exp(i pi/4) sqrt(z/2)),
    normalized so G(0) = 1; G(-z) is the complex conjugate.  |G(z)| <= 1.
    """
    z = float(z)
    if z == 0.0:
        return 1.0 + 0.0j
    a = abs(z)
    val = np.sqrt(np.pi / (2.0 * a)) * np.exp(-0.25j * np.pi) * erf(
        np.exp(0.25j * np.pi) * np.sqrt(a / 2.0)
    )
    return complex(np.conj(val) if z < 0 else val)


def generating_function_mc(z, n_samples=1_000_000, seed=0, w_fn=None, degrees_of_freedom=1):
    """Monte Carlo estimate of <exp(-i z W)> with its standard error.

    Fallback for observables without a closed form; ``w_fn`` defaults to the
    top's W.  Returns (value, standard_error) with the error combined over
    real and imaginary parts.
    """
    rng = np.random.default_rng(seed)
    pts = uniform_sphere(n_samples, rng)
    if degrees_of_freedom == 2:
        pts = np.concatenate([pts, uniform_sphere(n_samples, rng)], axis=1)
    w = w_fn(pts) if w_fn is not None else w_classical(pts)
    vals = np.exp(-1j * z * np.asarray(w))
    mean = vals.mean()
    err = np.sqrt((vals.real.var() + vals.imag.var()) / n_samples)
    return complex(mean), float(err)


def plateau_prediction(kind, delta, params, order="exact"):
    """Predicted frozen fidelity plateau for CIS or RIS initial states.

    Linear response: 1 - (delta J)^2 kappa_cl^2 for CIS, twice the deficit
    for RIS.  Exact: |G|^2 for CIS and |G|^4 for RIS, with G evaluated at
    z = delta/hbar = delta J and raised to the number of tops (W adds over
    independent spheres).  The exact RIS value is identically the square of
    the exact CIS value.
    """
    if kind not in ("cis", "ris"):
        raise ValueError("kind must be 'cis' or 'ris'")
    z = delta * params.J
    if order == "linear":
        deficit = z**2 * kappa_cl_sq(params)
        if kind == "ris":
            deficit *= 2.0
        if deficit > 0.5:
            warnings.warn(
                f"linear-response plateau deficit {deficit:.2f} > 0.5 is outside "
                "the validity of second-order response; use order='exact'",
                stacklevel=2,
            )
        return float(1.0 - deficit)
    if order != "exact":
        raise ValueError("order must be 'linear' or 'exact'")
    g = generating_function(z) ** params.degrees_of_freedom
    power = 2 if kind == "cis" else 4
    return float(abs(g) ** power)


def stationary_phase_envelope(z, ndim=1, hessian_det=1.0):
    """Large-z envelope |G(z)| ~ |pi/2z|^(ndim/2) |det Hess W|^(-1/2).

    Magnitude only: finite phase-space boundaries add oscillatory diffraction
    corrections of relative size O(1/sqrt(z)) around this envelope.
    """
    return float(
        abs(np.pi / (2.0 * z)) ** (ndim / 2.0) / np.sqrt(abs(hessian_det))
    )


# ---------------------------------------------------------------------------
# timescales and decay laws


@dataclass
class Timescales:
    """Crossover and Heisenberg times with the selected decay regime."""

    t2: float
    t_heisenberg: float
    regime: str  # "exponential" if t2 < t_H else "gaussian"
    branch: str  # which t2 candidate was smaller
    t2_sqrt_branch: float
    t2_quadratic_branch: float


def timescales(params, delta, sigma, kappa_sq=None, symmetry_classes=1):
    """Crossover time t2 and Heisenberg time t_H for a perturbed model.

    t2 = min( sqrt(t_H/sigma) kappa/|delta|, kappa^2/(sigma delta^2) ) and
    t_H = N/(2s) kick periods with N the invariant-subspace dimension and s
    the number of symmetry classes carrying the initial state.  The
    post-plateau decay is exponential when t2 < t_H, Gaussian otherwise.
    """
    if kappa_sq is None:
        kappa_sq = kappa_cl_sq(params)
    sigma = float(sigma)
    t_h = params.subspace_dim / (2.0 * symmetry_classes)
    if delta == 0.0:
        return Timescales(np.inf, t_h, "gaussian", "quadratic", np.inf, np.inf)
    b_sqrt = np.sqrt(t_h / sigma) * np.sqrt(kappa_sq) / abs(delta)
    b_quad = kappa_sq / (sigma * delta**2)
    t2 = min(b_sqrt, b_quad)
    branch = "sqrt" if b_sqrt <= b_quad else "quadratic"
    regime = "exponential" if t2 < t_h else "gaussian"
    return Timescales(float(t2), float(t_h), regime, branch, float(b_sqrt), float(b_quad))


def decay_factor(n, params, delta, sigma, symmetry_classes=1):
    """Post-plateau decay factor F(n)/F_plat from the two asymptotic laws.

    exp(-(delta^4/2 hbar^2) sigma n) for n <= t_H and
    exp(-(delta^4/2 hbar^2) sigma n^2/t_H) beyond; the two coincide at t_H.
    """
    n = np.asarray(n, dtype=float)
    t_h = params.subspace_dim / (2.0 * symmetry_classes)
    rate = delta**4 * float(sigma) / (2.0 * params.hbar_eff**2)
    exponent = rate * np.where(n <= t_h, n, n * n / t_h)
    return np.exp(-exponent)


def decay_prediction(n, params, delta, sigma, f_plat=None, kind="cis", symmetry_classes=1):
    """Predicted post-plateau fidelity F(n) with its regime annotation.

    Valid for n beyond the crossover time t2; earlier times sit on the
    plateau.  Returns (F, regime_per_n) where regime_per_n marks which law
    applied at each sample.
    """
    if f_plat is None:
        f_plat = plateau_prediction(kind, delta, params, order="exact")
    n = np.asarray(n, dtype=float)
    t_h = params.subspace_dim / (2.0 * symmetry_classes)
    values = f_plat * decay_factor(n, params, delta, sigma, symmetry_classes)
    regime = np.where(n <= t_h, "exponential", "gaussian")
    return values, regime


# ---------------------------------------------------------------------------
# bundled predictions


@dataclass
class PredictionSet:
    """All semiclassical predictions for one (model, delta) pair."""

    model: dict
    delta: float
    kappa_cl_sq: float
    sigma: float
    sigma_converged: bool
    f_plat_cis_linear: float
    f_plat_ris_linear: float
    f_plat_cis: float
    f_plat_ris: float
    t2: float
    t_heisenberg: float
    decay_regime: str
    t2_branch: str
    exp_rate: float
    gauss_rate: float
    symmetry_classes: int = 1

    def to_json(self, indent=2):
        d = asdict(self)
        d["schema_version"] = 1
        return json.dumps(d, indent=indent)


def predictions_for(
    params,
    delta,
    sigma=None,
    sigma_ensemble=100_000,
    sigma_n_cut=50,
    seed=0,
    symmetry_classes=1,
):
    """Assemble the full :class:`PredictionSet` for a model and strength.

    ``sigma`` may be passed in (e.g. a previously computed transport rate);
    otherwise it is estimated by Monte Carlo with the given ensemble size.
    """
    if sigma is None:
        tr = transport_rate(
            params, n_cut=sigma_n_cut, ensemble=sigma_ensemble, seed=seed
        )
        sigma_val, converged = tr.sigma, tr.converged
    else:
        sigma_val, converged = float(sigma), True
    ts = timescales(params, delta, sigma_val, symmetry_classes=symmetry_classes)
    rate = delta**4 * sigma_val / (2.0 * params.hbar_eff**2)
    return PredictionSet(
        model=params.as_dict(),
        delta=delta,
        kappa_cl_sq=kappa_cl_sq(params),
        sigma=sigma_val,
        sigma_converged=converged,
        f_plat_cis_linear=plateau_prediction("cis", delta, params, order="linear"),
        f_plat_ris_linear=plateau_prediction("ris", delta, params, order="linear"),
        f_plat_cis=plateau_prediction("cis", delta, params, order="exact"),
        f_plat_ris=plateau_prediction("ris", delta, params, order="exact"),
        t2=ts.t2,
        t_heisenberg=ts.t_heisenberg,
        decay_regime=ts.regime,
        t2_branch=ts.branch,
        exp_rate=rate,
        gauss_rate=rate / ts.t_heisenberg,
        symmetry_classes=symmetry_classes,
    )
