import numpy as np
import pytest

from echotop import (
    CoupledStepper,
    EchoRunConfig,
    FidelitySeries,
    InitialState,
    SpectralPropagator,
    TopModel,
    correlation_function,
    fidelity_series,
    linear_response_fidelity,
    log_sample_times,
    mixing_time,
    plateau_statistics,
    prepare_initial_state,
    renormalized_fidelity_series,
    spectral_propagate,
)
from echotop.spin import SpinRep, jz_eigenvalues


def _random_unitary(dim, seed):
    rng = np.random.default_rng(seed)
    h = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    h = h + h.conj().T
    w, v = np.linalg.eigh(h)
    return (v * np.exp(1j * w)) @ v.conj().T


def _random_state(dim, seed):
    rng = np.random.default_rng(seed)
    psi = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return psi / np.linalg.norm(psi)


class TestSpectralPropagation:
    def test_identity_at_zero(self):
        u = _random_unitary(40, 0)
        psi = _random_state(40, 1)
        assert np.abs(spectral_propagate(u, psi, 0) - psi).max() < 1e-14

    def test_single_step_matches_matvec(self):
        u = _random_unitary(60, 2)
        psi = _random_state(60, 3)
        assert np.abs(spectral_propagate(u, psi, 1) - u @ psi).max() < 1e-10

    def test_long_run_matches_iterated_matvec(self):
        u = _random_unitary(60, 4)
        psi = _random_state(60, 5)
        ref = psi.copy()
        for _ in range(1000):
            ref = u @ ref
        got = spectral_propagate(u, psi, 1000)
        assert np.abs(got - ref).max() < 1e-8

    def test_norm_exact_at_huge_n(self):
        prop = SpectralPropagator(_random_unitary(50, 6))
        psi = _random_state(50, 7)
        out = prop.apply(psi, 10**6)
        assert abs(np.linalg.norm(out) - 1.0) < 1e-12

    def test_rejects_non_unitary(self):
        rng = np.random.default_rng(8)
        bad = rng.standard_normal((20, 20)) + 1j * rng.standard_normal((20, 20))
        with pytest.raises(np.linalg.LinAlgError, match="not unitary"):
            SpectralPropagator(bad)


class TestSampleGrid:
    def test_log_grid_properties(self):
        ns = log_sample_times(10**6)
        assert ns[0] == 0 and ns[1] == 1 and ns[-1] == 10**6
        assert len(ns) <= 513
        assert np.all(np.diff(ns) > 0)

    def test_small_n_max(self):
        ns = log_sample_times(5)
        assert ns[0] == 0 and ns[-1] == 5

    def test_per_decade_cap(self):
        ns = log_sample_times(100, per_decade=10)
        assert len(ns) <= 22


class TestFidelitySeries:
    def test_zero_delta_is_unity(self, top200):
        cfg = EchoRunConfig(
            model=top200, delta=0.0, initial=InitialState("cis"), n_max=1000
        )
        series = fidelity_series(cfg)
        assert np.abs(series.F - 1.0).max() < 1e-10
        assert series.F[0] == pytest.approx(1.0, abs=1e-12)

    def test_fidelity_bounds_and_start(self, top200, top200_solver):
        cfg = EchoRunConfig(
            model=top200, delta=2e-3, initial=InitialState("cis"), n_max=5000
        )
        series = fidelity_series(cfg, solver=top200_solver)
        assert series.F[0] == pytest.approx(1.0, abs=1e-10)
        assert series.F.min() >= 0.0
        assert series.F.max() <= 1.0 + 1e-10

    def test_norm_preservation_through_run(self, top200, top200_solver):
        psi = prepare_initial_state(top200, InitialState("ris", seed=9))
        out = top200_solver.u0.apply(psi, 10**6)
        assert abs(np.linalg.norm(out) - 1.0) < 1e-10

    def test_delta_sign_symmetry_richardson(self, top200, top200_solver):
        # F(delta) - F(-delta) = O(delta^3): doubling delta scales it ~8x
        cfg = lambda d: EchoRunConfig(  # noqa: E731
            model=top200, delta=d, initial=InitialState("cis"), n_max=200,
            sample_times=np.array([50, 100, 200]),
        )
        def gap(d):
            fp = fidelity_series(cfg(d), solver=top200_solver).F
            fm = fidelity_series(cfg(-d), solver=top200_solver).F
            return np.abs(fp - fm).max()

        d1, d2 = gap(1e-4), gap(2e-4)
        assert d2 / d1 == pytest.approx(8.0, rel=0.9)
        assert d1 < 1e-6

    def test_plateau_freeze_bound(self, top200, top200_solver):
        # 1 - F <= 4 (delta/hbar)^2 r^2 with r bounding kappa_n of W (<= max W)
        delta = 1e-3
        cfg = EchoRunConfig(
            model=top200, delta=delta, initial=InitialState("cis"), n_max=3000
        )
        series = fidelity_series(cfg, solver=top200_solver)
        r_bound = np.abs(np.diag(top200.w)).max()
        bound = 4.0 * (delta * top200.params.J) ** 2 * r_bound**2
        assert (1.0 - series.F).max() < bound

    def test_metadata_records_run(self, top200, top200_solver):
        cfg = EchoRunConfig(
            model=top200, delta=1e-3, initial=InitialState("ris", seed=4), n_max=100
        )
        series = fidelity_series(cfg, solver=top200_solver)
        md = series.metadata
        assert md["model"]["alpha"] == 30.0
        assert md["seed"] == 4
        assert md["mode"] == "direct"
        assert "wall_time_s" in md


class TestRenormalized:
    def test_zero_r_model_stays_at_plateau(self):
        # a pure z-rotation propagator commutes with W, so R = 0 and the
        # renormalized series is the constant plateau prefactor
        rep = SpinRep(10)
        m = jz_eigenvalues(rep)
        from echotop.models import TopParams, renormalized_operator, residual_perturbation
        from echotop.spin import SubspaceBasis

        u0 = np.diag(np.exp(-1j * 1.3 * m))
        w = np.diag((m**2 / (2.0 * rep.J**2)).astype(complex))
        basis = SubspaceBasis(np.eye(rep.dim), label="full")
        model = TopModel(
            params=TopParams(kind="single", J=10, alpha=0.0),
            subspace=basis,
            u0=u0,
            w=w,
            v=residual_perturbation(u0, w),
            r=renormalized_operator(u0, w, rep.hbar_eff),
        )
        assert np.abs(model.r).max() < 1e-12
        cfg = EchoRunConfig(
            model=model, delta=0.1, initial=InitialState("ris", seed=2),
            n_max=1000, mode="renormalized",
        )
        series = renormalized_fidelity_series(cfg, f_plat=0.9)
        assert np.abs(series.F - 0.9).max() < 1e-10

    def test_mode_enforced(self, top200):
        cfg = EchoRunConfig(
            model=top200, delta=1e-3, initial=InitialState("cis"), n_max=10
        )
        with pytest.raises(ValueError):
            renormalized_fidelity_series(cfg)

    def test_prefactor_recorded(self, top200, top200_solver):
        cfg = EchoRunConfig(
            model=top200, delta=1e-3, initial=InitialState("cis"),
            n_max=100, mode="renormalized",
        )
        series = renormalized_fidelity_series(cfg, solver=top200_solver)
        assert 0.9 < series.metadata["f_plat_prefactor"] < 1.0


class TestLinearResponse:
    def test_exact_at_n_zero(self, top200):
        psi = prepare_initial_state(top200, InitialState("cis"))
        assert linear_response_fidelity(top200, psi, 1e-3, 0) == 1.0

    def test_matches_direct_at_small_delta(self, top200, top200_solver):
        delta = 1e-3  # delta*J = 0.2: fourth-order terms are ~1e-4 relative
        psi = prepare_initial_state(top200, InitialState("cis"))
        ns = np.array([20, 80, 300])
        cfg = EchoRunConfig(
            model=top200, delta=delta, initial=InitialState("cis"),
            n_max=int(ns[-1]), sample_times=ns,
        )
        direct = fidelity_series(cfg, solver=top200_solver).F
        for n, f_direct in zip(ns, direct):
            f_lr = linear_response_fidelity(top200, psi, delta, int(n), solver=top200_solver)
            assert abs(f_lr - f_direct) < 5e-4

    def test_ris_kappa_time_independent(self, top200, top200_solver):
        # for random states the variance of W_n does not drift with n
        psi = prepare_initial_state(top200, InitialState("ris", seed=3))
        kappas = [
            correlation_function(top200, psi, n, n, observable="generator",
                                 solver=top200_solver).real
            for n in (0, 5, 20, 100)
        ]
        spread = (max(kappas) - min(kappas)) / kappas[0]
        assert spread < 0.5  # quantum fluctuations only, no secular growth


class TestCorrelation:
    def test_equal_time_is_variance(self, top200, top200_solver):
        psi = prepare_initial_state(top200, InitialState("cis"))
        c00 = correlation_function(top200, psi, 0, 0, solver=top200_solver)
        assert abs(c00.imag) < 1e-12
        assert c00.real >= 0.0

    def test_cauchy_schwarz(self, top200, top200_solver):
        psi = prepare_initial_state(top200, InitialState("cis"))
        k0 = np.sqrt(correlation_function(top200, psi, 0, 0, solver=top200_solver).real)
        for n in (1, 3, 7, 19):
            kn = np.sqrt(
                correlation_function(top200, psi, n, n, solver=top200_solver).real
            )
            c = abs(correlation_function(top200, psi, 0, n, solver=top200_solver))
            assert c <= k0 * kn * (1 + 1e-10)

    def test_chaotic_decorrelation(self, top200, top200_solver):
        # relative correlation drops to the quantum floor (~N^-1/2) in a few
        # kicks; assert the decay, not the unreachable zero
        psi = prepare_initial_state(top200, InitialState("cis"))
        k0 = np.sqrt(correlation_function(top200, psi, 0, 0, solver=top200_solver).real)
        rel = []
        for n in range(1, 11):
            kn = np.sqrt(
                correlation_function(top200, psi, n, n, solver=top200_solver).real
            )
            c = abs(correlation_function(top200, psi, 0, n, solver=top200_solver))
            rel.append(c / (k0 * kn))
        assert rel[0] > 0.2  # correlated at one kick
        assert min(rel[3:]) < 0.05  # mixed away after a few kicks


class TestMixingTime:
    def test_ris_triggers_threshold(self, top200, top200_solver):
        psi = prepare_initial_state(top200, InitialState("ris", seed=1))
        t1 = mixing_time(top200, psi, solver=top200_solver)
        assert 1 <= t1 <= 40

    def test_cis_fallback_is_early(self, top200, top200_solver):
        psi = prepare_initial_state(top200, InitialState("cis"))
        t1 = mixing_time(top200, psi, solver=top200_solver)
        assert 1 <= t1 <= 20


class TestPlateauStatistics:
    def test_constant_series(self):
        ns = np.arange(0, 101)
        f = np.full(len(ns), 0.9 + 0.1j)
        series = FidelitySeries(ns=ns, f=f)
        stats = plateau_statistics(series, (10, 90))
        assert stats["mean"] == pytest.approx(abs(0.9 + 0.1j) ** 2, abs=1e-12)
        assert stats["std"] == pytest.approx(0.0, abs=1e-12)
        assert stats["corrected"] == pytest.approx(stats["mean"], abs=1e-12)

    def test_floor_strip_removes_incoherent_noise(self):
        rng = np.random.default_rng(0)
        ns = np.arange(0, 2001)
        base = 0.3
        noise = 0.03 * (rng.standard_normal(len(ns)) + 1j * rng.standard_normal(len(ns)))
        series = FidelitySeries(ns=ns, f=base + noise)
        stats = plateau_statistics(series, (0, 2000))
        # mean of |f|^2 is biased up by Var(noise); corrected is not
        assert stats["mean"] > base**2 + 0.001
        assert stats["corrected"] == pytest.approx(base**2, rel=0.02)

    def test_window_needs_samples(self):
        series = FidelitySeries(ns=np.arange(5), f=np.ones(5, dtype=complex))
        with pytest.raises(ValueError):
            plateau_statistics(series, (10, 20))


class TestCoupledStepper:
    def test_matches_spectral_path(self, coupled12):
        delta = 0.15
        ns = np.arange(0, 25)
        cfg = EchoRunConfig(
            model=coupled12, delta=delta, initial=InitialState("cis"),
            n_max=24, sample_times=ns,
        )
        spectral = fidelity_series(cfg, method="spectral")
        stepping = fidelity_series(cfg, method="stepping")
        assert np.abs(spectral.f - stepping.f).max() < 1e-10

    def test_renormalized_stepping_matches(self, coupled12):
        delta = 0.2
        ns = np.arange(0, 15)
        cfg = EchoRunConfig(
            model=coupled12, delta=delta, initial=InitialState("cis"),
            n_max=14, sample_times=ns, mode="renormalized",
        )
        spectral = renormalized_fidelity_series(cfg, f_plat=1.0)
        stepping = renormalized_fidelity_series(cfg, f_plat=1.0, method="stepping")
        assert np.abs(spectral.f - stepping.f).max() < 1e-10

    def test_stepper_rejects_single(self, top200):
        cfg = EchoRunConfig(
            model=top200, delta=0.1, initial=InitialState("cis"), n_max=5
        )
        with pytest.raises(ValueError):
            fidelity_series(cfg, method="stepping")

    def test_ris_supported(self, coupled12):
        stepper = CoupledStepper(coupled12, 0.1)
        grid = stepper.initial_grid(InitialState("ris", seed=5))
        assert abs(np.linalg.norm(grid.ravel()) - 1.0) < 1e-12
        f = stepper.overlap_series(grid, np.array([0, 1, 2]))
        assert abs(f[0] - 1.0) < 1e-12
