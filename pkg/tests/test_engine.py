"""Echo engine: pseudo-spins, bath product, phase traces."""

import numpy as np
import pytest

from conftest import make_coupling, random_coupling
from echoq.bath import BathConfig, BathRealization, NucleusCoupling, build_bath
from echoq.engine import (
    EchoSignal,
    bath_signal,
    build_tau_grid,
    locate_revival,
    phase_sum_closed,
    phase_trace,
    pseudo_spin_closed,
    pseudo_spin_exact,
    read_signal_csv,
    revival_rate_analytic,
    write_signal_csv,
)


def small_bath(couplings, b_gauss=10.0):
    cfg = BathConfig(abundance=0.01, b_gauss=b_gauss)
    return BathRealization(config=cfg, couplings=list(couplings))


class TestPseudoSpinExact:
    def test_zero_tau_is_one(self):
        nuc = make_coupling(p=0.7)
        assert pseudo_spin_exact(nuc, 0.0) == pytest.approx(1.0, abs=1e-12)

    def test_parallel_axes_refocus_perfectly(self):
        # commuting conditional precessions: the echo closes exactly
        nuc = make_coupling(omega1_ratio=3.7, cross2=0.0, p=0.9)
        for tau in np.linspace(0.0, 7.0, 17):
            assert pseudo_spin_exact(nuc, tau) == pytest.approx(1.0, abs=1e-12)

    def test_frozen_oracle_point(self):
        # omega1 = 6 omega0, |n0 x n1|^2 = 1/2, omega0 tau = pi, p = 0:
        # sin(omega1 tau / 2) = sin(3 pi) = 0 so the loop closes exactly.
        nuc = make_coupling(omega0=1.0, omega1_ratio=6.0, cross2=0.5, p=0.0)
        assert pseudo_spin_exact(nuc, np.pi) == pytest.approx(1.0, abs=1e-12)

    def test_magnitude_bounded(self):
        rng = np.random.default_rng(31)
        for _ in range(300):
            nuc = random_coupling(rng, m_parallel=False)
            tau = rng.uniform(0, 30)
            assert abs(pseudo_spin_exact(nuc, tau)) <= 1 + 1e-12


class TestClosedForm:
    def test_matches_exact_on_draws(self):
        rng = np.random.default_rng(42)
        worst = 0.0
        for _ in range(2000):
            nuc = random_coupling(rng)
            tau = rng.uniform(0, 25)
            worst = max(worst, abs(pseudo_spin_closed(nuc, tau) - pseudo_spin_exact(nuc, tau)))
        assert worst < 1e-12

    def test_unpolarized_real_envelope(self):
        # p = 0: imaginary part exactly zero, real part is the standard
        # two-frequency echo-modulation envelope 1 - 2 k sin^2(w0 t/2) sin^2(w1 t/2)
        nuc = make_coupling(omega0=1.0, omega1_ratio=6.0, cross2=0.5, p=0.0)
        taus = np.linspace(0, 12, 400)
        s = pseudo_spin_closed(nuc, taus)
        assert np.max(np.abs(s.imag)) == 0.0
        expected = 1 - 2 * 0.5 * np.sin(taus / 2) ** 2 * np.sin(3 * taus) ** 2
        assert np.allclose(s.real, expected, atol=1e-12)

    def test_transverse_polarization_rejected(self):
        nuc = make_coupling(p=0.5, m_dir=[1.0, 0.0, 0.0])
        with pytest.raises(ValueError):
            pseudo_spin_closed(nuc, 1.0)

    def test_antiparallel_polarization_accepted(self):
        nuc = make_coupling(p=0.5, m_dir=[0.0, 0.0, -1.0])
        tau = 1.3
        assert pseudo_spin_closed(nuc, tau) == pytest.approx(
            pseudo_spin_exact(nuc, tau), abs=1e-12
        )

    def test_quadrature_sign_for_small_positive_p(self):
        # fixes the readout convention: small p > 0 along +n0 gives Q > 0
        # where sin(w0 tau) > 0
        nuc = make_coupling(omega0=1.0, omega1_ratio=6.0, cross2=0.5, p=0.01)
        tau = 1.0  # sin(1) > 0
        assert pseudo_spin_closed(nuc, tau).imag > 0.0


class TestPolarizationStructure:
    """Exact-trace checks of how the pseudo-spin depends on p."""

    def test_real_part_independent_of_p(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            base = random_coupling(rng, p=0.0)
            tau = rng.uniform(0, 20)
            values = []
            for p in (-1.0, 0.0, 1.0):
                base.p = p
                values.append(pseudo_spin_exact(base, tau).real)
            assert max(values) - min(values) < 1e-12

    def test_imaginary_part_linear_in_p(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            nuc = random_coupling(rng, p=1.0)
            tau = rng.uniform(0, 20)
            im_full = pseudo_spin_exact(nuc, tau).imag
            for p in (-0.7, -0.2, 0.4, 0.9):
                nuc.p = p
                assert pseudo_spin_exact(nuc, tau).imag == pytest.approx(
                    p * im_full, abs=1e-12
                )

    def test_odd_in_p(self):
        rng = np.random.default_rng(10)
        for _ in range(50):
            nuc = random_coupling(rng)
            tau = rng.uniform(0, 20)
            s_plus = pseudo_spin_exact(nuc, tau)
            nuc.p = -nuc.p
            s_minus = pseudo_spin_exact(nuc, tau)
            assert s_minus.imag == pytest.approx(-s_plus.imag, abs=1e-12)


class TestBathSignal:
    def test_empty_bath_is_unity(self):
        bath = small_bath([])
        taus = np.linspace(0, 1e-4, 50)
        sig = bath_signal(bath, taus)
        assert np.all(sig.s == 1.0)

    def test_single_nucleus_equals_pseudo_spin(self):
        nuc = make_coupling(omega0=2 * np.pi * 1e4, omega1_ratio=6.0, cross2=0.5, p=1.0)
        bath = small_bath([nuc])
        taus = np.linspace(0, 2e-4, 500)
        sig = bath_signal(bath, taus)
        expected = np.array([pseudo_spin_exact(nuc, t) for t in taus])
        assert np.max(np.abs(sig.s - expected)) < 1e-12

    def test_starts_at_exactly_one(self):
        cfg = BathConfig(abundance=0.01, b_gauss=10.0, seed=1)
        bath = build_bath(cfg, p=1.0)
        taus = build_tau_grid(bath)
        sig = bath_signal(bath, taus)
        assert sig.s[0] == 1.0 + 0.0j

    def test_magnitude_bounded(self):
        cfg = BathConfig(abundance=0.02, b_gauss=10.0, seed=2)
        bath = build_bath(cfg, p=1.0)
        taus = build_tau_grid(bath)
        sig = bath_signal(bath, taus)
        assert np.max(np.abs(sig.s)) <= 1 + 1e-9

    def test_unpolarized_quadrature_null(self):
        # arbitrary polarization directions with p = 0 leave Q identically zero
        rng = np.random.default_rng(12)
        z = np.array([0.0, 0.0, 1.0])
        couplings = [random_coupling(rng, p=0.0, m_parallel=False, omega0=1.0, n0=z)
                     for _ in range(40)]
        bath = small_bath(couplings)
        taus = np.linspace(0, 30 / couplings[0].omega0, 1500)
        sig = bath_signal(bath, taus)
        assert np.max(np.abs(sig.s.imag)) < 1e-10

    def test_modulus_factorizes(self):
        # |S| equals the product of per-nucleus magnitudes
        rng = np.random.default_rng(13)
        z = np.array([0.0, 0.0, 1.0])
        couplings = [random_coupling(rng, omega0=1.2, n0=z) for _ in range(1200)]
        bath = small_bath(couplings)
        taus = np.linspace(0, 5.0, 400)
        sig = bath_signal(bath, taus)  # log-accumulation route (> 1000 nuclei)
        direct = np.ones_like(taus)
        for c in couplings:
            direct *= np.abs(pseudo_spin_closed(c, taus))
        assert np.max(np.abs(np.abs(sig.s) - direct)) < 1e-9

    def test_product_routes_agree(self):
        rng = np.random.default_rng(14)
        z = np.array([0.0, 0.0, 1.0])
        couplings = [random_coupling(rng, omega0=0.8, n0=z) for _ in range(80)]
        taus = np.linspace(0, 8.0, 300)
        small = bath_signal(small_bath(couplings), taus)
        import echoq.engine as eng

        old = eng._LOG_PRODUCT_THRESHOLD
        try:
            eng._LOG_PRODUCT_THRESHOLD = 10
            big = bath_signal(small_bath(couplings), taus)
        finally:
            eng._LOG_PRODUCT_THRESHOLD = old
        assert np.max(np.abs(small.s - big.s)) < 1e-9

    def test_order_insensitive(self):
        rng = np.random.default_rng(15)
        z = np.array([0.0, 0.0, 1.0])
        couplings = [random_coupling(rng, omega0=1.0, n0=z) for _ in range(500)]
        taus = np.linspace(0, 6.0, 200)
        a = bath_signal(small_bath(couplings), taus)
        b = bath_signal(small_bath(list(reversed(couplings))), taus)
        assert np.max(np.abs(a.s - b.s)) < 1e-9

    def test_time_reversal_conjugates(self):
        # negating both conditioned precession vectors (field and coupling
        # reversal) with polarization held conjugates the signal; negating
        # the polarization as well restores it
        rng = np.random.default_rng(16)
        z = np.array([0.0, 0.0, 1.0])
        couplings = [random_coupling(rng, omega0=1.0, n0=z) for _ in range(60)]
        taus = np.linspace(0, 9.0, 400)
        sig = bath_signal(small_bath(couplings), taus)

        def flipped(ncs, flip_p):
            out = []
            for c in ncs:
                out.append(NucleusCoupling(
                    position_nm=c.position_nm, a_vec=-c.a_vec,
                    omega0=c.omega0, n0=-c.n0,
                    omega1=c.omega1, n1=-c.n1,
                    p=-c.p if flip_p else c.p, m_dir=c.m_dir,
                ))
            return out

        rev = bath_signal(small_bath(flipped(couplings, flip_p=False)), taus)
        assert np.max(np.abs(rev.s - np.conj(sig.s))) < 1e-10
        both = bath_signal(small_bath(flipped(couplings, flip_p=True)), taus)
        assert np.max(np.abs(both.s - sig.s)) < 1e-10

    def test_exact_route_used_for_transverse_polarization(self):
        nuc = make_coupling(omega0=1.0, omega1_ratio=4.0, cross2=0.3, p=1.0,
                            m_dir=[1.0, 0.0, 0.0])
        bath = small_bath([nuc])
        taus = np.linspace(0, 10, 700)
        sig = bath_signal(bath, taus)
        expected = np.array([pseudo_spin_exact(nuc, t) for t in taus])
        assert np.max(np.abs(sig.s - expected)) < 1e-12

    def test_under_resolved_grid_warns_in_metadata(self):
        nuc = make_coupling(omega0=1.0, omega1_ratio=500.0, cross2=0.5, p=0.0)
        bath = small_bath([nuc])
        taus = np.linspace(0, 10, 100)  # way below 20 points per fast cycle
        sig = bath_signal(bath, taus)
        assert "grid_warning" in sig.metadata


class TestPhase:
    def test_unpolarized_phase_zero(self):
        cfg = BathConfig(abundance=0.01, b_gauss=10.0, seed=5)
        bath = build_bath(cfg, p=0.0)
        taus = build_tau_grid(bath)
        sig = bath_signal(bath, taus)
        trace = phase_trace(sig)
        ok = np.isfinite(trace.phi)
        assert np.nanmax(np.abs(trace.phi[ok])) < 1e-10

    def test_amplitude_matches_signal(self):
        cfg = BathConfig(abundance=0.01, b_gauss=10.0, seed=6)
        bath = build_bath(cfg, p=1.0)
        taus = build_tau_grid(bath)
        sig = bath_signal(bath, taus)
        trace = phase_trace(sig)
        assert np.max(np.abs(trace.lam - np.abs(sig.s))) < 1e-10

    def test_single_nucleus_arctan_formula(self):
        # away from branch points the phase matches the closed arctan term
        nuc = make_coupling(omega0=1.0, omega1_ratio=6.0, cross2=0.5, p=0.8)
        taus = np.linspace(1e-6, 2 * np.pi, 4000)
        bath = small_bath([nuc])
        sig = bath_signal(bath, taus)
        trace = phase_trace(sig)

        s0, s1 = np.sin(taus / 2), np.sin(3 * taus)
        c0 = np.cos(taus / 2)
        x = 2 * 0.5 * s0**2 * np.sin(3 * taus) ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            formula = np.arctan(0.8 * (c0 / s0) * x / (1 - x))
        safe = (sig.s.real > 0.1) & (np.abs(s0) > 0.05) & np.isfinite(trace.phi)
        assert np.max(np.abs(trace.phi[safe] - formula[safe])) < 1e-8

    def test_two_nucleus_phase_adds(self):
        n1 = make_coupling(omega0=1.0, omega1_ratio=5.0, cross2=0.4, p=0.6)
        n2 = make_coupling(omega0=1.0, omega1_ratio=9.0, cross2=0.2, p=0.9)
        taus = np.linspace(0, 6.0, 3000)
        phi_both = phase_trace(bath_signal(small_bath([n1, n2]), taus)).phi
        phi_1 = phase_trace(bath_signal(small_bath([n1]), taus)).phi
        phi_2 = phase_trace(bath_signal(small_bath([n2]), taus)).phi
        ok = np.isfinite(phi_both) & np.isfinite(phi_1) & np.isfinite(phi_2)
        delta = phi_both[ok] - (phi_1[ok] + phi_2[ok])
        # equality modulo a shared 2 pi ambiguity
        delta = delta - 2 * np.pi * np.round(delta / (2 * np.pi))
        assert np.max(np.abs(delta)) < 1e-9

    def test_phase_sum_closed_matches_signal_phase(self):
        cfg = BathConfig(abundance=0.02, r_max_nm=3.0, b_gauss=10.0, seed=7)
        bath = build_bath(cfg, p=1.0)
        taus = build_tau_grid(bath)
        sig = bath_signal(bath, taus)
        trace = phase_trace(sig)
        summed = phase_sum_closed(bath, taus)
        ok = np.isfinite(trace.phi) & (trace.lam > 1e-3)
        delta = trace.phi[ok] - summed[ok]
        delta = delta - 2 * np.pi * np.round(delta / (2 * np.pi))
        assert np.max(np.abs(delta)) < 1e-8

    def test_masked_in_dead_zones(self):
        # deep collapse: phase reported as NaN, never interpolated
        rng = np.random.default_rng(77)
        omega0 = 1.0
        base = [make_coupling(omega0=omega0, omega1_ratio=r, cross2=k, p=1.0)
                for r, k in zip(rng.uniform(1.5, 15, 300), rng.uniform(0.3, 1.0, 300))]
        taus = np.linspace(0, 2 * np.pi / omega0 * 1.2, 4000)
        sig = bath_signal(small_bath(base), taus)
        trace = phase_trace(sig)
        assert np.any(~np.isfinite(trace.phi))
        dead = trace.lam < 1e-6
        assert np.all(~np.isfinite(trace.phi[dead]))


class TestRevivalRate:
    def test_zero_for_unpolarized(self):
        cfg = BathConfig(abundance=0.01, b_gauss=10.0, seed=8)
        bath = build_bath(cfg, p=0.0)
        assert revival_rate_analytic(bath) == 0.0

    def test_single_maximal_nucleus(self):
        # one nucleus, |n0 x n1|^2 = 1, p = 1: rate is -omega0/2
        nuc = make_coupling(omega0=3.0, omega1_ratio=2.0, cross2=1.0, p=1.0)
        bath = small_bath([nuc])
        assert revival_rate_analytic(bath) == pytest.approx(-1.5, rel=1e-12)

    def test_linear_in_p(self):
        cfg = BathConfig(abundance=0.01, b_gauss=10.0, seed=9)
        full = revival_rate_analytic(build_bath(cfg, p=1.0))
        half = revival_rate_analytic(build_bath(cfg, p=0.5))
        assert half == pytest.approx(0.5 * full, rel=1e-12)


class TestRevivalLocation:
    def test_revival_at_one_bare_period(self):
        cfg = BathConfig(abundance=0.01, b_gauss=10.0, seed=10)
        bath = build_bath(cfg, p=1.0)
        taus = build_tau_grid(bath)
        sig = bath_signal(bath, taus)
        idx = locate_revival(sig, bath.omega0, which=1)
        t_larmor = 2 * np.pi / bath.omega0
        assert abs(taus[idx] - t_larmor) / t_larmor < 0.05

    def test_grid_must_cover_revival(self):
        nuc = make_coupling(omega0=1.0)
        sig = bath_signal(small_bath([nuc]), np.linspace(0, 1.0, 100))
        with pytest.raises(ValueError):
            locate_revival(sig, 1.0, which=1)


class TestSignalCsv:
    def test_round_trip(self, tmp_path):
        cfg = BathConfig(abundance=0.01, r_max_nm=3.0, b_gauss=10.0, seed=11)
        bath = build_bath(cfg, p=1.0)
        taus = build_tau_grid(bath)
        sig = bath_signal(bath, taus, metadata={"config_hash": "abc123", "seed": 11})
        path = tmp_path / "sig.csv"
        write_signal_csv(sig, path)
        loaded = read_signal_csv(path)
        assert loaded.metadata["config_hash"] == "abc123"
        assert np.allclose(loaded.tau, sig.tau, rtol=0, atol=0)
        assert np.allclose(loaded.s, sig.s, rtol=0, atol=0)

    def test_rewrite_is_byte_identical(self, tmp_path):
        nuc = make_coupling(omega0=1.0, p=0.5)
        sig = bath_signal(small_bath([nuc]), np.linspace(0, 7, 300))
        sig.metadata.update({"config_hash": "feed", "seed": 0})
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        write_signal_csv(sig, p1)
        write_signal_csv(read_signal_csv(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("# echoq signal v1\ntau_s,t_total_s,I,Q,Lambda,Phi_rad\n")
        with pytest.raises(ValueError):
            read_signal_csv(path)
