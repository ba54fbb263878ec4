"""Unit tests for the entanglement analysis suite.

The closed-form site spectra are checked against dense two-mode
evolutions (branch state + vacuum through a beamsplitter, then a partial
trace), and the bond-dimension estimator against explicit enumeration of
the full product spectrum.
"""

import numpy as np
import pytest

from mns import ResourceLimitError
from mns.analysis import (
    brute_force_bond_dimension,
    cat_site_spectrum,
    check_spectrum,
    commutation_statistics,
    ere_cat,
    ere_fock,
    ere_from_spectra,
    ere_lower_bound,
    ere_single_photon,
    ere_upper_bound,
    fock_site_spectrum,
    iqp_ere_bound,
    memory_estimate,
    normalized_pair_overlap,
    product_spectrum_brute_force,
    required_bond_dimension,
    scaling_diagnostic,
    single_photon_site_spectrum,
)
from mns.linalg import haar_unitary, renyi_entropy
from mns.photonic import (
    beamsplitter_transfer,
    cat_branch_state,
    fock_branch_state,
    fock_unitary_from_transfer,
    single_photon_branch_state,
)

ETAS = [0.1, 0.3, 0.5, 0.7, 0.9]
THETAS = [0.0, np.pi / 8, np.pi / 4]


def dense_site_spectrum(branch: np.ndarray, theta: float, keep: int) -> np.ndarray:
    """Reduced-density eigenvalues of (branch x vacuum) through one splitter."""
    d = len(branch)
    vac = np.zeros(d)
    vac[0] = 1.0
    g = fock_unitary_from_transfer(beamsplitter_transfer(theta), d, d)
    out = (g @ np.kron(branch, vac)).reshape(d, d)
    rho = out @ out.conj().T
    evals = np.sort(np.linalg.eigvalsh(rho))[::-1]
    return np.clip(evals[:keep], 0.0, None)


# ---------------------------------------------------------------------------
# check_spectrum


def test_check_spectrum_sorts_and_clips() -> None:
    out = check_spectrum([0.1, 0.9, -1e-15])
    np.testing.assert_allclose(out, [0.9, 0.1, 0.0])


def test_check_spectrum_rejects_bad_input() -> None:
    with pytest.raises(ValueError):
        check_spectrum([0.5, 0.4])  # does not sum to 1
    with pytest.raises(ValueError):
        check_spectrum([1.1, -0.1])  # genuinely negative
    with pytest.raises(ValueError):
        check_spectrum([[0.5, 0.5]])  # wrong rank


# ---------------------------------------------------------------------------
# Site spectra vs dense two-mode evolution


def test_single_photon_spectrum_example() -> None:
    np.testing.assert_allclose(
        single_photon_site_spectrum(0.6, np.pi / 4), [0.9, 0.1], atol=1e-12
    )


def test_single_photon_spectrum_closed_form_simplification() -> None:
    # c0 = (1 + sqrt(1 - eta^2 sin^2(2 theta))) / 2 is the same surface
    for eta in ETAS:
        for theta in [0.0, 0.2, np.pi / 8, np.pi / 4]:
            c0 = 0.5 * (1.0 + np.sqrt(1.0 - eta**2 * np.sin(2 * theta) ** 2))
            assert single_photon_site_spectrum(eta, theta)[0] == pytest.approx(c0, abs=1e-14)


def test_single_photon_spectrum_extremes() -> None:
    np.testing.assert_allclose(single_photon_site_spectrum(0.8, 0.0), [1.0, 0.0], atol=1e-14)
    np.testing.assert_allclose(
        single_photon_site_spectrum(1.0, np.pi / 4), [0.5, 0.5], atol=1e-14
    )


@pytest.mark.parametrize("eta", ETAS)
@pytest.mark.parametrize("theta", THETAS)
def test_single_photon_spectrum_matches_dense(eta: float, theta: float) -> None:
    for sign in (+1, -1):
        dense = dense_site_spectrum(single_photon_branch_state(eta, sign), theta, keep=2)
        np.testing.assert_allclose(
            single_photon_site_spectrum(eta, theta), dense, atol=1e-10
        )


@pytest.mark.parametrize("eta", ETAS)
def test_fock_spectrum_reduces_to_single_photon(eta: float) -> None:
    for theta in THETAS:
        np.testing.assert_allclose(
            fock_site_spectrum(1, eta, theta),
            single_photon_site_spectrum(eta, theta),
            atol=1e-14,
        )


@pytest.mark.parametrize("n", [2, 3, 4])
def test_fock_spectrum_matches_dense(n: int) -> None:
    # the dense branch carries an arbitrary ensemble phase; the spectrum
    # must not depend on it
    for phi in [0.0, 0.7]:
        dense = dense_site_spectrum(fock_branch_state(n, 0.5, phi), np.pi / 4, keep=n + 1)
        np.testing.assert_allclose(fock_site_spectrum(n, 0.5, np.pi / 4), dense, atol=1e-10)


def test_fock_spectrum_basics() -> None:
    spec = fock_site_spectrum(3, 0.6, np.pi / 8)
    assert spec.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(np.diff(spec) <= 1e-15)
    np.testing.assert_allclose(fock_site_spectrum(3, 0.6, 0.0)[0], 1.0, atol=1e-12)


@pytest.mark.parametrize("parity", ["odd", "even"])
@pytest.mark.parametrize("eta", [0.3, 0.7])
def test_cat_spectrum_matches_dense(parity: str, eta: float) -> None:
    gamma, cutoff = 1.0, 30
    for theta in [np.pi / 8, np.pi / 4]:
        dense = dense_site_spectrum(
            cat_branch_state(gamma, parity, eta, 1, cutoff), theta, keep=2
        )
        np.testing.assert_allclose(
            cat_site_spectrum(gamma, parity, eta, theta), dense, atol=1e-10
        )


def test_cat_spectrum_small_gamma_approaches_single_photon() -> None:
    # a weak odd cat is dominated by its one-photon component
    spec_cat = cat_site_spectrum(0.05, "odd", 0.6, np.pi / 4)
    spec_single = single_photon_site_spectrum(0.6, np.pi / 4)
    np.testing.assert_allclose(spec_cat, spec_single, atol=1e-3)


def test_cat_spectrum_no_mixing_is_pure() -> None:
    np.testing.assert_allclose(
        cat_site_spectrum(1.0, "even", 0.5, 0.0), [1.0, 0.0], atol=1e-12
    )


# ---------------------------------------------------------------------------
# Renyi entanglement entropies


def test_ere_from_spectra_is_additive() -> None:
    spectra = [[0.9, 0.1], [0.8, 0.2], [0.6, 0.4]]
    for alpha in [0.5, 1.0, 2.0]:
        expected = sum(renyi_entropy(s, alpha) for s in spectra)
        assert ere_from_spectra(spectra, alpha) == pytest.approx(expected, abs=1e-13)


def test_ere_single_photon_example() -> None:
    assert ere_single_photon(10, 0.6, 1.0) == pytest.approx(3.251, abs=1e-3)


def test_ere_single_photon_worst_case_closed_form() -> None:
    # worst case: every mode at (1 +/- sqrt(1 - eta^2))/2
    for alpha in [0.3, 0.5, 1.0, 2.0]:
        for eta in ETAS:
            lam = 0.5 * (1.0 + np.sqrt(1.0 - eta**2))
            expected = 8 * renyi_entropy([lam, 1.0 - lam], alpha)
            assert ere_single_photon(8, eta, alpha) == pytest.approx(expected, abs=1e-12)


def test_ere_single_photon_with_theta_profile() -> None:
    thetas = np.array([0.1, 0.4, np.pi / 4])
    expected = sum(
        renyi_entropy(single_photon_site_spectrum(0.5, t), 2.0) for t in thetas
    )
    assert ere_single_photon(3, 0.5, 2.0, thetas=thetas) == pytest.approx(expected, abs=1e-13)
    with pytest.raises(ValueError):
        ere_single_photon(4, 0.5, 2.0, thetas=thetas)  # wrong length
    with pytest.raises(ValueError):
        ere_single_photon(3, 0.5, 2.0, thetas="best")


def test_ere_single_photon_extremes() -> None:
    assert ere_single_photon(6, 0.0, 1.0) == 0.0
    assert ere_single_photon(6, 1.0, 1.0) == pytest.approx(6 * np.log(2), abs=1e-12)


def test_ere_fock_and_cat_are_mode_sums() -> None:
    assert ere_fock(4, 3, 0.5, 1.0) == pytest.approx(
        4 * renyi_entropy(fock_site_spectrum(3, 0.5, np.pi / 4), 1.0), abs=1e-12
    )
    assert ere_cat(3, 1.0, "odd", 0.7, 2.0) == pytest.approx(
        3 * renyi_entropy(cat_site_spectrum(1.0, "odd", 0.7, np.pi / 4), 2.0), abs=1e-12
    )


# ---------------------------------------------------------------------------
# Simulability bounds


def test_ere_upper_bound_example() -> None:
    # N eta^{2 alpha} / (1 - alpha) at N=100, eta=0.1, alpha=0.5 is 20
    assert ere_upper_bound(100, 0.1, 0.5) == pytest.approx(20.0, abs=1e-12)


def test_ere_upper_bound_domain() -> None:
    with pytest.raises(ValueError):
        ere_upper_bound(10, 0.5, 1.0)
    with pytest.raises(ValueError):
        ere_upper_bound(10, 0.5, 0.0)
    with pytest.raises(ValueError):
        ere_upper_bound(10, 1.5, 0.5)


def test_ere_upper_bound_dominates_worst_case() -> None:
    for alpha in [0.3, 0.5, 0.9]:
        for eta in np.arange(0.05, 1.0, 0.05):
            for n in range(5, 55, 5):
                assert ere_upper_bound(n, eta, alpha) >= ere_single_photon(n, eta, alpha) - 1e-12


def test_ere_lower_bound_domain() -> None:
    with pytest.raises(ValueError):
        ere_lower_bound(10, 0.5, 1.0)
    with pytest.raises(ValueError):
        ere_lower_bound(10, 0.5, 0.5)


def test_ere_lower_bound_is_dominated_by_worst_case() -> None:
    for alpha in [1.5, 2.0, 3.0]:
        for eta in ETAS:
            for n in range(5, 55, 5):
                assert ere_lower_bound(n, eta, alpha) <= ere_single_photon(n, eta, alpha) + 1e-12


def test_ere_lower_bound_values() -> None:
    # min-entropy of the worst-case two-point spectrum, independent of alpha
    assert ere_lower_bound(7, 1.0, 2.0) == pytest.approx(7 * np.log(2), abs=1e-12)
    assert ere_lower_bound(4, 0.5, 2.0) == ere_lower_bound(4, 0.5, 3.0)
    # small-eta behaviour ~ N eta^2 / 4
    eta = 1e-3
    assert ere_lower_bound(1, eta, 2.0) == pytest.approx(eta**2 / 4, rel=1e-5)


def test_iqp_ere_bound_extremes() -> None:
    for alpha in [0.5, 1.0, 2.0]:
        assert iqp_ere_bound(8, 0.0, alpha) == pytest.approx(4 * np.log(2), abs=1e-12)
        assert iqp_ere_bound(8, 0.5, alpha) == pytest.approx(0.0, abs=1e-12)


def test_iqp_ere_bound_is_half_cut_product_entropy() -> None:
    from mns.iqp import iqp_branch_amplitudes

    n, p_d = 10, 0.2
    q0, q1 = iqp_branch_amplitudes(p_d)
    site = [q0**2, q1**2]
    for alpha in [0.5, 1.0, 2.0]:
        expected = ere_from_spectra([site] * (n // 2), alpha)
        assert iqp_ere_bound(n, p_d, alpha) == pytest.approx(expected, abs=1e-13)


# ---------------------------------------------------------------------------
# Bond-dimension estimator


def test_memory_estimate_values() -> None:
    assert memory_estimate(1, 1, 1) == 8.0
    # the shape used in the sweep tables: chi=10, 100 modes, local dim 41
    assert memory_estimate(10, 100, 41) == pytest.approx(3.28e6)
    with pytest.raises(ValueError):
        memory_estimate(0, 1, 1)


def test_required_bond_dimension_two_mode_example() -> None:
    # two modes at (0.9, 0.1): products 0.81, 0.09, 0.09, 0.01; the three
    # largest already cover 0.99
    res = required_bond_dimension([[0.9, 0.1]] * 2, 0.01)
    assert res.chi == 3
    assert res.retained_weight == pytest.approx(0.99, abs=1e-12)
    assert res.pruned_branches >= 0
    assert np.isfinite(res.log_threshold)
    assert res.memory_bytes is None


def test_required_bond_dimension_single_branch() -> None:
    res = required_bond_dimension([[0.9, 0.1]] * 2, 0.2)
    assert res.chi == 1
    assert res.retained_weight == pytest.approx(0.81, abs=1e-12)


def test_required_bond_dimension_fills_memory_field() -> None:
    res = required_bond_dimension([[0.9, 0.1]] * 2, 0.01, modes=20, local_dim=3)
    assert res.memory_bytes == pytest.approx(8.0 * 9 * 20 * 3)


def test_estimator_matches_brute_force_on_random_spectra() -> None:
    rng = np.random.default_rng(17)
    for _ in range(40):
        sites = int(rng.integers(1, 7))
        spectra = []
        for _ in range(sites):
            dim = int(rng.integers(1, 5))
            p = rng.random(dim) + 0.05
            spectra.append(np.sort(p / p.sum())[::-1])
        for eps in (0.01, 0.05, 0.1, 0.3):
            expected = brute_force_bond_dimension(spectra, eps)
            got = required_bond_dimension(spectra, eps)
            assert got.chi == expected


def test_estimator_matches_brute_force_on_photonic_spectra() -> None:
    for n in (3, 7, 11, 15):
        for eta in (0.2, 0.5, 0.8):
            spectra = [single_photon_site_spectrum(eta, np.pi / 4)] * n
            for eps in (0.01, 0.05):
                assert (
                    required_bond_dimension(spectra, eps).chi
                    == brute_force_bond_dimension(spectra, eps)
                )


def test_estimator_monotonicity() -> None:
    spec = single_photon_site_spectrum(0.5, np.pi / 4)
    chis_eps = [required_bond_dimension([spec] * 10, e).chi for e in (0.01, 0.05, 0.1, 0.3)]
    assert all(a >= b for a, b in zip(chis_eps, chis_eps[1:]))
    chis_n = [required_bond_dimension([spec] * n, 0.05).chi for n in (4, 8, 12, 16)]
    assert all(a <= b for a, b in zip(chis_n, chis_n[1:]))


def test_estimator_retained_weight_band() -> None:
    res = required_bond_dimension([single_photon_site_spectrum(0.5, np.pi / 4)] * 14, 0.01)
    assert 0.99 <= res.retained_weight < 1.0


def test_estimator_cap_carries_partial_bound() -> None:
    spectra = [single_photon_site_spectrum(0.9, np.pi / 4)] * 24
    with pytest.raises(ResourceLimitError) as err:
        required_bond_dimension(spectra, 0.01, cap=1000)
    assert isinstance(err.value.partial, int)
    assert err.value.partial >= 1000


def test_estimator_validation() -> None:
    with pytest.raises(ValueError):
        required_bond_dimension([[0.9, 0.1]], 0.0)
    with pytest.raises(ValueError):
        required_bond_dimension([[0.9, 0.1]], 1.0)
    with pytest.raises(ValueError):
        required_bond_dimension([], 0.1)
    with pytest.raises(ValueError):
        required_bond_dimension([[0.7, 0.2]], 0.1)  # bad spectrum


def test_product_spectrum_brute_force_properties() -> None:
    spectrum = product_spectrum_brute_force([[0.9, 0.1], [0.6, 0.4]])
    probs = np.exp(spectrum)
    assert probs.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(np.diff(spectrum) <= 0)
    with pytest.raises(ResourceLimitError):
        product_spectrum_brute_force([[0.5, 0.3, 0.2]] * 15)


# ---------------------------------------------------------------------------
# Scaling diagnostics


def test_scaling_diagnostic_log_slope() -> None:
    ns = [64, 128, 256, 512, 1024, 2048]
    series = [(n, 3.0 * np.log(n)) for n in ns]
    assert scaling_diagnostic(series, "log-slope") == pytest.approx(3.0, abs=1e-10)


def test_scaling_diagnostic_power_fit() -> None:
    ns = [10, 20, 40, 80]
    series = [(n, 2.0 * n**0.5) for n in ns]
    assert scaling_diagnostic(series, "power-fit") == pytest.approx(0.5, abs=1e-10)


def test_scaling_diagnostic_validation() -> None:
    ok = [(1, 1.0), (2, 2.0), (3, 3.0), (4, 4.0)]
    with pytest.raises(ValueError):
        scaling_diagnostic(ok[:3], "log-slope")
    with pytest.raises(ValueError):
        scaling_diagnostic([(1, 1.0), (1, 2.0), (3, 3.0), (4, 4.0)], "log-slope")
    with pytest.raises(ValueError):
        scaling_diagnostic([(1, -1.0), (2, 2.0), (3, 3.0), (4, 4.0)], "power-fit")
    with pytest.raises(ValueError):
        scaling_diagnostic(ok, "volume-law")


# ---------------------------------------------------------------------------
# Haar commutation statistics


def test_normalized_pair_overlap_diagonal_is_one() -> None:
    u = haar_unitary(8, seed=2)
    for j in range(8):
        assert abs(normalized_pair_overlap(u, 4, j, j) - 1.0) < 1e-12


def test_commutation_statistics_determinism_and_scale() -> None:
    a = commutation_statistics(64, 32, pair_count=32, trials=10, seed=3)
    b = commutation_statistics(64, 32, pair_count=32, trials=10, seed=3)
    assert a == b
    # Haar overlap magnitude at a half cut decays like ~0.89/sqrt(M)
    assert 0.07 < a["mean_abs"] < 0.16
    assert a["stderr"] > 0.0


def test_commutation_statistics_slope_is_half() -> None:
    sizes = [16, 32, 64, 128]
    points = []
    for m in sizes:
        stats = commutation_statistics(m, m // 2, pair_count=48, trials=12, seed=5)
        points.append((m, stats["mean_abs"]))
    slope = scaling_diagnostic(points, "power-fit")
    assert slope == pytest.approx(-0.5, abs=0.15)


def test_commutation_statistics_validation() -> None:
    with pytest.raises(ValueError):
        commutation_statistics(8, 8, 4, 4, 0)
    with pytest.raises(ValueError):
        commutation_statistics(8, 4, 0, 4, 0)
