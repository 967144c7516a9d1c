import numpy as np
import pytest

from weakrel import (
    ContractViolationError,
    Observable,
    TruncationError,
    coherent_state,
    conjugate_pair_check,
    fock_state,
    haar_random_state_rng,
    mp1_check,
    mp2_check,
    nh_variance,
    nh_variance_value,
    parallelogram_identity_check,
    parallelogram_residual,
    pps_ensemble,
    random_hermitian_rng,
    random_orthogonal_state,
    rng_from_seed,
    robertson_check,
    top_level_population,
    truncated_fock_pair,
    ur1_check,
    ur1_terms,
    ur2_check,
    vaidman_decompose,
    weak_operator,
    weak_value,
)

SZ = Observable.from_matrix(np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex))
SX = Observable.from_matrix(np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex))
SY = Observable.from_matrix(np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex))
KET0 = np.array([1.0, 0.0], dtype=complex)
KET1 = np.array([0.0, 1.0], dtype=complex)
PLUS = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0)
MINUS = np.array([1.0, -1.0], dtype=complex) / np.sqrt(2.0)


def random_ensemble(rng, dim):
    psi = haar_random_state_rng(dim, rng)
    while True:
        phi = haar_random_state_rng(dim, rng)
        if abs(np.vdot(phi, psi)) ** 2 > 1e-10:
            return pps_ensemble(psi, phi)


# --------------------------------------------------------------------------
# non-Hermitian variance and the orthogonal decomposition


def test_nh_variance_reduces_to_ordinary_variance():
    rng = rng_from_seed(41)
    for dim in (2, 4, 7):
        psi = haar_random_state_rng(dim, rng)
        O = random_hermitian_rng(dim, rng)
        direct = (np.vdot(psi, O @ (O @ psi)) - np.vdot(psi, O @ psi) ** 2).real
        assert nh_variance_value(psi, O) == pytest.approx(direct, abs=1e-12)


def test_nh_variance_weak_operator_reduces_at_equal_selection():
    rng = rng_from_seed(42)
    psi = haar_random_state_rng(4, rng)
    A = Observable.from_matrix(random_hermitian_rng(4, rng))
    w = weak_operator(pps_ensemble(psi, psi), A)
    assert nh_variance_value(psi, w.matrix) == pytest.approx(A.variance(psi), abs=1e-12)


def test_nh_variance_qubit_fixture():
    # A_w = [[1,-1],[1,-1]]; <0|A_w A_w^dag|0> = 2, |<A_w>|^2 = 1, variance 1
    ens = pps_ensemble(KET0, PLUS)
    w = weak_operator(ens, SZ)
    direct = (np.vdot(KET0, w.matrix @ (w.matrix.conj().T @ KET0))
              - abs(np.vdot(KET0, w.matrix @ KET0)) ** 2).real
    assert direct == pytest.approx(1.0, abs=1e-14)
    assert nh_variance_value(KET0, w.matrix) == pytest.approx(1.0, abs=1e-14)


def test_nh_variance_nonnegative_sweep():
    rng = rng_from_seed(43)
    for dim in (2, 3, 6):
        for _ in range(40):
            psi = haar_random_state_rng(dim, rng)
            O = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
            assert nh_variance_value(psi, O) >= 0.0


def test_nh_variance_report_fields():
    report = nh_variance(PLUS, SZ.matrix)
    assert report.value == pytest.approx(1.0, abs=1e-14)
    assert report.state_fingerprint and report.operator_fingerprint


def test_vaidman_sigma_z_on_plus():
    # sz|+> = |->: mean 0, spread 1, orthogonal state |->
    parts = vaidman_decompose(PLUS, SZ.matrix)
    assert parts.mean == pytest.approx(0.0, abs=1e-14)
    assert parts.spread == pytest.approx(1.0, abs=1e-14)
    assert np.allclose(parts.orthogonal_state, MINUS, atol=1e-14)


def test_vaidman_eigenstate_degenerate():
    parts = vaidman_decompose(KET0, SZ.matrix)
    assert parts.spread == pytest.approx(0.0, abs=1e-14)
    assert parts.orthogonal_state is None


def test_vaidman_reconstruction_sweep():
    rng = rng_from_seed(44)
    for dim in (2, 5, 8):
        for _ in range(20):
            psi = haar_random_state_rng(dim, rng)
            O = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
            parts = vaidman_decompose(psi, O)
            residual = np.linalg.norm(O.conj().T @ psi - parts.reconstruct(psi))
            assert residual < 1e-10 * max(1.0, np.linalg.norm(O))
            if parts.orthogonal_state is not None:
                assert abs(np.vdot(psi, parts.orthogonal_state)) < 1e-12


# --------------------------------------------------------------------------
# first relation


def test_ur1_terms_equal_observables():
    rng = rng_from_seed(45)
    ens = random_ensemble(rng, 3)
    A = Observable.from_matrix(random_hermitian_rng(3, rng))
    pb = random_orthogonal_state(ens.pre, rng)
    for sign in (+1, -1):
        terms = ur1_terms(ens, A, A, pb, sign)
        assert terms.commutator == pytest.approx(0.0, abs=1e-12)
        assert terms.cross == pytest.approx(0.0, abs=1e-12)
        assert terms.rhs_total == pytest.approx(terms.overlap_sq, abs=1e-12)


def test_ur1_terms_qubit_oracle_zx():
    # psi=|0>, phi=|+>, A=sz, B=sx, psibar=|1>: direct complex arithmetic
    # gives [sz,sx] averaged in |+> equal 0, both weak values 1 (cross 0),
    # and |<0|(A_w + s i B_w)|1>|^2 = |-1 + s*i|^2 = 2 for both signs.
    ens = pps_ensemble(KET0, PLUS)
    for sign in (+1, -1):
        terms = ur1_terms(ens, SZ, SX, KET1, sign)
        assert terms.commutator == pytest.approx(0.0, abs=1e-12)
        assert terms.cross == pytest.approx(0.0, abs=1e-12)
        assert terms.overlap_sq == pytest.approx(2.0, abs=1e-12)


def test_ur1_terms_qubit_oracle_zy():
    # psi=|0>, phi=|+>, A=sz, B=sy, psibar=|1>:
    #   term1(s) = s*(i/k)<+|[sz,sy]|+> = s*2i*(-2i) = 4s        (k = 1/2)
    #   term2(s) = s*i(wa* wb - wa wb*) with wa=1, wb=i  -> -2s
    #   term3(s) = |-1 + s|^2 -> 0 (s=+1), 4 (s=-1)
    ens = pps_ensemble(KET0, PLUS)
    plus_terms = ur1_terms(ens, SZ, SY, KET1, +1)
    assert plus_terms.commutator == pytest.approx(4.0, abs=1e-12)
    assert plus_terms.cross == pytest.approx(-2.0, abs=1e-12)
    assert plus_terms.overlap_sq == pytest.approx(0.0, abs=1e-12)
    minus_terms = ur1_terms(ens, SZ, SY, KET1, -1)
    assert minus_terms.commutator == pytest.approx(-4.0, abs=1e-12)
    assert minus_terms.cross == pytest.approx(2.0, abs=1e-12)
    assert minus_terms.overlap_sq == pytest.approx(4.0, abs=1e-12)
    # both branches are valid bounds for lhs = 2 and saturate here
    assert plus_terms.rhs_total == pytest.approx(2.0, abs=1e-12)
    assert minus_terms.rhs_total == pytest.approx(2.0, abs=1e-12)


def test_ur1_terms_rejects_bad_psibar():
    ens = pps_ensemble(KET0, PLUS)
    with pytest.raises(ContractViolationError):
        ur1_terms(ens, SZ, SX, PLUS, +1)  # not orthogonal to |0>
    with pytest.raises(ValueError):
        ur1_terms(ens, SZ, SX, KET1, 2)


def test_ur1_optimal_saturates():
    rng = rng_from_seed(46)
    for dim in (2, 4, 6):
        ens = random_ensemble(rng, dim)
        A = Observable.from_matrix(random_hermitian_rng(dim, rng))
        B = Observable.from_matrix(random_hermitian_rng(dim, rng))
        report = ur1_check(ens, A, B, "optimal")
        assert abs(report.slack) <= 1e-9 * max(1.0, report.lhs)
        assert report.tight or report.lhs > 1e9  # tight flag at absolute 1e-9


def test_ur1_random_psibar_sweep_slack_nonnegative():
    rng = rng_from_seed(47)
    for dim in (2, 3, 5, 8):
        for _ in range(50):
            ens = random_ensemble(rng, dim)
            A = Observable.from_matrix(random_hermitian_rng(dim, rng))
            B = Observable.from_matrix(random_hermitian_rng(dim, rng))
            report = ur1_check(ens, A, B, "random", rng=rng)
            assert report.slack >= -1e-9 * max(1.0, report.lhs)
            assert report.extras["imag_residue"] <= 1e-10


def test_ur1_nontrivial_when_state_is_eigenstate():
    # Robertson is trivial here, the sum relation is not
    ens = pps_ensemble(KET0, KET0)
    report = ur1_check(ens, SZ, SX, "optimal")
    rob = robertson_check(KET0, SZ, SX)
    assert rob.lhs == pytest.approx(0.0, abs=1e-14)
    assert rob.rhs_total == pytest.approx(0.0, abs=1e-14)
    assert report.rhs_total > 1e-6


def test_ur1_supplied_mode_and_fingerprints():
    rng = rng_from_seed(48)
    ens = random_ensemble(rng, 4)
    A = Observable.from_matrix(random_hermitian_rng(4, rng))
    B = Observable.from_matrix(random_hermitian_rng(4, rng))
    pb = random_orthogonal_state(ens.pre, rng)
    report = ur1_check(ens, A, B, "supplied", psibar=pb)
    assert report.slack >= -1e-9
    assert report.psibar_mode == "supplied"
    assert set(report.fingerprints) == {"pre", "post", "A", "B", "psibar"}
    with pytest.raises(ValueError):
        ur1_check(ens, A, B, "supplied")
    with pytest.raises(ValueError):
        ur1_check(ens, A, B, "random")


# --------------------------------------------------------------------------
# second relation


def test_ur2_equal_operators_saturates():
    # lhs = 2 dA^2 and rhs(optimal) = (1/2) d^2(2A_w) = 2 dA^2
    rng = rng_from_seed(49)
    psi = haar_random_state_rng(3, rng)
    A = Observable.from_matrix(random_hermitian_rng(3, rng))
    report = ur2_check(pps_ensemble(psi, psi), A, A, "optimal")
    assert abs(report.slack) <= 1e-9 * max(1.0, report.lhs)
    assert report.tight


def test_ur2_optimal_equals_half_sum_variance():
    rng = rng_from_seed(50)
    for dim in (2, 4, 7):
        ens = random_ensemble(rng, dim)
        A = Observable.from_matrix(random_hermitian_rng(dim, rng))
        B = Observable.from_matrix(random_hermitian_rng(dim, rng))
        report = ur2_check(ens, A, B, "optimal")
        half = 0.5 * report.extras["sum_variance"]
        assert abs(report.rhs_total - half) <= 1e-10 * max(1.0, half)
        # slack in optimal mode is half the spread of A_w - B_w
        Aw = weak_operator(ens, A).matrix
        Bw = weak_operator(ens, B).matrix
        diff_var = nh_variance_value(ens.pre, Aw - Bw)
        assert report.slack == pytest.approx(0.5 * diff_var, rel=1e-9, abs=1e-12)


def test_ur2_random_sweep_slack_nonnegative():
    rng = rng_from_seed(51)
    for dim in (2, 3, 5, 8):
        for _ in range(50):
            ens = random_ensemble(rng, dim)
            A = Observable.from_matrix(random_hermitian_rng(dim, rng))
            B = Observable.from_matrix(random_hermitian_rng(dim, rng))
            report = ur2_check(ens, A, B, "random", rng=rng)
            assert report.slack >= -1e-9 * max(1.0, report.lhs)


# --------------------------------------------------------------------------
# parallelogram law


def test_parallelogram_qubit_both_alphas():
    ens = pps_ensemble(KET0, PLUS)
    assert parallelogram_residual(ens, SZ, SX, 1.0) <= 1e-12
    assert parallelogram_residual(ens, SZ, SX, 1j) <= 1e-12


def test_parallelogram_random_dim8():
    rng = rng_from_seed(52)
    ens = random_ensemble(rng, 8)
    A = Observable.from_matrix(random_hermitian_rng(8, rng))
    B = Observable.from_matrix(random_hermitian_rng(8, rng))
    scale = max(1.0, np.abs(A.eigenvalues).max() ** 2 / ens.overlap_k)
    assert parallelogram_identity_check(ens, A, B) <= 1e-10 * scale


def test_parallelogram_rejects_non_unimodular_alpha():
    ens = pps_ensemble(KET0, PLUS)
    with pytest.raises(ValueError):
        parallelogram_residual(ens, SZ, SX, 2.0)


# --------------------------------------------------------------------------
# Hermitian reductions and the Robertson baseline


def test_mp1_matches_ur1_at_equal_selection():
    rng = rng_from_seed(53)
    for dim in (2, 3, 5):
        psi = haar_random_state_rng(dim, rng)
        ens = pps_ensemble(psi, psi)
        A = Observable.from_matrix(random_hermitian_rng(dim, rng))
        B = Observable.from_matrix(random_hermitian_rng(dim, rng))
        pb = random_orthogonal_state(psi, rng)
        for mode, kwargs in (("optimal", {}), ("supplied", {"psibar": pb})):
            u = ur1_check(ens, A, B, mode, **kwargs)
            m = mp1_check(psi, A, B, mode, **kwargs)
            assert u.sign_branch == m.sign_branch
            assert u.lhs == pytest.approx(m.lhs, abs=1e-12)
            for key in u.rhs_terms:
                assert u.rhs_terms[key] == pytest.approx(m.rhs_terms[key], abs=1e-12)


def test_mp2_matches_ur2_at_equal_selection():
    rng = rng_from_seed(54)
    psi = haar_random_state_rng(4, rng)
    ens = pps_ensemble(psi, psi)
    A = Observable.from_matrix(random_hermitian_rng(4, rng))
    B = Observable.from_matrix(random_hermitian_rng(4, rng))
    pb = random_orthogonal_state(psi, rng)
    for mode, kwargs in (("optimal", {}), ("supplied", {"psibar": pb})):
        u = ur2_check(ens, A, B, mode, **kwargs)
        m = mp2_check(psi, A, B, mode, **kwargs)
        assert u.lhs == pytest.approx(m.lhs, abs=1e-12)
        assert u.rhs_total == pytest.approx(m.rhs_total, abs=1e-12)


def test_mp1_pauli_xy_ground_state():
    # lhs = 2; the positive-commutator branch has i<[sx,sy]> = -2<sz> signed
    # to +2 and a degenerate optimal state, so rhs = 2 exactly
    report = mp1_check(KET0, SX, SY, "optimal")
    assert report.lhs == pytest.approx(2.0, abs=1e-14)
    assert report.rhs_total == pytest.approx(2.0, abs=1e-14)
    assert report.sign_branch == "-"
    assert report.rhs_terms["overlap_sq"] == pytest.approx(0.0, abs=1e-14)
    assert report.fingerprints["psibar"] == "degenerate"
    assert report.tight


def test_mp_sweeps_hold():
    rng = rng_from_seed(55)
    for _ in range(40):
        psi = haar_random_state_rng(4, rng)
        A = Observable.from_matrix(random_hermitian_rng(4, rng))
        B = Observable.from_matrix(random_hermitian_rng(4, rng))
        r1 = mp1_check(psi, A, B, "random", rng=rng)
        r2 = mp2_check(psi, A, B, "random", rng=rng)
        assert r1.slack >= -1e-9 * max(1.0, r1.lhs)
        assert r2.slack >= -1e-9 * max(1.0, r2.lhs)


def test_robertson_pauli_fixture():
    # <[sx,sy]> = 2i<sz> = 2i in |0>: lhs = 1, rhs = 1
    report = robertson_check(KET0, SX, SY)
    assert report.lhs == pytest.approx(1.0, abs=1e-12)
    assert report.rhs_total == pytest.approx(1.0, abs=1e-12)
    assert report.tight


def test_robertson_eigenstate_trivial():
    report = robertson_check(KET0, SZ, SX)
    assert report.lhs == pytest.approx(0.0, abs=1e-14)
    assert report.rhs_total == pytest.approx(0.0, abs=1e-14)


def test_robertson_sweep():
    rng = rng_from_seed(56)
    for dim in (2, 4, 6):
        for _ in range(30):
            psi = haar_random_state_rng(dim, rng)
            A = Observable.from_matrix(random_hermitian_rng(dim, rng))
            B = Observable.from_matrix(random_hermitian_rng(dim, rng))
            assert robertson_check(psi, A, B).slack >= -1e-10


# --------------------------------------------------------------------------
# truncated conjugate pair


def test_fock_pair_commutator_structure():
    fock = truncated_fock_pair(12, hbar=1.0)
    comm = fock.X.matrix @ fock.P.matrix - fock.P.matrix @ fock.X.matrix
    expected = 1j * np.eye(12)
    # canonical everywhere except the top level
    assert np.max(np.abs(comm[:-1, :-1] - expected[:-1, :-1])) < 1e-10
    assert comm[-1, -1] == pytest.approx(1j * (1 - 12), abs=1e-10)


def test_fock_ground_state_sum_and_saturation():
    # oscillator ground state: dX^2 = dP^2 = hbar/2
    fock = truncated_fock_pair(40, hbar=1.0)
    st = fock_state(40, 0)
    report = conjugate_pair_check(fock, pps_ensemble(st, st), "optimal")
    assert report.lhs == pytest.approx(1.0, abs=1e-10)
    assert abs(report.slack) <= 1e-8
    assert report.extras["ideal_commutator_term"] == pytest.approx(1.0, abs=1e-12)
    assert report.extras["commutator_discrepancy"] <= 1e-10


def test_fock_first_level_saturation():
    # n=1: dX^2 = dP^2 = 3 hbar/2
    fock = truncated_fock_pair(40, hbar=1.0)
    st = fock_state(40, 1)
    report = conjugate_pair_check(fock, pps_ensemble(st, st), "optimal")
    assert report.lhs == pytest.approx(3.0, abs=1e-10)
    assert abs(report.slack) <= 1e-8


def test_fock_hbar_scaling():
    fock = truncated_fock_pair(40, hbar=2.0)
    st = fock_state(40, 0)
    report = conjugate_pair_check(fock, pps_ensemble(st, st), "optimal")
    assert report.lhs == pytest.approx(2.0, abs=1e-10)
    assert report.extras["ideal_commutator_term"] == pytest.approx(2.0, abs=1e-12)
    assert abs(report.slack) <= 1e-8


def test_fock_coherent_truncation_discrepancy():
    fock = truncated_fock_pair(40, hbar=1.0)
    st = coherent_state(40, 1.0)
    assert top_level_population(st) <= 1e-8
    report = conjugate_pair_check(fock, pps_ensemble(st, st), "optimal")
    assert report.extras["commutator_discrepancy"] <= 1e-8
    # printed closed form matches the generic third term at hbar = 1
    assert report.extras["printed_form_discrepancy"] <= 1e-10


def test_fock_truncation_guard():
    fock = truncated_fock_pair(40, hbar=1.0)
    bad = fock_state(40, 39)
    with pytest.raises(TruncationError):
        conjugate_pair_check(fock, pps_ensemble(bad, bad), "optimal")


def test_fock_random_low_support_ensembles():
    fock = truncated_fock_pair(40, hbar=1.0)
    rng = rng_from_seed(57)
    for _ in range(10):
        low1 = haar_random_state_rng(8, rng)
        low2 = haar_random_state_rng(8, rng)
        psi = np.zeros(40, dtype=complex)
        phi = np.zeros(40, dtype=complex)
        psi[:8] = low1
        phi[:8] = low2
        if abs(np.vdot(phi, psi)) ** 2 <= 1e-10:
            continue
        ens = pps_ensemble(psi, phi)
        opt = conjugate_pair_check(fock, ens, "optimal")
        rnd = conjugate_pair_check(fock, ens, "random", rng=rng)
        assert abs(opt.slack) <= 1e-9 * max(1.0, opt.lhs)
        assert rnd.slack >= -1e-9 * max(1.0, rnd.lhs)
