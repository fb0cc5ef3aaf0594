import numpy as np
import pytest

from spinspec.catalog import pauli_symbol, random_gauged_symbol, winding_gauge, winding_symbol
from spinspec.errors import (
    ConvergenceFailure,
    NonpositiveWeight,
    OutsideTrustWindow,
    TruncationTooSmall,
)
from spinspec.fields import MatrixField, TrigPoly
from spinspec.spectrum import (
    CountingTable,
    Truncation,
    assemble,
    asymptotic_compare,
    counting_function,
    eigensolve,
    exact_example_counting,
    exact_example_spectrum,
    hermiticity_residual,
    lattice_count,
    lattice_counts,
    match_clusters,
    midpoint_lambda_grid,
    trust_radius_for,
    weighted_reduce,
)
from spinspec.symbols import Operator1st, conjugate_operator, operator_from_symbol


def brute_lattice_count(r):
    if r <= 0:
        return 0
    rr = int(np.floor(r)) + 1
    g = np.arange(-rr, rr + 1)
    m1, m2, m3 = np.meshgrid(g, g, g, indexing="ij")
    return int(np.count_nonzero(m1**2 + m2**2 + m3**2 < r * r))


def block_spectrum_1d(op, M):
    """Independent assembly for operators whose coefficients only carry
    frequencies along the first axis: the matrix decouples over (m2, m3)."""
    cm = [p.coefficient_map() for p in op.P] + [op.Q0.coefficient_map()]
    for mp in cm:
        for k in mp:
            assert k[1] == 0 and k[2] == 0
    r = np.arange(-M, M + 1)
    eigs = []
    for m2 in r:
        for m3 in r:
            dim = 2 * (2 * M + 1)
            b = np.zeros((dim, dim), dtype=complex)
            for i1, m1r in enumerate(r):
                for j1, m1c in enumerate(r):
                    k = (int(m1r - m1c), 0, 0)
                    blk = np.zeros((2, 2), complex)
                    for a, mom in enumerate((m1c, m2, m3)):
                        c = cm[a].get(k)
                        if c is not None:
                            blk += 1j * mom * c
                    cq = cm[3].get(k)
                    if cq is not None:
                        blk += cq
                    b[2 * i1:2 * i1 + 2, 2 * j1:2 * j1 + 2] = blk
            eigs.append(np.linalg.eigvalsh(0.5 * (b + b.conj().T)))
    return np.sort(np.concatenate(eigs))


# -- assembly -------------------------------------------------------------------


def test_constant_operator_assembles_block_diagonal():
    op = operator_from_symbol(pauli_symbol())
    trunc = Truncation(1)
    a = assemble(op, trunc)
    # constant coefficients couple only m' = m: the matrix is block diagonal
    # with blocks (sigma . m)
    modes = trunc.modes()
    for i, m in enumerate(modes):
        blk = a[2 * i:2 * i + 2, 2 * i:2 * i + 2]
        expect = np.array([[m[2], m[0] - 1j * m[1]], [m[0] + 1j * m[1], -m[2]]])
        assert np.abs(blk - expect).max() < 1e-14
    off = a.copy()
    for i in range(len(modes)):
        off[2 * i:2 * i + 2, 2 * i:2 * i + 2] = 0
    assert np.abs(off).max() == 0.0


def test_winding_operator_couples_only_shifted_modes():
    op = operator_from_symbol(winding_symbol(2))
    trunc = Truncation(2)
    a = assemble(op, trunc)
    modes = trunc.modes()
    for i, mi in enumerate(modes):
        for j, mj in enumerate(modes):
            blk = a[2 * i:2 * i + 2, 2 * j:2 * j + 2]
            diff = tuple(mi - mj)
            if diff not in ((0, 0, 0), (0, 0, 2), (0, 0, -2)):
                assert np.abs(blk).max() == 0.0


def test_assembled_matrices_are_hermitian(rng):
    for _ in range(3):
        sym, _ = random_gauged_symbol(rng)
        a = assemble(operator_from_symbol(sym), Truncation(2))
        assert hermiticity_residual(a) < 1e-12 * max(1.0, np.abs(a).max())


def test_truncation_too_small_is_flagged():
    op = operator_from_symbol(winding_symbol(2))
    with pytest.raises(TruncationTooSmall):
        assemble(op, Truncation(0))


# -- eigensolve -----------------------------------------------------------------


def test_constant_operator_spectrum_multiset():
    # analytic oracle: (sigma . m) has eigenvalues +/- |m|
    op = operator_from_symbol(pauli_symbol())
    trunc = Truncation(2)
    spec = eigensolve(assemble(op, trunc), trunc)
    norms = np.linalg.norm(trunc.modes(), axis=1)
    expect = np.sort(np.concatenate([norms, -norms]))
    assert np.abs(spec.eigenvalues - expect).max() < 1e-10


def test_constant_operator_spectrum_symmetric():
    op = operator_from_symbol(pauli_symbol())
    trunc = Truncation(2)
    spec = eigensolve(assemble(op, trunc), trunc)
    assert np.abs(spec.eigenvalues + spec.eigenvalues[::-1]).max() < 1e-10


def test_tiny_constant_matrix():
    spec = eigensolve(np.diag([3.0, -1.0]).astype(complex))
    assert np.allclose(spec.eigenvalues, [-1.0, 3.0])


def test_eigensolve_rejects_non_hermitian():
    with pytest.raises(ConvergenceFailure):
        eigensolve(np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex))


def test_winding_operator_interior_eigenvalues_exact():
    op = operator_from_symbol(winding_symbol(2))
    trunc = Truncation(4)
    spec = eigensolve(assemble(op, trunc), trunc,
                      trust_radius=trust_radius_for(op, 4))
    r = np.arange(-2, 3)
    m1, m2, m3 = np.meshgrid(r, r, r, indexing="ij")
    mm = np.stack([m1.ravel(), m2.ravel(), m3.ravel()], axis=1)
    nz = (mm != 0).any(axis=1)
    norms = np.linalg.norm(mm[nz], axis=1)
    exact = np.concatenate([[1.0, 1.0], 1 + norms, 1 - norms])
    for value, mult, got in match_clusters(exact, spec.eigenvalues, tol=1e-8):
        assert got >= mult, (value, mult, got)


def test_charge_flipped_operator_has_negated_spectrum():
    # entrywise conjugation of the coefficient matrices (= negating the
    # second frame vector) is antiunitary equivalence to -L: the Galerkin
    # spectra must be exact mirror images
    from spinspec.catalog import charge_flipped

    trunc = Truncation(3)
    s = eigensolve(assemble(operator_from_symbol(winding_symbol(2)), trunc), trunc)
    sf = eigensolve(assemble(operator_from_symbol(charge_flipped(winding_symbol(2))), trunc),
                    trunc)
    assert np.abs(sf.eigenvalues + s.eigenvalues[::-1]).max() < 1e-10


def test_unitary_conjugation_shift_of_spectra():
    # spectra of R L0 R* + I and of the winding operator agree in the window
    op0 = operator_from_symbol(pauli_symbol())
    conj = conjugate_operator(op0, winding_gauge(1))
    shifted = Operator1st(P=conj.P, Q0=conj.Q0 + MatrixField.const(np.eye(2)))
    opw = operator_from_symbol(winding_symbol(2))
    trunc = Truncation(3)
    s1 = eigensolve(assemble(shifted, trunc), trunc).eigenvalues
    s2 = eigensolve(assemble(opw, trunc), trunc).eigenvalues
    trust = trust_radius_for(opw, 3)
    w1 = s1[np.abs(s1) <= trust]
    w2 = s2[np.abs(s2) <= trust]
    assert len(w1) == len(w2)
    assert np.abs(w1 - w2).max() < 1e-8


def test_exact_eigenvalues_match_galerkin_in_window():
    op = operator_from_symbol(winding_symbol(2))
    trunc = Truncation(4)
    trust = trust_radius_for(op, 4)
    spec = eigensolve(assemble(op, trunc), trunc, trust_radius=trust)
    exact = exact_example_spectrum(trust)
    for value, mult, got in match_clusters(exact, spec.eigenvalues, tol=1e-8):
        assert got >= mult, (value, mult, got)


# -- weighted reduction ------------------------------------------------------------


def test_weighted_reduce_trivial_and_constant():
    op = operator_from_symbol(pauli_symbol())
    r1 = weighted_reduce(op, TrigPoly.const(1.0))
    assert all(r1.P[a].allclose(op.P[a], 1e-13) for a in range(3))
    assert r1.Q0.coeff_scale < 1e-13
    r4 = weighted_reduce(op, TrigPoly.const(4.0))
    assert all(r4.P[a].allclose(op.P[a] * 0.25, 1e-13) for a in range(3))


def test_weighted_reduce_rejects_nonpositive():
    with pytest.raises(NonpositiveWeight):
        weighted_reduce(operator_from_symbol(pauli_symbol()),
                        TrigPoly.const(1.0) + TrigPoly.cosine((1, 0, 0), 2.0))


def test_weighted_reduce_scales_spectrum_for_constant_weight():
    op = operator_from_symbol(winding_symbol(2))
    trunc = Truncation(2)
    base = eigensolve(assemble(op, trunc), trunc).eigenvalues
    quarter = eigensolve(assemble(weighted_reduce(op, TrigPoly.const(4.0)), trunc),
                         trunc).eigenvalues
    assert np.abs(quarter - base / 4.0).max() < 1e-10


def generalized_block_spectrum_1d(op, w, M):
    """Generalized problem A v = lam B v assembled per decoupled 1D block."""
    scipy_linalg = pytest.importorskip("scipy.linalg")
    cm = [p.coefficient_map() for p in op.P] + [op.Q0.coefficient_map()]
    wc = dict(w.coeffs)
    r = np.arange(-M, M + 1)
    eigs = []
    for m2 in r:
        for m3 in r:
            dim = 2 * (2 * M + 1)
            a = np.zeros((dim, dim), complex)
            b = np.zeros((dim, dim), complex)
            for i1, m1r in enumerate(r):
                for j1, m1c in enumerate(r):
                    k = (int(m1r - m1c), 0, 0)
                    blk = np.zeros((2, 2), complex)
                    for ax, mom in enumerate((m1c, m2, m3)):
                        c = cm[ax].get(k)
                        if c is not None:
                            blk += 1j * mom * c
                    cq = cm[3].get(k)
                    if cq is not None:
                        blk += cq
                    a[2 * i1:2 * i1 + 2, 2 * j1:2 * j1 + 2] = blk
                    if k in wc:
                        b[2 * i1:2 * i1 + 2, 2 * j1:2 * j1 + 2] = wc[k] * np.eye(2)
            eigs.append(
                scipy_linalg.eigh(0.5 * (a + a.conj().T), 0.5 * (b + b.conj().T),
                                  eigvals_only=True)
            )
    return np.sort(np.concatenate(eigs))


def test_weighted_reduction_matches_generalized_eigenproblem():
    # dual route: the generalized problem A v = lam B v (B the Galerkin matrix
    # of multiplication by w) and the reduced operator agree up to Galerkin
    # truncation error; measured 2.9e-7 at M = 4 and 5.1e-9 at M = 6
    scipy_linalg = pytest.importorskip("scipy.linalg")
    w = TrigPoly.const(1.0) + TrigPoly.cosine((1, 0, 0), 0.5)
    op = operator_from_symbol(pauli_symbol())
    M = 4
    trunc = Truncation(M)
    red = weighted_reduce(op, w, degree_cap=2 * M)
    reduced_spec = eigensolve(assemble(red, trunc), trunc).eigenvalues

    a = assemble(op, trunc)
    mult_op = Operator1st(
        P=(MatrixField.zero(), MatrixField.zero(), MatrixField.zero()),
        Q0=MatrixField([[w, TrigPoly.zero()], [TrigPoly.zero(), w]]),
    )
    b = assemble(mult_op, trunc)
    gen = np.sort(scipy_linalg.eigh(a, 0.5 * (b + b.conj().T), eigvals_only=True))
    trust = trust_radius_for(red, M)
    sel = gen[np.abs(gen) <= 0.95 * trust]
    nearest = np.abs(sel[:, None] - reduced_spec[None, :]).min(axis=1)
    assert nearest.max() < 1e-6


def test_weighted_reduction_matches_generalized_at_m6():
    # the spectra coincide in the continuum; at M = 6 the two discretizations
    # agree below 1e-8 inside the trust window (checked on the decoupled
    # 1D blocks, which reproduce the dense matrices exactly)
    w = TrigPoly.const(1.0) + TrigPoly.cosine((1, 0, 0), 0.5)
    op = operator_from_symbol(pauli_symbol())
    M = 6
    red = weighted_reduce(op, w, degree_cap=2 * M)
    red_spec = block_spectrum_1d(red, M)
    gen_spec = generalized_block_spectrum_1d(op, w, M)
    trust = trust_radius_for(red, M)
    sel = gen_spec[np.abs(gen_spec) <= 0.95 * trust]
    nearest = np.abs(sel[:, None] - red_spec[None, :]).min(axis=1)
    assert nearest.max() < 1e-8


def test_weighted_self_convergence_m6_vs_m8():
    # dense assembly is validated against the decoupled 1D blocks at M = 4,
    # then the M = 6 vs M = 8 convergence claim is checked on the block route
    w = TrigPoly.const(1.0) + TrigPoly.cosine((1, 0, 0), 0.5)
    op = operator_from_symbol(pauli_symbol())

    red4 = weighted_reduce(op, w, degree_cap=8)
    trunc4 = Truncation(4)
    dense4 = eigensolve(assemble(red4, trunc4), trunc4).eigenvalues
    block4 = block_spectrum_1d(red4, 4)
    assert np.abs(dense4 - block4).max() < 1e-10

    red6 = weighted_reduce(op, w, degree_cap=12)
    red8 = weighted_reduce(op, w, degree_cap=16)
    b6 = block_spectrum_1d(red6, 6)
    b8 = block_spectrum_1d(red8, 8)
    trust6 = trust_radius_for(red6, 6)
    sel = b6[np.abs(b6) <= 0.95 * trust6]
    nearest = np.abs(sel[:, None] - b8[None, :]).min(axis=1)
    assert nearest.max() < 1e-6


def test_galerkin_convergence_of_winding_operator():
    # trusted eigenvalues move by < 1e-6 when the cutoff is raised by 2
    op = operator_from_symbol(winding_symbol(2))
    t3, t5 = Truncation(3), Truncation(5)
    s3 = eigensolve(assemble(op, t3), t3).eigenvalues
    s5 = eigensolve(assemble(op, t5), t5).eigenvalues
    trust = trust_radius_for(op, 3)
    sel = s3[np.abs(s3) <= 0.95 * trust]
    nearest = np.abs(sel[:, None] - s5[None, :]).min(axis=1)
    assert nearest.max() < 1e-6


# -- counting --------------------------------------------------------------------


def test_counting_strict_inequalities():
    eigs = np.array([-1.0, 0.0, 0.5, 0.5, 1.0, 2.0])
    table = counting_function(eigs, [0.5, 0.75, 1.5, 2.5])
    assert list(table.counts) == [0, 2, 3, 4]


def test_counting_solvable_values():
    table = exact_example_counting([0.5, 1.5, 2.5])
    assert list(table.counts) == [0, 2, 20]
    spectrum_based = counting_function(exact_example_spectrum(5.0), [0.5, 1.5, 2.5])
    assert list(spectrum_based.counts) == [0, 2, 20]


def test_counting_is_monotone():
    lams = midpoint_lambda_grid(30.0)
    table = exact_example_counting(lams)
    assert (np.diff(table.counts) >= 0).all()


def test_counting_flags_outside_trust_window():
    op = operator_from_symbol(winding_symbol(2))
    trunc = Truncation(2)
    spec = eigensolve(assemble(op, trunc), trunc, trust_radius=trust_radius_for(op, 2))
    with pytest.warns(OutsideTrustWindow):
        table = counting_function(spec, [0.5, 5.0])
    assert table.trusted.tolist() == [True, False]


# -- exact spectrum and lattice counts ----------------------------------------------


def test_exact_spectrum_near_zero():
    # within [-1/2, 1/2]: the zeros 1 - |m| from the six unit vectors plus
    # 1 - sqrt(2) from the twelve norm-sqrt(2) vectors (oracle: enumeration)
    eigs = exact_example_spectrum(0.5)
    assert int((np.abs(eigs) < 1e-12).sum()) == 6
    assert int((np.abs(eigs - (1 - np.sqrt(2))) < 1e-12).sum()) == 12
    assert len(eigs) == 18


def test_exact_spectrum_includes_multiplicity_two_at_one():
    # within [-1.1, 1.1]: 1 (x2), 0 (x6), and otherwise only 1 - |m| values
    eigs = exact_example_spectrum(1.1)
    assert int((np.abs(eigs - 1.0) < 1e-12).sum()) == 2
    assert int((np.abs(eigs) < 1e-12).sum()) == 6
    others = eigs[(np.abs(eigs - 1.0) > 1e-12) & (np.abs(eigs) > 1e-12)]
    expected = {1 - np.sqrt(2.0): 12, 1 - np.sqrt(3.0): 8, -1.0: 6}
    assert len(others) == sum(expected.values())
    for value, mult in expected.items():
        assert int((np.abs(others - value) < 1e-12).sum()) == mult


def test_exact_spectrum_against_galerkin():
    op = operator_from_symbol(winding_symbol(2))
    trunc = Truncation(4)
    trust = trust_radius_for(op, 4)
    spec = eigensolve(assemble(op, trunc), trunc, trust_radius=trust)
    # all exact values (with their multiplicities) for |m_alpha| <= 2 appear
    exact = exact_example_spectrum(trust)
    clusters = match_clusters(exact, spec.eigenvalues, 1e-8)
    assert all(got >= mult for _, mult, got in clusters)


def test_lattice_count_examples():
    assert lattice_count(0.5) == 1
    assert lattice_count(1.5) == brute_lattice_count(1.5) == 19
    assert lattice_count(2.5) == brute_lattice_count(2.5) == 81


def test_lattice_counts_match_brute_force(rng):
    rs = rng.uniform(0.0, 12.0, size=12)
    counts = lattice_counts(rs)
    for r, c in zip(rs, counts):
        assert c == brute_lattice_count(r)


def test_lattice_count_boundary_points_excluded():
    # strict inequality at radii whose square is exactly representable:
    # the boundary shell is excluded
    assert lattice_count(1.0) == 1
    assert lattice_count(2.0) == brute_lattice_count(2.0) == 27
    assert lattice_count(3.0) == brute_lattice_count(3.0) == 93


def test_counting_equals_lattice_shift():
    lams = midpoint_lambda_grid(40.0)
    table = exact_example_counting(lams)
    for lam, n in zip(table.lam, table.counts):
        if lam > 1:
            assert n == 1 + brute_lattice_count(lam - 1)


# -- asymptotics -------------------------------------------------------------------


@pytest.fixture(scope="module")
def counting_to_100():
    return exact_example_counting(midpoint_lambda_grid(100.0))


def test_asymptotic_compare_window_mean(counting_to_100):
    # frozen from two independent oracles (direct enumeration of the
    # eigenvalue multiset, and lattice-count histograms)
    rep = asymptotic_compare(counting_to_100, 4 * np.pi / 3, -4 * np.pi,
                             window=(80.0, 100.0), fit_window=(20.0, 100.0))
    assert rep["window_mean"] == pytest.approx(0.20609883037202686, abs=1e-9)


def test_asymptotic_compare_detects_missing_b(counting_to_100):
    rep = asymptotic_compare(counting_to_100, 4 * np.pi / 3, 0.0, window=(80.0, 100.0))
    # the mean shifts by almost exactly -b = 4 pi, demonstrating sensitivity
    assert rep["window_mean"] == pytest.approx(-4 * np.pi + 0.20609883, abs=1e-6)


def test_asymptotic_growth_exponent(counting_to_100):
    rep = asymptotic_compare(counting_to_100, 4 * np.pi / 3, -4 * np.pi,
                             window=(80.0, 100.0), fit_window=(20.0, 100.0))
    assert rep["growth_exponent"] == pytest.approx(1.0223692662752946, abs=1e-9)
    assert rep["growth_exponent"] <= 1.6


def test_asymptotic_compare_rejects_nonmonotone():
    bad = CountingTable(
        lam=np.array([1.0, 2.0]), counts=np.array([3, 1]),
        trusted=np.array([True, True]), provenance="exact_example",
    )
    with pytest.raises(ValueError):
        asymptotic_compare(bad, 1.0, 1.0)
