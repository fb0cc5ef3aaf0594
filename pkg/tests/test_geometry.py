import numpy as np
import pytest

from spinspec.catalog import (
    pauli_symbol,
    random_frame_symbol,
    random_gauged_symbol,
    random_scalar,
    random_special_unitary,
    random_weight,
    winding_symbol,
)
from spinspec.fields import TrigPoly, grid_mesh
from spinspec.gauge import (
    SpinorField,
    conformal_transform,
    lift_between_symbols,
    rigid_rotation,
    spinor_from_su2,
)
from spinspec.geometry import (
    PauliField,
    axial_torsion,
    christoffel,
    christoffel_compatibility_residual,
    coeff_a,
    coeff_b_action,
    coeff_b_torsion,
    dirac_action,
    torsion_spinor_identity_residual,
    weyl_apply,
)
from spinspec.symbols import (
    Frame,
    Metric,
    frame_from_symbol,
    metric_from_symbol,
    topological_charge,
)

TWO_PI_CUBED = (2 * np.pi) ** 3


def constant_spinor(n, w=1.0):
    vals = np.zeros((n, n, n, 2), dtype=complex)
    vals[..., 0] = w
    return SpinorField(vals, n)


def finite_difference_derivative(values, axis, order=4):
    n = values.shape[axis]
    h = 2 * np.pi / n
    if order == 4:
        return (
            -np.roll(values, -2, axis) + 8 * np.roll(values, -1, axis)
            - 8 * np.roll(values, 1, axis) + np.roll(values, 2, axis)
        ) / (12 * h)
    return (np.roll(values, -1, axis) - np.roll(values, 1, axis)) / (2 * h)


# -- Pauli field ----------------------------------------------------------------


def test_pauli_relation_for_random_elliptic_symbols(rng):
    for make in (lambda: random_gauged_symbol(rng)[0], lambda: random_frame_symbol(rng)):
        sym = make()
        met = metric_from_symbol(sym)
        pl = PauliField.from_symbol(sym, met, 24)
        assert pl.anticommutator_residual(met) < 1e-10


# -- Christoffel -----------------------------------------------------------------


def test_christoffel_flat_is_zero():
    gam = christoffel(Metric.flat(), 8)
    assert np.abs(gam).max() < 1e-14


def test_christoffel_single_covariant_perturbation():
    # covariant metric diag(1 + cos(x1)/2, 1, 1): the only nonzero component
    # is Gamma^1_11 = -sin(x1)/4 / (1 + cos(x1)/2); finite differences oracle
    n = 48
    x1 = grid_mesh(n)[0]
    g_down = np.zeros((n, n, n, 3, 3))
    g_down[..., 0, 0] = 1 + 0.5 * np.cos(x1)
    g_down[..., 1, 1] = 1.0
    g_down[..., 2, 2] = 1.0
    met = Metric.from_covariant_grid(g_down)
    gam = christoffel(met, n)
    expect = -0.25 * np.sin(x1) / (1 + 0.5 * np.cos(x1))
    assert np.abs(gam[..., 0, 0, 0] - expect).max() < 1e-10
    rest = gam.copy()
    rest[..., 0, 0, 0] = 0.0
    assert np.abs(rest).max() < 1e-10
    fd = finite_difference_derivative(g_down[..., 0, 0], 0)
    gamma_fd = 0.5 * fd / g_down[..., 0, 0]
    assert np.abs(gam[..., 0, 0, 0] - gamma_fd).max() < 1e-5


def test_christoffel_conformally_flat_closed_form(rng):
    n = 32
    phi = random_scalar(rng, amplitude=0.3, degree=1)
    factor = np.exp(-2 * phi.evaluate(n).real)
    g_up = factor[..., None, None] * np.eye(3)
    met = Metric.from_covariant_grid(np.linalg.inv(g_up))
    gam = christoffel(met, n)
    dphi = [phi.derivative(a).evaluate(n).real for a in range(3)]
    expect = np.zeros((n, n, n, 3, 3, 3))
    for b in range(3):
        for a in range(3):
            for g in range(3):
                if b == a:
                    expect[..., b, a, g] += dphi[g]
                if b == g:
                    expect[..., b, a, g] += dphi[a]
                if a == g:
                    expect[..., b, a, g] -= dphi[b]
    assert np.abs(gam - expect).max() < 1e-9
    assert christoffel_compatibility_residual(met, gam) < 1e-8
    assert np.abs(gam - gam.swapaxes(-1, -2)).max() < 1e-12


# -- Weyl operator ----------------------------------------------------------------


def test_weyl_kills_constant_spinor_in_flat_space():
    n = 16
    met = Metric.flat()
    pl = PauliField.from_symbol(pauli_symbol(), met, n)
    assert np.abs(weyl_apply(pl, met, constant_spinor(n))).max() < 1e-14


def test_weyl_on_phase_spinor_matches_hand_computation():
    n = 16
    met = Metric.flat()
    pl = PauliField.from_symbol(pauli_symbol(), met, n)
    _, _, x3 = grid_mesh(n)
    xi = SpinorField(
        np.stack([np.exp(-1j * x3), np.zeros_like(x3, dtype=complex)], axis=-1), n
    )
    wxi = weyl_apply(pl, met, xi)
    target = np.stack([-np.exp(-1j * x3), np.zeros_like(x3, dtype=complex)], axis=-1)
    assert np.abs(wxi - target).max() < 1e-13


def test_weyl_conformal_covariance(rng):
    # after scaling metric, reference and spinor, W xi picks up e^{-2 phi}
    n = 48
    sym, _ = random_gauged_symbol(rng)
    phi = random_scalar(rng, amplitude=0.3, degree=2)
    met = metric_from_symbol(sym)
    pl = PauliField.from_symbol(pauli_symbol(), met, n)
    xi = spinor_from_su2(lift_between_symbols(sym, pauli_symbol(), n), 1.0)
    before = weyl_apply(pl, met, xi)

    ref2, _ = conformal_transform(pauli_symbol(), TrigPoly.const(1.0), phi, n)
    sym2, _ = conformal_transform(sym, TrigPoly.const(1.0), phi, n)
    met2 = metric_from_symbol(sym2)
    pl2 = PauliField.from_symbol(ref2, met2, n)
    factor = np.exp(-phi.evaluate(n).real)
    xi2 = SpinorField(factor[..., None] * xi.values, n)
    after = weyl_apply(pl2, met2, xi2)
    assert np.abs(after - factor[..., None] ** 2 * before).max() < 1e-7


def test_spectral_fields_match_fourth_order_differences(rng):
    n = 48
    sym = random_frame_symbol(rng)
    met = metric_from_symbol(sym)
    g_down = met.covariant_grid(n)
    from spinspec.fields import spectral_derivative

    h = 2 * np.pi / n
    d5 = g_down
    for _ in range(5):
        d5 = spectral_derivative(d5, 0).real
    bound = (h**4 / 30) * np.abs(d5).max() * 1.1 + 1e-12
    fd = finite_difference_derivative(g_down, 0)
    sp = spectral_derivative(g_down, 0).real
    assert np.abs(fd - sp).max() <= bound


# -- action -----------------------------------------------------------------------


def test_action_of_constant_spinor_vanishes():
    n = 16
    met = Metric.flat()
    pl = PauliField.from_symbol(pauli_symbol(), met, n)
    assert abs(dirac_action(pl, met, constant_spinor(n))) < 1e-12


def test_action_of_solvable_case(solvable_analysis):
    assert solvable_analysis.action == pytest.approx(-TWO_PI_CUBED, rel=1e-12)


def test_action_invariant_under_charge_conjugation(solvable_analysis):
    from spinspec.gauge import charge_conjugate

    res = solvable_analysis
    s_conj = dirac_action(res.pauli, res.metric, charge_conjugate(res.spinor))
    assert abs(s_conj - res.action) < 1e-10


# -- torsion -----------------------------------------------------------------------


def test_torsion_of_identity_frame_vanishes():
    t = axial_torsion(Frame.identity(), Metric.flat(), 8)
    assert np.abs(t).max() < 1e-14


def test_torsion_of_winding_frame_is_constant():
    t = axial_torsion(frame_from_symbol(winding_symbol(2)), Metric.flat(), 16)
    assert np.abs(t + 4.0 / 3.0).max() < 1e-12


def test_torsion_invariant_under_constant_rotation(rng):
    # constant orthogonal mixing of the frame vectors leaves the scalar alone
    n = 24
    sym = random_frame_symbol(rng)
    met = metric_from_symbol(sym)
    fr = frame_from_symbol(sym)
    base = axial_torsion(fr, met, n)
    q = np.linalg.qr(rng.standard_normal((3, 3)))[0]
    if np.linalg.det(q) < 0:
        q[:, 0] *= -1
    rotated = fr.rotated(q)
    assert np.abs(axial_torsion(rotated, met, n) - base).max() < 1e-9


def test_torsion_spinor_identity_on_solvable_case(solvable_analysis):
    res = solvable_analysis
    resid = torsion_spinor_identity_residual(res.frame, res.metric, res.spinor, res.pauli)
    assert np.abs(resid).max() < 1e-8


def test_torsion_spinor_identity_trivial_case():
    n = 16
    met = Metric.flat()
    pl = PauliField.from_symbol(pauli_symbol(), met, n)
    resid = torsion_spinor_identity_residual(Frame.identity(), met, constant_spinor(n), pl)
    assert np.abs(resid).max() < 1e-13


def test_torsion_spinor_identity_random_family(rng):
    n = 48
    for _ in range(3):
        sym, _ = random_gauged_symbol(rng)
        met = metric_from_symbol(sym)
        w = random_weight(rng)
        xi = spinor_from_su2(lift_between_symbols(sym, pauli_symbol(), n), w.evaluate(n).real)
        pl = PauliField.from_symbol(pauli_symbol(), met, n)
        resid = torsion_spinor_identity_residual(frame_from_symbol(sym), met, xi, pl)
        assert np.abs(resid).max() < 1e-6


# -- counting coefficients -----------------------------------------------------------


def test_coeff_a_solvable_case(solvable_analysis):
    assert solvable_analysis.coeff_a == pytest.approx(4 * np.pi / 3, rel=1e-12)


def test_coeff_a_constant_weight():
    n = 16
    xi = constant_spinor(n, w=2.0)
    assert coeff_a(xi, Metric.flat()) == pytest.approx(32 * np.pi / 3, rel=1e-12)


def test_coeff_a_conformal_invariance(rng):
    n = 32
    sym, _ = random_gauged_symbol(rng)
    w = random_weight(rng)
    met = metric_from_symbol(sym)
    xi = spinor_from_su2(lift_between_symbols(sym, pauli_symbol(), n), w.evaluate(n).real)
    a_before = coeff_a(xi, met)

    phi = random_scalar(rng, amplitude=0.3, degree=2)
    sym2, w2 = conformal_transform(sym, w, phi, n)
    met2 = metric_from_symbol(sym2)
    ref2, _ = conformal_transform(pauli_symbol(), TrigPoly.const(1.0), phi, n)
    xi2 = spinor_from_su2(lift_between_symbols(sym2, ref2, n), w2.evaluate(n).real)
    assert abs(coeff_a(xi2, met2) - a_before) < 1e-8


def test_coeff_b_action_solvable_case(solvable_analysis):
    assert solvable_analysis.coeff_b_action == pytest.approx(-4 * np.pi, rel=1e-12)


def test_coeff_b_action_constant_spinor_flat():
    n = 16
    met = Metric.flat()
    pl = PauliField.from_symbol(pauli_symbol(), met, n)
    assert abs(coeff_b_action(constant_spinor(n), pl, met)) < 1e-13


def test_coeff_b_torsion_solvable_case():
    fr = frame_from_symbol(winding_symbol(2))
    b = coeff_b_torsion(1.0, fr, Metric.flat(), +1, 16)
    assert b == pytest.approx(-4 * np.pi, rel=1e-12)


def test_coeff_b_torsion_identity_frame_zero():
    assert abs(coeff_b_torsion(1.0, Frame.identity(), Metric.flat(), +1, 8)) < 1e-13


def test_route_equality_random_families(rng):
    n = 48
    for _ in range(3):
        sym, _ = random_gauged_symbol(rng)
        met = metric_from_symbol(sym)
        w = random_weight(rng)
        xi = spinor_from_su2(lift_between_symbols(sym, pauli_symbol(), n), w.evaluate(n).real)
        pl = PauliField.from_symbol(pauli_symbol(), met, n)
        ba = coeff_b_action(xi, pl, met)
        bt = coeff_b_torsion(w, frame_from_symbol(sym), met, +1, n)
        assert abs(ba - bt) < 1e-7
    for _ in range(2):
        sym = random_frame_symbol(rng)
        met = metric_from_symbol(sym)
        w = random_weight(rng)
        xi = SpinorField(
            np.stack([w.evaluate(n).astype(complex), np.zeros((n, n, n), complex)], axis=-1), n
        )
        pl = PauliField.from_symbol(sym, met, n)
        ba = coeff_b_action(xi, pl, met)
        bt = coeff_b_torsion(w, frame_from_symbol(sym), met, +1, n)
        assert abs(ba - bt) < 1e-7


def test_momenta_conjugated_variant_keeps_b():
    # swapping the off-diagonal momentum combination flips the orientation
    # charge but leaves the spectrum (hence b) unchanged; with c = -1 the
    # torsion scalar flips to +4/3 and the two signs cancel
    fr = Frame(
        [
            [TrigPoly.cosine((0, 0, 2)), -TrigPoly.cosine((0, 0, 2), 1.0, -np.pi / 2), TrigPoly.zero()],
            [-TrigPoly.cosine((0, 0, 2), 1.0, -np.pi / 2), -TrigPoly.cosine((0, 0, 2)), TrigPoly.zero()],
            [TrigPoly.zero(), TrigPoly.zero(), TrigPoly.const(1.0)],
        ]
    )
    from spinspec.symbols import symbol_from_frame

    sym = symbol_from_frame(fr)
    assert topological_charge(sym) == -1
    met = metric_from_symbol(sym)
    t = axial_torsion(fr, met, 16)
    assert np.abs(t - 4.0 / 3.0).max() < 1e-12
    assert coeff_b_torsion(1.0, fr, met, -1, 16) == pytest.approx(-4 * np.pi, rel=1e-12)


def test_coordinate_inversion_reduction_for_negative_charge(rng):
    # charge -1 data: the torsion-route value with c = -1 equals the value
    # computed on inverted coordinates (where the charge is +1)
    n = 32
    sym = random_frame_symbol(rng)
    flipped = sym.reflect()
    assert topological_charge(flipped) == -1
    w = random_weight(rng)
    met = metric_from_symbol(flipped)
    b_direct = coeff_b_torsion(w, frame_from_symbol(flipped), met, -1, n)

    back = flipped.reflect()
    w_back = w.reflect()
    met_back = metric_from_symbol(back)
    b_inverted = coeff_b_torsion(w_back, frame_from_symbol(back), met_back, +1, n)
    assert abs(b_direct - b_inverted) < 1e-7


def test_rigid_rotation_preserves_action_density(rng):
    n = 32
    sym, _ = random_gauged_symbol(rng)
    met = metric_from_symbol(sym)
    xi = spinor_from_su2(lift_between_symbols(sym, pauli_symbol(), n), 1.0)
    pl = PauliField.from_symbol(pauli_symbol(), met, n)
    before = np.real(np.einsum("...i,...i->...", np.conj(xi.values), weyl_apply(pl, met, xi)))
    q = random_special_unitary(rng)
    xi2 = rigid_rotation(xi, q)
    after = np.real(np.einsum("...i,...i->...", np.conj(xi2.values), weyl_apply(pl, met, xi2)))
    assert np.abs(after - before).max() < 1e-9
