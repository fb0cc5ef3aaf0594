"""Built-in symbols, gauges and randomized families used by tests and the CLI."""

from __future__ import annotations

import numpy as np

from .fields import PAULI_S, MatrixField, TrigPoly
from .symbols import Frame, PrincipalSymbol, frame_from_symbol, symbol_from_frame


def pauli_symbol(scale: float = 1.0) -> PrincipalSymbol:
    """The constant flat-space symbol (components s1, s2, s3)."""
    return PrincipalSymbol([MatrixField.const(s * scale) for s in PAULI_S], check=False)


def winding_symbol(turns: int = 2) -> PrincipalSymbol:
    """Flat-metric symbol whose frame winds `turns` times about axis 3.

    Component matrices
        L^1 = [[0, E], [conj(E), 0]],  L^2 = [[0, -iE], [i conj(E), 0]],
        L^3 = s3,   with E = exp(i * turns * x3).

    turns = 2 is the exactly solvable case (spectrum {1 x2} U {1 +/- |m|});
    turns = 1 has no continuous SU(2) lift against the constant symbol.
    """
    e = TrigPoly.wave((0, 0, turns))
    ec = e.conjugate()
    z = TrigPoly.zero()
    l1 = MatrixField([[z, e], [ec, z]])
    l2 = MatrixField([[z, e * (-1j)], [ec * 1j, z]])
    l3 = MatrixField.const(PAULI_S[2])
    return PrincipalSymbol([l1, l2, l3], check=False)


def winding_gauge(turns: int = 1) -> MatrixField:
    """Diagonal SU(2) field diag(exp(i*turns*x3), exp(-i*turns*x3))."""
    e = TrigPoly.wave((0, 0, turns))
    z = TrigPoly.zero()
    return MatrixField([[e, z], [z, e.conjugate()]])


def charge_flipped(sym: PrincipalSymbol) -> PrincipalSymbol:
    """Same metric, opposite orientation: the second frame vector is negated."""
    frame = frame_from_symbol(sym)
    flipped = Frame([frame.vectors[0], [-v for v in frame.vectors[1]], frame.vectors[2]])
    return symbol_from_frame(flipped)


def su2_field_from_angle(direction, axis, phase: float = 0.0) -> MatrixField:
    """SU(2)-valued field cos(d.x + phase) I - i sin(d.x + phase) (axis . s).

    direction is an integer 3-vector, axis a real unit 3-vector; entries are
    exact degree-|d| trig polynomials.
    """
    direction = tuple(int(v) for v in direction)
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    c = TrigPoly.cosine(direction, 1.0, phase)
    s = TrigPoly.cosine(direction, 1.0, phase - 0.5 * np.pi)  # sin(d.x + phase)
    out = MatrixField.const(np.eye(2)) * c
    for j in range(3):
        out = out + MatrixField.const(PAULI_S[j]) * (s * (-1j * axis[j]))
    return out.prune(1e-300)


def random_su2_gauge(rng: np.random.Generator, max_wind: int = 1) -> MatrixField:
    """Random smooth SU(2) field with trig-poly entries of degree <= 3*max_wind."""
    direction = rng.integers(-max_wind, max_wind + 1, size=3)
    axis = rng.standard_normal(3)
    while np.linalg.norm(axis) < 1e-3:
        axis = rng.standard_normal(3)
    phase = rng.uniform(0.0, 2.0 * np.pi)
    return su2_field_from_angle(direction, axis, phase)


def random_gauged_symbol(rng: np.random.Generator, max_wind: int = 1) -> tuple[PrincipalSymbol, MatrixField]:
    """Random flat-metric, charge +1 symbol R s^a R* with its gauge field R.

    The returned symbol has trig-poly degree <= 2*max_wind (per axis |d| <= 1
    when max_wind = 1), exactly Euclidean metric, and by construction shares
    its spin structure with the constant symbol.
    """
    R = random_su2_gauge(rng, max_wind)
    Rs = R.adjoint()
    comps = [(R @ MatrixField.const(PAULI_S[a]) @ Rs).prune(1e-15) for a in range(3)]
    return PrincipalSymbol(comps, check=False), R


def random_frame_symbol(rng: np.random.Generator, amplitude: float = 0.25) -> PrincipalSymbol:
    """Random curved-metric, charge +1 symbol from a perturbed-identity frame.

    Frame rows e_j^a = delta_j^a + perturbation with degree <= 1 trig-poly
    entries; for small amplitude the frame determinant stays positive and the
    symbol is elliptic with metric g^{ab} = sum_j e_j^a e_j^b.
    """
    rows = []
    for j in range(3):
        row = []
        for a in range(3):
            p = TrigPoly.const(1.0 if j == a else 0.0)
            for axis in range(3):
                k = [0, 0, 0]
                k[axis] = 1
                p = p + TrigPoly.cosine(tuple(k), rng.uniform(-amplitude, amplitude) / 3.0,
                                        rng.uniform(0.0, 2.0 * np.pi))
            row.append(p.prune(1e-300))
        rows.append(row)
    return symbol_from_frame(Frame(rows))


def random_weight(rng: np.random.Generator, amplitude: float = 0.3, degree: int = 2) -> TrigPoly:
    """Random real positive trig-poly weight 1 + (bounded perturbation)."""
    w = TrigPoly.const(1.0)
    modes = [
        (1, 0, 0), (0, 1, 0), (0, 0, 1),
        (1, 1, 0), (0, 1, 1), (1, 0, 1),
    ]
    for k in modes:
        if max(abs(v) for v in k) <= degree:
            w = w + TrigPoly.cosine(k, rng.uniform(-amplitude, amplitude) / len(modes),
                                    rng.uniform(0.0, 2.0 * np.pi))
    return w.prune(1e-300)


def random_scalar(rng: np.random.Generator, amplitude: float = 0.3, degree: int = 2) -> TrigPoly:
    """Random real trig-poly with |coefficient mass| <= amplitude, degree <= degree."""
    out = TrigPoly.zero()
    modes = [(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, -1, 0), (0, 1, 1)]
    for k in modes:
        if max(abs(v) for v in k) <= degree:
            out = out + TrigPoly.cosine(k, rng.uniform(-amplitude, amplitude) / len(modes),
                                        rng.uniform(0.0, 2.0 * np.pi))
    return out.prune(1e-300)


def random_special_unitary(rng: np.random.Generator) -> np.ndarray:
    """Random constant SU(2) matrix (Haar via normalized quaternion)."""
    q = rng.standard_normal(4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array(
        [[w - 1j * z, -1j * x - y], [-1j * x + y, w + 1j * z]], dtype=complex
    )
