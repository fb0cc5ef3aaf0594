"""Symbol calculus for 2x2 first-order operators on the 3-torus.

A symbol here is the triple of trace-free Hermitian coefficient matrices
multiplying the momentum components.  From it we derive the metric (by
polarization), an orthonormal frame, the orientation charge, and the operator
itself in coefficient form, together with the subprincipal-symbol calculus.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ChargeInconsistent, EllipticityError
from .fields import PAULI_S, MatrixField, TrigPoly

DEFAULT_GRID = 32
TOL_ELLIP = 1e-8
TOL_INV = 1e-9
TOL_FRAME = 1e-9
TOL_CHARGE = 1e-6


class PrincipalSymbol:
    """Triple of pointwise Hermitian, trace-free 2x2 coefficient fields."""

    __slots__ = ("components",)

    def __init__(self, components, check: bool = True, tol: float = 1e-10):
        self.components = tuple(components)
        if len(self.components) != 3:
            raise ValueError("a symbol needs exactly three coefficient matrices")
        if check:
            for a, comp in enumerate(self.components):
                if not comp.is_hermitian(tol):
                    raise ValueError("coefficient matrix %d is not pointwise Hermitian" % (a + 1))
                if not comp.is_trace_free(tol):
                    raise ValueError("coefficient matrix %d is not trace-free" % (a + 1))

    @property
    def max_degree(self) -> int:
        return max(c.max_degree for c in self.components)

    def evaluate(self, n: int) -> np.ndarray:
        """Grid values of shape (n, n, n, 3, 2, 2)."""
        out = np.empty((n, n, n, 3, 2, 2), dtype=complex)
        for a in range(3):
            out[..., a, :, :] = self.components[a].evaluate(n)
        return out

    def at_momentum(self, p) -> MatrixField:
        """Contraction with a fixed covector p."""
        out = self.components[0] * p[0]
        out = out + self.components[1] * p[1]
        out = out + self.components[2] * p[2]
        return out

    def scaled(self, factor) -> "PrincipalSymbol":
        """Multiply every coefficient matrix by a constant or TrigPoly factor."""
        return PrincipalSymbol([c * factor for c in self.components], check=False)

    def reflect(self) -> "PrincipalSymbol":
        """Pull back under coordinate inversion x -> -x.

        Both the position dependence and the momentum flip sign, so the
        coefficient matrices transform as c_k -> -c_{-k}.
        """
        return PrincipalSymbol([-(c.reflect()) for c in self.components], check=False)

    def allclose(self, other: "PrincipalSymbol", tol: float = 1e-12) -> bool:
        return all(a.allclose(b, tol) for a, b in zip(self.components, other.components))


class Metric:
    """Contravariant 3x3 metric field with cached grid data.

    The exact object is the symmetric TrigPoly matrix g^{ab}; covariant
    components, determinants and eigenvalue bounds are pointwise quantities
    cached per grid size.
    """

    def __init__(self, contravariant):
        self.contravariant = contravariant  # 3x3 nested list of TrigPoly
        self._cache: dict[int, dict] = {}

    @classmethod
    def flat(cls) -> "Metric":
        return cls(
            [[TrigPoly.const(1.0 if a == b else 0.0) for b in range(3)] for a in range(3)]
        )

    @classmethod
    def from_covariant_grid(cls, g_down: np.ndarray, drop_tol: float = 1e-13) -> "Metric":
        """Build from covariant grid values (n,n,n,3,3) by pointwise inversion.

        The contravariant entries are re-expanded as coefficients capped
        strictly below the Nyquist frequency of the input grid, so for
        non-polynomial metrics this carries the usual spectral truncation.
        """
        g_up = np.linalg.inv(g_down)
        cap = (g_down.shape[0] - 1) // 2
        entries = [
            [
                TrigPoly.from_grid(g_up[..., a, b], drop_tol).cap_degree(cap)[0]
                for b in range(3)
            ]
            for a in range(3)
        ]
        return cls(entries)

    def _grids(self, n: int) -> dict:
        if n not in self._cache:
            up = np.empty((n, n, n, 3, 3), dtype=float)
            for a in range(3):
                for b in range(3):
                    vals = self.contravariant[a][b].evaluate(n)
                    up[..., a, b] = vals.real
            eig = np.linalg.eigvalsh(up)
            self._cache[n] = {"up": up, "min_eig_up": eig[..., 0].min()}
        return self._cache[n]

    def _down_grids(self, n: int) -> dict:
        cache = self._grids(n)
        if "down" not in cache:
            if cache["min_eig_up"] <= 0.0:
                raise EllipticityError(
                    "metric is degenerate on the grid (min eigenvalue %.3e)"
                    % cache["min_eig_up"]
                )
            down = np.linalg.inv(cache["up"])
            det_down = np.linalg.det(down)
            cache["down"] = down
            cache["det_down"] = det_down
            cache["sqrt_det_down"] = np.sqrt(np.abs(det_down))
        return cache

    def contravariant_grid(self, n: int) -> np.ndarray:
        return self._grids(n)["up"]

    def covariant_grid(self, n: int) -> np.ndarray:
        return self._down_grids(n)["down"]

    def sqrt_det_covariant_grid(self, n: int) -> np.ndarray:
        return self._down_grids(n)["sqrt_det_down"]

    def min_eigenvalue(self, n: int) -> float:
        return float(self._grids(n)["min_eig_up"])

    def inverse_residual(self, n: int) -> float:
        """max |g_{ab} g^{bc} - delta| over the grid (consistency check)."""
        g = self._down_grids(n)
        prod = np.einsum("...ab,...bc->...ac", g["down"], g["up"])
        return float(np.abs(prod - np.eye(3)).max())

    def allclose(self, other: "Metric", tol: float = 1e-12) -> bool:
        scale = max(
            max(p.coeff_scale for row in self.contravariant for p in row),
            max(p.coeff_scale for row in other.contravariant for p in row),
            1.0,
        )
        for a in range(3):
            for b in range(3):
                d = self.contravariant[a][b] - other.contravariant[a][b]
                if d.coeff_scale > tol * scale:
                    return False
        return True


class Frame:
    """Triple of real vector fields e_j, stored as TrigPoly components [j][alpha]."""

    __slots__ = ("vectors",)

    def __init__(self, vectors):
        self.vectors = [[v if isinstance(v, TrigPoly) else TrigPoly.const(v) for v in row] for row in vectors]

    @classmethod
    def identity(cls) -> "Frame":
        return cls([[1.0 if j == a else 0.0 for a in range(3)] for j in range(3)])

    def evaluate(self, n: int) -> np.ndarray:
        """Grid values of shape (n, n, n, 3, 3), indexed [..., j, alpha]."""
        out = np.empty((n, n, n, 3, 3), dtype=float)
        for j in range(3):
            for a in range(3):
                out[..., j, a] = self.vectors[j][a].evaluate(n).real
        return out

    def det_grid(self, n: int) -> np.ndarray:
        return np.linalg.det(self.evaluate(n))

    def scaled(self, factor) -> "Frame":
        return Frame([[v * factor for v in row] for row in self.vectors])

    def rotated(self, o: np.ndarray) -> "Frame":
        """Compose with a constant matrix: e_j -> o_j^k e_k."""
        return Frame(
            [
                [sum((o[j, k] * self.vectors[k][a] for k in range(3)), TrigPoly.zero()) for a in range(3)]
                for j in range(3)
            ]
        )

    def reflect(self) -> "Frame":
        """Pull back under x -> -x (vector components flip sign)."""
        return Frame([[-(v.reflect()) for v in row] for row in self.vectors])

    def orthonormality_residual(self, metric: Metric, n: int) -> float:
        """max |g^{ab} - delta^{jk} e_j^a e_k^b| over the grid."""
        e = self.evaluate(n)
        g = metric.contravariant_grid(n)
        rec = np.einsum("...ja,...jb->...ab", e, e)
        return float(np.abs(rec - g).max())


@dataclass(frozen=True)
class CoframeField:
    """Covector triple e^j_a on a grid, metric-dual to a frame."""

    values: np.ndarray  # (n, n, n, 3, 3), indexed [..., j, alpha]
    grid_size: int


@dataclass(frozen=True)
class Operator1st:
    """First-order operator P^a d/dx^a + Q0 in coefficient form.

    trunc_error records the l1 coefficient mass dropped by any re-expansion
    that produced this operator (zero for exact constructions).
    """

    P: tuple[MatrixField, MatrixField, MatrixField]
    Q0: MatrixField
    trunc_error: float = 0.0

    @property
    def max_degree(self) -> int:
        return max(max(p.max_degree for p in self.P), self.Q0.max_degree)

    @property
    def coeff_scale(self) -> float:
        return max(max(p.coeff_scale for p in self.P), self.Q0.coeff_scale)

    def principal_symbol(self) -> PrincipalSymbol:
        """Recover the coefficient matrices of the momentum part (i P^a)."""
        return PrincipalSymbol([p * 1j for p in self.P], check=False)


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def metric_from_symbol(sym: PrincipalSymbol) -> Metric:
    """Contravariant metric by polarization: g^{ab} = tr(L^a L^b) / 2.

    For trace-free Hermitian 2x2 matrices this is equivalent to reading the
    quadratic form off det(L(x,p)) = -g^{ab} p_a p_b; positive definiteness
    is checked separately by ellipticity_check.
    """
    entries = [[None] * 3 for _ in range(3)]
    for a in range(3):
        for b in range(a, 3):
            prod = sym.components[a] @ sym.components[b]
            g = (0.5 * prod.trace()).real_part().prune(1e-300)
            entries[a][b] = g
            entries[b][a] = g
    return Metric(entries)


def ellipticity_check(sym: PrincipalSymbol, grid_size: int = DEFAULT_GRID, tol_ellip: float = TOL_ELLIP) -> bool:
    """True iff the induced metric is uniformly positive definite on the grid."""
    metric = metric_from_symbol(sym)
    n = max(grid_size, 2 * metric_degree(metric) + 1)
    return metric.min_eigenvalue(n) > tol_ellip


def metric_degree(metric: Metric) -> int:
    return max(p.max_degree for row in metric.contravariant for p in row)


def frame_from_symbol(sym: PrincipalSymbol) -> Frame:
    """Read the orthonormal frame off the symbol's matrix entries.

    e_1^a = Re (L^a)_{12},  e_2^a = -Im (L^a)_{12},  e_3^a = Re (L^a)_{11},
    all exact in coefficient space (row 1, column 2 convention).
    """
    e = [[None] * 3 for _ in range(3)]
    for a in range(3):
        top = sym.components[a][0, 1]
        e[0][a] = top.real_part()
        e[1][a] = -top.imag_part()
        e[2][a] = sym.components[a][0, 0].real_part()
    return Frame(e)


def symbol_from_frame(frame: Frame) -> PrincipalSymbol:
    """Inverse of frame extraction: L^a = e_1^a s1 + e_2^a s2 + e_3^a s3."""
    comps = []
    for a in range(3):
        m = MatrixField.zero()
        for j in range(3):
            m = m + MatrixField.const(PAULI_S[j]) * frame.vectors[j][a]
        comps.append(m.prune(1e-300))
    return PrincipalSymbol(comps, check=False)


def coframe(metric: Metric, frame: Frame, grid_size: int = DEFAULT_GRID) -> CoframeField:
    """Metric-dual covector triple e^j_a = delta^{jk} g_{ab} e_k^b (grid values)."""
    e = frame.evaluate(grid_size)
    g_down = metric.covariant_grid(grid_size)
    values = np.einsum("...ab,...jb->...ja", g_down, e)
    return CoframeField(values=values, grid_size=grid_size)


def topological_charge(
    sym: PrincipalSymbol,
    grid_size: int = DEFAULT_GRID,
    tol_charge: float = TOL_CHARGE,
) -> int:
    """Orientation of the symbol relative to the coordinates, +1 or -1.

    Evaluates the analytic trace formula
    -(i/2) sqrt(det g_{ab}) tr(L^1 L^2 L^3) on the grid and cross-checks it
    against sgn det e_j^a from the extracted frame; the two must agree at
    every point and sit within tol_charge of +/-1.
    """
    metric = metric_from_symbol(sym)
    n = max(grid_size, 2 * sym.max_degree + 1, 2 * metric_degree(metric) + 1)
    det = frame_from_symbol(sym).det_grid(n)
    if np.abs(det).min() < tol_charge:
        raise ChargeInconsistent("frame determinant vanishes on the grid")
    sign = np.sign(det)
    if not (sign == sign.flat[0]).all():
        raise ChargeInconsistent("frame determinant changes sign on the grid")

    s = sym.evaluate(n)
    prod = s[..., 0, :, :] @ s[..., 1, :, :] @ s[..., 2, :, :]
    tr = prod[..., 0, 0] + prod[..., 1, 1]
    analytic = (-0.5j) * metric.sqrt_det_covariant_grid(n) * tr
    if np.abs(analytic.imag).max() > tol_charge:
        raise ChargeInconsistent("trace formula is not real on the grid")
    analytic = analytic.real

    c = float(sign.flat[0])
    if np.abs(analytic - c).max() > tol_charge:
        raise ChargeInconsistent(
            "trace formula disagrees with frame orientation (max dev %.3e)"
            % float(np.abs(analytic - c).max())
        )
    return int(c)


def operator_from_symbol(sym: PrincipalSymbol) -> Operator1st:
    """The unique operator with this momentum part and zero subprincipal symbol.

    P^a = -i L^a and Q0 = -(i/2) sum_a d_a L^a, with exact coefficient
    differentiation.
    """
    P = tuple((c * (-1j)) for c in sym.components)
    div = MatrixField.zero()
    for a in range(3):
        div = div + sym.components[a].derivative(a)
    return Operator1st(P=P, Q0=div * (-0.5j))


def subprincipal(op: Operator1st) -> MatrixField:
    """Invariant zero-order part: Q0 + (i/2) sum_a d_a (i P^a)."""
    out = op.Q0
    for a in range(3):
        out = out + (op.P[a].derivative(a)) * (0.5j * 1j)
    return out


def conjugate_operator(op: Operator1st, R: MatrixField) -> Operator1st:
    """Coefficients of R op R* via the product rule.

    P'^a = R P^a R*,  Q0' = R Q0 R* + R P^a (d_a R*).
    """
    Rs = R.adjoint()
    P = tuple((R @ op.P[a] @ Rs) for a in range(3))
    Q0 = R @ op.Q0 @ Rs
    for a in range(3):
        Q0 = Q0 + R @ op.P[a] @ Rs.derivative(a)
    return Operator1st(P=P, Q0=Q0, trunc_error=op.trunc_error)


def conjugation_subprincipal(ref_sym: PrincipalSymbol, R: MatrixField) -> MatrixField:
    """Closed form for the subprincipal symbol of R L R*.

    (i/2) (d_a R  L^a  R*  -  R  L^a  d_a R*), an independent code path used
    to cross-check conjugate_operator + subprincipal.
    """
    Rs = R.adjoint()
    out = MatrixField.zero()
    for a in range(3):
        la = ref_sym.components[a]
        out = out + R.derivative(a) @ la @ Rs - R @ la @ Rs.derivative(a)
    return out * 0.5j


def require_elliptic(
    sym: PrincipalSymbol, grid_size: int = DEFAULT_GRID, tol_ellip: float = TOL_ELLIP
) -> Metric:
    """Metric of an elliptic symbol, raising EllipticityError otherwise."""
    metric = metric_from_symbol(sym)
    n = max(grid_size, 2 * metric_degree(metric) + 1)
    lo = metric.min_eigenvalue(n)
    if not lo > tol_ellip:
        raise EllipticityError(
            "metric eigenvalue %.3e below ellipticity tolerance %.1e" % (lo, tol_ellip)
        )
    return metric
