"""Relating a symbol to a reference: SO(3) field, SU(2) lift, spinor, gauges.

The lift is the numerically delicate part.  Pointwise we extract a unit
quaternion from each rotation matrix (largest-pivot branch of the trace
method), which determines the SU(2) value up to sign; the global sign is then
propagated by a breadth-first traversal of the periodic grid graph and checked
for consistency on every edge, every plaquette and the three fundamental
cycles of the torus.  An obstructed fundamental cycle means the two symbols
carry different spin structures.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    LiftIllConditioned,
    MetricMismatch,
    SpinStructureMismatch,
    VanishingSpinor,
)
from .fields import PAULI_S, MatrixField, TrigPoly
from .symbols import (
    DEFAULT_GRID,
    Frame,
    Metric,
    PrincipalSymbol,
    TOL_FRAME,
    frame_from_symbol,
    metric_from_symbol,
)

TOL_ORTH = 1e-9
TOL_LIFT = 1e-9
MIN_NORM = 1e-8
EDGE_MARGIN = 0.05  # |quaternion dot| below this on an edge: grid too coarse


@dataclass(frozen=True)
class SO3Field:
    """Special orthogonal 3x3 matrices on the grid."""

    values: np.ndarray  # (n, n, n, 3, 3)
    grid_size: int

    def validate(self, tol: float = TOL_ORTH) -> None:
        o = self.values
        err = np.abs(np.einsum("...ij,...kj->...ik", o, o) - np.eye(3)).max()
        if err > tol:
            raise ValueError("matrix field is not orthogonal (residual %.3e)" % err)
        det = np.linalg.det(o)
        if np.abs(det - 1.0).max() > tol:
            raise ValueError("matrix field is not special orthogonal (det off by %.3e)"
                             % float(np.abs(det - 1.0).max()))


@dataclass(frozen=True)
class SU2Field:
    """Special unitary 2x2 matrices on the grid, optionally sign-resolved."""

    values: np.ndarray  # (n, n, n, 2, 2)
    grid_size: int
    sign_resolved: bool = False

    def validate(self, tol: float = TOL_ORTH) -> None:
        r = self.values
        err = np.abs(np.einsum("...ij,...kj->...ik", r, r.conj()) - np.eye(2)).max()
        if err > tol:
            raise ValueError("matrix field is not unitary (residual %.3e)" % err)
        det = r[..., 0, 0] * r[..., 1, 1] - r[..., 0, 1] * r[..., 1, 0]
        if np.abs(det - 1.0).max() > tol:
            raise ValueError("matrix field is not special unitary (det off by %.3e)"
                             % float(np.abs(det - 1.0).max()))


@dataclass(frozen=True)
class SpinorField:
    """Two-component complex field; the pointwise norm plays the weight role."""

    values: np.ndarray  # (n, n, n, 2)
    grid_size: int

    def norm(self) -> np.ndarray:
        return np.sqrt(np.abs(self.values[..., 0]) ** 2 + np.abs(self.values[..., 1]) ** 2)

    def require_nonvanishing(self, min_norm: float = MIN_NORM) -> None:
        lo = float(self.norm().min())
        if lo < min_norm:
            raise VanishingSpinor("spinor norm %.3e below minimum %.1e" % (lo, min_norm))


# ---------------------------------------------------------------------------
# SO(3) field between two frames
# ---------------------------------------------------------------------------


def relate_frames(
    frame: Frame,
    ref_frame: Frame,
    metric: Metric,
    grid_size: int = DEFAULT_GRID,
    tol_frame: float = TOL_FRAME,
) -> SO3Field:
    """Rotation field O with e_j = O_j^k ring-e_k, O_j^k = g_{ab} e_j^a ring-e_k^b.

    Raises MetricMismatch when the two frames do not induce the same metric.
    """
    n = grid_size
    r1 = frame.orthonormality_residual(metric, n)
    r2 = ref_frame.orthonormality_residual(metric, n)
    if max(r1, r2) > tol_frame:
        raise MetricMismatch(
            "frames induce different metrics (residuals %.3e, %.3e)" % (r1, r2)
        )
    e = frame.evaluate(n)
    e0 = ref_frame.evaluate(n)
    g_down = metric.covariant_grid(n)
    values = np.einsum("...ab,...ja,...kb->...jk", g_down, e, e0)
    out = SO3Field(values=values, grid_size=n)
    out.validate()
    return out


# ---------------------------------------------------------------------------
# quaternions and the double cover
# ---------------------------------------------------------------------------


def _quaternions_from_rotations(o: np.ndarray) -> np.ndarray:
    """Unit quaternions (w,x,y,z) with rotation_matrix(q) = o, up to sign.

    Largest-pivot branch of the trace method, vectorized over leading axes.
    """
    shape = o.shape[:-2]
    t = np.trace(o, axis1=-2, axis2=-1)
    cand = np.stack(
        [
            1.0 + t,
            1.0 + o[..., 0, 0] - o[..., 1, 1] - o[..., 2, 2],
            1.0 - o[..., 0, 0] + o[..., 1, 1] - o[..., 2, 2],
            1.0 - o[..., 0, 0] - o[..., 1, 1] + o[..., 2, 2],
        ],
        axis=-1,
    )
    pivot = np.argmax(cand, axis=-1)
    best = np.take_along_axis(cand, pivot[..., None], axis=-1)[..., 0]
    if best.min() < 0.5:
        raise LiftIllConditioned(
            "rotation data degenerate: largest quaternion pivot %.3e < 0.5" % best.min()
        )
    r = np.sqrt(best)
    q = np.empty(shape + (4,), dtype=float)
    d = 1.0 / (2.0 * r)
    m = pivot == 0
    q[m, 0] = 0.5 * r[m]
    q[m, 1] = (o[..., 2, 1] - o[..., 1, 2])[m] * d[m]
    q[m, 2] = (o[..., 0, 2] - o[..., 2, 0])[m] * d[m]
    q[m, 3] = (o[..., 1, 0] - o[..., 0, 1])[m] * d[m]
    m = pivot == 1
    q[m, 1] = 0.5 * r[m]
    q[m, 0] = (o[..., 2, 1] - o[..., 1, 2])[m] * d[m]
    q[m, 2] = (o[..., 0, 1] + o[..., 1, 0])[m] * d[m]
    q[m, 3] = (o[..., 0, 2] + o[..., 2, 0])[m] * d[m]
    m = pivot == 2
    q[m, 2] = 0.5 * r[m]
    q[m, 0] = (o[..., 0, 2] - o[..., 2, 0])[m] * d[m]
    q[m, 1] = (o[..., 0, 1] + o[..., 1, 0])[m] * d[m]
    q[m, 3] = (o[..., 1, 2] + o[..., 2, 1])[m] * d[m]
    m = pivot == 3
    q[m, 3] = 0.5 * r[m]
    q[m, 0] = (o[..., 1, 0] - o[..., 0, 1])[m] * d[m]
    q[m, 1] = (o[..., 0, 2] + o[..., 2, 0])[m] * d[m]
    q[m, 2] = (o[..., 1, 2] + o[..., 2, 1])[m] * d[m]
    return q


def _su2_from_quaternions(q: np.ndarray) -> np.ndarray:
    """R = w I - i (x s1 + y s2 + z s3) for quaternions (w,x,y,z)."""
    w, x, y, z = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    out = np.empty(q.shape[:-1] + (2, 2), dtype=complex)
    out[..., 0, 0] = w - 1j * z
    out[..., 0, 1] = -1j * x - y
    out[..., 1, 0] = -1j * x + y
    out[..., 1, 1] = w + 1j * z
    return out


def _bfs_levels(n: int) -> np.ndarray:
    """Breadth-first distance from the origin on the periodic n^3 grid graph."""
    d1 = np.minimum(np.arange(n), n - np.arange(n))
    return d1[:, None, None] + d1[None, :, None] + d1[None, None, :]


def _resolve_signs(q: np.ndarray) -> np.ndarray:
    """Breadth-first sign propagation from the origin.

    Points are processed level by level; each point takes the sign that keeps
    it close to its tree parent (the neighbour one step toward the origin
    along the first reducible axis).
    """
    n = q.shape[0]
    levels = _bfs_levels(n)
    idx = np.indices((n, n, n))
    q = q.copy()
    for level in range(1, int(levels.max()) + 1):
        mask = levels == level
        if not mask.any():
            continue
        pts = np.stack([idx[0][mask], idx[1][mask], idx[2][mask]], axis=1)
        parents = pts.copy()
        done = np.zeros(len(pts), dtype=bool)
        for axis in range(3):
            c = pts[:, axis]
            reducible = ~done & (c != 0)
            step_down = reducible & (c <= n // 2)
            step_up = reducible & (c > n // 2)
            parents[step_down, axis] = (c[step_down] - 1) % n
            parents[step_up, axis] = (c[step_up] + 1) % n
            done |= reducible
        qp = q[parents[:, 0], parents[:, 1], parents[:, 2]]
        qc = q[pts[:, 0], pts[:, 1], pts[:, 2]]
        dots = np.einsum("ij,ij->i", qp, qc)
        flip = dots < 0.0
        if flip.any():
            f = pts[flip]
            q[f[:, 0], f[:, 1], f[:, 2]] *= -1.0
    return q


def _edge_dots(q: np.ndarray, axis: int) -> np.ndarray:
    """Quaternion dot between each grid point and its +1 neighbour along axis."""
    return np.einsum("...i,...i->...", q, np.roll(q, -1, axis=axis))


_CYCLE_NAMES = ("x1", "x2", "x3")


def so3_to_su2_lift(o: SO3Field, tol_lift: float = TOL_LIFT) -> SU2Field:
    """Continuous SU(2) field R with (1/2) tr(s_j R s^k R*) = O_j^k.

    Raises SpinStructureMismatch (naming the obstructed fundamental cycles)
    when no continuous lift exists, and LiftIllConditioned when the grid does
    not resolve the rotation field well enough to decide.
    """
    o.validate()
    n = o.grid_size
    q = _quaternions_from_rotations(o.values)
    q = _resolve_signs(q)

    dots = np.stack([_edge_dots(q, a) for a in range(3)], axis=0)
    if np.abs(dots).min() < EDGE_MARGIN:
        raise LiftIllConditioned(
            "adjacent rotations differ too much (min |edge dot| %.3e); refine the grid"
            % float(np.abs(dots).min())
        )
    signs = np.where(dots > 0.0, 1, -1)

    # Plaquette products are sign-gauge invariant; a violation means the
    # pointwise data is inconsistent (too coarse a grid), not a topology issue.
    for a in range(3):
        for b in range(a + 1, 3):
            plaq = (
                signs[a]
                * np.roll(signs[b], -1, axis=a)
                * np.roll(signs[a], -1, axis=b)
                * signs[b]
            )
            if (plaq < 0).any():
                raise LiftIllConditioned(
                    "sign holonomy on %d plaquette(s) in the (%s,%s) planes; refine the grid"
                    % (int((plaq < 0).sum()), _CYCLE_NAMES[a], _CYCLE_NAMES[b])
                )

    # Monodromy around the three fundamental cycles through the origin.
    obstructed = []
    for a in range(3):
        line = [0, 0, 0]
        sl = signs[a][tuple(slice(None) if ax == a else 0 for ax in range(3))]
        if int(np.prod(sl)) < 0:
            obstructed.append(_CYCLE_NAMES[a])
        del line
    if obstructed:
        raise SpinStructureMismatch(obstructed)

    if (signs < 0).any():
        # Cannot happen once plaquettes and cycles are consistent with a
        # BFS-resolved tree; kept as a hard invariant.
        raise LiftIllConditioned("unresolvable edge sign flips after propagation")

    # Reporting convention: nonnegative real trace at the origin.
    if q[0, 0, 0, 0] < 0.0:
        q = -q

    r = _su2_from_quaternions(q)
    rec = np.einsum("jab,...bc,kcd,...ad->...jk", np.stack(PAULI_S), r, np.stack(PAULI_S),
                    r.conj()).real * 0.5
    err = float(np.abs(rec - o.values).max())
    if err > tol_lift:
        raise LiftIllConditioned("lift verification failed (residual %.3e)" % err)
    out = SU2Field(values=r, grid_size=n, sign_resolved=True)
    out.validate()
    return out


# ---------------------------------------------------------------------------
# spinor <-> SU(2)
# ---------------------------------------------------------------------------


def _as_weight_grid(w, n: int) -> np.ndarray:
    if isinstance(w, TrigPoly):
        return w.evaluate(n).real
    w = np.asarray(w, dtype=float)
    if w.ndim == 0:
        return np.full((n, n, n), float(w))
    return w


def spinor_from_su2(r: SU2Field, w=1.0) -> SpinorField:
    """Spinor with norm w parameterizing R: xi1 = w R22, xi2 = -w R21."""
    if not r.sign_resolved:
        raise ValueError("sign-unresolved SU(2) field cannot define a spinor")
    n = r.grid_size
    wg = _as_weight_grid(w, n)
    if wg.min() <= 0.0:
        raise ValueError("weight must be positive")
    values = np.empty((n, n, n, 2), dtype=complex)
    values[..., 0] = wg * r.values[..., 1, 1]
    values[..., 1] = -wg * r.values[..., 1, 0]
    return SpinorField(values=values, grid_size=n)


def su2_from_spinor(xi: SpinorField, min_norm: float = MIN_NORM) -> tuple[SU2Field, np.ndarray]:
    """Inverse map: R = (1/|xi|) [[conj xi1, conj xi2], [-xi2, xi1]] and w = |xi|."""
    xi.require_nonvanishing(min_norm)
    w = xi.norm()
    r = np.empty(xi.values.shape[:-1] + (2, 2), dtype=complex)
    r[..., 0, 0] = np.conj(xi.values[..., 0]) / w
    r[..., 0, 1] = np.conj(xi.values[..., 1]) / w
    r[..., 1, 0] = -xi.values[..., 1] / w
    r[..., 1, 1] = xi.values[..., 0] / w
    out = SU2Field(values=r, grid_size=xi.grid_size, sign_resolved=True)
    out.validate()
    return out, w


def lift_between_symbols(
    sym: PrincipalSymbol,
    ref_sym: PrincipalSymbol,
    grid_size: int = DEFAULT_GRID,
    tol_frame: float = TOL_FRAME,
) -> SU2Field:
    """SU(2) field relating sym to ref_sym (sym = R ref R*), if one exists."""
    metric = metric_from_symbol(sym)
    ref_metric = metric_from_symbol(ref_sym)
    if not metric.allclose(ref_metric, tol_frame):
        raise MetricMismatch("symbol and reference induce different metrics")
    o = relate_frames(
        frame_from_symbol(sym), frame_from_symbol(ref_sym), metric, grid_size, tol_frame
    )
    return so3_to_su2_lift(o)


def same_spin_structure(
    sym_a: PrincipalSymbol,
    sym_b: PrincipalSymbol,
    grid_size: int = DEFAULT_GRID,
) -> bool:
    """Whether a smooth SU(2) field relates the two symbols."""
    try:
        lift_between_symbols(sym_a, sym_b, grid_size)
    except SpinStructureMismatch:
        return False
    return True


# ---------------------------------------------------------------------------
# gauge transformations
# ---------------------------------------------------------------------------


def conformal_transform(
    sym: PrincipalSymbol,
    w,
    phi: TrigPoly,
    grid_size: int = DEFAULT_GRID,
    drop_tol: float = 1e-14,
) -> tuple[PrincipalSymbol, TrigPoly]:
    """Scale (symbol, weight) by exp(-phi); metric scales by exp(-2 phi).

    The products are formed on the grid and re-expanded, so the returned
    coefficients carry an exponentially small truncation tail.
    """
    if not phi.is_real(1e-12):
        raise ValueError("conformal factor must be real-valued")
    n = max(grid_size, 4 * max(sym.max_degree, phi.max_degree, 1) + 1)
    factor = np.exp(-phi.evaluate(n).real)
    comps = []
    for c in sym.components:
        vals = c.evaluate(n) * factor[..., None, None]
        comps.append(MatrixField.from_grid(vals, drop_tol))
    w_poly = w if isinstance(w, TrigPoly) else TrigPoly.const(w)
    w_new = TrigPoly.from_grid(factor * w_poly.evaluate(n).real, drop_tol)
    return PrincipalSymbol(comps, check=False), w_new


def su2_reference_transform(ref_sym: PrincipalSymbol, q_field: MatrixField) -> PrincipalSymbol:
    """Change of reference: ref -> Q ref Q* (exact coefficient arithmetic)."""
    qs = q_field.adjoint()
    return PrincipalSymbol(
        [(q_field @ c @ qs).prune(1e-16) for c in ref_sym.components], check=False
    )


def charge_conjugate(xi: SpinorField) -> SpinorField:
    """Antilinear map (xi1, xi2) -> (-conj xi2, conj xi1)."""
    values = np.empty_like(xi.values)
    values[..., 0] = -np.conj(xi.values[..., 1])
    values[..., 1] = np.conj(xi.values[..., 0])
    return SpinorField(values=values, grid_size=xi.grid_size)


def rigid_rotation(xi: SpinorField, q: np.ndarray) -> SpinorField:
    """Spinor action of a constant special unitary matrix.

    xi -> Q22 xi - Q21 C(xi), the sum of a linear and an antilinear part;
    preserves the pointwise norm.
    """
    q = np.asarray(q, dtype=complex)
    if q.shape != (2, 2):
        raise ValueError("rigid rotation takes a constant 2x2 matrix")
    det = q[0, 0] * q[1, 1] - q[0, 1] * q[1, 0]
    if abs(det - 1.0) > 1e-10 or np.abs(q @ q.conj().T - np.eye(2)).max() > 1e-10:
        raise ValueError("rigid rotation matrix must be special unitary")
    c = charge_conjugate(xi)
    values = q[1, 1] * xi.values - q[1, 0] * c.values
    return SpinorField(values=values, grid_size=xi.grid_size)
