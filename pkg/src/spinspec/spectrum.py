"""Plane-wave Galerkin spectra, counting functions and lattice-count oracles.

The operator P^a d_a + Q0 is projected onto the basis exp(i m.x) (x) e_a with
|m_alpha| <= M; the matrix element between column mode (m, b) and row mode
(m', a') is [ i m_a Phat^a_{m'-m} + Q0hat_{m'-m} ]_{a'b}, so only coefficient
frequencies within the band |k_alpha| <= 2M ever enter the matrix.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConvergenceFailure,
    NonpositiveWeight,
    OutsideTrustWindow,
    TruncationTooSmall,
)
from .fields import MatrixField, TrigPoly
from .symbols import Operator1st, metric_degree, metric_from_symbol

TRUST_RHO = 0.5


@dataclass(frozen=True)
class Truncation:
    """Plane-wave cutoff |m_alpha| <= M; basis dimension 2 (2M+1)^3."""

    M: int

    def __post_init__(self):
        if self.M < 0:
            raise ValueError("cutoff must be nonnegative")

    @property
    def modes_per_axis(self) -> int:
        return 2 * self.M + 1

    @property
    def num_modes(self) -> int:
        return self.modes_per_axis**3

    @property
    def dim(self) -> int:
        return 2 * self.num_modes

    def mode_index(self, m) -> int:
        """Lexicographic index of a frequency vector in [-M, M]^3."""
        w = self.modes_per_axis
        i1, i2, i3 = (int(v) + self.M for v in m)
        if not all(0 <= i < w for i in (i1, i2, i3)):
            raise IndexError("mode outside truncation box")
        return (i1 * w + i2) * w + i3

    def modes(self) -> np.ndarray:
        """All frequency vectors, shape (num_modes, 3), in index order."""
        r = np.arange(-self.M, self.M + 1)
        m1, m2, m3 = np.meshgrid(r, r, r, indexing="ij")
        return np.stack([m1.ravel(), m2.ravel(), m3.ravel()], axis=1)


@dataclass(frozen=True)
class DiscreteSpectrum:
    """Sorted eigenvalues of a truncated operator with a trust window."""

    eigenvalues: np.ndarray
    M: int
    trust_radius: float

    def trusted(self) -> np.ndarray:
        return np.abs(self.eigenvalues) <= self.trust_radius


@dataclass(frozen=True)
class CountingTable:
    """Samples of the eigenvalue-counting function N(lam) = #{0 < eig < lam}."""

    lam: np.ndarray
    counts: np.ndarray
    trusted: np.ndarray
    provenance: str = "galerkin"


def assemble(op: Operator1st, trunc: Truncation, negligible: float = 0.0) -> np.ndarray:
    """Dense Hermitian Galerkin matrix of the operator.

    Raises TruncationTooSmall if a stored coefficient above the negligibility
    threshold carries a frequency with some |k_alpha| > 2M: such a coefficient
    never enters any matrix element and would be dropped silently.
    """
    m_count = trunc.num_modes
    dim = trunc.dim
    modes = trunc.modes()

    coeff_maps = [p.coefficient_map() for p in op.P] + [op.Q0.coefficient_map()]
    cut = negligible * max(op.coeff_scale, 1e-300)
    bad = set()
    freqs = set()
    for cm in coeff_maps:
        for k, c in cm.items():
            if np.abs(c).max() <= cut and negligible > 0.0:
                continue
            if max(abs(v) for v in k) > 2 * trunc.M:
                bad.add(k)
            else:
                freqs.add(k)
    if bad:
        raise TruncationTooSmall(
            "coefficient frequencies %s exceed the coupling band |k| <= 2M = %d"
            % (sorted(bad)[:4], 2 * trunc.M)
        )

    p_maps = coeff_maps[:3]
    q_map = coeff_maps[3]
    a_mat = np.zeros((dim, dim), dtype=complex)
    w = trunc.modes_per_axis
    strides = np.array([w * w, w, 1])
    col_of = (modes + trunc.M) @ strides

    for k in sorted(freqs):
        karr = np.array(k)
        shifted = modes + karr
        ok = (np.abs(shifted) <= trunc.M).all(axis=1)
        if not ok.any():
            continue
        cols = col_of[ok]
        rows = (shifted[ok] + trunc.M) @ strides
        block = np.zeros((ok.sum(), 2, 2), dtype=complex)
        for a in range(3):
            c = p_maps[a].get(k)
            if c is not None:
                block += 1j * modes[ok, a][:, None, None] * c
        cq = q_map.get(k)
        if cq is not None:
            block += cq
        for i in range(2):
            for j in range(2):
                a_mat[2 * rows + i, 2 * cols + j] += block[:, i, j]
    return a_mat


def hermiticity_residual(a_mat: np.ndarray) -> float:
    return float(np.abs(a_mat - a_mat.conj().T).max())


def eigensolve(
    a_mat: np.ndarray,
    trunc: Truncation | None = None,
    trust_radius: float = np.inf,
    check_residuals: bool = True,
    herm_tol: float = 1e-12,
) -> DiscreteSpectrum:
    """All eigenvalues by dense Hermitian eigendecomposition.

    The matrix is required to be Hermitian within herm_tol (relative) and is
    symmetrized before the solve; 20 sampled eigenpairs are residual-checked
    against ||A v - lam v|| <= 1e-9 ||A||.
    """
    scale = max(float(np.abs(a_mat).max()), 1e-300)
    res = hermiticity_residual(a_mat)
    if res > herm_tol * scale:
        raise ConvergenceFailure(
            "matrix is not Hermitian (residual %.3e relative to %.3e)" % (res, scale)
        )
    h = 0.5 * (a_mat + a_mat.conj().T)
    try:
        if check_residuals:
            vals, vecs = np.linalg.eigh(h)
        else:
            vals = np.linalg.eigvalsh(h)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    if check_residuals:
        norm = max(float(np.abs(vals).max()), 1e-300)
        idx = np.linspace(0, len(vals) - 1, min(20, len(vals))).astype(int)
        for i in idx:
            r = np.linalg.norm(h @ vecs[:, i] - vals[i] * vecs[:, i])
            if r > 1e-9 * norm:
                raise ConvergenceFailure("eigenpair residual %.3e exceeds 1e-9 ||A||" % r)
    return DiscreteSpectrum(
        eigenvalues=np.sort(vals.real),
        M=trunc.M if trunc is not None else -1,
        trust_radius=trust_radius,
    )


def trust_radius_for(op: Operator1st, M: int, grid_size: int = 32, rho: float = TRUST_RHO) -> float:
    """rho * M * gamma_min, gamma_min the smallest metric eigenvalue root.

    Galerkin truncation corrupts eigenvalues whose eigenfunctions need
    frequencies near the cutoff; gamma_min converts the frequency cutoff into
    an eigenvalue scale.
    """
    metric = metric_from_symbol(op.principal_symbol())
    n = max(grid_size, 2 * metric_degree(metric) + 1)
    gamma_min = np.sqrt(max(metric.min_eigenvalue(n), 0.0))
    return rho * M * gamma_min


def weighted_reduce(
    op: Operator1st,
    w: TrigPoly,
    degree_cap: int | None = None,
    grid_size: int | None = None,
    drop_tol: float = 1e-13,
) -> Operator1st:
    """Coefficients of w^{-1/2} op w^{-1/2}, the weight-free reduction.

    w^{-1/2} is evaluated on a grid and re-expanded; the reduced coefficients
    are pruned at drop_tol and optionally capped at degree_cap per axis, with
    the discarded l1 coefficient mass recorded in trunc_error.  Since matrix
    elements only involve frequencies up to 2M per axis, capping at 2M leaves
    the Galerkin matrix of the reduced operator exactly.
    """
    if not isinstance(w, TrigPoly):
        w = TrigPoly.const(w)
    d_op = op.max_degree
    d_w = w.max_degree
    if grid_size is None:
        base = degree_cap if degree_cap is not None else 4 * (d_w + 1)
        grid_size = max(48, 2 * (base + 2 * d_op + 2 * d_w) + 9)
    n = grid_size
    wg = w.evaluate(n).real
    if wg.min() <= 0.0:
        raise NonpositiveWeight("weight minimum %.3e on the grid" % wg.min())
    u = TrigPoly.from_grid(1.0 / np.sqrt(wg), drop_tol)
    # In-band coefficients of u P u only feel u-modes up to cap + deg(op) plus
    # a safety margin (beyond that both partners sit in the exponential tail).
    u_cap = (n - 1) // 2 if degree_cap is None else min(degree_cap + d_op + 12, (n - 1) // 2)
    u, dropped = u.cap_degree(u_cap)

    def smul(s: TrigPoly, m: MatrixField) -> MatrixField:
        return MatrixField([[s * m.entries[i][j] for j in range(2)] for i in range(2)])

    def finish(m: MatrixField) -> MatrixField:
        nonlocal dropped
        m = m.prune(drop_tol)
        if degree_cap is None:
            return m
        capped = [[None, None], [None, None]]
        for i in range(2):
            for j in range(2):
                capped[i][j], lost = m.entries[i][j].cap_degree(degree_cap)
                dropped += lost
        return MatrixField(capped)

    new_p = tuple(finish(smul(u, smul(u, op.P[a]))) for a in range(3))
    q0 = smul(u, smul(u, op.Q0))
    for a in range(3):
        q0 = q0 + smul(u, smul(u.derivative(a), op.P[a]))
    q0 = finish(q0)
    return Operator1st(P=new_p, Q0=q0, trunc_error=op.trunc_error + dropped)


def counting_function(
    source: DiscreteSpectrum | np.ndarray,
    lam_grid,
    provenance: str | None = None,
) -> CountingTable:
    """N(lam) = number of eigenvalues strictly between 0 and lam.

    Galerkin sources carry a trust window; samples beyond it are flagged (and
    an OutsideTrustWindow warning is emitted), not rejected.
    """
    lam = np.asarray(lam_grid, dtype=float)
    if (lam <= 0).any():
        raise ValueError("counting samples must be positive")
    if isinstance(source, DiscreteSpectrum):
        eigs = source.eigenvalues
        trust = source.trust_radius
        prov = provenance or "galerkin"
    else:
        eigs = np.sort(np.asarray(source, dtype=float))
        trust = np.inf
        prov = provenance or "exact_example"
    pos = eigs[eigs > 0.0]
    counts = np.searchsorted(pos, lam, side="left")
    trusted = lam <= trust
    if not trusted.all():
        warnings.warn(
            "%d counting samples beyond the trust radius %.3g"
            % (int((~trusted).sum()), trust),
            OutsideTrustWindow,
        )
    return CountingTable(lam=lam, counts=counts.astype(np.int64), trusted=trusted, provenance=prov)


# ---------------------------------------------------------------------------
# the exactly solvable operator: closed-form spectrum and lattice counting
# ---------------------------------------------------------------------------


def exact_example_spectrum(lam_bound: float) -> np.ndarray:
    """Eigenvalues {1 (x2)} U {1 +/- |m| : m in Z^3 \\ 0} within [-bound, bound].

    Each nonzero frequency contributes exactly one eigenvalue per sign branch.
    """
    if not np.isfinite(lam_bound):
        raise ValueError("need a finite bound")
    bound = float(lam_bound)
    rmax = bound + 1.0
    r = int(np.floor(rmax)) + 1
    g = np.arange(-r, r + 1)
    m1, m2, m3 = np.meshgrid(g, g, g, indexing="ij")
    n2 = (m1 * m1 + m2 * m2 + m3 * m3).ravel()
    norms = np.sqrt(n2[n2 > 0].astype(float))
    eigs = [np.array([1.0, 1.0])] if abs(1.0) <= bound else []
    plus = 1.0 + norms
    minus = 1.0 - norms
    eigs.append(plus[np.abs(plus) <= bound])
    eigs.append(minus[np.abs(minus) <= bound])
    return np.sort(np.concatenate(eigs))


def lattice_count(r: float) -> int:
    """Number of integer lattice points with |m| < r (exact integer arithmetic)."""
    if r <= 0.0:
        return 0
    # strict inequality on |m|^2 < r^2 decided in exact arithmetic where r^2
    # is integral; floats are exact for the modest radii in scope
    r2 = r * r
    rmax = int(np.floor(r)) + 1
    counts = _square_norm_histogram(rmax)
    q = int(np.floor(r2))
    if float(q) == r2:
        q -= 1
    q = min(q, len(counts) - 1)
    return int(counts[: q + 1].sum())


def lattice_counts(rs) -> np.ndarray:
    rs = np.asarray(rs, dtype=float)
    if len(rs) == 0:
        return np.zeros(0, dtype=np.int64)
    rmax = int(np.floor(rs.max())) + 1
    counts = _square_norm_histogram(rmax)
    cum = np.concatenate([[0], np.cumsum(counts)])
    out = np.empty(len(rs), dtype=np.int64)
    for i, r in enumerate(rs):
        if r <= 0:
            out[i] = 0
            continue
        q = int(np.floor(r * r))
        if float(q) == r * r:
            q -= 1
        out[i] = cum[min(q + 1, len(cum) - 1)]
    return out


def _square_norm_histogram(rmax: int) -> np.ndarray:
    """counts[n] = #{m in Z^3 : |m|^2 = n} for n <= rmax^2, via 1D convolution."""
    nmax = rmax * rmax
    ks = np.arange(-rmax, rmax + 1)
    one = np.bincount(ks * ks, minlength=nmax + 1)[: nmax + 1]
    two = np.zeros(nmax + 1, dtype=np.int64)
    for k in ks:
        k2 = k * k
        if k2 > nmax:
            continue
        two[k2:] += one[: nmax + 1 - k2]
    three = np.zeros(nmax + 1, dtype=np.int64)
    for k in ks:
        k2 = k * k
        if k2 > nmax:
            continue
        three[k2:] += two[: nmax + 1 - k2]
    return three


def exact_example_counting(lam_grid) -> CountingTable:
    """Counting table of the solvable operator via exact lattice counts.

    For lam > 1, N(lam) = 1 + #{m : |m| < lam - 1}; below that the only
    candidate eigenvalues are 1 and the zeros 1 - |m|, none in (0, lam).
    """
    lam = np.asarray(lam_grid, dtype=float)
    if (lam <= 0).any():
        raise ValueError("counting samples must be positive")
    counts = np.zeros(len(lam), dtype=np.int64)
    above = lam > 1.0
    counts[above] = 1 + lattice_counts(lam[above] - 1.0)
    return CountingTable(
        lam=lam, counts=counts, trusted=np.ones(len(lam), dtype=bool), provenance="exact_example"
    )


def midpoint_lambda_grid(lam_max: float) -> np.ndarray:
    """Half-integer sample points 0.5, 1.5, ... below lam_max.

    These avoid the eigenvalues 1 +/- sqrt(n) of the solvable operator, which
    are never half-integers.
    """
    if lam_max <= 0.5:
        return np.zeros(0)
    return np.arange(0.5, lam_max, 1.0)


def asymptotic_compare(
    table: CountingTable,
    a: float,
    b: float,
    window: tuple[float, float] | None = None,
    fit_window: tuple[float, float] | None = None,
) -> dict:
    """Residual diagnostics of N(lam) against a lam^3 + b lam^2.

    Reports r(lam) = N - a lam^3 - b lam^2, the mean of r/lam^2 over the
    trailing window, and the least-squares growth exponent of |r| over the
    fit window.
    """
    lam = table.lam
    if len(lam) == 0:
        raise ValueError("empty counting table")
    if not (np.diff(table.counts) >= 0).all():
        raise ValueError("counting table is not monotone")
    resid = table.counts - a * lam**3 - b * lam**2
    lam_max = float(lam.max())
    if window is None:
        window = (0.8 * lam_max, lam_max)
    if fit_window is None:
        fit_window = (0.2 * lam_max, lam_max)
    win = (lam >= window[0]) & (lam <= window[1])
    rel = resid / lam**2
    window_mean = float(rel[win].mean()) if win.any() else float("nan")

    fit = (lam >= fit_window[0]) & (lam <= fit_window[1]) & (np.abs(resid) > 1e-9)
    if fit.sum() >= 2:
        slope = float(np.polyfit(np.log(lam[fit]), np.log(np.abs(resid[fit])), 1)[0])
    else:
        slope = float("nan")
    return {
        "lam": lam,
        "residual": resid,
        "residual_over_lam2": rel,
        "window": window,
        "window_mean": window_mean,
        "fit_window": fit_window,
        "growth_exponent": slope,
    }


def match_clusters(exact_values: np.ndarray, eigs: np.ndarray, tol: float, group_tol: float = 1e-7):
    """Group exact values into multiplicity clusters and count matches.

    Returns a list of (value, multiplicity, matched_count) where matched_count
    is the number of computed eigenvalues within tol of the cluster value.
    """
    exact = np.sort(np.asarray(exact_values, dtype=float))
    clusters = []
    for v in exact:
        if clusters and abs(v - clusters[-1][0]) <= group_tol:
            clusters[-1][1] += 1
        else:
            clusters.append([v, 1])
    eigs = np.sort(np.asarray(eigs, dtype=float))
    out = []
    for v, mult in clusters:
        lo = np.searchsorted(eigs, v - tol, side="left")
        hi = np.searchsorted(eigs, v + tol, side="right")
        out.append((float(v), int(mult), int(hi - lo)))
    return out
