"""End-to-end analysis: from a problem description to the counting coefficients.

The analyze pipeline extracts metric, frame, orientation charge and spinor,
evaluates the action and both routes to the second counting coefficient, and
reports consistency residuals.  Orientation charge -1 is reduced to the +1
case by inverting coordinates (x -> -x), under which both coefficients are
invariant and the torsion identity becomes applicable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import geometry
from .catalog import pauli_symbol
from .errors import SpinStructureMismatch
from .fields import TrigPoly
from .gauge import SpinorField, lift_between_symbols, spinor_from_su2
from .geometry import PauliField
from .problem import ProblemSpec
from .spectrum import (
    CountingTable,
    DiscreteSpectrum,
    Truncation,
    asymptotic_compare,
    assemble,
    counting_function,
    eigensolve,
    exact_example_counting,
    midpoint_lambda_grid,
    trust_radius_for,
    weighted_reduce,
)
from .symbols import (
    Frame,
    Metric,
    Operator1st,
    frame_from_symbol,
    operator_from_symbol,
    require_elliptic,
    subprincipal,
    topological_charge,
)


@dataclass
class AnalysisResult:
    """Everything cmd-analyze reports."""

    grid: int
    charge: int
    inverted: bool
    metric: Metric
    frame: Frame
    spinor: SpinorField
    pauli: PauliField | None
    action: float
    coeff_a: float
    coeff_b_action: float
    coeff_b_torsion: float
    torsion_identity_max: float
    metric_flat_dev: float
    metric_min_eig: float
    same_spin_structure: bool = True
    obstruction_cycles: list = field(default_factory=list)

    def to_report(self) -> dict:
        n = self.grid
        samples = []
        if self.same_spin_structure:
            m = self.spinor.grid_size
            step = max(m // 4, 1)
            for i in range(0, m, step):
                xi = self.spinor.values[i, i, i]
                samples.append(
                    {
                        "point_index": [i, i, i],
                        "xi1": [float(xi[0].real), float(xi[0].imag)],
                        "xi2": [float(xi[1].real), float(xi[1].imag)],
                    }
                )
        return {
            "grid": n,
            "topological_charge": self.charge,
            "coordinate_inversion_applied": self.inverted,
            "metric": {
                "max_deviation_from_flat": self.metric_flat_dev,
                "min_eigenvalue": self.metric_min_eig,
            },
            "spin_structure_matches_reference": self.same_spin_structure,
            "obstruction_cycles": list(self.obstruction_cycles),
            "spinor_samples": samples,
            "dirac_action": self.action,
            "coeff_a": self.coeff_a,
            "coeff_b_action": self.coeff_b_action,
            "coeff_b_torsion": self.coeff_b_torsion,
            "torsion_identity_max_residual": self.torsion_identity_max,
        }


def analyze_problem(spec: ProblemSpec) -> AnalysisResult:
    """Run the full geometric pipeline on a problem description.

    Raises EllipticityError for degenerate symbols, ChargeInconsistent for
    corrupted ones, and SpinStructureMismatch when no smooth gauge relates
    the symbol to its reference.
    """
    n = spec.grid
    sym = spec.symbol
    weight = spec.weight

    require_elliptic(sym, n, spec.tol("ellipticity", 1e-8))
    charge = topological_charge(sym, n, spec.tol("charge", 1e-6))

    reference = spec.reference
    inverted = False
    if charge == -1:
        # Reduce to the orientable +1 case; both counting coefficients are
        # invariant under x -> -x and the spinor is coordinate-independent.
        sym = sym.reflect()
        weight = weight.reflect()
        reference = reference.reflect() if reference is not None else None
        inverted = True
    if reference is None:
        reference = pauli_symbol()

    metric = require_elliptic(sym, n, spec.tol("ellipticity", 1e-8))
    ref_charge = topological_charge(reference, n, spec.tol("charge", 1e-6))
    work_charge = topological_charge(sym, n, spec.tol("charge", 1e-6))
    if ref_charge != work_charge:
        raise SpinStructureMismatch(
            [], "symbol and reference have opposite orientation charges"
        )

    frame = frame_from_symbol(sym)
    try:
        lift = lift_between_symbols(sym, reference, n, spec.tol("frame", 1e-9))
    except SpinStructureMismatch as exc:
        raise exc

    w_grid = weight.evaluate(n).real
    spinor = spinor_from_su2(lift, w_grid)
    pauli = PauliField.from_symbol(reference, metric, n)

    action = geometry.dirac_action(pauli, metric, spinor)
    a = geometry.coeff_a(spinor, metric)
    b_action = geometry.coeff_b_action(spinor, pauli, metric)
    b_torsion = geometry.coeff_b_torsion(weight, frame, metric, +1, n)
    identity = geometry.torsion_spinor_identity_residual(frame, metric, spinor, pauli)

    g = metric.contravariant_grid(n)
    flat_dev = float(np.abs(g - np.eye(3)).max())

    return AnalysisResult(
        grid=n,
        charge=charge,
        inverted=inverted,
        metric=metric,
        frame=frame,
        spinor=spinor,
        pauli=pauli,
        action=action,
        coeff_a=a,
        coeff_b_action=b_action,
        coeff_b_torsion=b_torsion,
        torsion_identity_max=float(np.abs(identity).max()),
        metric_flat_dev=flat_dev,
        metric_min_eig=metric.min_eigenvalue(n),
    )


def analyze_with_obstruction(spec: ProblemSpec) -> AnalysisResult:
    """Like analyze_problem, but a failed lift yields a partial result."""
    try:
        return analyze_problem(spec)
    except SpinStructureMismatch as exc:
        n = spec.grid
        metric = require_elliptic(spec.symbol, n, spec.tol("ellipticity", 1e-8))
        charge = topological_charge(spec.symbol, n, spec.tol("charge", 1e-6))
        empty = SpinorField(values=np.zeros((1, 1, 1, 2), dtype=complex), grid_size=1)
        g = metric.contravariant_grid(n)
        result = AnalysisResult(
            grid=n,
            charge=charge,
            inverted=False,
            metric=metric,
            frame=frame_from_symbol(spec.symbol),
            spinor=empty,
            pauli=None,
            action=float("nan"),
            coeff_a=float("nan"),
            coeff_b_action=float("nan"),
            coeff_b_torsion=float("nan"),
            torsion_identity_max=float("nan"),
            metric_flat_dev=float(np.abs(g - np.eye(3)).max()),
            metric_min_eig=metric.min_eigenvalue(n),
            same_spin_structure=False,
            obstruction_cycles=exc.cycles,
        )
        return result


@dataclass
class SpectrumResult:
    spectrum: DiscreteSpectrum
    counting: CountingTable
    comparison: dict | None
    operator: Operator1st
    weighted: bool


def spectrum_problem(
    spec: ProblemSpec,
    M: int | None = None,
    lam_max: float | None = None,
    coeffs: tuple[float, float] | None = None,
) -> SpectrumResult:
    """Galerkin spectrum, counting table, and asymptotic comparison.

    coeffs supplies (a, b) for the comparison; when omitted they are computed
    by the analyze pipeline.
    """
    m_cut = spec.truncation_m if M is None else int(M)
    trunc = Truncation(m_cut)
    op = operator_from_symbol(spec.symbol)
    weighted = (spec.weight - TrigPoly.const(1.0)).coeff_scale > 0.0
    if weighted:
        op = weighted_reduce(op, spec.weight, degree_cap=2 * m_cut)
    matrix = assemble(op, trunc)
    trust = trust_radius_for(op, m_cut, spec.grid)
    spectrum = eigensolve(matrix, trunc, trust_radius=trust)

    top = trust if lam_max is None else min(lam_max, trust) if np.isfinite(trust) else lam_max
    lam_grid = midpoint_lambda_grid(max(top, 1.0))
    if len(lam_grid) == 0:
        lam_grid = np.array([0.5])
    counting = counting_function(spectrum, lam_grid)

    comparison = None
    if coeffs is None:
        try:
            res = analyze_problem(spec)
            coeffs = (res.coeff_a, res.coeff_b_action)
        except SpinStructureMismatch:
            coeffs = None
    if coeffs is not None and len(lam_grid) >= 2:
        comparison = asymptotic_compare(counting, coeffs[0], coeffs[1])
        comparison["a"] = coeffs[0]
        comparison["b"] = coeffs[1]
    return SpectrumResult(
        spectrum=spectrum, counting=counting, comparison=comparison, operator=op, weighted=weighted
    )


def count_problem(lam_max: float, a: float, b: float) -> tuple[CountingTable, dict]:
    """Exact counting table of the solvable operator plus residual diagnostics."""
    lam_grid = midpoint_lambda_grid(lam_max)
    table = exact_example_counting(lam_grid)
    comparison = asymptotic_compare(table, a, b)
    comparison["a"] = a
    comparison["b"] = b
    return table, comparison


def verify_subprincipal_zero(spec: ProblemSpec) -> float:
    """Residual of the zero-subprincipal constraint for the problem operator."""
    op = operator_from_symbol(spec.symbol)
    sub = subprincipal(op)
    return sub.coeff_scale
