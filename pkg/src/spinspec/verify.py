"""Randomized invariance suites behind the verify command.

Each suite perturbs the problem with seeded random gauge data, recomputes the
affected quantities, and reports worst residuals against fixed tolerances.
Tolerances can be overridden per problem file (keys suite_conformal,
suite_su2, suite_rigid, suite_torsion, suite_subprincipal).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import geometry
from .catalog import (
    pauli_symbol,
    random_scalar,
    random_special_unitary,
    random_su2_gauge,
)
from .fields import TrigPoly
from .gauge import (
    charge_conjugate,
    conformal_transform,
    rigid_rotation,
    su2_reference_transform,
)
from .pipeline import analyze_problem
from .problem import ProblemSpec
from .symbols import (
    conjugate_operator,
    conjugation_subprincipal,
    operator_from_symbol,
    subprincipal,
)

SUITE_NAMES = ("conformal", "su2", "rigid", "torsion", "subprincipal")


@dataclass
class SuiteResult:
    name: str
    tolerance: float
    residuals: dict = field(default_factory=dict)

    @property
    def worst(self) -> float:
        return max(self.residuals.values(), default=0.0)

    @property
    def passed(self) -> bool:
        return self.worst <= self.tolerance

    def to_report(self) -> dict:
        return {
            "suite": self.name,
            "tolerance": self.tolerance,
            "residuals": {k: float(v) for k, v in self.residuals.items()},
            "worst_residual": float(self.worst),
            "passed": bool(self.passed),
        }


def conformal_suite(spec: ProblemSpec, rng: np.random.Generator) -> SuiteResult:
    """b is unchanged by (symbol, weight) -> e^{-phi} (symbol, weight)."""
    tol = spec.tol("suite_conformal", 1e-6)
    base = analyze_problem(spec)
    phi = random_scalar(rng, amplitude=0.3, degree=2)
    sym2, w2 = conformal_transform(spec.symbol, spec.weight, phi, spec.grid)
    ref = spec.reference if spec.reference is not None else pauli_symbol()
    ref2, _ = conformal_transform(ref, TrigPoly.const(1.0), phi, spec.grid)
    spec2 = ProblemSpec(
        symbol=sym2, reference=ref2, weight=w2, truncation_m=spec.truncation_m,
        grid=spec.grid, tolerances=spec.tolerances,
    )
    after = analyze_problem(spec2)
    return SuiteResult(
        name="conformal",
        tolerance=tol,
        residuals={
            "b_drift": abs(after.coeff_b_action - base.coeff_b_action),
            "a_drift": abs(after.coeff_a - base.coeff_a),
        },
    )


def su2_suite(spec: ProblemSpec, rng: np.random.Generator) -> SuiteResult:
    """The action is unchanged by a reference change ref -> Q ref Q*."""
    tol = spec.tol("suite_su2", 1e-7)
    base = analyze_problem(spec)
    ref = spec.reference if spec.reference is not None else pauli_symbol()
    q_field = random_su2_gauge(rng)
    ref2 = su2_reference_transform(ref, q_field)
    spec2 = ProblemSpec(
        symbol=spec.symbol, reference=ref2, weight=spec.weight,
        truncation_m=spec.truncation_m, grid=spec.grid, tolerances=spec.tolerances,
    )
    after = analyze_problem(spec2)
    # the induced spinor map is xi -> Q xi (up to the global lift sign)
    n = spec.grid
    qv = np.empty((n, n, n, 2, 2), dtype=complex)
    for i in range(2):
        for j in range(2):
            qv[..., i, j] = q_field.entries[i][j].evaluate(n)
    mapped = np.einsum("...ij,...j->...i", qv, base.spinor.values)
    spinor_dev = min(
        float(np.abs(after.spinor.values - mapped).max()),
        float(np.abs(after.spinor.values + mapped).max()),
    )
    return SuiteResult(
        name="su2",
        tolerance=tol,
        residuals={
            "action_drift": abs(after.action - base.action),
            "b_drift": abs(after.coeff_b_action - base.coeff_b_action),
            "spinor_map_dev": spinor_dev,
        },
    )


def rigid_suite(spec: ProblemSpec, rng: np.random.Generator) -> SuiteResult:
    """Re(xi* W xi) is pointwise unchanged by constant special unitary rotations."""
    tol = spec.tol("suite_rigid", 1e-9)
    base = analyze_problem(spec)
    q = random_special_unitary(rng)
    xi2 = rigid_rotation(base.spinor, q)
    before = np.real(
        np.einsum(
            "...i,...i->...",
            np.conj(base.spinor.values),
            geometry.weyl_apply(base.pauli, base.metric, base.spinor),
        )
    )
    after = np.real(
        np.einsum(
            "...i,...i->...",
            np.conj(xi2.values),
            geometry.weyl_apply(base.pauli, base.metric, xi2),
        )
    )
    norm_dev = float(np.abs(xi2.norm() - base.spinor.norm()).max())
    conj = charge_conjugate(base.spinor)
    s_conj = geometry.dirac_action(base.pauli, base.metric, conj)
    return SuiteResult(
        name="rigid",
        tolerance=tol,
        residuals={
            "density_drift": float(np.abs(after - before).max()),
            "norm_drift": norm_dev,
            "charge_conjugation_action_drift": abs(s_conj - base.action),
        },
    )


def torsion_suite(spec: ProblemSpec, rng: np.random.Generator) -> SuiteResult:
    """Torsion-spinor identity and agreement of the two routes to b."""
    tol = spec.tol("suite_torsion", 1e-6)
    res = analyze_problem(spec)
    return SuiteResult(
        name="torsion",
        tolerance=tol,
        residuals={
            "identity_max_residual": res.torsion_identity_max,
            "route_difference": abs(res.coeff_b_action - res.coeff_b_torsion),
        },
    )


def subprincipal_suite(spec: ProblemSpec, rng: np.random.Generator) -> SuiteResult:
    """Zero subprincipal symbol, and the closed form for gauged operators."""
    tol = spec.tol("suite_subprincipal", 1e-10)
    op = operator_from_symbol(spec.symbol)
    zero_res = subprincipal(op).coeff_scale
    r_field = random_su2_gauge(rng)
    conj = conjugate_operator(op, r_field)
    direct = subprincipal(conj)
    closed = conjugation_subprincipal(spec.symbol, r_field)
    diff = (direct - closed).coeff_scale
    return SuiteResult(
        name="subprincipal",
        tolerance=tol,
        residuals={"zero_subprincipal": zero_res, "closed_form_difference": diff},
    )


_SUITES = {
    "conformal": conformal_suite,
    "su2": su2_suite,
    "rigid": rigid_suite,
    "torsion": torsion_suite,
    "subprincipal": subprincipal_suite,
}


def run_suites(spec: ProblemSpec, names, seed: int = 42) -> list[SuiteResult]:
    """Run the named suites (or all) with a seeded generator."""
    if isinstance(names, str):
        names = SUITE_NAMES if names == "all" else (names,)
    results = []
    for name in names:
        if name not in _SUITES:
            raise ValueError("unknown suite '%s' (choose from %s)" % (name, ", ".join(SUITE_NAMES)))
        rng = np.random.default_rng([seed, SUITE_NAMES.index(name)])
        results.append(_SUITES[name](spec, rng))
    return results
