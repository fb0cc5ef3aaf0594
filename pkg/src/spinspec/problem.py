"""Problem descriptions: JSON serialization of symbol, reference and weight.

A problem file stores the Fourier coefficients of the three coefficient
matrices (keys "p1", "p2", "p3" for the matrices multiplying each momentum
component), optionally a reference symbol of the same shape, and the weight.
Matrix entries are given as {"k": [k1,k2,k3], "re": [[..]], "im": [[..]]};
only one of each +/-k pair is stored, the partner being implied by pointwise
Hermiticity (c_{-k} = c_k^dagger, and conj for the scalar weight).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .fields import MatrixField, TrigPoly
from .symbols import PrincipalSymbol

_COMPONENT_KEYS = ("p1", "p2", "p3")
_PAIR_TOL = 1e-12


def _canonical(k: tuple[int, int, int]) -> bool:
    """True for the representative of a +/-k pair (first nonzero positive)."""
    for v in k:
        if v > 0:
            return True
        if v < 0:
            return False
    return True  # k = 0


def _matrix_to_entries(m: MatrixField) -> list[dict]:
    out = []
    for k, c in sorted(m.coefficient_map().items()):
        if not _canonical(k):
            continue
        out.append(
            {
                "k": list(k),
                "re": np.real(c).tolist(),
                "im": np.imag(c).tolist(),
            }
        )
    return out


def _matrix_from_entries(entries, label: str) -> MatrixField:
    coeffs: dict[tuple[int, int, int], np.ndarray] = {}
    for item in entries:
        try:
            k = tuple(int(v) for v in item["k"])
            re = np.asarray(item.get("re", np.zeros((2, 2))), dtype=float)
            im = np.asarray(item.get("im", np.zeros((2, 2))), dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError("%s: malformed coefficient entry (%s)" % (label, exc))
        if len(k) != 3 or re.shape != (2, 2) or im.shape != (2, 2):
            raise ValidationError("%s: coefficient entry has wrong shape" % label)
        c = re + 1j * im
        if not np.isfinite(c).all():
            raise ValidationError("%s: non-finite coefficient at k=%s" % (label, list(k)))
        if k in coeffs:
            raise ValidationError("%s: duplicate coefficient at k=%s" % (label, list(k)))
        coeffs[k] = c

    scale = max((np.abs(c).max() for c in coeffs.values()), default=0.0)
    closed: dict[tuple[int, int, int], np.ndarray] = {}
    for k, c in coeffs.items():
        mk = (-k[0], -k[1], -k[2])
        partner = c.conj().T
        if mk in coeffs:
            if np.abs(coeffs[mk] - partner).max() > _PAIR_TOL * max(scale, 1.0):
                raise ValidationError(
                    "%s: entries at k=%s and -k are inconsistent with Hermiticity" % (label, list(k))
                )
        closed.setdefault(k, c)
        closed.setdefault(mk, partner)
    for k, c in closed.items():
        if abs(np.trace(c)) > _PAIR_TOL * max(scale, 1.0):
            raise ValidationError("%s: coefficient at k=%s is not trace-free" % (label, list(k)))

    return MatrixField(
        [
            [
                TrigPoly({k: c[i, j] for k, c in closed.items() if c[i, j] != 0.0})
                for j in range(2)
            ]
            for i in range(2)
        ]
    )


def _weight_to_entries(w: TrigPoly) -> list[dict]:
    out = []
    for k, c in sorted(w.coeffs.items()):
        if not _canonical(k):
            continue
        out.append({"k": list(k), "re": float(np.real(c)), "im": float(np.imag(c))})
    return out


def _weight_from_entries(entries) -> TrigPoly:
    coeffs: dict[tuple[int, int, int], complex] = {}
    for item in entries:
        try:
            k = tuple(int(v) for v in item["k"])
            c = complex(float(item.get("re", 0.0)), float(item.get("im", 0.0)))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError("weight: malformed coefficient entry (%s)" % exc)
        if len(k) != 3 or not np.isfinite([c.real, c.imag]).all():
            raise ValidationError("weight: bad coefficient at %s" % (item,))
        if k in coeffs:
            raise ValidationError("weight: duplicate coefficient at k=%s" % list(k))
        coeffs[k] = c
    scale = max((abs(c) for c in coeffs.values()), default=0.0)
    closed: dict[tuple[int, int, int], complex] = {}
    for k, c in coeffs.items():
        mk = (-k[0], -k[1], -k[2])
        partner = np.conj(c)
        if mk in coeffs and abs(coeffs[mk] - partner) > _PAIR_TOL * max(scale, 1.0):
            raise ValidationError("weight: entries at k=%s and -k break real-valuedness" % list(k))
        closed.setdefault(k, c)
        closed.setdefault(mk, partner)
    return TrigPoly(closed)


@dataclass
class ProblemSpec:
    """Symbol, optional reference symbol, weight, and solver settings."""

    symbol: PrincipalSymbol
    reference: PrincipalSymbol | None = None
    weight: TrigPoly = field(default_factory=lambda: TrigPoly.const(1.0))
    truncation_m: int = 4
    grid: int = 32
    tolerances: dict = field(default_factory=dict)

    def tol(self, name: str, default: float) -> float:
        return float(self.tolerances.get(name, default))

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        out = {
            "symbol": {
                key: _matrix_to_entries(self.symbol.components[a])
                for a, key in enumerate(_COMPONENT_KEYS)
            },
            "weight": _weight_to_entries(self.weight),
            "truncation_M": self.truncation_m,
            "grid": self.grid,
        }
        if self.reference is not None:
            out["reference_symbol"] = {
                key: _matrix_to_entries(self.reference.components[a])
                for a, key in enumerate(_COMPONENT_KEYS)
            }
        if self.tolerances:
            out["tolerances"] = dict(self.tolerances)
        return out

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def from_dict(cls, data: dict) -> "ProblemSpec":
        if not isinstance(data, dict):
            raise ValidationError("problem file must contain a JSON object")
        if "symbol" not in data:
            raise ValidationError("missing 'symbol' section")

        def load_symbol(section, label) -> PrincipalSymbol:
            if not isinstance(section, dict):
                raise ValidationError("%s: expected an object with keys p1, p2, p3" % label)
            comps = []
            for key in _COMPONENT_KEYS:
                if key not in section:
                    raise ValidationError("%s: missing component '%s'" % (label, key))
                comps.append(_matrix_from_entries(section[key], "%s.%s" % (label, key)))
            try:
                return PrincipalSymbol(comps, check=True, tol=1e-10)
            except ValueError as exc:
                raise ValidationError("%s: %s" % (label, exc))

        symbol = load_symbol(data["symbol"], "symbol")
        reference = None
        if data.get("reference_symbol") is not None:
            reference = load_symbol(data["reference_symbol"], "reference_symbol")

        weight = TrigPoly.const(1.0)
        if "weight" in data and data["weight"] is not None:
            weight = _weight_from_entries(data["weight"])
            if not weight.is_real(1e-12):
                raise ValidationError("weight is not real-valued")

        m = int(data.get("truncation_M", 4))
        grid = int(data.get("grid", 32))
        if grid < 4:
            raise ValidationError("grid size must be at least 4")
        if m < 0:
            raise ValidationError("truncation_M must be nonnegative")
        tolerances = data.get("tolerances", {}) or {}
        if not isinstance(tolerances, dict):
            raise ValidationError("'tolerances' must be an object")

        spec = cls(
            symbol=symbol,
            reference=reference,
            weight=weight,
            truncation_m=m,
            grid=grid,
            tolerances={str(k): float(v) for k, v in tolerances.items()},
        )
        wmin = float(weight.evaluate(max(grid, 2 * weight.max_degree + 1)).real.min())
        if wmin <= 0.0:
            raise ValidationError("weight is not positive (min %.3e on the grid)" % wmin)
        return spec

    @classmethod
    def load(cls, path) -> "ProblemSpec":
        try:
            data = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise ValidationError("problem file not found: %s" % path)
        except json.JSONDecodeError as exc:
            raise ValidationError("problem file is not valid JSON: %s" % exc)
        return cls.from_dict(data)
