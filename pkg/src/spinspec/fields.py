"""Trigonometric-polynomial fields on the 3-torus.

Scalars are stored as exact Fourier coefficients, a finite map k -> c_k with
f(x) = sum_k c_k exp(i k.x) and k in Z^3.  Linear operations (sums, products,
partial derivatives, complex conjugation) are carried out exactly on the
coefficients; only genuinely nonlinear pointwise operations (inverses, square
roots, exponentials) go through a uniform grid.  Grid evaluation uses the FFT
and is exact whenever the grid resolves the polynomial degree.
"""

from __future__ import annotations

import numpy as np

Freq = tuple[int, int, int]

_TWO_PI = 2.0 * np.pi


def grid_points(n: int) -> np.ndarray:
    """Uniform 1D grid 2*pi*j/n, j = 0..n-1."""
    return _TWO_PI * np.arange(n) / n


def grid_mesh(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Meshgrid (ij indexing) of the uniform n^3 grid."""
    x = grid_points(n)
    return np.meshgrid(x, x, x, indexing="ij")


def int_freqs(n: int) -> np.ndarray:
    """Integer FFT frequencies for an n-point axis, numpy ordering."""
    return np.fft.fftfreq(n, 1.0 / n).astype(np.int64)


def spectral_derivative(values: np.ndarray, axis: int) -> np.ndarray:
    """Differentiate a periodic grid field along one of the first three axes.

    Works on any array whose leading three axes are the spatial grid.  The
    Nyquist mode (even grids) is zeroed, the standard choice for odd-order
    spectral derivatives.
    """
    n = values.shape[axis]
    k = int_freqs(n).astype(np.float64)
    if n % 2 == 0:
        k[n // 2] = 0.0
    shape = [1] * values.ndim
    shape[axis] = n
    fhat = np.fft.fft(values, axis=axis)
    return np.fft.ifft(fhat * (1j * k.reshape(shape)), axis=axis)


def grid_quadrature(values: np.ndarray) -> complex:
    """Integral over the torus: trapezoidal rule on the periodic grid."""
    n3 = values.shape[0] * values.shape[1] * values.shape[2]
    return values.sum(axis=(0, 1, 2)) * (_TWO_PI**3 / n3)


class TrigPoly:
    """A trigonometric polynomial sum_k c_k exp(i k.x) on the 3-torus."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: dict[Freq, complex] | None = None):
        self.coeffs: dict[Freq, complex] = {}
        if coeffs:
            for k, c in coeffs.items():
                c = complex(c)
                if c != 0.0:
                    self.coeffs[(int(k[0]), int(k[1]), int(k[2]))] = c

    # -- constructors -----------------------------------------------------

    @classmethod
    def const(cls, c) -> "TrigPoly":
        return cls({(0, 0, 0): complex(c)})

    @classmethod
    def zero(cls) -> "TrigPoly":
        return cls()

    @classmethod
    def wave(cls, k: Freq, c=1.0) -> "TrigPoly":
        """Single mode c * exp(i k.x)."""
        return cls({tuple(int(v) for v in k): complex(c)})

    @classmethod
    def cosine(cls, k: Freq, amplitude=1.0, phase=0.0) -> "TrigPoly":
        """Real wave amplitude * cos(k.x + phase)."""
        a = 0.5 * amplitude * np.exp(1j * phase)
        k = tuple(int(v) for v in k)
        mk = tuple(-v for v in k)
        out = cls()
        out._add_coeff(k, a)
        out._add_coeff(mk, np.conj(a))
        return out

    @classmethod
    def from_grid(cls, values: np.ndarray, drop_tol: float = 1e-13) -> "TrigPoly":
        """Recover coefficients of a grid field by forward FFT.

        Coefficients below drop_tol (relative to the largest) are discarded;
        for non-polynomial smooth fields this truncates an exponentially
        small tail.
        """
        n1, n2, n3 = values.shape
        c = np.fft.fftn(values) / (n1 * n2 * n3)
        scale = np.abs(c).max()
        if scale == 0.0:
            return cls()
        keep = np.argwhere(np.abs(c) > drop_tol * scale)
        f1, f2, f3 = int_freqs(n1), int_freqs(n2), int_freqs(n3)
        coeffs = {}
        for i1, i2, i3 in keep:
            coeffs[(int(f1[i1]), int(f2[i2]), int(f3[i3]))] = complex(c[i1, i2, i3])
        return cls(coeffs)

    # -- basic queries -----------------------------------------------------

    def _add_coeff(self, k: Freq, c: complex) -> None:
        c = self.coeffs.get(k, 0.0) + c
        if c == 0.0:
            self.coeffs.pop(k, None)
        else:
            self.coeffs[k] = c

    @property
    def max_degree(self) -> int:
        """Largest |k_alpha| over all stored modes."""
        if not self.coeffs:
            return 0
        return max(max(abs(v) for v in k) for k in self.coeffs)

    @property
    def coeff_scale(self) -> float:
        return max((abs(c) for c in self.coeffs.values()), default=0.0)

    def is_real(self, tol: float = 1e-12) -> bool:
        """Whether c_{-k} = conj(c_k) for all modes, i.e. f is real-valued."""
        scale = max(self.coeff_scale, 1.0)
        for k, c in self.coeffs.items():
            mk = (-k[0], -k[1], -k[2])
            if abs(self.coeffs.get(mk, 0.0) - np.conj(c)) > tol * scale:
                return False
        return True

    def prune(self, drop_tol: float = 0.0) -> "TrigPoly":
        cut = drop_tol * max(self.coeff_scale, 1e-300)
        return TrigPoly({k: c for k, c in self.coeffs.items() if abs(c) > cut})

    def cap_degree(self, dmax: int) -> tuple["TrigPoly", float]:
        """Drop modes with any |k_alpha| > dmax; return (capped, dropped l1 mass)."""
        kept, dropped = {}, 0.0
        for k, c in self.coeffs.items():
            if max(abs(v) for v in k) <= dmax:
                kept[k] = c
            else:
                dropped += abs(c)
        return TrigPoly(kept), dropped

    # -- algebra (exact) ----------------------------------------------------

    def __add__(self, other) -> "TrigPoly":
        if not isinstance(other, TrigPoly):
            other = TrigPoly.const(other)
        out = TrigPoly(dict(self.coeffs))
        for k, c in other.coeffs.items():
            out._add_coeff(k, c)
        return out

    __radd__ = __add__

    def __neg__(self) -> "TrigPoly":
        return TrigPoly({k: -c for k, c in self.coeffs.items()})

    def __sub__(self, other) -> "TrigPoly":
        if not isinstance(other, TrigPoly):
            other = TrigPoly.const(other)
        return self + (-other)

    def __rsub__(self, other) -> "TrigPoly":
        return (-self) + other

    def __mul__(self, other) -> "TrigPoly":
        if isinstance(other, TrigPoly):
            out = TrigPoly()
            for k1, c1 in self.coeffs.items():
                for k2, c2 in other.coeffs.items():
                    out._add_coeff((k1[0] + k2[0], k1[1] + k2[1], k1[2] + k2[2]), c1 * c2)
            return out
        return TrigPoly({k: c * other for k, c in self.coeffs.items()})

    __rmul__ = __mul__

    def conjugate(self) -> "TrigPoly":
        return TrigPoly({(-k[0], -k[1], -k[2]): np.conj(c) for k, c in self.coeffs.items()})

    def real_part(self) -> "TrigPoly":
        return 0.5 * (self + self.conjugate())

    def imag_part(self) -> "TrigPoly":
        return (-0.5j) * (self - self.conjugate())

    def reflect(self) -> "TrigPoly":
        """Pull back under x -> -x, i.e. c_k -> c_{-k}."""
        return TrigPoly({(-k[0], -k[1], -k[2]): c for k, c in self.coeffs.items()})

    def derivative(self, axis: int) -> "TrigPoly":
        """Exact partial derivative: c_k -> i k_axis c_k."""
        return TrigPoly({k: 1j * k[axis] * c for k, c in self.coeffs.items() if k[axis] != 0})

    # -- evaluation -----------------------------------------------------------

    def evaluate(self, n: int) -> np.ndarray:
        """Values on the uniform n^3 grid, always exact.

        When the grid does not resolve the degree, the polynomial is placed
        on the smallest multiple of n that does and subsampled; the returned
        values are the exact point values either way.
        """
        m = n
        need = 2 * self.max_degree + 1
        if m < need:
            m = n * ((need + n - 1) // n)
        c = np.zeros((m, m, m), dtype=complex)
        for k, v in self.coeffs.items():
            c[k[0] % m, k[1] % m, k[2] % m] += v
        vals = np.fft.ifftn(c) * m**3
        if m != n:
            step = m // n
            vals = vals[::step, ::step, ::step]
        return vals

    def __call__(self, x1, x2, x3):
        """Evaluate at arbitrary points by direct summation (slow path)."""
        out = np.zeros(np.broadcast(x1, x2, x3).shape, dtype=complex)
        for k, c in self.coeffs.items():
            out += c * np.exp(1j * (k[0] * np.asarray(x1) + k[1] * np.asarray(x2) + k[2] * np.asarray(x3)))
        return out

    def allclose(self, other: "TrigPoly", tol: float = 1e-12) -> bool:
        diff = self - other
        scale = max(self.coeff_scale, other.coeff_scale, 1.0)
        return diff.coeff_scale <= tol * scale

    def __repr__(self) -> str:
        return "TrigPoly(%d modes, deg %d)" % (len(self.coeffs), self.max_degree)


class MatrixField:
    """2x2 matrix field with TrigPoly entries."""

    __slots__ = ("entries",)

    def __init__(self, entries):
        e = [[None, None], [None, None]]
        for i in range(2):
            for j in range(2):
                v = entries[i][j]
                e[i][j] = v if isinstance(v, TrigPoly) else TrigPoly.const(v)
        self.entries = e

    @classmethod
    def const(cls, m) -> "MatrixField":
        m = np.asarray(m, dtype=complex)
        return cls([[TrigPoly.const(m[i, j]) for j in range(2)] for i in range(2)])

    @classmethod
    def zero(cls) -> "MatrixField":
        return cls.const(np.zeros((2, 2)))

    @classmethod
    def from_grid(cls, values: np.ndarray, drop_tol: float = 1e-13) -> "MatrixField":
        """values has shape (n, n, n, 2, 2)."""
        return cls(
            [[TrigPoly.from_grid(values[..., i, j], drop_tol) for j in range(2)] for i in range(2)]
        )

    def __getitem__(self, ij) -> TrigPoly:
        return self.entries[ij[0]][ij[1]]

    @property
    def max_degree(self) -> int:
        return max(self.entries[i][j].max_degree for i in range(2) for j in range(2))

    @property
    def coeff_scale(self) -> float:
        return max(self.entries[i][j].coeff_scale for i in range(2) for j in range(2))

    def _map(self, f) -> "MatrixField":
        return MatrixField([[f(self.entries[i][j]) for j in range(2)] for i in range(2)])

    def __add__(self, other: "MatrixField") -> "MatrixField":
        return MatrixField(
            [[self.entries[i][j] + other.entries[i][j] for j in range(2)] for i in range(2)]
        )

    def __sub__(self, other: "MatrixField") -> "MatrixField":
        return MatrixField(
            [[self.entries[i][j] - other.entries[i][j] for j in range(2)] for i in range(2)]
        )

    def __neg__(self) -> "MatrixField":
        return self._map(lambda p: -p)

    def __mul__(self, scalar) -> "MatrixField":
        return self._map(lambda p: p * scalar)

    __rmul__ = __mul__

    def __matmul__(self, other: "MatrixField") -> "MatrixField":
        a, b = self.entries, other.entries
        return MatrixField(
            [
                [a[i][0] * b[0][j] + a[i][1] * b[1][j] for j in range(2)]
                for i in range(2)
            ]
        )

    def adjoint(self) -> "MatrixField":
        return MatrixField(
            [[self.entries[j][i].conjugate() for j in range(2)] for i in range(2)]
        )

    def trace(self) -> TrigPoly:
        return self.entries[0][0] + self.entries[1][1]

    def derivative(self, axis: int) -> "MatrixField":
        return self._map(lambda p: p.derivative(axis))

    def reflect(self) -> "MatrixField":
        return self._map(lambda p: p.reflect())

    def prune(self, drop_tol: float = 0.0) -> "MatrixField":
        return self._map(lambda p: p.prune(drop_tol))

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        diff = self - self.adjoint()
        return diff.coeff_scale <= tol * max(self.coeff_scale, 1.0)

    def is_trace_free(self, tol: float = 1e-12) -> bool:
        return self.trace().coeff_scale <= tol * max(self.coeff_scale, 1.0)

    def evaluate(self, n: int) -> np.ndarray:
        """Grid values of shape (n, n, n, 2, 2)."""
        out = np.empty((n, n, n, 2, 2), dtype=complex)
        for i in range(2):
            for j in range(2):
                out[..., i, j] = self.entries[i][j].evaluate(n)
        return out

    def allclose(self, other: "MatrixField", tol: float = 1e-12) -> bool:
        diff = self - other
        scale = max(self.coeff_scale, other.coeff_scale, 1.0)
        return diff.coeff_scale <= tol * scale

    def coefficient_map(self) -> dict[Freq, np.ndarray]:
        """All stored modes as a map k -> 2x2 coefficient matrix."""
        out: dict[Freq, np.ndarray] = {}
        for i in range(2):
            for j in range(2):
                for k, c in self.entries[i][j].coeffs.items():
                    if k not in out:
                        out[k] = np.zeros((2, 2), dtype=complex)
                    out[k][i, j] = c
        return out

    def __repr__(self) -> str:
        return "MatrixField(deg %d)" % self.max_degree


# The flat-space trace-free Hermitian basis used throughout.
PAULI_S = (
    np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
)
