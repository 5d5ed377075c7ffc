"""Periodic grid, Fourier multiplier operators, and discrete invariants.

Everything lives on the uniform collocation grid x_j = -l + j*h of the
interval (-l, l) with h = 2l/n, and spectra are plain DFT coefficients in
numpy's fft ordering, wavenumbers xi_k = pi*k/l for k = -n/2 .. n/2-1.

Operators are diagonal in Fourier space.  Two conventions keep real data
real:

* applying a scalar multiplier to a RealField drops the roundoff/odd-part
  imaginary remainder of the inverse transform, which is exactly the
  Hermitian (even-symbol) projection of the operator;
* symbols built from odd terms (the -lambda2*xi drift, first derivatives)
  zero the unpaired Nyquist mode k = -n/2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .params import LinearPhaseParams, ProblemParams, ValidatedParams, validate


@dataclass(frozen=True)
class Grid:
    """Collocation grid on (-l, l) with an even number of points."""

    l: float = 64.0
    n: int = 4096

    def __post_init__(self):
        if self.n < 8 or self.n % 2 != 0:
            raise ValueError(f"n must be even and >= 8, got {self.n}")
        if self.l <= 0.0:
            raise ValueError(f"l must be positive, got {self.l}")

    @property
    def h(self) -> float:
        return 2.0 * self.l / self.n

    @property
    def x(self) -> np.ndarray:
        return -self.l + self.h * np.arange(self.n)

    @property
    def xi(self) -> np.ndarray:
        """Wavenumbers pi*k/l in fft order; single unpaired mode at -n/2."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.h)

    @property
    def xi_odd(self) -> np.ndarray:
        """Wavenumbers with the Nyquist entry zeroed, for odd symbols."""
        xi = self.xi.copy()
        xi[self.n // 2] = 0.0
        return xi

    def nyquist_index(self) -> int:
        return self.n // 2

    def zero_index(self) -> int:
        """Index of the grid point x = 0."""
        return self.n // 2


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class RealField:
    """Real samples on a grid; fields are immutable values."""

    grid: Grid
    samples: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=float)
        if arr.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} samples, got {arr.shape}")
        object.__setattr__(self, "samples", _freeze(arr))

    def spectrum(self) -> np.ndarray:
        return np.fft.fft(self.samples)


@dataclass(frozen=True)
class ComplexField:
    """Complex samples u = v + i w on a grid."""

    grid: Grid
    samples: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=complex)
        if arr.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} samples, got {arr.shape}")
        object.__setattr__(self, "samples", _freeze(arr))

    def spectrum(self) -> np.ndarray:
        return np.fft.fft(self.samples)

    @property
    def v(self) -> np.ndarray:
        return self.samples.real

    @property
    def w(self) -> np.ndarray:
        return self.samples.imag

    def modulus(self) -> RealField:
        return RealField(self.grid, np.abs(self.samples))


Field = RealField | ComplexField


@dataclass(frozen=True)
class MultiplierOp:
    """Fourier multiplier bound to a grid.

    ``symbol`` maps wavenumbers to values: scalar ops return real values,
    matrix ops a (2, 2, ...) Hermitian stack.  ``values`` caches the symbol
    on the grid modes with the Nyquist rules already applied.
    """

    grid: Grid
    symbol: Callable[[np.ndarray], np.ndarray]
    values: np.ndarray
    tag: str = ""

    @property
    def is_matrix(self) -> bool:
        return self.values.ndim == 3


def fractional_laplacian(grid: Grid, s: float) -> MultiplierOp:
    """(-d_xx)^s with symbol |xi|^{2s}."""
    sym = lambda xi: np.abs(xi) ** (2.0 * s)
    return MultiplierOp(grid, sym, _freeze(sym(grid.xi)), tag=f"(-dxx)^{s}")


def halforder_derivative(grid: Grid, s: float) -> MultiplierOp:
    """|D|^s with symbol |xi|^s (enters the Hamiltonian density)."""
    sym = lambda xi: np.abs(xi) ** s
    return MultiplierOp(grid, sym, _freeze(sym(grid.xi)), tag=f"|D|^{s}")


def m_symbol(params: LinearPhaseParams, grid: Grid) -> MultiplierOp:
    """Profile operator symbol m(xi) = |xi+A|^{2s} - lambda2*xi - |A|^{2s}.

    m(0) = 0 and, with A from the phase-slope relation, m'(0) = 0 and the
    symbol is convex for s > 1/2, so m + a > 0 inside the speed window.
    The grid cache drops the odd drift term at the Nyquist mode.
    """
    s, A, lam2 = params.s, params.A, params.lambda2
    a2s = abs(A) ** (2.0 * s)

    def sym(xi):
        return np.abs(xi + A) ** (2.0 * s) - lam2 * xi - a2s

    vals = np.abs(grid.xi + A) ** (2.0 * s) - lam2 * grid.xi_odd - a2s
    return MultiplierOp(grid, sym, _freeze(vals), tag="m")


def q_symbol(params: ProblemParams | ValidatedParams, grid: Grid) -> MultiplierOp:
    """2x2 Hermitian symbol of the coupled profile operator.

    Q(xi) = [[lambda1 + |xi|^{2s}, -i lambda2 xi],
             [ i lambda2 xi,        lambda1 + |xi|^{2s}]]
    with eigenvalues |xi|^{2s} + lambda1 +- lambda2*xi, strictly positive
    on every mode inside the speed window.
    """
    if isinstance(params, ProblemParams):
        params = validate(params)
    s, lam1, lam2 = params.s, params.lambda1, params.lambda2

    def sym(xi):
        xi = np.asarray(xi, dtype=float)
        diag = lam1 + np.abs(xi) ** (2.0 * s)
        off = -1j * lam2 * xi
        return np.array([[diag, off], [np.conj(off), diag]])

    diag = lam1 + np.abs(grid.xi) ** (2.0 * s)
    off = -1j * lam2 * grid.xi_odd
    vals = np.empty((2, 2, grid.n), dtype=complex)
    vals[0, 0] = diag
    vals[0, 1] = off
    vals[1, 0] = np.conj(off)
    vals[1, 1] = diag
    return MultiplierOp(grid, sym, _freeze(vals), tag="Q")


def q_eigenvalues(params: ProblemParams | ValidatedParams, grid: Grid):
    """Eigenvalue pair (lambda_minus, lambda_plus) of Q on the grid modes."""
    if isinstance(params, ProblemParams):
        params = validate(params)
    base = params.lambda1 + np.abs(grid.xi) ** (2.0 * params.s)
    drift = params.lambda2 * grid.xi_odd
    return base - np.abs(drift), base + np.abs(drift)


def apply_multiplier(op: MultiplierOp, f):
    """Apply a multiplier: spectrum(out) = symbol * spectrum(in), per mode.

    Scalar ops act on a single field; the output of a RealField input is
    re-projected onto real samples (Hermitian part of the symbol).  Matrix
    ops act on a (v, w) pair given either as a tuple of RealFields or as a
    ComplexField, returned in kind.
    """
    if op.is_matrix:
        if isinstance(f, ComplexField):
            pair = (RealField(f.grid, f.v), RealField(f.grid, f.w))
            rv, rw = apply_multiplier(op, pair)
            return ComplexField(f.grid, rv.samples + 1j * rw.samples)
        fv, fw = f
        _require_same_grid(op.grid, fv.grid)
        _require_same_grid(op.grid, fw.grid)
        sv, sw = fv.spectrum(), fw.spectrum()
        out_v = np.fft.ifft(op.values[0, 0] * sv + op.values[0, 1] * sw).real
        out_w = np.fft.ifft(op.values[1, 0] * sv + op.values[1, 1] * sw).real
        return RealField(op.grid, out_v), RealField(op.grid, out_w)
    _require_same_grid(op.grid, f.grid)
    out = np.fft.ifft(op.values * f.spectrum())
    if isinstance(f, RealField):
        return RealField(f.grid, out.real)
    return ComplexField(f.grid, out)


def derivative_samples(grid: Grid, samples: np.ndarray) -> np.ndarray:
    """Spectral first derivative; Nyquist zeroed to keep real data real."""
    out = np.fft.ifft(1j * grid.xi_odd * np.fft.fft(samples))
    return out.real if np.isrealobj(samples) else out


def _require_same_grid(g1: Grid, g2: Grid) -> None:
    if g1 != g2:
        raise ValueError(f"grid mismatch: {g1} vs {g2}")


def invariants(u: ComplexField, s: float, sigma: float):
    """Discrete mass, momentum and Hamiltonian of u = v + i w.

    Equal-weight quadrature (trapezoidal on the periodic grid, which is
    spectrally accurate); derivatives and |D|^s evaluated in Fourier space.
    The momentum sign follows the real-pair form (v w_x - w v_x)/2, so
    u = sech(x) e^{iAx} carries momentum +A.
    """
    return mass(u), momentum(u), hamiltonian(u, s, sigma)


def mass(u: ComplexField) -> float:
    g = u.grid
    return 0.5 * g.h * float(np.sum(u.v ** 2 + u.w ** 2))


def momentum(u: ComplexField) -> float:
    g = u.grid
    vx = derivative_samples(g, u.v)
    wx = derivative_samples(g, u.w)
    return 0.5 * g.h * float(np.sum(u.v * wx - u.w * vx))


def hamiltonian(u: ComplexField, s: float, sigma: float) -> float:
    g = u.grid
    sym = np.abs(g.xi) ** s
    dv = np.fft.ifft(sym * np.fft.fft(u.v)).real
    dw = np.fft.ifft(sym * np.fft.fft(u.w)).real
    dens = 0.5 * (dv ** 2 + dw ** 2) - (u.v ** 2 + u.w ** 2) ** (sigma + 1.0) / (
        2.0 * sigma + 2.0
    )
    return g.h * float(np.sum(dens))


# --------------------------------------------------------------------------
# Field snapshot files.  Layout (documented in the README, stable):
#   line 1          : "# fnlswaves-field <version>"
#   header lines    : "# key = value"  (must include field_type, l, n; the
#                     caller's metadata dict is echoed verbatim)
#   sample lines    : one per grid point, "%.17e" columns; one column for
#                     real fields, two (re, im) for complex fields.
# %.17e round-trips float64 exactly, so parse(serialize(f)) == f.
# --------------------------------------------------------------------------

SNAPSHOT_VERSION = 1


def save_field(path, f: Field, metadata: dict | None = None) -> None:
    is_complex = isinstance(f, ComplexField)
    lines = [f"# fnlswaves-field {SNAPSHOT_VERSION}"]
    header = {"field_type": "complex" if is_complex else "real",
              "l": repr(f.grid.l), "n": f.grid.n}
    if metadata:
        header.update(metadata)
    for k, v in header.items():
        lines.append(f"# {k} = {v}")
    if is_complex:
        for z in f.samples:
            lines.append("%.17e %.17e" % (z.real, z.imag))
    else:
        for v in f.samples:
            lines.append("%.17e" % v)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_field(path):
    """Read a snapshot back; returns (field, metadata dict)."""
    meta: dict[str, str] = {}
    rows = []
    with open(path) as fh:
        first = fh.readline().strip()
        if not first.startswith("# fnlswaves-field"):
            raise ValueError(f"{path}: not a field snapshot")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, val = line[1:].partition("=")
                meta[key.strip()] = val.strip()
            else:
                rows.append([float(tok) for tok in line.split()])
    grid = Grid(l=float(meta["l"]), n=int(meta["n"]))
    data = np.asarray(rows)
    if meta["field_type"] == "complex":
        fld: Field = ComplexField(grid, data[:, 0] + 1j * data[:, 1])
    else:
        fld = RealField(grid, data[:, 0])
    return fld, meta
