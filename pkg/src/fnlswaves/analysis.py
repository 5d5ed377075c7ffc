"""Post-processing of computed profiles: decay fits, symmetry and tail
diagnostics, and speed-amplitude scans.

The waves decay algebraically like |x|^{-(2s+1)}, so log|rho| against
log|x| is asymptotically a line of slope -(2s+1); an exponentially decaying
profile (the s=1 soliton) steepens without bound across sub-windows, which
is what the plausibility flag looks for.  Near the limiting speed the decay
stops being monotone and the tails develop small symmetric oscillations;
those register as sign changes of the tail derivative.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .params import ProblemParams, ValidatedParams, Kind, validate
from .petviashvili import SolveReport, SolverConfig, initial_iterate, solve_coupled, solve_scalar
from .spectral import ComplexField, Grid, RealField, derivative_samples

# decay-fit plausibility thresholds
SLOPE_SPREAD_LIMIT = 0.3  # max sub-window slope spread for algebraic decay
FIT_RMS_LIMIT = 0.25  # max rms residual of the log-log line


@dataclass(frozen=True)
class DecayFit:
    window: tuple
    slope: float
    intercept: float
    fit_rms: float
    subwindow_slopes: tuple
    model_ok: bool
    points: int


def _tail_values(profile) -> np.ndarray:
    if isinstance(profile, ComplexField):
        return np.abs(profile.samples)
    return np.asarray(profile.samples)


def decay_slope(profile, window=None) -> DecayFit:
    """Least-squares slope of log|rho| vs log|x| over the tail window.

    The profile must be centered; the window defaults to
    [0.15 l, 0.8 l] and must stay within the positive tail, clear of the
    periodic wrap (x_max <= 0.9 l).  model_ok goes false when the windowed
    fit scatters beyond FIT_RMS_LIMIT or the slope drifts across three
    log-spaced sub-windows by more than SLOPE_SPREAD_LIMIT (the signature
    of non-algebraic decay).
    """
    grid = profile.grid
    if window is None:
        window = (0.15 * grid.l, 0.8 * grid.l)
    x_min, x_max = window
    if not 0.0 < x_min < x_max:
        raise ValueError(f"window {window} must satisfy 0 < x_min < x_max")
    if x_max > 0.9 * grid.l:
        raise ValueError(f"window reaches {x_max}, beyond 0.9*l = {0.9 * grid.l}")
    x = grid.x
    vals = _tail_values(profile)
    mask = (x >= x_min) & (x <= x_max) & (vals > 0.0)
    if int(mask.sum()) < 16:
        raise ValueError(f"window holds {int(mask.sum())} usable points, need >= 16")
    lx = np.log(x[mask])
    ly = np.log(vals[mask])
    slope, intercept = np.polyfit(lx, ly, 1)
    rms = float(np.sqrt(np.mean((ly - (slope * lx + intercept)) ** 2)))

    edges = np.exp(np.linspace(np.log(x_min), np.log(x_max), 4))
    subs = []
    for a, b in zip(edges[:-1], edges[1:]):
        m = (x >= a) & (x <= b) & (vals > 0.0)
        if int(m.sum()) >= 4:
            subs.append(float(np.polyfit(np.log(x[m]), np.log(vals[m]), 1)[0]))
    spread = max(subs) - min(subs) if len(subs) >= 2 else np.inf
    ok = rms <= FIT_RMS_LIMIT and spread <= SLOPE_SPREAD_LIMIT
    return DecayFit(
        window=(float(x_min), float(x_max)),
        slope=float(slope),
        intercept=float(intercept),
        fit_rms=rms,
        subwindow_slopes=tuple(subs),
        model_ok=bool(ok),
        points=int(mask.sum()),
    )


def reflect_samples(samples: np.ndarray) -> np.ndarray:
    """Index reflection x -> -x on the periodic grid (x_0 maps to itself)."""
    return np.roll(samples[::-1], 1)


def evenness_defect(profile) -> float:
    """Relative norm of rho minus its reflection; zero for even profiles."""
    vals = _tail_values(profile)
    norm = np.linalg.norm(vals)
    if norm == 0.0:
        return 0.0
    return float(np.linalg.norm(vals - reflect_samples(vals)) / norm)


@dataclass(frozen=True)
class PhasePlane:
    """(rho, rho') pairs for phase plots plus the tail oscillation count."""

    rho: np.ndarray
    rho_x: np.ndarray
    tail_oscillations: int
    tail_window: tuple


def phase_plane(profile, tail_halfwidths: float = 5.0) -> PhasePlane:
    """Pair the profile with its spectral derivative and count tail
    oscillations.

    Oscillations are strict sign changes of d|rho|/dx in the region from
    ``tail_halfwidths`` half-maximum widths out to 0.9 l: zero for a
    monotone decay, positive once the tail wiggles (speeds close to the
    limiting value).  Samples below 1e-12 of the peak are roundoff noise
    of the spectral derivative and are excluded from the count.
    """
    grid = profile.grid
    vals = _tail_values(profile)
    deriv = derivative_samples(grid, vals)
    x = grid.x
    amp = vals.max()
    osc = 0
    lo = hi = 0.0
    if amp > 0.0:
        above = (vals >= 0.5 * amp) & (x >= 0.0)
        half_width = float(x[above].max()) if above.any() else 0.0
        lo, hi = tail_halfwidths * half_width, 0.9 * grid.l
        region = (x > lo) & (x <= hi) & (vals > 1e-12 * amp)
        signs = np.sign(deriv[region])
        signs = signs[signs != 0.0]
        if signs.size:
            osc = int(np.sum(signs[1:] != signs[:-1]))
    return PhasePlane(rho=vals, rho_x=deriv, tail_oscillations=osc, tail_window=(lo, hi))


@dataclass(frozen=True)
class ScanRow:
    lambda2: float
    speed_gap: float  # c(lambda1) - lambda2
    amplitude: float
    iterations: int
    residual: float
    converged: bool


@dataclass(frozen=True)
class ScanResult:
    rows: tuple

    @property
    def all_converged(self) -> bool:
        return all(r.converged for r in self.rows)

    def amplitudes_increase_with_gap(self) -> bool:
        """Strict amplitude monotonicity in the speed gap c(lambda1) - c_s."""
        ordered = sorted(self.rows, key=lambda r: r.speed_gap)
        amps = [r.amplitude for r in ordered]
        return all(b > a for a, b in zip(amps, amps[1:]))


def speed_amplitude_scan(base: ProblemParams, speeds, grid: Grid,
                         cfg: SolverConfig | None = None, workers: int = 1) -> ScanResult:
    """Solve one profile per speed and tabulate max-modulus amplitudes.

    The profile equation follows base.kind: the linear-phase scalar solve,
    or the coupled solve seeded with the quadratic phase.  Rows come back
    ordered by speed; non-converged rows are flagged rather than fatal.
    """
    cfg = cfg or SolverConfig()
    speeds = sorted(float(c) for c in speeds)

    def solve_one(c: float) -> ScanRow:
        p = ProblemParams(s=base.s, sigma=base.sigma, lambda1=base.lambda1,
                          lambda2=c, kind=base.kind)
        if base.kind is Kind.COUPLED:
            seed = initial_iterate(grid, "quadratic")
            rep = solve_coupled(p, grid, cfg, seed=seed)
        else:
            rep = solve_scalar(p, grid, cfg)
        return ScanRow(
            lambda2=c,
            speed_gap=p.limiting_speed() - c,
            amplitude=rep.amplitude,
            iterations=rep.iterations,
            residual=rep.final_residual,
            converged=rep.converged,
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(solve_one, speeds))
    else:
        rows = [solve_one(c) for c in speeds]
    return ScanResult(rows=tuple(rows))
