"""Minimal Polynomial Extrapolation wrapped around fixed-point iterations.

Given kappa+2 consecutive iterates z0..z_{kappa+1} and their differences
u_i = z_{i+1} - z_i, MPE solves

    min over c_0..c_{kappa-1} of || sum_i c_i u_i + u_kappa ||_2,

sets c_kappa = 1, normalizes gamma_i = c_i / sum(c) and returns
sum gamma_i z_i.  The width mw = kappa + 1 controls how many base
iterations feed one extrapolation; mw = 1 disables acceleration.

The driver below uses restarted cycles: run mw base iterations, extrapolate,
flush the window and restart from the extrapolant.  Iterates are flat real
vectors (complex fields enter with real and imaginary parts stacked).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_DEGENERATE_RTOL = 1e-12  # |sum c| below this times the coefficient scale
_COND_LIMIT = 1e12  # normal equations handed to SVD lstsq beyond this


@dataclass
class ExtrapolationWindow:
    """Rolling storage of the kappa+2 iterates one extrapolation needs."""

    kappa: int
    iterates: list = field(default_factory=list)

    def __post_init__(self):
        if self.kappa < 0:
            raise ValueError("kappa must be >= 0")

    @property
    def capacity(self) -> int:
        return self.kappa + 2

    @property
    def full(self) -> bool:
        return len(self.iterates) >= self.capacity

    def push(self, z: np.ndarray) -> None:
        self.iterates.append(np.asarray(z, dtype=float))
        if len(self.iterates) > self.capacity:
            self.iterates.pop(0)

    def reset(self) -> None:
        self.iterates.clear()


def mpe_coefficients(diffs: np.ndarray):
    """Solve the MPE least-squares problem over difference columns.

    diffs has kappa+1 columns u_0..u_kappa.  Returns the gamma weights, or
    None when sum(c) is degenerate and the cycle should fall back to the
    plain iterate.  Normal equations are used while well conditioned, with
    an SVD least-squares fallback otherwise.
    """
    kappa = diffs.shape[1] - 1
    if kappa == 0:
        return np.array([1.0])
    U = diffs[:, :-1]
    rhs = -diffs[:, -1]
    gram = U.T @ U
    gramian_scale = np.trace(gram)
    use_fallback = gramian_scale == 0.0
    if not use_fallback:
        use_fallback = np.linalg.cond(gram) > _COND_LIMIT
    if use_fallback:
        c, *_ = np.linalg.lstsq(U, rhs, rcond=None)
    else:
        c = np.linalg.solve(gram, U.T @ rhs)
    c_full = np.concatenate([c, [1.0]])
    total = c_full.sum()
    if abs(total) < _DEGENERATE_RTOL * np.abs(c_full).sum():
        return None
    return c_full / total


def mpe_extrapolate(window: ExtrapolationWindow):
    """Extrapolated vector from a full window, or None on degeneracy.

    gamma weights sum to one by construction, so fixed points of the base
    iteration are themselves fixed under extrapolation.
    """
    if not window.full:
        raise ValueError(
            f"window holds {len(window.iterates)} iterates, needs {window.capacity}"
        )
    zs = np.asarray(window.iterates)
    gamma = mpe_coefficients(np.diff(zs.T, axis=1))
    if gamma is None:
        return None
    return gamma @ zs[:-1]


@dataclass
class AccelResult:
    """Raw outcome of the accelerated fixed-point loop."""

    z: np.ndarray
    converged: bool
    iterations: int
    residual_history: list
    m_history: list
    cycle_ends: list
    fallbacks: int


def accelerated_iterate(iteration, cfg) -> AccelResult:
    """Drive a fixed-point iteration with restarted-MPE cycles.

    ``iteration`` provides initial() -> z, step(z) -> (z_next, m), and
    diagnostics(z) -> (residual, m).  The residual of every iterate is
    recorded, including each cycle's extrapolant (evaluated on the profile
    equation itself); ``iterations`` counts base applications only.
    """
    mw = cfg.mw
    z = iteration.initial()
    res, m = iteration.diagnostics(z)
    history_r = [res]
    history_m = [m]
    cycle_ends: list[int] = []
    fallbacks = 0
    it = 0
    if res <= cfg.tol:
        return AccelResult(z, True, 0, history_r, history_m, cycle_ends, fallbacks)

    if mw == 1:
        while it < cfg.max_iter:
            z, _ = iteration.step(z)
            it += 1
            _check_finite(z, it)
            res, m = iteration.diagnostics(z)
            history_r.append(res)
            history_m.append(m)
            if res <= cfg.tol:
                return AccelResult(z, True, it, history_r, history_m, cycle_ends, fallbacks)
        return AccelResult(z, False, it, history_r, history_m, cycle_ends, fallbacks)

    window = ExtrapolationWindow(kappa=mw - 1)
    while it < cfg.max_iter:
        window.reset()
        window.push(z)
        for _ in range(mw):
            z, _ = iteration.step(z)
            it += 1
            _check_finite(z, it)
            window.push(z)
            res, m = iteration.diagnostics(z)
            history_r.append(res)
            history_m.append(m)
            if res <= cfg.tol:
                return AccelResult(z, True, it, history_r, history_m, cycle_ends, fallbacks)
            if it >= cfg.max_iter:
                return AccelResult(z, False, it, history_r, history_m, cycle_ends, fallbacks)
        y = mpe_extrapolate(window)
        if y is None:
            fallbacks += 1
            continue
        res, m = iteration.diagnostics(y)
        history_r.append(res)
        history_m.append(m)
        cycle_ends.append(len(history_r) - 1)
        z = y
        if res <= cfg.tol:
            return AccelResult(z, True, it, history_r, history_m, cycle_ends, fallbacks)
    return AccelResult(z, False, it, history_r, history_m, cycle_ends, fallbacks)


def accelerated_solve(iteration, cfg):
    """Run a base solver under MPE acceleration, returning its SolveReport."""
    from .petviashvili import finish_report

    return finish_report(iteration, cfg, accelerated_iterate(iteration, cfg))


class DivergenceError(RuntimeError):
    """The iteration produced NaN or overflow."""


def _check_finite(z: np.ndarray, it: int) -> None:
    if not np.all(np.isfinite(z)):
        raise DivergenceError(
            f"iterate became non-finite at base iteration {it}; "
            "check admissibility of the parameters and the seed"
        )
