"""Pseudospectral time-domain solver for the degenerate wave operator.

The operator is applied with spectral x-derivatives and pointwise
coefficient products; the divergence-form term is evaluated as
d_x(a * d_x u) so the structure the energy analysis integrates by parts
against is preserved exactly.  Time stepping is classical fourth-order
Runge-Kutta on the first-order system (u, d_t u), guarded by an explicit
CFL bound tied to sup a.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import grid
from .coefficients import CoefficientSet, run_all_checks
from .errors import CFLError, ConditionError, NumericalBlowupError
from .grid import GridFunction, TWO_PI, same_grid


@dataclass(frozen=True)
class Trajectory:
    """Saved states (u, d_t u) of one solve at uniformly spaced times."""

    times: np.ndarray          # (n_saved,)
    u: np.ndarray              # (n_saved, N) complex
    ut: np.ndarray             # (n_saved, N) complex
    dt: float                  # spacing of `times`
    period: float
    coeffs: CoefficientSet
    solver_dt: float           # integrator step (dt = save_every * solver_dt)

    @property
    def n_saved(self) -> int:
        return self.times.shape[0]

    @property
    def n_points(self) -> int:
        return self.u.shape[1]

    def u_at(self, i) -> GridFunction:
        return GridFunction(self.u[i], self.period)

    def ut_at(self, i) -> GridFunction:
        return GridFunction(self.ut[i], self.period)


def _dx(values, period):
    return grid.derivative_values(values, period, order=1)


def apply_L(cs: CoefficientSet, u: GridFunction, ut2: GridFunction,
            t: float) -> GridFunction:
    """Apply the operator to u(t, .) given its supplied second time derivative.

    Returns ut2 - d_x(a d_x u) + b d_x u + c u with spectral derivatives.
    """
    same_grid(u, ut2)
    x = u.x
    a = cs.a(t, x)
    ux = _dx(u.values, u.period)
    div = _dx(a * ux, u.period)
    vals = ut2.values - div + cs.b(t, x) * ux + cs.c(t, x) * u.values
    return GridFunction(vals, u.period)


@dataclass(frozen=True)
class SpaceTimeFunction:
    """Closed-form u(t, x) with its first and second time derivatives."""

    u: Callable      # (t, x array) -> array
    ut: Callable
    utt: Callable

    def initial_data(self, n_points, period=TWO_PI):
        x = grid.grid_points(n_points, period)
        return (GridFunction(self.u(0.0, x), period),
                GridFunction(self.ut(0.0, x), period))


def cosine_mode(freq=1) -> SpaceTimeFunction:
    """u(t,x) = cos(t) cos(freq*x), the workhorse manufactured solution."""
    return SpaceTimeFunction(
        u=lambda t, x: np.cos(t) * np.cos(freq * x),
        ut=lambda t, x: -np.sin(t) * np.cos(freq * x),
        utt=lambda t, x: -np.cos(t) * np.cos(freq * x),
    )


def manufactured_rhs(cs: CoefficientSet, exact: SpaceTimeFunction) -> Callable:
    """Forcing f(t, x) = L[exact] so that `exact` solves Lu = f.

    The spatial part is the same discrete operator the solver steps, so
    the exact solution satisfies the semi-discrete system identically and
    convergence studies see pure time-integration error.
    """
    def f(t, x):
        period = float(x[1] - x[0]) * x.shape[0]
        uf = GridFunction(np.asarray(exact.u(t, x), dtype=complex), period)
        utt = GridFunction(np.asarray(exact.utt(t, x), dtype=complex), period)
        return apply_L(cs, uf, utt, t).values

    return f


def sup_a(cs: CoefficientSet, n_points, period=TWO_PI, nt=512) -> float:
    x = grid.grid_points(n_points, period)
    worst = 0.0
    for t in np.linspace(0.0, cs.T, nt):
        worst = max(worst, float(np.max(np.real(cs.a(t, x)))))
    return worst


def cfl_limit(cs: CoefficientSet, n_points, period=TWO_PI, c_cfl=0.5) -> float:
    """Largest stable step: c_cfl * dx / sqrt(sup a + 1)."""
    dx = period / n_points
    return c_cfl * dx / np.sqrt(sup_a(cs, n_points, period) + 1.0)


def _dealias_product(f_vals, g_vals):
    """Product via 3/2-rule zero padding (both factors band-limited)."""
    n = f_vals.shape[0]
    m = 3 * n // 2
    out = np.zeros(m, dtype=complex)

    def pad(v):
        spec = np.fft.fft(v)
        padded = np.zeros(m, dtype=complex)
        padded[: n // 2] = spec[: n // 2]
        padded[m - n // 2:] = spec[n // 2:]
        return np.fft.ifft(padded) * (m / n)

    prod = pad(f_vals) * pad(g_vals)
    spec = np.fft.fft(prod) * (n / m)
    out = np.zeros(n, dtype=complex)
    out[: n // 2] = spec[: n // 2]
    out[n // 2:] = spec[m - n // 2:]
    return np.fft.ifft(out)


def solve_cauchy(cs: CoefficientSet, u0: GridFunction, u1: GridFunction,
                 f: Optional[Callable] = None, M: int = 1000,
                 t_end: Optional[float] = None, save_every: int = 1,
                 check: bool = True, force: bool = False,
                 c_cfl: float = 0.5, dealias: bool = False) -> Trajectory:
    """Integrate the Cauchy problem from data (u0, u1) with forcing f.

    ``M`` steps of size t_end/M (t_end defaults to the family's T).  The
    hypothesis checkers run first unless ``force``; a step size above the
    CFL bound is refused outright.  States are recorded every
    ``save_every`` steps (the final time is always included, so M should
    be a multiple of save_every).
    """
    same_grid(u0, u1)
    if t_end is None:
        t_end = cs.T
    if M < 1:
        raise ValueError("need at least one step")
    if check and not force:
        failures = [r for r in run_all_checks(cs, x=u0.x) if not r.verdict]
        if failures:
            ids = ", ".join(r.condition_id for r in failures)
            raise ConditionError(f"coefficient checks failed: {ids}")
    dt = t_end / M
    limit = cfl_limit(cs, u0.n_points, u0.period, c_cfl)
    if dt > limit * (1.0 + 1e-12):
        raise CFLError(f"dt = {dt:.3e} exceeds stability bound {limit:.3e}")

    period = u0.period
    x = u0.x
    zero = np.zeros(u0.n_points, dtype=complex)
    mul = _dealias_product if dealias else (lambda p, q: p * q)

    def rhs(t, u, v):
        a = cs.a(t, x)
        ux = _dx(u, period)
        vdot = _dx(mul(a, ux), period) - mul(cs.b(t, x), ux) - mul(cs.c(t, x), u)
        if f is not None:
            vdot = vdot + f(t, x)
        return v, vdot

    n_saved = M // save_every + 1
    times = np.empty(n_saved)
    us = np.empty((n_saved, u0.n_points), dtype=complex)
    uts = np.empty_like(us)
    u, v = u0.values.copy(), u1.values.copy()
    times[0], us[0], uts[0] = 0.0, u, v
    saved = 1
    for step in range(M):
        t = step * dt
        k1u, k1v = rhs(t, u, v)
        k2u, k2v = rhs(t + dt / 2, u + dt / 2 * k1u, v + dt / 2 * k1v)
        k3u, k3v = rhs(t + dt / 2, u + dt / 2 * k2u, v + dt / 2 * k2v)
        k4u, k4v = rhs(t + dt, u + dt * k3u, v + dt * k3v)
        u = u + dt / 6 * (k1u + 2 * k2u + 2 * k3u + k4u)
        v = v + dt / 6 * (k1v + 2 * k2v + 2 * k3v + k4v)
        if (step % 25 == 24 or step == M - 1) and not (
                np.all(np.isfinite(u.real)) and np.all(np.isfinite(v.real))
                and np.all(np.isfinite(u.imag)) and np.all(np.isfinite(v.imag))):
            raise NumericalBlowupError((step + 1) * dt)
        if (step + 1) % save_every == 0:
            times[saved], us[saved], uts[saved] = (step + 1) * dt, u, v
            saved += 1
    return Trajectory(times[:saved], us[:saved], uts[:saved],
                      dt * save_every, period, cs, dt)


def residual_norm(traj: Trajectory, i, f: Optional[Callable] = None) -> float:
    """|| L u - f || at saved index i, with d_t^2 u from central differences.

    Second-order in the save spacing; endpoints use one-sided stencils.
    """
    d = traj.dt
    if traj.n_saved < 3:
        raise ValueError("need at least three saved states")
    if i == 0:
        ut2 = (-3 * traj.ut[0] + 4 * traj.ut[1] - traj.ut[2]) / (2 * d)
    elif i == traj.n_saved - 1:
        ut2 = (3 * traj.ut[i] - 4 * traj.ut[i - 1] + traj.ut[i - 2]) / (2 * d)
    else:
        ut2 = (traj.ut[i + 1] - traj.ut[i - 1]) / (2 * d)
    lu = apply_L(traj.coeffs, traj.u_at(i), GridFunction(ut2, traj.period),
                 float(traj.times[i]))
    vals = lu.values
    if f is not None:
        vals = vals - f(float(traj.times[i]), traj.u_at(i).x)
    return grid.norm(GridFunction(vals, traj.period))


# ---------------------------------------------------------------------------
# persistence: one CSV per saved state plus a JSON manifest


def save_trajectory(traj: Trajectory, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    cs = traj.coeffs
    manifest = {
        "N": traj.n_points,
        "dt": traj.dt,
        "solver_dt": traj.solver_dt,
        "M": traj.n_saved - 1,
        "period": traj.period,
        "coefficients": {"family": cs.name, "k": cs.k, "gamma": cs.gamma,
                         "C0": cs.C0, "lambda0": cs.lambda0,
                         "Lambda0": cs.Lambda0, "T": cs.T},
        "saved_indices": list(range(traj.n_saved)),
        "times": [float(t) for t in traj.times],
    }
    with open(os.path.join(out_dir, "trajectory.json"), "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
    x = grid.grid_points(traj.n_points, traj.period)
    for i in range(traj.n_saved):
        with open(os.path.join(out_dir, f"state_{i:06d}.csv"), "w",
                  newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["index", "x", "re_u", "im_u", "re_ut", "im_ut"])
            for j in range(traj.n_points):
                writer.writerow([j, grid._fmt(x[j]),
                                 grid._fmt(traj.u[i, j].real),
                                 grid._fmt(traj.u[i, j].imag),
                                 grid._fmt(traj.ut[i, j].real),
                                 grid._fmt(traj.ut[i, j].imag)])


def load_trajectory(out_dir, cs: Optional[CoefficientSet] = None) -> Trajectory:
    """Load a saved trajectory; rebuilds built-in families from the manifest."""
    from .coefficients import builtin_family

    with open(os.path.join(out_dir, "trajectory.json")) as fh:
        manifest = json.load(fh)
    if cs is None:
        p = manifest["coefficients"]
        cs = builtin_family(p["family"], k=p["k"], gamma=p["gamma"],
                            C0=p["C0"], T=p["T"])
    times = np.array(manifest["times"])
    n = manifest["N"]
    us = np.empty((times.size, n), dtype=complex)
    uts = np.empty_like(us)
    for i in range(times.size):
        with open(os.path.join(out_dir, f"state_{i:06d}.csv"), newline="") as fh:
            rows = list(csv.DictReader(fh))
        us[i] = [float(r["re_u"]) + 1j * float(r["im_u"]) for r in rows]
        uts[i] = [float(r["re_ut"]) + 1j * float(r["im_ut"]) for r in rows]
    return Trajectory(times, us, uts, manifest["dt"], manifest["period"],
                      cs, manifest["solver_dt"])
