"""Implicit-Euler time stepping of the coupled four-field system.

Each step solves one linear system for the three velocities xi = u_t,
Phi = phi_t, vartheta = w_t and the quasi-static rotation psi, then
recovers the displacements exactly through

    u^n = u^{n-1} + dt*xi^n,
    phi^n = phi^{n-1} + dt*Phi^n,
    w^n = w^{n-1} + dt*vartheta^n.

With test functions (ub, pb, sb, wb) from the discrete space, the four
block rows solved at every step are

  (1) (rho/dt)(xi^n - xi^{n-1}, ub) + alpha*(u^n_x, ub_x)
        - lam*(phi^n - u^n, ub) + mu*(xi^n, ub)            = (f1^n, ub)
  (2) (rho1/dt)(Phi^n - Phi^{n-1}, pb) + K*(phi^n_x + psi^n, pb_x)
        + lam*(phi^n - u^n, pb) + gamma*(Phi^n, pb)
        + beta*(vartheta^n_x, pb)                          = (f2^n, pb)
  (3) b*(psi^n_x, sb_x) + K*(phi^n_x + psi^n, sb)          = (f3^n, sb)
  (4) (rho3/dt)(vartheta^n - vartheta^{n-1}, wb) + delta*(w^n_x, wb_x)
        + beta*(Phi^n_x, wb) + kappa*(vartheta^n_x, wb_x)  = (f4^n, wb)

where the displacement updates have been substituted, leaving a linear
system in (xi^n, Phi^n, psi^n, vartheta^n) alone.  The rotation has no
evolution equation; solving row (3) together with the velocity rows keeps
the beta-coupling blocks exact transposes-up-to-sign of each other, which
is what makes the discrete energy nonincreasing.

The matrix does not depend on the step index, so it is assembled once in a
node-interleaved ordering (xi_i, Phi_i, psi_i, vartheta_i) — band width 6
on either side — and LU-factorized once per (params, mesh, dt).  Optional
sources f1..f4 are evaluated at the new time level, matching the backward-
Euler character of the scheme.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack

from .femesh import (FeFunction, TriDiag, UniformMesh, build_gradient,
                     build_mass, build_stiffness, interpolate, load_vector)
from .model import (InitialData, PhysicalParams, SimulationConfig,
                    SingularSystem, SolverFailure, num_steps, validate,
                    validate_initial_data)

# Band widths of the interleaved ordering: the farthest coupling is
# vartheta_i <-> Phi_{i +/- 1}, six positions away.
_KL = _KU = 6

# Component offsets within a node's group of four unknowns.
_XI, _PHI, _PSI, _VTH = 0, 1, 2, 3

# Relative linear-solve residual accepted by `advance`.
RESIDUAL_TOL = 1e-10


@dataclass
class State:
    """The seven discrete fields at one time level."""

    u: FeFunction
    phi: FeFunction
    psi: FeFunction
    w: FeFunction
    xi: FeFunction        # u_t
    Phi: FeFunction       # phi_t
    vartheta: FeFunction  # w_t
    t: float
    n: int

    @property
    def theta(self) -> FeFunction:
        """Temperature, recovered from the integrated variable as w_t."""
        return self.vartheta


def initial_state(init: InitialData, mesh: UniformMesh) -> State:
    """Nodal interpolation of the initial fields (t = 0, step 0)."""
    return State(u=interpolate(init.u0, mesh), phi=interpolate(init.phi0, mesh),
                 psi=interpolate(init.psi0, mesh), w=interpolate(init.w0, mesh),
                 xi=interpolate(init.u1, mesh), Phi=interpolate(init.phi1, mesh),
                 vartheta=interpolate(init.w1, mesh), t=0.0, n=0)


def psi_rate(prev: State, curr: State) -> FeFunction:
    """Diagnostic rotation rate (psi^n - psi^{n-1}) / dt."""
    return FeFunction(curr.psi.mesh, (curr.psi.values - prev.psi.values)
                      / (curr.t - prev.t))


class BlockSystem:
    """The factorized, time-independent step matrix.

    Immutable after construction; one instance serves every step of a run
    at fixed (params, mesh, dt) and may be shared read-only.
    """

    def __init__(self, params: PhysicalParams, mesh: UniformMesh, dt: float):
        self.params = params
        self.mesh = mesh
        self.dt = float(dt)
        self.n_unknowns = 4 * mesh.n_interior

        p, n = params, mesh.n_interior
        mass = build_mass(mesh)
        stiff = build_stiffness(mesh)
        grad = build_gradient(mesh)
        self.mass, self.stiffness, self.gradient = mass, stiff, grad

        self.blocks: dict[tuple[int, int], TriDiag] = {
            (_XI, _XI): mass.scaled(p.rho / dt + p.mu + p.lam * dt)
                        + stiff.scaled(p.alpha * dt),
            (_XI, _PHI): mass.scaled(-p.lam * dt),
            (_PHI, _XI): mass.scaled(-p.lam * dt),
            (_PHI, _PHI): mass.scaled(p.rho1 / dt + p.gamma + p.lam * dt)
                          + stiff.scaled(p.K * dt),
            (_PHI, _PSI): grad.transpose().scaled(p.K),
            (_PHI, _VTH): grad.scaled(p.beta),
            (_PSI, _PHI): grad.scaled(p.K * dt),
            (_PSI, _PSI): stiff.scaled(p.b) + mass.scaled(p.K),
            (_VTH, _PHI): grad.scaled(p.beta),
            (_VTH, _VTH): mass.scaled(p.rho3 / dt)
                          + stiff.scaled(p.kappa + p.delta * dt),
        }

        ab = np.zeros((2 * _KL + _KU + 1, self.n_unknowns))
        idx = 4 * np.arange(n)
        for (r, c), tri in self.blocks.items():
            ab[_KL + _KU + r - c, idx + c] += tri.main
            ab[_KL + _KU + r - c + 4, idx[:-1] + c] += tri.lower
            ab[_KL + _KU + r - c - 4, idx[1:] + c] += tri.upper

        lu, piv, info = lapack.dgbtrf(ab, _KL, _KU)
        if info > 0:
            raise SingularSystem(f"zero pivot at position {info} during factorization")
        if info < 0:
            raise SolverFailure(f"banded factorization rejected argument {-info}")
        self._lu, self._piv = lu, piv

    def matvec(self, x: np.ndarray) -> np.ndarray:
        """Unfactorized matrix applied to an interleaved vector."""
        y = np.zeros_like(x)
        for (r, c), tri in self.blocks.items():
            y[r::4] += tri.matvec(x[c::4])
        return y

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        x, info = lapack.dgbtrs(self._lu, _KL, _KU, rhs, self._piv)
        if info != 0:
            raise SolverFailure(f"banded back-substitution failed (info={info})")
        return x

    def toarray(self) -> np.ndarray:
        """Dense copy of the step matrix (tests and small diagnostics)."""
        n = self.n_unknowns
        dense = np.zeros((n, n))
        for (r, c), tri in self.blocks.items():
            block = tri.toarray()
            dense[r::4, c::4] = block
        return dense


def assemble(params: PhysicalParams, mesh: UniformMesh, dt: float) -> BlockSystem:
    """Assemble and LU-factorize the step matrix for fixed (params, mesh, dt)."""
    if dt <= 0:
        raise SolverFailure(f"dt must be positive (got {dt})")
    return BlockSystem(params, mesh, dt)


def advance(system: BlockSystem, state: State,
            loads: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray] | None = None,
            ) -> State:
    """One implicit step.  `loads` are the four assembled source vectors
    already evaluated at the new time level."""
    p, dt = system.params, system.dt
    mass, stiff, grad = system.mass, system.stiffness, system.gradient
    u, phi, w = state.u.values, state.phi.values, state.w.values

    rhs = np.zeros(system.n_unknowns)
    spring = mass.matvec(phi - u)  # lam*(phi^{n-1} - u^{n-1}, .) pair
    rhs[_XI::4] = (p.rho / dt) * mass.matvec(state.xi.values) \
        + p.lam * spring - p.alpha * stiff.matvec(u)
    rhs[_PHI::4] = (p.rho1 / dt) * mass.matvec(state.Phi.values) \
        - p.lam * spring - p.K * stiff.matvec(phi)
    rhs[_PSI::4] = -p.K * grad.matvec(phi)
    rhs[_VTH::4] = (p.rho3 / dt) * mass.matvec(state.vartheta.values) \
        - p.delta * stiff.matvec(w)
    if loads is not None:
        f1, f2, f3, f4 = loads
        rhs[_XI::4] += f1
        rhs[_PHI::4] += f2
        rhs[_PSI::4] += f3
        rhs[_VTH::4] += f4

    x = system.solve(rhs)

    rhs_norm = float(np.linalg.norm(rhs))
    residual = float(np.linalg.norm(system.matvec(x) - rhs))
    if residual > RESIDUAL_TOL * max(rhs_norm, 1e-300):
        raise SolverFailure(
            f"linear solve residual {residual:.3e} exceeds "
            f"{RESIDUAL_TOL:.1e} * |rhs| = {RESIDUAL_TOL * rhs_norm:.3e}")

    mesh = system.mesh
    xi_n, Phi_n = x[_XI::4], x[_PHI::4]
    psi_n, vth_n = x[_PSI::4], x[_VTH::4]
    return State(u=FeFunction(mesh, u + dt * xi_n),
                 phi=FeFunction(mesh, phi + dt * Phi_n),
                 psi=FeFunction(mesh, psi_n),
                 w=FeFunction(mesh, w + dt * vth_n),
                 xi=FeFunction(mesh, xi_n),
                 Phi=FeFunction(mesh, Phi_n),
                 vartheta=FeFunction(mesh, vth_n),
                 t=(state.n + 1) * dt, n=state.n + 1)


def run(params: PhysicalParams, config: SimulationConfig, init: InitialData,
        sources=None, observers=()) -> State:
    """Advance N = round(T/dt) steps from the interpolated initial data.

    `sources`, when given, must expose vectorized callables f1..f4 of
    (x, t); they are assembled into load vectors at each new time level.
    Observers are callables invoked with the initial state and with the
    state after every step; recorders decide their own strides.  The run
    is deterministic: identical inputs give bit-identical states.
    """
    validate(params, config)
    validate_initial_data(init, params.L)
    mesh = UniformMesh(config.M, params.L)
    system = assemble(params, mesh, config.dt)

    state = initial_state(init, mesh)
    for obs in observers:
        obs(state)

    total = num_steps(config)
    for k in range(1, total + 1):
        loads = None
        if sources is not None:
            t_new = k * config.dt
            loads = (load_vector(sources.f1, t_new, mesh),
                     load_vector(sources.f2, t_new, mesh),
                     load_vector(sources.f3, t_new, mesh),
                     load_vector(sources.f4, t_new, mesh))
        try:
            state = advance(system, state, loads)
        except SolverFailure as exc:
            raise SolverFailure(f"step {k} (t = {k * config.dt:.9g}): {exc}") from None
        for obs in observers:
            obs(state)
    return state


class ProbeRecorder:
    """Pointwise time series of (u, phi, psi, w) at fixed x locations."""

    def __init__(self, points):
        self.points = tuple(points)
        self.times: list[float] = []
        self.samples: dict[float, list[tuple[float, float, float, float]]] = \
            {x: [] for x in self.points}

    def __call__(self, state: State) -> None:
        self.times.append(state.t)
        for x in self.points:
            self.samples[x].append((float(state.u.at(x)), float(state.phi.at(x)),
                                    float(state.psi.at(x)), float(state.w.at(x))))

    def rows(self, x: float):
        """(t, u, phi, psi, w) rows for one probe point."""
        for t, vals in zip(self.times, self.samples[x]):
            yield (t, *vals)


class SnapshotRecorder:
    """Full nodal fields every `stride` steps (plus the final step)."""

    def __init__(self, stride: int, n_final: int | None = None):
        self.stride = int(stride)
        self.n_final = n_final
        self.times: list[float] = []
        self.fields: list[tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]] = []
        self.nodes: np.ndarray | None = None

    def __call__(self, state: State) -> None:
        due = state.n % self.stride == 0 or state.n == self.n_final
        if not due:
            return
        if self.nodes is None:
            self.nodes = state.u.mesh.nodes.copy()
        self.times.append(state.t)
        self.fields.append((state.u.with_boundary(), state.phi.with_boundary(),
                            state.psi.with_boundary(), state.w.with_boundary()))

    def rows(self):
        """(x, t, u, phi, psi, w) rows, time-major then node-major."""
        for t, (u, phi, psi, w) in zip(self.times, self.fields):
            for i, x in enumerate(self.nodes):
                yield (x, t, u[i], phi[i], psi[i], w[i])
