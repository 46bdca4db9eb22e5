"""
coupled_system.py

NEMATIC COLLOID SIMULATION - COUPLED SYSTEM ORCHESTRATOR

PURPOSE:
========
Advances the transformed fluid, director and particle on the fixed annulus.
The system is a mesa Model owning the colloid as an Agent; one Model.step()
is one IMEX step:

    1. director: implicit Laplacian, explicit metric correction, transport
       by v + dY/dt and the harmonic-map reaction term
    2. velocity sub-iterations (default 2):
       a. particle velocities from the hydrodynamic load (Newton-Euler,
          under-relaxed by the added-mass factor)
       b. predictor with implicit Laplacian and explicit metric correction,
          moving-frame, convective, pressure and Ericksen terms; rigid
          Dirichlet data on the inner circle, no-slip on the outer one
       c. pressure projection
    3. flow map advanced with the accepted particle velocities
    4. finiteness and stability checks
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Dict, Any, Optional

import numpy as np
from mesa import Agent, Model

from nemacol.diagnostics.evaluation_engine import DiagnosticsRow, EvaluationEngine
from nemacol.event_engine.event_bus import EventBus
from nemacol.grid.annulus import grad, laplacian, perp
from nemacol.nemacol_defs import Boundary, BoundaryKind, EventType, NonFiniteStateError, StabilityError
from nemacol.operators.stress import stress_transformed, surface_load
from nemacol.operators.transformed_operators import L1, L2, Bop, Gop, Mop, Nop
from nemacol.rigid.rigid_body import PrescribedMotion, RigidBody, RigidState2D, newton_euler_step
from nemacol.solver.implicit import ModalSolver
from nemacol.solver.presets import InitialState, PresetFactory
from nemacol.solver.projection import PressureProjector
from nemacol.solver.scenario import Scenario
from nemacol.solver.system_state import SystemState
from nemacol.transform.flow_map import TransformField, advance_flow, identity_transform

logger = logging.getLogger(__name__)

SourceFn = Callable[[float, TransformField], np.ndarray]


@dataclass
class Forcing:
    """Body sources of the velocity and director equations, in reference-frame components."""

    velocity: Optional[SourceFn] = None
    director: Optional[SourceFn] = None


def added_mass(R_S: float, R_O: float) -> float:
    """Potential-flow added mass of a unit-density disk centred in a circular cylinder."""
    return np.pi * R_S**2 * (R_O**2 + R_S**2) / (R_O**2 - R_S**2)


class ColloidAgent(Agent):
    """The rigid particle; proposes its velocities for each fluid sub-iteration."""

    def __init__(self, model: "CoupledSystem", body: RigidBody, integrator: str, relaxation: float):
        super().__init__(model)
        self.body = body
        self.integrator = integrator
        self.relaxation = relaxation
        self.force = np.zeros(2)
        self.torque = 0.0

    def propose(self, base: RigidState2D, previous: RigidState2D, force, torque, dt: float) -> RigidState2D:
        """Velocities at the end of the step from loads held over [t_n, t_n + dt].

        The pose stays at the start of the step; the flow map carries it forward.
        Only l is under-relaxed: a disk has no rotational added mass, so omega takes the trial.
        """
        self.force, self.torque = np.asarray(force, dtype=float), float(torque)
        trial = newton_euler_step(base, self.force, self.torque, dt, self.body, self.integrator)
        theta = self.relaxation
        l = theta * trial.l + (1.0 - theta) * previous.l
        return RigidState2D(h=base.h, theta_b=base.theta_b, l=l, omega=trial.omega)

    def get_metrics(self) -> Dict[str, Any]:
        return {"force": self.force.tolist(), "torque": self.torque}


class CoupledSystem(Model):
    """Fluid, director and particle advanced together on the reference annulus."""

    def __init__(
        self,
        scenario: Scenario,
        initial: Optional[InitialState] = None,
        forcing: Optional[Forcing] = None,
        motion: Optional[PrescribedMotion] = None,
        event_bus: Optional[EventBus] = None,
        seed: Optional[int] = None,
    ):
        """
        Initialize the coupled system.

        Args:
            scenario: Resolved scenario
            initial: Initial fields (built from the scenario preset when omitted)
            forcing: Manufactured sources for the v and d equations
            motion: Prescribed particle velocities replacing Newton-Euler
            event_bus: Bus receiving STEP_COMPLETED events
            seed: Random seed for the mesa Model (the scheme itself draws no random numbers)
        """
        super().__init__(seed=seed)
        self.scenario = scenario
        self.grid = scenario.annulus
        self.params = scenario.params
        self.dt = scenario.dt
        self.forcing = forcing or Forcing()
        self.motion = motion
        self.event_bus = event_bus or EventBus()
        self.running = True

        cfg = scenario.solver
        self.director_solver = ModalSolver(self.grid, self.dt * self.params.lam / self.params.gamma, BoundaryKind.NEUMANN)
        self.velocity_solver = ModalSolver(self.grid, self.dt * self.params.mu, BoundaryKind.DIRICHLET)
        self.projector = PressureProjector(self.grid, cfg.cg_tol, cfg.cg_maxiter, cfg.validation_tol)

        body = scenario.body
        relaxation = cfg.relaxation
        if relaxation is None:
            relaxation = body.m_S / (body.m_S + added_mass(self.grid.R_S, self.grid.R_O))
        self.colloid = ColloidAgent(self, body, cfg.rigid_integrator, relaxation)
        self.evaluation_engine = EvaluationEngine(self.params, body)

        initial = initial or PresetFactory.create_initial_state(scenario, self.projector)
        transform = identity_transform(self.grid, scenario.cutoff, initial.rigid)
        self.state = SystemState(t=0.0, v=initial.v, p=initial.p, d=initial.d, rigid=initial.rigid, transform=transform)
        self.last_row: DiagnosticsRow = self.evaluation_engine.evaluate(self.state)
        self._inner = self.grid.circle_points(Boundary.INNER)
        self._h_min = min(self.grid.dr, self.grid.R_S * self.grid.dtheta)
        logger.info(
            f"✅ Coupled system initialized: {self.grid.nr}x{self.grid.nt} nodes, dt={self.dt}, "
            f"relaxation={relaxation:.3f}, subiterations={cfg.subiterations}"
        )

    # ---- stages ----

    def _director_step(self, s: SystemState) -> np.ndarray:
        T, grid = s.transform, self.grid
        kappa = self.params.lam / self.params.gamma
        grad_d = grad(s.d, grid)
        if T.flat:
            norm2 = np.sum(grad_d**2, axis=(0, 1))
        else:
            norm2 = np.einsum("ij...,li...,lj...->...", T.g_upper, grad_d, grad_d)
        transport = np.einsum("j...,lj...->l...", T.dtY + s.v, grad_d)
        explicit = kappa * (L2(s.d, T) - laplacian(s.d, grid)) + kappa * norm2[None] * s.d - transport
        if self.forcing.director is not None:
            explicit = explicit + self.forcing.director(s.t, T)
        d_new = self.director_solver.solve(s.d + self.dt * explicit)
        if self.scenario.solver.renormalize_director:
            d_new = d_new / np.linalg.norm(d_new, axis=0)
        return d_new

    def _velocity_rhs(self, s: SystemState, d_new: np.ndarray) -> np.ndarray:
        T, grid, mu = s.transform, self.grid, self.params.mu
        ericksen = Bop(d_new, d_new, T)
        if not T.flat:
            ericksen = np.einsum("ij...,j...->i...", T.JY, ericksen)
        explicit = (
            mu * (L1(s.v, T) - laplacian(s.v, grid))
            - Mop(s.v, T)
            - Nop(s.v, T)
            - Gop(s.p, T)
            - self.params.lam * ericksen
        )
        if self.forcing.velocity is not None:
            explicit = explicit + self.forcing.velocity(s.t, T)
        return s.v + self.dt * explicit

    def surface_load(self, v: np.ndarray, p: np.ndarray, d: np.ndarray, T: TransformField):
        """Force and torque of the fluid on the particle, in the body frame."""
        sigma = stress_transformed(v, p, d, T, self.params, T.pose.Q)
        return surface_load(sigma[:, :, 0, :], self.grid)

    def _interface_data(self, rigid: RigidState2D) -> np.ndarray:
        return rigid.l[:, None] + rigid.omega * perp(self._inner)

    def _check_stability(self, T: TransformField, v: np.ndarray) -> float:
        speed = float(np.max(np.linalg.norm(v + T.dtY, axis=0)))
        cfl = self.dt * speed / self._h_min
        metric = 0.0 if T.flat else float(np.max(np.abs(T.g_upper - np.eye(2).reshape(2, 2, 1, 1))))
        estimate = max(cfl, metric)
        if estimate > self.scenario.solver.cfl_safety:
            raise StabilityError(
                f"explicit stability estimate {estimate:.3f} exceeds {self.scenario.solver.cfl_safety} "
                f"(transport CFL {cfl:.3f}, metric deviation {metric:.3f})"
            )
        return estimate

    # ---- step ----

    def advance(self) -> SystemState:
        """One IMEX step of the coupled system; returns the new state.

        Kernel input errors raised mid-step (non-finite loads or projection input)
        abort the run as NonFiniteStateError.
        """
        try:
            return self._advance()
        except ValueError as e:
            s = self.state
            raise NonFiniteStateError(
                f"step {s.step_index + 1} (t = {s.t + self.dt:.6g}) failed in a numerical kernel: {e}"
            ) from e

    def _advance(self) -> SystemState:
        s = self.state
        cfg = self.scenario.solver
        dt = self.dt
        T = s.transform
        t_next = s.t + dt

        d_new = self._director_step(s)
        rhs_v = self._velocity_rhs(s, d_new)
        if not (np.all(np.isfinite(d_new)) and np.all(np.isfinite(rhs_v))):
            raise NonFiniteStateError(f"non-finite predictor in step {s.step_index + 1} (t = {t_next:.6g})")

        rigid_k = s.rigid
        v_k, p_k = s.v, s.p
        div_max = 0.0
        iterations = 1 if self.motion is not None else cfg.subiterations
        for _ in range(iterations):
            if self.motion is not None:
                l, omega = self.motion(t_next)
                rigid_k = RigidState2D(h=s.rigid.h, theta_b=s.rigid.theta_b, l=l, omega=omega)
            else:
                force, torque = self.surface_load(v_k, p_k, d_new, T)
                rigid_k = self.colloid.propose(s.rigid, rigid_k, force, torque, dt)
            v_star = self.velocity_solver.solve(rhs_v, inner=self._interface_data(rigid_k), outer=0.0)
            result = self.projector.project(v_star, T, dt, s.p)
            v_k, p_k, div_max = result.v, result.p, result.div_max

        invert = (s.step_index + 1) % cfg.inversion_every == 0
        velocities = RigidState2D(h=T.pose.h, theta_b=T.pose.theta_b, l=rigid_k.l, omega=rigid_k.omega)
        transform = advance_flow(T, velocities, dt, cfg.newton_tol, cfg.newton_maxiter, invert=invert)
        rigid_new = RigidState2D(h=transform.pose.h, theta_b=transform.pose.theta_b, l=rigid_k.l, omega=rigid_k.omega)

        new = SystemState(
            t=t_next, v=v_k, p=p_k, d=d_new, rigid=rigid_new, transform=transform, step_index=s.step_index + 1
        )
        new.div_max = div_max
        if not new.is_finite():
            raise NonFiniteStateError(f"non-finite field values after step {new.step_index} (t = {t_next:.6g})")
        self._check_stability(transform, v_k)
        drift = transform.volume_drift()
        if drift > cfg.volume_tol:
            logger.warning(f"⚠️ Volume drift {drift:.2e} of the flow map above {cfg.volume_tol:.1e}")
        return new

    def step(self) -> None:
        """Execute a single simulation step and publish its diagnostics."""
        new = self.advance()
        self.state = new
        self.last_row = self.evaluation_engine.evaluate(new)
        self.event_bus.publish(EventType.STEP_COMPLETED, row=self.last_row, state=new)
        logger.debug(f"step {new.step_index}: t={new.t:.6g}, E={self.last_row.E:.6e}, div={new.div_max:.2e}")

    def get_metrics(self) -> Dict[str, Any]:
        return {"step": self.state.step_index, "t": self.state.t, "colloid": self.colloid.get_metrics()}
