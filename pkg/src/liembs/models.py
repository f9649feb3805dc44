"""Concrete rigid body models: free body, pinned body, two-body chain.

Every model picks one group model for its twists:

* ``SEMIDIRECT``: body-fixed twists V = (omega, v), v = R^T rdot. The mass
  matrix couples rotation and translation when the body frame sits off the
  center of mass; gravity is resolved into the body frame each evaluation.
* ``DIRECT_PRODUCT``: mixed twists V = (omega, rdot). The Newton and Euler
  equations decouple, which requires the body frame at the center of mass;
  constructors reject off-center frames for this group model because the
  mass matrix would otherwise depend on the configuration.

Force vectors returned by ``forces`` already include the gyroscopic bias
(the adjoint-transpose term of the Euler-Poincare equations), so the
dynamics layer stays representation-agnostic.
"""

from dataclasses import dataclass

import numpy as np

from .lgt import alpha_map
from .motiongroups import DIRECT_PRODUCT, GROUP_MODELS, SEMIDIRECT
from .rotmaps import cross3, hat


def _vec3(value, name):
    out = np.asarray(value, dtype=float)
    if out.shape != (3,):
        raise ValueError(f"{name} must be a 3-vector, got shape {out.shape}")
    return out


@dataclass(frozen=True)
class BodyParams:
    """Inertial parameters of one rigid body.

    inertia is the diagonal of the rotational inertia about the center of
    mass, in the body frame; com_offset is the body-frame vector from the
    body frame origin to the center of mass.
    """

    mass: float
    inertia: tuple
    com_offset: tuple = (0.0, 0.0, 0.0)
    gravity: tuple = (0.0, 0.0, -9.81)

    def __post_init__(self):
        if self.mass <= 0.0:
            raise ValueError(f"mass must be positive, got {self.mass}")
        if len(self.inertia) != 3 or any(t <= 0.0 for t in self.inertia):
            raise ValueError(
                f"inertia must be three positive diagonal entries, "
                f"got {self.inertia}"
            )


def _mass_block(params, group_model):
    """Constant 6x6 mass matrix of one body in the chosen twist coordinates."""
    m = params.mass
    theta_c = np.diag(params.inertia)
    s = _vec3(params.com_offset, "com_offset")
    out = np.zeros((6, 6))
    if group_model == SEMIDIRECT:
        sh = hat(s)
        out[:3, :3] = theta_c - m * (sh @ sh)
        out[:3, 3:] = m * sh
        out[3:, :3] = -m * sh
        out[3:, 3:] = m * np.eye(3)
    else:
        out[:3, :3] = theta_c
        out[3:, 3:] = m * np.eye(3)
    return out


class _RigidBodySystem:
    """Shared assembly for N-body models under one group model.

    Subclasses add constraints by overriding n_constraints, constraints,
    jacobian, and adotv.
    """

    def __init__(self, body_params, group_model):
        if group_model not in GROUP_MODELS:
            raise ValueError(f"unknown group model {group_model!r}")
        self.group_model = group_model
        self.bodies = tuple(body_params)
        self.n_bodies = len(self.bodies)
        for i, params in enumerate(self.bodies):
            s = _vec3(params.com_offset, "com_offset")
            if group_model == DIRECT_PRODUCT and float(s @ s) > 0.0:
                raise ValueError(
                    f"body {i}: the direct-product (mixed-twist) model needs "
                    "the body frame at the center of mass; move the frame or "
                    "use the semidirect model"
                )
        blocks = [_mass_block(p, group_model) for p in self.bodies]
        self.mass_matrix = np.zeros((6 * self.n_bodies, 6 * self.n_bodies))
        for i, block in enumerate(blocks):
            self.mass_matrix[6 * i : 6 * i + 6, 6 * i : 6 * i + 6] = block
        self._mass_blocks = blocks

    n_constraints = 0

    def forces(self, qs, v, t):
        """Gyroscopic bias plus gravity, stacked over bodies."""
        out = np.empty(6 * self.n_bodies)
        for i, params in enumerate(self.bodies):
            sl = slice(6 * i, 6 * i + 6)
            vi = v[sl]
            omega = vi[:3]
            mu = self._mass_blocks[i] @ vi
            g = np.asarray(params.gravity, dtype=float)
            m = params.mass
            if self.group_model == SEMIDIRECT:
                rot, _ = alpha_map(qs[i])
                g_body = rot.T @ g
                s = np.asarray(params.com_offset, dtype=float)
                out[6 * i : 6 * i + 3] = (
                    cross3(mu[:3], omega)
                    + cross3(mu[3:], vi[3:])
                    + m * cross3(s, g_body)
                )
                out[6 * i + 3 : 6 * i + 6] = cross3(mu[3:], omega) + m * g_body
            else:
                out[6 * i : 6 * i + 3] = cross3(mu[:3], omega)
                out[6 * i + 3 : 6 * i + 6] = m * g
        return out

    def constraints(self, qs):
        return np.zeros(0)

    def jacobian(self, qs):
        return np.zeros((0, 6 * self.n_bodies))

    def adotv(self, qs, v):
        return np.zeros(0)

    def energy(self, qs, v):
        """Kinetic plus gravitational potential energy."""
        v = np.asarray(v, dtype=float)
        total = 0.5 * float(v @ (self.mass_matrix @ v))
        for i, params in enumerate(self.bodies):
            rot, r = alpha_map(qs[i])
            com = r + rot @ np.asarray(params.com_offset, dtype=float)
            total -= params.mass * float(
                np.asarray(params.gravity, dtype=float) @ com
            )
        return total


class FreeRigidBody(_RigidBodySystem):
    """Unconstrained single body; requires the frame at the center of mass."""

    def __init__(self, params, group_model):
        s = _vec3(params.com_offset, "com_offset")
        if float(s @ s) > 0.0:
            raise ValueError(
                "free_rigid_body expects the body frame at the center of mass"
            )
        super().__init__([params], group_model)

    def angular_momentum(self, qs, v):
        """Spatial angular momentum about the world origin."""
        params = self.bodies[0]
        rot, r = alpha_map(qs[0])
        omega = v[:3]
        if self.group_model == SEMIDIRECT:
            rdot = rot @ v[3:]
        else:
            rdot = v[3:]
        return rot @ (np.diag(params.inertia) @ omega) + params.mass * cross3(
            r, rdot
        )


class PinnedBody(_RigidBodySystem):
    """Single body with one point fixed in space through a spherical joint."""

    n_constraints = 3

    def __init__(self, params, pin_point_body, anchor_world, group_model):
        super().__init__([params], group_model)
        self.pin_point_body = _vec3(pin_point_body, "pin_point_body")
        self.anchor_world = _vec3(anchor_world, "anchor_world")

    def constraints(self, qs):
        rot, r = alpha_map(qs[0])
        return r + rot @ self.pin_point_body - self.anchor_world

    def jacobian(self, qs):
        rot, _ = alpha_map(qs[0])
        out = np.zeros((3, 6))
        out[:, :3] = -rot @ hat(self.pin_point_body)
        if self.group_model == SEMIDIRECT:
            out[:, 3:] = rot
        else:
            out[:, 3:] = np.eye(3)
        return out

    def adotv(self, qs, v):
        rot, _ = alpha_map(qs[0])
        omega = v[:3]
        swing = cross3(omega, self.pin_point_body)
        if self.group_model == SEMIDIRECT:
            return rot @ cross3(omega, v[3:] + swing)
        return rot @ cross3(omega, swing)


class TwoBodyChain(_RigidBodySystem):
    """Ground-body1 and body1-body2 spherical joints (six constraint rows)."""

    n_constraints = 6

    def __init__(
        self, params1, params2, joint_points, anchor_world, group_model
    ):
        super().__init__([params1, params2], group_model)
        p_ground, p_joint1, p_joint2 = joint_points
        self.p_ground = _vec3(p_ground, "joint_points[0]")
        self.p_joint1 = _vec3(p_joint1, "joint_points[1]")
        self.p_joint2 = _vec3(p_joint2, "joint_points[2]")
        self.anchor_world = _vec3(anchor_world, "anchor_world")

    def constraints(self, qs):
        rot1, r1 = alpha_map(qs[0])
        rot2, r2 = alpha_map(qs[1])
        return np.concatenate(
            [
                r1 + rot1 @ self.p_ground - self.anchor_world,
                (r1 + rot1 @ self.p_joint1) - (r2 + rot2 @ self.p_joint2),
            ]
        )

    def _point_rows(self, rot, point):
        """Jacobian block of d/dt (r + R point) w.r.t. one body's twist."""
        rows = np.zeros((3, 6))
        rows[:, :3] = -rot @ hat(point)
        if self.group_model == SEMIDIRECT:
            rows[:, 3:] = rot
        else:
            rows[:, 3:] = np.eye(3)
        return rows

    def jacobian(self, qs):
        rot1, _ = alpha_map(qs[0])
        rot2, _ = alpha_map(qs[1])
        out = np.zeros((6, 12))
        out[:3, :6] = self._point_rows(rot1, self.p_ground)
        out[3:, :6] = self._point_rows(rot1, self.p_joint1)
        out[3:, 6:] = -self._point_rows(rot2, self.p_joint2)
        return out

    def _point_curvature(self, rot, point, vi):
        """(d/dt of the point-velocity rows) acting on the body's twist."""
        omega = vi[:3]
        swing = cross3(omega, point)
        if self.group_model == SEMIDIRECT:
            return rot @ cross3(omega, vi[3:] + swing)
        return rot @ cross3(omega, swing)

    def adotv(self, qs, v):
        rot1, _ = alpha_map(qs[0])
        rot2, _ = alpha_map(qs[1])
        v1, v2 = v[:6], v[6:]
        return np.concatenate(
            [
                self._point_curvature(rot1, self.p_ground, v1),
                self._point_curvature(rot1, self.p_joint1, v1)
                - self._point_curvature(rot2, self.p_joint2, v2),
            ]
        )


def free_rigid_body(params, group_model=SEMIDIRECT):
    """Unconstrained rigid body with the frame at the center of mass."""
    return FreeRigidBody(params, group_model)


def pinned_body(
    params, pin_point_body, anchor_world=(0.0, 0.0, 0.0), group_model=SEMIDIRECT
):
    """Rigid body with the body point pin_point_body welded to anchor_world
    through a spherical joint (three constraint equations)."""
    return PinnedBody(params, pin_point_body, anchor_world, group_model)


def two_body_chain(
    params1,
    params2,
    joint_points,
    anchor_world=(0.0, 0.0, 0.0),
    group_model=SEMIDIRECT,
):
    """Two bodies in a chain: ground to body 1, body 1 to body 2.

    joint_points is a triple (ground pin on body 1, chain joint on body 1,
    chain joint on body 2), all in body frames.
    """
    return TwoBodyChain(params1, params2, joint_points, anchor_world, group_model)
