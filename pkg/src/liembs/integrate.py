"""Fixed-step time integrators on the local-coordinate state equations.

Three schemes share one driver:

* ``MuntheKaasRK4`` — classic RK4 applied to the local model
  ``(Vdot, Xdot) = local_rhs`` restarted from ``X = 0`` every step, with the
  configuration advanced through the transition map;
* ``LocalVectorRK4`` — the same discretization exposed under the name of the
  plain vector-space method it literally is (the restart makes the local
  model an ordinary ODE on R^{6N}, so any one-step tableau applies);
* ``BaselineQuatRK4`` — classical RK4 on the quaternion rate equation
  ``Qdot = 1/2 Q (0, omega)`` with explicit renormalization each step,
  kept as the reference point the chart-based schemes are measured against.

Constraint drift is controlled, when requested, by a post-step projection:
Gauss-Newton on the position constraints moving the configuration through
chart increments, followed by an exact orthogonal velocity projection.
"""

import math
from dataclasses import dataclass

import numpy as np
from numpy.linalg import LinAlgError
from scipy.linalg import cho_factor, cho_solve

from .dynamics import MbsState, constraint_residuals, forward_dynamics, local_rhs
from .errors import (
    ChartBoundary,
    InconsistentState,
    LiembsError,
    NoConvergence,
    SingularKkt,
    StepFailed,
    VariantMismatch,
)
from .lgt import QUAT_POS, apply_lgt_stacked, combo, quat_norm_error, quat_pos
from .motiongroups import DIRECT_PRODUCT, SEMIDIRECT
from .rotmaps import quat_mul

MUNTHE_KAAS_RK4 = "MuntheKaasRK4"
LOCAL_VECTOR_RK4 = "LocalVectorRK4"
BASELINE_QUAT_RK4 = "BaselineQuatRK4"

SCHEMES = (MUNTHE_KAAS_RK4, LOCAL_VECTOR_RK4, BASELINE_QUAT_RK4)

PROJECTION_OFF = "off"
PROJECTION_POSITION_VELOCITY = "position+velocity"

PROJECTION_MODES = (PROJECTION_OFF, PROJECTION_POSITION_VELOCITY)

# Residuals of the initial state must sit below this bound before a run.
_CONSISTENCY_TOL = 1.0e-10


@dataclass(frozen=True)
class IntegratorConfig:
    """Everything a fixed-step run needs besides the model and the state."""

    scheme: str
    combo: object = None
    h: float = 1.0e-3
    t_end: float = 1.0
    projection: str = PROJECTION_OFF
    projection_tol: float = 1.0e-10
    projection_max_iter: int = 20

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(
                f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}"
            )
        if self.projection not in PROJECTION_MODES:
            raise ValueError(
                f"unknown projection mode {self.projection!r}; "
                f"expected one of {PROJECTION_MODES}"
            )
        if not self.h > 0.0:
            raise ValueError("step size h must be positive")
        if self.t_end < 0.0:
            raise ValueError("t_end must be nonnegative")
        if not self.projection_tol > 0.0:
            raise ValueError("projection_tol must be positive")
        if self.projection_max_iter < 1:
            raise ValueError("projection_max_iter must be at least 1")
        if self.scheme != BASELINE_QUAT_RK4:
            combo(self.combo)  # raises ValueError on an unknown id
        elif self.projection != PROJECTION_OFF:
            raise ValueError(
                "the baseline scheme has no chart to project through; "
                "set projection='off'"
            )


@dataclass(frozen=True)
class TrajectoryRecord:
    """Uniformly sampled trajectory with per-step diagnostics.

    Arrays are indexed by record (row k is time t[k]; row count equals
    floor(t_end/h)+1). ``q`` stacks each body's numeric coordinates
    (rotation part first), ``qnorm_err`` holds the per-body quaternion norm
    drift |  ||Q|| - 1 | and is None for axis-angle coordinates. For the
    baseline scheme the drift is measured before renormalization.
    """

    t: np.ndarray
    q: np.ndarray
    v: np.ndarray
    energy: np.ndarray
    gnorm: np.ndarray
    gvnorm: np.ndarray
    qnorm_err: object
    final_state: MbsState
    scheme: str
    combo_id: object = None

    def __len__(self):
        return self.t.size


def _guard_chart(x, n_bodies):
    """Abort the step if any body's local rotation leaves the pi-ball."""
    for i in range(n_bodies):
        rot = x[6 * i : 6 * i + 3]
        norm = math.sqrt(float(rot @ rot))
        if norm > math.pi:
            raise ChartBoundary(
                f"local rotation norm {norm:.6f} exceeds the per-step chart "
                "budget pi; reduce the step size"
            )


def _rk4_local_step(model, cmb, state, h):
    """One RK4 step of the local model restarted at X = 0."""
    qs = state.qs
    v0 = state.V
    t0 = state.t
    n_bodies = model.n_bodies
    x0 = np.zeros(v0.size)

    vd1, xd1 = local_rhs(model, cmb, qs, x0, v0, t0)
    x2 = (0.5 * h) * xd1
    _guard_chart(x2, n_bodies)
    vd2, xd2 = local_rhs(model, cmb, qs, x2, v0 + (0.5 * h) * vd1, t0 + 0.5 * h)
    x3 = (0.5 * h) * xd2
    _guard_chart(x3, n_bodies)
    vd3, xd3 = local_rhs(model, cmb, qs, x3, v0 + (0.5 * h) * vd2, t0 + 0.5 * h)
    x4 = h * xd3
    _guard_chart(x4, n_bodies)
    vd4, xd4 = local_rhs(model, cmb, qs, x4, v0 + h * vd3, t0 + h)

    x_end = (h / 6.0) * (xd1 + 2.0 * xd2 + 2.0 * xd3 + xd4)
    _guard_chart(x_end, n_bodies)
    v_end = v0 + (h / 6.0) * (vd1 + 2.0 * vd2 + 2.0 * vd3 + vd4)
    qs_end = apply_lgt_stacked(cmb, qs, x_end)
    return MbsState(tuple(qs_end), v_end, t0 + h)


def step_munthe_kaas(model, cmb, state, h):
    """Advance one step with RK4 on the restarted local model."""
    return _rk4_local_step(model, combo(cmb), state, h)


def step_local_vector(model, cmb, state, h):
    """Advance one step with vector-space RK4 on the local model.

    The restart at X = 0 turns each step into an ordinary initial-value
    problem on R^{6N}, so the vector-space method and the group method are
    the same computation; this shares the code path with
    :func:`step_munthe_kaas` on purpose.
    """
    return _rk4_local_step(model, combo(cmb), state, h)


def _require_baseline_state(model, state):
    if model.group_model != DIRECT_PRODUCT:
        raise VariantMismatch(
            "the baseline quaternion scheme integrates rdot = v and needs "
            "the direct-product twist convention"
        )
    for q in state.qs:
        if q.kind != QUAT_POS:
            raise VariantMismatch(
                "the baseline quaternion scheme needs QuatPos absolute "
                f"coordinates, got {q.kind!r}"
            )


def _baseline_rates(model, quats, rs, v, t):
    n_bodies = model.n_bodies
    qs = []
    for i in range(n_bodies):
        quat = quats[4 * i : 4 * i + 4]
        unit = quat / math.sqrt(float(quat @ quat))
        qs.append(quat_pos(unit, rs[3 * i : 3 * i + 3]))
    vdot = forward_dynamics(model, MbsState(tuple(qs), v, t))
    qdot = np.empty_like(quats)
    rdot = np.empty_like(rs)
    for i in range(n_bodies):
        omega = v[6 * i : 6 * i + 3]
        quat = quats[4 * i : 4 * i + 4]
        qdot[4 * i : 4 * i + 4] = 0.5 * quat_mul(
            quat, np.array([0.0, omega[0], omega[1], omega[2]])
        )
        rdot[3 * i : 3 * i + 3] = v[6 * i + 3 : 6 * i + 6]
    return vdot, qdot, rdot


def _baseline_step_with_drift(model, state, h):
    """RK4 on (V, Q, r); returns the renormalized state and the per-body
    quaternion norm drift measured before renormalization."""
    _require_baseline_state(model, state)
    n_bodies = model.n_bodies
    quats0 = np.concatenate([q.rot for q in state.qs])
    rs0 = np.concatenate([q.r for q in state.qs])
    v0 = state.V
    t0 = state.t

    vd1, qd1, rd1 = _baseline_rates(model, quats0, rs0, v0, t0)
    vd2, qd2, rd2 = _baseline_rates(
        model,
        quats0 + (0.5 * h) * qd1,
        rs0 + (0.5 * h) * rd1,
        v0 + (0.5 * h) * vd1,
        t0 + 0.5 * h,
    )
    vd3, qd3, rd3 = _baseline_rates(
        model,
        quats0 + (0.5 * h) * qd2,
        rs0 + (0.5 * h) * rd2,
        v0 + (0.5 * h) * vd2,
        t0 + 0.5 * h,
    )
    vd4, qd4, rd4 = _baseline_rates(
        model, quats0 + h * qd3, rs0 + h * rd3, v0 + h * vd3, t0 + h
    )

    quats = quats0 + (h / 6.0) * (qd1 + 2.0 * qd2 + 2.0 * qd3 + qd4)
    rs = rs0 + (h / 6.0) * (rd1 + 2.0 * rd2 + 2.0 * rd3 + rd4)
    v = v0 + (h / 6.0) * (vd1 + 2.0 * vd2 + 2.0 * vd3 + vd4)

    drift = np.empty(n_bodies)
    qs_end = []
    for i in range(n_bodies):
        quat = quats[4 * i : 4 * i + 4]
        norm = math.sqrt(float(quat @ quat))
        drift[i] = abs(norm - 1.0)
        qs_end.append(quat_pos(quat / norm, rs[3 * i : 3 * i + 3]))
    return MbsState(tuple(qs_end), v, t0 + h), drift


def step_baseline_quat(model, state, h):
    """Advance one step with the classical renormalized quaternion RK4."""
    new_state, _ = _baseline_step_with_drift(model, state, h)
    return new_state


def _chart_increment_scale(cmb, n_bodies):
    """Diagonal of the chart differential at zero, stacked over bodies.

    Gauss-Newton corrections move the configuration through
    ``apply_lgt(cmb, q, dX)``; to first order that changes the constraint
    by ``A J dX`` where ``J`` is the coordinate map's differential at the
    origin: the identity for the exponential charts, doubled on the blocks
    a Cayley chart covers (both for the extended-Rodrigues chart, only the
    rotation block when the translation factor is the identity chart).
    """
    if cmb.chart == "exp":
        per_body = np.ones(6)
    elif cmb.group_model == SEMIDIRECT:
        per_body = np.full(6, 2.0)
    else:
        per_body = np.array([2.0, 2.0, 2.0, 1.0, 1.0, 1.0])
    return np.tile(per_body, n_bodies)


def project(model, cmb, state, tol, max_iter):
    """Return the state pulled back onto the constraint manifold.

    Position stage: Gauss-Newton through chart increments until the
    position residual infinity norm drops below tol. Velocity stage: exact
    orthogonal projection of V onto the null space of the Jacobian.
    """
    if model.n_constraints == 0:
        return state
    cmb = combo(cmb)
    qs = list(state.qs)
    scale = _chart_increment_scale(cmb, model.n_bodies)

    iterations = 0
    while True:
        g = model.constraints(qs)
        if float(np.max(np.abs(g))) < tol:
            break
        if iterations >= max_iter:
            raise NoConvergence(
                f"position projection still at |g|={np.max(np.abs(g)):.3e} "
                f"after {max_iter} iterations (tol {tol:.3e})"
            )
        a_chart = model.jacobian(qs) * scale[np.newaxis, :]
        dx = np.linalg.lstsq(a_chart, -g, rcond=None)[0]
        qs = apply_lgt_stacked(cmb, qs, dx)
        iterations += 1

    a = model.jacobian(qs)
    try:
        factor = cho_factor(a @ a.T)
    except LinAlgError as exc:
        raise SingularKkt(
            "constraint Jacobian is rank deficient; cannot project velocity"
        ) from exc
    v = state.V - a.T @ cho_solve(factor, a @ state.V)
    return MbsState(tuple(qs), v, state.t)


def _coords_row(qs):
    return np.concatenate([np.concatenate([q.rot, q.r]) for q in qs])


def integrate(model, config, state0):
    """Run the fixed-step loop and record diagnostics at every step.

    The initial state must satisfy the constraints (position and velocity
    residuals below 1e-10). Failures inside a step are re-raised as
    StepFailed with the step index and time attached.
    """
    baseline = config.scheme == BASELINE_QUAT_RK4
    if baseline:
        cmb = None
        _require_baseline_state(model, state0)
        quat_diag = True
    else:
        cmb = combo(config.combo)
        if cmb.group_model != model.group_model:
            raise VariantMismatch(
                f"combo {cmb.id} uses {cmb.group_model} twists but the "
                f"model is built for {model.group_model}"
            )
        for q in state0.qs:
            if q.kind != cmb.abs_kind:
                raise VariantMismatch(
                    f"combo {cmb.id} transports {cmb.abs_kind} coordinates, "
                    f"got {q.kind!r}"
                )
        quat_diag = cmb.abs_kind == QUAT_POS

    gnorm0, gvnorm0 = constraint_residuals(model, state0)
    if gnorm0 > _CONSISTENCY_TOL or gvnorm0 > _CONSISTENCY_TOL:
        raise InconsistentState(
            f"initial residuals |g|={gnorm0:.3e}, |A V|={gvnorm0:.3e} "
            f"exceed {_CONSISTENCY_TOL:.0e}"
        )

    n_steps = int(math.floor(config.t_end / config.h + 1.0e-9))
    n_records = n_steps + 1
    n_bodies = model.n_bodies

    t_arr = np.empty(n_records)
    q_arr = np.empty((n_records, _coords_row(state0.qs).size))
    v_arr = np.empty((n_records, 6 * n_bodies))
    e_arr = np.empty(n_records)
    g_arr = np.empty(n_records)
    gv_arr = np.empty(n_records)
    qn_arr = np.zeros((n_records, n_bodies)) if quat_diag else None

    state = state0

    def _record(k, drift=None):
        t_arr[k] = state.t
        q_arr[k] = _coords_row(state.qs)
        v_arr[k] = state.V
        e_arr[k] = model.energy(state.qs, state.V)
        g_arr[k], gv_arr[k] = constraint_residuals(model, state)
        if qn_arr is not None:
            if drift is not None:
                qn_arr[k] = drift
            else:
                qn_arr[k] = [abs(quat_norm_error(q)) for q in state.qs]

    _record(0)
    for k in range(n_steps):
        try:
            if baseline:
                state, drift = _baseline_step_with_drift(model, state, config.h)
            else:
                drift = None
                state = _rk4_local_step(model, cmb, state, config.h)
                if config.projection == PROJECTION_POSITION_VELOCITY:
                    state = project(
                        model,
                        cmb,
                        state,
                        config.projection_tol,
                        config.projection_max_iter,
                    )
        except LiembsError as exc:
            raise StepFailed(k, state.t, exc) from exc
        _record(k + 1, drift)

    return TrajectoryRecord(
        t=t_arr,
        q=q_arr,
        v=v_arr,
        energy=e_arr,
        gnorm=g_arr,
        gvnorm=gv_arr,
        qnorm_err=qn_arr,
        final_state=state,
        scheme=config.scheme,
        combo_id=None if baseline else cmb.id,
    )
