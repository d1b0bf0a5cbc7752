# vehicle_model_test.py - 동역학 모델 테스트
import math

import numpy as np
import pytest

from gliderSimulate.errors import ConfigValidationError, GimbalLockError
from gliderSimulate.vehicle_model import (
    ActuatorState, BodyVelocity, EulerAngles, HydroCoefficients, InertiaModel,
    InertialPose, MassConfiguration, VehicleState, body_rates_from_euler_rates,
    euler_rates_from_body_rates, flow_angles, generalized_momentum,
    gravity_buoyancy_wrench, hydrodynamic_wrench, rotation_flow_to_body,
    rotation_inertial_to_body, state_derivative,
)
from gliderSimulate.vehicle_params import DEFAULT_HYDRO, VehicleParams


def _rx(a):
    return np.array([[1, 0, 0], [0, math.cos(a), -math.sin(a)], [0, math.sin(a), math.cos(a)]])


def _ry(a):
    return np.array([[math.cos(a), 0, math.sin(a)], [0, 1, 0], [-math.sin(a), 0, math.cos(a)]])


def _rz(a):
    return np.array([[math.cos(a), -math.sin(a), 0], [math.sin(a), math.cos(a), 0], [0, 0, 1]])


def _random_hydro(rng):
    values = rng.uniform(-5, 5, 12)
    values[0] = abs(values[0]) + 0.1
    return HydroCoefficients.from_array(values)


def _random_state(rng):
    return VehicleState(
        pose=InertialPose(*rng.uniform(-2, 2, 3)),
        angles=EulerAngles(rng.uniform(-1, 1), rng.uniform(-1.2, 1.2), rng.uniform(-3, 3)),
        nu=BodyVelocity(*rng.uniform(-0.5, 0.5, 6)),
    )


def _reference_derivative(state, act, params, extra):
    """식을 그대로 옮긴 독립 구현"""
    phi, th, psi = state.angles.phi, state.angles.theta, state.angles.psi
    u, v, w, p, q, r = state.nu.as_array()
    k = params.hydro
    m = params.mass

    R_ib = _rz(psi) @ _ry(th) @ _rx(phi)
    pose_rate = R_ib @ np.array([u, v, w])
    T = np.array([
        [1, math.sin(phi) * math.tan(th), math.cos(phi) * math.tan(th)],
        [0, math.cos(phi), -math.sin(phi)],
        [0, math.sin(phi) / math.cos(th), math.cos(phi) / math.cos(th)],
    ])
    angle_rate = T @ np.array([p, q, r])

    V2 = u * u + v * v + w * w
    alpha = math.atan2(w, u)
    beta = math.asin(v / math.sqrt(V2)) if V2 > 0 else 0.0
    D = (k.kd0 + k.kd * alpha ** 2) * V2
    L = (k.kl0 + k.kl * alpha) * V2
    SF = k.kbeta * beta * V2
    T1 = (k.kmr * beta + k.kp * p) * V2
    T2 = (k.km0 + k.km * alpha + k.kq * q) * V2
    T3 = (k.kmy * beta + k.kr * r) * V2
    R_bf = _ry(-alpha) @ _rz(beta)
    F_ext = R_bf @ np.array([-D, SF, -L])
    T_ext = R_bf @ np.array([T1, T2, T3])

    k_hat = R_ib.T @ np.array([0.0, 0.0, 1.0])
    r_r = np.array([m.r_r[0], m.r_r[1] + m.rotary_radius * math.sin(act.gamma),
                    m.r_r[2] + m.rotary_radius * math.cos(act.gamma)])
    r_s = np.array([m.r_sx0 + act.delta_rs, m.r_s[1], m.r_s[2]])
    r_b = np.array([m.r_b[0] + act.delta_rb, m.r_b[1], m.r_b[2]])
    grav_f = act.m_b * m.g * k_hat
    grav_t = np.cross((m.m_r * r_r + m.m_s * r_s + act.m_b * r_b) * m.g, k_hat)

    nu = state.nu.as_array()
    h = params.inertia.M @ nu
    P, Q = h[:3], h[3:]
    V, W = nu[:3], nu[3:]
    rhs = np.concatenate([np.cross(P, W) + grav_f + F_ext, np.cross(Q, W) + np.cross(P, V) + grav_t + T_ext])
    nu_dot = np.linalg.solve(params.inertia.M, rhs) + extra
    return np.concatenate([pose_rate, angle_rate, nu_dot])


class TestRotations:
    def test_identity_and_pitch(self):
        np.testing.assert_allclose(rotation_inertial_to_body(EulerAngles()), np.eye(3))
        R = rotation_inertial_to_body(EulerAngles(0.0, math.pi / 2, 0.0))
        np.testing.assert_allclose(R, [[0, 0, 1], [0, 1, 0], [-1, 0, 0]], atol=1e-15)

    def test_matches_axis_composition(self):
        angles = EulerAngles(0.3, 0.2, 0.1)
        R = rotation_inertial_to_body(angles)
        assert np.max(np.abs(R.T @ R - np.eye(3))) < 1e-12
        np.testing.assert_allclose(R, _rz(0.1) @ _ry(0.2) @ _rx(0.3), atol=1e-14)

    def test_random_attitudes_orthonormal(self):
        rng = np.random.default_rng(1)
        for _ in range(1000):
            phi, th, psi = rng.uniform(-math.pi, math.pi, 3)
            for R in (rotation_inertial_to_body(EulerAngles(phi, th, psi)), rotation_flow_to_body(phi, th)):
                assert np.max(np.abs(R.T @ R - np.eye(3))) < 1e-9
                assert abs(np.linalg.det(R) - 1.0) < 1e-9

    def test_flow_rotation_cases(self):
        np.testing.assert_allclose(rotation_flow_to_body(0.0, 0.0), np.eye(3))
        np.testing.assert_allclose(rotation_flow_to_body(math.pi / 2, 0.0),
                                   [[0, 0, -1], [0, 1, 0], [1, 0, 0]], atol=1e-15)


class TestFlowAngles:
    def test_cases(self):
        assert flow_angles(BodyVelocity(u=1.0))[:2] == (0.0, 0.0)
        a = flow_angles(BodyVelocity(u=1.0, w=1.0))
        assert a.alpha == pytest.approx(math.pi / 4)
        b = flow_angles(BodyVelocity(u=1.0, v=1.0))
        assert b.beta == pytest.approx(math.pi / 4)

    def test_stagnant_flag(self):
        result = flow_angles(BodyVelocity())
        assert result.stagnant
        assert (result.alpha, result.beta) == (0.0, 0.0)


class TestEulerRates:
    def test_identity_at_zero(self):
        np.testing.assert_allclose(euler_rates_from_body_rates(EulerAngles(), [1, 2, 3]), [1, 2, 3])
        np.testing.assert_allclose(body_rates_from_euler_rates(EulerAngles(), [1, 2, 3]), [1, 2, 3])

    def test_rolled_ninety(self):
        angles = EulerAngles(math.pi / 2, 0.0, 0.0)
        np.testing.assert_allclose(euler_rates_from_body_rates(angles, [0, 1, 0]), [0, 0, 1], atol=1e-15)
        np.testing.assert_allclose(body_rates_from_euler_rates(angles, [0, 0, 1]), [0, 1, 0], atol=1e-15)

    def test_round_trip(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            angles = EulerAngles(rng.uniform(-3, 3), rng.uniform(-1.4, 1.4), rng.uniform(-3, 3))
            pqr = rng.normal(size=3)
            back = body_rates_from_euler_rates(angles, euler_rates_from_body_rates(angles, pqr))
            assert np.max(np.abs(back - pqr)) < 1e-10

    def test_gimbal_lock(self):
        with pytest.raises(GimbalLockError):
            euler_rates_from_body_rates(EulerAngles(0.0, math.pi / 2 - 1e-4, 0.0), [0, 0, 0])
        with pytest.raises(GimbalLockError):
            body_rates_from_euler_rates(EulerAngles(0.0, -math.pi / 2, 0.0), [0, 0, 0])


class TestWrenches:
    def test_zero_velocity(self):
        wrench = hydrodynamic_wrench(BodyVelocity(), DEFAULT_HYDRO)
        assert not np.any(wrench.as_array())

    def test_pure_surge(self):
        k = DEFAULT_HYDRO
        wrench = hydrodynamic_wrench(BodyVelocity(u=1.0), k)
        np.testing.assert_allclose(wrench.force, [-k.kd0, 0.0, -k.kl0], atol=1e-15)
        np.testing.assert_allclose(wrench.torque, [0.0, k.km0, 0.0], atol=1e-15)

    def test_quadratic_in_speed(self):
        nu = BodyVelocity(0.3, 0.05, 0.1)
        base = hydrodynamic_wrench(nu, DEFAULT_HYDRO)
        doubled = hydrodynamic_wrench(BodyVelocity(0.6, 0.1, 0.2), DEFAULT_HYDRO)
        assert np.linalg.norm(doubled.force) == pytest.approx(4 * np.linalg.norm(base.force), rel=1e-12)

    def test_gravity_cases(self):
        mass = MassConfiguration(r_r=(0, 0, 0), r_s=(0, 0, 0), r_b=(0, 0, 0), rotary_radius=0.0)
        zero = gravity_buoyancy_wrench(EulerAngles(), mass, ActuatorState())
        assert not np.any(zero.as_array())
        level = gravity_buoyancy_wrench(EulerAngles(), mass, ActuatorState(m_b=0.1))
        np.testing.assert_allclose(level.force, [0, 0, 0.1 * mass.g])

    def test_pitched_torque(self):
        mass = MassConfiguration(r_sx0=0.1, rotary_radius=0.0, r_b=(0, 0, 0))
        act = ActuatorState(delta_rs=0.02)
        wrench = gravity_buoyancy_wrench(EulerAngles(0.0, 0.3, 0.0), mass, act)
        # S = [m_s·0.12, 0, 0], k_b = [-sinθ, 0, cosθ] -> τ_y = -S1·g·cosθ
        expected = -mass.m_s * 0.12 * mass.g * math.cos(0.3)
        np.testing.assert_allclose(wrench.torque, [0.0, expected, 0.0], atol=1e-12)

    def test_generalized_momentum(self):
        inertia = InertiaModel.diagonal(2, 3, 4, 5, 6, 7)
        P, Q = generalized_momentum(inertia, BodyVelocity(u=1.0))
        np.testing.assert_allclose(P, [2, 0, 0])
        np.testing.assert_allclose(Q, [0, 0, 0])


class TestStateDerivative:
    def test_equilibrium(self):
        mass = MassConfiguration(r_b=(0, 0, 0))
        params = VehicleParams(mass=mass)
        deriv = state_derivative(VehicleState(), ActuatorState.from_commands(0.0, 0.0, 0.0, 0.2), params)
        assert np.max(np.abs(deriv.as_array())) < 1e-12

    def test_pure_ballast(self):
        mass = MassConfiguration(r_b=(0.1, 0, 0))
        params = VehicleParams(mass=mass, c_b=0.0)
        act = ActuatorState(m_b=0.1)
        deriv = state_derivative(VehicleState(), act, params).nu.as_array()
        S1 = 0.1 * 0.1
        S2 = 0.0
        rhs = np.array([0, 0, 0.1 * mass.g, S2 * mass.g, -S1 * mass.g, 0])
        np.testing.assert_allclose(deriv, params.inertia.M_inv @ rhs, atol=1e-14)

    def test_oracle_equivalence(self):
        rng = np.random.default_rng(3)
        for _ in range(1000):
            mass = MassConfiguration(
                m_total=rng.uniform(5, 20), m_r=rng.uniform(0.5, 3), m_s=rng.uniform(0.5, 3),
                r_r=tuple(rng.uniform(-0.2, 0.2, 3)), r_s=tuple(rng.uniform(-0.2, 0.2, 3)),
                r_b=tuple(rng.uniform(-0.3, 0.3, 3)), r_sx0=rng.uniform(-0.1, 0.1),
                rotary_radius=rng.uniform(0, 0.05),
            )
            A = rng.normal(size=(6, 6))
            inertia = InertiaModel(A @ A.T + 6 * np.eye(6))
            params = VehicleParams(mass=mass, inertia=inertia, hydro=_random_hydro(rng), c_b=0.2)
            state = _random_state(rng)
            act = ActuatorState.from_commands(rng.uniform(-1, 1), rng.uniform(-0.05, 0.05),
                                              rng.uniform(-0.25, 0.25), 0.2)
            extra = rng.normal(scale=0.01, size=6)
            ours = state_derivative(state, act, params, extra).as_array()
            ref = _reference_derivative(state, act, params, extra)
            scale = max(1.0, np.max(np.abs(ref)))
            assert np.max(np.abs(ours - ref)) / scale < 1e-10

    def test_linear_in_each_coefficient(self):
        rng = np.random.default_rng(4)
        state = _random_state(rng)
        act = ActuatorState.from_commands(0.2, 0.01, 0.1, 0.2)
        base = DEFAULT_HYDRO.as_array()
        for i in range(12):
            values = []
            for delta in (0.0, 1.0, 2.0):
                tau = base.copy()
                tau[i] += delta
                params = VehicleParams(hydro=HydroCoefficients.from_array(tau))
                values.append(state_derivative(state, act, params).nu.as_array())
            np.testing.assert_allclose(values[2] - values[1], values[1] - values[0], atol=1e-8)


class TestInvariants:
    def test_hydro_requires_positive_drag(self):
        values = DEFAULT_HYDRO.as_array()
        values[0] = 0.0
        with pytest.raises(ConfigValidationError):
            HydroCoefficients.from_array(values)

    def test_mass_validation_lists_all_errors(self):
        with pytest.raises(ConfigValidationError) as info:
            MassConfiguration(m_total=-1.0, m_s=0.0, r_b=(2.0, 0, 0))
        assert len(info.value.messages) == 3

    def test_inertia_must_be_spd(self):
        with pytest.raises(ConfigValidationError):
            InertiaModel(-np.eye(6))
