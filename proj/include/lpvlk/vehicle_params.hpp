#pragma once

#include <Eigen/Core>

#include "lpvlk/errors.hpp"

namespace lpvlk {

// Physical constants of the single-track lateral model and the 1-DOF roll
// model. SI units throughout. Defaults describe a mid-size sedan and can be
// overridden via the config file.
struct VehicleParams {
    double m = 1650.0;        // total mass [kg]
    double m_s = 1400.0;      // sprung mass [kg]
    double I_z = 2900.0;      // yaw moment of inertia [kg m^2]
    double I_x = 600.0;       // roll moment of inertia [kg m^2]
    double l_f = 1.2;         // CG to front axle [m]
    double l_r = 1.5;         // CG to rear axle [m]
    double L = 5.0;           // look-ahead distance [m]
    double h_rc = 0.45;       // sprung-mass CG height above roll axis [m]
    double K_roll = 95000.0;  // roll stiffness [N m/rad]
    double C_roll = 6000.0;   // roll damping [N m s/rad]
    double C_af0 = 65000.0;   // nominal front-axle cornering stiffness [N/rad]
    double C_ar0 = 65000.0;   // nominal rear-axle cornering stiffness [N/rad]
    double phi_max = 0.02;    // roll angle ceiling used by the speed cap [rad]
    double g = 9.81;          // gravity [m/s^2]

    double wheelbase() const { return l_f + l_r; }

    // Throws DomainError if any physical invariant is violated. The speed cap
    // formula needs K_roll > m_s*g*h_rc, otherwise its radicand goes negative.
    void validate() const;
};

// Roll angle and roll rate of the sprung mass.
struct RollState {
    double phi = 0.0;      // [rad]
    double phi_dot = 0.0;  // [rad/s]
};

// Lateral error state x = [e_yL, ey_dot, e_psi, psi_dot].
using LateralState = Eigen::Vector4d;

// Road-generated exogenous inputs of the lateral model.
struct RoadSignals {
    double psi_dot_des = 0.0;   // desired yaw rate Vx*kappa [rad/s]
    double heading_diff = 0.0;  // e_psiL - e_psi [rad]
    double kappa = 0.0;         // curvature at the vehicle position [1/m]

    Eigen::Vector2d vec() const { return {psi_dot_des, heading_diff}; }
};

}  // namespace lpvlk
