#pragma once

#include "lpvlk/vehicle_params.hpp"

namespace lpvlk {

// Named coefficients of the lateral dynamic model. Primed entries are the
// speed-scaled forms that appear in the state matrix.
struct LateralCoefficients {
    double a22 = 0.0;
    double a23 = 0.0;   // -a22*Vx
    double a24 = 0.0;
    double a24p = 0.0;  // (a24 - 1)*Vx
    double a42 = 0.0;
    double a42p = 0.0;  // a42/Vx
    double a43 = 0.0;   // -a42
    double a44 = 0.0;
};

// Roll acceleration phi_ddot for the 1-DOF roll model driven by lateral
// acceleration a_y. With small_angle set, sin(phi) is replaced by phi for
// linear-analysis tests.
double roll_derivative(const RollState& state, double a_y, const VehicleParams& params,
                       bool small_angle = false);

// Rollover-limited speed cap for a turn of radius R (steady-state roll at
// phi_max). Throws DomainError for R <= 0 or a negative radicand.
double desired_speed(double R, const VehicleParams& params);

// Curvature-based wrapper: straight segments (|kappa| below kappa_eps) return
// the cruise cap, curved ones min(cruise, desired_speed(1/|kappa|)).
double speed_cap(double kappa, double cruise, const VehicleParams& params,
                 double kappa_eps = 1e-9);

// Coefficients of the lateral model at a frozen operating point.
// Throws DomainError for Vx <= 0.
LateralCoefficients coefficient_block(double Vx, double C_af, double C_ar,
                                      const VehicleParams& params);

// Tire-stiffness droop with lateral load transfer. Replaces the full vehicle
// simulator's tire model: per-axle stiffness droops quadratically with the
// normalized load-transfer ratio and is clamped to [floor*C0, C0].
struct StiffnessModel {
    double lambda = 0.6;       // droop strength
    double floor = 0.5;        // minimum fraction of nominal stiffness
    double track = 1.5;        // track width [m]
    double front_share = 0.55; // front axle share of the roll moment
    double h_t = 0.55;         // effective CG height for load transfer [m]
};

struct AxleStiffness {
    double C_af = 0.0;
    double C_ar = 0.0;
};

AxleStiffness plant_stiffness(const RollState& roll, double Vx, double a_y,
                              const VehicleParams& params, const StiffnessModel& model = {});

}  // namespace lpvlk
