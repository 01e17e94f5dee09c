#include "lpvlk/vehicle_model.hpp"

#include <algorithm>
#include <cmath>

namespace lpvlk {

void VehicleParams::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw DomainError(std::string("VehicleParams: ") + name + " must be strictly positive");
        }
    };
    positive(m, "m");
    positive(m_s, "m_s");
    positive(I_z, "I_z");
    positive(I_x, "I_x");
    positive(l_f, "l_f");
    positive(l_r, "l_r");
    positive(L, "L");
    positive(h_rc, "h_rc");
    positive(K_roll, "K_roll");
    positive(C_roll, "C_roll");
    positive(C_af0, "C_af0");
    positive(C_ar0, "C_ar0");
    positive(g, "g");
    if (phi_max < 0.0 || !std::isfinite(phi_max)) {
        throw DomainError("VehicleParams: phi_max must be non-negative");
    }
    if (!(K_roll > m_s * g * h_rc)) {
        throw DomainError("VehicleParams: K_roll must exceed m_s*g*h_rc (roll spring must dominate gravity)");
    }
}

double roll_derivative(const RollState& state, double a_y, const VehicleParams& p,
                       bool small_angle) {
    const double grav = small_angle ? p.g * state.phi : p.g * std::sin(state.phi);
    return p.m_s * p.h_rc * (a_y + grav) / p.I_x
           - (p.K_roll / p.I_x) * state.phi
           - (p.C_roll / p.I_x) * state.phi_dot;
}

double desired_speed(double R, const VehicleParams& p) {
    if (!(R > 0.0)) {
        throw DomainError("desired_speed: turn radius must be positive");
    }
    const double radicand = R * (p.K_roll - p.m_s * p.g * p.h_rc) * p.phi_max / (p.m_s * p.h_rc);
    if (radicand < 0.0) {
        throw DomainError("desired_speed: negative radicand, parameters violate K_roll > m_s*g*h_rc or phi_max >= 0");
    }
    return std::sqrt(radicand);
}

double speed_cap(double kappa, double cruise, const VehicleParams& p, double kappa_eps) {
    if (std::abs(kappa) < kappa_eps) return cruise;
    return std::min(cruise, desired_speed(1.0 / std::abs(kappa), p));
}

LateralCoefficients coefficient_block(double Vx, double C_af, double C_ar,
                                      const VehicleParams& p) {
    if (!(Vx > 0.0)) {
        throw DomainError("coefficient_block: Vx must be positive");
    }
    LateralCoefficients c;
    c.a22 = -(2.0 * C_af + 2.0 * C_ar) / (p.m * Vx);
    c.a23 = -c.a22 * Vx;
    c.a24 = -1.0 - (2.0 * C_af * p.l_f - 2.0 * C_ar * p.l_r) / (p.m * Vx * Vx);
    c.a24p = (c.a24 - 1.0) * Vx;
    c.a42 = -(2.0 * C_af * p.l_f - 2.0 * C_ar * p.l_r) / p.I_z;
    c.a42p = c.a42 / Vx;
    c.a43 = -c.a42;
    c.a44 = -(2.0 * C_af * p.l_f * p.l_f + 2.0 * C_ar * p.l_r * p.l_r) / (p.I_z * Vx);
    return c;
}

AxleStiffness plant_stiffness(const RollState& roll, double /*Vx*/, double a_y,
                              const VehicleParams& p, const StiffnessModel& model) {
    // Steady-state roll moment transferred to the tires: inertial part from
    // a_y plus the weight shift of the rolled sprung mass.
    const double moment = p.m * a_y * model.h_t + p.m_s * p.g * p.h_rc * std::sin(roll.phi);
    const double dF_front = model.front_share * moment / model.track;
    const double dF_rear = (1.0 - model.front_share) * moment / model.track;

    const double wb = p.wheelbase();
    const double half_front_load = 0.5 * p.m * p.g * p.l_r / wb;
    const double half_rear_load = 0.5 * p.m * p.g * p.l_f / wb;

    auto droop = [&](double dF, double half_load, double nominal) {
        const double ratio = dF / half_load;
        const double factor = 1.0 - model.lambda * ratio * ratio;
        return nominal * std::clamp(factor, model.floor, 1.0);
    };
    AxleStiffness s;
    s.C_af = droop(dF_front, half_front_load, p.C_af0);
    s.C_ar = droop(dF_rear, half_rear_load, p.C_ar0);
    return s;
}

}  // namespace lpvlk
