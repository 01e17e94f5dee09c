#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "lpvlk/lmi.hpp"
#include "lpvlk/polytope.hpp"

namespace lpvlk {

struct SynthesisConfig {
    double alpha = 0.3;        // certified closed-loop decay rate [1/s]
    double decay_boost = 2.2;  // extra decay targeted by the gain LMIs; the
                               // surplus absorbs the tau*gamma^2 robustness terms
    double gamma = 0.0;        // perturbation Lipschitz bound [1/s]
    double gain_cap = 60.0;    // max row norm of any vertex gain
    double margin_scale = 1e-7;
    bool printed_gamma_block = false;  // use -gamma*I instead of -tau*I in Phi
    int lmi_budget = 20000;    // iterations per solver start
};

// Certificate of Theorem-1 style robust stability for a set of vertex gains.
struct SynthesisResult {
    std::vector<Eigen::RowVector4d> K;  // one gain per vertex
    Eigen::Matrix4d P = Eigen::Matrix4d::Zero();
    double alpha = 0.0;
    double gamma = 0.0;
    double tau = 0.0;
    double eps_def = 0.0;          // margin the certificate was checked against
    std::vector<double> margins;   // max eigenvalue of each Phi constraint
    double worst_margin = 0.0;
    std::string provenance;        // hash of (reduction, polytope) artifacts
};

struct LtiBaseline {
    Eigen::RowVector4d K = Eigen::RowVector4d::Zero();
    double Vx_design = 50.0 / 3.6;
    double C_af = 0.0;  // mean stiffness used for the frozen design model
    double C_ar = 0.0;
};

// Quadratic stabilization with a shared dual Lyapunov variable: finds Y > 0
// and M_p with A_p Y + Y A_p' + B_p M_q + M_q' B_p' + alpha_s Y < 0 for all
// p <= q (cross pairs symmetrized), then K_p = M_p Y^{-1}. alpha_s is
// cfg.alpha + cfg.decay_boost; the boost is halved until the gain cap holds.
std::pair<std::vector<Eigen::RowVector4d>, Eigen::Matrix4d>
synthesize_vertex_gains(const std::vector<LpvSystem>& vertex_systems, const SynthesisConfig& cfg);

std::pair<std::vector<Eigen::RowVector4d>, Eigen::Matrix4d>
synthesize_vertex_gains(const Polytope& poly, const SynthesisConfig& cfg);

// Solves the Phi_pp < 0, Phi_pq + Phi_qp < 0 conditions for P and tau at the
// given gains and cfg.gamma, and returns the certificate with per-constraint
// margins re-checked by eig_extreme. Throws SynthesisError naming the worst
// vertex pair when no certificate is found.
SynthesisResult verify_theorem1(const Polytope& poly, const std::vector<Eigen::RowVector4d>& K,
                                const SynthesisConfig& cfg);

// Empirical bound on the reconstruction perturbation: 99th percentile of
// ||dA(theta) x + dB(theta) K(theta_hat) x|| over training samples and random
// unit states, inflated by 25%.
double estimate_gamma(const Trajectory& traj, const PcaReduction& reduction,
                      const Polytope& poly, const std::vector<Eigen::RowVector4d>& K,
                      unsigned seed = 7);

struct ControlEval {
    double delta = 0.0;      // steering angle [rad], saturated
    Eigen::VectorXd xi;      // vertex weights used
    bool out_of_hull = false;
    bool saturated = false;
};

// Gain-scheduled state feedback delta = (sum_p xi_p K_p) x.
ControlEval scheduled_control(const LateralState& x, const SchedulingVector& theta_meas,
                              const PcaReduction& reduction, const Polytope& poly,
                              const std::vector<Eigen::RowVector4d>& K, double delta_max);

// Fixed-gain baseline designed at Vx_design with the mean stiffness of the
// training trajectory, using the same synthesis machinery on one vertex.
LtiBaseline lti_gain(const VehicleParams& params, const Trajectory& training,
                     const SynthesisConfig& cfg, double Vx_design = 50.0 / 3.6);

struct PdConfig {
    double kp = 0.8;
    double kd = 0.05;
    double a_min = -4.0;  // [m/s^2]
    double a_max = 2.0;
};

// Speed-tracking PD; prev_error carries the last error across calls.
double longitudinal_pd(double Vx, double Vx_des, double& prev_error, double dt,
                       const PdConfig& cfg = {});

}  // namespace lpvlk
