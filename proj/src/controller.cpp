#include "lpvlk/controller.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/Dense>

namespace lpvlk {

namespace {

const Eigen::MatrixXd kI4 = Eigen::MatrixXd::Identity(4, 4);

// Shared-Y quadratic stabilization problem for one decay target.
lmi::LmiProblem build_synthesis_problem(const std::vector<LpvSystem>& sys, double decay,
                                        double margin_scale) {
    const int n = static_cast<int>(sys.size());
    lmi::LmiProblem prob;
    const int y = prob.add_symmetric("Y", 4);
    std::vector<int> m_vars;
    for (int p = 0; p < n; ++p) {
        m_vars.push_back(prob.add_rectangular("M" + std::to_string(p), 1, 4));
    }

    // The inequalities are jointly homogeneous in (Y, M), so Y >= I costs no
    // generality and pins the scale.
    const int ypos = prob.add_constraint("Y_pos", 4, lmi::Sense::PositiveDefinite, 1.0);
    {
        lmi::Term t;
        t.var = y;
        t.left = kI4;
        t.right = kI4;
        prob.add_term(ypos, t);
    }

    for (int p = 0; p < n; ++p) {
        for (int q = p; q < n; ++q) {
            const std::string name = "S" + std::to_string(p) + std::to_string(q);
            const int con = prob.add_constraint(name, 4, lmi::Sense::NegativeDefinite,
                                                margin_scale);
            prob.add_symmetrized_term(con, y, sys[p].A, kI4);
            prob.add_symmetrized_term(con, m_vars[q], sys[p].B, kI4);
            double alpha_weight = decay;
            if (p != q) {
                prob.add_symmetrized_term(con, y, sys[q].A, kI4);
                prob.add_symmetrized_term(con, m_vars[p], sys[q].B, kI4);
                alpha_weight = 2.0 * decay;
            }
            lmi::Term t;
            t.var = y;
            t.left = alpha_weight * kI4;
            t.right = kI4;
            prob.add_term(con, t);
        }
    }
    return prob;
}

std::pair<std::vector<Eigen::RowVector4d>, Eigen::Matrix4d>
try_synthesis(const std::vector<LpvSystem>& sys, double decay, const SynthesisConfig& cfg) {
    lmi::LmiProblem prob = build_synthesis_problem(sys, decay, cfg.margin_scale);
    lmi::SolveOptions opt;
    opt.max_iterations = cfg.lmi_budget;
    const lmi::LmiSolution sol = lmi::solve(prob, opt);
    if (sol.status != lmi::LmiSolution::Status::Feasible) {
        throw SynthesisError("synthesize_vertex_gains: no feasible (Y, M) found at decay " +
                             std::to_string(decay));
    }
    const Eigen::Matrix4d Y = prob.value(0, sol.packed);
    const Eigen::Matrix4d Yinv = Y.inverse();
    std::vector<Eigen::RowVector4d> K;
    for (size_t p = 0; p < sys.size(); ++p) {
        const Eigen::MatrixXd M = prob.value(static_cast<int>(p) + 1, sol.packed);
        K.push_back(Eigen::RowVector4d(M * Yinv));
    }
    return {K, Y};
}

}  // namespace

std::pair<std::vector<Eigen::RowVector4d>, Eigen::Matrix4d>
synthesize_vertex_gains(const std::vector<LpvSystem>& vertex_systems, const SynthesisConfig& cfg) {
    if (vertex_systems.empty()) {
        throw SynthesisError("synthesize_vertex_gains: no vertex systems");
    }
    double boost = cfg.decay_boost;
    for (int attempt = 0; attempt < 8; ++attempt) {
        auto [K, Y] = try_synthesis(vertex_systems, cfg.alpha + boost, cfg);
        double worst = 0.0;
        for (const auto& k : K) worst = std::max(worst, k.norm());
        if (worst <= cfg.gain_cap || boost <= 1e-3) {
            if (worst > cfg.gain_cap) {
                throw SynthesisError("synthesize_vertex_gains: gain cap unreachable even at minimum decay");
            }
            return {K, Y};
        }
        boost *= 0.5;  // retry with a softer decay target to shrink the gains
    }
    throw SynthesisError("synthesize_vertex_gains: gain cap never satisfied");
}

std::pair<std::vector<Eigen::RowVector4d>, Eigen::Matrix4d>
synthesize_vertex_gains(const Polytope& poly, const SynthesisConfig& cfg) {
    return synthesize_vertex_gains(poly.vertex_systems, cfg);
}

SynthesisResult verify_theorem1(const Polytope& poly, const std::vector<Eigen::RowVector4d>& K,
                                const SynthesisConfig& cfg) {
    const int n = poly.vertices();
    if (static_cast<int>(K.size()) != n) {
        throw SynthesisError("verify_theorem1: one gain per vertex required");
    }
    if (cfg.gamma < 0.0) {
        throw SynthesisError("verify_theorem1: gamma must be non-negative");
    }

    lmi::LmiProblem prob;
    const int pvar = prob.add_symmetric("P", 4);
    const int tvar = prob.add_scalar("tau");

    // Homogeneous in (P, tau): P >= I pins the scale.
    prob.add_constraint("P_pos", 4, lmi::Sense::PositiveDefinite, 1.0);
    {
        lmi::Term t;
        t.var = pvar;
        t.left = kI4;
        t.right = kI4;
        prob.add_term(0, t);
    }
    prob.add_constraint("tau_pos", 1, lmi::Sense::PositiveDefinite, 0.0);
    {
        lmi::Term t;
        t.var = tvar;
        t.left = Eigen::MatrixXd::Ones(1, 1);
        t.right = Eigen::MatrixXd::Ones(1, 1);
        prob.add_term(1, t);
    }

    auto closed = [&](int p, int q) -> Eigen::Matrix4d {
        return poly.vertex_systems[p].A + poly.vertex_systems[p].B * K[q];
    };

    std::vector<std::pair<int, int>> pairs;
    std::vector<int> phi_constraints;
    for (int p = 0; p < n; ++p) {
        for (int q = p; q < n; ++q) {
            const double pair_scale = (p == q) ? 1.0 : 2.0;
            Eigen::MatrixXd constant = Eigen::MatrixXd::Zero(8, 8);
            if (cfg.printed_gamma_block) {
                constant.bottomRightCorner(4, 4) = -pair_scale * cfg.gamma * kI4;
            }
            const double margin = lmi::default_margin(constant, cfg.margin_scale);
            const int con = prob.add_constraint(
                "Phi" + std::to_string(p) + std::to_string(q), 8,
                lmi::Sense::NegativeDefinite, margin);
            prob.set_constant(con, constant);

            auto add_phi_terms = [&](int a, int b) {
                // (1,1) block: Atilde' P + P Atilde + alpha P + tau gamma^2 I
                prob.add_symmetrized_term(con, pvar, closed(a, b).transpose(), kI4, 0, 0);
                lmi::Term ap;
                ap.var = pvar;
                ap.left = cfg.alpha * kI4;
                ap.right = kI4;
                prob.add_term(con, ap);
                lmi::Term tg;
                tg.var = tvar;
                tg.left = cfg.gamma * cfg.gamma * kI4;
                tg.right = kI4;
                prob.add_term(con, tg);
                // Off-diagonal P blocks.
                lmi::Term p01;
                p01.var = pvar;
                p01.left = kI4;
                p01.right = kI4;
                p01.row = 0;
                p01.col = 4;
                prob.add_term(con, p01);
                lmi::Term p10 = p01;
                p10.row = 4;
                p10.col = 0;
                prob.add_term(con, p10);
                // (2,2) block: -tau I (S-procedure form) unless the printed
                // -gamma I variant is requested, which lives in the constant.
                if (!cfg.printed_gamma_block) {
                    lmi::Term tt;
                    tt.var = tvar;
                    tt.left = -kI4;
                    tt.right = kI4;
                    tt.row = 4;
                    tt.col = 4;
                    prob.add_term(con, tt);
                }
            };
            add_phi_terms(p, q);
            if (p != q) add_phi_terms(q, p);

            pairs.emplace_back(p, q);
            phi_constraints.push_back(con);
        }
    }

    lmi::SolveOptions opt;
    opt.max_iterations = cfg.lmi_budget;
    const lmi::LmiSolution sol = lmi::solve(prob, opt);
    if (sol.status != lmi::LmiSolution::Status::Feasible) {
        // Name the worst pair from the diagnostic margins of the last iterate.
        std::string worst = "none";
        double worst_eig = -std::numeric_limits<double>::infinity();
        if (!sol.extreme_eigs.empty()) {
            for (size_t k = 0; k < phi_constraints.size(); ++k) {
                const double e = sol.extreme_eigs[phi_constraints[k]];
                if (e > worst_eig) {
                    worst_eig = e;
                    worst = "(" + std::to_string(pairs[k].first) + "," +
                            std::to_string(pairs[k].second) + ")";
                }
            }
        }
        throw SynthesisError("verify_theorem1: no certificate found; worst pair " + worst +
                             " margin " + std::to_string(worst_eig));
    }

    SynthesisResult res;
    res.K = K;
    res.P = prob.value(pvar, sol.packed);
    res.alpha = cfg.alpha;
    res.gamma = cfg.gamma;
    res.tau = sol.packed[prob.variables()[tvar].offset];
    res.eps_def = lmi::default_margin(Eigen::MatrixXd::Zero(8, 8), cfg.margin_scale);
    for (size_t k = 0; k < phi_constraints.size(); ++k) {
        res.margins.push_back(sol.extreme_eigs[phi_constraints[k]]);
    }
    res.worst_margin = *std::max_element(res.margins.begin(), res.margins.end());
    return res;
}

double estimate_gamma(const Trajectory& traj, const PcaReduction& reduction,
                      const Polytope& poly, const std::vector<Eigen::RowVector4d>& K,
                      unsigned seed) {
    const Eigen::Index n = traj.size();
    if (n < 2) throw DomainError("estimate_gamma: empty training trajectory");

    std::mt19937_64 rng(seed);
    auto unit_state = [&]() {
        Eigen::Vector4d x;
        for (int i = 0; i < 4; ++i) {
            // Box-Muller from raw bits keeps the draw platform-stable.
            const double u1 = (static_cast<double>(rng() >> 11) + 0.5) * 0x1p-53;
            const double u2 = static_cast<double>(rng() >> 11) * 0x1p-53;
            x[i] = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
        }
        x.normalize();
        return x;
    };

    // Reference params enter only through the affine assembly, which is shared
    // by theta and theta_hat, so any valid params give the same difference.
    VehicleParams params;
    std::vector<double> ratios;
    const Eigen::Index stride = std::max<Eigen::Index>(1, n / 2000);
    for (Eigen::Index j = 0; j < n; j += stride) {
        const SchedulingVector theta = traj.samples.col(j);
        const ReducedVector eta = reduce_point(theta, reduction);
        const SchedulingVector theta_hat = reconstruct(eta, reduction);
        const LpvSystem g_true = assemble_system(theta, params);
        const LpvSystem g_hat = assemble_system(theta_hat, params);

        const ConvexCoordinates cc = convex_coordinates(poly, eta);
        Eigen::RowVector4d k_sched = Eigen::RowVector4d::Zero();
        for (int p = 0; p < poly.vertices(); ++p) k_sched += cc.xi[p] * K[p];

        const Eigen::Matrix4d dA = g_true.A - g_hat.A;
        const Eigen::Vector4d dB = g_true.B - g_hat.B;
        for (int r = 0; r < 8; ++r) {
            const Eigen::Vector4d x = unit_state();
            ratios.push_back((dA * x + dB * (k_sched * x)).norm());
        }
    }
    std::sort(ratios.begin(), ratios.end());
    const size_t idx = static_cast<size_t>(std::ceil(0.99 * static_cast<double>(ratios.size()))) - 1;
    return 1.25 * ratios[std::min(idx, ratios.size() - 1)];
}

ControlEval scheduled_control(const LateralState& x, const SchedulingVector& theta_meas,
                              const PcaReduction& reduction, const Polytope& poly,
                              const std::vector<Eigen::RowVector4d>& K, double delta_max) {
    if (static_cast<int>(K.size()) != poly.vertices()) {
        throw ConfigError("scheduled_control: gain count does not match the polytope");
    }
    const ReducedVector eta = reduce_point(theta_meas, reduction);
    const ConvexCoordinates cc = convex_coordinates(poly, eta);

    Eigen::RowVector4d k_sched = Eigen::RowVector4d::Zero();
    for (int p = 0; p < poly.vertices(); ++p) k_sched += cc.xi[p] * K[p];

    ControlEval out;
    out.xi = cc.xi;
    out.out_of_hull = cc.out_of_hull;
    const double raw = k_sched * x;
    out.delta = std::clamp(raw, -delta_max, delta_max);
    out.saturated = raw != out.delta;
    return out;
}

LtiBaseline lti_gain(const VehicleParams& params, const Trajectory& training,
                     const SynthesisConfig& cfg, double Vx_design) {
    if (training.caf.empty() || training.car.empty()) {
        throw DomainError("lti_gain: training trajectory must carry stiffness channels");
    }
    LtiBaseline base;
    base.Vx_design = Vx_design;
    base.C_af = std::accumulate(training.caf.begin(), training.caf.end(), 0.0) /
                static_cast<double>(training.caf.size());
    base.C_ar = std::accumulate(training.car.begin(), training.car.end(), 0.0) /
                static_cast<double>(training.car.size());

    const LpvSystem frozen =
        assemble_system(build_theta(Vx_design, base.C_af, base.C_ar), params);
    auto [K, Y] = synthesize_vertex_gains(std::vector<LpvSystem>{frozen}, cfg);
    (void)Y;
    base.K = K.front();

    const Eigen::Matrix4d closed = frozen.A + frozen.B * base.K;
    const Eigen::EigenSolver<Eigen::Matrix4d> es(closed);
    if (es.eigenvalues().real().maxCoeff() >= 0.0) {
        throw SynthesisError("lti_gain: design-point closed loop is not stable");
    }
    return base;
}

double longitudinal_pd(double Vx, double Vx_des, double& prev_error, double dt,
                       const PdConfig& cfg) {
    if (!(dt > 0.0)) throw DomainError("longitudinal_pd: dt must be positive");
    const double e = Vx_des - Vx;
    const double de = (e - prev_error) / dt;
    prev_error = e;
    return std::clamp(cfg.kp * e + cfg.kd * de, cfg.a_min, cfg.a_max);
}

}  // namespace lpvlk
