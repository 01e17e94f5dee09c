#pragma once

#include <utility>
#include <vector>

#include <Eigen/Core>

#include "lpvlk/vehicle_model.hpp"

namespace lpvlk {

// Scheduling vector theta = [Vx, 2C_af, 2C_af/Vx, 2C_ar, 2C_ar/Vx].
using SchedulingVector = Eigen::Matrix<double, 5, 1>;

// Reduced scheduling vector eta (dimension m <= 5).
using ReducedVector = Eigen::VectorXd;

constexpr int kNumScheduling = 5;

// State-space matrices of the lateral model at one scheduling point.
struct LpvSystem {
    Eigen::Matrix4d A = Eigen::Matrix4d::Zero();
    Eigen::Vector4d B = Eigen::Vector4d::Zero();
    Eigen::Matrix<double, 4, 2> B_phi = Eigen::Matrix<double, 4, 2>::Zero();
};

// Sampled scheduling trajectory. Columns of `samples` are theta vectors; the
// raw (t, Vx, C_af, C_ar) channels are kept for the CSV artifact.
struct Trajectory {
    Eigen::Matrix<double, 5, Eigen::Dynamic> samples;
    double period = 0.01;  // [s]
    std::vector<double> t, vx, caf, car;

    Eigen::Index size() const { return samples.cols(); }
};

// Per-row affine map N_i onto [-1, 1]: z = (x - center)/half_range.
// Rows with zero half-range map to 0 and invert back to the center.
struct NormalizationLaw {
    Eigen::Matrix<double, 5, 1> center = Eigen::Matrix<double, 5, 1>::Zero();
    Eigen::Matrix<double, 5, 1> half_range = Eigen::Matrix<double, 5, 1>::Zero();

    SchedulingVector apply(const SchedulingVector& theta) const;
    SchedulingVector invert(const SchedulingVector& normalized) const;
};

// PCA reduction artifact: the m most significant left-singular directions of
// the normalized trajectory plus the normalization law that produced it.
struct PcaReduction {
    Eigen::Matrix<double, 5, Eigen::Dynamic> U_s;            // 5 x m
    Eigen::Matrix<double, 5, 1> singular_values;             // all 5, non-increasing
    int m = 0;
    NormalizationLaw law;
};

SchedulingVector build_theta(double Vx, double C_af, double C_ar);

// True iff the coupling identities theta3*theta1 = theta2 and
// theta5*theta1 = theta4 hold to `rel_tol`.
bool coupling_holds(const SchedulingVector& theta, double rel_tol = 1e-9);

// Affine assembly of A(theta), B(theta), B_phi(theta). Valid for any finite
// theta, including reconstructed vectors that violate the couplings.
LpvSystem assemble_system(const SchedulingVector& theta, const VehicleParams& params);

// Equivalent construction through the frozen-coefficient route; requires a
// physically coupled operating point. Used as the cross-check twin of
// assemble_system.
LpvSystem assemble_from_coefficients(double Vx, double C_af, double C_ar,
                                     const VehicleParams& params);

// Min-max normalization of every row to [-1, 1]. Requires N >= 2 samples.
std::pair<Eigen::MatrixXd, NormalizationLaw> normalize(const Trajectory& traj);

// SVD-based reduction of the normalized trajectory to dimension m. The sign
// of each basis column is fixed so its first non-negligible entry is
// non-negative.
PcaReduction pca_reduce(const Eigen::MatrixXd& normalized, int m, const NormalizationLaw& law);

// Fraction of total variation v_m = sum_{i<=m} sigma_i^2 / sum_i sigma_i^2.
double fraction_of_variation(const PcaReduction& reduction, int m_query);

ReducedVector reduce_point(const SchedulingVector& theta, const PcaReduction& reduction);

// theta_hat = N^{-1}(U_s * eta). Coupling invariants are not enforced.
SchedulingVector reconstruct(const ReducedVector& eta, const PcaReduction& reduction);

}  // namespace lpvlk
