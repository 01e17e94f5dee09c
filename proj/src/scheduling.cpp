#include "lpvlk/scheduling.hpp"

#include <cmath>

#include <Eigen/SVD>

namespace lpvlk {

SchedulingVector NormalizationLaw::apply(const SchedulingVector& theta) const {
    SchedulingVector z;
    for (int i = 0; i < kNumScheduling; ++i) {
        z[i] = half_range[i] > 0.0 ? (theta[i] - center[i]) / half_range[i] : 0.0;
    }
    return z;
}

SchedulingVector NormalizationLaw::invert(const SchedulingVector& normalized) const {
    SchedulingVector theta;
    for (int i = 0; i < kNumScheduling; ++i) {
        theta[i] = center[i] + half_range[i] * normalized[i];
    }
    return theta;
}

SchedulingVector build_theta(double Vx, double C_af, double C_ar) {
    if (!(Vx > 0.0)) {
        throw DomainError("build_theta: Vx must be positive");
    }
    SchedulingVector theta;
    theta << Vx, 2.0 * C_af, 2.0 * C_af / Vx, 2.0 * C_ar, 2.0 * C_ar / Vx;
    return theta;
}

bool coupling_holds(const SchedulingVector& theta, double rel_tol) {
    if (!(theta[0] > 0.0)) return false;
    const double s2 = std::abs(theta[1]) + std::abs(theta[2] * theta[0]);
    const double s4 = std::abs(theta[3]) + std::abs(theta[4] * theta[0]);
    return std::abs(theta[2] * theta[0] - theta[1]) <= rel_tol * (1.0 + s2)
        && std::abs(theta[4] * theta[0] - theta[3]) <= rel_tol * (1.0 + s4);
}

LpvSystem assemble_system(const SchedulingVector& th, const VehicleParams& p) {
    LpvSystem sys;
    const double m = p.m, Iz = p.I_z, lf = p.l_f, lr = p.l_r;

    sys.A.row(0) << 0.0, 1.0, 0.0, -p.L;
    sys.A.row(1) << 0.0,
        -(th[2] + th[4]) / m,
        (th[1] + th[3]) / m,
        -2.0 * th[0] - (lf / m) * th[2] + (lr / m) * th[4];
    sys.A.row(2) << 0.0, 0.0, 0.0, -1.0;
    sys.A.row(3) << 0.0,
        -(lf / Iz) * th[2] + (lr / Iz) * th[4],
        (lf / Iz) * th[1] - (lr / Iz) * th[3],
        -(lf * lf / Iz) * th[2] - (lr * lr / Iz) * th[4];

    sys.B << 0.0, th[1] / m, 0.0, (lf / Iz) * th[1];

    sys.B_phi << p.L, th[0],
                 th[0], 0.0,
                 1.0, 0.0,
                 0.0, 0.0;
    return sys;
}

LpvSystem assemble_from_coefficients(double Vx, double C_af, double C_ar,
                                     const VehicleParams& p) {
    const LateralCoefficients c = coefficient_block(Vx, C_af, C_ar, p);
    LpvSystem sys;
    sys.A.row(0) << 0.0, 1.0, 0.0, -p.L;
    sys.A.row(1) << 0.0, c.a22, c.a23, c.a24p;
    sys.A.row(2) << 0.0, 0.0, 0.0, -1.0;
    sys.A.row(3) << 0.0, c.a42p, c.a43, c.a44;
    sys.B << 0.0, 2.0 * C_af / p.m, 0.0, 2.0 * C_af * p.l_f / p.I_z;
    sys.B_phi << p.L, Vx,
                 Vx, 0.0,
                 1.0, 0.0,
                 0.0, 0.0;
    return sys;
}

std::pair<Eigen::MatrixXd, NormalizationLaw> normalize(const Trajectory& traj) {
    const Eigen::Index n = traj.size();
    if (n < 2) {
        throw DomainError("normalize: trajectory needs at least 2 samples");
    }
    NormalizationLaw law;
    for (int i = 0; i < kNumScheduling; ++i) {
        const double lo = traj.samples.row(i).minCoeff();
        const double hi = traj.samples.row(i).maxCoeff();
        law.center[i] = 0.5 * (hi + lo);
        law.half_range[i] = 0.5 * (hi - lo);
    }
    Eigen::MatrixXd normalized(kNumScheduling, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        normalized.col(j) = law.apply(traj.samples.col(j));
    }
    return {normalized, law};
}

PcaReduction pca_reduce(const Eigen::MatrixXd& normalized, int m, const NormalizationLaw& law) {
    if (m < 1 || m > kNumScheduling) {
        throw DomainError("pca_reduce: m must be in 1..5");
    }
    if (normalized.rows() != kNumScheduling) {
        throw DomainError("pca_reduce: normalized matrix must have 5 rows");
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(normalized, Eigen::ComputeThinU);
    PcaReduction red;
    red.m = m;
    red.law = law;
    red.singular_values.setZero();
    const Eigen::Index k = svd.singularValues().size();
    red.singular_values.head(k) = svd.singularValues();

    Eigen::MatrixXd U = Eigen::MatrixXd::Identity(kNumScheduling, kNumScheduling);
    U.leftCols(k) = svd.matrixU();
    red.U_s = U.leftCols(m);

    // Fix the sign of each basis column: first entry above the noise floor is
    // made non-negative so artifacts are stable across runs and platforms.
    for (int j = 0; j < m; ++j) {
        for (int i = 0; i < kNumScheduling; ++i) {
            if (std::abs(red.U_s(i, j)) > 1e-12) {
                if (red.U_s(i, j) < 0.0) red.U_s.col(j) *= -1.0;
                break;
            }
        }
    }
    return red;
}

double fraction_of_variation(const PcaReduction& red, int m_query) {
    if (m_query < 1 || m_query > kNumScheduling) {
        throw DomainError("fraction_of_variation: m_query must be in 1..5");
    }
    const double total = red.singular_values.squaredNorm();
    if (total <= 0.0) {
        throw DomainError("fraction_of_variation: all singular values are zero");
    }
    return red.singular_values.head(m_query).squaredNorm() / total;
}

ReducedVector reduce_point(const SchedulingVector& theta, const PcaReduction& red) {
    return red.U_s.transpose() * red.law.apply(theta);
}

SchedulingVector reconstruct(const ReducedVector& eta, const PcaReduction& red) {
    return red.law.invert(red.U_s * eta);
}

}  // namespace lpvlk
