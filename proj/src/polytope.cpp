#include "lpvlk/polytope.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace lpvlk {

namespace {

// Lexicographic combination iterator over {0..total-1} choose k.
bool next_combination(std::vector<int>& idx, int total) {
    const int k = static_cast<int>(idx.size());
    for (int i = k - 1; i >= 0; --i) {
        if (idx[i] < total - (k - i)) {
            ++idx[i];
            for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
            return true;
        }
    }
    return false;
}

Eigen::MatrixXd corner_matrix(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
    const int m = static_cast<int>(lo.size());
    const int corners = 1 << m;
    Eigen::MatrixXd C(m, corners);
    for (int c = 0; c < corners; ++c) {
        for (int k = 0; k < m; ++k) {
            C(k, c) = (c >> k) & 1 ? hi[k] : lo[k];
        }
    }
    return C;
}

// True when every column of H has barycentric coordinates >= -tol for the
// simplex with vertex matrix V.
bool contains_all(const Eigen::MatrixXd& V, const Eigen::MatrixXd& H, double tol) {
    const int m = static_cast<int>(V.rows());
    Eigen::MatrixXd T(m + 1, m + 1);
    T.topRows(m) = V;
    T.bottomRows(1).setOnes();
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(T);
    Eigen::VectorXd rhs(m + 1);
    for (Eigen::Index j = 0; j < H.cols(); ++j) {
        rhs.head(m) = H.col(j);
        rhs[m] = 1.0;
        if ((lu.solve(rhs).array() < -tol).any()) return false;
    }
    return true;
}

double condition_number(const Eigen::MatrixXd& M) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    const double smin = svd.singularValues().minCoeff();
    if (smin <= 0.0) return std::numeric_limits<double>::infinity();
    return svd.singularValues().maxCoeff() / smin;
}

}  // namespace

Eigen::MatrixXd Polytope::lifted() const {
    Eigen::MatrixXd T(dim() + 1, vertices());
    T.topRows(dim()) = V;
    T.bottomRows(1).setOnes();
    return T;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> bounds(const ReducedTrajectory& H) {
    if (H.cols() < 1) {
        throw DomainError("bounds: empty reduced trajectory");
    }
    return {H.rowwise().minCoeff(), H.rowwise().maxCoeff()};
}

double simplex_volume(const Eigen::MatrixXd& vertices) {
    const int m = static_cast<int>(vertices.rows());
    Eigen::MatrixXd E(m, m);
    for (int j = 0; j < m; ++j) E.col(j) = vertices.col(j + 1) - vertices.col(0);
    double fact = 1.0;
    for (int i = 2; i <= m; ++i) fact *= i;
    return std::abs(E.determinant()) / fact;
}

Polytope select_simplex(const ReducedTrajectory& H, const PcaReduction& reduction,
                        const VehicleParams& params, const PolytopeOptions& opt) {
    const int m = static_cast<int>(H.rows());
    if (m < 1 || m > 4) {
        throw GeometryError("select_simplex: supported reduced dimensions are 1..4");
    }
    if (H.cols() < m + 1) {
        throw GeometryError("select_simplex: need at least m+1 samples");
    }

    auto [lo, hi] = bounds(H);
    const Eigen::MatrixXd corners = corner_matrix(lo, hi);
    const int n_corners = static_cast<int>(corners.cols());

    // Relative tie band on volumes; strictly better volume wins, otherwise the
    // lexicographically earlier subset is kept.
    constexpr double kTieRel = 1e-12;

    std::vector<int> idx(m + 1);
    for (int i = 0; i <= m; ++i) idx[i] = i;

    double best_contained_vol = std::numeric_limits<double>::infinity();
    double best_any_vol = std::numeric_limits<double>::infinity();
    Eigen::MatrixXd best_contained, best_any;

    do {
        Eigen::MatrixXd V(m, m + 1);
        for (int i = 0; i <= m; ++i) V.col(i) = corners.col(idx[i]);

        Eigen::MatrixXd E(m, m);
        for (int j = 0; j < m; ++j) E.col(j) = V.col(j + 1) - V.col(0);
        const double det = std::abs(E.determinant());
        if (det <= opt.degeneracy_tol) continue;

        double fact = 1.0;
        for (int i = 2; i <= m; ++i) fact *= i;
        const double vol = det / fact;

        if (vol < best_any_vol * (1.0 - kTieRel)) {
            best_any_vol = vol;
            best_any = V;
        }
        if (vol < best_contained_vol * (1.0 - kTieRel) && contains_all(V, H, opt.containment_tol)) {
            best_contained_vol = vol;
            best_contained = V;
        }
    } while (next_combination(idx, n_corners));

    if (best_any.size() == 0) {
        throw GeometryError("select_simplex: all corner subsets are degenerate; reduce m or collect richer data");
    }

    Polytope poly;
    if (best_contained.size() != 0) {
        poly.V = best_contained;
        poly.inflation = 1.0;
    } else {
        // No corner simplex contains the data: grow the smallest one about its
        // centroid until it does. Containment is monotone in the factor.
        const Eigen::VectorXd centroid = best_any.rowwise().mean();
        auto inflate = [&](double s) {
            Eigen::MatrixXd V = best_any;
            for (int c = 0; c <= m; ++c) {
                V.col(c) = centroid + s * (best_any.col(c) - centroid);
            }
            return V;
        };
        double hi_f = 1.0;
        int guard = 0;
        while (!contains_all(inflate(hi_f), H, opt.containment_tol)) {
            hi_f *= 2.0;
            if (++guard > 60) {
                throw GeometryError("select_simplex: inflation search failed to contain the trajectory");
            }
        }
        double lo_f = hi_f > 1.0 ? hi_f / 2.0 : 1.0;
        while (hi_f - lo_f > 1e-6) {
            const double mid = 0.5 * (lo_f + hi_f);
            if (contains_all(inflate(mid), H, opt.containment_tol)) {
                hi_f = mid;
            } else {
                lo_f = mid;
            }
        }
        poly.V = inflate(hi_f);
        poly.inflation = hi_f;
    }

    poly.cond = condition_number(poly.lifted());
    if (!(poly.cond < opt.cond_cap)) {
        throw GeometryError("select_simplex: vertex matrix condition number exceeds cap; consider larger m or more data");
    }

    for (int p = 0; p <= m; ++p) {
        const SchedulingVector theta_vp = reconstruct(poly.V.col(p), reduction);
        poly.vertex_thetas.push_back(theta_vp);
        poly.vertex_systems.push_back(assemble_system(theta_vp, params));
    }
    return poly;
}

ConvexCoordinates convex_coordinates(const Polytope& poly, const ReducedVector& eta,
                                     double tol) {
    const int m = poly.dim();
    if (eta.size() != m) {
        throw GeometryError("convex_coordinates: eta dimension mismatch");
    }
    const Eigen::MatrixXd T = poly.lifted();
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(T);
    Eigen::VectorXd rhs(m + 1);
    rhs.head(m) = eta;
    rhs[m] = 1.0;
    Eigen::VectorXd xi = lu.solve(rhs);
    if ((T * xi - rhs).norm() > 1e-6 * (1.0 + rhs.norm())) {
        throw GeometryError("convex_coordinates: singular vertex matrix");
    }

    ConvexCoordinates out;
    if (xi.minCoeff() >= -tol) {
        out.xi = xi;
        return out;
    }

    // Point lies outside the simplex: Euclidean projection onto it, found by
    // enumerating active sets of the nonnegativity facets. The candidate with
    // the smallest distance and nonnegative free weights wins.
    out.out_of_hull = true;
    const int n = m + 1;
    double best_obj = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_xi = Eigen::VectorXd::Zero(n);
    bool found = false;

    for (int mask = 0; mask < (1 << n); ++mask) {
        std::vector<int> free_idx;
        for (int p = 0; p < n; ++p) {
            if (!((mask >> p) & 1)) free_idx.push_back(p);
        }
        const int f = static_cast<int>(free_idx.size());
        if (f == 0) continue;

        Eigen::MatrixXd Vf(m, f);
        for (int j = 0; j < f; ++j) Vf.col(j) = poly.V.col(free_idx[j]);

        // KKT system of min ||Vf u - eta||^2 s.t. sum(u) = 1.
        Eigen::MatrixXd kkt(f + 1, f + 1);
        kkt.topLeftCorner(f, f) = 2.0 * Vf.transpose() * Vf;
        kkt.topRightCorner(f, 1).setOnes();
        kkt.bottomLeftCorner(1, f).setOnes();
        kkt(f, f) = 0.0;
        Eigen::VectorXd kkt_rhs(f + 1);
        kkt_rhs.head(f) = 2.0 * Vf.transpose() * eta;
        kkt_rhs[f] = 1.0;

        Eigen::VectorXd sol = kkt.partialPivLu().solve(kkt_rhs);
        if ((kkt * sol - kkt_rhs).norm() > 1e-8 * (1.0 + kkt_rhs.norm())) continue;

        const Eigen::VectorXd u = sol.head(f);
        if ((u.array() < -1e-10).any()) continue;

        const double obj = (Vf * u - eta).squaredNorm();
        if (obj < best_obj * (1.0 - 1e-12) || !found) {
            best_obj = obj;
            best_xi.setZero();
            for (int j = 0; j < f; ++j) best_xi[free_idx[j]] = std::max(0.0, u[j]);
            found = true;
        }
    }
    if (!found) {
        throw GeometryError("convex_coordinates: projection onto simplex failed");
    }
    best_xi /= best_xi.sum();
    out.xi = best_xi;
    return out;
}

LpvSystem combine_systems(const Polytope& poly, const Eigen::VectorXd& xi) {
    if (xi.size() != poly.vertices()) {
        throw GeometryError("combine_systems: weight dimension mismatch");
    }
    LpvSystem sys;
    for (int p = 0; p < poly.vertices(); ++p) {
        sys.A += xi[p] * poly.vertex_systems[p].A;
        sys.B += xi[p] * poly.vertex_systems[p].B;
        sys.B_phi += xi[p] * poly.vertex_systems[p].B_phi;
    }
    return sys;
}

}  // namespace lpvlk
