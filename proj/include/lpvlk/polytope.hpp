#pragma once

#include <utility>
#include <vector>

#include <Eigen/Core>

#include "lpvlk/scheduling.hpp"

namespace lpvlk {

// Reduced scheduling trajectory H = U_s^T * Theta^n (m x N).
using ReducedTrajectory = Eigen::MatrixXd;

// Simplex over the reduced scheduling space: m+1 vertices chosen among the
// 2^m bounding-box corners, possibly inflated about the centroid until the
// training data is contained.
struct Polytope {
    Eigen::MatrixXd V;                            // m x (m+1) vertex matrix
    double inflation = 1.0;                       // >= 1
    std::vector<SchedulingVector> vertex_thetas;  // reconstructed theta_hat at vertices
    std::vector<LpvSystem> vertex_systems;
    double cond = 0.0;                            // condition number of [V; 1^T]

    int dim() const { return static_cast<int>(V.rows()); }
    int vertices() const { return static_cast<int>(V.cols()); }

    // [V; 1^T], the matrix inverted by convex_coordinates.
    Eigen::MatrixXd lifted() const;
};

struct PolytopeOptions {
    double cond_cap = 1e8;          // reject simplices with worse conditioning
    double degeneracy_tol = 1e-12;  // on the vertex-difference determinant
    double containment_tol = 1e-9;  // allowed negativity of convex coordinates
};

struct ConvexCoordinates {
    Eigen::VectorXd xi;     // (m+1), >= 0 and summing to 1 after clamping
    bool out_of_hull = false;
};

// Per-dimension min/max of the reduced trajectory. Throws on empty input.
std::pair<Eigen::VectorXd, Eigen::VectorXd> bounds(const ReducedTrajectory& H);

// Simplex volume |det([v2-v1, ..., v_{m+1}-v1])| / m!.
double simplex_volume(const Eigen::MatrixXd& vertices);

// Exhaustive corner-subset search: among all non-degenerate (m+1)-subsets of
// the 2^m bounding-box corners, pick the minimum-volume one containing every
// column of H; if none contains H, inflate the minimum-volume subset about
// its centroid by the smallest sufficient factor. Ties on volume are broken
// by lexicographic corner-index order.
Polytope select_simplex(const ReducedTrajectory& H, const PcaReduction& reduction,
                        const VehicleParams& params, const PolytopeOptions& options = {});

// Barycentric coordinates xi with V*xi = eta and sum(xi) = 1. Points outside
// the simplex are projected onto it (Euclidean, active-set over the facets)
// and flagged.
ConvexCoordinates convex_coordinates(const Polytope& poly, const ReducedVector& eta,
                                     double tol = 1e-9);

// Convex combination of the vertex systems, sum_p xi_p * G(theta_hat_vp).
LpvSystem combine_systems(const Polytope& poly, const Eigen::VectorXd& xi);

}  // namespace lpvlk
