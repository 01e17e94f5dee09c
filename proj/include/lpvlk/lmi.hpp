#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lpvlk/errors.hpp"

namespace lpvlk::lmi {

enum class VarKind { Symmetric, Rectangular, Scalar };
enum class Sense { NegativeDefinite, PositiveDefinite };

struct Variable {
    std::string name;
    VarKind kind = VarKind::Scalar;
    int rows = 1;
    int cols = 1;
    int offset = 0;  // position in the packed vector
    int packed = 1;  // packed entry count
};

// One affine term of a constraint block: left * op(X) * right placed at
// (row, col). For scalar variables the contribution is x * left * right.
struct Term {
    int var = -1;
    Eigen::MatrixXd left;
    Eigen::MatrixXd right;
    bool transpose_var = false;
    int row = 0;
    int col = 0;
};

struct Constraint {
    std::string name;
    int dim = 0;
    Sense sense = Sense::NegativeDefinite;
    double margin = 0.0;  // required definiteness margin at a feasible point
    Eigen::MatrixXd constant;
    std::vector<Term> terms;
};

// Affine LMI feasibility problem over named symmetric, rectangular, and
// scalar unknowns. Constraints are required negative or positive definite
// with a per-constraint margin.
class LmiProblem {
public:
    int add_symmetric(const std::string& name, int n);
    int add_rectangular(const std::string& name, int rows, int cols);
    int add_scalar(const std::string& name);

    int add_constraint(const std::string& name, int dim, Sense sense, double margin);
    void set_constant(int constraint, const Eigen::MatrixXd& c);
    void add_term(int constraint, const Term& term);

    // Convenience: adds left*X*right and its transpose mirrored about the
    // diagonal of a symmetric constraint block.
    void add_symmetrized_term(int constraint, int var, const Eigen::MatrixXd& left,
                              const Eigen::MatrixXd& right, int row = 0, int col = 0);

    int packed_size() const { return packed_size_; }
    const std::vector<Variable>& variables() const { return variables_; }
    const std::vector<Constraint>& constraints() const { return constraints_; }

    // Constraint block at the packed point v (constant + affine part).
    Eigen::MatrixXd eval(int constraint, const Eigen::VectorXd& v) const;

    // Matrix value of one variable at the packed point.
    Eigen::MatrixXd value(int var, const Eigen::VectorXd& v) const;
    void set_value(int var, const Eigen::MatrixXd& value, Eigen::VectorXd& v) const;

private:
    void check_term(const Constraint& c, const Term& t) const;

    std::vector<Variable> variables_;
    std::vector<Constraint> constraints_;
    int packed_size_ = 0;
};

struct LmiSolution {
    enum class Status { Feasible, NotFound };
    Status status = Status::NotFound;
    Eigen::VectorXd packed;
    std::vector<double> extreme_eigs;  // per constraint: lambda_max (negdef) or lambda_min (posdef)
    int iterations = 0;
    int starts_used = 0;
};

struct SolveOptions {
    int max_iterations = 20000;    // per start
    int starts = 3;                // deterministic multi-start seeds 1..starts
    double projection_slack = 2.0; // projection targets slack * margin
};

// Default definiteness margin for a constraint with the given constant block.
double default_margin(const Eigen::MatrixXd& constant_block, double scale = 1e-7);

// Alternating projection: spectral clipping of each constraint block followed
// by a least-squares refit onto the affine variable parameterization. A
// returned Feasible status has been re-checked with eig_extreme, which is a
// separate code path from the solver's internal eigensolver. NotFound after
// the budget is not a proof of infeasibility.
LmiSolution solve(const LmiProblem& problem, const SolveOptions& options = {});

// Extreme eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
// Throws DomainError if M is asymmetric beyond 1e-9 relative.
std::pair<double, double> eig_extreme(const Eigen::MatrixXd& M);

// Negative definiteness (with margin) of [[X, Y],[Y^T, Z]]. margin < 0 picks
// the default margin for the assembled block.
bool schur_negdef_check(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                        const Eigen::MatrixXd& Z, double margin = -1.0);

// Re-check a packed point against every constraint via eig_extreme.
// Returns per-constraint extreme eigenvalues; ok is true when all margins hold.
struct VerifyReport {
    bool ok = false;
    std::vector<double> extreme_eigs;
};
VerifyReport verify(const LmiProblem& problem, const Eigen::VectorXd& v);

// Expanded normal form (constant + per-packed-entry coefficient blocks),
// dumpable to text for debugging and cross-implementation comparison.
struct ExpandedLmi {
    struct Block {
        std::string name;
        int dim = 0;
        Sense sense = Sense::NegativeDefinite;
        double margin = 0.0;
        Eigen::MatrixXd constant;
        std::vector<Eigen::MatrixXd> coeff;  // one per packed entry
    };
    int packed_size = 0;
    std::vector<Block> blocks;

    Eigen::MatrixXd eval(int block, const Eigen::VectorXd& v) const;
};

ExpandedLmi expand(const LmiProblem& problem);
void dump(const ExpandedLmi& e, std::ostream& os);
ExpandedLmi load(std::istream& is);

}  // namespace lpvlk::lmi
