#include "lpvlk/lmi.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <random>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace lpvlk::lmi {

namespace {

int symmetric_packed(int n) { return n * (n + 1) / 2; }

double uniform_pm(std::mt19937_64& rng) {
    // Uniform in [-1, 1), derived from raw bits for platform-stable output.
    const double u = static_cast<double>(rng() >> 11) * 0x1p-53;
    return 2.0 * u - 1.0;
}

}  // namespace

int LmiProblem::add_symmetric(const std::string& name, int n) {
    if (n < 1) throw DomainError("add_symmetric: dimension must be positive");
    Variable v{name, VarKind::Symmetric, n, n, packed_size_, symmetric_packed(n)};
    packed_size_ += v.packed;
    variables_.push_back(v);
    return static_cast<int>(variables_.size()) - 1;
}

int LmiProblem::add_rectangular(const std::string& name, int rows, int cols) {
    if (rows < 1 || cols < 1) throw DomainError("add_rectangular: dimensions must be positive");
    Variable v{name, VarKind::Rectangular, rows, cols, packed_size_, rows * cols};
    packed_size_ += v.packed;
    variables_.push_back(v);
    return static_cast<int>(variables_.size()) - 1;
}

int LmiProblem::add_scalar(const std::string& name) {
    Variable v{name, VarKind::Scalar, 1, 1, packed_size_, 1};
    packed_size_ += 1;
    variables_.push_back(v);
    return static_cast<int>(variables_.size()) - 1;
}

int LmiProblem::add_constraint(const std::string& name, int dim, Sense sense, double margin) {
    if (dim < 1) throw DomainError("add_constraint: dimension must be positive");
    if (margin < 0.0) throw DomainError("add_constraint: margin must be non-negative");
    Constraint c;
    c.name = name;
    c.dim = dim;
    c.sense = sense;
    c.margin = margin;
    c.constant = Eigen::MatrixXd::Zero(dim, dim);
    constraints_.push_back(std::move(c));
    return static_cast<int>(constraints_.size()) - 1;
}

void LmiProblem::set_constant(int constraint, const Eigen::MatrixXd& c) {
    Constraint& con = constraints_.at(constraint);
    if (c.rows() != con.dim || c.cols() != con.dim) {
        throw DomainError("set_constant: block dimension mismatch");
    }
    if ((c - c.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + c.cwiseAbs().maxCoeff())) {
        throw DomainError("set_constant: constant block must be symmetric");
    }
    con.constant = 0.5 * (c + c.transpose());
}

void LmiProblem::check_term(const Constraint& c, const Term& t) const {
    const Variable& var = variables_.at(t.var);
    const int xr = (var.kind == VarKind::Scalar) ? static_cast<int>(t.left.cols())
                   : (t.transpose_var ? var.cols : var.rows);
    const int xc = (var.kind == VarKind::Scalar) ? static_cast<int>(t.right.rows())
                   : (t.transpose_var ? var.rows : var.cols);
    if (t.left.cols() != xr || t.right.rows() != xc) {
        throw DomainError("add_term: left/right dimensions do not conform with the variable");
    }
    if (t.row < 0 || t.col < 0 || t.row + t.left.rows() > c.dim || t.col + t.right.cols() > c.dim) {
        throw DomainError("add_term: block placement out of range");
    }
}

void LmiProblem::add_term(int constraint, const Term& term) {
    Constraint& con = constraints_.at(constraint);
    check_term(con, term);
    con.terms.push_back(term);
}

void LmiProblem::add_symmetrized_term(int constraint, int var, const Eigen::MatrixXd& left,
                                      const Eigen::MatrixXd& right, int row, int col) {
    Term t;
    t.var = var;
    t.left = left;
    t.right = right;
    t.row = row;
    t.col = col;
    add_term(constraint, t);

    Term tt;
    tt.var = var;
    tt.left = right.transpose();
    tt.right = left.transpose();
    tt.transpose_var = true;
    tt.row = col;
    tt.col = row;
    add_term(constraint, tt);
}

Eigen::MatrixXd LmiProblem::value(int var, const Eigen::VectorXd& v) const {
    const Variable& d = variables_.at(var);
    Eigen::MatrixXd X(d.rows, d.cols);
    if (d.kind == VarKind::Symmetric) {
        int k = d.offset;
        for (int j = 0; j < d.cols; ++j) {
            for (int i = 0; i <= j; ++i) {
                X(i, j) = v[k];
                X(j, i) = v[k];
                ++k;
            }
        }
    } else {
        for (int j = 0; j < d.cols; ++j) {
            for (int i = 0; i < d.rows; ++i) {
                X(i, j) = v[d.offset + j * d.rows + i];
            }
        }
    }
    return X;
}

void LmiProblem::set_value(int var, const Eigen::MatrixXd& value, Eigen::VectorXd& v) const {
    const Variable& d = variables_.at(var);
    if (value.rows() != d.rows || value.cols() != d.cols) {
        throw DomainError("set_value: dimension mismatch");
    }
    if (d.kind == VarKind::Symmetric) {
        int k = d.offset;
        for (int j = 0; j < d.cols; ++j) {
            for (int i = 0; i <= j; ++i) {
                v[k++] = 0.5 * (value(i, j) + value(j, i));
            }
        }
    } else {
        for (int j = 0; j < d.cols; ++j) {
            for (int i = 0; i < d.rows; ++i) {
                v[d.offset + j * d.rows + i] = value(i, j);
            }
        }
    }
}

Eigen::MatrixXd LmiProblem::eval(int constraint, const Eigen::VectorXd& v) const {
    const Constraint& con = constraints_.at(constraint);
    Eigen::MatrixXd F = con.constant;
    for (const Term& t : con.terms) {
        const Variable& d = variables_[t.var];
        Eigen::MatrixXd contrib;
        if (d.kind == VarKind::Scalar) {
            contrib = v[d.offset] * (t.left * t.right);
        } else {
            const Eigen::MatrixXd X = value(t.var, v);
            contrib = t.transpose_var ? t.left * X.transpose() * t.right
                                      : t.left * X * t.right;
        }
        F.block(t.row, t.col, contrib.rows(), contrib.cols()) += contrib;
    }
    return F;
}

double default_margin(const Eigen::MatrixXd& constant_block, double scale) {
    return scale * (1.0 + constant_block.norm());
}

std::pair<double, double> eig_extreme(const Eigen::MatrixXd& M) {
    if (M.rows() != M.cols()) throw DomainError("eig_extreme: matrix must be square");
    const double asym = (M - M.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-9 * (1.0 + M.cwiseAbs().maxCoeff())) {
        throw DomainError("eig_extreme: matrix is not symmetric");
    }

    const int n = static_cast<int>(M.rows());
    Eigen::MatrixXd S = 0.5 * (M + M.transpose());
    const double scale = std::max(1.0, S.cwiseAbs().maxCoeff());

    // Cyclic Jacobi sweeps; quadratic convergence, a handful of sweeps for
    // the block sizes used here (<= 9).
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) off += S(p, q) * S(p, q);
        }
        if (std::sqrt(2.0 * off) <= 1e-15 * scale * n) break;

        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (std::abs(S(p, q)) <= 1e-18 * scale) continue;
                const double tau = (S(q, q) - S(p, p)) / (2.0 * S(p, q));
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double skp = S(k, p), skq = S(k, q);
                    S(k, p) = c * skp - s * skq;
                    S(k, q) = s * skp + c * skq;
                }
                for (int k = 0; k < n; ++k) {
                    const double spk = S(p, k), sqk = S(q, k);
                    S(p, k) = c * spk - s * sqk;
                    S(q, k) = s * spk + c * sqk;
                }
            }
        }
    }
    return {S.diagonal().minCoeff(), S.diagonal().maxCoeff()};
}

bool schur_negdef_check(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                        const Eigen::MatrixXd& Z, double margin) {
    if (Y.rows() != X.rows() || Y.cols() != Z.rows() || X.rows() != X.cols() ||
        Z.rows() != Z.cols()) {
        throw DomainError("schur_negdef_check: block dimensions do not conform");
    }
    auto check_sym = [](const Eigen::MatrixXd& M, const char* what) {
        if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + M.cwiseAbs().maxCoeff())) {
            throw DomainError(std::string("schur_negdef_check: ") + what + " must be symmetric");
        }
    };
    check_sym(X, "X");
    check_sym(Z, "Z");

    const int n = static_cast<int>(X.rows());
    const int m = static_cast<int>(Z.rows());
    Eigen::MatrixXd W(n + m, n + m);
    W.topLeftCorner(n, n) = X;
    W.topRightCorner(n, m) = Y;
    W.bottomLeftCorner(m, n) = Y.transpose();
    W.bottomRightCorner(m, m) = Z;
    if (margin < 0.0) margin = default_margin(W);
    return eig_extreme(W).second <= -margin;
}

VerifyReport verify(const LmiProblem& problem, const Eigen::VectorXd& v) {
    VerifyReport rep;
    rep.ok = true;
    for (int j = 0; j < static_cast<int>(problem.constraints().size()); ++j) {
        const Constraint& c = problem.constraints()[j];
        const Eigen::MatrixXd F = problem.eval(j, v);
        const auto [lmin, lmax] = eig_extreme(0.5 * (F + F.transpose()));
        if (c.sense == Sense::NegativeDefinite) {
            rep.extreme_eigs.push_back(lmax);
            if (!(lmax <= -c.margin)) rep.ok = false;
        } else {
            rep.extreme_eigs.push_back(lmin);
            if (!(lmin >= c.margin)) rep.ok = false;
        }
    }
    return rep;
}

namespace {

// Stacked-vec layout of all constraint blocks.
struct Stacking {
    std::vector<int> offset;
    int total = 0;
};

Stacking stacking_of(const LmiProblem& p) {
    Stacking s;
    for (const Constraint& c : p.constraints()) {
        s.offset.push_back(s.total);
        s.total += c.dim * c.dim;
    }
    return s;
}

Eigen::VectorXd initial_point(const LmiProblem& p, unsigned seed) {
    std::mt19937_64 rng(seed);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(p.packed_size());
    for (int k = 0; k < static_cast<int>(p.variables().size()); ++k) {
        const Variable& d = p.variables()[k];
        if (d.kind == VarKind::Symmetric) {
            Eigen::MatrixXd X = Eigen::MatrixXd::Identity(d.rows, d.cols);
            for (int j = 0; j < d.cols; ++j) {
                for (int i = 0; i <= j; ++i) {
                    const double r = 0.05 * uniform_pm(rng);
                    X(i, j) += r;
                    X(j, i) = X(i, j);
                }
            }
            p.set_value(k, X, v);
        } else if (d.kind == VarKind::Rectangular) {
            Eigen::MatrixXd X(d.rows, d.cols);
            for (int j = 0; j < d.cols; ++j) {
                for (int i = 0; i < d.rows; ++i) X(i, j) = 0.05 * uniform_pm(rng);
            }
            p.set_value(k, X, v);
        } else {
            v[d.offset] = 1.0 + 0.1 * uniform_pm(rng);
        }
    }
    return v;
}

// Spectral clip of one block toward its definiteness target.
Eigen::MatrixXd clip_block(const Eigen::MatrixXd& F, Sense sense, double target) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (F + F.transpose()));
    Eigen::VectorXd lam = es.eigenvalues();
    for (int i = 0; i < lam.size(); ++i) {
        if (sense == Sense::NegativeDefinite) {
            lam[i] = std::min(lam[i], -target);
        } else {
            lam[i] = std::max(lam[i], target);
        }
    }
    return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

bool margins_hold(const LmiProblem& p, const Eigen::VectorXd& v) {
    for (int j = 0; j < static_cast<int>(p.constraints().size()); ++j) {
        const Constraint& c = p.constraints()[j];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p.eval(j, v));
        if (c.sense == Sense::NegativeDefinite) {
            if (!(es.eigenvalues().maxCoeff() <= -c.margin)) return false;
        } else {
            if (!(es.eigenvalues().minCoeff() >= c.margin)) return false;
        }
    }
    return true;
}

}  // namespace

LmiSolution solve(const LmiProblem& problem, const SolveOptions& options) {
    const int dim = problem.packed_size();
    const int n_con = static_cast<int>(problem.constraints().size());
    const Stacking stack = stacking_of(problem);

    // The affine map v -> stacked constraint blocks; columns probed once.
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd c_stack(stack.total);
    for (int j = 0; j < n_con; ++j) {
        Eigen::Map<Eigen::VectorXd>(c_stack.data() + stack.offset[j],
                                    problem.constraints()[j].dim * problem.constraints()[j].dim) =
            Eigen::Map<const Eigen::VectorXd>(problem.constraints()[j].constant.data(),
                                              problem.constraints()[j].dim * problem.constraints()[j].dim);
    }
    Eigen::MatrixXd jac(stack.total, dim);
    for (int d = 0; d < dim; ++d) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
        e[d] = 1.0;
        for (int j = 0; j < n_con; ++j) {
            const Eigen::MatrixXd F = problem.eval(j, e);
            const Eigen::MatrixXd affine = F - problem.constraints()[j].constant;
            jac.block(stack.offset[j], d, affine.size(), 1) =
                Eigen::Map<const Eigen::VectorXd>(affine.data(), affine.size());
        }
    }
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(jac);

    LmiSolution best;
    int total_iterations = 0;
    Eigen::VectorXd last_iterate;

    for (int start = 1; start <= options.starts; ++start) {
        Eigen::VectorXd v = initial_point(problem, static_cast<unsigned>(start));
        bool feasible = false;

        for (int it = 0; it < options.max_iterations; ++it) {
            ++total_iterations;
            if (margins_hold(problem, v)) {
                feasible = true;
                break;
            }
            // Projection step: clip every block to its slackened target.
            Eigen::VectorXd target(stack.total);
            for (int j = 0; j < n_con; ++j) {
                const Constraint& c = problem.constraints()[j];
                const Eigen::MatrixXd F = problem.eval(j, v);
                const Eigen::MatrixXd T =
                    clip_block(F, c.sense, options.projection_slack * c.margin);
                target.segment(stack.offset[j], c.dim * c.dim) =
                    Eigen::Map<const Eigen::VectorXd>(T.data(), T.size()) -
                    Eigen::Map<const Eigen::VectorXd>(c.constant.data(), c.constant.size());
            }
            // Refit onto the variable parameterization.
            v = qr.solve(target);
        }

        if (feasible) {
            const VerifyReport rep = verify(problem, v);
            if (rep.ok) {
                best.status = LmiSolution::Status::Feasible;
                best.packed = v;
                best.extreme_eigs = rep.extreme_eigs;
                best.iterations = total_iterations;
                best.starts_used = start;
                return best;
            }
        }
        last_iterate = v;
    }

    // No certificate within budget. Keep the last iterate and its margins as
    // diagnostics; this is not a proof of infeasibility.
    best.status = LmiSolution::Status::NotFound;
    best.iterations = total_iterations;
    best.starts_used = options.starts;
    best.packed = last_iterate;
    best.extreme_eigs = verify(problem, last_iterate).extreme_eigs;
    return best;
}

ExpandedLmi expand(const LmiProblem& problem) {
    ExpandedLmi e;
    e.packed_size = problem.packed_size();
    for (int j = 0; j < static_cast<int>(problem.constraints().size()); ++j) {
        const Constraint& c = problem.constraints()[j];
        ExpandedLmi::Block b;
        b.name = c.name;
        b.dim = c.dim;
        b.sense = c.sense;
        b.margin = c.margin;
        b.constant = c.constant;
        for (int d = 0; d < e.packed_size; ++d) {
            Eigen::VectorXd unit = Eigen::VectorXd::Zero(e.packed_size);
            unit[d] = 1.0;
            b.coeff.push_back(problem.eval(j, unit) - c.constant);
        }
        e.blocks.push_back(std::move(b));
    }
    return e;
}

Eigen::MatrixXd ExpandedLmi::eval(int block, const Eigen::VectorXd& v) const {
    const Block& b = blocks.at(block);
    Eigen::MatrixXd F = b.constant;
    for (int d = 0; d < packed_size; ++d) F += v[d] * b.coeff[d];
    return F;
}

void dump(const ExpandedLmi& e, std::ostream& os) {
    os.precision(17);
    os << "lmi 1\n" << e.packed_size << ' ' << e.blocks.size() << '\n';
    for (const auto& b : e.blocks) {
        os << b.name << ' ' << b.dim << ' '
           << (b.sense == Sense::NegativeDefinite ? "neg" : "pos") << ' ' << b.margin << '\n';
        for (int i = 0; i < b.dim; ++i) {
            for (int j = 0; j < b.dim; ++j) os << b.constant(i, j) << (j + 1 < b.dim ? ' ' : '\n');
        }
        for (const auto& C : b.coeff) {
            for (int i = 0; i < b.dim; ++i) {
                for (int j = 0; j < b.dim; ++j) os << C(i, j) << (j + 1 < b.dim ? ' ' : '\n');
            }
        }
    }
}

ExpandedLmi load(std::istream& is) {
    std::string tag;
    int version = 0;
    is >> tag >> version;
    if (tag != "lmi" || version != 1) throw ConfigError("lmi::load: unrecognized header");
    ExpandedLmi e;
    size_t blocks = 0;
    is >> e.packed_size >> blocks;
    for (size_t k = 0; k < blocks; ++k) {
        ExpandedLmi::Block b;
        std::string sense;
        is >> b.name >> b.dim >> sense >> b.margin;
        b.sense = sense == "neg" ? Sense::NegativeDefinite : Sense::PositiveDefinite;
        b.constant.resize(b.dim, b.dim);
        for (int i = 0; i < b.dim; ++i) {
            for (int j = 0; j < b.dim; ++j) is >> b.constant(i, j);
        }
        for (int d = 0; d < e.packed_size; ++d) {
            Eigen::MatrixXd C(b.dim, b.dim);
            for (int i = 0; i < b.dim; ++i) {
                for (int j = 0; j < b.dim; ++j) is >> C(i, j);
            }
            b.coeff.push_back(C);
        }
        if (!is) throw ConfigError("lmi::load: truncated file");
        e.blocks.push_back(std::move(b));
    }
    return e;
}

}  // namespace lpvlk::lmi
