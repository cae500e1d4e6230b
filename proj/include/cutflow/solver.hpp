#pragma once

#include <memory>

#include "cutflow/assembly.hpp"

namespace cutflow {

// UMFPACK factorization of a square sparse matrix.
class SparseLU {
  public:
    // `layout` is only used to name the block of a zero pivot
    SparseLU(const SparseMatrix& a, const BlockLayout* layout = nullptr, double rcond_min = 1e-18);
    ~SparseLU();
    SparseLU(const SparseLU&) = delete;
    SparseLU& operator=(const SparseLU&) = delete;

    Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
    double rcond() const { return rcond_; }

  private:
    SparseMatrix a_;
    void* numeric_ = nullptr;
    double rcond_ = 0.0;
};

struct SolveOptions {
    double residual_tol = 1e-10;
    double rcond_min = 1e-18;
};

class FieldSolution {
  public:
    FieldSolution() = default;
    FieldSolution(std::shared_ptr<const Discretization> disc, Eigen::VectorXd x);

    const Discretization& disc() const { return *disc_; }
    std::shared_ptr<const Discretization> disc_ptr() const { return disc_; }
    const Eigen::VectorXd& vector() const { return x_; }
    Eigen::VectorXd block(Block b) const;
    double residual = 0.0;
    double rcond = 0.0; // UMFPACK pivot-ratio estimate

    // prescribed outer-boundary values of u+ (global numbering), added to velocity evaluations
    void set_boundary_values(Eigen::VectorXd boundary) { boundary_ = std::move(boundary); }

    // coefficients in the global numbering c * N + g, zero off the active set
    Eigen::VectorXd velocity_global(Side s) const;
    Eigen::VectorXd pressure_global(Side s) const;

    Eigen::Vector2d velocity(Side s, int t, const Point& x) const;
    Eigen::Matrix2d velocity_gradient(Side s, int t, const Point& x) const; // (i,j) = d u_i / d x_j
    double pressure(Side s, int t, const Point& x) const;
    Eigen::Vector2d multiplier(Side s, int t, const Point& x) const;
    Eigen::Vector2d phi(int t, const Point& x) const;

    // whole-domain fields, side chosen by the sign of the level set
    Eigen::Vector2d velocity(const Point& x) const;
    double pressure(const Point& x) const;

  private:
    bool has_boundary(Side s) const { return s == Side::Plus && boundary_.size() > 0; }

    std::shared_ptr<const Discretization> disc_;
    Eigen::VectorXd x_;
    Eigen::VectorXd boundary_;
};

// throws SingularMatrixError or NumericalError (residual check)
FieldSolution solve(const BlockSaddleSystem& sys, const SolveOptions& opts = {});
FieldSolution solve(std::shared_ptr<const Discretization> disc,
                    const SparseMatrix& a,
                    const Eigen::VectorXd& b,
                    const SolveOptions& opts = {});

} // namespace cutflow
