#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "cutflow/cut_integration.hpp"

namespace cutflow {

// Continuous Lagrange P_k (k >= 1) or discontinuous P0 on the structured mesh.
// P_k nodes form the (kn+1)^2 lattice, so global dof ids are lattice indices.
class ScalarSpace {
  public:
    ScalarSpace(std::shared_ptr<const CartesianMesh> mesh, int degree);

    int degree() const { return k_; }
    int num_dofs() const { return ndofs_; }
    int num_local() const { return nloc_; }
    const CartesianMesh& mesh() const { return *mesh_; }
    std::shared_ptr<const CartesianMesh> mesh_ptr() const { return mesh_; }

    const int* element_dofs(int t) const { return &elem_dofs_[t * nloc_]; }
    const std::vector<int>& support(int dof) const { return support_[dof]; }
    Point dof_point(int dof) const;
    bool on_boundary(int dof) const;

    // values (and gradients when non-null) of the local basis of triangle t at x
    void eval(int t, const Point& x, double* val, Eigen::Vector2d* grad = nullptr) const;

  private:
    std::shared_ptr<const CartesianMesh> mesh_;
    int k_, ndofs_, nloc_;
    std::vector<std::array<int, 3>> alpha_;
    std::vector<int> elem_dofs_;
    std::vector<std::vector<int>> support_;
    std::vector<std::array<Eigen::Vector2d, 3>> grad_bary_;
};

// Dofs of one side: kept when their support meets the side with positive area,
// active when kept and not fixed by the homogeneous Dirichlet condition.
class FictitiousDofMap {
  public:
    FictitiousDofMap(const ScalarSpace& space,
                     const CutDecomposition& cut,
                     Side side,
                     bool dirichlet_on_boundary);

    Side side() const { return side_; }
    const std::vector<int>& kept() const { return kept_; }
    const std::vector<int>& active() const { return active_; }
    int size() const { return static_cast<int>(active_.size()); }
    int local(int dof) const { return local_[dof]; }
    bool is_kept(int dof) const { return kept_flag_[dof] != 0; }
    bool constrained(int dof) const { return kept_flag_[dof] != 0 && local_[dof] < 0; }
    int global_size() const { return static_cast<int>(local_.size()); }

    // restriction / extension by zero between global and active numbering
    Eigen::VectorXd reduce(const Eigen::VectorXd& global) const;
    Eigen::VectorXd extend(const Eigen::VectorXd& local) const;

  private:
    Side side_;
    std::vector<int> kept_, active_, local_;
    std::vector<char> kept_flag_;
};

// Traces on the discrete interface of the bulk basis of `generator` whose support meets it,
// minus the ones that are linearly redundant in L2(Gamma).
class TraceSpace {
  public:
    TraceSpace(std::shared_ptr<const ScalarSpace> generator,
               const CutDecomposition& cut,
               double tol_rank = 1e-10);

    const ScalarSpace& generator() const { return *gen_; }
    const std::vector<int>& candidates() const { return candidates_; }
    const std::vector<int>& survivors() const { return survivors_; }
    int size() const { return static_cast<int>(survivors_.size()); }
    int local(int dof) const { return local_[dof]; }
    int quad_order() const { return order_; }

    // Gram matrix of candidates (full) and of survivors
    const Eigen::MatrixXd& candidate_gram() const { return cand_gram_; }
    Eigen::MatrixXd survivor_gram() const;

  private:
    std::shared_ptr<const ScalarSpace> gen_;
    int order_;
    std::vector<int> candidates_, survivors_, local_;
    Eigen::MatrixXd cand_gram_;
    std::vector<int> cand_pos_;
};

using ScalarFunction = std::function<double(const Point&)>;

// nodal interpolation for k >= 1, cell means for P0
Eigen::VectorXd interpolate(const ScalarSpace& space, const ScalarFunction& f);

// value of a global coefficient vector at x
double evaluate(const ScalarSpace& space, const Eigen::VectorXd& coef, const Point& x);

// L2(Gamma) projection onto the survivors; returns survivor coefficients
Eigen::VectorXd project_trace(const TraceSpace& trace,
                              const CutDecomposition& cut,
                              const ScalarFunction& f);

} // namespace cutflow
