#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <unordered_map>

#include <Eigen/Sparse>

#include "cutflow/fe_spaces.hpp"

namespace cutflow {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Triplet = Eigen::Triplet<double, int>;

struct FemTriplet {
    int k_u = 2, k_p = 1, k_lambda = 0;

    // "P2/P1/P0"
    static FemTriplet parse(const std::string& s);
    std::string name() const;
};

struct PhysicalParams {
    double nu_plus = 2.0, nu_minus = 1.0;
    double rho_plus = 0.0, rho_minus = 0.0;

    double nu(Side s) const { return s == Side::Plus ? nu_plus : nu_minus; }
    double rho(Side s) const { return s == Side::Plus ? rho_plus : rho_minus; }
};

struct StabilizationParams {
    double alpha0 = 0.0;
    double gamma0 = 0.0; // scaled by the mesh size
};

// Geometry-independent ingredients: mesh and the three scalar spaces.
struct Spaces {
    std::shared_ptr<const CartesianMesh> mesh;
    FemTriplet triplet;
    std::shared_ptr<const ScalarSpace> velocity, pressure, multiplier;
    int quad_boost = 0;

    int volume_order() const { return 2 * std::max(triplet.k_u, triplet.k_p + 1) + quad_boost; }
    int interface_order() const { return 2 * triplet.k_u + 2 + quad_boost; }
};

std::shared_ptr<const Spaces> make_spaces(int n, const FemTriplet& triplet, int quad_boost = 0);

enum class Block { UPlus, PPlus, LPlus, UMinus, PMinus, LMinus, Phi, Mean };
constexpr int num_blocks = 8;
const char* block_name(Block b);

struct BlockLayout {
    std::array<int, num_blocks + 1> offset{};

    int size() const { return offset[num_blocks]; }
    int begin(Block b) const { return offset[static_cast<int>(b)]; }
    int length(Block b) const { return offset[static_cast<int>(b) + 1] - offset[static_cast<int>(b)]; }
    Block block_of(int row) const;
};

inline Block velocity_block(Side s) { return s == Side::Plus ? Block::UPlus : Block::UMinus; }
inline Block pressure_block(Side s) { return s == Side::Plus ? Block::PPlus : Block::PMinus; }
inline Block multiplier_block(Side s) { return s == Side::Plus ? Block::LPlus : Block::LMinus; }

struct DiscretizationOptions {
    CutOptions cut;
    double tol_rank = 1e-10;
};

// Everything that depends on the interface position.
struct Discretization {
    std::shared_ptr<const Spaces> spaces;
    std::shared_ptr<const CutDecomposition> cut;
    std::array<std::shared_ptr<const FictitiousDofMap>, 2> velocity; // by side_index
    std::array<std::shared_ptr<const FictitiousDofMap>, 2> pressure;
    std::shared_ptr<const TraceSpace> trace; // multipliers and interface velocity
    BlockLayout layout;

    const FictitiousDofMap& vel(Side s) const { return *velocity[side_index(s)]; }
    const FictitiousDofMap& pres(Side s) const { return *pressure[side_index(s)]; }

    // system index of velocity component c of scalar dof g on side s, -1 if not active
    int velocity_index(Side s, int c, int g) const;
    int pressure_index(Side s, int g) const;
    int multiplier_index(Side s, int c, int g) const;
    int phi_index(int c, int g) const;
};

std::shared_ptr<const Discretization> discretize(std::shared_ptr<const Spaces> spaces,
                                                 const LevelSet& ls,
                                                 const DiscretizationOptions& opts = {});

// Whole-domain bulk operators in the global (uncut) numbering, assembled once per mesh.
// Velocity dofs are numbered c * N + g.
struct GlobalStiffnessCache {
    SparseMatrix strain; // int eps(u):eps(v)
    SparseMatrix div;    // -int q div v, pressure rows
    SparseMatrix mass;   // int u.v, empty unless requested
    Eigen::VectorXd pmean;
};

std::shared_ptr<const GlobalStiffnessCache> assemble_global_stiffness(const Spaces& spaces,
                                                                      bool with_mass = false);

// One side's bulk operators in global numbering, kept equal to the side integrals on every
// element that carries an active dof of that side.
class SideBulk {
  public:
    SideBulk(const GlobalStiffnessCache& full, Side side);

    // bring every needed element in line with `disc`; returns the number of scattered entries
    long sync(const Discretization& disc);

    Side side() const { return side_; }
    const SparseMatrix& strain() const { return strain_; }
    const SparseMatrix& div() const { return div_; }
    const SparseMatrix& mass() const { return mass_; }
    const Eigen::VectorXd& pmean() const { return pmean_; }

    struct Local {
        Eigen::MatrixXd strain, div, mass;
        Eigen::VectorXd pmean;
    };

  private:
    enum class State : unsigned char { Full, Zero, Partial };

    Side side_;
    bool with_mass_;
    SparseMatrix strain_, div_, mass_;
    Eigen::VectorXd pmean_;
    std::vector<State> state_;
    std::unordered_map<int, Local> partial_;

    long scatter(const Spaces& sp, int t, const Local& delta);
};

struct BlockSaddleSystem {
    std::shared_ptr<const Discretization> disc;
    PhysicalParams phys;
    StabilizationParams stab;
    std::shared_ptr<const GlobalStiffnessCache> cache;
    std::array<std::shared_ptr<SideBulk>, 2> bulk;
    SparseMatrix matrix;
    Eigen::VectorXd rhs;
    long touched_entries = 0;

    double gamma() const { return stab.gamma0 * disc->spaces->mesh->h(); }
};

BlockSaddleSystem assemble_system(std::shared_ptr<const Discretization> disc,
                                  const PhysicalParams& phys,
                                  const StabilizationParams& stab,
                                  std::shared_ptr<const GlobalStiffnessCache> cache);

// same matrix as a fresh assembly on `disc`, reusing the caches of `old`
BlockSaddleSystem update_system(BlockSaddleSystem&& old, std::shared_ptr<const Discretization> disc);

using VolumeForce = std::function<Eigen::Vector2d(const Point&)>;
using InterfaceForce = std::function<Eigen::Vector2d(const InterfaceQuadPoint&)>;

// int f+ . v+ + int f- . v- + int_Gamma g . phi
Eigen::VectorXd assemble_rhs(const Discretization& disc,
                             const VolumeForce& f_plus,
                             const VolumeForce& f_minus,
                             const InterfaceForce& g);

using VectorField = std::function<Eigen::Vector2d(const Point&)>;

// nodal values of g at the constrained outer-boundary velocity dofs, global numbering c * N + g
Eigen::VectorXd interpolate_boundary(const Discretization& disc, const VectorField& g);

// -A(:, constrained) * boundary, the load of prescribed u+ values on the outer boundary
Eigen::VectorXd dirichlet_lift(const BlockSaddleSystem& sys, const Eigen::VectorXd& boundary);

// side velocity mass matrix in active numbering (requires a cache built with mass)
SparseMatrix side_mass(const BlockSaddleSystem& sys, Side s);

void write_matrix_triplets(const SparseMatrix& m, std::ostream& out);

} // namespace cutflow
