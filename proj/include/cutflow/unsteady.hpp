#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "cutflow/solver.hpp"

namespace cutflow {

struct EllipseState {
    double a1 = 0.3537, a2 = 0.2037;
    Point center{0.5, 0.5};
    double t = 0.0;

    LevelSet levelset() const; // validates positivity and containment
    double perimeter() const { return levelset().perimeter(); }
};

// L2(Gamma_h) moments driving the axis update:
// sq[i] = int Phi_i^2, cross[i] = int (x_i - c_i) Phi_i, norm = ||Phi||
struct AxisMoments {
    std::array<double, 2> sq{0, 0}, cross{0, 0};
    double norm = 0.0;
};

AxisMoments axis_moments(const CutDecomposition& cut,
                         const Point& center,
                         const std::function<Eigen::Vector2d(int, const Point&)>& phi,
                         int order);
AxisMoments axis_moments(const FieldSolution& sol, const Point& center);

struct AdvanceResult {
    EllipseState state;
    std::array<bool, 2> frozen{false, false};
};

// a_i <- a_i / (1 - dt sq_i / cross_i); an axis whose cross moment is negligible is frozen.
// Throws NumericalError when a factor would be non-positive.
AdvanceResult advance_ellipse(const EllipseState& s, const AxisMoments& m, double dt);

struct EvolutionParams {
    PhysicalParams phys{0.1, 0.05, 0.0, 0.0};
    double mu = 50.0;
    EllipseState initial;
    double T = 0.1, dt = 0.00025;
    StabilizationParams stab{0.01, 0.01};
    int n = 40;
    FemTriplet triplet{3, 2, 1};
    int quad_boost = 0;
    DiscretizationOptions disc;
    SolveOptions solve;
    bool incremental = true; // reuse the bulk operators between steps
    double newton_tol = 1e-10;
    int newton_max = 20;

    int steps() const; // T / dt, which must be an integer
};

EvolutionParams stokes_defaults();
EvolutionParams nse_defaults();

struct StepRecord {
    double t, a1, a2, length, energy, mass_err_pct;
    int newton_iters = 0;
    std::array<bool, 2> frozen{false, false};
};

struct EvolutionRecord {
    std::vector<StepRecord> steps;
    std::string abort_reason; // empty on success
    double initial_mass = 0.0;
};

// g = -mu kappa n+ on the discrete interface, zero volume forces
Eigen::VectorXd surface_tension_rhs(const Discretization& disc, double mu);

FieldSolution steklov_solve(const BlockSaddleSystem& sys, double mu, const SolveOptions& opts = {});

// side velocities of `old` carried to the active sets of `disc`, in system layout (velocity blocks only);
// nodes outside their own side take the old physical field there
Eigen::VectorXd transfer_velocity(const FieldSolution& old, const Discretization& disc);

struct NewtonInfo {
    int iterations = 0;
    std::vector<double> residuals;
};

// one implicit Euler step of the two-phase Navier-Stokes system on the frozen geometry of `sys`;
// sys.cache must include the mass matrix
FieldSolution navier_stokes_step(const BlockSaddleSystem& sys,
                                 double mu,
                                 const Eigen::VectorXd& previous_velocity,
                                 double dt,
                                 double newton_tol,
                                 int newton_max,
                                 NewtonInfo* info = nullptr,
                                 const SolveOptions& opts = {});

// called after each solve; step k is the solve on the geometry at t_k, before advancing
using StepObserver = std::function<void(int step, const EllipseState&, const FieldSolution&)>;

EvolutionRecord stokes_evolution(const EvolutionParams& p, const StepObserver& observe = {});
EvolutionRecord nse_evolution(const EvolutionParams& p, const StepObserver& observe = {});

void write_evolution_csv(const EvolutionRecord& r, std::ostream& out);

struct BubbleParams {
    double h = 0.05; // n = round(1 / h)
    double mu = 1.0, r = 0.25;
    PhysicalParams phys{1.0, 1.0, 0.0, 0.0};
    StabilizationParams stab{0.01, 0.01};
    FemTriplet triplet;
};

struct BubbleResult {
    int n = 0;
    double h = 0.0;
    double p_plus = 0, p_minus = 0, dp = 0, deviation = 0, ratio = 0;
    double max_velocity = 0;
};

// pressures averaged over the uncut elements of each side
BubbleResult static_bubble(const BubbleParams& p);

void write_bubble_csv(const std::vector<BubbleResult>& rows, std::ostream& out);

} // namespace cutflow
