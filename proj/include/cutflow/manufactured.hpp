#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cutflow/solver.hpp"

namespace cutflow {

// Smooth divergence-free velocity and a side-dependent pressure centred on the circle.
struct ExactSolutionSpec {
    Point center{0.5, 0.5};
    double radius = 0.23;
    double cp_minus = 1.0, cp_plus = 3.0;
    PhysicalParams phys; // nu+ = 2, nu- = 1

    double cp(Side s) const { return s == Side::Plus ? cp_plus : cp_minus; }
    LevelSet levelset() const { return LevelSet::circle(center, radius); }
};

struct ExactFields {
    Eigen::Vector2d u;
    Eigen::Matrix2d grad_u; // (i,j) = d u_i / d x_j
    double p;
    Eigen::Vector2d grad_p;
};

ExactFields exact_fields(const ExactSolutionSpec& spec, const Point& x, Side s);

// -nu Laplacian u + grad p
Eigen::Vector2d forcing(const ExactSolutionSpec& spec, const Point& x, Side s);

// normal stress jump for the unit normal `n_plus` pointing into the inner region
Eigen::Vector2d interface_force(const ExactSolutionSpec& spec, const Point& x, const Eigen::Vector2d& n_plus);

// sigma(u,p) n on side s
Eigen::Vector2d exact_traction(const ExactSolutionSpec& spec, const Point& x, Side s, const Eigen::Vector2d& n);

struct ErrorReport {
    int n = 0;
    double h = 0.0;
    double l2_u = 0.0, h1_u = 0.0, l2_p = 0.0, lambda = 0.0, phi = 0.0;
    double residual = 0.0;
};

// one interface quadrature sample for the multiplier quotient
struct LambdaSample {
    double w;
    Eigen::Vector2d plus_h, minus_h, plus_ex, minus_ex;
};

// sqrt( sum |l+ - t+|^2 + |l- - t-|^2 ) / sqrt( sum |t+|^2 + |t-|^2 ), weighted
double lambda_error(const std::vector<LambdaSample>& samples);

ErrorReport compute_errors(const FieldSolution& sol, const ExactSolutionSpec& spec);

struct ManufacturedRun {
    FemTriplet triplet;
    int n = 10;
    int quad_boost = 0;
    StabilizationParams stab;
    ExactSolutionSpec spec;
    SolveOptions solve;
    DiscretizationOptions disc;
};

FieldSolution solve_manufactured(const ManufacturedRun& run);
ErrorReport run_manufactured(const ManufacturedRun& run);

// least-squares slope of log(y) against log(x)
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct ConvergenceTable {
    std::vector<ErrorReport> rows;
    double slope_l2_u = 0, slope_h1_u = 0, slope_l2_p = 0, slope_lambda = 0, slope_phi = 0;
};

// independent runs are spread over `jobs` threads; output order never depends on it
ConvergenceTable convergence_study(const ManufacturedRun& base, const std::vector<int>& ns, int jobs = 1);

struct GammaPoint {
    double gamma0;
    double lambda_error;
};

std::vector<GammaPoint> sweep_gamma(const ManufacturedRun& base, const std::vector<double>& gamma0s, int jobs = 1);

struct CenterPoint {
    double xc;
    // empty when the solve failed at this position
    std::optional<double> unstabilized, stabilized;
    std::string failure;
    bool spike = false;
};

std::vector<CenterPoint> sweep_center(const ManufacturedRun& base,
                                      const std::vector<double>& xcs,
                                      double gamma0,
                                      int jobs = 1);

void write_convergence_csv(const ConvergenceTable& t, std::ostream& out);
void write_gamma_csv(const std::vector<GammaPoint>& pts, std::ostream& out);
void write_center_csv(const std::vector<CenterPoint>& pts, std::ostream& out);

} // namespace cutflow
