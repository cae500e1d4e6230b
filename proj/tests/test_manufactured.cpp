#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "cutflow/errors.hpp"
#include "cutflow/manufactured.hpp"

using namespace cutflow;

namespace {

constexpr double pi = std::numbers::pi;

// integral of f over the disk |x - c| < R by a polar Gauss product rule
double disk_integral(const std::function<double(const Point&)>& f, const Point& c, double R) {
    const auto& g = gauss_legendre_unit(24);
    double s = 0.0;
    for (auto [tr, wr] : g)
        for (int k = 0; k < 96; ++k) {
            double r = R * tr, th = 2 * pi * (k + 0.5) / 96;
            s += wr * R * (2 * pi / 96) * r * f(c + r * Point(std::cos(th), std::sin(th)));
        }
    return s;
}

// integral over the unit square by a tensor product of composite Gauss rules
double square_integral(const std::function<double(const Point&)>& f) {
    const auto& g = gauss_legendre_unit(8);
    const int m = 16;
    double s = 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (auto [tx, wx] : g)
                for (auto [ty, wy] : g)
                    s += wx * wy / (m * m) * f(Point((i + tx) / m, (j + ty) / m));
    return s;
}

} // namespace

TEST(ExactSolution, ClosedFormValues) {
    ExactSolutionSpec spec;
    ExactFields f = exact_fields(spec, Point(0.5, 0.25), Side::Minus);
    EXPECT_NEAR(f.u.x(), 0.0, 1e-15);
    EXPECT_NEAR(f.u.y(), -std::sqrt(0.5), 1e-15);
    for (Side s : {Side::Plus, Side::Minus})
        EXPECT_EQ(exact_fields(spec, spec.center, s).p, 0.0);
    // pressure jump is linear in the side amplitudes
    Point x(0.61, 0.33);
    double X = x.x() - 0.5, Y = x.y() - 0.5;
    double jump = exact_fields(spec, x, Side::Plus).p - exact_fields(spec, x, Side::Minus).p;
    EXPECT_NEAR(jump, 2.0 * (Y * std::cos(2 * pi * x.x()) + X * std::sin(2 * pi * x.y())), 1e-14);
}

TEST(ExactSolution, VelocityIsDivergenceFree) {
    ExactSolutionSpec spec;
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 100; ++k) {
        Point x(u(rng), u(rng));
        EXPECT_NEAR(exact_fields(spec, x, Side::Plus).grad_u.trace(), 0.0, 1e-12);
    }
}

TEST(ExactSolution, PressureHasZeroMeanOnBothSides) {
    ExactSolutionSpec spec;
    auto pm = [&](const Point& x) { return exact_fields(spec, x, Side::Minus).p; };
    auto pp = [&](const Point& x) { return exact_fields(spec, x, Side::Plus).p; };
    EXPECT_NEAR(disk_integral(pm, spec.center, spec.radius), 0.0, 1e-8);
    double outer = square_integral(pp) - disk_integral(pp, spec.center, spec.radius);
    EXPECT_NEAR(outer, 0.0, 1e-8);
}

TEST(ExactSolution, GradientsMatchFiniteDifferences) {
    ExactSolutionSpec spec;
    const double e = 1e-5;
    for (Point x : {Point(0.5, 0.5), Point(0.2, 0.7), Point(0.83, 0.41)})
        for (Side s : {Side::Plus, Side::Minus}) {
            ExactFields f = exact_fields(spec, x, s);
            for (int j = 0; j < 2; ++j) {
                Point d = Point::Zero();
                d[j] = e;
                ExactFields a = exact_fields(spec, x + d, s), b = exact_fields(spec, x - d, s);
                EXPECT_NEAR(f.grad_p[j], (a.p - b.p) / (2 * e), 1e-8);
                for (int i = 0; i < 2; ++i)
                    EXPECT_NEAR(f.grad_u(i, j), (a.u[i] - b.u[i]) / (2 * e), 1e-8);
            }
        }
}

TEST(ExactSolution, ForcingMatchesFiniteDifferenceOperator) {
    ExactSolutionSpec spec;
    const double e = 1e-4;
    for (Point x : {Point(0.5, 0.5), Point(0.31, 0.62)})
        for (Side s : {Side::Plus, Side::Minus}) {
            auto u = [&](const Point& y) { return exact_fields(spec, y, s).u; };
            auto p = [&](const Point& y) { return exact_fields(spec, y, s).p; };
            Point dx(e, 0), dy(0, e);
            Eigen::Vector2d lap = (u(x + dx) + u(x - dx) + u(x + dy) + u(x - dy) - 4 * u(x)) / (e * e);
            Eigen::Vector2d gp((p(x + dx) - p(x - dx)) / (2 * e), (p(x + dy) - p(x - dy)) / (2 * e));
            Eigen::Vector2d fd = -spec.phys.nu(s) * lap + gp;
            EXPECT_LT((forcing(spec, x, s) - fd).norm(), 1e-6);
        }
}

TEST(ExactSolution, InterfaceForceVanishesForIdenticalPhases) {
    ExactSolutionSpec spec;
    spec.phys.nu_plus = spec.phys.nu_minus = 1.3;
    spec.cp_plus = spec.cp_minus = 2.0;
    for (int k = 0; k < 12; ++k) {
        double th = 2 * pi * k / 12;
        Eigen::Vector2d n(std::cos(th), std::sin(th));
        EXPECT_LT(interface_force(spec, spec.center + spec.radius * n, -n).norm(), 1e-15);
    }
}

TEST(ExactSolution, InterfaceForceIsTractionJump) {
    ExactSolutionSpec spec;
    Point x = spec.center + spec.radius * Point(0.6, 0.8);
    Eigen::Vector2d n(-0.6, -0.8);
    ExactFields f = exact_fields(spec, x, Side::Plus), g = exact_fields(spec, x, Side::Minus);
    Eigen::Matrix2d eps = 0.5 * (f.grad_u + f.grad_u.transpose());
    Eigen::Vector2d expect = 2 * (spec.phys.nu_plus - spec.phys.nu_minus) * eps * n - (f.p - g.p) * n;
    EXPECT_LT((interface_force(spec, x, n) - expect).norm(), 1e-14);
}

TEST(LambdaError, HandComputedQuotient) {
    std::vector<LambdaSample> s{
        {0.5, {1, 0}, {0, 0}, {1, 1}, {0, 1}},
        {0.25, {2, 2}, {1, 0}, {2, 0}, {1, 0}},
        {0.25, {0, 0}, {0, 3}, {0, 1}, {0, 2}},
    };
    // numerator 0.5*(1+1) + 0.25*(4+0) + 0.25*(1+1) = 2.5
    // denominator 0.5*(2+1) + 0.25*(4+1) + 0.25*(1+4) = 4
    EXPECT_NEAR(lambda_error(s), std::sqrt(2.5 / 4.0), 1e-14);
    std::vector<LambdaSample> zero{{1.0, {1, 0}, {1, 0}, {0, 0}, {0, 0}}};
    EXPECT_THROW(lambda_error(zero), InvalidArgument);
}

TEST(LambdaError, CellAveragedTractionConvergesAtFirstOrder) {
    ExactSolutionSpec spec;
    std::vector<double> hs, errs;
    for (int n : {10, 20, 40, 80}) {
        auto mesh = std::make_shared<const CartesianMesh>(n, Rectangle{});
        CutDecomposition cut(mesh, spec.levelset());
        std::vector<LambdaSample> samples;
        for (int t : cut.cut_cells()) {
            auto rule = cut.interface_rule(t, 10);
            Eigen::Vector2d mp = Eigen::Vector2d::Zero(), mm = mp;
            double len = 0.0;
            for (const auto& q : rule) {
                mp += q.w * exact_traction(spec, q.x, Side::Plus, -q.normal);
                mm += q.w * exact_traction(spec, q.x, Side::Minus, q.normal);
                len += q.w;
            }
            for (const auto& q : rule)
                samples.push_back({q.w, mp / len, mm / len, exact_traction(spec, q.x, Side::Plus, -q.normal),
                                   exact_traction(spec, q.x, Side::Minus, q.normal)});
        }
        hs.push_back(mesh->h());
        errs.push_back(lambda_error(samples));
    }
    EXPECT_NEAR(loglog_slope(hs, errs), 1.0, 0.1);
}

TEST(Interpolation, VelocityInterpolantConvergesAtOptimalOrder) {
    ExactSolutionSpec spec;
    for (int k : {2, 3}) {
        std::vector<double> hs, errs;
        for (int n : {4, 8, 16}) {
            auto mesh = std::make_shared<const CartesianMesh>(n, Rectangle{});
            ScalarSpace sp(mesh, k);
            auto f = [&](const Point& x) { return exact_fields(spec, x, Side::Minus).u.x(); };
            Eigen::VectorXd c = interpolate(sp, f);
            double e = 0.0;
            for (int t = 0; t < mesh->num_triangles(); ++t)
                for (const auto& qp : triangle_rule(mesh->triangle_points(t), 2 * k + 4))
                    e += qp.w * std::pow(evaluate(sp, c, qp.x) - f(qp.x), 2);
            hs.push_back(mesh->h());
            errs.push_back(std::sqrt(e));
        }
        EXPECT_NEAR(loglog_slope(hs, errs), k + 1.0, 0.25) << "degree " << k;
    }
}

TEST(Slope, ExactPowerLaw) {
    std::vector<double> h{0.1, 0.05, 0.025, 0.0125}, y;
    for (double x : h)
        y.push_back(3.7 * std::pow(x, 2.5));
    EXPECT_NEAR(loglog_slope(h, y), 2.5, 1e-12);
    EXPECT_THROW(loglog_slope({1.0}, {1.0}), InvalidArgument);
}

TEST(Studies, ConvergenceNeedsThreeMeshes) {
    EXPECT_THROW(convergence_study(ManufacturedRun{}, {10, 20}), InvalidArgument);
}

TEST(Studies, GammaSweepRejectsNonPositiveValues) {
    EXPECT_THROW(sweep_gamma(ManufacturedRun{}, {0.02, 0.0}), InvalidArgument);
}

TEST(Studies, GammaSweepApproachesUnstabilizedLimit) {
    ManufacturedRun base;
    double unstab = run_manufactured(base).lambda;
    auto pts = sweep_gamma(base, {1e-9});
    EXPECT_NEAR(pts[0].lambda_error, unstab, 1e-6 * unstab);
}

TEST(Studies, MirroredCentersGiveComparableErrors) {
    ManufacturedRun base;
    for (double d : {0.03, 0.07}) {
        auto pts = sweep_center(base, {0.5 - d, 0.5 + d}, 0.02);
        ASSERT_TRUE(pts[0].stabilized && pts[1].stabilized);
        ASSERT_TRUE(pts[0].unstabilized && pts[1].unstabilized);
        EXPECT_NEAR(*pts[0].stabilized / *pts[1].stabilized, 1.0, 0.2) << "delta " << d;
        EXPECT_NEAR(*pts[0].unstabilized / *pts[1].unstabilized, 1.0, 0.2) << "delta " << d;
    }
}

TEST(Studies, CenterSweepRejectsCirclesLeavingTheDomain) {
    EXPECT_THROW(sweep_center(ManufacturedRun{}, {0.2}, 0.02), InvalidArgument);
}

TEST(Errors, ResidualAndNonnegativity) {
    ManufacturedRun run;
    run.stab = {0.0, 0.02};
    ErrorReport r = run_manufactured(run);
    EXPECT_LE(r.residual, 1e-10);
    for (double e : {r.l2_u, r.h1_u, r.l2_p, r.lambda, r.phi})
        EXPECT_GT(e, 0.0);
    EXPECT_LT(r.l2_u, 0.05);
}

TEST(Errors, StabilizedErrorsDecreaseUnderRefinement) {
    ManufacturedRun base;
    base.stab = {0.0, 0.02};
    ConvergenceTable tab = convergence_study(base, {10, 20, 40});
    int exceptions = 0;
    for (std::size_t i = 1; i < tab.rows.size(); ++i) {
        const ErrorReport &a = tab.rows[i - 1], &b = tab.rows[i];
        for (auto [x, y] : {std::pair{a.l2_u, b.l2_u}, {a.h1_u, b.h1_u}, {a.l2_p, b.l2_p},
                            {a.lambda, b.lambda}, {a.phi, b.phi}})
            exceptions += y < x ? 0 : 1;
    }
    EXPECT_LE(exceptions, 1);
}

TEST(Csv, ConvergenceTableHasFooter) {
    ConvergenceTable t;
    t.rows.resize(3);
    std::ostringstream os;
    write_convergence_csv(t, os);
    std::string s = os.str();
    EXPECT_EQ(s.rfind("h,errL2u,errH1u,errL2p,errLambda,errPhi\n", 0), 0u);
    EXPECT_NE(s.find("# slopes,"), std::string::npos);
}
