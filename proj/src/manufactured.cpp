#include "cutflow/manufactured.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "cutflow/errors.hpp"
#include "cutflow/parallel.hpp"

namespace cutflow {

namespace {
constexpr double pi = std::numbers::pi;

Eigen::Matrix2d strain_of(const Eigen::Matrix2d& g) { return 0.5 * (g + g.transpose()); }
} // namespace

ExactFields exact_fields(const ExactSolutionSpec& spec, const Point& x, Side s) {
    const double sx = std::sin(pi * x.x()), cx = std::cos(pi * x.x());
    const double sy = std::sin(pi * x.y()), cy = std::cos(pi * x.y());
    const double X = x.x() - spec.center.x(), Y = x.y() - spec.center.y();
    const double c = spec.cp(s);
    ExactFields f;
    f.u = {cx * sy, -sx * cy};
    f.grad_u << -pi * sx * sy, pi * cx * cy,
                -pi * cx * cy, pi * sx * sy;
    f.p = c * (Y * std::cos(2 * pi * x.x()) + X * std::sin(2 * pi * x.y()));
    f.grad_p = {c * (-2 * pi * Y * std::sin(2 * pi * x.x()) + std::sin(2 * pi * x.y())),
                c * (std::cos(2 * pi * x.x()) + 2 * pi * X * std::cos(2 * pi * x.y()))};
    return f;
}

Eigen::Vector2d forcing(const ExactSolutionSpec& spec, const Point& x, Side s) {
    ExactFields f = exact_fields(spec, x, s);
    // the velocity is an eigenfunction of the Laplacian with eigenvalue -2 pi^2
    return 2.0 * pi * pi * spec.phys.nu(s) * f.u + f.grad_p;
}

Eigen::Vector2d exact_traction(const ExactSolutionSpec& spec, const Point& x, Side s, const Eigen::Vector2d& n) {
    ExactFields f = exact_fields(spec, x, s);
    return 2.0 * spec.phys.nu(s) * strain_of(f.grad_u) * n - f.p * n;
}

Eigen::Vector2d interface_force(const ExactSolutionSpec& spec, const Point& x, const Eigen::Vector2d& n_plus) {
    return exact_traction(spec, x, Side::Plus, n_plus) - exact_traction(spec, x, Side::Minus, n_plus);
}

double lambda_error(const std::vector<LambdaSample>& samples) {
    double num = 0.0, den = 0.0;
    for (const auto& s : samples) {
        num += s.w * ((s.plus_h - s.plus_ex).squaredNorm() + (s.minus_h - s.minus_ex).squaredNorm());
        den += s.w * (s.plus_ex.squaredNorm() + s.minus_ex.squaredNorm());
    }
    if (!(den > 0.0))
        throw InvalidArgument("exact multiplier norm vanishes");
    return std::sqrt(num / den);
}

ErrorReport compute_errors(const FieldSolution& sol, const ExactSolutionSpec& spec) {
    const Discretization& d = sol.disc();
    const Spaces& sp = *d.spaces;
    const CartesianMesh& m = *sp.mesh;
    const int order = sp.volume_order() + 4;

    double eu = 0, nu = 0, egu = 0, ngu = 0, ep = 0, np = 0;
    for (int t = 0; t < m.num_triangles(); ++t)
        for (Side s : {Side::Plus, Side::Minus}) {
            if (!d.cut->touches(t, s))
                continue;
            for (const auto& qp : d.cut->volume_rule(t, s, order)) {
                ExactFields f = exact_fields(spec, qp.x, s);
                eu += qp.w * (sol.velocity(s, t, qp.x) - f.u).squaredNorm();
                nu += qp.w * f.u.squaredNorm();
                egu += qp.w * (sol.velocity_gradient(s, t, qp.x) - f.grad_u).squaredNorm();
                ngu += qp.w * f.grad_u.squaredNorm();
                double dp = sol.pressure(s, t, qp.x) - f.p;
                ep += qp.w * dp * dp;
                np += qp.w * f.p * f.p;
            }
        }
    if (!(nu > 0.0) || !(np > 0.0))
        throw InvalidArgument("exact solution norm vanishes");

    std::vector<LambdaSample> samples;
    double ephi = 0, nphi = 0;
    for (int t : d.cut->cut_cells())
        for (const auto& qp : d.cut->interface_rule(t, sp.interface_order() + 2)) {
            Eigen::Vector2d n_minus = qp.normal;
            LambdaSample ls;
            ls.w = qp.w;
            ls.plus_h = sol.multiplier(Side::Plus, t, qp.x);
            ls.minus_h = sol.multiplier(Side::Minus, t, qp.x);
            ls.plus_ex = exact_traction(spec, qp.x, Side::Plus, -n_minus);
            ls.minus_ex = exact_traction(spec, qp.x, Side::Minus, n_minus);
            samples.push_back(ls);
            Eigen::Vector2d ue = exact_fields(spec, qp.x, Side::Minus).u;
            ephi += qp.w * (sol.phi(t, qp.x) - ue).squaredNorm();
            nphi += qp.w * ue.squaredNorm();
        }

    ErrorReport r;
    r.n = m.n();
    r.h = m.h();
    r.l2_u = std::sqrt(eu / nu);
    r.h1_u = std::sqrt((eu + egu) / (nu + ngu));
    r.l2_p = std::sqrt(ep / np);
    r.lambda = lambda_error(samples);
    r.phi = std::sqrt(ephi / nphi);
    r.residual = sol.residual;
    return r;
}

FieldSolution solve_manufactured(const ManufacturedRun& run) {
    auto spaces = make_spaces(run.n, run.triplet, run.quad_boost);
    auto disc = discretize(spaces, run.spec.levelset(), run.disc);
    auto cache = assemble_global_stiffness(*spaces);
    BlockSaddleSystem sys = assemble_system(disc, run.spec.phys, run.stab, cache);
    const ExactSolutionSpec& spec = run.spec;
    sys.rhs = assemble_rhs(
        *disc,
        [&](const Point& x) { return forcing(spec, x, Side::Plus); },
        [&](const Point& x) { return forcing(spec, x, Side::Minus); },
        [&](const InterfaceQuadPoint& q) { return interface_force(spec, q.x, -q.normal); });
    // the exact velocity does not vanish on the outer boundary
    Eigen::VectorXd bnd =
        interpolate_boundary(*disc, [&](const Point& x) { return exact_fields(spec, x, Side::Plus).u; });
    sys.rhs += dirichlet_lift(sys, bnd);
    FieldSolution sol = solve(sys, run.solve);
    sol.set_boundary_values(std::move(bnd));
    return sol;
}

ErrorReport run_manufactured(const ManufacturedRun& run) {
    return compute_errors(solve_manufactured(run), run.spec);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw InvalidArgument("slope needs at least two matching samples");
    double mx = 0, my = 0;
    const double k = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]) / k;
        my += std::log(y[i]) / k;
    }
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

ConvergenceTable convergence_study(const ManufacturedRun& base, const std::vector<int>& ns, int jobs) {
    if (ns.size() < 3)
        throw InvalidArgument("convergence study needs at least three meshes");
    ConvergenceTable tab;
    tab.rows = parallel_map(static_cast<int>(ns.size()), jobs, [&](int i) {
        ManufacturedRun r = base;
        r.n = ns[i];
        return run_manufactured(r);
    });
    std::vector<double> h, a, b, c, dl, e;
    for (const auto& r : tab.rows) {
        h.push_back(r.h);
        a.push_back(r.l2_u);
        b.push_back(r.h1_u);
        c.push_back(r.l2_p);
        dl.push_back(r.lambda);
        e.push_back(r.phi);
    }
    tab.slope_l2_u = loglog_slope(h, a);
    tab.slope_h1_u = loglog_slope(h, b);
    tab.slope_l2_p = loglog_slope(h, c);
    tab.slope_lambda = loglog_slope(h, dl);
    tab.slope_phi = loglog_slope(h, e);
    return tab;
}

std::vector<GammaPoint> sweep_gamma(const ManufacturedRun& base, const std::vector<double>& gamma0s, int jobs) {
    for (double g : gamma0s)
        if (!(g > 0.0))
            throw InvalidArgument("gamma0 values must be positive");
    return parallel_map(static_cast<int>(gamma0s.size()), jobs, [&](int i) {
        ManufacturedRun r = base;
        r.stab.gamma0 = gamma0s[i];
        return GammaPoint{gamma0s[i], run_manufactured(r).lambda};
    });
}

std::vector<CenterPoint> sweep_center(const ManufacturedRun& base,
                                      const std::vector<double>& xcs,
                                      double gamma0,
                                      int jobs) {
    for (double xc : xcs)
        if (xc - base.spec.radius <= 0.0 || xc + base.spec.radius >= 1.0)
            throw InvalidArgument("circle leaves the domain at xc = " + std::to_string(xc));
    std::vector<CenterPoint> out = parallel_map(static_cast<int>(xcs.size()), jobs, [&](int i) {
        ManufacturedRun r = base;
        r.spec.center.x() = xcs[i];
        CenterPoint cp;
        cp.xc = xcs[i];
        for (double g : {0.0, gamma0}) {
            r.stab.gamma0 = g;
            try {
                double e = run_manufactured(r).lambda;
                (g == 0.0 ? cp.unstabilized : cp.stabilized) = e;
            } catch (const NumericalError& err) {
                cp.failure += std::string(g == 0.0 ? "unstabilized: " : "stabilized: ") + err.what() + "; ";
            }
        }
        return cp;
    });
    std::vector<double> un;
    for (const auto& c : out)
        if (c.unstabilized)
            un.push_back(*c.unstabilized);
    if (!un.empty()) {
        std::nth_element(un.begin(), un.begin() + un.size() / 2, un.end());
        double med = un[un.size() / 2];
        for (auto& c : out)
            c.spike = !c.unstabilized || *c.unstabilized > 3.0 * med;
    }
    return out;
}

void write_convergence_csv(const ConvergenceTable& t, std::ostream& out) {
    out.precision(10);
    out << "h,errL2u,errH1u,errL2p,errLambda,errPhi\n";
    for (const auto& r : t.rows)
        out << r.h << ',' << r.l2_u << ',' << r.h1_u << ',' << r.l2_p << ',' << r.lambda << ',' << r.phi
            << '\n';
    out << "# slopes," << t.slope_l2_u << ',' << t.slope_h1_u << ',' << t.slope_l2_p << ','
        << t.slope_lambda << ',' << t.slope_phi << '\n';
}

void write_gamma_csv(const std::vector<GammaPoint>& pts, std::ostream& out) {
    out.precision(10);
    out << "gamma0,errLambda\n";
    for (const auto& p : pts)
        out << p.gamma0 << ',' << p.lambda_error << '\n';
}

void write_center_csv(const std::vector<CenterPoint>& pts, std::ostream& out) {
    out.precision(10);
    out << "xc,errLambda_unstab,errLambda_stab,spike,failure\n";
    for (const auto& p : pts) {
        out << p.xc << ',';
        if (p.unstabilized)
            out << *p.unstabilized;
        else
            out << "nan";
        out << ',';
        if (p.stabilized)
            out << *p.stabilized;
        else
            out << "nan";
        out << ',' << (p.spike ? 1 : 0) << ",\"" << p.failure << "\"\n";
    }
}

} // namespace cutflow
