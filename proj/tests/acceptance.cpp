// Pass/fail report for the acceptance criteria; each criterion prints one line.
// usage: cutflow_acceptance [criterion ...]   (all when none given)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cutflow/errors.hpp"
#include "cutflow/manufactured.hpp"
#include "cutflow/unsteady.hpp"

using namespace cutflow;

namespace {

struct Verdict {
    bool pass = true;
    std::ostringstream detail;

    void check(bool ok, const std::string& what) {
        pass = pass && ok;
        detail << (detail.tellp() > 0 ? "; " : "") << what << (ok ? "" : " [x]");
    }
};

std::string fmt(double v, const char* f = "%.4g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double max_abs(const SparseMatrix& a) {
    double m = 0.0;
    for (int k = 0; k < a.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(a, k); it; ++it)
            m = std::max(m, std::abs(it.value()));
    return m;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t k = v.size() / 2;
    return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

ManufacturedRun manufactured(const char* triplet, double gamma0) {
    ManufacturedRun r;
    r.triplet = FemTriplet::parse(triplet);
    r.stab = {0.0, gamma0};
    return r;
}

void geometry(Verdict& v) {
    const double R = 0.23, area = std::numbers::pi * R * R, len = 2 * std::numbers::pi * R;
    auto at = [&](int n) {
        return decompose(std::make_shared<const CartesianMesh>(n, Rectangle{}), LevelSet::circle({0.5, 0.5}, R));
    };
    auto c40 = at(40);
    const double ea = std::abs(c40->total_area(Side::Minus) - area) / area;
    const double el = std::abs(c40->total_interface_length() - len) / len;
    v.check(ea <= 1e-5, "n=40 area rel err " + fmt(ea) + " <= 1e-5");
    v.check(el <= 1e-4, "length rel err " + fmt(el) + " <= 1e-4");
    const double e20 = std::abs(at(20)->total_area(Side::Minus) - area);
    const double e80 = std::abs(at(80)->total_area(Side::Minus) - area);
    const double rate = std::log(e20 / e80) / std::log(4.0);
    v.check(rate >= 1.8, "area order 20->80 " + fmt(rate, "%.3f") + " >= 1.8");
}

void slopes_p2(Verdict& v) {
    auto t = convergence_study(manufactured("P2/P1/P0", 0.0), {10, 20, 40, 80});
    v.check(t.slope_l2_u >= 1.8, "L2(u) " + fmt(t.slope_l2_u, "%.3f") + " >= 1.8");
    v.check(t.slope_h1_u >= 1.4, "H1(u) " + fmt(t.slope_h1_u, "%.3f") + " >= 1.4");
    v.check(t.slope_l2_p >= 1.8, "L2(p) " + fmt(t.slope_l2_p, "%.3f") + " >= 1.8");
    v.check(t.slope_phi >= 1.8, "Phi " + fmt(t.slope_phi, "%.3f") + " >= 1.8");
}

void slopes_p3(Verdict& v) {
    auto t = convergence_study(manufactured("P3/P2/P1", 0.0), {10, 20, 40, 80});
    v.check(t.slope_l2_u >= 2.5, "L2(u) " + fmt(t.slope_l2_u, "%.3f") + " >= 2.5");
    v.check(t.slope_h1_u >= 2.0, "H1(u) " + fmt(t.slope_h1_u, "%.3f") + " >= 2.0");
}

void gamma_sweep(Verdict& v) {
    auto pts = sweep_gamma(manufactured("P2/P1/P0", 0.0), {0.02, 1.0});
    const double ratio = pts[1].lambda_error / pts[0].lambda_error;
    v.check(ratio >= 5.0, "lambda err(1.0)/err(0.02) = " + fmt(ratio, "%.3f") + " >= 5");
}

void center_sweep(Verdict& v) {
    std::vector<double> xs(30);
    for (int i = 0; i < 30; ++i)
        xs[i] = 0.3 + 0.4 * i / 29.0;
    auto pts = sweep_center(manufactured("P2/P1/P0", 0.0), xs, 0.02);
    std::vector<double> stab;
    int failures = 0, better = 0;
    for (const auto& p : pts) {
        if (!p.stabilized || !p.unstabilized) {
            ++failures;
            continue;
        }
        stab.push_back(*p.stabilized);
        better += *p.stabilized <= *p.unstabilized ? 1 : 0;
    }
    v.check(failures == 0, std::to_string(failures) + " failed solves");
    if (stab.empty())
        return;
    const double spread = *std::max_element(stab.begin(), stab.end()) / median(stab);
    v.check(spread <= 3.0, "stabilized max/median " + fmt(spread, "%.3f") + " <= 3");
    const double frac = static_cast<double>(better) / pts.size();
    v.check(frac >= 0.7, "stabilized <= unstabilized at " + fmt(100 * frac, "%.0f") + "% >= 70%");
}

void bubble(Verdict& v) {
    std::vector<BubbleResult> rows;
    for (double h : {0.1, 0.05, 0.025, 0.0125}) {
        BubbleParams p;
        p.h = h;
        rows.push_back(static_bubble(p));
    }
    v.check(rows[3].deviation <= 0.01, "h=0.0125 deviation " + fmt(rows[3].deviation) + " <= 0.01");
    for (int i : {2, 3})
        v.check(std::abs(rows[i].ratio) >= 0.95 && std::abs(rows[i].ratio) <= 1.05,
                "h=" + fmt(rows[i].h) + " |dp|/(mu/r) " + fmt(rows[i].ratio, "%.5f") + " in [0.95,1.05]");
}

void stokes_run(Verdict& v) {
    EvolutionRecord rec = stokes_evolution(stokes_defaults());
    v.check(rec.abort_reason.empty(), rec.abort_reason.empty() ? "reached T" : "aborted: " + rec.abort_reason);
    const auto& s = rec.steps;
    int a_up = 0, e_up = 0;
    double worst_e = 0.0, mass = 0.0;
    for (std::size_t k = 1; k < s.size(); ++k) {
        a_up += (s[k].a1 > s[k - 1].a1 || s[k].a2 < s[k - 1].a2) ? 1 : 0;
        if (s[k].energy > s[k - 1].energy) {
            ++e_up;
            worst_e = std::max(worst_e, (s[k].energy - s[k - 1].energy) / s[k - 1].energy);
        }
        mass = std::max(mass, s[k].mass_err_pct);
    }
    const double gap0 = std::abs(s.front().a1 - s.front().a2), gapT = std::abs(s.back().a1 - s.back().a2);
    v.check(a_up == 0, std::to_string(a_up) + " steps against monotone axes");
    v.check(gapT < 0.2 * gap0, "|a1-a2|(T)/|a1-a2|(0) " + fmt(gapT / gap0) + " < 0.2");
    v.check(e_up == 0, "mu|Gamma| rose at " + std::to_string(e_up) + " steps (max rel " + fmt(worst_e) + ")");
    v.check(mass <= 0.5, "max mass err " + fmt(mass, "%.3f") + "% <= 0.5%");
}

void nse_run(Verdict& v) {
    EvolutionRecord rec = nse_evolution(nse_defaults());
    const auto& s = rec.steps;
    v.check(rec.abort_reason.empty(), rec.abort_reason.empty() ? "reached T=" + fmt(s.back().t)
                                                               : "aborted: " + rec.abort_reason);
    double mass = 0.0, worst_e = 0.0;
    int max_newton = 0;
    for (std::size_t k = 1; k < s.size(); ++k) {
        mass = std::max(mass, s[k].mass_err_pct);
        worst_e = std::max(worst_e, (s[k].energy - s[k - 1].energy) / s[k - 1].energy);
        max_newton = std::max(max_newton, s[k].newton_iters);
    }
    v.check(mass <= 15.0, "max mass err " + fmt(mass, "%.3f") + "% <= 15%");
    v.check(worst_e <= 0.01, "worst per-step energy rise " + fmt(worst_e) + " <= 1%");
    v.detail << "; max Newton iterations " << max_newton;
}

void properties(Verdict& v) {
    {
        auto sp = make_spaces(12, FemTriplet{});
        auto cache = assemble_global_stiffness(*sp);
        StabilizationParams stab{0.01, 0.01};
        std::mt19937 rng(2024);
        std::uniform_real_distribution<double> shift(-0.06, 0.06);
        BlockSaddleSystem sys =
            assemble_system(discretize(sp, LevelSet::circle({0.5, 0.5}, 0.23)), PhysicalParams{}, stab, cache);
        double worst = 0.0;
        for (int k = 0; k < 20; ++k) {
            auto next = discretize(sp, LevelSet::circle({0.5 + shift(rng), 0.5 + shift(rng)}, 0.23));
            sys = update_system(std::move(sys), next);
            SparseMatrix fresh = assemble_system(next, PhysicalParams{}, stab, cache).matrix;
            if (fresh.rows() != sys.matrix.rows()) {
                worst = INFINITY;
                break;
            }
            worst = std::max(worst, max_abs(SparseMatrix(sys.matrix - fresh)) / max_abs(fresh));
        }
        v.check(worst <= 1e-13, "update vs fresh " + fmt(worst) + " <= 1e-13");
    }
    {
        // stabilization terms vanish with their coefficients, and the solution follows
        auto sp = make_spaces(10, FemTriplet{});
        auto cache = assemble_global_stiffness(*sp);
        auto disc = discretize(sp, LevelSet::circle({0.5, 0.5}, 0.23));
        SparseMatrix a0 = assemble_system(disc, PhysicalParams{}, {0.0, 0.0}, cache).matrix;
        SparseMatrix a1 = assemble_system(disc, PhysicalParams{}, {1.0, 1.0}, cache).matrix;
        SparseMatrix ae = assemble_system(disc, PhysicalParams{}, {1e-9, 1e-9}, cache).matrix;
        const double lin = max_abs(SparseMatrix(ae - a0 - 1e-9 * (a1 - a0))) / max_abs(a0);
        ManufacturedRun base = manufactured("P2/P1/P0", 0.0);
        ErrorReport plain = run_manufactured(base);
        base.stab = {1e-9, 1e-9};
        ErrorReport tiny = run_manufactured(base);
        const double drift = std::abs(tiny.lambda - plain.lambda) / plain.lambda +
                             std::abs(tiny.l2_u - plain.l2_u) / plain.l2_u;
        v.check(lin <= 1e-13 && drift <= 1e-6,
                "zero-parameter limit: matrix " + fmt(lin) + ", errors " + fmt(drift) + " <= 1e-6");
    }
    {
        EvolutionParams p = stokes_defaults();
        p.n = 20;
        p.T = 5 * p.dt;
        EvolutionRecord st = stokes_evolution(p), ns = nse_evolution(p);
        double d = 0.0;
        for (std::size_t k = 0; k < std::min(st.steps.size(), ns.steps.size()); ++k)
            d = std::max({d, std::abs(st.steps[k].a1 - ns.steps[k].a1), std::abs(st.steps[k].a2 - ns.steps[k].a2)});
        const bool ok = st.abort_reason.empty() && ns.abort_reason.empty() && st.steps.size() == ns.steps.size();
        v.check(ok && d <= 1e-10, "rho=0 NSE vs Stokes " + fmt(d) + " <= 1e-10");
    }
    {
        EllipseState s;
        auto mesh = std::make_shared<const CartesianMesh>(30, Rectangle{});
        CutDecomposition cut(mesh, s.levelset());
        const double c = 3.0, dt = 0.01;
        AxisMoments m = axis_moments(
            cut, s.center, [&](int, const Point& x) -> Eigen::Vector2d { return c * (x - s.center); }, 6);
        AdvanceResult r = advance_ellipse(s, m, dt);
        const double d = std::max(std::abs(r.state.a1 - s.a1 / (1 - dt * c)), std::abs(r.state.a2 - s.a2 / (1 - dt * c)));
        v.check(d <= 1e-12, "affine advance " + fmt(d) + " <= 1e-12");
    }
    {
        double worst = 0.0;
        for (const char* tr : {"P2/P1/P0", "P3/P2/P1"}) {
            auto sp = make_spaces(10, FemTriplet::parse(tr));
            SparseMatrix a = assemble_system(discretize(sp, LevelSet::circle({0.513, 0.487}, 0.23)),
                                             PhysicalParams{}, {0.01, 0.02}, assemble_global_stiffness(*sp))
                                 .matrix;
            worst = std::max(worst, max_abs(SparseMatrix(a - SparseMatrix(a.transpose()))) / max_abs(a));
        }
        v.check(worst <= 1e-12, "asymmetry " + fmt(worst) + " <= 1e-12");
    }
}

struct Criterion {
    void (*run)(Verdict&);
    double budget_s;
};

const std::map<int, Criterion> criteria = {
    {1, {geometry, 5}},      {2, {slopes_p2, 600}},   {3, {slopes_p3, 1200}},
    {4, {gamma_sweep, 120}}, {5, {center_sweep, 600}}, {6, {bubble, 300}},
    {7, {stokes_run, 1800}}, {8, {nse_run, 3600}},     {9, {properties, 300}},
};

} // namespace

int main(int argc, char** argv) {
    std::vector<int> which;
    for (int i = 1; i < argc; ++i) {
        int k = std::atoi(argv[i]);
        if (!criteria.count(k)) {
            std::cerr << "unknown criterion '" << argv[i] << "'\n";
            return 2;
        }
        which.push_back(k);
    }
    if (which.empty())
        for (const auto& [k, c] : criteria)
            which.push_back(k);

    bool all = true;
    for (int k : which) {
        const Criterion& c = criteria.at(k);
        Verdict v;
        auto t0 = std::chrono::steady_clock::now();
        try {
            c.run(v);
        } catch (const std::exception& e) {
            v.check(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        v.check(secs < c.budget_s, "runtime " + fmt(secs, "%.1f") + " s < " + fmt(c.budget_s, "%.0f") + " s");
        std::cout << "criterion " << k << ": " << (v.pass ? "PASS" : "FAIL") << "  " << v.detail.str() << std::endl;
        all = all && v.pass;
    }
    return all ? 0 : 1;
}
