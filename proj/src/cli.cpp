#include "cutflow/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>

#include "cutflow/errors.hpp"
#include "cutflow/manufactured.hpp"
#include "cutflow/parallel.hpp"
#include "cutflow/unsteady.hpp"

namespace cutflow {

namespace fs = std::filesystem;

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok)
        throw ConfigError(msg);
}

FemTriplet triplet_of(const RunConfig& c) {
    try {
        return FemTriplet::parse(c.str("triplet"));
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
}

StabilizationParams stab_of(const RunConfig& c, bool with_gamma = true) {
    StabilizationParams s{c.real("alpha0"), with_gamma ? c.real("gamma0") : 0.0};
    require(s.alpha0 >= 0.0, "alpha0 must be non-negative");
    require(s.gamma0 >= 0.0, "gamma0 must be non-negative");
    return s;
}

int jobs_of(const RunConfig& c) {
    int j = c.integer("jobs");
    require(j >= 1, "jobs must be at least 1");
    return j;
}

void check_mesh(int n) { require(n >= 2 && n <= 2000, "mesh subdivisions must lie in [2, 2000]"); }

ManufacturedRun manufactured_of(const RunConfig& c, bool with_gamma, bool with_xc) {
    ManufacturedRun r;
    r.triplet = triplet_of(c);
    r.quad_boost = c.integer("quad_boost");
    require(r.quad_boost >= 0 && r.quad_boost <= 8, "quad_boost must lie in [0, 8]");
    r.stab = stab_of(c, with_gamma);
    r.spec.phys.nu_plus = c.real("nu_plus");
    r.spec.phys.nu_minus = c.real("nu_minus");
    require(r.spec.phys.nu_plus > 0.0 && r.spec.phys.nu_minus > 0.0, "viscosities must be positive");
    r.spec.center = Point(with_xc ? c.real("xc") : 0.5, c.real("yc"));
    r.spec.radius = c.real("radius");
    require(r.spec.radius > 0.0, "radius must be positive");
    r.spec.cp_plus = c.real("cp_plus");
    r.spec.cp_minus = c.real("cp_minus");
    const double R = r.spec.radius, y = r.spec.center.y();
    require(y - R > 0.0 && y + R < 1.0, "circle must lie strictly inside the unit square");
    if (with_xc)
        require(r.spec.center.x() - R > 0.0 && r.spec.center.x() + R < 1.0,
                "circle must lie strictly inside the unit square");
    return r;
}

EvolutionParams evolution_of(const RunConfig& c, bool nse) {
    EvolutionParams p = nse ? nse_defaults() : stokes_defaults();
    p.triplet = triplet_of(c);
    p.quad_boost = c.integer("quad_boost");
    require(p.quad_boost >= 0 && p.quad_boost <= 8, "quad_boost must lie in [0, 8]");
    p.n = c.integer("n");
    check_mesh(p.n);
    p.stab = stab_of(c);
    p.phys.nu_plus = c.real("nu_plus");
    p.phys.nu_minus = c.real("nu_minus");
    require(p.phys.nu_plus > 0.0 && p.phys.nu_minus > 0.0, "viscosities must be positive");
    if (nse) {
        p.phys.rho_plus = c.real("rho_plus");
        p.phys.rho_minus = c.real("rho_minus");
        require(p.phys.rho_plus >= 0.0 && p.phys.rho_minus >= 0.0, "densities must be non-negative");
        p.newton_tol = c.real("newton_tol");
        p.newton_max = c.integer("newton_max");
        require(p.newton_tol > 0.0 && p.newton_max >= 1, "Newton tolerance and iteration cap must be positive");
    }
    p.mu = c.real("mu");
    require(p.mu >= 0.0, "mu must be non-negative");
    p.initial.a1 = c.real("a1");
    p.initial.a2 = c.real("a2");
    p.initial.center = Point(c.real("xc"), c.real("yc"));
    require(p.initial.a1 > 0.0 && p.initial.a2 > 0.0, "semi-axes must be positive");
    const Point& ce = p.initial.center;
    require(ce.x() - p.initial.a1 > 0.0 && ce.x() + p.initial.a1 < 1.0 && ce.y() - p.initial.a2 > 0.0 &&
                ce.y() + p.initial.a2 < 1.0,
            "ellipse must lie strictly inside the unit square");
    p.T = c.real("T");
    p.dt = c.real("dt");
    try {
        p.steps();
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    p.incremental = c.flag("incremental");
    return p;
}

using Start = std::function<void()>;

std::ofstream open_out(const fs::path& p) {
    std::ofstream out(p);
    if (!out)
        throw ConfigError("cannot write '" + p.string() + "'");
    return out;
}

int run_converge(const RunConfig& c, const fs::path& dir, std::ostream& log, const Start& start) {
    ManufacturedRun base = manufactured_of(c, true, true);
    std::vector<int> ns = c.integers("n");
    require(ns.size() >= 3, "converge needs at least three mesh sizes in n");
    for (int n : ns)
        check_mesh(n);
    start();
    ConvergenceTable tab = convergence_study(base, ns, jobs_of(c));
    auto out = open_out(dir / "converge.csv");
    write_convergence_csv(tab, out);
    log << "slopes: L2u " << tab.slope_l2_u << ", H1u " << tab.slope_h1_u << ", L2p " << tab.slope_l2_p
        << ", lambda " << tab.slope_lambda << ", Phi " << tab.slope_phi << '\n';
    return exit_ok;
}

int run_sweep_gamma(const RunConfig& c, const fs::path& dir, std::ostream& log, const Start& start) {
    ManufacturedRun base = manufactured_of(c, false, true);
    base.n = c.integer("n");
    check_mesh(base.n);
    std::vector<double> gs = c.reals("gamma0_list");
    require(!gs.empty(), "gamma0_list is empty");
    for (double g : gs)
        require(g > 0.0, "gamma0_list values must be positive");
    start();
    auto pts = sweep_gamma(base, gs, jobs_of(c));
    auto out = open_out(dir / "gamma.csv");
    write_gamma_csv(pts, out);
    log << pts.size() << " gamma0 values\n";
    return exit_ok;
}

int run_sweep_center(const RunConfig& c, const fs::path& dir, std::ostream& log, const Start& start) {
    ManufacturedRun base = manufactured_of(c, false, false);
    base.n = c.integer("n");
    check_mesh(base.n);
    const double g = c.real("gamma0");
    require(g > 0.0, "gamma0 must be positive for the paired sweep");
    const double lo = c.real("xc_min"), hi = c.real("xc_max");
    const int k = c.integer("xc_count");
    require(k >= 2 && lo < hi, "center sweep needs xc_min < xc_max and xc_count >= 2");
    require(lo - base.spec.radius > 0.0 && hi + base.spec.radius < 1.0,
            "every swept circle must lie strictly inside the unit square");
    std::vector<double> xs(k);
    for (int i = 0; i < k; ++i)
        xs[i] = lo + (hi - lo) * i / (k - 1);
    start();
    auto pts = sweep_center(base, xs, g, jobs_of(c));
    auto out = open_out(dir / "center.csv");
    write_center_csv(pts, out);
    int failed = 0;
    for (const auto& p : pts)
        failed += p.failure.empty() ? 0 : 1;
    log << pts.size() << " positions, " << failed << " with a failed solve\n";
    return failed ? exit_numerical : exit_ok;
}

int run_static_bubble(const RunConfig& c, const fs::path& dir, std::ostream& log, const Start& start) {
    BubbleParams base;
    base.triplet = triplet_of(c);
    base.mu = c.real("mu");
    base.r = c.real("r");
    base.phys.nu_plus = c.real("nu_plus");
    base.phys.nu_minus = c.real("nu_minus");
    base.stab = stab_of(c);
    require(base.mu >= 0.0, "mu must be non-negative");
    require(base.r > 0.0 && base.r < 0.5, "bubble radius must lie in (0, 0.5)");
    require(base.phys.nu_plus > 0.0 && base.phys.nu_minus > 0.0, "viscosities must be positive");
    std::vector<double> hs = c.reals("h");
    require(!hs.empty(), "h is empty");
    for (double h : hs) {
        require(h > 0.0, "mesh sizes must be positive");
        check_mesh(static_cast<int>(std::lround(1.0 / h)));
    }
    start();
    auto rows = parallel_map(static_cast<int>(hs.size()), jobs_of(c), [&](int i) {
        BubbleParams p = base;
        p.h = hs[i];
        return static_bubble(p);
    });
    auto out = open_out(dir / "bubble.csv");
    write_bubble_csv(rows, out);
    for (const auto& r : rows)
        log << "h " << r.h << ": dp " << r.dp << ", deviation " << r.deviation << '\n';
    return exit_ok;
}

int run_evolution(const RunConfig& c, const fs::path& dir, std::ostream& log, const Start& start, bool nse) {
    EvolutionParams p = evolution_of(c, nse);
    const int every = c.integer("snapshot_every");
    require(every >= 0, "snapshot_every must be non-negative");
    start();
    StepObserver obs;
    if (every > 0) {
        fs::create_directories(dir / "snapshots");
        obs = [&](int step, const EllipseState&, const FieldSolution& sol) {
            if (step % every != 0)
                return;
            char name[32];
            std::snprintf(name, sizeof name, "step_%05d.csv", step);
            auto out = open_out(dir / "snapshots" / name);
            write_snapshot(sol, out);
        };
    }
    EvolutionRecord rec = nse ? nse_evolution(p, obs) : stokes_evolution(p, obs);
    auto out = open_out(dir / "evolution.csv");
    write_evolution_csv(rec, out);
    const StepRecord& last = rec.steps.back();
    log << rec.steps.size() - 1 << " steps, t = " << last.t << ", a1 = " << last.a1 << ", a2 = " << last.a2
        << ", mass error " << last.mass_err_pct << "%\n";
    if (!rec.abort_reason.empty()) {
        log << "aborted: " << rec.abort_reason << '\n';
        return exit_numerical;
    }
    return exit_ok;
}

} // namespace

void write_snapshot(const FieldSolution& sol, std::ostream& out) {
    const Discretization& d = sol.disc();
    const Spaces& sp = *d.spaces;
    const Eigen::VectorXd& x = sol.vector();
    out << std::setprecision(15) << "block,component,dof,x,y,value\n";
    auto row = [&](Block b, int c, int g, const Point& p, double v) {
        out << block_name(b) << ',' << c << ',' << g << ',' << p.x() << ',' << p.y() << ',' << v << '\n';
    };
    for (Side s : {Side::Plus, Side::Minus}) {
        for (int c = 0; c < 2; ++c)
            for (int g : d.vel(s).active())
                row(velocity_block(s), c, g, sp.velocity->dof_point(g), x[d.velocity_index(s, c, g)]);
        for (int g : d.pres(s).active())
            row(pressure_block(s), 0, g, sp.pressure->dof_point(g), x[d.pressure_index(s, g)]);
        for (int c = 0; c < 2; ++c)
            for (int g : d.trace->survivors())
                row(multiplier_block(s), c, g, sp.multiplier->dof_point(g), x[d.multiplier_index(s, c, g)]);
    }
    for (int c = 0; c < 2; ++c)
        for (int g : d.trace->survivors())
            row(Block::Phi, c, g, sp.multiplier->dof_point(g), x[d.phi_index(c, g)]);
}

int run_experiment(const RunConfig& cfg, std::ostream& log) {
    const std::string& exp = cfg.experiment();
    fs::path dir = cfg.str("out_dir");
    // output appears only once the runner has validated its parameters
    Start start = [&] {
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec)
            throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());
        auto echo = open_out(dir / "config.resolved");
        cfg.write_echo(echo);
    };
    if (exp == "converge")
        return run_converge(cfg, dir, log, start);
    if (exp == "sweep-gamma")
        return run_sweep_gamma(cfg, dir, log, start);
    if (exp == "sweep-center")
        return run_sweep_center(cfg, dir, log, start);
    if (exp == "static-bubble")
        return run_static_bubble(cfg, dir, log, start);
    if (exp == "evolve-stokes")
        return run_evolution(cfg, dir, log, start, false);
    if (exp == "evolve-nse")
        return run_evolution(cfg, dir, log, start, true);
    throw ConfigError("unknown experiment '" + exp + "'");
}

int cli_main(int argc, char** argv, std::ostream& log, std::ostream& err) {
    CLI::App app{"Two-phase Stokes solver on a fictitious-domain mesh"};
    std::string path;
    std::vector<std::string> overrides;
    app.add_option("config", path, "key = value configuration file")->required();
    app.add_option("--override", overrides, "key=value replacing a config entry (repeatable)");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, log, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, log, err);
        return exit_config;
    }
    RunConfig cfg;
    try {
        cfg = RunConfig::parse_file(path);
        for (std::size_t i = 0; i < overrides.size(); ++i)
            cfg.apply_override(overrides[i], static_cast<int>(i + 1));
        cfg.resolve();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return exit_config;
    }
    try {
        return run_experiment(cfg, log);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const InvalidArgument& e) {
        err << "invalid input: " << e.what() << '\n';
        return exit_config;
    } catch (const Error& e) {
        err << "numerical failure: " << e.what() << '\n';
        return exit_numerical;
    }
}

} // namespace cutflow
