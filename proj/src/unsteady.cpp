#include "cutflow/unsteady.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include "cutflow/errors.hpp"

namespace cutflow {

LevelSet EllipseState::levelset() const {
    if (!(a1 > 0.0) || !(a2 > 0.0))
        throw NumericalError("ellipse semi-axes must stay positive");
    return LevelSet::ellipse(center, a1, a2);
}

AxisMoments axis_moments(const CutDecomposition& cut,
                         const Point& center,
                         const std::function<Eigen::Vector2d(int, const Point&)>& phi,
                         int order) {
    AxisMoments m;
    double nrm2 = 0.0;
    for (int t : cut.cut_cells())
        for (const auto& qp : cut.interface_rule(t, order)) {
            Eigen::Vector2d f = phi(t, qp.x);
            for (int i = 0; i < 2; ++i) {
                m.sq[i] += qp.w * f[i] * f[i];
                m.cross[i] += qp.w * (qp.x[i] - center[i]) * f[i];
            }
            nrm2 += qp.w * f.squaredNorm();
        }
    m.norm = std::sqrt(nrm2);
    return m;
}

AxisMoments axis_moments(const FieldSolution& sol, const Point& center) {
    return axis_moments(*sol.disc().cut, center,
                        [&](int t, const Point& x) { return sol.phi(t, x); },
                        sol.disc().spaces->interface_order() + 2);
}

AdvanceResult advance_ellipse(const EllipseState& s, const AxisMoments& m, double dt) {
    if (!(dt > 0.0))
        throw InvalidArgument("time step must be positive");
    AdvanceResult r;
    r.state = s;
    std::array<double, 2> a{s.a1, s.a2};
    for (int i = 0; i < 2; ++i) {
        if (m.sq[i] == 0.0)
            continue;
        if (std::abs(m.cross[i]) < 1e-12 * m.norm * a[i]) {
            r.frozen[i] = true;
            continue;
        }
        double factor = 1.0 - dt * m.sq[i] / m.cross[i];
        if (!(factor > 0.0))
            throw NumericalError("semi-axis update blows up (factor " + std::to_string(factor) + ")");
        a[i] /= factor;
    }
    r.state.a1 = a[0];
    r.state.a2 = a[1];
    r.state.t = s.t + dt;
    return r;
}

int EvolutionParams::steps() const {
    if (!(dt > 0.0) || !(T > 0.0))
        throw InvalidArgument("time step and final time must be positive");
    long n = std::lround(T / dt);
    if (n < 1 || std::abs(n * dt - T) > 1e-9 * T)
        throw InvalidArgument("final time must be a multiple of the time step");
    return static_cast<int>(n);
}

EvolutionParams stokes_defaults() { return EvolutionParams{}; }

EvolutionParams nse_defaults() {
    EvolutionParams p;
    p.phys.rho_plus = 0.2;
    p.phys.rho_minus = 0.1;
    return p;
}

Eigen::VectorXd surface_tension_rhs(const Discretization& disc, double mu) {
    // curvature is signed against n- (negative on a convex bubble), so -mu kappa n+ = mu kappa n-
    return assemble_rhs(disc, {}, {},
                        [mu](const InterfaceQuadPoint& q) -> Eigen::Vector2d { return mu * q.curvature * q.normal; });
}

FieldSolution steklov_solve(const BlockSaddleSystem& sys, double mu, const SolveOptions& opts) {
    return solve(sys.disc, sys.matrix, surface_tension_rhs(*sys.disc, mu), opts);
}

Eigen::VectorXd transfer_velocity(const FieldSolution& old, const Discretization& disc) {
    const Discretization& od = old.disc();
    if (od.spaces != disc.spaces)
        throw InvalidArgument("velocity transfer requires the same spaces");
    const ScalarSpace& sp = *disc.spaces->velocity;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(disc.layout.size());
    const Eigen::VectorXd& x = old.vector();
    const LevelSet& ls = od.cut->levelset();
    for (Side s : {Side::Plus, Side::Minus})
        for (int g : disc.vel(s).active()) {
            // nodes in the old fictitious zone carry unphysical extension values, so only
            // coefficients whose node lay inside their own side are reused
            Point xg = sp.dof_point(g);
            bool inside = (ls(xg) > 0.0) == (s == Side::Plus);
            if (inside && od.vel(s).local(g) >= 0) {
                for (int c = 0; c < 2; ++c)
                    out[disc.velocity_index(s, c, g)] = x[od.velocity_index(s, c, g)];
            } else {
                Eigen::Vector2d v = old.velocity(xg);
                for (int c = 0; c < 2; ++c)
                    out[disc.velocity_index(s, c, g)] = v[c];
            }
        }
    return out;
}

namespace {

// rho (u . grad) u tested against v, and its derivative, on every side
void convection(const BlockSaddleSystem& sys,
                const Eigen::VectorXd& U,
                Eigen::VectorXd& res,
                std::vector<Triplet>& jac) {
    const Discretization& d = *sys.disc;
    const Spaces& sp = *d.spaces;
    const int nu = sp.velocity->num_local();
    const int order = sp.volume_order() + 2;
    res = Eigen::VectorXd::Zero(d.layout.size());
    jac.clear();
    std::vector<double> v(nu);
    std::vector<Eigen::Vector2d> g(nu);
    std::vector<int> idx(2 * nu);
    Eigen::VectorXd ul(2 * nu), rl(2 * nu);
    Eigen::MatrixXd jl(2 * nu, 2 * nu);
    for (Side s : {Side::Plus, Side::Minus}) {
        const double rho = sys.phys.rho(s);
        if (rho == 0.0)
            continue;
        for (int t = 0; t < sp.mesh->num_triangles(); ++t) {
            if (!d.cut->touches(t, s))
                continue;
            const int* du = sp.velocity->element_dofs(t);
            bool any = false;
            for (int c = 0; c < 2; ++c)
                for (int a = 0; a < nu; ++a) {
                    int i = d.velocity_index(s, c, du[a]);
                    idx[c * nu + a] = i;
                    ul[c * nu + a] = i >= 0 ? U[i] : 0.0;
                    any = any || i >= 0;
                }
            if (!any)
                continue;
            rl.setZero();
            jl.setZero();
            for (const auto& qp : d.cut->volume_rule(t, s, order)) {
                sp.velocity->eval(t, qp.x, v.data(), g.data());
                Eigen::Vector2d u = Eigen::Vector2d::Zero();
                Eigen::Matrix2d G = Eigen::Matrix2d::Zero();
                for (int c = 0; c < 2; ++c)
                    for (int a = 0; a < nu; ++a) {
                        u[c] += ul[c * nu + a] * v[a];
                        G.row(c) += ul[c * nu + a] * g[a].transpose();
                    }
                Eigen::Vector2d conv = G * u;
                const double w = rho * qp.w;
                for (int c = 0; c < 2; ++c)
                    for (int a = 0; a < nu; ++a) {
                        rl[c * nu + a] += w * v[a] * conv[c];
                        for (int b = 0; b < nu; ++b) {
                            double adv = u.dot(g[b]);
                            for (int e = 0; e < 2; ++e)
                                jl(c * nu + a, e * nu + b) +=
                                    w * v[a] * (v[b] * G(c, e) + (c == e ? adv : 0.0));
                        }
                    }
            }
            for (int i = 0; i < 2 * nu; ++i) {
                if (idx[i] < 0)
                    continue;
                res[idx[i]] += rl[i];
                for (int j = 0; j < 2 * nu; ++j)
                    if (idx[j] >= 0 && jl(i, j) != 0.0)
                        jac.emplace_back(idx[i], idx[j], jl(i, j));
            }
        }
    }
}

// (rho_s / dt) side mass matrices placed in the velocity blocks
SparseMatrix inertia(const BlockSaddleSystem& sys, double dt) {
    const Discretization& d = *sys.disc;
    std::vector<Triplet> trip;
    for (Side s : {Side::Plus, Side::Minus}) {
        const double rho = sys.phys.rho(s);
        if (rho == 0.0)
            continue;
        SparseMatrix M = side_mass(sys, s);
        const int off = d.layout.begin(velocity_block(s));
        for (int k = 0; k < M.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(M, k); it; ++it)
                trip.emplace_back(off + it.row(), off + it.col(), rho / dt * it.value());
    }
    SparseMatrix out(d.layout.size(), d.layout.size());
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

double kinetic_energy(const BlockSaddleSystem& sys, const FieldSolution& sol) {
    const Discretization& d = *sys.disc;
    double e = 0.0;
    for (Side s : {Side::Plus, Side::Minus}) {
        const double rho = sys.phys.rho(s);
        if (rho == 0.0)
            continue;
        Eigen::VectorXd u = sol.block(velocity_block(s));
        e += 0.5 * rho * u.dot(side_mass(sys, s) * u);
    }
    (void)d;
    return e;
}

} // namespace

FieldSolution navier_stokes_step(const BlockSaddleSystem& sys,
                                 double mu,
                                 const Eigen::VectorXd& previous_velocity,
                                 double dt,
                                 double newton_tol,
                                 int newton_max,
                                 NewtonInfo* info,
                                 const SolveOptions& opts) {
    const Discretization& d = *sys.disc;
    if (previous_velocity.size() != d.layout.size())
        throw InvalidArgument("previous velocity must use the system layout");
    const bool inertial = sys.phys.rho_plus != 0.0 || sys.phys.rho_minus != 0.0;
    SparseMatrix A = sys.matrix;
    Eigen::VectorXd b = surface_tension_rhs(d, mu);
    if (inertial) {
        SparseMatrix Mt = inertia(sys, dt);
        A += Mt;
        b += Mt * previous_velocity;
    }
    const double scale = b.norm() > 0.0 ? b.norm() : 1.0;

    Eigen::VectorXd U = previous_velocity;
    Eigen::VectorXd C;
    std::vector<Triplet> jt;
    NewtonInfo local;
    NewtonInfo& ni = info ? *info : local;
    ni = NewtonInfo{};
    for (int k = 0;; ++k) {
        convection(sys, U, C, jt);
        Eigen::VectorXd R = A * U + C - b;
        double r = R.norm() / scale;
        if (!std::isfinite(r))
            throw NewtonError("Newton residual is not finite");
        ni.residuals.push_back(r);
        if (k > 0 && r <= newton_tol)
            break;
        if (k == newton_max) {
            std::string hist;
            for (double x : ni.residuals)
                hist += " " + std::to_string(x);
            throw NewtonError("Newton did not converge in " + std::to_string(newton_max) +
                              " iterations; residuals:" + hist);
        }
        SparseMatrix J = A;
        if (!jt.empty()) {
            SparseMatrix Jc(A.rows(), A.cols());
            Jc.setFromTriplets(jt.begin(), jt.end());
            J += Jc;
        }
        SparseLU lu(J, &d.layout, opts.rcond_min);
        U -= lu.solve(R);
        ni.iterations = k + 1;
    }
    FieldSolution sol(sys.disc, U);
    sol.residual = ni.residuals.back();
    return sol;
}

namespace {

StepRecord make_record(const EllipseState& s, double mu, double kinetic, double m0, int iters,
                       std::array<bool, 2> frozen) {
    StepRecord r;
    r.t = s.t;
    r.a1 = s.a1;
    r.a2 = s.a2;
    r.length = s.perimeter();
    r.energy = mu * r.length + kinetic;
    // the density factor of the mass cancels in the relative error
    double m = std::numbers::pi * s.a1 * s.a2;
    r.mass_err_pct = 100.0 * std::abs(m - m0) / m0;
    r.newton_iters = iters;
    r.frozen = frozen;
    return r;
}

EvolutionRecord evolve(const EvolutionParams& p, bool navier_stokes, const StepObserver& observe) {
    EvolutionRecord rec;
    EllipseState st = p.initial;
    st.t = 0.0;
    rec.initial_mass = std::numbers::pi * st.a1 * st.a2;
    const int N = p.steps();
    if (!(p.mu >= 0.0))
        throw InvalidArgument("surface tension must be non-negative");
    auto spaces = make_spaces(p.n, p.triplet, p.quad_boost);
    auto cache = assemble_global_stiffness(*spaces, navier_stokes);
    rec.steps.push_back(make_record(st, p.mu, 0.0, rec.initial_mass, 0, {false, false}));

    BlockSaddleSystem sys;
    FieldSolution prev;
    try {
        for (int k = 0; k < N; ++k) {
            auto disc = discretize(spaces, st.levelset(), p.disc);
            if (k == 0 || !p.incremental)
                sys = assemble_system(disc, p.phys, p.stab, cache);
            else
                sys = update_system(std::move(sys), disc);
            FieldSolution sol;
            int iters = 0;
            double kinetic = 0.0;
            if (navier_stokes) {
                Eigen::VectorXd u0 = k == 0 ? Eigen::VectorXd::Zero(disc->layout.size())
                                            : transfer_velocity(prev, *disc);
                NewtonInfo ni;
                sol = navier_stokes_step(sys, p.mu, u0, p.dt, p.newton_tol, p.newton_max, &ni, p.solve);
                iters = ni.iterations;
                kinetic = kinetic_energy(sys, sol);
            } else {
                sol = steklov_solve(sys, p.mu, p.solve);
            }
            if (observe)
                observe(k, st, sol);
            AdvanceResult adv = advance_ellipse(st, axis_moments(sol, st.center), p.dt);
            st = adv.state;
            st.t = (k + 1) * p.dt;
            rec.steps.push_back(make_record(st, p.mu, kinetic, rec.initial_mass, iters, adv.frozen));
            prev = std::move(sol);
        }
    } catch (const NumericalError& e) {
        rec.abort_reason = e.what();
    } catch (const GeometryError& e) {
        rec.abort_reason = e.what();
    } catch (const InvalidArgument& e) {
        rec.abort_reason = e.what();
    }
    return rec;
}

} // namespace

EvolutionRecord stokes_evolution(const EvolutionParams& p, const StepObserver& observe) {
    return evolve(p, false, observe);
}

EvolutionRecord nse_evolution(const EvolutionParams& p, const StepObserver& observe) {
    return evolve(p, true, observe);
}

void write_evolution_csv(const EvolutionRecord& r, std::ostream& out) {
    out.precision(12);
    out << "t,a1,a2,gamma_length,energy,mass_err_pct,newton_iters\n";
    for (const auto& s : r.steps)
        out << s.t << ',' << s.a1 << ',' << s.a2 << ',' << s.length << ',' << s.energy << ','
            << s.mass_err_pct << ',' << s.newton_iters << '\n';
    if (!r.abort_reason.empty())
        out << "# aborted: " << r.abort_reason << '\n';
}

BubbleResult static_bubble(const BubbleParams& p) {
    if (!(p.h > 0.0) || !(p.r > 0.0) || !(p.mu >= 0.0))
        throw InvalidArgument("bubble needs h > 0, r > 0 and mu >= 0");
    BubbleResult res;
    res.n = static_cast<int>(std::lround(1.0 / p.h));
    auto spaces = make_spaces(res.n, p.triplet);
    auto disc = discretize(spaces, LevelSet::circle(Point(0.5, 0.5), p.r));
    auto sys = assemble_system(disc, p.phys, p.stab, assemble_global_stiffness(*spaces));
    FieldSolution sol = steklov_solve(sys, p.mu);

    const CartesianMesh& m = *spaces->mesh;
    const int order = spaces->volume_order();
    double ip[2] = {0, 0}, area[2] = {0, 0};
    for (int t = 0; t < m.num_triangles(); ++t) {
        CellClass c = disc->cut->cell_class(t);
        if (c == CellClass::Cut)
            continue;
        Side s = c == CellClass::Plus ? Side::Plus : Side::Minus;
        for (const auto& qp : triangle_rule(m.triangle_points(t), order)) {
            ip[side_index(s)] += qp.w * sol.pressure(s, t, qp.x);
            area[side_index(s)] += qp.w;
        }
    }
    if (!(area[0] > 0.0) || !(area[1] > 0.0))
        throw InvalidArgument("bubble too small for the mesh: a side has no uncut element");
    res.h = p.h;
    res.p_plus = ip[side_index(Side::Plus)] / area[side_index(Side::Plus)];
    res.p_minus = ip[side_index(Side::Minus)] / area[side_index(Side::Minus)];
    res.dp = res.p_minus - res.p_plus;
    const double target = p.mu / p.r;
    if (target > 0.0) {
        res.deviation = std::abs(res.dp - target) / target;
        res.ratio = std::abs(res.dp) / target;
    }
    const ScalarSpace& vs = *spaces->velocity;
    for (int g = 0; g < vs.num_dofs(); ++g)
        res.max_velocity = std::max(res.max_velocity, sol.velocity(vs.dof_point(g)).norm());
    return res;
}

void write_bubble_csv(const std::vector<BubbleResult>& rows, std::ostream& out) {
    out.precision(10);
    out << "h,n,p_plus,p_minus,dp,deviation,ratio,max_velocity\n";
    for (const auto& r : rows)
        out << r.h << ',' << r.n << ',' << r.p_plus << ',' << r.p_minus << ',' << r.dp << ','
            << r.deviation << ',' << r.ratio << ',' << r.max_velocity << '\n';
}

} // namespace cutflow
