#include "cutflow/assembly.hpp"

#include <ostream>
#include <regex>

#include "cutflow/errors.hpp"

namespace cutflow {

FemTriplet FemTriplet::parse(const std::string& s) {
    static const std::regex re(R"(\s*P(\d)\s*/\s*P(\d)\s*/\s*P(\d)\s*)");
    std::smatch m;
    if (!std::regex_match(s, m, re))
        throw InvalidArgument("element triplet must look like P2/P1/P0, got '" + s + "'");
    FemTriplet t{std::stoi(m[1]), std::stoi(m[2]), std::stoi(m[3])};
    if (t.k_u < 2 || t.k_u > 4 || t.k_p < 1 || t.k_p >= t.k_u || t.k_lambda > t.k_u)
        throw InvalidArgument("unsupported element triplet '" + s + "'");
    return t;
}

std::string FemTriplet::name() const {
    return "P" + std::to_string(k_u) + "/P" + std::to_string(k_p) + "/P" + std::to_string(k_lambda);
}

std::shared_ptr<const Spaces> make_spaces(int n, const FemTriplet& triplet, int quad_boost) {
    auto sp = std::make_shared<Spaces>();
    sp->mesh = std::make_shared<const CartesianMesh>(n, Rectangle{});
    sp->triplet = triplet;
    sp->velocity = std::make_shared<const ScalarSpace>(sp->mesh, triplet.k_u);
    sp->pressure = std::make_shared<const ScalarSpace>(sp->mesh, triplet.k_p);
    sp->multiplier = std::make_shared<const ScalarSpace>(sp->mesh, triplet.k_lambda);
    sp->quad_boost = quad_boost;
    return sp;
}

const char* block_name(Block b) {
    switch (b) {
    case Block::UPlus: return "u+";
    case Block::PPlus: return "p+";
    case Block::LPlus: return "lambda+";
    case Block::UMinus: return "u-";
    case Block::PMinus: return "p-";
    case Block::LMinus: return "lambda-";
    case Block::Phi: return "Phi";
    case Block::Mean: return "pressure-mean";
    }
    return "?";
}

Block BlockLayout::block_of(int row) const {
    for (int b = 0; b < num_blocks; ++b)
        if (row < offset[b + 1])
            return static_cast<Block>(b);
    throw InvalidArgument("row outside the system");
}

int Discretization::velocity_index(Side s, int c, int g) const {
    const auto& m = vel(s);
    int l = m.local(g);
    return l < 0 ? -1 : layout.begin(velocity_block(s)) + c * m.size() + l;
}

int Discretization::pressure_index(Side s, int g) const {
    int l = pres(s).local(g);
    return l < 0 ? -1 : layout.begin(pressure_block(s)) + l;
}

int Discretization::multiplier_index(Side s, int c, int g) const {
    int l = trace->local(g);
    return l < 0 ? -1 : layout.begin(multiplier_block(s)) + c * trace->size() + l;
}

int Discretization::phi_index(int c, int g) const {
    int l = trace->local(g);
    return l < 0 ? -1 : layout.begin(Block::Phi) + c * trace->size() + l;
}

std::shared_ptr<const Discretization> discretize(std::shared_ptr<const Spaces> spaces,
                                                 const LevelSet& ls,
                                                 const DiscretizationOptions& opts) {
    auto d = std::make_shared<Discretization>();
    d->spaces = spaces;
    d->cut = decompose(spaces->mesh, ls, opts.cut);
    for (Side s : {Side::Plus, Side::Minus}) {
        d->velocity[side_index(s)] =
            std::make_shared<const FictitiousDofMap>(*spaces->velocity, *d->cut, s, s == Side::Plus);
        d->pressure[side_index(s)] =
            std::make_shared<const FictitiousDofMap>(*spaces->pressure, *d->cut, s, false);
    }
    d->trace = std::make_shared<const TraceSpace>(spaces->multiplier, *d->cut, opts.tol_rank);
    int nw = d->trace->size();
    std::array<int, num_blocks> len{2 * d->vel(Side::Plus).size(),
                                    d->pres(Side::Plus).size(),
                                    2 * nw,
                                    2 * d->vel(Side::Minus).size(),
                                    d->pres(Side::Minus).size(),
                                    2 * nw,
                                    2 * nw,
                                    1};
    for (int b = 0; b < num_blocks; ++b)
        d->layout.offset[b + 1] = d->layout.offset[b] + len[b];
    return d;
}

namespace {

struct BasisAt {
    std::vector<double> u, p;
    std::vector<Eigen::Vector2d> du;
};

SideBulk::Local bulk_local(const Spaces& sp, int t, const QuadratureRule& rule, bool with_mass) {
    const int nu = sp.velocity->num_local(), np = sp.pressure->num_local();
    SideBulk::Local L;
    L.strain = Eigen::MatrixXd::Zero(2 * nu, 2 * nu);
    L.div = Eigen::MatrixXd::Zero(np, 2 * nu);
    L.pmean = Eigen::VectorXd::Zero(np);
    if (with_mass)
        L.mass = Eigen::MatrixXd::Zero(2 * nu, 2 * nu);
    std::vector<double> vu(nu), vp(np);
    std::vector<Eigen::Vector2d> gu(nu);
    for (const auto& qp : rule) {
        sp.velocity->eval(t, qp.x, vu.data(), gu.data());
        sp.pressure->eval(t, qp.x, vp.data());
        for (int a = 0; a < nu; ++a)
            for (int b = 0; b < nu; ++b) {
                double gg = gu[a].dot(gu[b]);
                for (int c = 0; c < 2; ++c)
                    for (int d = 0; d < 2; ++d)
                        L.strain(c * nu + a, d * nu + b) +=
                            qp.w * 0.5 * ((c == d ? gg : 0.0) + gu[a][d] * gu[b][c]);
                if (with_mass) {
                    double mm = qp.w * vu[a] * vu[b];
                    L.mass(a, b) += mm;
                    L.mass(nu + a, nu + b) += mm;
                }
            }
        for (int q = 0; q < np; ++q) {
            L.pmean[q] += qp.w * vp[q];
            for (int a = 0; a < nu; ++a)
                for (int c = 0; c < 2; ++c)
                    L.div(q, c * nu + a) -= qp.w * vp[q] * gu[a][c];
        }
    }
    return L;
}

SideBulk::Local zero_like(const SideBulk::Local& x) {
    SideBulk::Local z;
    z.strain = Eigen::MatrixXd::Zero(x.strain.rows(), x.strain.cols());
    z.div = Eigen::MatrixXd::Zero(x.div.rows(), x.div.cols());
    z.mass = Eigen::MatrixXd::Zero(x.mass.rows(), x.mass.cols());
    z.pmean = Eigen::VectorXd::Zero(x.pmean.size());
    return z;
}

} // namespace

std::shared_ptr<const GlobalStiffnessCache> assemble_global_stiffness(const Spaces& sp,
                                                                      bool with_mass) {
    const CartesianMesh& m = *sp.mesh;
    const int Nu = sp.velocity->num_dofs(), Np = sp.pressure->num_dofs();
    const int nu = sp.velocity->num_local(), np = sp.pressure->num_local();
    std::vector<Triplet> ts, td, tm;
    ts.reserve(static_cast<std::size_t>(m.num_triangles()) * 4 * nu * nu);
    td.reserve(static_cast<std::size_t>(m.num_triangles()) * 2 * nu * np);
    auto cache = std::make_shared<GlobalStiffnessCache>();
    cache->pmean = Eigen::VectorXd::Zero(Np);
    for (int t = 0; t < m.num_triangles(); ++t) {
        auto L = bulk_local(sp, t, triangle_rule(m.triangle_points(t), sp.volume_order()), with_mass);
        const int* du = sp.velocity->element_dofs(t);
        const int* dp = sp.pressure->element_dofs(t);
        for (int i = 0; i < 2 * nu; ++i) {
            int gi = (i / nu) * Nu + du[i % nu];
            for (int j = 0; j < 2 * nu; ++j) {
                int gj = (j / nu) * Nu + du[j % nu];
                ts.emplace_back(gi, gj, L.strain(i, j));
                if (with_mass)
                    tm.emplace_back(gi, gj, L.mass(i, j));
            }
            for (int q = 0; q < np; ++q)
                td.emplace_back(dp[q], gi, L.div(q, i));
        }
        for (int q = 0; q < np; ++q)
            cache->pmean[dp[q]] += L.pmean[q];
    }
    cache->strain.resize(2 * Nu, 2 * Nu);
    cache->strain.setFromTriplets(ts.begin(), ts.end());
    cache->div.resize(Np, 2 * Nu);
    cache->div.setFromTriplets(td.begin(), td.end());
    if (with_mass) {
        cache->mass.resize(2 * Nu, 2 * Nu);
        cache->mass.setFromTriplets(tm.begin(), tm.end());
    }
    return cache;
}

SideBulk::SideBulk(const GlobalStiffnessCache& full, Side side)
    : side_(side),
      with_mass_(full.mass.nonZeros() > 0),
      strain_(full.strain),
      div_(full.div),
      mass_(full.mass),
      pmean_(full.pmean) {}

long SideBulk::scatter(const Spaces& sp, int t, const Local& d) {
    const int Nu = sp.velocity->num_dofs();
    const int nu = sp.velocity->num_local(), np = sp.pressure->num_local();
    const int* du = sp.velocity->element_dofs(t);
    const int* dp = sp.pressure->element_dofs(t);
    long count = 0;
    for (int i = 0; i < 2 * nu; ++i) {
        int gi = (i / nu) * Nu + du[i % nu];
        for (int j = 0; j < 2 * nu; ++j) {
            int gj = (j / nu) * Nu + du[j % nu];
            strain_.coeffRef(gi, gj) += d.strain(i, j);
            if (with_mass_)
                mass_.coeffRef(gi, gj) += d.mass(i, j);
            ++count;
        }
        for (int q = 0; q < np; ++q) {
            div_.coeffRef(dp[q], gi) += d.div(q, i);
            ++count;
        }
    }
    for (int q = 0; q < np; ++q)
        pmean_[dp[q]] += d.pmean[q];
    return count + np;
}

long SideBulk::sync(const Discretization& disc) {
    const Spaces& sp = *disc.spaces;
    const CartesianMesh& m = *sp.mesh;
    const CutDecomposition& cut = *disc.cut;
    const auto& vmap = disc.vel(side_);
    const auto& pmap = disc.pres(side_);
    const int nu = sp.velocity->num_local(), np = sp.pressure->num_local();
    if (state_.empty())
        state_.assign(m.num_triangles(), State::Full);

    long touched = 0;
    for (int t = 0; t < m.num_triangles(); ++t) {
        CellClass cls = cut.cell_class(t);
        bool mine = cls != CellClass::Cut && ((cls == CellClass::Plus) == (side_ == Side::Plus));
        State want;
        if (mine) {
            want = State::Full;
        } else {
            bool needed = false;
            const int* du = sp.velocity->element_dofs(t);
            const int* dp = sp.pressure->element_dofs(t);
            for (int a = 0; a < nu && !needed; ++a)
                needed = vmap.is_kept(du[a]);
            for (int q = 0; q < np && !needed; ++q)
                needed = pmap.is_kept(dp[q]);
            if (!needed)
                continue;
            want = cls == CellClass::Cut ? State::Partial : State::Zero;
        }
        State have = state_[t];
        if (want == have && want != State::Partial)
            continue;

        auto full = [&] {
            return bulk_local(sp, t, triangle_rule(m.triangle_points(t), sp.volume_order()), with_mass_);
        };
        Local target, current;
        if (want == State::Partial)
            target = bulk_local(sp, t, cut.volume_rule(t, side_, sp.volume_order()), with_mass_);
        else if (want == State::Full)
            target = full();
        if (have == State::Partial)
            current = partial_.at(t);
        else if (have == State::Full)
            current = full();
        if (want == State::Zero)
            target = zero_like(current);
        if (have == State::Zero)
            current = zero_like(target);

        Local delta;
        delta.strain = target.strain - current.strain;
        delta.div = target.div - current.div;
        delta.mass = target.mass - current.mass;
        delta.pmean = target.pmean - current.pmean;
        touched += scatter(sp, t, delta);

        state_[t] = want;
        if (want == State::Partial)
            partial_[t] = std::move(target);
        else
            partial_.erase(t);
    }
    return touched;
}

namespace {

// extraction of the bulk blocks through the binary side maps
void bulk_triplets(const BlockSaddleSystem& sys, Side s, std::vector<Triplet>& out) {
    const Discretization& d = *sys.disc;
    const SideBulk& bk = *sys.bulk[side_index(s)];
    const auto& vm = d.vel(s);
    const auto& pm = d.pres(s);
    const int Nu = d.spaces->velocity->num_dofs();
    const int na = vm.size();
    const int off_u = d.layout.begin(velocity_block(s));
    const int off_p = d.layout.begin(pressure_block(s));
    const double visc = 2.0 * sys.phys.nu(s);

    auto vel_row = [&](int g) {
        int l = vm.local(g % Nu);
        return l < 0 ? -1 : off_u + (g / Nu) * na + l;
    };
    const SparseMatrix& A = bk.strain();
    for (int k = 0; k < A.outerSize(); ++k) {
        int cj = vel_row(k);
        if (cj < 0)
            continue;
        for (SparseMatrix::InnerIterator it(A, k); it; ++it) {
            int ri = vel_row(it.row());
            if (ri >= 0)
                out.emplace_back(ri, cj, visc * it.value());
        }
    }
    const SparseMatrix& B = bk.div();
    for (int k = 0; k < B.outerSize(); ++k) {
        int cj = vel_row(k);
        if (cj < 0)
            continue;
        for (SparseMatrix::InnerIterator it(B, k); it; ++it) {
            int l = pm.local(it.row());
            if (l < 0)
                continue;
            out.emplace_back(off_p + l, cj, it.value());
            out.emplace_back(cj, off_p + l, it.value());
        }
    }
    if (s == Side::Plus) {
        int row = d.layout.begin(Block::Mean);
        for (int g : pm.active()) {
            out.emplace_back(row, off_p + pm.local(g), bk.pmean()[g]);
            out.emplace_back(off_p + pm.local(g), row, bk.pmean()[g]);
        }
    }
}

// all interface terms of one side on one cut cell. Unknowns carry their system index, or -1;
// prescribed outer-boundary velocity dofs of the Plus side also carry their global index.
struct InterfaceUnknown {
    int index, bnd, kind, loc, comp;
};

Eigen::MatrixXd interface_local(const BlockSaddleSystem& sys, Side s, int t, bool with_boundary,
                                std::vector<InterfaceUnknown>& unk) {
    const Discretization& d = *sys.disc;
    const Spaces& sp = *d.spaces;
    const int nu = sp.velocity->num_local(), np = sp.pressure->num_local();
    const int nl = sp.multiplier->num_local();
    const int Nu = sp.velocity->num_dofs();
    const int* du = sp.velocity->element_dofs(t);
    const int* dp = sp.pressure->element_dofs(t);
    const int* dl = sp.multiplier->element_dofs(t);
    const double nu_s = sys.phys.nu(s), alpha = sys.stab.alpha0, gamma = sys.gamma();
    const double nsign = s == Side::Minus ? 1.0 : -1.0;
    const auto& vm = d.vel(s);

    enum Kind { Vel, Pres, Mult, Phi };
    unk.clear();
    for (int c = 0; c < 2; ++c)
        for (int a = 0; a < nu; ++a) {
            int i = d.velocity_index(s, c, du[a]);
            int b = with_boundary && vm.constrained(du[a]) ? c * Nu + du[a] : -1;
            if (i >= 0 || b >= 0)
                unk.push_back({i, b, Vel, a, c});
        }
    if (gamma != 0.0)
        for (int q = 0; q < np; ++q)
            if (int i = d.pressure_index(s, dp[q]); i >= 0)
                unk.push_back({i, -1, Pres, q, 0});
    for (int c = 0; c < 2; ++c)
        for (int l = 0; l < nl; ++l)
            if (int i = d.multiplier_index(s, c, dl[l]); i >= 0)
                unk.push_back({i, -1, Mult, l, c});
    for (int c = 0; c < 2; ++c)
        for (int l = 0; l < nl; ++l)
            if (int i = d.phi_index(c, dl[l]); i >= 0)
                unk.push_back({i, -1, Phi, l, c});
    const int K = static_cast<int>(unk.size());
    Eigen::MatrixXd loc = Eigen::MatrixXd::Zero(K, K);
    if (K == 0)
        return loc;

    std::vector<double> vu(nu), vp(np), vl(nl);
    std::vector<Eigen::Vector2d> gu(nu);
    Eigen::MatrixXd W(2, K), M(2, K), T(2, K);
    for (const auto& qp : d.cut->interface_rule(t, sp.interface_order())) {
        sp.velocity->eval(t, qp.x, vu.data(), gu.data());
        sp.pressure->eval(t, qp.x, vp.data());
        sp.multiplier->eval(t, qp.x, vl.data());
        Eigen::Vector2d n = nsign * qp.normal;
        W.setZero();
        M.setZero();
        T.setZero();
        for (int i = 0; i < K; ++i) {
            const InterfaceUnknown& u = unk[i];
            switch (u.kind) {
            case Vel:
                W(u.comp, i) = vu[u.loc];
                // 2 nu eps(phi e_c) n
                T.col(i) = nu_s * gu[u.loc] * n[u.comp];
                T(u.comp, i) += nu_s * gu[u.loc].dot(n);
                break;
            case Pres:
                T.col(i) = -vp[u.loc] * n;
                break;
            case Mult:
                M(u.comp, i) = vl[u.loc];
                T(u.comp, i) = -vl[u.loc];
                break;
            case Phi:
                W(u.comp, i) = -vl[u.loc];
                break;
            }
        }
        Eigen::MatrixXd MW = M.transpose() * W;
        loc.noalias() -= qp.w * (MW + MW.transpose());
        if (alpha != 0.0)
            loc.noalias() += (qp.w * alpha) * (W.transpose() * W);
        if (gamma != 0.0)
            loc.noalias() -= (qp.w * gamma) * (T.transpose() * T);
    }
    return loc;
}

void interface_triplets(const BlockSaddleSystem& sys, Side s, int t, std::vector<Triplet>& out) {
    std::vector<InterfaceUnknown> unk;
    Eigen::MatrixXd loc = interface_local(sys, s, t, false, unk);
    const int K = static_cast<int>(unk.size());
    for (int i = 0; i < K; ++i)
        for (int j = 0; j < K; ++j)
            if (loc(i, j) != 0.0)
                out.emplace_back(unk[i].index, unk[j].index, loc(i, j));
}

void build_matrix(BlockSaddleSystem& sys) {
    const Discretization& d = *sys.disc;
    std::vector<Triplet> trip;
    for (Side s : {Side::Plus, Side::Minus})
        bulk_triplets(sys, s, trip);
    for (int t : d.cut->cut_cells())
        for (Side s : {Side::Plus, Side::Minus})
            interface_triplets(sys, s, t, trip);
    sys.matrix.resize(d.layout.size(), d.layout.size());
    sys.matrix.setFromTriplets(trip.begin(), trip.end());
    sys.matrix.makeCompressed();
}

} // namespace

BlockSaddleSystem assemble_system(std::shared_ptr<const Discretization> disc,
                                  const PhysicalParams& phys,
                                  const StabilizationParams& stab,
                                  std::shared_ptr<const GlobalStiffnessCache> cache) {
    if (stab.gamma0 < 0.0 || stab.alpha0 < 0.0)
        throw InvalidArgument("stabilization parameters must be non-negative");
    BlockSaddleSystem sys;
    sys.disc = std::move(disc);
    sys.phys = phys;
    sys.stab = stab;
    sys.cache = std::move(cache);
    for (Side s : {Side::Plus, Side::Minus}) {
        sys.bulk[side_index(s)] = std::make_shared<SideBulk>(*sys.cache, s);
        sys.touched_entries += sys.bulk[side_index(s)]->sync(*sys.disc);
    }
    build_matrix(sys);
    sys.rhs = Eigen::VectorXd::Zero(sys.disc->layout.size());
    return sys;
}

BlockSaddleSystem update_system(BlockSaddleSystem&& old, std::shared_ptr<const Discretization> disc) {
    if (disc->spaces != old.disc->spaces)
        throw InvalidArgument("update requires the same mesh and spaces");
    BlockSaddleSystem sys = std::move(old);
    sys.disc = std::move(disc);
    sys.touched_entries = 0;
    for (Side s : {Side::Plus, Side::Minus})
        sys.touched_entries += sys.bulk[side_index(s)]->sync(*sys.disc);
    build_matrix(sys);
    sys.rhs = Eigen::VectorXd::Zero(sys.disc->layout.size());
    return sys;
}

Eigen::VectorXd assemble_rhs(const Discretization& d,
                             const VolumeForce& f_plus,
                             const VolumeForce& f_minus,
                             const InterfaceForce& g) {
    const Spaces& sp = *d.spaces;
    const CartesianMesh& m = *sp.mesh;
    const int nu = sp.velocity->num_local(), nl = sp.multiplier->num_local();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d.layout.size());
    std::vector<double> vu(nu), vl(nl);
    for (Side s : {Side::Plus, Side::Minus}) {
        const VolumeForce& f = s == Side::Plus ? f_plus : f_minus;
        if (!f)
            continue;
        for (int t = 0; t < m.num_triangles(); ++t) {
            const int* du = sp.velocity->element_dofs(t);
            for (const auto& qp : d.cut->volume_rule(t, s, sp.volume_order() + 4)) {
                sp.velocity->eval(t, qp.x, vu.data());
                Eigen::Vector2d fx = f(qp.x);
                for (int c = 0; c < 2; ++c)
                    for (int a = 0; a < nu; ++a)
                        if (int i = d.velocity_index(s, c, du[a]); i >= 0)
                            rhs[i] += qp.w * fx[c] * vu[a];
            }
        }
    }
    if (g) {
        for (int t : d.cut->cut_cells()) {
            const int* dl = sp.multiplier->element_dofs(t);
            for (const auto& qp : d.cut->interface_rule(t, sp.interface_order() + 2)) {
                sp.multiplier->eval(t, qp.x, vl.data());
                Eigen::Vector2d gx = g(qp);
                for (int c = 0; c < 2; ++c)
                    for (int l = 0; l < nl; ++l)
                        if (int i = d.phi_index(c, dl[l]); i >= 0)
                            rhs[i] += qp.w * gx[c] * vl[l];
            }
        }
    }
    return rhs;
}

Eigen::VectorXd interpolate_boundary(const Discretization& d, const VectorField& g) {
    const ScalarSpace& sp = *d.spaces->velocity;
    const auto& vm = d.vel(Side::Plus);
    const int Nu = sp.num_dofs();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(2 * Nu);
    for (int dof = 0; dof < Nu; ++dof)
        if (vm.constrained(dof)) {
            Eigen::Vector2d v = g(sp.dof_point(dof));
            out[dof] = v[0];
            out[Nu + dof] = v[1];
        }
    return out;
}

Eigen::VectorXd dirichlet_lift(const BlockSaddleSystem& sys, const Eigen::VectorXd& boundary) {
    const Discretization& d = *sys.disc;
    const Spaces& sp = *d.spaces;
    const auto& vm = d.vel(Side::Plus);
    const auto& pm = d.pres(Side::Plus);
    const int Nu = sp.velocity->num_dofs(), na = vm.size();
    if (boundary.size() != 2 * Nu)
        throw InvalidArgument("boundary vector must use the global velocity numbering");
    const SideBulk& bk = *sys.bulk[side_index(Side::Plus)];
    const int off_u = d.layout.begin(Block::UPlus), off_p = d.layout.begin(Block::PPlus);
    const double visc = 2.0 * sys.phys.nu_plus;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(d.layout.size());
    const SparseMatrix& A = bk.strain();
    const SparseMatrix& B = bk.div();
    for (int k = 0; k < A.outerSize(); ++k) {
        if (!vm.constrained(k % Nu) || boundary[k] == 0.0)
            continue;
        for (SparseMatrix::InnerIterator it(A, k); it; ++it)
            if (int l = vm.local(it.row() % Nu); l >= 0)
                out[off_u + (it.row() / Nu) * na + l] -= visc * it.value() * boundary[k];
        for (SparseMatrix::InnerIterator it(B, k); it; ++it)
            if (int l = pm.local(it.row()); l >= 0)
                out[off_p + l] -= it.value() * boundary[k];
    }
    std::vector<InterfaceUnknown> unk;
    for (int t : d.cut->cut_cells()) {
        const int* du = sp.velocity->element_dofs(t);
        bool any = false;
        for (int a = 0; a < sp.velocity->num_local() && !any; ++a)
            any = vm.constrained(du[a]);
        if (!any)
            continue;
        Eigen::MatrixXd loc = interface_local(sys, Side::Plus, t, true, unk);
        for (std::size_t i = 0; i < unk.size(); ++i) {
            if (unk[i].index < 0)
                continue;
            for (std::size_t j = 0; j < unk.size(); ++j)
                if (unk[j].bnd >= 0)
                    out[unk[i].index] -= loc(i, j) * boundary[unk[j].bnd];
        }
    }
    return out;
}

SparseMatrix side_mass(const BlockSaddleSystem& sys, Side s) {
    const Discretization& d = *sys.disc;
    const SparseMatrix& Mg = sys.bulk[side_index(s)]->mass();
    if (Mg.nonZeros() == 0)
        throw InvalidArgument("stiffness cache was built without a mass matrix");
    const auto& vm = d.vel(s);
    const int Nu = d.spaces->velocity->num_dofs(), na = vm.size();
    auto row = [&](int g) {
        int l = vm.local(g % Nu);
        return l < 0 ? -1 : (g / Nu) * na + l;
    };
    std::vector<Triplet> trip;
    for (int k = 0; k < Mg.outerSize(); ++k) {
        int cj = row(k);
        if (cj < 0)
            continue;
        for (SparseMatrix::InnerIterator it(Mg, k); it; ++it)
            if (int ri = row(it.row()); ri >= 0)
                trip.emplace_back(ri, cj, it.value());
    }
    SparseMatrix out(2 * na, 2 * na);
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

void write_matrix_triplets(const SparseMatrix& m, std::ostream& out) {
    out.precision(17);
    out << "row,col,value\n";
    for (int k = 0; k < m.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(m, k); it; ++it)
            out << it.row() << ',' << it.col() << ',' << it.value() << '\n';
}

} // namespace cutflow
