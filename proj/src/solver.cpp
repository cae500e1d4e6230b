#include "cutflow/solver.hpp"

#include <cmath>
#include <sstream>

#include <umfpack.h>

#include "cutflow/errors.hpp"

namespace cutflow {

namespace {

std::string pivot_message(const BlockLayout* layout, int col, const char* what) {
    std::ostringstream os;
    os << what << " (column " << col;
    if (layout)
        os << ", block " << block_name(layout->block_of(col));
    os << ")";
    return os.str();
}

} // namespace

SparseLU::SparseLU(const SparseMatrix& a, const BlockLayout* layout, double rcond_min) : a_(a) {
    if (a_.rows() != a_.cols())
        throw InvalidArgument("matrix must be square");
    a_.makeCompressed();
    const int n = static_cast<int>(a_.rows());
    double control[UMFPACK_CONTROL], info[UMFPACK_INFO];
    umfpack_di_defaults(control);
    // the saddle-point pattern is structurally symmetric; the unsymmetric default fills badly
    control[UMFPACK_STRATEGY] = UMFPACK_STRATEGY_SYMMETRIC;
    void* symbolic = nullptr;
    int st = umfpack_di_symbolic(n, n, a_.outerIndexPtr(), a_.innerIndexPtr(), a_.valuePtr(),
                                 &symbolic, control, info);
    if (st != UMFPACK_OK)
        throw NumericalError("sparse symbolic factorization failed (status " + std::to_string(st) + ")");
    st = umfpack_di_numeric(a_.outerIndexPtr(), a_.innerIndexPtr(), a_.valuePtr(), symbolic,
                            &numeric_, control, info);
    umfpack_di_free_symbolic(&symbolic);
    if (st != UMFPACK_OK && st != UMFPACK_WARNING_singular_matrix) {
        umfpack_di_free_numeric(&numeric_);
        throw NumericalError("sparse numeric factorization failed (status " + std::to_string(st) + ")");
    }
    rcond_ = info[UMFPACK_RCOND];
    if (st == UMFPACK_WARNING_singular_matrix || !(rcond_ >= rcond_min)) {
        // locate the weakest pivot of U in the original column order
        int lnz, unz, nr, nc, nzd;
        umfpack_di_get_lunz(&lnz, &unz, &nr, &nc, &nzd, numeric_);
        std::vector<int> P(n), Q(n);
        std::vector<double> D(n);
        int recip = 0;
        umfpack_di_get_numeric(nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, P.data(),
                               Q.data(), D.data(), &recip, nullptr, numeric_);
        int worst = 0;
        for (int k = 1; k < n; ++k)
            if (std::abs(D[k]) < std::abs(D[worst]))
                worst = k;
        int col = Q[worst];
        umfpack_di_free_numeric(&numeric_);
        std::string blk = layout ? block_name(layout->block_of(col)) : "";
        throw SingularMatrixError(pivot_message(layout, col, "singular saddle-point matrix"), blk, col);
    }
}

SparseLU::~SparseLU() {
    if (numeric_)
        umfpack_di_free_numeric(&numeric_);
}

Eigen::VectorXd SparseLU::solve(const Eigen::VectorXd& b) const {
    Eigen::VectorXd x(b.size());
    double control[UMFPACK_CONTROL], info[UMFPACK_INFO];
    umfpack_di_defaults(control);
    int st = umfpack_di_solve(UMFPACK_A, a_.outerIndexPtr(), a_.innerIndexPtr(), a_.valuePtr(),
                              x.data(), b.data(), numeric_, control, info);
    if (st != UMFPACK_OK)
        throw NumericalError("sparse triangular solve failed (status " + std::to_string(st) + ")");
    return x;
}

FieldSolution::FieldSolution(std::shared_ptr<const Discretization> disc, Eigen::VectorXd x)
    : disc_(std::move(disc)), x_(std::move(x)) {}

Eigen::VectorXd FieldSolution::block(Block b) const {
    return x_.segment(disc_->layout.begin(b), disc_->layout.length(b));
}

Eigen::VectorXd FieldSolution::velocity_global(Side s) const {
    const int Nu = disc_->spaces->velocity->num_dofs();
    const auto& vm = disc_->vel(s);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(2 * Nu);
    for (int c = 0; c < 2; ++c)
        for (int g : vm.active())
            out[c * Nu + g] = x_[disc_->velocity_index(s, c, g)];
    if (s == Side::Plus && boundary_.size() == out.size())
        for (int g : vm.kept())
            if (vm.constrained(g))
                for (int c = 0; c < 2; ++c)
                    out[c * Nu + g] = boundary_[c * Nu + g];
    return out;
}

Eigen::VectorXd FieldSolution::pressure_global(Side s) const {
    const auto& pm = disc_->pres(s);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(pm.global_size());
    for (int g : pm.active())
        out[g] = x_[disc_->pressure_index(s, g)];
    return out;
}

Eigen::Vector2d FieldSolution::velocity(Side s, int t, const Point& x) const {
    const ScalarSpace& sp = *disc_->spaces->velocity;
    double v[15];
    sp.eval(t, x, v);
    const int* dofs = sp.element_dofs(t);
    Eigen::Vector2d u = Eigen::Vector2d::Zero();
    for (int c = 0; c < 2; ++c)
        for (int a = 0; a < sp.num_local(); ++a)
            if (int i = disc_->velocity_index(s, c, dofs[a]); i >= 0)
                u[c] += x_[i] * v[a];
            else if (has_boundary(s))
                u[c] += boundary_[c * sp.num_dofs() + dofs[a]] * v[a];
    return u;
}

Eigen::Matrix2d FieldSolution::velocity_gradient(Side s, int t, const Point& x) const {
    const ScalarSpace& sp = *disc_->spaces->velocity;
    double v[15];
    Eigen::Vector2d g[15];
    sp.eval(t, x, v, g);
    const int* dofs = sp.element_dofs(t);
    Eigen::Matrix2d du = Eigen::Matrix2d::Zero();
    for (int c = 0; c < 2; ++c)
        for (int a = 0; a < sp.num_local(); ++a)
            if (int i = disc_->velocity_index(s, c, dofs[a]); i >= 0)
                du.row(c) += x_[i] * g[a].transpose();
            else if (has_boundary(s))
                du.row(c) += boundary_[c * sp.num_dofs() + dofs[a]] * g[a].transpose();
    return du;
}

double FieldSolution::pressure(Side s, int t, const Point& x) const {
    const ScalarSpace& sp = *disc_->spaces->pressure;
    double v[15];
    sp.eval(t, x, v);
    const int* dofs = sp.element_dofs(t);
    double p = 0.0;
    for (int a = 0; a < sp.num_local(); ++a)
        if (int i = disc_->pressure_index(s, dofs[a]); i >= 0)
            p += x_[i] * v[a];
    return p;
}

Eigen::Vector2d FieldSolution::multiplier(Side s, int t, const Point& x) const {
    const ScalarSpace& sp = *disc_->spaces->multiplier;
    double v[15];
    sp.eval(t, x, v);
    const int* dofs = sp.element_dofs(t);
    Eigen::Vector2d l = Eigen::Vector2d::Zero();
    for (int c = 0; c < 2; ++c)
        for (int a = 0; a < sp.num_local(); ++a)
            if (int i = disc_->multiplier_index(s, c, dofs[a]); i >= 0)
                l[c] += x_[i] * v[a];
    return l;
}

Eigen::Vector2d FieldSolution::phi(int t, const Point& x) const {
    const ScalarSpace& sp = *disc_->spaces->multiplier;
    double v[15];
    sp.eval(t, x, v);
    const int* dofs = sp.element_dofs(t);
    Eigen::Vector2d f = Eigen::Vector2d::Zero();
    for (int c = 0; c < 2; ++c)
        for (int a = 0; a < sp.num_local(); ++a)
            if (int i = disc_->phi_index(c, dofs[a]); i >= 0)
                f[c] += x_[i] * v[a];
    return f;
}

Eigen::Vector2d FieldSolution::velocity(const Point& x) const {
    Location loc = disc_->spaces->mesh->locate(x);
    Side s = disc_->cut->levelset()(x) > 0.0 ? Side::Plus : Side::Minus;
    return velocity(s, loc.triangle, x);
}

double FieldSolution::pressure(const Point& x) const {
    Location loc = disc_->spaces->mesh->locate(x);
    Side s = disc_->cut->levelset()(x) > 0.0 ? Side::Plus : Side::Minus;
    return pressure(s, loc.triangle, x);
}

FieldSolution solve(std::shared_ptr<const Discretization> disc,
                    const SparseMatrix& a,
                    const Eigen::VectorXd& b,
                    const SolveOptions& opts) {
    if (a.rows() != disc->layout.size() || b.size() != a.rows())
        throw InvalidArgument("system size does not match the discretization");
    SparseLU lu(a, &disc->layout, opts.rcond_min);
    Eigen::VectorXd x = lu.solve(b);
    if (!x.allFinite())
        throw NumericalError("non-finite solution");
    double bn = b.norm();
    double res = (a * x - b).norm() / (bn > 0.0 ? bn : 1.0);
    if (!(res <= opts.residual_tol))
        throw NumericalError("relative residual " + std::to_string(res) + " above tolerance");
    FieldSolution sol(std::move(disc), std::move(x));
    sol.residual = res;
    sol.rcond = lu.rcond();
    return sol;
}

FieldSolution solve(const BlockSaddleSystem& sys, const SolveOptions& opts) {
    return solve(sys.disc, sys.matrix, sys.rhs, opts);
}

} // namespace cutflow
