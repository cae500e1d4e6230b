#include "cutflow/fe_spaces.hpp"

#include <algorithm>
#include <cmath>

#include "cutflow/errors.hpp"

namespace cutflow {

ScalarSpace::ScalarSpace(std::shared_ptr<const CartesianMesh> mesh, int degree)
    : mesh_(std::move(mesh)), k_(degree) {
    if (degree < 0 || degree > 4)
        throw InvalidArgument("unsupported polynomial degree " + std::to_string(degree));
    const CartesianMesh& m = *mesh_;
    const int n = m.n();
    nloc_ = (k_ + 1) * (k_ + 2) / 2;

    for (int j = 0; j <= k_; ++j)
        for (int i = 0; i + j <= k_; ++i)
            alpha_.push_back({k_ - i - j, i, j});

    ndofs_ = k_ == 0 ? m.num_triangles() : (k_ * n + 1) * (k_ * n + 1);
    elem_dofs_.resize(static_cast<std::size_t>(m.num_triangles()) * nloc_);
    for (int t = 0; t < m.num_triangles(); ++t) {
        if (k_ == 0) {
            elem_dofs_[t] = t;
            continue;
        }
        const auto& tv = m.triangle(t);
        for (int l = 0; l < nloc_; ++l) {
            int I = 0, J = 0;
            for (int v = 0; v < 3; ++v) {
                auto g = m.vertex_grid(tv[v]);
                I += alpha_[l][v] * g[0];
                J += alpha_[l][v] * g[1];
            }
            elem_dofs_[t * nloc_ + l] = J * (k_ * n + 1) + I;
        }
    }
    support_.resize(ndofs_);
    for (int t = 0; t < m.num_triangles(); ++t)
        for (int l = 0; l < nloc_; ++l)
            support_[elem_dofs_[t * nloc_ + l]].push_back(t);

    grad_bary_.resize(m.num_triangles());
    for (int t = 0; t < m.num_triangles(); ++t) {
        auto p = m.triangle_points(t);
        double det = (p[1] - p[0]).x() * (p[2] - p[0]).y() - (p[1] - p[0]).y() * (p[2] - p[0]).x();
        for (int v = 0; v < 3; ++v) {
            const Point &a = p[(v + 1) % 3], &b = p[(v + 2) % 3];
            grad_bary_[t][v] = Eigen::Vector2d(a.y() - b.y(), b.x() - a.x()) / det;
        }
    }
}

Point ScalarSpace::dof_point(int dof) const {
    const CartesianMesh& m = *mesh_;
    if (k_ == 0) {
        auto p = m.triangle_points(dof);
        return (p[0] + p[1] + p[2]) / 3.0;
    }
    int side = k_ * m.n() + 1;
    int I = dof % side, J = dof / side;
    const Rectangle& d = m.domain();
    return {d.x0 + d.width() * I / (side - 1), d.y0 + d.height() * J / (side - 1)};
}

bool ScalarSpace::on_boundary(int dof) const {
    if (k_ == 0)
        return false;
    int side = k_ * mesh_->n() + 1;
    int I = dof % side, J = dof / side;
    return I == 0 || J == 0 || I == side - 1 || J == side - 1;
}

void ScalarSpace::eval(int t, const Point& x, double* val, Eigen::Vector2d* grad) const {
    if (k_ == 0) {
        val[0] = 1.0;
        if (grad)
            grad[0].setZero();
        return;
    }
    auto lam = barycentric(mesh_->triangle_points(t), x);
    // 1D factors l_a(lambda) = prod_{q<a} (k lambda - q) / (q + 1) and their derivatives
    double L[3][5], D[3][5];
    for (int v = 0; v < 3; ++v) {
        L[v][0] = 1.0;
        D[v][0] = 0.0;
        for (int a = 1; a <= k_; ++a) {
            double f = (k_ * lam[v] - (a - 1)) / a;
            L[v][a] = L[v][a - 1] * f;
            D[v][a] = D[v][a - 1] * f + L[v][a - 1] * double(k_) / a;
        }
    }
    const auto& gb = grad_bary_[t];
    for (int l = 0; l < nloc_; ++l) {
        const auto& al = alpha_[l];
        double l0 = L[0][al[0]], l1 = L[1][al[1]], l2 = L[2][al[2]];
        val[l] = l0 * l1 * l2;
        if (grad)
            grad[l] = D[0][al[0]] * l1 * l2 * gb[0] + l0 * D[1][al[1]] * l2 * gb[1] +
                      l0 * l1 * D[2][al[2]] * gb[2];
    }
}

FictitiousDofMap::FictitiousDofMap(const ScalarSpace& space,
                                   const CutDecomposition& cut,
                                   Side side,
                                   bool dirichlet_on_boundary)
    : side_(side) {
    const int N = space.num_dofs();
    local_.assign(N, -1);
    kept_flag_.assign(N, 0);
    for (int g = 0; g < N; ++g) {
        bool keep = false;
        for (int t : space.support(g))
            if (cut.touches(t, side)) {
                keep = true;
                break;
            }
        if (!keep)
            continue;
        kept_flag_[g] = 1;
        kept_.push_back(g);
        if (dirichlet_on_boundary && space.on_boundary(g))
            continue;
        local_[g] = static_cast<int>(active_.size());
        active_.push_back(g);
    }
}

Eigen::VectorXd FictitiousDofMap::reduce(const Eigen::VectorXd& global) const {
    Eigen::VectorXd out(size());
    for (int i = 0; i < size(); ++i)
        out[i] = global[active_[i]];
    return out;
}

Eigen::VectorXd FictitiousDofMap::extend(const Eigen::VectorXd& local) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(global_size());
    for (int i = 0; i < size(); ++i)
        out[active_[i]] = local[i];
    return out;
}

TraceSpace::TraceSpace(std::shared_ptr<const ScalarSpace> generator,
                       const CutDecomposition& cut,
                       double tol_rank)
    : gen_(std::move(generator)) {
    const ScalarSpace& sp = *gen_;
    order_ = 2 * sp.degree() + 2;
    const int N = sp.num_dofs();
    cand_pos_.assign(N, -1);
    local_.assign(N, -1);

    for (int t : cut.cut_cells()) {
        if (!(cut.interface_length(t) > 0.0))
            continue;
        const int* dofs = sp.element_dofs(t);
        for (int l = 0; l < sp.num_local(); ++l)
            if (cand_pos_[dofs[l]] < 0) {
                cand_pos_[dofs[l]] = 0;
                candidates_.push_back(dofs[l]);
            }
    }
    std::sort(candidates_.begin(), candidates_.end());
    for (std::size_t i = 0; i < candidates_.size(); ++i)
        cand_pos_[candidates_[i]] = static_cast<int>(i);

    const int m = static_cast<int>(candidates_.size());
    cand_gram_ = Eigen::MatrixXd::Zero(m, m);
    std::vector<double> val(sp.num_local());
    for (int t : cut.cut_cells()) {
        const int* dofs = sp.element_dofs(t);
        for (const auto& qp : cut.interface_rule(t, order_)) {
            sp.eval(t, qp.x, val.data());
            for (int a = 0; a < sp.num_local(); ++a) {
                int ia = cand_pos_[dofs[a]];
                if (ia < 0)
                    continue;
                for (int b = 0; b < sp.num_local(); ++b) {
                    int ib = cand_pos_[dofs[b]];
                    if (ib >= 0)
                        cand_gram_(ia, ib) += qp.w * val[a] * val[b];
                }
            }
        }
    }

    // greedy pivoted Cholesky: keep the candidate with the largest residual norm each step
    std::vector<char> chosen(m, 0);
    if (tol_rank <= 0.0) {
        for (int i = 0; i < m; ++i)
            chosen[i] = 1;
    } else if (m > 0) {
        Eigen::VectorXd d = cand_gram_.diagonal();
        double dmax = d.maxCoeff();
        std::vector<Eigen::VectorXd> cols;
        while (true) {
            int best = -1;
            double bd = 0.0;
            for (int i = 0; i < m; ++i)
                if (!chosen[i] && d[i] > bd) {
                    bd = d[i];
                    best = i;
                }
            if (best < 0 || bd <= tol_rank * dmax)
                break;
            Eigen::VectorXd c = cand_gram_.col(best);
            for (std::size_t q = 0; q < cols.size(); ++q)
                c -= cols[q][best] * cols[q];
            c /= std::sqrt(bd);
            for (int i = 0; i < m; ++i)
                d[i] -= c[i] * c[i];
            chosen[best] = 1;
            cols.push_back(std::move(c));
        }
        // pivot sizes only bound the spectrum loosely; drop the survivor carrying the
        // smallest eigenvector until the retained Gram matrix is well conditioned
        while (true) {
            std::vector<int> sel;
            for (int i = 0; i < m; ++i)
                if (chosen[i])
                    sel.push_back(i);
            if (sel.size() < 2)
                break;
            Eigen::MatrixXd g(sel.size(), sel.size());
            for (std::size_t a = 0; a < sel.size(); ++a)
                for (std::size_t b = 0; b < sel.size(); ++b)
                    g(a, b) = cand_gram_(sel[a], sel[b]);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
            if (es.eigenvalues()[0] > tol_rank * es.eigenvalues()[sel.size() - 1])
                break;
            Eigen::Index worst;
            es.eigenvectors().col(0).cwiseAbs().maxCoeff(&worst);
            chosen[sel[worst]] = 0;
        }
    }
    for (int i = 0; i < m; ++i)
        if (chosen[i] && cand_gram_(i, i) > 0.0) {
            local_[candidates_[i]] = static_cast<int>(survivors_.size());
            survivors_.push_back(candidates_[i]);
        }
}

Eigen::MatrixXd TraceSpace::survivor_gram() const {
    const int s = size();
    Eigen::MatrixXd g(s, s);
    for (int i = 0; i < s; ++i)
        for (int j = 0; j < s; ++j)
            g(i, j) = cand_gram_(cand_pos_[survivors_[i]], cand_pos_[survivors_[j]]);
    return g;
}

Eigen::VectorXd interpolate(const ScalarSpace& space, const ScalarFunction& f) {
    Eigen::VectorXd c(space.num_dofs());
    if (space.degree() == 0) {
        const CartesianMesh& m = space.mesh();
        for (int t = 0; t < m.num_triangles(); ++t) {
            double s = 0.0, a = 0.0;
            for (const auto& qp : triangle_rule(m.triangle_points(t), 8)) {
                s += qp.w * f(qp.x);
                a += qp.w;
            }
            c[t] = s / a;
        }
        return c;
    }
    for (int g = 0; g < space.num_dofs(); ++g)
        c[g] = f(space.dof_point(g));
    return c;
}

double evaluate(const ScalarSpace& space, const Eigen::VectorXd& coef, const Point& x) {
    Location loc = space.mesh().locate(x);
    double val[15];
    space.eval(loc.triangle, x, val);
    const int* dofs = space.element_dofs(loc.triangle);
    double s = 0.0;
    for (int l = 0; l < space.num_local(); ++l)
        s += coef[dofs[l]] * val[l];
    return s;
}

Eigen::VectorXd project_trace(const TraceSpace& trace,
                              const CutDecomposition& cut,
                              const ScalarFunction& f) {
    const ScalarSpace& sp = trace.generator();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(trace.size());
    std::vector<double> val(sp.num_local());
    for (int t : cut.cut_cells()) {
        const int* dofs = sp.element_dofs(t);
        for (const auto& qp : cut.interface_rule(t, trace.quad_order() + 4)) {
            sp.eval(t, qp.x, val.data());
            double fx = f(qp.x);
            for (int a = 0; a < sp.num_local(); ++a) {
                int i = trace.local(dofs[a]);
                if (i >= 0)
                    rhs[i] += qp.w * fx * val[a];
            }
        }
    }
    return trace.survivor_gram().ldlt().solve(rhs);
}

} // namespace cutflow
