#include "cutflow/levelset.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/ellint_2.hpp>

#include "cutflow/errors.hpp"

namespace cutflow {

LevelSet::LevelSet(Kind kind, const Point& center, double a1, double a2, const Rectangle& domain)
    : kind_(kind), center_(center), a1_(a1), a2_(a2) {
    if (!(a1 > 0.0) || !(a2 > 0.0) || !std::isfinite(a1) || !std::isfinite(a2))
        throw InvalidArgument("level-set radius / semi-axes must be positive");
    if (!(center.x() - a1 > domain.x0 && center.x() + a1 < domain.x1 &&
          center.y() - a2 > domain.y0 && center.y() + a2 < domain.y1))
        throw InvalidArgument("interface is not strictly inside the computational domain");
    if (kind == Kind::Circle) {
        qa_ = qb_ = 1.0;
        qc_ = a1 * a1;
    } else {
        qa_ = 1.0 / (a1 * a1);
        qb_ = 1.0 / (a2 * a2);
        qc_ = 1.0;
    }
}

LevelSet LevelSet::circle(const Point& center, double radius, const Rectangle& domain) {
    return LevelSet(Kind::Circle, center, radius, radius, domain);
}

LevelSet LevelSet::ellipse(const Point& center, double a1, double a2, const Rectangle& domain) {
    return LevelSet(Kind::Ellipse, center, a1, a2, domain);
}

double LevelSet::operator()(const Point& x) const {
    double dx = x.x() - center_.x(), dy = x.y() - center_.y();
    return qa_ * dx * dx + qb_ * dy * dy - qc_;
}

Eigen::Vector2d LevelSet::gradient(const Point& x) const {
    return {2.0 * qa_ * (x.x() - center_.x()), 2.0 * qb_ * (x.y() - center_.y())};
}

NormalCurvature LevelSet::normal_curvature(const Point& x) const {
    double dx = x.x() - center_.x(), dy = x.y() - center_.y();
    double gx = qa_ * dx, gy = qb_ * dy;
    double s2 = gx * gx + gy * gy;
    if (!(s2 > 0.0))
        throw GeometryError("normal undefined at the level-set center");
    double s = std::sqrt(s2);
    double kappa = -qa_ * qb_ * (qa_ * dx * dx + qb_ * dy * dy) / (s2 * s);
    return {Eigen::Vector2d(gx / s, gy / s), kappa};
}

double LevelSet::distance_estimate(const Point& x) const {
    double g = gradient(x).norm();
    double v = std::abs((*this)(x));
    return g > 0.0 ? v / g : std::numeric_limits<double>::infinity();
}

std::array<double, 3> LevelSet::along(const Point& p0, const Point& p1) const {
    double x0 = p0.x() - center_.x(), y0 = p0.y() - center_.y();
    double dx = p1.x() - p0.x(), dy = p1.y() - p0.y();
    return {qa_ * dx * dx + qb_ * dy * dy, 2.0 * (qa_ * x0 * dx + qb_ * y0 * dy), (*this)(p0)};
}

namespace {

EdgeCrossing solve_edge(std::array<double, 3> q, bool snap0, bool snap1, double length, double tol) {
    double a = q[0], b = q[1], c = q[2];
    EdgeCrossing ec;
    if (snap0)
        c = 0.0;
    if (snap1)
        b = -a - c;
    double r0, r1;
    if (snap0 && snap1) {
        r0 = 0.0;
        r1 = 1.0;
    } else if (snap0) {
        r0 = 0.0;
        r1 = -b / a;
    } else if (snap1) {
        r0 = 1.0;
        r1 = c / a;
    } else {
        double disc = b * b - 4.0 * a * c;
        if (disc < 0.0)
            return ec;
        double qq = -0.5 * (b + std::copysign(std::sqrt(disc), b));
        if (qq == 0.0) {
            r0 = r1 = 0.0;
        } else {
            r0 = qq / a;
            r1 = c / qq;
        }
    }
    if (r0 > r1)
        std::swap(r0, r1);
    if ((r1 - r0) * length <= tol)
        return ec; // tangency, no change of sign
    ec.crossing = true;
    ec.r0 = r0;
    ec.r1 = r1;
    return ec;
}

} // namespace

std::vector<double> LevelSet::edge_roots(const Point& p0, const Point& p1, double tol) const {
    double length = (p1 - p0).norm();
    auto q = along(p0, p1);
    if (length == 0.0) {
        if (std::abs(q[2]) <= tol * gradient(p0).norm())
            throw GeometryError("degenerate segment lying on the interface");
        return {};
    }
    bool s0 = distance_estimate(p0) <= tol, s1 = distance_estimate(p1) <= tol;
    std::vector<double> out;
    EdgeCrossing ec = solve_edge(q, s0, s1, length, tol);
    if (!ec.crossing) {
        // tangent contact is still a root
        double disc = q[1] * q[1] - 4.0 * q[0] * q[2];
        if (std::abs(disc) <= 1e-14 * q[1] * q[1] || s0 || s1) {
            double t = s0 ? 0.0 : (s1 ? 1.0 : -q[1] / (2.0 * q[0]));
            if (t >= 0.0 && t <= 1.0)
                out.push_back(t);
        }
        return out;
    }
    for (double r : {ec.r0, ec.r1})
        if (r >= 0.0 && r <= 1.0)
            out.push_back(r);
    return out;
}

double LevelSet::area() const { return std::numbers::pi * a1_ * a2_; }

double LevelSet::perimeter() const {
    double a = std::max(a1_, a2_), b = std::min(a1_, a2_);
    if (a == b)
        return 2.0 * std::numbers::pi * a;
    double k = std::sqrt(1.0 - (b / a) * (b / a));
    return 4.0 * a * boost::math::ellint_2(k);
}

double default_tol_gamma(const CartesianMesh& mesh) { return 1e-10 * mesh.domain().diameter(); }

MeshCrossings compute_crossings(const CartesianMesh& mesh, const LevelSet& ls, double tol) {
    MeshCrossings cr;
    cr.tol = tol;
    cr.vertex_sign.resize(mesh.num_vertices());
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        const Point& p = mesh.vertex(v);
        if (ls.distance_estimate(p) <= tol)
            cr.vertex_sign[v] = 0;
        else
            cr.vertex_sign[v] = ls(p) < 0.0 ? -1 : 1;
    }
    cr.edges.resize(mesh.num_edges());
    for (int e = 0; e < mesh.num_edges(); ++e) {
        const Edge& ed = mesh.edge(e);
        const Point &p0 = mesh.vertex(ed.v[0]), &p1 = mesh.vertex(ed.v[1]);
        cr.edges[e] = solve_edge(ls.along(p0, p1),
                                 cr.vertex_sign[ed.v[0]] == 0,
                                 cr.vertex_sign[ed.v[1]] == 0,
                                 (p1 - p0).norm(),
                                 tol);
    }
    return cr;
}

BoundaryWalk boundary_walk(const CartesianMesh& mesh, const MeshCrossings& cr, int t) {
    BoundaryWalk w;
    const auto& tv = mesh.triangle(t);
    for (int k = 0; k < 3; ++k) {
        int a = tv[k];
        const Edge& ed = mesh.edge(mesh.triangle_edges(t)[k]);
        const EdgeCrossing& ec = cr.edges[mesh.triangle_edges(t)[k]];
        bool forward = ed.v[0] == a;
        const Point &q0 = mesh.vertex(ed.v[0]), &q1 = mesh.vertex(ed.v[1]);

        w.pts.push_back(mesh.vertex(a));
        w.on_gamma.push_back(cr.vertex_sign[a] == 0);

        std::vector<double> local; // parameters along a -> next vertex
        std::vector<double> canon;
        if (ec.crossing)
            for (double r : {ec.r0, ec.r1})
                if (r > 0.0 && r < 1.0)
                    canon.push_back(r);
        std::vector<std::pair<double, double>> roots;
        for (double r : canon)
            roots.emplace_back(forward ? r : 1.0 - r, r);
        std::sort(roots.begin(), roots.end());

        double prev = 0.0;
        for (auto [s, r] : roots) {
            double mid = 0.5 * (prev + s);
            w.seg_sign.push_back(ec.sign_at(forward ? mid : 1.0 - mid));
            w.pts.push_back(q0 + r * (q1 - q0));
            w.on_gamma.push_back(1);
            prev = s;
        }
        double mid = 0.5 * (prev + 1.0);
        w.seg_sign.push_back(ec.sign_at(forward ? mid : 1.0 - mid));
    }
    return w;
}

std::vector<CellClass> classify(const CartesianMesh& mesh, const LevelSet& ls) {
    return classify(mesh, ls, compute_crossings(mesh, ls, default_tol_gamma(mesh)));
}

std::vector<CellClass> classify(const CartesianMesh& mesh,
                                const LevelSet& ls,
                                const MeshCrossings& cr) {
    std::vector<CellClass> out(mesh.num_triangles());
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        BoundaryWalk w = boundary_walk(mesh, cr, t);
        bool any_minus = std::count(w.seg_sign.begin(), w.seg_sign.end(), -1) > 0;
        bool any_plus = std::count(w.seg_sign.begin(), w.seg_sign.end(), 1) > 0;
        if (any_minus && any_plus) {
            out[t] = CellClass::Cut;
        } else if (any_minus) {
            out[t] = CellClass::Minus;
        } else {
            auto b = barycentric(mesh.triangle_points(t), ls.center());
            if (b[0] > 0.0 && b[1] > 0.0 && b[2] > 0.0)
                throw TopologyError("interface enclosed inside triangle " + std::to_string(t));
            out[t] = CellClass::Plus;
        }
    }
    return out;
}

} // namespace cutflow
