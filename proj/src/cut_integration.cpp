#include "cutflow/cut_integration.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "cutflow/errors.hpp"

namespace cutflow {

namespace {

double cross(const Point& o, const Point& a, const Point& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

double polygon_area(const std::vector<Point>& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const Point &a = p[i], &b = p[(i + 1) % p.size()];
        s += a.x() * b.y() - a.y() * b.x();
    }
    return 0.5 * s;
}

bool strictly_inside(const Point& p, const Point& a, const Point& b, const Point& c, double eps) {
    return cross(a, b, p) > eps && cross(b, c, p) > eps && cross(c, a, p) > eps;
}

} // namespace

std::vector<std::array<Point, 3>> triangulate_polygon(std::vector<Point> poly) {
    std::vector<std::array<Point, 3>> out;
    if (poly.size() < 3)
        return out;
    double scale = 0.0;
    for (const auto& p : poly)
        scale = std::max(scale, (p - poly[0]).squaredNorm());
    double eps = 1e-14 * scale;

    if (polygon_area(poly) < 0.0)
        std::reverse(poly.begin(), poly.end());

    // drop duplicates and collinear vertices
    bool changed = true;
    while (changed && poly.size() >= 3) {
        changed = false;
        for (std::size_t i = 0; i < poly.size() && poly.size() >= 3; ++i) {
            std::size_t n = poly.size();
            const Point &a = poly[(i + n - 1) % n], &b = poly[i], &c = poly[(i + 1) % n];
            if (std::abs(cross(a, b, c)) <= eps) {
                poly.erase(poly.begin() + i);
                changed = true;
                break;
            }
        }
    }
    if (poly.size() < 3)
        return out;
    if (poly.size() == 3) {
        out.push_back({poly[0], poly[1], poly[2]});
        return out;
    }
    if (poly.size() == 4) {
        bool d02 = cross(poly[0], poly[1], poly[2]) > eps && cross(poly[0], poly[2], poly[3]) > eps;
        bool d13 = cross(poly[1], poly[2], poly[3]) > eps && cross(poly[1], poly[3], poly[0]) > eps;
        double l02 = (poly[2] - poly[0]).squaredNorm(), l13 = (poly[3] - poly[1]).squaredNorm();
        if (d02 && (!d13 || l02 <= l13)) {
            out.push_back({poly[0], poly[1], poly[2]});
            out.push_back({poly[0], poly[2], poly[3]});
            return out;
        }
        if (d13) {
            out.push_back({poly[1], poly[2], poly[3]});
            out.push_back({poly[1], poly[3], poly[0]});
            return out;
        }
    }
    // ear clipping
    while (poly.size() > 3) {
        std::size_t n = poly.size();
        bool clipped = false;
        for (std::size_t i = 0; i < n; ++i) {
            const Point &a = poly[(i + n - 1) % n], &b = poly[i], &c = poly[(i + 1) % n];
            if (cross(a, b, c) <= eps)
                continue;
            bool blocked = false;
            for (std::size_t j = 0; j < n && !blocked; ++j) {
                if (j == i || j == (i + 1) % n || j == (i + n - 1) % n)
                    continue;
                blocked = strictly_inside(poly[j], a, b, c, -eps);
            }
            if (blocked)
                continue;
            out.push_back({a, b, c});
            poly.erase(poly.begin() + i);
            clipped = true;
            break;
        }
        if (!clipped) { // numerically stuck, fall back to a fan
            for (std::size_t i = 1; i + 1 < poly.size(); ++i)
                out.push_back({poly[0], poly[i], poly[i + 1]});
            return out;
        }
    }
    out.push_back({poly[0], poly[1], poly[2]});
    return out;
}

CutDecomposition::CutDecomposition(std::shared_ptr<const CartesianMesh> mesh,
                                   const LevelSet& ls,
                                   const CutOptions& opts)
    : mesh_(std::move(mesh)), ls_(ls) {
    const CartesianMesh& m = *mesh_;
    tol_gamma_ = opts.tol_gamma >= 0.0 ? opts.tol_gamma : default_tol_gamma(m);
    tol_arc_ = opts.arc_tol_factor * m.h() * m.h();
    max_depth_ = opts.max_arc_depth;

    MeshCrossings cr = compute_crossings(m, ls_, tol_gamma_);
    classes_ = classify(m, ls_, cr);
    cut_slot_.assign(m.num_triangles(), -1);
    for (int t = 0; t < m.num_triangles(); ++t) {
        if (classes_[t] != CellClass::Cut)
            continue;
        CellCut c = build_cut(t, boundary_walk(m, cr, t));
        std::array<double, 2> area{0.0, 0.0};
        for (const auto& s : c.subs)
            area[side_index(s.side)] += std::abs(signed_area(s.pts));
        cut_slot_[t] = static_cast<int>(cuts_.size());
        cut_cells_.push_back(t);
        cuts_.push_back(std::move(c));
        cut_area_.push_back(area);
    }
}

void CutDecomposition::refine_arc(const Point& a,
                                  const Point& b,
                                  double side_sign,
                                  const std::array<Point, 3>& tri,
                                  int depth,
                                  std::vector<Point>& out) const {
    if (depth >= max_depth_)
        return;
    Point d = b - a;
    double len = d.norm();
    if (len == 0.0)
        return;
    Point dir = side_sign * Point(-d.y(), d.x()) / len;
    Point mid = 0.5 * (a + b);
    auto q = ls_.along(mid, mid + dir);
    double disc = std::max(q[1] * q[1] - 4.0 * q[0] * q[2], 0.0);
    double sq = std::sqrt(disc);
    double s = q[1] > 0.0 ? -2.0 * q[2] / (q[1] + sq) : (-q[1] + sq) / (2.0 * q[0]);
    if (!(s > tol_arc_))
        return;
    Point p = mid + s * dir;
    auto bc = barycentric(tri, p);
    if (bc[0] < -1e-12 || bc[1] < -1e-12 || bc[2] < -1e-12)
        return;
    refine_arc(a, p, side_sign, tri, depth + 1, out);
    out.push_back(p);
    refine_arc(p, b, side_sign, tri, depth + 1, out);
}

CellCut CutDecomposition::build_cut(int t, const BoundaryWalk& w) const {
    const int m = static_cast<int>(w.pts.size());
    auto tri = mesh_->triangle_points(t);
    auto prev = [m](int i) { return (i + m - 1) % m; };

    std::vector<int> starts; // first point of each minus chain
    for (int i = 0; i < m; ++i)
        if (w.seg_sign[prev(i)] != w.seg_sign[i] && w.seg_sign[i] < 0)
            starts.push_back(i);
    if (starts.empty())
        throw TopologyError("cut triangle without a negative boundary piece");

    CellCut cut;
    std::vector<Point> minus_poly;
    for (std::size_t c = 0; c < starts.size(); ++c) {
        int i = starts[c];
        // minus chain
        while (true) {
            minus_poly.push_back(w.pts[i]);
            if (w.seg_sign[i] > 0)
                break;
            i = (i + 1) % m;
        }
        int j = i; // end of minus chain, start of plus chain
        std::vector<Point> plus_chain;
        int k = j;
        while (true) {
            plus_chain.push_back(w.pts[k]);
            if (k != j && w.seg_sign[k] < 0)
                break;
            k = (k + 1) % m;
        }
        const Point &a = w.pts[j], &b = w.pts[k];
        // the arc bulges towards the plus chain
        Point d = b - a;
        Point nl(-d.y(), d.x());
        double best = 0.0;
        for (std::size_t q = 0; q < plus_chain.size(); ++q) {
            Point x = plus_chain[q];
            if (q + 1 < plus_chain.size())
                x = 0.5 * (plus_chain[q] + plus_chain[q + 1]);
            double dist = (x - a).dot(nl);
            if (std::abs(dist) > std::abs(best))
                best = dist;
            dist = (plus_chain[q] - a).dot(nl);
            if (std::abs(dist) > std::abs(best))
                best = dist;
        }
        std::vector<Point> arc;
        if (best != 0.0)
            refine_arc(a, b, best > 0.0 ? 1.0 : -1.0, tri, 0, arc);

        Point last = a;
        for (const auto& p : arc) {
            cut.segments.push_back({last, p});
            last = p;
            minus_poly.push_back(p);
        }
        cut.segments.push_back({last, b});

        std::vector<Point> plus_poly = plus_chain;
        for (auto it = arc.rbegin(); it != arc.rend(); ++it)
            plus_poly.push_back(*it);
        for (const auto& tr : triangulate_polygon(plus_poly))
            cut.subs.push_back({tr, Side::Plus});
    }
    for (const auto& tr : triangulate_polygon(minus_poly))
        cut.subs.push_back({tr, Side::Minus});
    return cut;
}

const CellCut& CutDecomposition::cut(int t) const {
    if (cut_slot_[t] < 0)
        throw InvalidArgument("triangle " + std::to_string(t) + " is not cut");
    return cuts_[cut_slot_[t]];
}

double CutDecomposition::side_area(int t, Side s) const {
    switch (classes_[t]) {
    case CellClass::Plus:
        return s == Side::Plus ? mesh_->area(t) : 0.0;
    case CellClass::Minus:
        return s == Side::Minus ? mesh_->area(t) : 0.0;
    default:
        return cut_area_[cut_slot_[t]][side_index(s)];
    }
}

bool CutDecomposition::touches(int t, Side s) const {
    return side_area(t, s) > 1e-14 * mesh_->area(t);
}

double CutDecomposition::interface_length(int t) const {
    if (cut_slot_[t] < 0)
        return 0.0;
    double l = 0.0;
    for (const auto& sg : cuts_[cut_slot_[t]].segments)
        l += (sg.b - sg.a).norm();
    return l;
}

QuadratureRule CutDecomposition::volume_rule(int t, Side s, int order) const {
    QuadratureRule r;
    CellClass c = classes_[t];
    if (c == CellClass::Cut) {
        for (const auto& sub : cuts_[cut_slot_[t]].subs)
            if (sub.side == s)
                append_triangle_rule(r, sub.pts, order);
    } else if ((c == CellClass::Plus) == (s == Side::Plus)) {
        append_triangle_rule(r, mesh_->triangle_points(t), order);
    }
    return r;
}

InterfaceRule CutDecomposition::interface_rule(int t, int order) const {
    InterfaceRule r;
    if (cut_slot_[t] < 0)
        return r;
    for (const auto& sg : cuts_[cut_slot_[t]].segments)
        for (const auto& qp : segment_rule(sg.a, sg.b, order)) {
            auto nc = ls_.normal_curvature(qp.x);
            r.push_back({qp.x, qp.w, nc.normal, nc.curvature});
        }
    return r;
}

double CutDecomposition::total_area(Side s) const {
    double a = 0.0;
    for (int t = 0; t < mesh_->num_triangles(); ++t)
        a += side_area(t, s);
    return a;
}

double CutDecomposition::total_interface_length() const {
    double l = 0.0;
    for (int t : cut_cells_)
        l += interface_length(t);
    return l;
}

std::shared_ptr<const CutDecomposition> decompose(std::shared_ptr<const CartesianMesh> mesh,
                                                  const LevelSet& ls,
                                                  const CutOptions& opts) {
    return std::make_shared<const CutDecomposition>(std::move(mesh), ls, opts);
}

void write_cut_csv(const CutDecomposition& cut, std::ostream& subcells, std::ostream& segments) {
    subcells.precision(17);
    segments.precision(17);
    subcells << "triangle,side,x0,y0,x1,y1,x2,y2\n";
    segments << "triangle,xa,ya,xb,yb\n";
    for (int t : cut.cut_cells()) {
        for (const auto& s : cut.cut(t).subs) {
            subcells << t << ',' << side_name(s.side);
            for (const auto& p : s.pts)
                subcells << ',' << p.x() << ',' << p.y();
            subcells << '\n';
        }
        for (const auto& sg : cut.cut(t).segments)
            segments << t << ',' << sg.a.x() << ',' << sg.a.y() << ',' << sg.b.x() << ','
                     << sg.b.y() << '\n';
    }
}

} // namespace cutflow
