#include "cutflow/mesh.hpp"

#include <cmath>
#include <map>
#include <ostream>

#include "cutflow/errors.hpp"

namespace cutflow {

double Rectangle::diameter() const { return std::hypot(width(), height()); }

bool Rectangle::contains(const Point& p, double tol) const {
    return p.x() >= x0 - tol && p.x() <= x1 + tol && p.y() >= y0 - tol && p.y() <= y1 + tol;
}

CartesianMesh::CartesianMesh(int n, const Rectangle& domain) : n_(n), domain_(domain) {
    if (n < 1)
        throw InvalidArgument("mesh subdivision count must be >= 1, got " + std::to_string(n));
    if (!(domain.width() > 0.0) || !(domain.height() > 0.0))
        throw InvalidArgument("mesh domain has zero or negative extent");

    dx_ = domain.width() / n;
    dy_ = domain.height() / n;

    vertices_.reserve((n + 1) * (n + 1));
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) {
            double x = (i == n) ? domain.x1 : domain.x0 + i * dx_;
            double y = (j == n) ? domain.y1 : domain.y0 + j * dy_;
            vertices_.emplace_back(x, y);
        }

    triangles_.reserve(2 * n * n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            int v00 = vertex_index(i, j), v10 = vertex_index(i + 1, j);
            int v01 = vertex_index(i, j + 1), v11 = vertex_index(i + 1, j + 1);
            triangles_.push_back({v00, v10, v11});
            triangles_.push_back({v00, v11, v01});
        }

    std::map<std::pair<int, int>, int> lookup;
    tri_edges_.resize(triangles_.size());
    for (int t = 0; t < num_triangles(); ++t) {
        for (int k = 0; k < 3; ++k) {
            int a = triangles_[t][k], b = triangles_[t][(k + 1) % 3];
            auto key = std::minmax(a, b);
            auto [it, fresh] = lookup.try_emplace(key, static_cast<int>(edges_.size()));
            if (fresh)
                edges_.push_back({{key.first, key.second}, {t, -1}});
            else
                edges_[it->second].tri[1] = t;
            tri_edges_[t][k] = it->second;
        }
    }
}

std::array<Point, 3> CartesianMesh::triangle_points(int t) const {
    const auto& tv = triangles_[t];
    return {vertices_[tv[0]], vertices_[tv[1]], vertices_[tv[2]]};
}

bool CartesianMesh::on_boundary(int v) const {
    auto [i, j] = vertex_grid(v);
    return i == 0 || j == 0 || i == n_ || j == n_;
}

double CartesianMesh::area(int t) const {
    auto p = triangle_points(t);
    Point a = p[1] - p[0], b = p[2] - p[0];
    return 0.5 * std::abs(a.x() * b.y() - a.y() * b.x());
}

std::array<double, 3> barycentric(const std::array<Point, 3>& tri, const Point& p) {
    Point a = tri[1] - tri[0], b = tri[2] - tri[0], r = p - tri[0];
    double det = a.x() * b.y() - a.y() * b.x();
    double l1 = (r.x() * b.y() - r.y() * b.x()) / det;
    double l2 = (a.x() * r.y() - a.y() * r.x()) / det;
    return {1.0 - l1 - l2, l1, l2};
}

Location CartesianMesh::locate(const Point& p) const {
    double tol = 1e-12 * domain_.diameter();
    if (!domain_.contains(p, tol))
        throw InvalidArgument("point outside the mesh domain");
    double sx = (p.x() - domain_.x0) / dx_, sy = (p.y() - domain_.y0) / dy_;
    int i = std::clamp(static_cast<int>(std::floor(sx)), 0, n_ - 1);
    int j = std::clamp(static_cast<int>(std::floor(sy)), 0, n_ - 1);
    double xi = sx - i, eta = sy - j;
    int t = 2 * (j * n_ + i) + (xi >= eta ? 0 : 1);
    return {t, barycentric(triangle_points(t), p)};
}

CartesianMesh build_mesh(int n, const Rectangle& domain) { return CartesianMesh(n, domain); }

void write_mesh_csv(const CartesianMesh& mesh, std::ostream& vertices, std::ostream& triangles) {
    vertices.precision(17);
    vertices << "id,x,y\n";
    for (int v = 0; v < mesh.num_vertices(); ++v)
        vertices << v << ',' << mesh.vertex(v).x() << ',' << mesh.vertex(v).y() << '\n';
    triangles << "id,v0,v1,v2\n";
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tv = mesh.triangle(t);
        triangles << t << ',' << tv[0] << ',' << tv[1] << ',' << tv[2] << '\n';
    }
}

} // namespace cutflow
