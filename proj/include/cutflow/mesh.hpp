#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

namespace cutflow {

using Point = Eigen::Vector2d;

struct Rectangle {
    double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    double diameter() const;
    bool contains(const Point& p, double tol = 0.0) const;
};

struct Edge {
    std::array<int, 2> v;   // v[0] < v[1]
    std::array<int, 2> tri; // -1 on the boundary
};

struct Location {
    int triangle;
    std::array<double, 3> bary;
};

// Uniform n x n grid of a rectangle, every cell split along its "/" diagonal.
// Cell (i,j) owns triangles 2(jn+i) (below the diagonal) and 2(jn+i)+1.
class CartesianMesh {
  public:
    CartesianMesh(int n, const Rectangle& domain);

    int n() const { return n_; }
    const Rectangle& domain() const { return domain_; }
    double dx() const { return dx_; }
    double dy() const { return dy_; }
    // largest triangle diameter
    double h() const { return std::hypot(dx_, dy_); }

    int num_vertices() const { return static_cast<int>(vertices_.size()); }
    int num_triangles() const { return static_cast<int>(triangles_.size()); }
    int num_edges() const { return static_cast<int>(edges_.size()); }

    const Point& vertex(int v) const { return vertices_[v]; }
    const std::array<int, 3>& triangle(int t) const { return triangles_[t]; }
    const Edge& edge(int e) const { return edges_[e]; }
    // local edge k joins local vertices k and k+1
    const std::array<int, 3>& triangle_edges(int t) const { return tri_edges_[t]; }
    std::array<Point, 3> triangle_points(int t) const;

    std::array<int, 2> vertex_grid(int v) const { return {v % (n_ + 1), v / (n_ + 1)}; }
    int vertex_index(int i, int j) const { return j * (n_ + 1) + i; }
    bool on_boundary(int v) const;

    double area(int t) const;

    // throws InvalidArgument for points outside the closed domain
    Location locate(const Point& p) const;

  private:
    int n_;
    Rectangle domain_;
    double dx_, dy_;
    std::vector<Point> vertices_;
    std::vector<std::array<int, 3>> triangles_;
    std::vector<std::array<int, 3>> tri_edges_;
    std::vector<Edge> edges_;
};

CartesianMesh build_mesh(int n, const Rectangle& domain = {});

std::array<double, 3> barycentric(const std::array<Point, 3>& tri, const Point& p);

void write_mesh_csv(const CartesianMesh& mesh, std::ostream& vertices, std::ostream& triangles);

} // namespace cutflow
