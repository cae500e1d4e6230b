#pragma once

#include <array>
#include <vector>

#include "cutflow/mesh.hpp"

namespace cutflow {

enum class Side { Plus = 0, Minus = 1 };

inline Side other(Side s) { return s == Side::Plus ? Side::Minus : Side::Plus; }
inline int side_index(Side s) { return static_cast<int>(s); }
inline const char* side_name(Side s) { return s == Side::Plus ? "plus" : "minus"; }

struct NormalCurvature {
    Eigen::Vector2d normal; // unit, pointing out of the negative region
    double curvature;       // minus the divergence of the normal field
};

// Quadratic level set A(x-xc)^2 + B(y-yc)^2 - C; negative inside.
class LevelSet {
  public:
    enum class Kind { Circle, Ellipse };

    // both throw InvalidArgument on non-positive sizes or a zero set leaving `domain`
    static LevelSet circle(const Point& center, double radius, const Rectangle& domain = {});
    static LevelSet ellipse(const Point& center,
                            double a1,
                            double a2,
                            const Rectangle& domain = {});

    Kind kind() const { return kind_; }
    const Point& center() const { return center_; }
    std::array<double, 2> semi_axes() const { return {a1_, a2_}; }
    // Circle: radius; Ellipse: first semi-axis
    double radius() const { return a1_; }

    double operator()(const Point& x) const;
    Eigen::Vector2d gradient(const Point& x) const;
    // valid at any point with non-zero gradient; on the zero set this is the curve's normal and curvature
    NormalCurvature normal_curvature(const Point& x) const;
    // |ls| / |grad ls|, a first-order distance to the zero set
    double distance_estimate(const Point& x) const;

    // coefficients of t -> ls(p0 + t (p1 - p0)) as {quadratic, linear, constant}
    std::array<double, 3> along(const Point& p0, const Point& p1) const;

    // roots in [0,1] of ls along the segment; endpoints within `tol` (distance) of the zero set
    // are snapped to exactly 0 or 1, tangent double roots are reported once
    std::vector<double> edge_roots(const Point& p0, const Point& p1, double tol) const;

    double area() const;
    double perimeter() const;

  private:
    LevelSet(Kind kind, const Point& center, double a1, double a2, const Rectangle& domain);

    Kind kind_;
    Point center_;
    double a1_, a2_;
    double qa_, qb_, qc_;
};

enum class CellClass { Plus, Minus, Cut };

// Real roots r0 <= r1 of the (snapped) quadratic on a mesh edge, parametrized from edge.v[0].
// The level set is negative exactly on (r0, r1) when `crossing` is set.
struct EdgeCrossing {
    bool crossing = false;
    double r0 = 0.0, r1 = 0.0;
    int sign_at(double t) const { return (crossing && t > r0 && t < r1) ? -1 : 1; }
};

struct MeshCrossings {
    double tol;                      // distance used for snapping
    std::vector<int> vertex_sign;    // -1, 0 (snapped onto the zero set), +1
    std::vector<EdgeCrossing> edges;
};

MeshCrossings compute_crossings(const CartesianMesh& mesh, const LevelSet& ls, double tol);

// Closed walk around a triangle: vertices and interior edge roots, counter-clockwise.
// seg_sign[i] is the sign of the level set on the boundary piece from pts[i] to pts[i+1].
struct BoundaryWalk {
    std::vector<Point> pts;
    std::vector<char> on_gamma;
    std::vector<int> seg_sign;
};

BoundaryWalk boundary_walk(const CartesianMesh& mesh, const MeshCrossings& cr, int t);

double default_tol_gamma(const CartesianMesh& mesh);

std::vector<CellClass> classify(const CartesianMesh& mesh, const LevelSet& ls);
std::vector<CellClass> classify(const CartesianMesh& mesh,
                                const LevelSet& ls,
                                const MeshCrossings& cr);

} // namespace cutflow
