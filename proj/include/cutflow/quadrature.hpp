#pragma once

#include <array>
#include <vector>

#include "cutflow/mesh.hpp"

namespace cutflow {

struct QuadraturePoint {
    Point x;
    double w;
};

using QuadratureRule = std::vector<QuadraturePoint>;

// Gauss-Legendre nodes and weights on [0,1]
const std::vector<std::pair<double, double>>& gauss_legendre_unit(int npoints);

// exact for polynomials of total degree <= order
QuadratureRule triangle_rule(const std::array<Point, 3>& tri, int order);
QuadratureRule segment_rule(const Point& a, const Point& b, int order);

void append_triangle_rule(QuadratureRule& rule, const std::array<Point, 3>& tri, int order);

double signed_area(const std::array<Point, 3>& tri);

} // namespace cutflow
