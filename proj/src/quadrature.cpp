#include "cutflow/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include <boost/math/quadrature/gauss.hpp>

#include "cutflow/errors.hpp"

namespace cutflow {

namespace {

template <int N>
std::vector<std::pair<double, double>> expand_gauss() {
    using G = boost::math::quadrature::gauss<double, N>;
    const auto& x = G::abscissa();
    const auto& w = G::weights();
    std::vector<std::pair<double, double>> nodes;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] == 0.0) {
            nodes.emplace_back(0.0, w[i]);
        } else {
            nodes.emplace_back(x[i], w[i]);
            nodes.emplace_back(-x[i], w[i]);
        }
    }
    std::sort(nodes.begin(), nodes.end());
    for (auto& [t, wt] : nodes) {
        t = 0.5 * (t + 1.0);
        wt *= 0.5;
    }
    return nodes;
}

template <std::size_t... I>
auto build_table(std::index_sequence<I...>) {
    return std::vector<std::vector<std::pair<double, double>>>{expand_gauss<I + 1>()...};
}

constexpr int max_gauss_points = 24;

} // namespace

const std::vector<std::pair<double, double>>& gauss_legendre_unit(int npoints) {
    static const auto table = build_table(std::make_index_sequence<max_gauss_points>{});
    if (npoints < 1 || npoints > max_gauss_points)
        throw InvalidArgument("unsupported Gauss-Legendre size " + std::to_string(npoints));
    return table[npoints - 1];
}

double signed_area(const std::array<Point, 3>& tri) {
    Point a = tri[1] - tri[0], b = tri[2] - tri[0];
    return 0.5 * (a.x() * b.y() - a.y() * b.x());
}

// collapsed (Duffy) tensor rule: x = u, y = v (1 - u) on the unit right triangle
void append_triangle_rule(QuadratureRule& rule, const std::array<Point, 3>& tri, int order) {
    order = std::max(order, 0);
    int mu = (order + 3) / 2;
    int mv = (order + 2) / 2;
    const auto& gu = gauss_legendre_unit(mu);
    const auto& gv = gauss_legendre_unit(mv);
    double jac = 2.0 * std::abs(signed_area(tri));
    Point e1 = tri[1] - tri[0], e2 = tri[2] - tri[0];
    for (auto [u, wu] : gu)
        for (auto [v, wv] : gv) {
            double xi = u, eta = v * (1.0 - u);
            rule.push_back({tri[0] + xi * e1 + eta * e2, wu * wv * (1.0 - u) * jac});
        }
}

QuadratureRule triangle_rule(const std::array<Point, 3>& tri, int order) {
    QuadratureRule r;
    append_triangle_rule(r, tri, order);
    return r;
}

QuadratureRule segment_rule(const Point& a, const Point& b, int order) {
    int m = std::max(order, 0) / 2 + 1;
    const auto& g = gauss_legendre_unit(m);
    double len = (b - a).norm();
    QuadratureRule r;
    r.reserve(g.size());
    for (auto [t, w] : g)
        r.push_back({a + t * (b - a), w * len});
    return r;
}

} // namespace cutflow
