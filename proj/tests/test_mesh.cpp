#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "cutflow/errors.hpp"
#include "cutflow/mesh.hpp"
#include "cutflow/quadrature.hpp"

using namespace cutflow;

TEST(Mesh, CountsAndSizeForTwoByTwo) {
    auto m = build_mesh(2);
    EXPECT_EQ(m.num_vertices(), 9);
    EXPECT_EQ(m.num_triangles(), 8);
    EXPECT_EQ(m.num_edges(), 16);
    EXPECT_NEAR(m.h(), std::sqrt(2.0) / 2.0, 1e-15);
}

TEST(Mesh, RejectsZeroSubdivisions) {
    EXPECT_THROW(build_mesh(0), InvalidArgument);
    EXPECT_THROW(build_mesh(-3), InvalidArgument);
}

TEST(Mesh, TrianglesArePositivelyOrientedAndTileTheDomain) {
    Rectangle dom{-1.0, 0.5, 2.0, 1.5};
    auto m = build_mesh(7, dom);
    double total = 0.0;
    for (int t = 0; t < m.num_triangles(); ++t) {
        double a = signed_area(m.triangle_points(t));
        EXPECT_GT(a, 0.0);
        total += a;
    }
    EXPECT_NEAR(total, dom.width() * dom.height(), 1e-13);
}

TEST(Mesh, DiagonalGoesFromLowerLeftToUpperRight) {
    auto m = build_mesh(3);
    for (int t = 0; t < m.num_triangles(); t += 2) {
        auto p = m.triangle_points(t);
        // lower-right triangle: v0 lower-left, v2 upper-right
        EXPECT_NEAR(p[2].x() - p[0].x(), m.dx(), 1e-15);
        EXPECT_NEAR(p[2].y() - p[0].y(), m.dy(), 1e-15);
        EXPECT_EQ(m.triangle(t)[0], m.triangle(t + 1)[0]);
        EXPECT_EQ(m.triangle(t)[2], m.triangle(t + 1)[1]);
    }
}

TEST(Mesh, EdgeAdjacencyIsConsistent) {
    const int n = 5;
    auto m = build_mesh(n);
    int boundary = 0;
    for (int e = 0; e < m.num_edges(); ++e) {
        const Edge& ed = m.edge(e);
        EXPECT_LT(ed.v[0], ed.v[1]);
        if (ed.tri[1] < 0) {
            ++boundary;
            EXPECT_TRUE(m.on_boundary(ed.v[0]) && m.on_boundary(ed.v[1]));
        }
        for (int t : ed.tri) {
            if (t < 0)
                continue;
            const auto& tv = m.triangle(t);
            int hits = 0;
            for (int v : tv)
                hits += (v == ed.v[0]) + (v == ed.v[1]);
            EXPECT_EQ(hits, 2);
        }
    }
    EXPECT_EQ(boundary, 4 * n);
}

TEST(Mesh, LocateMatchesBruteForceSearch) {
    auto m = build_mesh(9);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 500; ++k) {
        Point p(u(rng), u(rng));
        Location loc = m.locate(p);
        auto tri = m.triangle_points(loc.triangle);
        Point back = loc.bary[0] * tri[0] + loc.bary[1] * tri[1] + loc.bary[2] * tri[2];
        EXPECT_NEAR((back - p).norm(), 0.0, 1e-14);
        for (double b : loc.bary)
            EXPECT_GE(b, -1e-13);
        // oracle: every triangle containing p (strictly) must be the located one
        for (int t = 0; t < m.num_triangles(); ++t) {
            auto b = barycentric(m.triangle_points(t), p);
            if (b[0] > 1e-10 && b[1] > 1e-10 && b[2] > 1e-10)
                EXPECT_EQ(t, loc.triangle);
        }
    }
    EXPECT_THROW(m.locate(Point(1.5, 0.5)), InvalidArgument);
    EXPECT_NO_THROW(m.locate(Point(1.0, 1.0)));
}

TEST(Mesh, CsvDumpHasOneLinePerEntity) {
    auto m = build_mesh(3);
    std::ostringstream v, t;
    write_mesh_csv(m, v, t);
    auto lines = [](const std::string& s) { return std::count(s.begin(), s.end(), '\n'); };
    EXPECT_EQ(lines(v.str()), 1 + m.num_vertices());
    EXPECT_EQ(lines(t.str()), 1 + m.num_triangles());
}

TEST(Quadrature, TriangleRulesIntegrateMonomialsExactly) {
    std::array<Point, 3> tri{Point(0.1, 0.2), Point(0.9, 0.35), Point(0.3, 0.8)};
    // oracle: Green's theorem, int x^a y^b dA = closed integral of x^(a+1) y^b / (a+1) dy,
    // evaluated by a 1D Gauss rule of far higher degree
    auto green = [&](int a, int b) {
        double s = 0.0;
        const auto& g = gauss_legendre_unit(12);
        for (int k = 0; k < 3; ++k) {
            Point p = tri[k], q = tri[(k + 1) % 3];
            for (auto [t, w] : g) {
                Point x = p + t * (q - p);
                s += w * std::pow(x.x(), a + 1) * std::pow(x.y(), b) / (a + 1) * (q.y() - p.y());
            }
        }
        return s;
    };
    for (int order = 0; order <= 10; ++order) {
        auto rule = triangle_rule(tri, order);
        for (const auto& qp : rule)
            EXPECT_GT(qp.w, 0.0);
        for (int a = 0; a <= order; ++a)
            for (int b = 0; a + b <= order; ++b) {
                double s = 0.0;
                for (const auto& qp : rule)
                    s += qp.w * std::pow(qp.x.x(), a) * std::pow(qp.x.y(), b);
                EXPECT_NEAR(s, green(a, b), 1e-14) << "order " << order << " a " << a << " b " << b;
            }
    }
}

TEST(Quadrature, SegmentRuleIsExactToItsOrder) {
    Point a(0.2, 0.1), b(0.7, 0.9);
    double len = (b - a).norm();
    for (int order = 0; order <= 9; ++order) {
        auto rule = segment_rule(a, b, order);
        double s = 0.0;
        for (const auto& qp : rule) {
            double t = (qp.x - a).norm() / len;
            s += qp.w * std::pow(t, order);
        }
        EXPECT_NEAR(s, len / (order + 1), 1e-14);
    }
}
