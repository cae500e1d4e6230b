#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "cutflow/assembly.hpp"
#include "cutflow/errors.hpp"

using namespace cutflow;

namespace {

double max_abs(const SparseMatrix& a) {
    double m = 0.0;
    for (int k = 0; k < a.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(a, k); it; ++it)
            m = std::max(m, std::abs(it.value()));
    return m;
}

double max_abs_block(const SparseMatrix& a, const BlockLayout& l, Block r, Block c) {
    return max_abs(SparseMatrix(a.block(l.begin(r), l.begin(c), l.length(r), l.length(c))));
}

BlockSaddleSystem build(int n, const LevelSet& ls, StabilizationParams stab, FemTriplet tr = {}) {
    auto sp = make_spaces(n, tr);
    return assemble_system(discretize(sp, ls), PhysicalParams{}, stab, assemble_global_stiffness(*sp));
}

} // namespace

TEST(FemTriplet, ParseAndName) {
    FemTriplet t = FemTriplet::parse("P3/P2/P1");
    EXPECT_EQ(t.k_u, 3);
    EXPECT_EQ(t.k_p, 2);
    EXPECT_EQ(t.k_lambda, 1);
    EXPECT_EQ(t.name(), "P3/P2/P1");
    EXPECT_THROW(FemTriplet::parse("Q2/Q1"), InvalidArgument);
    EXPECT_THROW(FemTriplet::parse("P1/P1/P0"), InvalidArgument);
}

TEST(GlobalStiffness, RigidMotionsAreInStrainKernel) {
    auto sp = make_spaces(6, FemTriplet{});
    auto cache = assemble_global_stiffness(*sp);
    const ScalarSpace& v = *sp->velocity;
    const int N = v.num_dofs();
    Eigen::VectorXd tx = Eigen::VectorXd::Zero(2 * N), ty = tx, rot = tx;
    for (int g = 0; g < N; ++g) {
        Point x = v.dof_point(g);
        tx[g] = 1.0;
        ty[N + g] = 1.0;
        rot[g] = -(x.y() - 0.5);
        rot[N + g] = x.x() - 0.5;
    }
    EXPECT_LT((cache->strain * tx).lpNorm<Eigen::Infinity>(), 1e-12);
    EXPECT_LT((cache->strain * ty).lpNorm<Eigen::Infinity>(), 1e-12);
    EXPECT_LT((cache->strain * rot).lpNorm<Eigen::Infinity>(), 1e-12);
    // a pure stretch is not rigid
    Eigen::VectorXd st = Eigen::VectorXd::Zero(2 * N);
    for (int g = 0; g < N; ++g)
        st[g] = v.dof_point(g).x();
    EXPECT_GT(st.dot(cache->strain * st), 0.5);
}

TEST(GlobalStiffness, PressureMeanSumsToArea) {
    auto sp = make_spaces(5, FemTriplet::parse("P3/P2/P1"));
    auto cache = assemble_global_stiffness(*sp, true);
    EXPECT_NEAR(cache->pmean.sum(), 1.0, 1e-13);
    // constant velocity: mass quadratic form equals |u|^2 |Omega|
    const int N = sp->velocity->num_dofs();
    Eigen::VectorXd one = Eigen::VectorXd::Zero(2 * N);
    one.head(N).setOnes();
    EXPECT_NEAR(one.dot(cache->mass * one), 1.0, 1e-12);
}

TEST(Assembly, MatrixIsSymmetric) {
    for (auto tr : {FemTriplet{}, FemTriplet::parse("P3/P2/P1")}) {
        auto sys = build(10, LevelSet::circle(Point(0.513, 0.487), 0.23), {0.01, 0.02}, tr);
        SparseMatrix at = sys.matrix.transpose();
        EXPECT_LE(max_abs(SparseMatrix(sys.matrix - at)), 1e-12 * max_abs(sys.matrix)) << tr.name();
    }
}

TEST(Assembly, ZeroStabilizationLeavesDiagonalBlocksEmpty) {
    auto sys = build(10, LevelSet::circle(Point(0.5, 0.5), 0.23), {0.0, 0.0});
    const BlockLayout& l = sys.disc->layout;
    for (Block b : {Block::PPlus, Block::PMinus, Block::LPlus, Block::LMinus, Block::Phi})
        EXPECT_EQ(max_abs_block(sys.matrix, l, b, b), 0.0) << block_name(b);
    EXPECT_EQ(max_abs_block(sys.matrix, l, Block::LPlus, Block::PPlus), 0.0);
    EXPECT_EQ(max_abs_block(sys.matrix, l, Block::LPlus, Block::LMinus), 0.0);
}

TEST(Assembly, StabilizedMatrixIsAffineInParameters) {
    auto ls = LevelSet::circle(Point(0.47, 0.52), 0.23);
    SparseMatrix a00 = build(8, ls, {0.0, 0.0}).matrix;
    SparseMatrix a10 = build(8, ls, {1.0, 0.0}).matrix;
    SparseMatrix a01 = build(8, ls, {0.0, 1.0}).matrix;
    SparseMatrix mix = build(8, ls, {0.3, 0.7}).matrix;
    SparseMatrix pred = a00 + 0.3 * (a10 - a00) + 0.7 * (a01 - a00);
    EXPECT_LE(max_abs(SparseMatrix(mix - pred)), 1e-12 * max_abs(mix));
    EXPECT_GT(max_abs(SparseMatrix(a10 - a00)), 0.0);
    EXPECT_GT(max_abs(SparseMatrix(a01 - a00)), 0.0);
}

TEST(Assembly, MultiplierVelocityColumnsIntegrateInterfaceLength) {
    auto sys = build(10, LevelSet::circle(Point(0.5, 0.5), 0.23), {0.0, 0.0});
    const Discretization& d = *sys.disc;
    const ScalarSpace& ms = *d.spaces->multiplier;
    double total = 0.0;
    for (Side s : {Side::Plus, Side::Minus}) {
        const int r0 = d.layout.begin(velocity_block(s)), rl = d.layout.length(velocity_block(s));
        for (int t : d.cut->cut_cells()) {
            int g = ms.element_dofs(t)[0];
            for (int c = 0; c < 2; ++c) {
                int col = d.multiplier_index(s, c, g);
                if (col < 0)
                    continue;
                double sum = 0.0;
                for (SparseMatrix::InnerIterator it(sys.matrix, col); it; ++it)
                    if (it.row() >= r0 && it.row() < r0 + rl)
                        sum += it.value();
                EXPECT_NEAR(sum, -d.cut->interface_length(t), 1e-13) << "cell " << t;
                if (s == Side::Minus && c == 0)
                    total += -sum;
            }
        }
    }
    EXPECT_NEAR(total, 2 * std::numbers::pi * 0.23, 1e-3);
}

TEST(Assembly, UpdateMatchesFreshAssemblyOverRandomShifts) {
    auto sp = make_spaces(12, FemTriplet{});
    auto cache = assemble_global_stiffness(*sp);
    StabilizationParams stab{0.01, 0.01};
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> shift(-0.06, 0.06);
    auto disc = discretize(sp, LevelSet::circle(Point(0.5, 0.5), 0.23));
    BlockSaddleSystem sys = assemble_system(disc, PhysicalParams{}, stab, cache);
    for (int k = 0; k < 20; ++k) {
        Point c(0.5 + shift(rng), 0.5 + shift(rng));
        auto next = discretize(sp, LevelSet::circle(c, 0.23));
        sys = update_system(std::move(sys), next);
        SparseMatrix fresh = assemble_system(next, PhysicalParams{}, stab, cache).matrix;
        ASSERT_EQ(fresh.rows(), sys.matrix.rows());
        EXPECT_LE(max_abs(SparseMatrix(sys.matrix - fresh)), 1e-13 * max_abs(fresh)) << "shift " << k;
    }
}

TEST(Assembly, SmallMotionTouchesFewerEntriesThanFreshAssembly) {
    auto sp = make_spaces(20, FemTriplet{});
    auto cache = assemble_global_stiffness(*sp);
    auto sys = assemble_system(discretize(sp, LevelSet::ellipse(Point(0.5, 0.5), 0.3537, 0.2037)),
                               PhysicalParams{}, {0.01, 0.01}, cache);
    const long fresh = sys.touched_entries;
    sys = update_system(std::move(sys), discretize(sp, LevelSet::ellipse(Point(0.5, 0.5), 0.35, 0.206)));
    EXPECT_GT(sys.touched_entries, 0);
    EXPECT_LT(sys.touched_entries, fresh);
    // element-by-element reassembly of both sides
    const long nu = 2 * sp->velocity->num_local(), np = sp->pressure->num_local();
    const long everything = 2L * sp->mesh->num_triangles() * (nu * nu + np * nu + np);
    EXPECT_LT(sys.touched_entries, everything / 4);
}

TEST(Assembly, UpdateRejectsForeignSpaces) {
    auto sp = make_spaces(6, FemTriplet{});
    auto sys = assemble_system(discretize(sp, LevelSet::circle(Point(0.5, 0.5), 0.2)), PhysicalParams{}, {},
                               assemble_global_stiffness(*sp));
    auto other = discretize(make_spaces(6, FemTriplet{}), LevelSet::circle(Point(0.5, 0.5), 0.2));
    EXPECT_THROW(update_system(std::move(sys), other), InvalidArgument);
}

TEST(Assembly, ConstantForceLoadIntegratesSideAreas) {
    auto disc = discretize(make_spaces(10, FemTriplet{}), LevelSet::circle(Point(0.5, 0.5), 0.23));
    Eigen::VectorXd b = assemble_rhs(
        *disc, [](const Point&) { return Eigen::Vector2d(1.0, 0.0); },
        [](const Point&) { return Eigen::Vector2d(0.0, 2.0); },
        [](const InterfaceQuadPoint&) { return Eigen::Vector2d(3.0, 0.0); });
    // the velocity basis sums to one only where no dof is eliminated, so compare the minus side
    double minus_y = 0.0;
    for (int g : disc->vel(Side::Minus).active())
        minus_y += b[disc->velocity_index(Side::Minus, 1, g)];
    EXPECT_NEAR(minus_y, 2.0 * disc->cut->total_area(Side::Minus), 1e-12);
    double phi_x = 0.0;
    for (int g : disc->trace->survivors())
        phi_x += b[disc->phi_index(0, g)];
    EXPECT_NEAR(phi_x, 3.0 * disc->cut->total_interface_length(), 1e-12);
}

TEST(Assembly, BoundaryInterpolationHitsConstrainedDofsOnly) {
    auto disc = discretize(make_spaces(6, FemTriplet{}), LevelSet::circle(Point(0.5, 0.5), 0.2));
    Eigen::VectorXd g = interpolate_boundary(*disc, [](const Point& x) { return Eigen::Vector2d(x.x(), 1.0); });
    const ScalarSpace& v = *disc->spaces->velocity;
    const int N = v.num_dofs();
    ASSERT_EQ(g.size(), 2 * N);
    for (int d = 0; d < N; ++d) {
        if (disc->vel(Side::Plus).constrained(d)) {
            EXPECT_DOUBLE_EQ(g[d], v.dof_point(d).x());
            EXPECT_DOUBLE_EQ(g[N + d], 1.0);
        } else {
            EXPECT_EQ(g[d], 0.0);
            EXPECT_EQ(g[N + d], 0.0);
        }
    }
}
