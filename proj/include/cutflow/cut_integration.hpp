#pragma once

#include <iosfwd>
#include <memory>
#include <vector>

#include "cutflow/levelset.hpp"
#include "cutflow/quadrature.hpp"

namespace cutflow {

struct SubTriangle {
    std::array<Point, 3> pts;
    Side side;
};

struct InterfaceSegment {
    Point a, b;
};

struct CellCut {
    std::vector<SubTriangle> subs;
    std::vector<InterfaceSegment> segments;
};

struct InterfaceQuadPoint {
    Point x;
    double w;
    Eigen::Vector2d normal; // unit normal of Omega-, from the analytic level set
    double curvature;
};

using InterfaceRule = std::vector<InterfaceQuadPoint>;

struct CutOptions {
    double tol_gamma = -1.0;        // negative: 1e-10 * domain diameter
    double arc_tol_factor = 1e-3;   // arc sagitta tolerance is arc_tol_factor * h^2
    int max_arc_depth = 12;
};

std::vector<std::array<Point, 3>> triangulate_polygon(std::vector<Point> poly);

class CutDecomposition {
  public:
    CutDecomposition(std::shared_ptr<const CartesianMesh> mesh,
                     const LevelSet& ls,
                     const CutOptions& opts = {});

    const CartesianMesh& mesh() const { return *mesh_; }
    std::shared_ptr<const CartesianMesh> mesh_ptr() const { return mesh_; }
    const LevelSet& levelset() const { return ls_; }
    double tol_gamma() const { return tol_gamma_; }
    double tol_arc() const { return tol_arc_; }

    CellClass cell_class(int t) const { return classes_[t]; }
    const std::vector<CellClass>& classes() const { return classes_; }
    bool is_cut(int t) const { return classes_[t] == CellClass::Cut; }
    const CellCut& cut(int t) const; // only for cut cells
    const std::vector<int>& cut_cells() const { return cut_cells_; }

    // true when T contributes positive area to the side
    bool touches(int t, Side s) const;
    double side_area(int t, Side s) const;
    double interface_length(int t) const;

    QuadratureRule volume_rule(int t, Side s, int order) const;
    // quadrature on the polyline approximation of the interface inside T
    InterfaceRule interface_rule(int t, int order) const;

    double total_area(Side s) const;
    double total_interface_length() const;

  private:
    std::shared_ptr<const CartesianMesh> mesh_;
    LevelSet ls_;
    double tol_gamma_, tol_arc_;
    int max_depth_;
    std::vector<CellClass> classes_;
    std::vector<int> cut_slot_;
    std::vector<int> cut_cells_;
    std::vector<CellCut> cuts_;
    std::vector<std::array<double, 2>> cut_area_;

    CellCut build_cut(int t, const BoundaryWalk& w) const;
    void refine_arc(const Point& a,
                    const Point& b,
                    double side_sign,
                    const std::array<Point, 3>& tri,
                    int depth,
                    std::vector<Point>& out) const;
};

std::shared_ptr<const CutDecomposition> decompose(std::shared_ptr<const CartesianMesh> mesh,
                                                  const LevelSet& ls,
                                                  const CutOptions& opts = {});

void write_cut_csv(const CutDecomposition& cut, std::ostream& subcells, std::ostream& segments);

} // namespace cutflow
