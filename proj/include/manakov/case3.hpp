#pragma once

#include <array>
#include <iosfwd>
#include <memory>
#include <optional>

#include "manakov/panels.hpp"
#include "manakov/rhp.hpp"

namespace manakov {

/// Cut points for the right problem (U on (x0, inf)) and for the mirrored potential.
struct CutoffPoints {
    double right = 0.0;
    /// Cut point of -U(-x); the left tail of U beyond -left is below the threshold.
    double left = 0.0;
};
CutoffPoints choose_cutoffs(const GridPotential& pot, double threshold = 0.25);
/// Common |x0| such that both tails (x0, inf) and (-inf, -x0) are below the threshold.
double choose_cutoff(const GridPotential& pot, double threshold = 0.25);

struct CutoffData {
    double x0 = 0.0;
    std::size_t k0 = 0;
    TransitionMatrix bold_S;
    std::vector<cplx> r1, r2;
    double l1_tail = 0.0;
};
/// Scattering matrix of U 1_{(x0,inf)} from m+(x0); x0 is snapped to the nearest node.
CutoffData cutoff_scattering(const GridPotential& pot, double x0, const LambdaGrid& grid,
                             double tol_zero = 1e-6);

/// 1.5 max(|z_i|, |lambda| at real nodes with |s11| < tol_zero, 1).
double choose_radius(const TransitionMatrix& S, const DiscreteSpectrum& ds, double tol_zero = 1e-6);

enum class Piece { outer_left = 0, inner = 1, outer_right = 2, arc_upper = 3, arc_lower = 4 };

struct AugmentedOptions {
    std::size_t order = 16;
    /// Largest |x| and |x - x0| at which the contour will be used (sets panel size).
    double x_extent = 10.0;
    /// Truncation of the outer segments; 0 picks it from the decay of rho.
    double lambda_max = 0.0;
    int grading_levels = 6;
    /// Combine Jost data with the every-other-node grid to cancel the O(h^2) stepping error
    /// (the cut point is moved to an even node).
    bool richardson = true;
};

struct MatchingReport {
    /// |e^{-2i s x0} v_{k1}(s) - (rho_k(s) - r_k(s))| at s = -S, +S.
    std::array<double, 2> v_identity{};
    /// V+ on the boundary of the outer upper/inner lower regions, V- on the outer lower/inner upper ones.
    std::array<double, 4> families{};
    double max() const;
};

/// Real line with the circle |lambda| = S_inf: outer segments left to right, inner segment
/// right to left, upper arc clockwise, lower arc counterclockwise (both from -S_inf to S_inf).
class AugmentedContour : public CauchyOperator {
public:
    AugmentedContour(const GridPotential& pot, double x0, double S_inf, const AugmentedOptions& opt = {});

    std::size_t size() const override { return panels_->size(); }
    const std::vector<cplx>& nodes() const override { return panels_->nodes(); }
    const std::vector<cplx>& weights() const override { return panels_->weights(); }
    void apply(std::span<const cplx> g, std::span<const cplx> h, std::size_t nfun,
               std::span<cplx> out) const override;

    Piece piece(std::size_t node) const { return piece_[node]; }
    double radius() const { return S_; }
    double x0() const { return x0_; }
    double lambda_max() const { return lambda_max_; }
    int epsilon() const { return eps_; }
    const PanelContour& panels() const { return *panels_; }

    /// rho (outer), r (inner), v_{21}, v_{31} (upper arc) or v_{12}, v_{13} (lower arc).
    const std::vector<std::array<cplx, 2>>& entries() const { return entries_; }

    JumpFactors jump(double x) const;
    /// V = V_-^{-1} V_+ at a node.
    Complex3x3 jump_matrix(std::size_t node, double x) const;
    const MatchingReport& matching() const { return matching_; }

    /// One line per node: component_id lambda_re lambda_im V (row-major, re/im pairs).
    void dump(std::ostream& os, double x) const;

private:
    std::array<cplx, 2> interpolant(cplx lambda) const;

    double S_, x0_, lambda_max_;
    int eps_;
    std::shared_ptr<PanelContour> panels_;
    std::vector<Piece> piece_;
    std::vector<std::array<cplx, 2>> entries_;
    std::array<std::array<cplx, 2>, 2> rho_ends_{};  // rho at -S, +S
    MatchingReport matching_;
};

struct Case3Options {
    SolverOptions solver;
    AugmentedOptions contour;
    double threshold = 0.25;
    /// Radius; 0 picks it by choose_radius from a spectrum search.
    double S_inf = 0.0;
    double tol_zero = 1e-6;
};

struct Case3Result {
    ReconstructedPotential profile;
    CutoffPoints cuts;
    double S_inf = 0.0;
    MatchingReport matching_right, matching_left;
};

/// Reconstructs U on the grid from the augmented problems of pot (x at or right of the
/// switch point) and of the mirrored potential (the rest).
Case3Result solve_case3(const GridPotential& pot, const XGrid& grid, const Case3Options& opt = {});

/// The problem at a single x on a prepared contour: returns (u, v) and the GMRES residual.
std::array<cplx, 2> solve_case3_at(std::shared_ptr<const AugmentedContour> contour, double x, const SolverOptions& opt,
                                   double* residual = nullptr, std::vector<cplx>* guess = nullptr);

}  // namespace manakov
