#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "manakov/cauchy.hpp"
#include "manakov/direct.hpp"

namespace manakov {

enum class CaseTag { I, II, III };

struct JumpFactors {
    std::vector<Complex3x3> w_plus, w_minus;
};

/// Discretized Riemann-Hilbert problem at one evaluation point x.
struct ContourRHP {
    CaseTag case_tag = CaseTag::I;
    double x = 0.0;
    std::shared_ptr<const CauchyOperator> op;
    JumpFactors jump;
};

struct SolverOptions {
    double tol = 1e-10;
    int max_iter = 500;
    int restart = 80;
};

/// One row of mu = M_+ (I + W_+)^{-1}; stored as 3 blocks of op->size() values.
struct BealsCoifmanSolution {
    int row = 0;
    std::vector<cplx> mu;
    double residual_norm = 0.0;
    int iterations = 0;
};

/// Circles around the eigenvalues (clockwise) and their conjugates (counterclockwise).
/// Radius min(Im z, half the distance to the nearest other eigenvalue)/2, capped at 0.5.
std::vector<Circle> soliton_circles(const DiscreteSpectrum& ds, std::size_t nodes = 64);

/// Contour for Cases I/II: the real lambda-grid plus the soliton circles.
std::shared_ptr<LineCirclesCauchy> make_contour(const ScatteringData& data, std::size_t circle_nodes = 64);

/// Real-axis factors W+ (column 1 below the diagonal) and W- (row 1 right of the
/// diagonal) with phases e^{i lambda x ad sigma}; residue jumps on the circles.
/// With allow_flip, residue conditions with |C| e^{-2 Im(z) x} > 2 Im z are traded for the
/// equivalent conditions on columns 2, 3 (small exponentials), and the rest of the data is
/// conjugated by the corresponding Blaschke factors; the potential is unchanged.
JumpFactors build_jump_factors(const ScatteringData& data, const LineCirclesCauchy& contour, double x,
                               bool allow_flip = true);
ContourRHP build_jump(const ScatteringData& data, double x);
ContourRHP build_jump(const ScatteringData& data, std::shared_ptr<const LineCirclesCauchy> contour, double x);

/// (I - W-)^{-1} (I + W+).
Complex3x3 reassemble_jump(const Complex3x3& w_plus, const Complex3x3& w_minus);
/// The jump V(lambda) of the real-axis problem at x = 0 from the reflection coefficients.
Complex3x3 real_jump(cplx rho1, cplx rho2, int epsilon);

/// Solves (I - C_W) mu = I for one row of mu by restarted GMRES.
BealsCoifmanSolution solve_beals_coifman(const ContourRHP& rhp, int row = 0, const SolverOptions& opt = {},
                                         const std::vector<cplx>* guess = nullptr);
/// Dense LU solve of the same system (small problems, used as an oracle).
BealsCoifmanSolution solve_beals_coifman_dense(const ContourRHP& rhp, int row = 0);
/// Applies (I - C_W) to a row of mu.
std::vector<cplx> apply_sie(const ContourRHP& rhp, std::span<const cplx> mu);

/// (1/pi) integral over the contour of row `row` of mu (W+ + W-).
std::array<cplx, 3> contour_moment(const BealsCoifmanSolution& sol, const ContourRHP& rhp);
/// (u, v) at rhp.x; from row 1 as u = -(1/pi) (mu W)_{12}, rows 2/3 via -eps conj((1/pi)(mu W)_{k1}).
std::array<cplx, 2> reconstruct_potential(const BealsCoifmanSolution& sol, const ContourRHP& rhp);

struct ReconstructedPotential {
    GridPotential potential;
    double residual_max = 0.0;
    std::vector<double> failed_x;
    std::vector<std::string> failures;
    SobolevReport h11, h21;
};

struct ProfileOptions {
    SolverOptions solver;
    std::size_t circle_nodes = 64;
    /// Scattering data of the mirrored potential -U(-x); when present, x < 0 is
    /// reconstructed from it (left normalization), otherwise the right-normalized
    /// problem is used everywhere.
    std::optional<ScatteringData> left;
};

/// Fills h11/h21 of a reconstructed profile (u and v combined).
void attach_sobolev_reports(ReconstructedPotential& out);

ReconstructedPotential reconstruct_profile(const ScatteringData& data, const XGrid& grid,
                                           const ProfileOptions& opt = {});

/// Left-normalized continuous data: rho~_k = -t_{k+1,1}/t11, reported as the reflection
/// coefficients of the mirrored potential, rho'_k(lambda) = -rho~_k(-lambda).
ScatteringData left_normalized_data(const TransitionMatrix& tm, int epsilon, double tol_zero = 1e-6);

/// Jump factors of the left-normalized problem on the real axis at x:
/// W~- lower with rho~ e^{2 i lambda x}, W~+ upper with eps rho~^dagger e^{-2 i lambda x}.
JumpFactors left_normalized_jump(const TransitionMatrix& tm, int epsilon, double x);

}  // namespace manakov
