#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "manakov/grid.hpp"

namespace manakov {

enum class Side { plus_infinity, minus_infinity };

/// exp((i lambda sigma + U) h) for constant U = U(u, v, eps), in closed form.
Complex3x3 cell_exponential(cplx lambda, cplx u, cplx v, int epsilon, double h);

/// m(x, lambda) = psi(x, lambda) e^{-i lambda x sigma}, normalized to I at the chosen end.
struct JostSolution {
    Side side = Side::minus_infinity;
    cplx lambda;
    std::vector<Complex3x3> values;
};

/// Transfer-matrix stepping with the exact exponential of each cell at the midpoint
/// potential. Off the real axis only the analytic columns are meaningful.
JostSolution integrate_jost(const GridPotential& pot, cplx lambda, Side side);

/// m-(x_k) and m+(x_k). For Im lambda > 0 only the analytic columns m-_1, m+_2, m+_3
/// are filled (the others are zero).
struct JostPair {
    Complex3x3 minus, plus;
};
JostPair jost_at_node(const GridPotential& pot, cplx lambda, std::size_t k);

struct TransitionMatrix {
    LambdaGrid grid;
    std::vector<Complex3x3> S, T;
};

/// S(lambda) for a single real lambda.
Complex3x3 transition_at(const GridPotential& pot, double lambda);
TransitionMatrix compute_transition_matrix(const GridPotential& pot, const LambdaGrid& grid);

/// Max deviation of |s11|^2 + eps(|s21|^2 + |s31|^2) from 1 and of det S from 1.
struct UnitarityReport {
    double unitarity = 0.0;
    double det = 0.0;
};
UnitarityReport check_unitarity(const TransitionMatrix& tm, int epsilon);

/// Max deviations of the nine relations S = J T^dagger J entrywise.
struct SymmetryReport {
    std::array<double, 9> entry{};  // row-major (i, j)
    double max() const;
};
SymmetryReport verify_symmetries(const TransitionMatrix& tm, int epsilon);

/// s11 at complex lambda (Im lambda >= 0) from the analytic columns m-_1, m+_2, m+_3.
cplx s11_analytic(const GridPotential& pot, cplx lambda);

struct DiscreteSpectrum {
    std::vector<cplx> eigenvalues;
    std::vector<std::array<cplx, 2>> norming;  // C_i = c_i / s11'(z_i)
    std::size_t size() const { return eigenvalues.size(); }
};

struct ScatteringData {
    LambdaGrid grid;
    std::vector<cplx> rho1, rho2;
    DiscreteSpectrum discrete;
    int epsilon = 1;
};

struct SpectralRect {
    double re_lo, re_hi, im_lo, im_hi;
};

struct SpectrumOptions {
    double newton_tol = 1e-12;
    int newton_max_iter = 50;
    double min_rect = 1e-3;  // stop subdividing below this size
    /// Combine with the answer on every other node to cancel the O(h^2) stepping error
    /// (needs an odd node count).
    bool richardson = true;
};

/// Zeros of s11 in the rectangle via argument-principle subdivision and Newton;
/// empty for defocusing potentials. Throws CaseViolation on a multiple zero.
DiscreteSpectrum find_discrete_spectrum(const GridPotential& pot, const SpectralRect& region,
                                        const SpectrumOptions& opt = {});
/// Default search region [-L, L] x (1e-3, L].
SpectralRect default_region(double lambda_max);

/// Norming constant C at a simple zero z of s11.
std::array<cplx, 2> norming_constant(const GridPotential& pot, cplx z);

/// rho1 = s21/s11, rho2 = s31/s11. Throws CaseViolation when |s11| < tol_zero on the grid.
ScatteringData reflection_coefficients(const TransitionMatrix& tm, int epsilon,
                                       double tol_zero = 1e-6);
double min_abs_s11(const TransitionMatrix& tm);

/// Tilde coefficients -t21/t11, -t31/t11 for the left normalization.
void left_reflection(const TransitionMatrix& tm, std::vector<cplx>& r1, std::vector<cplx>& r2);

// Scattering file: "# manakov-scattering epsilon=<+-1> n=<int> lambda_max=<float> n_discrete=<int>"
// then rows "lambda re_rho1 im_rho1 re_rho2 im_rho2", then n_discrete rows
// "re_z im_z re_C1 im_C1 re_C2 im_C2".
void write_scattering(std::ostream& os, const ScatteringData& d, const std::string& extra_header = {});
ScatteringData read_scattering(std::istream& is);
void write_scattering_file(const std::string& path, const ScatteringData& d,
                           const std::string& extra_header = {});
ScatteringData read_scattering_file(const std::string& path);

/// Thread count from MANAKOV_THREADS, else hardware concurrency.
unsigned worker_count();

}  // namespace manakov
