#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "manakov/matrix3.hpp"

namespace manakov {

/// Uniform grid x_k = x_min + k h, k = 0..n-1.
class XGrid {
public:
    XGrid(double x_min, double x_max, std::size_t n);

    double x_min() const { return x_min_; }
    double x_max() const { return x_max_; }
    std::size_t size() const { return n_; }
    double spacing() const { return h_; }
    double operator[](std::size_t k) const { return x_min_ + double(k) * h_; }
    std::vector<double> nodes() const;

    /// Same interval, node count n' = 2(n-1)+1 (every old node is kept).
    XGrid refined() const { return XGrid(x_min_, x_max_, 2 * (n_ - 1) + 1); }

private:
    double x_min_, x_max_, h_;
    std::size_t n_;
};

/// Uniform grid on [-Lambda, Lambda] with n nodes, endpoints included.
class LambdaGrid {
public:
    LambdaGrid(double lambda_max, std::size_t n);

    double lambda_max() const { return lambda_max_; }
    std::size_t size() const { return n_; }
    double spacing() const { return d_; }
    double operator[](std::size_t k) const { return -lambda_max_ + double(k) * d_; }
    std::vector<double> nodes() const;

private:
    double lambda_max_, d_;
    std::size_t n_;
};

/// Sampled potential (u, v) with sign epsilon (+1 focusing, -1 defocusing).
struct GridPotential {
    XGrid grid;
    std::vector<cplx> u, v;
    int epsilon = 1;

    GridPotential(XGrid g, std::vector<cplx> u_, std::vector<cplx> v_, int eps);

    std::size_t size() const { return grid.size(); }
    /// Potential matrix at node k.
    Complex3x3 matrix(std::size_t k) const { return potential_matrix(u[k], v[k], epsilon); }
    /// Trapezoid L1 norm of (|u|^2 + |v|^2)^{1/2} over nodes [k0, end).
    double l1_norm_from(std::size_t k0) const;
    double l1_norm_until(std::size_t k1) const;

    /// U(-x) sampled on the reflected grid, with sign flip: the potential whose
    /// right-normalized scattering problem is the left-normalized problem of this one.
    GridPotential mirrored() const;
    /// Zero the potential outside [x_lo, x_hi] (nodes strictly outside are cleared).
    GridPotential cut(double x_lo, double x_hi) const;
    /// Every other node (n odd).
    GridPotential decimated() const;
};

/// Build a potential by sampling functions on a grid.
template <class FU, class FV>
GridPotential sample_potential(const XGrid& g, int eps, FU fu, FV fv) {
    std::vector<cplx> u(g.size()), v(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
        u[k] = fu(g[k]);
        v[k] = fv(g[k]);
    }
    return GridPotential(g, std::move(u), std::move(v), eps);
}

struct SobolevReport {
    int i = 0, j = 0;
    double norm_value = 0.0;
    double refinement_ratio = 1.0;  // norm at n nodes / norm at ~n/2 nodes
};

/// Weighted Sobolev norm on a uniform grid: sqrt of the sum of the distinct terms
/// ||f^{(i)}||^2 and ||x^j f||^2 (the two coincide for i = j = 0 and are counted once).
/// Derivatives by fourth-order centered differences (second order next to and at the ends);
/// integrals by the trapezoid rule. Supports i <= 2, j <= 2.
double h_ij_norm(std::span<const cplx> f, std::span<const double> x, int i, int j);
double h_ij_norm(std::span<const cplx> f, const XGrid& grid, int i, int j);

/// Norm at full resolution and at every other node; ratio full/half.
SobolevReport sobolev_report(std::span<const cplx> f, std::span<const double> x, int i, int j);

// Potential file: "# manakov-potential epsilon=<+1|-1> n=<int> xmin=<float> xmax=<float>"
// followed by rows "x re_u im_u re_v im_v". Extra trailing "# key=value ..." comments are allowed.
void write_potential(std::ostream& os, const GridPotential& p);
GridPotential read_potential(std::istream& is);
void write_potential_file(const std::string& path, const GridPotential& p,
                          const std::string& trailer = {});
GridPotential read_potential_file(const std::string& path);

/// Write through a temporary file and rename into place.
void write_file_atomically(const std::string& path, const std::string& contents);

}  // namespace manakov
