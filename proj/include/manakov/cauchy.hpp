#pragma once

#include <memory>
#include <span>
#include <vector>

#include "manakov/grid.hpp"

namespace manakov {

/// Cauchy projections on a discretized oriented contour. Functions are stored
/// column-major: nfun blocks of size() values each.
class CauchyOperator {
public:
    virtual ~CauchyOperator() = default;
    virtual std::size_t size() const = 0;
    virtual const std::vector<cplx>& nodes() const = 0;
    /// Quadrature weights for the contour integral: integral f ds ~ sum w_j f_j (orientation included).
    virtual const std::vector<cplx>& weights() const = 0;
    /// out = C+ g + C- h for nfun functions.
    virtual void apply(std::span<const cplx> g, std::span<const cplx> h, std::size_t nfun,
                       std::span<cplx> out) const = 0;
};

/// C+ and C- of a single function on the real line sampled on a LambdaGrid.
///
/// A rational tail a/(lambda-i) + b/(lambda+i) matching the endpoint values is
/// projected exactly; the remainder uses the discrete sinc-Hilbert transform
/// (Toeplitz, applied by zero-padded FFT) with a raised-cosine window on the
/// outer fraction of the interval.
class RealLineCauchy {
public:
    explicit RealLineCauchy(const LambdaGrid& grid, double window_fraction = 0.1);
    ~RealLineCauchy();
    RealLineCauchy(const RealLineCauchy&) = delete;
    RealLineCauchy& operator=(const RealLineCauchy&) = delete;

    const LambdaGrid& grid() const { return grid_; }

    /// out = C+ g + C- h (either may be empty to mean zero).
    void apply(std::span<const cplx> g, std::span<const cplx> h, std::span<cplx> out) const;
    /// side = +1 or -1.
    void project(std::span<const cplx> f, int side, std::span<cplx> out) const;
    /// out[t] += (1/2 pi i) integral f(s)/(s - z_t) ds for targets off the real axis.
    void transform(std::span<const cplx> f, std::span<const cplx> targets, std::span<cplx> out) const;

    /// Discrete Hilbert transform (1/pi) PV integral f(s)/(x - s) ds of samples vanishing at the ends.
    void hilbert(std::span<const cplx> f, std::span<cplx> out) const;

    struct Tail {
        cplx a, b;  // f ~ a/(lambda - i) + b/(lambda + i)
    };
    Tail fit_tail(std::span<const cplx> f) const;

private:
    LambdaGrid grid_;
    std::vector<double> window_;
    std::size_t m_;                 // FFT length
    std::vector<cplx> kernel_hat_;  // FFT of the Toeplitz kernel
    void* fwd_ = nullptr;
    void* bwd_ = nullptr;
};

/// Circle |s - center| = radius, sampled at m equispaced nodes, orientation
/// +1 counterclockwise (+ side inside) or -1 clockwise (+ side outside).
struct Circle {
    cplx center;
    double radius = 0.0;
    int orientation = 1;
    std::size_t m = 64;

    std::vector<cplx> nodes() const;
    /// integral f ds ~ sum w_j f_j.
    std::vector<cplx> weights() const;
};

/// Boundary value from the given side of the circle's own Cauchy integral, via the
/// Laurent coefficients of the samples.
void circle_project(const Circle& c, std::span<const cplx> f, int side, std::span<cplx> out);
/// out[t] += (1/2 pi i) contour integral f(s)/(s - z_t) ds for targets off the circle.
void circle_transform(const Circle& c, std::span<const cplx> f, std::span<const cplx> targets,
                      std::span<cplx> out);

/// Real line plus disjoint circles off the axis (Cases I and II).
class LineCirclesCauchy : public CauchyOperator {
public:
    LineCirclesCauchy(const LambdaGrid& grid, std::vector<Circle> circles);

    std::size_t size() const override { return nodes_.size(); }
    const std::vector<cplx>& nodes() const override { return nodes_; }
    const std::vector<cplx>& weights() const override { return weights_; }
    void apply(std::span<const cplx> g, std::span<const cplx> h, std::size_t nfun,
               std::span<cplx> out) const override;

    const RealLineCauchy& line() const { return *line_; }
    const std::vector<Circle>& circles() const { return circles_; }
    std::size_t line_size() const { return line_->grid().size(); }

private:
    std::unique_ptr<RealLineCauchy> line_;
    std::vector<Circle> circles_;
    std::vector<std::size_t> offset_;  // start of each circle's nodes
    std::vector<std::vector<cplx>> proj_plus_, proj_minus_;
    std::vector<cplx> nodes_, weights_;
};

}  // namespace manakov
