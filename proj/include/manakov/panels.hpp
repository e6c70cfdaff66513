#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace manakov {

using cplx = std::complex<double>;

struct GaussRule {
    std::vector<double> nodes, weights;
};
/// Gauss-Legendre rule on [-1,1] (Golub-Welsch).
GaussRule gauss_legendre(std::size_t p);

/// P_0..P_{n-1} at real t.
void legendre_p(double t, std::size_t n, double* out);

/// Legendre functions of the second kind Q_0..Q_{n-1}, analytic off [-1,1].
/// For w strictly inside (-1,1) with side = +1/-1 returns the boundary values from above/below.
void legendre_q(cplx w, std::size_t n, cplx* out, int side = 0);

/// A smooth contour piece mapped from tau in [-1,1]: either the straight segment a -> b or a
/// sub-arc t in [t_lo, t_hi] of the semicircle s = R (t + iq)/(1 + iqt), q = +-1.
struct Panel {
    enum class Kind { segment, arc } kind = Kind::segment;
    cplx a, b;
    double radius = 0.0, q = 1.0, t_lo = -1.0, t_hi = 1.0;

    cplx point(double tau) const;
    cplx derivative(double tau) const;
    /// Parameter of z in the local tau frame.
    cplx local(cplx z) const;
    /// Pole of the map in the tau frame (arcs only).
    cplx pole() const;
};

/// Discretized union of panels with dense boundary-value Cauchy matrix C+.
class PanelContour {
public:
    PanelContour(std::vector<Panel> panels, std::size_t order);

    std::size_t size() const { return nodes_.size(); }
    std::size_t order() const { return p_; }
    const std::vector<Panel>& panels() const { return panels_; }
    const std::vector<cplx>& nodes() const { return nodes_; }
    /// ds quadrature weights.
    const std::vector<cplx>& weights() const { return weights_; }
    std::size_t panel_of(std::size_t node) const { return node / p_; }

    /// Row-major N x N matrix of C+ restricted to the nodes.
    const std::vector<cplx>& cplus() const { return cplus_; }
    /// Cauchy transform (1/2 pi i) int f/(s - z) ds of nodal data at a point off the contour.
    cplx transform(const cplx* f, cplx z) const;

private:
    void row(std::size_t panel, cplx z, int side, std::size_t j, cplx* out) const;

    std::vector<Panel> panels_;
    std::size_t p_;
    GaussRule rule_, fine_;
    std::vector<double> analysis_;  // p x p, coefficients from values
    std::vector<double> fine_p_;    // P_n at the fine nodes, M x p
    std::vector<cplx> nodes_, weights_, cplus_;
};

}  // namespace manakov
