#include "manakov/panels.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <thread>

#include "manakov/direct.hpp"
#include "manakov/errors.hpp"

namespace manakov {

namespace {

constexpr double kPi = 3.14159265358979323846;

double bernstein(cplx w) {
    return std::abs(w + std::sqrt(w - 1.0) * std::sqrt(w + 1.0));
}

}  // namespace

GaussRule gauss_legendre(std::size_t p) {
    if (p == 0) throw InputError("empty Gauss rule");
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(p, p);
    for (std::size_t k = 1; k < p; ++k) {
        const double b = k / std::sqrt(4.0 * k * k - 1.0);
        J(k, k - 1) = J(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    GaussRule g;
    for (std::size_t k = 0; k < p; ++k) {
        g.nodes.push_back(es.eigenvalues()(k));
        const double v = es.eigenvectors()(0, k);
        g.weights.push_back(2.0 * v * v);
    }
    return g;
}

void legendre_p(double t, std::size_t n, double* out) {
    if (n == 0) return;
    out[0] = 1.0;
    if (n > 1) out[1] = t;
    for (std::size_t k = 1; k + 1 < n; ++k)
        out[k + 1] = ((2.0 * k + 1.0) * t * out[k] - k * out[k - 1]) / (k + 1.0);
}

void legendre_q(cplx w, std::size_t n, cplx* out, int side) {
    if (n == 0) return;
    if (side != 0) {
        const double x = w.real();
        out[0] = 0.5 * std::log((1.0 + x) / (1.0 - x)) - double(side) * kI * (kPi / 2.0);
    } else {
        out[0] = 0.5 * (std::log(w + 1.0) - std::log(w - 1.0));
    }
    if (n > 1) out[1] = w * out[0] - 1.0;
    for (std::size_t k = 1; k + 1 < n; ++k)
        out[k + 1] = ((2.0 * k + 1.0) * w * out[k] - double(k) * out[k - 1]) / (k + 1.0);
}

cplx Panel::point(double tau) const {
    if (kind == Kind::segment) return a + (b - a) * (tau + 1.0) / 2.0;
    const double t = 0.5 * (t_lo + t_hi) + 0.5 * (t_hi - t_lo) * tau;
    return radius * (t + kI * q) / (1.0 + kI * q * t);
}

cplx Panel::derivative(double tau) const {
    if (kind == Kind::segment) return (b - a) / 2.0;
    const double t = 0.5 * (t_lo + t_hi) + 0.5 * (t_hi - t_lo) * tau;
    const cplx d = 1.0 + kI * q * t;
    return 2.0 * radius / (d * d) * (0.5 * (t_hi - t_lo));
}

cplx Panel::local(cplx z) const {
    if (kind == Kind::segment) return 2.0 * (z - a) / (b - a) - 1.0;
    const cplx t = (kI * q * radius - z) / (kI * q * z - radius);
    return (t - 0.5 * (t_lo + t_hi)) / (0.5 * (t_hi - t_lo));
}

cplx Panel::pole() const {
    return (kI * q - 0.5 * (t_lo + t_hi)) / (0.5 * (t_hi - t_lo));
}

PanelContour::PanelContour(std::vector<Panel> panels, std::size_t order)
    : panels_(std::move(panels)), p_(order), rule_(gauss_legendre(order)),
      fine_(gauss_legendre(4 * order)) {
    const std::size_t p = p_, M = fine_.nodes.size();
    analysis_.assign(p * p, 0.0);
    std::vector<double> pn(p);
    for (std::size_t k = 0; k < p; ++k) {
        legendre_p(rule_.nodes[k], p, pn.data());
        for (std::size_t n = 0; n < p; ++n)
            analysis_[n * p + k] = (2.0 * n + 1.0) / 2.0 * rule_.weights[k] * pn[n];
    }
    // fine_p_ holds the interpolation matrix from the p nodes to the fine nodes
    fine_p_.assign(M * p, 0.0);
    for (std::size_t m = 0; m < M; ++m) {
        legendre_p(fine_.nodes[m], p, pn.data());
        for (std::size_t k = 0; k < p; ++k) {
            double s = 0.0;
            for (std::size_t n = 0; n < p; ++n) s += pn[n] * analysis_[n * p + k];
            fine_p_[m * p + k] = s;
        }
    }
    for (const auto& pan : panels_)
        for (std::size_t k = 0; k < p; ++k) {
            nodes_.push_back(pan.point(rule_.nodes[k]));
            weights_.push_back(pan.derivative(rule_.nodes[k]) * rule_.weights[k]);
        }

    const std::size_t N = nodes_.size();
    cplus_.assign(N * N, 0.0);
    const unsigned nt = std::max(1u, std::min<unsigned>(worker_count(), unsigned(N / 64 + 1)));
    auto work = [&](std::size_t i0, std::size_t i1) {
        for (std::size_t i = i0; i < i1; ++i) {
            const std::size_t own = i / p, j = i % p;
            for (std::size_t pk = 0; pk < panels_.size(); ++pk)
                row(pk, nodes_[i], pk == own ? 1 : 0, j, &cplus_[i * N + pk * p]);
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < nt; ++t) pool.emplace_back(work, N * t / nt, N * (t + 1) / nt);
    for (auto& th : pool) th.join();
}

// Adds the contribution of panel `pk` to the Cauchy transform at z, as weights on its nodes.
void PanelContour::row(std::size_t pk, cplx z, int side, std::size_t j, cplx* out) const {
    const Panel& pan = panels_[pk];
    const std::size_t p = p_;
    const cplx scale = 1.0 / (2.0 * kPi * kI);
    std::vector<cplx> q(p);
    auto add = [&](cplx w, double sign, int sd) {
        // sign * (1/2 pi i) int f(tau)/(tau - w) dtau
        const double rho = sd != 0 ? 1.0 : bernstein(w);
        const double growth = std::pow(rho, 2.0 * p);
        if (sd != 0 || growth < 1e4) {
            legendre_q(sd != 0 ? cplx(rule_.nodes[j], 0.0) : w, p, q.data(), sd);
            for (std::size_t k = 0; k < p; ++k) {
                cplx s = 0.0;
                for (std::size_t n = 0; n < p; ++n) s += q[n] * analysis_[n * p + k];
                out[k] += sign * scale * (-2.0) * s;
            }
        } else if (growth < 1e17) {
            const std::size_t M = fine_.nodes.size();
            for (std::size_t m = 0; m < M; ++m) {
                const cplx g = sign * scale * fine_.weights[m] / (fine_.nodes[m] - w);
                const double* f = &fine_p_[m * p];
                for (std::size_t k = 0; k < p; ++k) out[k] += g * f[k];
            }
        } else {
            for (std::size_t k = 0; k < p; ++k)
                out[k] += sign * scale * rule_.weights[k] / (rule_.nodes[k] - w);
        }
    };
    add(side != 0 ? cplx(rule_.nodes[j], 0.0) : pan.local(z), 1.0, side);
    if (pan.kind == Panel::Kind::arc) add(pan.pole(), -1.0, 0);
}

cplx PanelContour::transform(const cplx* f, cplx z) const {
    std::vector<cplx> r(p_);
    cplx acc = 0.0;
    for (std::size_t pk = 0; pk < panels_.size(); ++pk) {
        std::fill(r.begin(), r.end(), cplx(0.0));
        row(pk, z, 0, 0, r.data());
        for (std::size_t k = 0; k < p_; ++k) acc += r[k] * f[pk * p_ + k];
    }
    return acc;
}

}  // namespace manakov
