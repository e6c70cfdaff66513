#include "manakov/cauchy.hpp"

#include <fftw3.h>

#include <numbers>

#include "manakov/errors.hpp"
#include "manakov/kernels.hpp"

namespace manakov {

namespace {

constexpr double kPi = std::numbers::pi;

fftw_complex* fc(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

RealLineCauchy::RealLineCauchy(const LambdaGrid& grid, double window_fraction) : grid_(grid) {
    const std::size_t n = grid.size();
    const double lmax = grid.lambda_max(), inner = (1.0 - window_fraction) * lmax;
    window_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double a = std::abs(grid[k]);
        window_[k] = a <= inner ? 1.0 : 0.5 * (1.0 + std::cos(kPi * (a - inner) / (lmax - inner)));
    }
    m_ = 1;
    while (m_ < 2 * n) m_ *= 2;
    std::vector<cplx> buf(m_);
    fwd_ = fftw_plan_dft_1d(int(m_), fc(buf.data()), fc(buf.data()), FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    bwd_ = fftw_plan_dft_1d(int(m_), fc(buf.data()), fc(buf.data()), FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    kernel_hat_.assign(m_, 0.0);
    for (std::size_t j = 1; j < n; j += 2) {
        const double k = 2.0 / (kPi * double(j));
        kernel_hat_[j] = k;
        kernel_hat_[m_ - j] = -k;
    }
    fftw_execute_dft(static_cast<fftw_plan>(fwd_), fc(kernel_hat_.data()), fc(kernel_hat_.data()));
}

RealLineCauchy::~RealLineCauchy() {
    fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
}

void RealLineCauchy::hilbert(std::span<const cplx> f, std::span<cplx> out) const {
    const std::size_t n = grid_.size();
    std::vector<cplx> buf(m_, 0.0);
    std::copy(f.begin(), f.end(), buf.begin());
    fftw_execute_dft(static_cast<fftw_plan>(fwd_), fc(buf.data()), fc(buf.data()));
    kernels::cmul(buf, kernel_hat_, buf);
    fftw_execute_dft(static_cast<fftw_plan>(bwd_), fc(buf.data()), fc(buf.data()));
    const double s = 1.0 / double(m_);
    for (std::size_t k = 0; k < n; ++k) out[k] = buf[k] * s;
}

RealLineCauchy::Tail RealLineCauchy::fit_tail(std::span<const cplx> f) const {
    const double l = grid_.lambda_max();
    // rows: lambda = -l, +l; columns: 1/(lambda - i), 1/(lambda + i)
    const cplx a00 = 1.0 / (-l - kI), a01 = 1.0 / (-l + kI), a10 = 1.0 / (l - kI), a11 = 1.0 / (l + kI);
    const cplx d = a00 * a11 - a01 * a10;
    const cplx f0 = f.front(), f1 = f.back();
    return {(a11 * f0 - a01 * f1) / d, (a00 * f1 - a10 * f0) / d};
}

void RealLineCauchy::apply(std::span<const cplx> g, std::span<const cplx> h, std::span<cplx> out) const {
    const std::size_t n = grid_.size();
    const Tail tg = g.empty() ? Tail{} : fit_tail(g);
    const Tail th = h.empty() ? Tail{} : fit_tail(h);
    std::vector<cplx> gr(n), hr(n), s(n), hs(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double l = grid_[k];
        const cplx pm = 1.0 / (l - kI), pp = 1.0 / (l + kI);
        gr[k] = g.empty() ? 0.0 : g[k] - tg.a * pm - tg.b * pp;
        hr[k] = h.empty() ? 0.0 : h[k] - th.a * pm - th.b * pp;
        s[k] = window_[k] * (gr[k] + hr[k]);
    }
    hilbert(s, hs);
    for (std::size_t k = 0; k < n; ++k) {
        const double l = grid_[k];
        out[k] = 0.5 * (gr[k] - hr[k]) + 0.5 * kI * hs[k] + tg.b / (l + kI) - th.a / (l - kI);
    }
}

void RealLineCauchy::project(std::span<const cplx> f, int side, std::span<cplx> out) const {
    if (side > 0) apply(f, {}, out);
    else apply({}, f, out);
}

void RealLineCauchy::transform(std::span<const cplx> f, std::span<const cplx> targets, std::span<cplx> out) const {
    const std::size_t n = grid_.size();
    const Tail t = fit_tail(f);
    std::vector<cplx> src(n), q(n);
    const cplx c = grid_.spacing() / (2.0 * kPi * kI);
    for (std::size_t k = 0; k < n; ++k) {
        const double l = grid_[k];
        src[k] = l;
        const double w = (k == 0 || k + 1 == n) ? 0.5 : 1.0;
        q[k] = (f[k] - t.a / (l - kI) - t.b / (l + kI)) * (w * c);
    }
    kernels::cauchy_sum(targets, src, q, 1, out);
    for (std::size_t j = 0; j < targets.size(); ++j) {
        const cplx z = targets[j];
        if (z.imag() > 0.0) out[j] += t.b / (z + kI);
        else if (z.imag() < 0.0) out[j] -= t.a / (z - kI);
        else throw InputError("real-line Cauchy transform requested on the real axis");
    }
}

std::vector<cplx> Circle::nodes() const {
    std::vector<cplx> s(m);
    for (std::size_t j = 0; j < m; ++j) s[j] = center + std::polar(radius, 2.0 * kPi * double(j) / double(m));
    return s;
}

std::vector<cplx> Circle::weights() const {
    std::vector<cplx> w(m);
    for (std::size_t j = 0; j < m; ++j)
        w[j] = double(orientation) * kI * std::polar(radius, 2.0 * kPi * double(j) / double(m)) *
               (2.0 * kPi / double(m));
    return w;
}

namespace {

/// Row-major m x m matrix mapping samples to the given boundary value.
std::vector<cplx> circle_projector(std::size_t m, int orientation, int side) {
    // ccw: C+ = nonnegative Laurent part, C- = -negative part; cw swaps the roles
    const bool nonneg = (orientation > 0) == (side > 0);
    const double sign = side > 0 ? 1.0 : -1.0;
    std::vector<cplx> p(m * m, 0.0);
    const long half = long(m) / 2;
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t k = 0; k < m; ++k) {
            cplx s = 0.0;
            for (long n = -half; n < long(m) - half; ++n) {
                if ((n >= 0) != nonneg) continue;
                s += std::polar(1.0, 2.0 * kPi * double(n) * (double(j) - double(k)) / double(m));
            }
            p[j * m + k] = sign * s / double(m);
        }
    return p;
}

}  // namespace

void circle_project(const Circle& c, std::span<const cplx> f, int side, std::span<cplx> out) {
    const auto p = circle_projector(c.m, c.orientation, side);
    kernels::active().matvec(p.data(), c.m, c.m, f.data(), out.data());
}

void circle_transform(const Circle& c, std::span<const cplx> f, std::span<const cplx> targets, std::span<cplx> out) {
    const auto s = c.nodes();
    const auto w = c.weights();
    std::vector<cplx> q(c.m);
    for (std::size_t j = 0; j < c.m; ++j) q[j] = f[j] * w[j] / (2.0 * kPi * kI);
    kernels::cauchy_sum(targets, s, q, 1, out);
}

LineCirclesCauchy::LineCirclesCauchy(const LambdaGrid& grid, std::vector<Circle> circles)
    : line_(std::make_unique<RealLineCauchy>(grid)), circles_(std::move(circles)) {
    const std::size_t n = grid.size();
    for (std::size_t k = 0; k < n; ++k) {
        nodes_.push_back(grid[k]);
        weights_.push_back(((k == 0 || k + 1 == n) ? 0.5 : 1.0) * grid.spacing());
    }
    for (const auto& c : circles_) {
        if (std::abs(c.center.imag()) <= c.radius) throw InputError("circle intersects the real axis");
        offset_.push_back(nodes_.size());
        const auto s = c.nodes();
        const auto w = c.weights();
        nodes_.insert(nodes_.end(), s.begin(), s.end());
        weights_.insert(weights_.end(), w.begin(), w.end());
    }
    for (std::size_t a = 0; a < circles_.size(); ++a)
        for (std::size_t b = a + 1; b < circles_.size(); ++b)
            if (std::abs(circles_[a].center - circles_[b].center) <= circles_[a].radius + circles_[b].radius)
                throw InputError("circles overlap");
    proj_plus_.resize(circles_.size());
    proj_minus_.resize(circles_.size());
    for (std::size_t c = 0; c < circles_.size(); ++c) {
        proj_plus_[c] = circle_projector(circles_[c].m, circles_[c].orientation, +1);
        proj_minus_[c] = circle_projector(circles_[c].m, circles_[c].orientation, -1);
    }
}

void LineCirclesCauchy::apply(std::span<const cplx> g, std::span<const cplx> h, std::size_t nfun,
                              std::span<cplx> out) const {
    const std::size_t n = size(), nl = line_size();
    const auto& kt = kernels::active();
    std::vector<cplx> s(n), tmp;
    for (std::size_t f = 0; f < nfun; ++f) {
        const auto gf = g.subspan(f * n, n), hf = h.subspan(f * n, n);
        auto of = out.subspan(f * n, n);
        for (std::size_t k = 0; k < n; ++k) s[k] = gf[k] + hf[k];
        line_->apply(gf.first(nl), hf.first(nl), of.first(nl));
        for (std::size_t c = 0; c < circles_.size(); ++c) {
            const std::size_t m = circles_[c].m, o = offset_[c];
            tmp.assign(m, 0.0);
            kt.matvec(proj_plus_[c].data(), m, m, gf.data() + o, of.data() + o);
            kt.matvec(proj_minus_[c].data(), m, m, hf.data() + o, tmp.data());
            for (std::size_t j = 0; j < m; ++j) of[o + j] += tmp[j];
        }
        if (circles_.empty()) continue;
        // cross terms: each component's Cauchy integral evaluated on the others
        const std::span<const cplx> all(nodes_);
        line_->transform(std::span<const cplx>(s).first(nl), all.subspan(nl), of.subspan(nl));
        for (std::size_t c = 0; c < circles_.size(); ++c) {
            const std::size_t m = circles_[c].m, o = offset_[c];
            const auto src = std::span<const cplx>(s).subspan(o, m);
            circle_transform(circles_[c], src, all.first(o), of.first(o));
            circle_transform(circles_[c], src, all.subspan(o + m), of.subspan(o + m));
        }
    }
}

}  // namespace manakov
