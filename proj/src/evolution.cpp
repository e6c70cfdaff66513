#include "manakov/evolution.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>

#include "manakov/errors.hpp"

namespace manakov {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

// Zero-padded periodic box around the potential; the spectral multiplier is applied per step.
class PaddedBox {
public:
    PaddedBox(const GridPotential& pot, double padding) : n_(pot.size()) {
        const double h = pot.grid.spacing();
        pad_ = std::size_t(std::ceil(padding * (pot.grid.x_max() - pot.grid.x_min()) / h));
        m_ = n_ + 2 * pad_;
        u_.assign(m_, 0.0);
        v_.assign(m_, 0.0);
        std::copy(pot.u.begin(), pot.u.end(), u_.begin() + pad_);
        std::copy(pot.v.begin(), pot.v.end(), v_.begin() + pad_);
        xi_.resize(m_);
        for (std::size_t k = 0; k < m_; ++k) {
            const double kk = k <= m_ / 2 ? double(k) : double(k) - double(m_);
            xi_[k] = 2.0 * kPi * kk / (double(m_) * h);
        }
        std::lock_guard<std::mutex> lock(planner_mutex());
        auto* p = reinterpret_cast<fftw_complex*>(u_.data());
        fwd_ = fftw_plan_dft_1d(int(m_), p, p, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
        bwd_ = fftw_plan_dft_1d(int(m_), p, p, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    ~PaddedBox() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
    }
    PaddedBox(const PaddedBox&) = delete;
    PaddedBox& operator=(const PaddedBox&) = delete;

    std::vector<cplx>& u() { return u_; }
    std::vector<cplx>& v() { return v_; }
    const std::vector<double>& xi() const { return xi_; }

    // Multiplies both components by mult[k] in Fourier space.
    void multiply(const std::vector<cplx>& mult) {
        for (auto* f : {&u_, &v_}) {
            auto* p = reinterpret_cast<fftw_complex*>(f->data());
            fftw_execute_dft(fwd_, p, p);
            for (std::size_t k = 0; k < m_; ++k) (*f)[k] *= mult[k] / double(m_);
            fftw_execute_dft(bwd_, p, p);
        }
    }

    GridPotential crop(const GridPotential& like) const {
        std::vector<cplx> u(u_.begin() + pad_, u_.begin() + pad_ + n_), v(v_.begin() + pad_, v_.begin() + pad_ + n_);
        return GridPotential(like.grid, std::move(u), std::move(v), like.epsilon);
    }

private:
    std::size_t n_, pad_ = 0, m_ = 0;
    std::vector<cplx> u_, v_;
    std::vector<double> xi_;
    fftw_plan fwd_ = nullptr, bwd_ = nullptr;
};

double max_amp2(const GridPotential& pot) {
    double m = 0.0;
    for (std::size_t k = 0; k < pot.size(); ++k) m = std::max(m, std::norm(pot.u[k]) + std::norm(pot.v[k]));
    return m;
}

}  // namespace

int flow_exponent(Flow f) { return f == Flow::manakov_lambda2 ? 2 : 3; }

std::string flow_name(Flow f) { return f == Flow::manakov_lambda2 ? "manakov" : "sasa-satsuma"; }

Flow parse_flow(const std::string& s) {
    if (s == "manakov" || s == "lambda2" || s == "2") return Flow::manakov_lambda2;
    if (s == "sasa-satsuma" || s == "sasa_satsuma" || s == "lambda3" || s == "3") return Flow::sasa_satsuma_lambda3;
    throw InputError("unknown flow '" + s + "'");
}

EvolvedScatteringData evolve_scattering(const ScatteringData& data, double t, Flow flow, double kappa) {
    if (!std::isfinite(t) || !std::isfinite(kappa)) throw InputError("evolution time and kappa must be finite");
    const int p = flow_exponent(flow);
    EvolvedScatteringData out{data, t, flow, kappa};
    auto& d = out.data;
    const cplx I{0.0, 1.0};
    for (std::size_t k = 0; k < d.grid.size(); ++k) {
        const double l = d.grid[k];
        const cplx ph = std::exp(I * (kappa * std::pow(l, p) * t));
        d.rho1[k] *= ph;
        d.rho2[k] *= ph;
    }
    for (std::size_t i = 0; i < d.discrete.size(); ++i) {
        const cplx z = d.discrete.eigenvalues[i];
        const cplx ph = std::exp(I * kappa * std::pow(z, p) * t);
        d.discrete.norming[i][0] *= ph;
        d.discrete.norming[i][1] *= ph;
    }
    return out;
}

GridPotential split_step_manakov(const GridPotential& pot, double t, double dt, bool* warn, double padding) {
    if (!(dt > 0.0) || !(t >= 0.0)) throw InputError("split-step needs t >= 0 and dt > 0");
    if (warn) *warn = dt * max_amp2(pot) > 0.1;
    if (t == 0.0) return pot;
    const std::size_t steps = std::size_t(std::ceil(t / dt - 1e-12));
    const double tau = t / double(steps);
    PaddedBox box(pot, padding);
    std::vector<cplx> lin(box.xi().size());
    for (std::size_t k = 0; k < lin.size(); ++k) lin[k] = std::exp(cplx(0.0, -0.5 * box.xi()[k] * box.xi()[k] * tau));
    const double e = double(pot.epsilon);
    auto nonlinear = [&](double s) {
        auto& u = box.u();
        auto& v = box.v();
        for (std::size_t k = 0; k < u.size(); ++k) {
            const cplx r = std::exp(cplx(0.0, e * (std::norm(u[k]) + std::norm(v[k])) * s));
            u[k] *= r;
            v[k] *= r;
        }
    };
    nonlinear(0.5 * tau);
    for (std::size_t s = 0; s < steps; ++s) {
        box.multiply(lin);
        nonlinear(s + 1 < steps ? tau : 0.5 * tau);
    }
    return box.crop(pot);
}

GridPotential free_airy(const GridPotential& pot, double t, double padding) {
    PaddedBox box(pot, padding);
    std::vector<cplx> m(box.xi().size());
    for (std::size_t k = 0; k < m.size(); ++k) {
        const double x = box.xi()[k];
        m[k] = std::exp(cplx(0.0, -x * x * x * t));
    }
    box.multiply(m);
    return box.crop(pot);
}

Calibration calibrate_phase_convention(const GridPotential& sample, Flow flow) {
    const double amp = std::sqrt(max_amp2(sample));
    if (amp == 0.0) throw InputError("calibration needs a nonzero sample potential");
    const int p = flow_exponent(flow);
    if (p == 3 && amp > 1e-2) throw InputError("the lambda^3 calibration runs in the linear regime (amplitude <= 1e-2)");

    const double t = p == 2 ? 0.05 : 0.02;
    const double band = 2.5;  // |kappa| <= 10 keeps the phase inside (-pi, pi]
    const auto evolved = p == 2 ? split_step_manakov(sample, t) : free_airy(sample, t);
    const LambdaGrid lg(band, 129);
    const auto d0 = reflection_coefficients(compute_transition_matrix(sample, lg), sample.epsilon, 0.0);
    const auto d1 = reflection_coefficients(compute_transition_matrix(evolved, lg), sample.epsilon, 0.0);

    double peak = 0.0;
    for (std::size_t k = 0; k < lg.size(); ++k) peak = std::max({peak, std::abs(d0.rho1[k]), std::abs(d0.rho2[k])});
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < lg.size(); ++k) {
        const double a = std::pow(lg[k], p) * t;
        for (int c = 0; c < 2; ++c) {
            const cplx r0 = c == 0 ? d0.rho1[k] : d0.rho2[k];
            const cplx r1 = c == 0 ? d1.rho1[k] : d1.rho2[k];
            if (std::abs(r0) < 1e-3 * peak) continue;
            const double w = std::norm(r0);
            num += w * a * std::arg(r1 * std::conj(r0));
            den += w * a * a;
        }
    }
    if (den == 0.0) throw InputError("calibration degenerate: no usable reflection data");
    Calibration cal;
    cal.raw = cal.kappa = num / den;
    const double cands2[] = {2.0, -2.0, 4.0, -4.0}, cands3[] = {4.0, -4.0, 8.0, -8.0};
    for (double c : p == 2 ? cands2 : cands3)
        if (std::abs(cal.raw - c) <= 0.05 * std::abs(c)) {
            cal.kappa = c;
            cal.snapped = true;
        }
    return cal;
}

}  // namespace manakov
