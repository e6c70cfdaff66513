#include "manakov/case3.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <thread>

#include "manakov/errors.hpp"
#include "manakov/kernels.hpp"

namespace manakov {

namespace {

constexpr double kPi = 3.14159265358979323846;

template <class F>
void parallel_for(std::size_t n, F f) {
    const unsigned nt = std::max(1u, std::min<unsigned>(worker_count(), unsigned(n)));
    if (nt <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < nt; ++t)
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < n; i += nt) f(i);
        });
    for (auto& th : pool) th.join();
}

std::size_t nearest_node(const XGrid& g, double x) {
    const double k = std::round((x - g.x_min()) / g.spacing());
    return std::size_t(std::clamp(k, 0.0, double(g.size() - 1)));
}

struct RealData {
    std::array<cplx, 2> rho, r, v;
};

// rho, r and the arc entries (v21, v31) continued to a real lambda.
RealData real_data(const GridPotential& pot, std::size_t k0, double lambda) {
    const double x0 = pot.grid[k0];
    const auto jp = jost_at_node(pot, lambda, k0);
    const Complex3x3 pinv = inverse(jp.plus);
    const Complex3x3 S = ad_sigma_exp(-kI * lambda * x0, pinv * jp.minus);
    const Complex3x3 B = ad_sigma_exp(-kI * lambda * x0, pinv);
    RealData d;
    d.rho = {S(1, 0) / S(0, 0), S(2, 0) / S(0, 0)};
    d.r = {B(1, 0) / B(0, 0), B(2, 0) / B(0, 0)};
    const auto& mm = jp.minus;
    const auto& mp = jp.plus;
    const cplx s11 = det_columns({mm(0, 0), mm(1, 0), mm(2, 0)}, {mp(0, 1), mp(1, 1), mp(2, 1)},
                                 {mp(0, 2), mp(1, 2), mp(2, 2)});
    const cplx bs11 = mp(1, 1) * mp(2, 2) - mp(1, 2) * mp(2, 1);
    d.v = {(mm(1, 0) * mp(2, 2) - mp(1, 2) * mm(2, 0)) / (bs11 * s11),
           (mm(2, 0) * mp(1, 1) - mp(2, 1) * mm(1, 0)) / (bs11 * s11)};
    return d;
}

std::array<cplx, 2> arc_entries(const GridPotential& pot, std::size_t k0, cplx lambda) {
    const auto jp = jost_at_node(pot, lambda, k0);
    const auto& mm = jp.minus;
    const auto& mp = jp.plus;
    const cplx s11 = det_columns({mm(0, 0), mm(1, 0), mm(2, 0)}, {mp(0, 1), mp(1, 1), mp(2, 1)},
                                 {mp(0, 2), mp(1, 2), mp(2, 2)});
    const cplx bs11 = mp(1, 1) * mp(2, 2) - mp(1, 2) * mp(2, 1);
    if (std::abs(s11) < 1e-12 || std::abs(bs11) < 1e-12)
        throw CaseViolation("s11 vanishes on the circle; enlarge the radius");
    return {(mm(1, 0) * mp(2, 2) - mp(1, 2) * mm(2, 0)) / (bs11 * s11),
            (mm(2, 0) * mp(1, 1) - mp(2, 1) * mm(1, 0)) / (bs11 * s11)};
}

// Breakpoints of [0, 1] in `n` equal parts with dyadic refinement toward the flagged ends.
std::vector<double> graded_breaks(std::size_t n, bool at_start, bool at_end, int levels) {
    std::vector<double> b;
    const double w = 1.0 / double(n);
    b.push_back(0.0);
    if (at_start)
        for (int l = levels; l >= 1; --l) b.push_back(w * std::ldexp(1.0, -l));
    for (std::size_t k = 1; k < n; ++k) b.push_back(w * double(k));
    if (at_end)
        for (int l = 1; l <= levels; ++l) b.push_back(1.0 - w * std::ldexp(1.0, -l));
    b.push_back(1.0);
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end(), [](double a, double c) { return std::abs(a - c) < 1e-15; }),
            b.end());
    return b;
}

void add_segment(std::vector<Panel>& out, std::vector<Piece>& tags, Piece tag, double a, double b,
                 double len, bool ga, bool gb, int levels) {
    const std::size_t n = std::max<std::size_t>(1, std::size_t(std::ceil(std::abs(b - a) / len)));
    const auto br = graded_breaks(n, ga, gb, levels);
    for (std::size_t k = 0; k + 1 < br.size(); ++k) {
        Panel p;
        p.a = a + (b - a) * br[k];
        p.b = a + (b - a) * br[k + 1];
        out.push_back(p);
        tags.push_back(tag);
    }
}

void add_arc(std::vector<Panel>& out, std::vector<Piece>& tags, Piece tag, double R, double q, double len,
             int levels) {
    const std::size_t n = std::max<std::size_t>(2, std::size_t(std::ceil(kPi * R / len)));
    const auto br = graded_breaks(n, true, true, levels);
    for (std::size_t k = 0; k + 1 < br.size(); ++k) {
        Panel p;
        p.kind = Panel::Kind::arc;
        p.radius = R;
        p.q = q;
        p.t_lo = -1.0 + 2.0 * br[k];
        p.t_hi = -1.0 + 2.0 * br[k + 1];
        out.push_back(p);
        tags.push_back(tag);
    }
}

double rho_extent(const GridPotential& pot, double from) {
    // last lambda (step 0.25) where either reflection coefficient is still visible
    double last = from;
    std::vector<double> ls;
    for (double l = from; l <= 80.0; l += 0.25) ls.push_back(l);
    std::vector<double> mag(ls.size());
    parallel_for(ls.size(), [&](std::size_t i) {
        double m = 0.0;
        for (double s : {-ls[i], ls[i]}) {
            const Complex3x3 S = transition_at(pot, s);
            m = std::max({m, std::abs(S(1, 0) / S(0, 0)), std::abs(S(2, 0) / S(0, 0))});
        }
        mag[i] = m;
    });
    for (std::size_t i = 0; i < ls.size(); ++i)
        if (mag[i] > 1e-10) last = ls[i];
    return last + 1.0;
}

// Jost data on the full and, optionally, the decimated grid, combined as (4 fine - coarse)/3.
struct JostSource {
    const GridPotential& fine;
    std::optional<GridPotential> coarse;
    std::size_t k0;

    RealData real(double lambda) const {
        RealData f = real_data(fine, k0, lambda);
        if (!coarse) return f;
        const RealData c = real_data(*coarse, k0 / 2, lambda);
        for (int i = 0; i < 2; ++i) {
            f.rho[i] = (4.0 * f.rho[i] - c.rho[i]) / 3.0;
            f.r[i] = (4.0 * f.r[i] - c.r[i]) / 3.0;
            f.v[i] = (4.0 * f.v[i] - c.v[i]) / 3.0;
        }
        return f;
    }
    std::array<cplx, 2> arc(cplx lambda) const {
        auto f = arc_entries(fine, k0, lambda);
        if (!coarse) return f;
        const auto c = arc_entries(*coarse, k0 / 2, lambda);
        for (int i = 0; i < 2; ++i) f[i] = (4.0 * f[i] - c[i]) / 3.0;
        return f;
    }
};

Complex3x3 lower_of(cplx a, cplx b) {
    Complex3x3 m;
    m(1, 0) = a;
    m(2, 0) = b;
    return m;
}

Complex3x3 upper_of(cplx a, cplx b) {
    Complex3x3 m;
    m(0, 1) = a;
    m(0, 2) = b;
    return m;
}

}  // namespace

CutoffPoints choose_cutoffs(const GridPotential& pot, double threshold) {
    const std::size_t n = pot.size();
    std::size_t kr = 0;
    while (kr + 1 < n && pot.l1_norm_from(kr) >= threshold) ++kr;
    std::size_t kl = n - 1;
    while (kl > 0 && pot.l1_norm_until(kl) >= threshold) --kl;
    if (kr + 2 >= n || kl < 2) throw CaseViolation("cut-off threshold unreachable within the grid");
    return {pot.grid[kr], -pot.grid[kl]};
}

double choose_cutoff(const GridPotential& pot, double threshold) {
    const auto c = choose_cutoffs(pot, threshold);
    return std::max(c.right, c.left);
}

CutoffData cutoff_scattering(const GridPotential& pot, double x0, const LambdaGrid& grid, double tol_zero) {
    CutoffData d{0.0, nearest_node(pot.grid, x0), TransitionMatrix{grid, {}, {}}, {}, {}, 0.0};
    d.x0 = pot.grid[d.k0];
    d.l1_tail = pot.l1_norm_from(d.k0);
    const std::size_t n = grid.size();
    d.bold_S.S.resize(n);
    d.bold_S.T.resize(n);
    d.r1.resize(n);
    d.r2.resize(n);
    std::vector<char> bad(n, 0);
    parallel_for(n, [&](std::size_t k) {
        const double l = grid[k];
        const auto jp = jost_at_node(pot, l, d.k0);
        const Complex3x3 B = ad_sigma_exp(-kI * l * d.x0, inverse(jp.plus));
        d.bold_S.S[k] = B;
        d.bold_S.T[k] = inverse(B);
        if (std::abs(B(0, 0)) < tol_zero) bad[k] = 1;
        d.r1[k] = B(1, 0) / B(0, 0);
        d.r2[k] = B(2, 0) / B(0, 0);
    });
    if (std::find(bad.begin(), bad.end(), 1) != bad.end())
        throw CaseViolation("cut-off potential is not small: s11 of the cut potential nearly vanishes");
    return d;
}

double choose_radius(const TransitionMatrix& S, const DiscreteSpectrum& ds, double tol_zero) {
    double m = 1.0;
    for (const auto& z : ds.eigenvalues) m = std::max(m, std::abs(z));
    for (std::size_t k = 0; k < S.grid.size(); ++k)
        if (std::abs(S.S[k](0, 0)) < tol_zero) m = std::max(m, std::abs(S.grid[k]));
    return 1.5 * m;
}

double MatchingReport::max() const {
    double m = 0.0;
    for (double v : v_identity) m = std::max(m, v);
    for (double v : families) m = std::max(m, v);
    return m;
}

AugmentedContour::AugmentedContour(const GridPotential& pot, double x0, double S_inf,
                                   const AugmentedOptions& opt)
    : S_(S_inf), eps_(pot.epsilon) {
    if (!(S_inf > 0.0)) throw InputError("circle radius must be positive");
    std::size_t k0 = nearest_node(pot.grid, x0);
    const bool rich = opt.richardson && pot.size() % 2 == 1 && pot.size() >= 9;
    if (rich && k0 % 2 == 1) ++k0;
    x0_ = pot.grid[k0];
    JostSource src{pot, std::nullopt, k0};
    if (rich) src.coarse.emplace(pot.decimated());
    lambda_max_ = opt.lambda_max > 0.0 ? opt.lambda_max : rho_extent(pot, S_);
    if (lambda_max_ <= S_) lambda_max_ = S_ + 1.0;

    const double len = std::min(0.5, 4.0 / (1.0 + opt.x_extent));
    const int lv = opt.grading_levels;
    std::vector<Panel> ps;
    std::vector<Piece> tags;
    add_segment(ps, tags, Piece::outer_left, -lambda_max_, -S_, len, false, true, lv);
    add_segment(ps, tags, Piece::inner, S_, -S_, len, true, true, lv);
    add_segment(ps, tags, Piece::outer_right, S_, lambda_max_, len, true, false, lv);
    add_arc(ps, tags, Piece::arc_upper, S_, 1.0, len, lv);
    add_arc(ps, tags, Piece::arc_lower, S_, -1.0, len, lv);
    panels_ = std::make_shared<PanelContour>(ps, opt.order);

    const std::size_t N = panels_->size(), p = opt.order;
    piece_.resize(N);
    for (std::size_t i = 0; i < N; ++i) piece_[i] = tags[i / p];

    // junction values
    RealData ends[2];
    for (int s = 0; s < 2; ++s) {
        ends[s] = src.real(s == 0 ? -S_ : S_);
        rho_ends_[s] = ends[s].rho;
    }

    entries_.assign(N, {cplx(0.0), cplx(0.0)});
    std::size_t first_lower = N;
    for (std::size_t i = 0; i < N; ++i)
        if (piece_[i] == Piece::arc_lower) {
            first_lower = i;
            break;
        }
    std::vector<char> failed(N, 0);
    parallel_for(N, [&](std::size_t i) {
        const cplx l = panels_->nodes()[i];
        try {
            switch (piece_[i]) {
            case Piece::outer_left:
            case Piece::outer_right:
                entries_[i] = src.real(l.real()).rho;
                break;
            case Piece::inner:
                entries_[i] = src.real(l.real()).r;
                break;
            case Piece::arc_upper:
                entries_[i] = src.arc(l);
                break;
            case Piece::arc_lower:
                break;
            }
        } catch (const std::exception&) {
            failed[i] = 1;
        }
    });
    if (std::find(failed.begin(), failed.end(), 1) != failed.end())
        throw CaseViolation("s11 vanishes on the circle; enlarge the radius");
    // lower arc by Schwarz reflection of the upper one (nodes are conjugate pairs)
    const double e = double(eps_);
    for (std::size_t i = first_lower, j = first_lower - (N - first_lower); i < N; ++i, ++j)
        entries_[i] = {e * std::conj(entries_[j][0]), e * std::conj(entries_[j][1])};

    // matching at -S, +S
    for (int s = 0; s < 2; ++s) {
        const double l = s == 0 ? -S_ : S_;
        const cplx ph = std::exp(-2.0 * kI * l * x0_);
        const auto L = interpolant(l);
        const cplx Lh[2] = {e * std::conj(L[0]), e * std::conj(L[1])};
        double vi = 0.0, f0 = 0.0, f1 = 0.0, f2 = 0.0, f3 = 0.0;
        for (int c = 0; c < 2; ++c) {
            const auto& d = ends[s];
            vi = std::max(vi, std::abs(ph * d.v[c] - (d.rho[c] - d.r[c])));
            f0 = std::max(f0, std::abs(L[c] * ph - d.rho[c]));
            const cplx vm = e * std::conj(d.v[c]);
            f1 = std::max(f1, std::abs((vm - Lh[c]) / ph + e * std::conj(d.r[c])));
            f2 = std::max(f2, std::abs(Lh[c] / ph - e * std::conj(d.rho[c])));
            f3 = std::max(f3, std::abs((d.v[c] - L[c]) * ph + d.r[c]));
        }
        matching_.v_identity[s] = vi;
        matching_.families[0] = std::max(matching_.families[0], f0);
        matching_.families[1] = std::max(matching_.families[1], f1);
        matching_.families[2] = std::max(matching_.families[2], f2);
        matching_.families[3] = std::max(matching_.families[3], f3);
    }
}

std::array<cplx, 2> AugmentedContour::interpolant(cplx lambda) const {
    std::array<cplx, 2> out;
    for (int c = 0; c < 2; ++c) {
        const cplx lm = std::exp(2.0 * kI * (-S_) * x0_) * rho_ends_[0][c];
        const cplx lp = std::exp(2.0 * kI * S_ * x0_) * rho_ends_[1][c];
        out[c] = 0.5 * (lp + lm) + (lp - lm) / (2.0 * S_) * lambda;
    }
    return out;
}

JumpFactors AugmentedContour::jump(double x) const {
    const std::size_t N = size();
    JumpFactors j;
    j.w_plus.resize(N);
    j.w_minus.resize(N);
    const double e = double(eps_);
    for (std::size_t i = 0; i < N; ++i) {
        const cplx l = nodes()[i];
        const auto& d = entries_[i];
        switch (piece_[i]) {
        case Piece::outer_left:
        case Piece::outer_right: {
            const cplx ph = std::exp(2.0 * kI * l * x);
            j.w_plus[i] = lower_of(d[0] * ph, d[1] * ph);
            j.w_minus[i] = upper_of(e * std::conj(d[0] * ph), e * std::conj(d[1] * ph));
            break;
        }
        case Piece::inner: {
            const cplx ph = std::exp(2.0 * kI * l * x);
            j.w_plus[i] = upper_of(-e * std::conj(d[0] * ph), -e * std::conj(d[1] * ph));
            j.w_minus[i] = lower_of(-d[0] * ph, -d[1] * ph);
            break;
        }
        case Piece::arc_upper: {
            const cplx ph = std::exp(2.0 * kI * l * (x - x0_));
            const auto L = interpolant(l);
            j.w_plus[i] = lower_of(L[0] * ph, L[1] * ph);
            j.w_minus[i] = lower_of((d[0] - L[0]) * ph, (d[1] - L[1]) * ph);
            break;
        }
        case Piece::arc_lower: {
            const cplx ph = std::exp(-2.0 * kI * l * (x - x0_));
            const auto L = interpolant(std::conj(l));
            const cplx Lh[2] = {e * std::conj(L[0]), e * std::conj(L[1])};
            j.w_plus[i] = upper_of((d[0] - Lh[0]) * ph, (d[1] - Lh[1]) * ph);
            j.w_minus[i] = upper_of(Lh[0] * ph, Lh[1] * ph);
            break;
        }
        }
    }
    return j;
}

Complex3x3 AugmentedContour::jump_matrix(std::size_t node, double x) const {
    const auto j = jump(x);
    return reassemble_jump(j.w_plus[node], j.w_minus[node]);
}

void AugmentedContour::apply(std::span<const cplx> g, std::span<const cplx> h, std::size_t nfun,
                             std::span<cplx> out) const {
    // C- = C+ - I on the nodes
    const std::size_t N = size();
    std::vector<cplx> s(N), y(N);
    const auto& mv = kernels::active().matvec;
    for (std::size_t f = 0; f < nfun; ++f) {
        for (std::size_t i = 0; i < N; ++i)
            s[i] = (g.empty() ? cplx(0.0) : g[f * N + i]) + (h.empty() ? cplx(0.0) : h[f * N + i]);
        mv(panels_->cplus().data(), N, N, s.data(), y.data());
        for (std::size_t i = 0; i < N; ++i) out[f * N + i] = y[i] - (h.empty() ? cplx(0.0) : h[f * N + i]);
    }
}

void AugmentedContour::dump(std::ostream& os, double x) const {
    const auto j = jump(x);
    os.precision(17);
    for (std::size_t i = 0; i < size(); ++i) {
        const Complex3x3 V = reassemble_jump(j.w_plus[i], j.w_minus[i]);
        os << int(piece_[i]) << ' ' << nodes()[i].real() << ' ' << nodes()[i].imag();
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) os << ' ' << V(r, c).real() << ' ' << V(r, c).imag();
        os << '\n';
    }
}

std::array<cplx, 2> solve_case3_at(std::shared_ptr<const AugmentedContour> contour, double x,
                                   const SolverOptions& opt, double* residual, std::vector<cplx>* guess) {
    ContourRHP rhp{CaseTag::III, x, contour, contour->jump(x)};
    const auto sol = solve_beals_coifman(rhp, 0, opt, guess);
    if (residual) *residual = sol.residual_norm;
    if (guess) *guess = sol.mu;
    return reconstruct_potential(sol, rhp);
}

Case3Result solve_case3(const GridPotential& pot, const XGrid& grid, const Case3Options& opt) {
    struct {
        CutoffPoints cuts;
        double S_inf;
        MatchingReport matching_right, matching_left;
    } res{choose_cutoffs(pot, opt.threshold), opt.S_inf, {}, {}};
    if (!(res.S_inf > 0.0)) {
        const double L = 10.0;
        const auto tm = compute_transition_matrix(pot, LambdaGrid(L, 512));
        const auto ds = find_discrete_spectrum(pot, default_region(L));
        res.S_inf = choose_radius(tm, ds, opt.tol_zero);
    }
    const double xs = 0.5 * (res.cuts.right - res.cuts.left);
    const std::size_t nx = grid.size();
    double ext_r = 0.0, ext_l = 0.0;
    bool any_r = false, any_l = false;
    for (std::size_t k = 0; k < nx; ++k) {
        const double x = grid[k];
        if (x >= xs) {
            any_r = true;
            ext_r = std::max({ext_r, std::abs(x), std::abs(x - res.cuts.right)});
        } else {
            any_l = true;
            ext_l = std::max({ext_l, std::abs(x), std::abs(-x - res.cuts.left)});
        }
    }
    const GridPotential mirror = pot.mirrored();
    std::shared_ptr<const AugmentedContour> right, left;
    if (any_r) {
        auto o = opt.contour;
        o.x_extent = ext_r;
        right = std::make_shared<AugmentedContour>(pot, res.cuts.right, res.S_inf, o);
        res.matching_right = right->matching();
    }
    if (any_l) {
        auto o = opt.contour;
        o.x_extent = ext_l;
        left = std::make_shared<AugmentedContour>(mirror, res.cuts.left, res.S_inf, o);
        res.matching_left = left->matching();
    }

    std::vector<cplx> u(nx), v(nx);
    std::vector<double> resid(nx, 0.0);
    std::vector<std::string> err(nx);
    auto work = [&](std::size_t begin, std::size_t end) {
        std::vector<cplx> prev_r, prev_l;
        for (std::size_t k = begin; k < end; ++k) {
            const double x = grid[k];
            const bool use_left = x < xs;
            try {
                double r = 0.0;
                const auto uv = use_left ? solve_case3_at(left, -x, opt.solver, &r, &prev_l)
                                         : solve_case3_at(right, x, opt.solver, &r, &prev_r);
                u[k] = use_left ? -uv[0] : uv[0];
                v[k] = use_left ? -uv[1] : uv[1];
                resid[k] = r;
            } catch (const std::exception& e) {
                err[k] = e.what();
            }
        }
    };
    const unsigned nt = std::max(1u, std::min<unsigned>(worker_count(), unsigned(nx)));
    std::vector<std::thread> pool;
    const std::size_t chunk = (nx + nt - 1) / nt;
    for (unsigned t = 0; t < nt; ++t)
        pool.emplace_back(work, std::min(nx, t * chunk), std::min(nx, (t + 1) * chunk));
    for (auto& th : pool) th.join();

    ReconstructedPotential prof{GridPotential(grid, u, v, pot.epsilon), 0.0, {}, {}, {}, {}};
    for (std::size_t k = 0; k < nx; ++k) {
        prof.residual_max = std::max(prof.residual_max, resid[k]);
        if (!err[k].empty()) {
            prof.failed_x.push_back(grid[k]);
            prof.failures.push_back(err[k]);
            prof.potential.u[k] = prof.potential.v[k] = 0.0;
        }
    }
    attach_sobolev_reports(prof);
    return Case3Result{std::move(prof), res.cuts, res.S_inf, res.matching_right, res.matching_left};
}

}  // namespace manakov
