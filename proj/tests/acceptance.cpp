// Acceptance gate: one PASS/FAIL line per criterion.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "manakov/case3.hpp"
#include "manakov/cauchy.hpp"
#include "manakov/evolution.hpp"
#include "manakov/rhp.hpp"

using namespace manakov;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void check(bool ok, const std::string& what, double value, double bound) {
        pass = pass && ok;
        detail << ' ' << what << '=' << value << (ok ? "<=" : ">") << bound;
    }
    void below(const std::string& what, double value, double bound) { check(value <= bound, what, value, bound); }
    void above(const std::string& what, double value, double bound) {
        const bool ok = value >= bound;
        pass = pass && ok;
        detail << ' ' << what << '=' << value << (ok ? ">=" : "<") << bound;
    }
};

const XGrid kX(-20, 20, 2049);
const LambdaGrid kL(30, 2048);

double max_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

double max_diff(const GridPotential& a, const GridPotential& b) { return std::max(max_diff(a.u, b.u), max_diff(a.v, b.v)); }

double l2(const GridPotential& p) {
    double s = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) s += std::norm(p.u[k]) + std::norm(p.v[k]);
    return std::sqrt(s * p.grid.spacing());
}

GridPotential minus(const GridPotential& a, const GridPotential& b) {
    std::vector<cplx> u(a.size()), v(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        u[k] = a.u[k] - b.u[k];
        v[k] = a.v[k] - b.v[k];
    }
    return GridPotential(a.grid, u, v, a.epsilon);
}

double combined(const GridPotential& p, int i, int j) {
    return std::hypot(h_ij_norm(p.u, p.grid, i, j), h_ij_norm(p.v, p.grid, i, j));
}

std::vector<GridPotential> random_corpus(int eps, int count, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> amp(0.2, 1.2), ph(0.0, 6.283185307179586), width(0.5, 2.0), chirp(-2, 2);
    std::normal_distribution<double> centre(0.0, 1.5);
    std::vector<GridPotential> out;
    for (int n = 0; n < count; ++n) {
        std::array<cplx, 4> a;
        std::array<double, 4> c, w, q;
        for (int i = 0; i < 4; ++i) {
            a[i] = std::polar(amp(rng), ph(rng));
            c[i] = centre(rng);
            w[i] = width(rng);
            q[i] = chirp(rng);
        }
        auto bump = [](cplx a, double c, double w, double q) {
            return [=](double x) { return a * std::exp(-(x - c) * (x - c) / (w * w)) * std::exp(cplx(0.0, q * x)); };
        };
        const auto f0 = bump(a[0], c[0], w[0], q[0]), f1 = bump(a[1], c[1], w[1], q[1]);
        const auto g0 = bump(a[2], c[2], w[2], q[2]), g1 = bump(a[3], c[3], w[3], q[3]);
        out.push_back(sample_potential(kX, eps, [&](double x) { return f0(x) + f1(x); },
                                       [&](double x) { return g0(x) + g1(x); }));
    }
    return out;
}

// u = 0.8 e^{-(x-1/2)^2} + 0.2 i x e^{-x^2}, v = 0.5 i e^{-x^2/2}
GridPotential gaussian(const XGrid& g, int eps) {
    return sample_potential(
        g, eps, [](double x) { return cplx(0.8 * std::exp(-(x - 0.5) * (x - 0.5)), 0.2 * x * std::exp(-x * x)); },
        [](double x) { return cplx(0, 0.5) * std::exp(-x * x / 2); });
}

GridPotential sech_pair(const XGrid& g, double A) {
    return sample_potential(g, 1, [&](double x) { return cplx(0.6 * A / std::cosh(x), 0.0); },
                            [&](double x) { return cplx(0.0, 0.8 * A) / std::cosh(x); });
}

ScatteringData soliton_data(const LambdaGrid& lg, cplx z, std::array<cplx, 2> c) {
    ScatteringData d{lg, std::vector<cplx>(lg.size()), std::vector<cplx>(lg.size()), {}, 1};
    d.discrete.eigenvalues.push_back(z);
    d.discrete.norming.push_back(c);
    return d;
}

// Reflectionless one-eigenvalue solution for z = xi + i eta and norming constant C.
std::array<cplx, 2> soliton(cplx z, std::array<cplx, 2> c, double x) {
    const double eta = z.imag();
    const double c2 = std::norm(c[0]) + std::norm(c[1]);
    const cplx num = -2.0 * kI * std::exp(-2.0 * kI * std::conj(z) * x);
    const double den = 1.0 + std::exp(-4.0 * eta * x) * c2 / (4.0 * eta * eta);
    return {num * std::conj(c[0]) / den, num * std::conj(c[1]) / den};
}

/// Reconstruction through the left normalization at every x: the mirrored potential's
/// right-normalized problem at -x.
GridPotential left_route(const TransitionMatrix& tm, int eps, const XGrid& xs) {
    const XGrid mx(-xs.x_max(), -xs.x_min(), xs.size());
    const auto r = reconstruct_profile(left_normalized_data(tm, eps), mx);
    std::vector<cplx> u(xs.size()), v(xs.size());
    for (std::size_t k = 0; k < xs.size(); ++k) {
        u[k] = -r.potential.u[xs.size() - 1 - k];
        v[k] = -r.potential.v[xs.size() - 1 - k];
    }
    return GridPotential(xs, u, v, eps);
}

// ---- criteria ----

struct CorpusReport {
    double uni = 0.0, det = 0.0, sym = 0.0;
};

// 10 defocusing and 10 focusing random potentials, evaluated once for both criteria
const CorpusReport& corpus_report() {
    static const CorpusReport r = [] {
        CorpusReport c;
        std::mt19937_64 rng(20261016);
        for (int eps : {-1, 1})
            for (const auto& p : random_corpus(eps, 10, rng)) {
                const auto tm = compute_transition_matrix(p, kL);
                const auto u = check_unitarity(tm, eps);
                c.uni = std::max(c.uni, u.unitarity);
                c.det = std::max(c.det, u.det);
                c.sym = std::max(c.sym, verify_symmetries(tm, eps).max());
            }
        return c;
    }();
    return r;
}

Outcome unitarity() {
    Outcome o;
    o.below("max_unitarity_residual", corpus_report().uni, 1e-7);
    o.below("max_det_deviation", corpus_report().det, 1e-9);
    return o;
}

Outcome symmetries() {
    Outcome o;
    o.below("max_symmetry_residual", corpus_report().sym, 1e-8);
    return o;
}

Outcome free_problem() {
    Outcome o;
    const auto z = sample_potential(kX, 1, [](double) { return cplx(0.0); }, [](double) { return cplx(0.0); });
    const auto tm = compute_transition_matrix(z, kL);
    double s = 0.0;
    for (const auto& S : tm.S) s = std::max(s, max_abs_diff(S, Complex3x3::identity()));
    const auto d = reflection_coefficients(tm, 1);
    const double rho = std::max(max_diff(d.rho1, std::vector<cplx>(kL.size())), max_diff(d.rho2, std::vector<cplx>(kL.size())));
    const auto rec = reconstruct_profile(d, XGrid(-5, 5, 21));
    const double u = l2(rec.potential);
    o.below("S_minus_I", s, 1e-15);
    o.below("rho", rho, 0.0);
    o.below("reconstruction", u, 0.0);
    return o;
}

struct RoundTrip {
    double rel_l2, h11_in, h11_out;
    GridPotential rec;
};

RoundTrip case1_roundtrip(std::size_t nx, const XGrid& xs) {
    const auto p = gaussian(XGrid(-20, 20, nx), -1);
    const auto tm = compute_transition_matrix(p, kL);
    ProfileOptions po;
    po.left = left_normalized_data(tm, -1);
    const auto rec = reconstruct_profile(reflection_coefficients(tm, -1), xs, po);
    const auto exact = gaussian(xs, -1);
    return {l2(minus(rec.potential, exact)) / l2(exact), combined(exact, 1, 1), combined(rec.potential, 1, 1),
            rec.potential};
}

Outcome case1() {
    Outcome o;
    const XGrid xs(-6, 6, 97);
    const auto fine = case1_roundtrip(2049, xs);
    const auto coarse = case1_roundtrip(1025, xs);
    o.below("relative_l2", fine.rel_l2, 1e-3);
    o.above("halving_h_gain", coarse.rel_l2 / fine.rel_l2, 3.0);
    o.below("h11_mismatch", std::abs(fine.h11_out / fine.h11_in - 1.0), 0.02);
    return o;
}

Outcome case2() {
    Outcome o;
    const cplx z(0.3, 0.6);
    const std::array<cplx, 2> c{cplx(0.4, -0.9), cplx(-0.7, 0.2)};
    const auto d = soliton_data(kL, z, c);
    ProfileOptions po;
    po.solver.tol = 1e-13;
    const XGrid xs(-16, 16, 641);
    const auto rec = reconstruct_profile(d, xs, po);
    double err = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const auto e = soliton(z, c, xs[k]);
        err = std::max({err, std::abs(rec.potential.u[k] - e[0]), std::abs(rec.potential.v[k] - e[1])});
    }
    o.below("pointwise_error", err, 1e-8);

    const auto ds = find_discrete_spectrum(rec.potential, default_region(3.0));
    const double zerr = ds.size() == 1 ? std::abs(ds.eigenvalues[0] - z) : 1e300;
    o.below("eigenvalue_error", zerr, 1e-5);

    // translation covariance with a shift of 40 x-nodes: rho_k -> e^{-2 i lambda a} rho_k, C -> C e^{-2 i z a}
    const std::size_t s = 40;
    const double a = double(s) * kX.spacing();
    const auto p0 = gaussian(kX, 1);
    std::vector<cplx> u(kX.size()), v(kX.size());
    for (std::size_t k = s; k < kX.size(); ++k) {
        u[k] = p0.u[k - s];
        v[k] = p0.v[k - s];
    }
    const LambdaGrid lg(6, 64);
    const auto d0 = reflection_coefficients(compute_transition_matrix(p0, lg), 1);
    const auto d1 = reflection_coefficients(compute_transition_matrix(GridPotential(kX, u, v, 1), lg), 1);
    double tr = 0.0;
    for (std::size_t k = 0; k < lg.size(); ++k) {
        const cplx ph = std::exp(-2.0 * kI * lg[k] * a);
        tr = std::max({tr, std::abs(d1.rho1[k] - ph * d0.rho1[k]), std::abs(d1.rho2[k] - ph * d0.rho2[k])});
    }
    auto shifted = d;
    for (auto& cc : shifted.discrete.norming[0]) cc *= std::exp(-2.0 * kI * z * a);
    for (double x : {-1.0, 0.5, 2.0}) {
        const auto r1 = build_jump(shifted, x + a);
        const auto u1 = reconstruct_potential(solve_beals_coifman(r1, 0, po.solver), r1);
        const auto e = soliton(z, c, x);
        tr = std::max({tr, std::abs(u1[0] - e[0]), std::abs(u1[1] - e[1])});
    }
    o.below("translation_covariance", tr, 1e-6);
    return o;
}

Outcome left_right() {
    Outcome o;
    const auto p = gaussian(kX, -1);
    const auto tm = compute_transition_matrix(p, kL);
    const XGrid xs(-4, 4, 17);
    const auto right = reconstruct_profile(reflection_coefficients(tm, -1), xs);
    o.below("left_vs_right", max_diff(right.potential, left_route(tm, -1, xs)), 1e-6);

    // replace the lower circle data by the Schwarz reflection of the upper circle data
    const auto d = soliton_data(kL, cplx(-0.2, 0.8), {cplx(0.5, 0.5), cplx(0, -1)});
    const auto contour = make_contour(d, 64);
    const std::size_t off = kL.size(), m = 64;
    double dev = 0.0;
    for (double x : {-2.0, -0.3, 0.6, 2.5}) {
        auto rhp = build_jump(d, contour, x);
        const auto base = reconstruct_potential(solve_beals_coifman(rhp), rhp);
        for (std::size_t j = 0; j < m; ++j) rhp.jump.w_minus[off + m + j] = adjoint(rhp.jump.w_plus[off + (m - j) % m]);
        const auto regen = reconstruct_potential(solve_beals_coifman(rhp), rhp);
        dev = std::max({dev, std::abs(regen[0] - base[0]), std::abs(regen[1] - base[1])});
    }
    o.below("schwarz_regeneration", dev, 1e-8);
    return o;
}

Outcome case3() {
    Outcome o;
    AugmentedOptions ao;
    ao.lambda_max = 14.0;
    ao.x_extent = 6.0;
    {
        const XGrid g(-14, 14, 1401);
        const auto pot = sech_pair(g, 1.2);
        const auto cuts = choose_cutoffs(pot);
        const double match = std::max(AugmentedContour(pot, cuts.right, 1.5, ao).matching().max(),
                                      AugmentedContour(pot.mirrored(), cuts.left, 1.5, ao).matching().max());
        o.below("matching_residual", match, 1e-6);

        Case3Options c;
        c.contour = ao;
        c.contour.lambda_max = 10.0;
        c.S_inf = 1.5;
        const XGrid xs(-3, 3, 7);
        const auto base = solve_case3(pot, xs, c);
        double stab = 0.0;
        for (double f : {0.75, 1.25}) {
            c.S_inf = 1.5 * f;
            stab = std::max(stab, max_diff(solve_case3(pot, xs, c).profile.potential, base.profile.potential));
        }
        o.below("S_inf_stability", stab, 1e-4);
    }
    {
        const XGrid g(-16, 16, 1601);
        const auto pot = sech_pair(g, 0.3);
        const XGrid xs(-4, 4, 9);
        Case3Options c;
        c.S_inf = 1.5;
        c.contour = ao;
        c.contour.lambda_max = 10.0;
        c.contour.richardson = false;
        const auto r3 = solve_case3(pot, xs, c);
        const auto tm = compute_transition_matrix(pot, LambdaGrid(16.0, 2048));
        ProfileOptions po;
        po.left = left_normalized_data(tm, 1);
        const auto r1 = reconstruct_profile(reflection_coefficients(tm, 1), xs, po);
        o.below("case3_vs_case1", max_diff(r3.profile.potential, r1.potential), 1e-5);
    }
    return o;
}

Outcome evolution() {
    Outcome o;
    const XGrid g(-20, 20, 1601);
    auto gauss = [&](double a) {
        return sample_potential(g, -1, [&](double x) { return cplx(0.6 * a * std::exp(-x * x), 0.0); },
                                [&](double x) { return cplx(0.0, 0.8 * a) * std::exp(-x * x) * std::exp(cplx(0.0, 0.5 * x)); });
    };
    const auto cal = calibrate_phase_convention(gauss(0.5), Flow::manakov_lambda2);
    o.below("calibration_offset", std::abs(cal.raw - cal.kappa), 0.05 * std::abs(cal.kappa));

    const auto p = gauss(0.8);
    const LambdaGrid lg(20.0, 2048);
    const auto tm = compute_transition_matrix(p, lg);
    const auto ev = evolve_scattering(reflection_coefficients(tm, -1), 0.5, Flow::manakov_lambda2, cal.kappa);
    ProfileOptions po;
    po.left = evolve_scattering(left_normalized_data(tm, -1), 0.5, Flow::manakov_lambda2, cal.kappa).data;
    const XGrid xs(-4, 4, 17);
    const auto rec = reconstruct_profile(ev.data, xs, po);
    const auto ref = split_step_manakov(p, 0.5);
    double err = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const std::size_t j = std::size_t(std::lround((xs[k] - g.x_min()) / g.spacing()));
        err = std::max({err, std::abs(rec.potential.u[k] - ref.u[j]), std::abs(rec.potential.v[k] - ref.v[j])});
    }
    o.below("linf_vs_split_step", err, 1e-2);
    o.below("mass_drift", std::abs(l2(ref) * l2(ref) - l2(p) * l2(p)), 1e-10);

    const double A = 1.0, c = 0.5;
    const auto sol = sample_potential(
        XGrid(-20, 20, 801), 1, [&](double x) { return 0.6 * A / std::cosh(A * x) * std::exp(cplx(0.0, c * x)); },
        [&](double x) { return cplx(0.0, 0.8) * A / std::cosh(A * x) * std::exp(cplx(0.0, c * x)); });
    const auto z0 = find_discrete_spectrum(sol, default_region(3.0));
    const auto z1 = find_discrete_spectrum(split_step_manakov(sol, 1.0), default_region(3.0));
    const double iso = z0.size() == 1 && z1.size() == 1 ? std::abs(z1.eigenvalues[0] - z0.eigenvalues[0]) : 1e300;
    o.below("isospectrality", iso, 1e-4);
    return o;
}

Outcome cauchy() {
    Outcome o;
    RealLineCauchy c(kL);
    std::vector<cplx> f(kL.size()), p(kL.size()), m(kL.size()), d(kL.size());
    for (std::size_t k = 0; k < kL.size(); ++k) {
        const double l = kL[k];
        f[k] = std::abs(l) < 5 ? std::exp(-1.0 / (25 - l * l)) * cplx(1.0, std::sin(l)) : cplx(0);
    }
    c.project(f, 1, p);
    c.project(f, -1, m);
    for (std::size_t k = 0; k < kL.size(); ++k) d[k] = p[k] - m[k];
    o.below("jump_identity", max_diff(d, f), 1e-8);

    for (std::size_t k = 0; k < kL.size(); ++k) f[k] = 1.0 / (kL[k] - kI);
    c.project(f, 1, p);
    c.project(f, -1, m);
    for (std::size_t k = 0; k < kL.size(); ++k) d[k] = -f[k];
    o.below("annihilation", std::max(max_diff(p, std::vector<cplx>(kL.size())), max_diff(m, d)), 1e-8);

    double lau = 0.0;
    for (int orient : {1, -1}) {
        const Circle circ{cplx(0.3, 1.1), 0.8, orient, 64};
        const auto s = circ.nodes();
        std::vector<cplx> g(64), pos(64), neg(64), cp(64), cm(64);
        for (std::size_t j = 0; j < 64; ++j) {
            const cplx w = s[j] - circ.center;
            pos[j] = 1.0 - 0.5 * w + cplx(0.2, 1.0) * w * w * w;
            neg[j] = 0.7 / w + cplx(0, 0.4) / (w * w * w * w);
            g[j] = pos[j] + neg[j];
        }
        circle_project(circ, g, 1, cp);
        circle_project(circ, g, -1, cm);
        for (std::size_t j = 0; j < 64; ++j) {
            const cplx ep = orient > 0 ? pos[j] : neg[j];
            const cplx em = orient > 0 ? -neg[j] : -pos[j];
            lau = std::max({lau, std::abs(cp[j] - ep), std::abs(cm[j] - em)});
        }
    }
    o.below("laurent_projection", lau, 1e-10);
    return o;
}

Outcome sobolev() {
    Outcome o;
    // the Gaussian is in H^{2,1}; rho sampled on an odd lambda-grid so the half grid is nested
    const LambdaGrid lg(30, 2049);
    double ratio_rho = 0.0, norm_rho = 0.0, x_refine = 0.0;
    std::array<double, 2> by_nx{};
    for (int i = 0; i < 2; ++i) {
        const auto tm = compute_transition_matrix(gaussian(XGrid(-20, 20, i ? 2049 : 1025), -1), lg);
        const auto d = reflection_coefficients(tm, -1);
        const auto nodes = lg.nodes();
        const auto r1 = sobolev_report(d.rho1, nodes, 0, 2), r2 = sobolev_report(d.rho2, nodes, 0, 2);
        by_nx[i] = std::hypot(r1.norm_value, r2.norm_value);
        if (i) {
            norm_rho = by_nx[i];
            ratio_rho = std::max(std::abs(r1.refinement_ratio - 1.0), std::abs(r2.refinement_ratio - 1.0));
        }
    }
    x_refine = std::abs(by_nx[1] / by_nx[0] - 1.0);
    o.check(std::isfinite(norm_rho) && norm_rho > 0, "rho_h02_norm", norm_rho, INFINITY);
    o.below("rho_h02_refinement", std::max(ratio_rho, x_refine), 0.05);

    const auto rec = case1_roundtrip(2049, XGrid(-6, 6, 97)).rec;
    const auto xs = rec.grid.nodes();
    const auto ru = sobolev_report(rec.u, xs, 2, 0), rv = sobolev_report(rec.v, xs, 2, 0);
    const double h2 = std::hypot(ru.norm_value, rv.norm_value);
    o.check(std::isfinite(h2) && h2 > 0, "reconstruction_h2_norm", h2, INFINITY);
    o.below("reconstruction_h2_refinement",
            std::max(std::abs(ru.refinement_ratio - 1.0), std::abs(rv.refinement_ratio - 1.0)), 0.05);
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"unitarity", unitarity},
        {"symmetries", symmetries},
        {"free problem", free_problem},
        {"case I round trip", case1},
        {"case II soliton", case2},
        {"left/right normalization", left_right},
        {"case III matching", case3},
        {"evolution", evolution},
        {"Cauchy identities", cauchy},
        {"Sobolev diagnostics", sobolev},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << " exception: " << e.what();
        }
        const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s criterion %zu (%s):%s [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                    o.detail.str().c_str(), dt);
        std::fflush(stdout);
        failed += !o.pass;
    }
    return failed ? 1 : 0;
}
