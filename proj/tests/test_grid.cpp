#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "manakov/errors.hpp"
#include "manakov/grid.hpp"

using namespace manakov;

namespace {

std::vector<cplx> gaussian(const XGrid& g) {
    std::vector<cplx> f(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) f[k] = std::exp(-g[k] * g[k]);
    return f;
}

}  // namespace

TEST_CASE("h_ij_norm of zero is zero") {
    XGrid g(-3, 4, 101);
    std::vector<cplx> f(g.size(), 0.0);
    CHECK(h_ij_norm(f, g, 1, 1) == 0.0);
}

TEST_CASE("L2 norm of a Gaussian matches (pi/2)^{1/4}") {
    XGrid g(-10, 10, 2048);
    CHECK(std::abs(h_ij_norm(gaussian(g), g, 0, 0) - std::pow(std::numbers::pi / 2, 0.25)) < 1e-6);
}

TEST_CASE("H^{1,1} norm converges to the fine-grid value") {
    XGrid g(-10, 10, 2048), fine(-10, 10, 1 << 16);
    const double a = h_ij_norm(gaussian(g), g, 1, 1);
    const double b = h_ij_norm(gaussian(fine), fine, 1, 1);
    CHECK(std::abs(a - b) < 1e-5);
    // closed form: ||f'||^2 = ||x f||^2 * 4, ||x f||^2 = sqrt(pi/2)/4
    const double xf2 = std::sqrt(std::numbers::pi / 2) / 4;
    CHECK(std::abs(b - std::sqrt(5 * xf2)) < 1e-7);
}

TEST_CASE("h_ij_norm rejects unsupported orders and bad samples") {
    XGrid g(-1, 1, 11);
    std::vector<cplx> f(g.size(), 1.0);
    CHECK_THROWS_AS(h_ij_norm(f, g, 3, 0), InputError);
    CHECK_THROWS_AS(h_ij_norm(f, g, 0, 3), InputError);
    f[3] = cplx(std::nan(""), 0);
    CHECK_THROWS_AS(h_ij_norm(f, g, 0, 0), InputError);
    std::vector<double> x{0, 1, 2, 3.5};
    std::vector<cplx> h(4, 1.0);
    CHECK_THROWS_AS(h_ij_norm(h, x, 0, 0), InputError);
}

TEST_CASE("weight term dominates away from the unit interval") {
    XGrid g(1.5, 6, 301);
    std::vector<cplx> f(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) f[k] = std::exp(-g[k]);
    CHECK(h_ij_norm(f, g, 0, 0) <= h_ij_norm(f, g, 0, 1));
}

TEST_CASE("sobolev_report ratio is close to one for resolved data") {
    XGrid g(-10, 10, 2049);
    const auto x = g.nodes();
    const auto r = sobolev_report(gaussian(g), x, 1, 1);
    CHECK(r.norm_value > 0.0);
    CHECK(std::abs(r.refinement_ratio - 1.0) < 1e-3);
}

TEST_CASE("ad_sigma_exp examples") {
    Complex3x3 b;
    for (int k = 0; k < 9; ++k) b.a[k] = cplx(k + 1, -k);
    CHECK(max_abs_diff(ad_sigma_exp(cplx(0.3, 2.0), Complex3x3::identity()), Complex3x3::identity()) == 0.0);
    CHECK(max_abs_diff(ad_sigma_exp(0.0, b), b) == 0.0);
    Complex3x3 e;
    e(1, 0) = 1.0;
    const auto r = ad_sigma_exp(kI * std::numbers::pi / 2.0, e);
    CHECK(std::abs(r(1, 0) + 1.0) < 1e-15);
    const cplx t(0.4, -1.3);
    CHECK(max_abs_diff(ad_sigma_exp(t, ad_sigma_exp(-t, b)), b) < 1e-14);
}

TEST_CASE("expm_taylor agrees with a diagonal exponential") {
    const auto d = Complex3x3::diag(cplx(0.1, 2), cplx(-1, 0.5), cplx(0, -3));
    const auto e = expm_taylor(d);
    CHECK(std::abs(e(0, 0) - std::exp(cplx(0.1, 2))) < 1e-14);
    CHECK(std::abs(e(2, 2) - std::exp(cplx(0, -3))) < 1e-14);
    CHECK(std::abs(e(0, 1)) < 1e-15);
}

TEST_CASE("potential file round trip is bit identical") {
    XGrid g(-5.25, 7.5, 37);
    auto p = sample_potential(
        g, -1, [](double x) { return cplx(std::sin(x) / 3, 1 / (1 + x * x)); },
        [](double x) { return cplx(std::exp(-x * x), -0.1 * x); });
    std::stringstream ss;
    write_potential(ss, p);
    ss << "# residual_max=0\n";
    const auto q = read_potential(ss);
    CHECK(q.epsilon == -1);
    CHECK(q.size() == p.size());
    for (std::size_t k = 0; k < p.size(); ++k) {
        CHECK(q.u[k] == p.u[k]);
        CHECK(q.v[k] == p.v[k]);
    }
}

TEST_CASE("malformed potential files are rejected") {
    std::istringstream bad1("# manakov-potential epsilon=+1 n=3 xmin=0 xmax=1\n0 0 0 0 0\n0.5 1 1 1\n");
    CHECK_THROWS_AS(read_potential(bad1), InputError);
    std::istringstream bad2("# manakov-potential epsilon=+1 n=3 xmin=0 xmax=1\n0 0 0 0 0\n0.6 0 0 0 0\n1 0 0 0 0\n");
    CHECK_THROWS_AS(read_potential(bad2), InputError);
    std::istringstream bad3("# manakov-potential epsilon=2 n=2 xmin=0 xmax=1\n0 0 0 0 0\n1 0 0 0 0\n");
    CHECK_THROWS_AS(read_potential(bad3), InputError);
    std::istringstream bad4("0 0 0 0 0\n");
    CHECK_THROWS_AS(read_potential(bad4), InputError);
}

TEST_CASE("mirrored potential reflects the grid and flips the sign") {
    XGrid g(-2, 3, 11);
    auto p = sample_potential(g, 1, [](double x) { return cplx(x, 1); }, [](double x) { return cplx(0, x * x); });
    const auto m = p.mirrored();
    CHECK(m.grid.x_min() == -3.0);
    CHECK(m.grid.x_max() == 2.0);
    for (std::size_t k = 0; k < m.size(); ++k) {
        CHECK(std::abs(m.u[k] + p.u[p.size() - 1 - k]) == 0.0);
        CHECK(std::abs(m.grid[k] + g[g.size() - 1 - k]) < 1e-14);
    }
}
