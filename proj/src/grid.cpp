#include "manakov/grid.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "manakov/errors.hpp"

namespace manakov {

XGrid::XGrid(double x_min, double x_max, std::size_t n) : x_min_(x_min), x_max_(x_max), n_(n) {
    if (n < 2) throw InputError("XGrid needs at least 2 nodes");
    if (!(x_max > x_min)) throw InputError("XGrid needs x_max > x_min");
    h_ = (x_max - x_min) / double(n - 1);
}

std::vector<double> XGrid::nodes() const {
    std::vector<double> x(n_);
    for (std::size_t k = 0; k < n_; ++k) x[k] = (*this)[k];
    return x;
}

LambdaGrid::LambdaGrid(double lambda_max, std::size_t n) : lambda_max_(lambda_max), n_(n) {
    if (n < 4) throw InputError("LambdaGrid needs at least 4 nodes");
    if (!(lambda_max > 0.0)) throw InputError("LambdaGrid needs lambda_max > 0");
    d_ = 2.0 * lambda_max / double(n - 1);
}

std::vector<double> LambdaGrid::nodes() const {
    std::vector<double> x(n_);
    for (std::size_t k = 0; k < n_; ++k) x[k] = (*this)[k];
    return x;
}

namespace {

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

}  // namespace

GridPotential::GridPotential(XGrid g, std::vector<cplx> u_, std::vector<cplx> v_, int eps)
    : grid(g), u(std::move(u_)), v(std::move(v_)), epsilon(eps) {
    if (eps != 1 && eps != -1) throw InputError("epsilon must be +1 or -1");
    if (u.size() != grid.size() || v.size() != grid.size())
        throw InputError("potential sample count does not match grid");
    for (std::size_t k = 0; k < u.size(); ++k)
        if (!finite(u[k]) || !finite(v[k])) throw InputError("non-finite potential sample");
}

double GridPotential::l1_norm_from(std::size_t k0) const {
    const std::size_t n = size();
    if (k0 + 1 >= n) return 0.0;
    double s = 0.0;
    for (std::size_t k = k0; k + 1 < n; ++k) {
        const double a = std::sqrt(std::norm(u[k]) + std::norm(v[k]));
        const double b = std::sqrt(std::norm(u[k + 1]) + std::norm(v[k + 1]));
        s += 0.5 * (a + b);
    }
    return s * grid.spacing();
}

double GridPotential::l1_norm_until(std::size_t k1) const {
    double s = 0.0;
    for (std::size_t k = 0; k < k1 && k + 1 < size(); ++k) {
        const double a = std::sqrt(std::norm(u[k]) + std::norm(v[k]));
        const double b = std::sqrt(std::norm(u[k + 1]) + std::norm(v[k + 1]));
        s += 0.5 * (a + b);
    }
    return s * grid.spacing();
}

GridPotential GridPotential::decimated() const {
    if (size() % 2 == 0 || size() < 3) throw InputError("decimation needs an odd node count");
    std::vector<cplx> cu, cv;
    for (std::size_t k = 0; k < size(); k += 2) {
        cu.push_back(u[k]);
        cv.push_back(v[k]);
    }
    const XGrid g(grid.x_min(), grid.x_max(), cu.size());
    return GridPotential(g, std::move(cu), std::move(cv), epsilon);
}

GridPotential GridPotential::mirrored() const {
    const std::size_t n = size();
    std::vector<cplx> mu(n), mv(n);
    for (std::size_t k = 0; k < n; ++k) {
        mu[k] = -u[n - 1 - k];
        mv[k] = -v[n - 1 - k];
    }
    return GridPotential(XGrid(-grid.x_max(), -grid.x_min(), n), std::move(mu), std::move(mv),
                         epsilon);
}

GridPotential GridPotential::cut(double x_lo, double x_hi) const {
    GridPotential r = *this;
    const double tol = 1e-12 * grid.spacing();
    for (std::size_t k = 0; k < size(); ++k) {
        const double x = grid[k];
        if (x < x_lo - tol || x > x_hi + tol) r.u[k] = r.v[k] = 0.0;
    }
    return r;
}

namespace {

void check_uniform(std::span<const double> x) {
    if (x.size() < 3) throw InputError("Sobolev norm needs at least 3 nodes");
    const double h = x[1] - x[0];
    if (!(h > 0.0)) throw InputError("grid must be strictly increasing");
    for (std::size_t k = 1; k < x.size(); ++k)
        if (std::abs((x[k] - x[k - 1]) - h) > 1e-6 * h)
            throw InputError("non-uniform grid rejected");
}

std::vector<cplx> derivative(std::span<const cplx> f, double h) {
    const std::size_t n = f.size();
    std::vector<cplx> d(n);
    for (std::size_t k = 1; k + 1 < n; ++k) {
        if (k >= 2 && k + 2 < n)
            d[k] = (8.0 * (f[k + 1] - f[k - 1]) - (f[k + 2] - f[k - 2])) / (12.0 * h);
        else
            d[k] = (f[k + 1] - f[k - 1]) / (2.0 * h);
    }
    // second-order one-sided stencils at both ends
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    return d;
}

double trapezoid_sq(std::span<const cplx> f, double h) {
    double s = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) {
        const double w = (k == 0 || k + 1 == f.size()) ? 0.5 : 1.0;
        s += w * std::norm(f[k]);
    }
    return s * h;
}

}  // namespace

double h_ij_norm(std::span<const cplx> f, std::span<const double> x, int i, int j) {
    if (i < 0 || i > 2) throw InputError("h_ij_norm: derivative order must be 0, 1 or 2");
    if (j < 0 || j > 2) throw InputError("h_ij_norm: weight power must be 0, 1 or 2");
    if (f.size() != x.size()) throw InputError("h_ij_norm: size mismatch");
    for (const auto& z : f)
        if (!finite(z)) throw InputError("h_ij_norm: non-finite sample");
    check_uniform(x);
    const double h = x[1] - x[0];

    std::vector<cplx> fd(f.begin(), f.end());
    for (int k = 0; k < i; ++k) fd = derivative(fd, h);
    std::vector<cplx> fw(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) fw[k] = std::pow(x[k], j) * f[k];

    double s = trapezoid_sq(fd, h);
    if (i != 0 || j != 0) s += trapezoid_sq(fw, h);
    return std::sqrt(s);
}

double h_ij_norm(std::span<const cplx> f, const XGrid& grid, int i, int j) {
    const auto x = grid.nodes();
    return h_ij_norm(f, x, i, j);
}

SobolevReport sobolev_report(std::span<const cplx> f, std::span<const double> x, int i, int j) {
    SobolevReport r;
    r.i = i;
    r.j = j;
    r.norm_value = h_ij_norm(f, x, i, j);
    std::vector<cplx> fh;
    std::vector<double> xh;
    for (std::size_t k = 0; k < f.size(); k += 2) {
        fh.push_back(f[k]);
        xh.push_back(x[k]);
    }
    const double coarse = h_ij_norm(fh, xh, i, j);
    r.refinement_ratio = coarse > 0.0 ? r.norm_value / coarse : 1.0;
    return r;
}

void write_potential(std::ostream& os, const GridPotential& p) {
    os << "# manakov-potential epsilon=" << (p.epsilon > 0 ? "+1" : "-1") << " n=" << p.size()
       << std::setprecision(17) << " xmin=" << p.grid.x_min() << " xmax=" << p.grid.x_max()
       << "\n";
    for (std::size_t k = 0; k < p.size(); ++k)
        os << p.grid[k] << ' ' << p.u[k].real() << ' ' << p.u[k].imag() << ' ' << p.v[k].real()
           << ' ' << p.v[k].imag() << '\n';
}

namespace {

/// Parse "key=value" fields of a header line following the magic token.
std::string header_field(const std::string& line, const std::string& key) {
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) {
        if (tok.rfind(key + "=", 0) == 0) return tok.substr(key.size() + 1);
    }
    throw InputError("header is missing field '" + key + "'");
}

double parse_double(const std::string& s) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(s, &pos);
        if (pos != s.size()) throw InputError("bad number '" + s + "'");
        return d;
    } catch (const std::logic_error&) {
        throw InputError("bad number '" + s + "'");
    }
}

long parse_long(const std::string& s) {
    try {
        std::size_t pos = 0;
        const long d = std::stol(s, &pos);
        if (pos != s.size()) throw InputError("bad integer '" + s + "'");
        return d;
    } catch (const std::logic_error&) {
        throw InputError("bad integer '" + s + "'");
    }
}

}  // namespace

GridPotential read_potential(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("# manakov-potential", 0) != 0)
        throw InputError("missing '# manakov-potential' header");
    const int eps = int(parse_long(header_field(line, "epsilon")));
    const long n = parse_long(header_field(line, "n"));
    const double xmin = parse_double(header_field(line, "xmin"));
    const double xmax = parse_double(header_field(line, "xmax"));
    if (n < 2) throw InputError("potential file needs n >= 2");
    XGrid g(xmin, xmax, std::size_t(n));
    std::vector<cplx> u, v;
    u.reserve(n);
    v.reserve(n);
    while (long(u.size()) < n && std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        double x, ur, ui, vr, vi;
        if (!(row >> x >> ur >> ui >> vr >> vi)) throw InputError("malformed potential row: " + line);
        const std::size_t k = u.size();
        if (std::abs(x - g[k]) > 1e-9 * std::max(1.0, std::abs(g[k])))
            throw InputError("potential rows are not on the uniform grid declared in the header");
        u.emplace_back(ur, ui);
        v.emplace_back(vr, vi);
    }
    if (long(u.size()) != n) throw InputError("potential file has fewer rows than declared");
    return GridPotential(g, std::move(u), std::move(v), eps);
}

void write_file_atomically(const std::string& path, const std::string& contents) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw InputError("cannot open '" + tmp + "' for writing");
        os << contents;
        if (!os) throw InputError("write to '" + tmp + "' failed");
    }
    std::filesystem::rename(tmp, path);
}

void write_potential_file(const std::string& path, const GridPotential& p,
                          const std::string& trailer) {
    std::ostringstream os;
    write_potential(os, p);
    os << trailer;
    write_file_atomically(path, os.str());
}

GridPotential read_potential_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InputError("cannot open '" + path + "'");
    return read_potential(is);
}

}  // namespace manakov
