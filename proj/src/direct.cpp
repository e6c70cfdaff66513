#include "manakov/direct.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <numbers>
#include <optional>
#include <sstream>
#include <thread>

#include "manakov/errors.hpp"

namespace manakov {

unsigned worker_count() {
    if (const char* env = std::getenv("MANAKOV_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return unsigned(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

/// lambda-independent part of a cell: midpoint potential and the projector onto
/// span (u*, v*) in the lower 2x2 block.
struct Cell {
    cplx u, v;
    double r2 = 0.0;
    cplx p00, p01, p10, p11;
};

Cell make_cell(cplx u, cplx v) {
    Cell c{u, v, std::norm(u) + std::norm(v), 0.0, 0.0, 0.0, 0.0};
    const double m = std::max(std::abs(u), std::abs(v));
    if (m > 0.0) {
        // scaled so tiny tails do not underflow the projector
        const cplx a = u / m, b = v / m;
        const double inv = 1.0 / (std::norm(a) + std::norm(b));
        c.p00 = std::norm(a) * inv;
        c.p01 = std::conj(a) * b * inv;
        c.p10 = std::conj(b) * a * inv;
        c.p11 = std::norm(b) * inv;
    }
    return c;
}

std::vector<Cell> make_cells(const GridPotential& pot) {
    std::vector<Cell> cells(pot.size() - 1);
    for (std::size_t k = 0; k + 1 < pot.size(); ++k)
        cells[k] = make_cell(0.5 * (pot.u[k] + pot.u[k + 1]), 0.5 * (pot.v[k] + pot.v[k + 1]));
    return cells;
}

/// cosh(kh) and sinh(kh)/k from k^2, even in k so the branch is irrelevant.
template <typename R>
void cosh_sinc(std::complex<R> k2, R h, std::complex<R>& c, std::complex<R>& s) {
    using C = std::complex<R>;
    const C z = k2 * (h * h);
    if (std::abs(z) < 1e-4) {
        c = R(1) + z / R(2) + z * z / R(24) + z * z * z / R(720);
        s = h * (R(1) + z / R(6) + z * z / R(120) + z * z * z / R(5040));
        return;
    }
    const C k = std::sqrt(k2);
    c = std::cosh(k * h);
    s = std::sinh(k * h) / k;
}

Complex3x3 cell_exp(const Cell& cell, cplx lambda, int eps, double h) {
    cplx c, s;
    cosh_sinc(-lambda * lambda - double(eps) * cell.r2, h, c, s);
    const cplx e = std::exp(kI * lambda * h);
    Complex3x3 m;
    m(0, 0) = c - kI * lambda * s;
    m(0, 1) = s * cell.u;
    m(0, 2) = s * cell.v;
    m(1, 0) = -double(eps) * s * std::conj(cell.u);
    m(2, 0) = -double(eps) * s * std::conj(cell.v);
    const cplx g = c + kI * lambda * s - e;
    m(1, 1) = e + g * cell.p00;
    m(1, 2) = g * cell.p01;
    m(2, 1) = g * cell.p10;
    m(2, 2) = e + g * cell.p11;
    return m;
}

// Column-only stepping for complex lambda: forward m-_1, backward m+_2, m+_3.
Vec3 forward_col1(const std::vector<Cell>& cells, const GridPotential& pot, cplx lambda,
                  std::size_t k_end) {
    const double h = pot.grid.spacing();
    const cplx ph = std::exp(kI * lambda * h);
    Vec3 y{1.0, 0.0, 0.0};
    for (std::size_t k = 0; k < k_end; ++k) {
        y = cell_exp(cells[k], lambda, pot.epsilon, h) * y;
        for (auto& e : y) e *= ph;
    }
    return y;
}

void backward_cols23(const std::vector<Cell>& cells, const GridPotential& pot, cplx lambda,
                     std::size_t k_end, Vec3& a, Vec3& b) {
    const double h = pot.grid.spacing();
    const cplx ph = std::exp(kI * lambda * h);
    a = {0.0, 1.0, 0.0};
    b = {0.0, 0.0, 1.0};
    for (std::size_t k = cells.size(); k > k_end; --k) {
        const Complex3x3 e = cell_exp(cells[k - 1], lambda, pot.epsilon, -h);
        a = e * a;
        b = e * b;
        for (auto& x : a) x *= ph;
        for (auto& x : b) x *= ph;
    }
}

bool finite(const Vec3& v) {
    for (const auto& e : v)
        if (!std::isfinite(e.real()) || !std::isfinite(e.imag())) return false;
    return true;
}

}  // namespace

Complex3x3 cell_exponential(cplx lambda, cplx u, cplx v, int epsilon, double h) {
    return cell_exp(make_cell(u, v), lambda, epsilon, h);
}

JostSolution integrate_jost(const GridPotential& pot, cplx lambda, Side side) {
    const auto cells = make_cells(pot);
    const std::size_t n = pot.size();
    const double h = pot.grid.spacing();
    JostSolution js{side, lambda, std::vector<Complex3x3>(n)};
    const bool real = lambda.imag() == 0.0;
    // Off the axis keep only the columns bounded in the relevant half plane.
    std::array<bool, 3> keep{true, true, true};
    const bool upper = lambda.imag() > 0.0;
    if (!real) {
        if (side == Side::minus_infinity) keep = {upper, !upper, !upper};
        else keep = {!upper, upper, upper};
    }
    auto mask = [&](Complex3x3& m) {
        for (int c = 0; c < 3; ++c)
            if (!keep[c])
                for (int r = 0; r < 3; ++r) m(r, c) = 0.0;
    };
    const cplx e1 = std::exp(kI * lambda * h), e2 = std::exp(-kI * lambda * h);
    if (side == Side::minus_infinity) {
        Complex3x3 m = Complex3x3::identity();
        mask(m);
        js.values[0] = m;
        for (std::size_t k = 0; k + 1 < n; ++k) {
            m = cell_exp(cells[k], lambda, pot.epsilon, h) * m;
            for (int r = 0; r < 3; ++r) {
                m(r, 0) *= e1;
                m(r, 1) *= e2;
                m(r, 2) *= e2;
            }
            js.values[k + 1] = m;
        }
    } else {
        Complex3x3 m = Complex3x3::identity();
        mask(m);
        js.values[n - 1] = m;
        for (std::size_t k = n - 1; k > 0; --k) {
            m = cell_exp(cells[k - 1], lambda, pot.epsilon, -h) * m;
            for (int r = 0; r < 3; ++r) {
                m(r, 0) *= e2;
                m(r, 1) *= e1;
                m(r, 2) *= e1;
            }
            js.values[k - 1] = m;
        }
    }
    for (const auto& m : js.values)
        if (!all_finite(m))
            throw NumericalError("Jost stepping overflowed; reduce |Im lambda| or the domain length");
    return js;
}

JostPair jost_at_node(const GridPotential& pot, cplx lambda, std::size_t k) {
    if (k >= pot.size()) throw InputError("node index outside the grid");
    const auto cells = make_cells(pot);
    const double h = pot.grid.spacing();
    JostPair jp;
    if (lambda.imag() > 0.0) {
        const Vec3 a = forward_col1(cells, pot, lambda, k);
        Vec3 b, c;
        backward_cols23(cells, pot, lambda, k, b, c);
        if (!finite(a) || !finite(b) || !finite(c)) throw NumericalError("Jost stepping overflowed");
        for (int r = 0; r < 3; ++r) {
            jp.minus(r, 0) = a[r];
            jp.plus(r, 1) = b[r];
            jp.plus(r, 2) = c[r];
        }
        return jp;
    }
    if (lambda.imag() < 0.0) throw InputError("jost_at_node supports the closed upper half plane");
    const cplx e1 = std::exp(kI * lambda * h), e2 = std::exp(-kI * lambda * h);
    Complex3x3 m = Complex3x3::identity();
    for (std::size_t j = 0; j < k; ++j) {
        m = cell_exp(cells[j], lambda, pot.epsilon, h) * m;
        for (int r = 0; r < 3; ++r) {
            m(r, 0) *= e1;
            m(r, 1) *= e2;
            m(r, 2) *= e2;
        }
    }
    jp.minus = m;
    m = Complex3x3::identity();
    for (std::size_t j = cells.size(); j > k; --j) {
        m = cell_exp(cells[j - 1], lambda, pot.epsilon, -h) * m;
        for (int r = 0; r < 3; ++r) {
            m(r, 0) *= e2;
            m(r, 1) *= e1;
            m(r, 2) *= e1;
        }
    }
    jp.plus = m;
    return jp;
}

namespace {

// On the real line S is J-unitary but unbounded, so double roundoff in the running product
// grows like N eps |S|^2; the product is carried in extended precision.
using xcplx = std::complex<long double>;
using X3 = std::array<xcplx, 9>;

/// Real lambda: k^2 = -lambda^2 - eps |U|^2 is real, so cosh(kh) and sinh(kh)/k are real.
X3 cell_exp_ext(const Cell& cell, long double lambda, int eps, long double h, xcplx e) {
    const xcplx u(cell.u), v(cell.v);
    const long double r2 = std::norm(u) + std::norm(v);
    const long double k2 = -lambda * lambda - eps * r2, z = k2 * h * h;
    long double c, s;
    if (std::abs(z) < 1e-4L) {
        c = 1 + z / 2 + z * z / 24 + z * z * z / 720;
        s = h * (1 + z / 6 + z * z / 120 + z * z * z / 5040);
    } else if (k2 > 0) {
        const long double k = std::sqrt(k2);
        c = std::cosh(k * h);
        s = std::sinh(k * h) / k;
    } else {
        const long double k = std::sqrt(-k2);
        c = std::cos(k * h);
        s = std::sin(k * h) / k;
    }
    const xcplx g = (xcplx(c, lambda * s) - e) / r2;
    const long double fe = -eps;
    return {xcplx(c, -lambda * s),  s * u,                    s * v,
            fe * s * std::conj(u), e + g * std::conj(u) * u, g * std::conj(u) * v,
            fe * s * std::conj(v), g * std::conj(v) * u,     e + g * std::conj(v) * v};
}

void rotate_ext(X3& m, xcplx t) {
    const xcplx up = std::exp(2.0L * t), dn = std::exp(-2.0L * t);
    m[1] *= dn;
    m[2] *= dn;
    m[3] *= up;
    m[6] *= up;
}

X3 transition_ext(const std::vector<Cell>& cells, const GridPotential& pot, double lambda) {
    const long double h = pot.grid.spacing(), l = lambda;
    const xcplx e1 = std::exp(xcplx(0.0L, l * h)), e2 = std::conj(e1);
    X3 m{1.0L, 0.0L, 0.0L, 0.0L, 1.0L, 0.0L, 0.0L, 0.0L, 1.0L};
    // a run of empty cells only rotates the off-diagonal blocks; applied in one go so U = 0 gives S = I exactly
    std::size_t idle = 0;
    for (const auto& cell : cells) {
        if (cell.r2 == 0.0) {
            ++idle;
            continue;
        }
        if (idle) rotate_ext(m, xcplx(0.0L, l * h * idle)), idle = 0;
        const X3 e = cell_exp_ext(cell, l, pot.epsilon, h, e1);
        X3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                long double re = 0, im = 0;
                for (int q = 0; q < 3; ++q) {
                    const xcplx x = e[3 * i + q], y = m[3 * q + j];
                    re += x.real() * y.real() - x.imag() * y.imag();
                    im += x.real() * y.imag() + x.imag() * y.real();
                }
                const xcplx ph = j == 0 ? e1 : e2;
                r[3 * i + j] = xcplx(re * ph.real() - im * ph.imag(), re * ph.imag() + im * ph.real());
            }
        m = r;
    }
    if (idle) rotate_ext(m, xcplx(0.0L, l * h * idle));
    rotate_ext(m, xcplx(0.0L, -l * (long double)pot.grid.x_max()));
    return m;
}

Complex3x3 narrow(const X3& m) {
    Complex3x3 out;
    for (int k = 0; k < 9; ++k) out.a[k] = cplx(m[k]);
    return out;
}

/// Cofactor inverse, also in extended precision: T has the same |S|^2 sensitivity.
X3 inverse_ext(const X3& m) {
    auto at = [&](int r, int c) { return m[3 * r + c]; };
    X3 cof;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
            const int r1 = (r + 1) % 3, r2 = (r + 2) % 3, c1 = (c + 1) % 3, c2 = (c + 2) % 3;
            cof[3 * c + r] = at(r1, c1) * at(r2, c2) - at(r1, c2) * at(r2, c1);
        }
    const xcplx d = at(0, 0) * cof[0] + at(0, 1) * cof[3] + at(0, 2) * cof[6];
    for (auto& e : cof) e /= d;
    return cof;
}

}  // namespace

Complex3x3 transition_at(const GridPotential& pot, double lambda) {
    return narrow(transition_ext(make_cells(pot), pot, lambda));
}

TransitionMatrix compute_transition_matrix(const GridPotential& pot, const LambdaGrid& grid) {
    const auto cells = make_cells(pot);
    TransitionMatrix tm{grid, std::vector<Complex3x3>(grid.size()), std::vector<Complex3x3>(grid.size())};
    auto work = [&](std::size_t begin, std::size_t stride) {
        for (std::size_t k = begin; k < grid.size(); k += stride) {
            const X3 s = transition_ext(cells, pot, grid[k]);
            tm.S[k] = narrow(s);
            tm.T[k] = narrow(inverse_ext(s));
        }
    };
    const unsigned nt = std::min<unsigned>(worker_count(), unsigned(grid.size()));
    if (nt <= 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < nt; ++t) pool.emplace_back(work, t, nt);
        for (auto& th : pool) th.join();
    }
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (!all_finite(tm.S[k])) throw NumericalError("non-finite transition matrix");
        if (std::abs(det(tm.S[k]) - 1.0) > 1e-6)
            throw NumericalError("transition matrix is numerically singular (det S far from 1)");
    }
    return tm;
}

UnitarityReport check_unitarity(const TransitionMatrix& tm, int epsilon) {
    UnitarityReport r;
    for (const auto& s : tm.S) {
        const double q = std::norm(s(0, 0)) + epsilon * (std::norm(s(1, 0)) + std::norm(s(2, 0)));
        r.unitarity = std::max(r.unitarity, std::abs(q - 1.0));
        r.det = std::max(r.det, std::abs(det(s) - 1.0));
    }
    return r;
}

double SymmetryReport::max() const { return *std::max_element(entry.begin(), entry.end()); }

SymmetryReport verify_symmetries(const TransitionMatrix& tm, int epsilon) {
    SymmetryReport r;
    for (std::size_t k = 0; k < tm.S.size(); ++k) {
        const auto& s = tm.S[k];
        const auto& t = tm.T[k];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const double f = ((i == 0) != (j == 0)) ? double(epsilon) : 1.0;
                r.entry[3 * i + j] = std::max(r.entry[3 * i + j], std::abs(s(i, j) - f * std::conj(t(j, i))));
            }
    }
    return r;
}

cplx s11_analytic(const GridPotential& pot, cplx lambda) {
    if (lambda.imag() < 0.0) throw InputError("s11 is analytic only in the closed upper half plane");
    const auto cells = make_cells(pot);
    const std::size_t km = cells.size() / 2;
    const Vec3 a = forward_col1(cells, pot, lambda, km);
    Vec3 b, c;
    backward_cols23(cells, pot, lambda, km, b, c);
    if (!finite(a) || !finite(b) || !finite(c)) throw NumericalError("s11 evaluation overflowed");
    return det_columns(a, b, c);
}

namespace {

class S11Eval {
public:
    explicit S11Eval(const GridPotential& pot) : pot_(pot), cells_(make_cells(pot)), km_(cells_.size() / 2) {}

    cplx operator()(cplx z) const {
        const Vec3 a = forward_col1(cells_, pot_, z, km_);
        Vec3 b, c;
        backward_cols23(cells_, pot_, z, km_, b, c);
        if (!finite(a) || !finite(b) || !finite(c)) throw NumericalError("s11 evaluation overflowed");
        return det_columns(a, b, c);
    }

    cplx derivative(cplx z) const {
        const double h = 1e-3;
        const auto& f = *this;
        return (8.0 * (f(z + h) - f(z - h)) - (f(z + 2.0 * h) - f(z - 2.0 * h))) / (12.0 * h);
    }

    const GridPotential& pot() const { return pot_; }
    const std::vector<Cell>& cells() const { return cells_; }
    std::size_t km() const { return km_; }

private:
    const GridPotential& pot_;
    std::vector<Cell> cells_;
    std::size_t km_;
};

double arg_step(cplx a, cplx b) { return std::arg(b / a); }

/// Accumulated argument change of f along the segment [a, b].
double segment_arg(const S11Eval& f, cplx a, cplx fa, cplx b, cplx fb, int depth) {
    const double d = arg_step(fa, fb);
    if ((std::abs(d) < 0.4 && depth > 0) || depth > 40) return d;
    const cplx m = 0.5 * (a + b);
    const cplx fm = f(m);
    return segment_arg(f, a, fa, m, fm, depth + 1) + segment_arg(f, m, fm, b, fb, depth + 1);
}

int winding(const S11Eval& f, const SpectralRect& r) {
    const std::array<cplx, 4> c{cplx(r.re_lo, r.im_lo), cplx(r.re_hi, r.im_lo), cplx(r.re_hi, r.im_hi),
                                cplx(r.re_lo, r.im_hi)};
    double total = 0.0;
    for (int e = 0; e < 4; ++e) {
        const cplx a = c[e], b = c[(e + 1) % 4];
        // initial pieces so that no single piece is longer than 0.25
        const int pieces = std::max(4, int(std::ceil(std::abs(b - a) / 0.25)));
        cplx prev = a, fprev = f(a);
        for (int p = 1; p <= pieces; ++p) {
            const cplx q = a + (b - a) * (double(p) / pieces);
            const cplx fq = f(q);
            total += segment_arg(f, prev, fprev, q, fq, 0);
            prev = q;
            fprev = fq;
        }
    }
    return int(std::lround(total / (2.0 * std::numbers::pi)));
}

bool inside(const SpectralRect& r, cplx z) {
    return z.real() >= r.re_lo && z.real() <= r.re_hi && z.imag() >= r.im_lo && z.imag() <= r.im_hi;
}

bool newton(const S11Eval& f, cplx& z, const SpectrumOptions& opt) {
    for (int it = 0; it < opt.newton_max_iter; ++it) {
        if (!(z.imag() > 0.0)) return false;
        cplx dz;
        try {
            dz = f(z) / f.derivative(z);
        } catch (const NumericalError&) {
            return false;
        }
        z -= dz;
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
        if (std::abs(dz) < opt.newton_tol * std::max(1.0, std::abs(z))) return true;
    }
    return false;
}

void search(const S11Eval& f, const SpectralRect& r, int w, const SpectrumOptions& opt,
            std::vector<cplx>& zeros) {
    if (w == 0) return;
    const double size = std::max(r.re_hi - r.re_lo, r.im_hi - r.im_lo);
    if (w == 1) {
        cplx z(0.5 * (r.re_lo + r.re_hi), 0.5 * (r.im_lo + r.im_hi));
        if (newton(f, z, opt) && inside(r, z)) {
            zeros.push_back(z);
            return;
        }
        if (size < opt.min_rect) throw NumericalError("Newton iteration failed to converge inside a winding-1 cell");
    } else if (size < opt.min_rect) {
        throw CaseViolation("s11 has a multiple zero near " +
                            std::to_string(0.5 * (r.re_lo + r.re_hi)) + "+" +
                            std::to_string(0.5 * (r.im_lo + r.im_hi)) + "i");
    }
    // off-centre split so that symmetric zeros do not land on the new edges
    const double xs = r.re_lo + 0.4871 * (r.re_hi - r.re_lo);
    const double ys = r.im_lo + 0.5127 * (r.im_hi - r.im_lo);
    const std::array<SpectralRect, 4> sub{SpectralRect{r.re_lo, xs, r.im_lo, ys}, SpectralRect{xs, r.re_hi, r.im_lo, ys},
                                          SpectralRect{r.re_lo, xs, ys, r.im_hi}, SpectralRect{xs, r.re_hi, ys, r.im_hi}};
    int sum = 0;
    std::array<int, 4> ws{};
    for (int q = 0; q < 4; ++q) sum += ws[q] = winding(f, sub[q]);
    if (sum != w) throw NumericalError("inconsistent winding numbers during zero search");
    for (int q = 0; q < 4; ++q) search(f, sub[q], ws[q], opt, zeros);
}

std::array<cplx, 2> norming_from(const S11Eval& f, cplx z) {
    const auto& pot = f.pot();
    const std::size_t km = f.km();
    const Vec3 a = forward_col1(f.cells(), pot, z, km);
    Vec3 b, c;
    backward_cols23(f.cells(), pot, z, km, b, c);
    // least squares [b c] y = a
    cplx g00 = 0.0, g01 = 0.0, g11 = 0.0, r0 = 0.0, r1 = 0.0;
    for (int i = 0; i < 3; ++i) {
        g00 += std::conj(b[i]) * b[i];
        g01 += std::conj(b[i]) * c[i];
        g11 += std::conj(c[i]) * c[i];
        r0 += std::conj(b[i]) * a[i];
        r1 += std::conj(c[i]) * a[i];
    }
    const cplx dt = g00 * g11 - g01 * std::conj(g01);
    const cplx y0 = (g11 * r0 - g01 * r1) / dt;
    const cplx y1 = (g00 * r1 - std::conj(g01) * r0) / dt;
    // m-_1(x) = [m+_2 m+_3](x) e^{2izx} c
    const double x = pot.grid[km];
    const cplx ph = std::exp(-2.0 * kI * z * x);
    const cplx d = f.derivative(z);
    return {y0 * ph / d, y1 * ph / d};
}

}  // namespace

SpectralRect default_region(double lambda_max) { return {-lambda_max, lambda_max, 1e-3, lambda_max}; }

std::array<cplx, 2> norming_constant(const GridPotential& pot, cplx z) {
    S11Eval f(pot);
    return norming_from(f, z);
}

DiscreteSpectrum find_discrete_spectrum(const GridPotential& pot, const SpectralRect& region,
                                        const SpectrumOptions& opt) {
    DiscreteSpectrum ds;
    if (pot.epsilon < 0) return ds;
    if (!(region.im_lo > 0.0) || !(region.re_hi > region.re_lo) || !(region.im_hi > region.im_lo))
        throw InputError("search region must be a nondegenerate rectangle in the open upper half plane");
    S11Eval f(pot);
    std::vector<cplx> zeros;
    search(f, region, winding(f, region), opt, zeros);
    std::sort(zeros.begin(), zeros.end(), [](cplx a, cplx b) {
        return std::abs(a.real() - b.real()) > 1e-9 ? a.real() < b.real() : a.imag() < b.imag();
    });
    const bool extrapolate = opt.richardson && pot.size() % 2 == 1 && pot.size() >= 9;
    std::optional<GridPotential> coarse;
    if (extrapolate) coarse.emplace(pot.decimated());
    for (const cplx z : zeros) {
        auto c = norming_from(f, z);
        cplx zz = z;
        if (coarse) {
            // second-order stepping: combine with the half-resolution answer
            S11Eval fc(*coarse);
            cplx z2 = z;
            if (!newton(fc, z2, opt)) throw NumericalError("Newton failed on the coarse grid");
            const auto c2 = norming_from(fc, z2);
            zz = (4.0 * z - z2) / 3.0;
            for (int i = 0; i < 2; ++i) c[i] = (4.0 * c[i] - c2[i]) / 3.0;
        }
        ds.eigenvalues.push_back(zz);
        ds.norming.push_back(c);
    }
    return ds;
}

double min_abs_s11(const TransitionMatrix& tm) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& s : tm.S) m = std::min(m, std::abs(s(0, 0)));
    return m;
}

ScatteringData reflection_coefficients(const TransitionMatrix& tm, int epsilon, double tol_zero) {
    ScatteringData d{tm.grid, std::vector<cplx>(tm.S.size()), std::vector<cplx>(tm.S.size()), {}, epsilon};
    for (std::size_t k = 0; k < tm.S.size(); ++k) {
        const auto& s = tm.S[k];
        if (std::abs(s(0, 0)) < tol_zero)
            throw CaseViolation("spectral singularity: |s11| = " + std::to_string(std::abs(s(0, 0))) +
                                " at lambda = " + std::to_string(tm.grid[k]));
        d.rho1[k] = s(1, 0) / s(0, 0);
        d.rho2[k] = s(2, 0) / s(0, 0);
    }
    return d;
}

void left_reflection(const TransitionMatrix& tm, std::vector<cplx>& r1, std::vector<cplx>& r2) {
    r1.resize(tm.T.size());
    r2.resize(tm.T.size());
    for (std::size_t k = 0; k < tm.T.size(); ++k) {
        const auto& t = tm.T[k];
        if (std::abs(t(0, 0)) < 1e-12) throw CaseViolation("t11 vanishes on the real axis");
        r1[k] = -t(1, 0) / t(0, 0);
        r2[k] = -t(2, 0) / t(0, 0);
    }
}

void write_scattering(std::ostream& os, const ScatteringData& d, const std::string& extra_header) {
    os << std::setprecision(17) << "# manakov-scattering epsilon=" << (d.epsilon > 0 ? "+1" : "-1")
       << " n=" << d.grid.size() << " lambda_max=" << d.grid.lambda_max()
       << " n_discrete=" << d.discrete.size();
    if (!extra_header.empty()) os << ' ' << extra_header;
    os << '\n';
    for (std::size_t k = 0; k < d.grid.size(); ++k)
        os << d.grid[k] << ' ' << d.rho1[k].real() << ' ' << d.rho1[k].imag() << ' ' << d.rho2[k].real()
           << ' ' << d.rho2[k].imag() << '\n';
    for (std::size_t i = 0; i < d.discrete.size(); ++i) {
        const auto z = d.discrete.eigenvalues[i];
        const auto& c = d.discrete.norming[i];
        os << z.real() << ' ' << z.imag() << ' ' << c[0].real() << ' ' << c[0].imag() << ' '
           << c[1].real() << ' ' << c[1].imag() << '\n';
    }
}

namespace {

std::string field(const std::string& line, const std::string& key) {
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok)
        if (tok.rfind(key + "=", 0) == 0) return tok.substr(key.size() + 1);
    throw InputError("scattering header is missing field '" + key + "'");
}

double to_double(const std::string& s) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos == s.size()) return v;
    } catch (const std::logic_error&) {
    }
    throw InputError("bad number '" + s + "'");
}

bool data_line(std::istream& is, std::string& line) {
    while (std::getline(is, line))
        if (!line.empty() && line[0] != '#') return true;
    return false;
}

}  // namespace

ScatteringData read_scattering(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("# manakov-scattering", 0) != 0)
        throw InputError("missing '# manakov-scattering' header");
    const int eps = int(to_double(field(line, "epsilon")));
    if (eps != 1 && eps != -1) throw InputError("epsilon must be +1 or -1");
    const double nd = to_double(field(line, "n"));
    const double lmax = to_double(field(line, "lambda_max"));
    const double ndisc = to_double(field(line, "n_discrete"));
    if (nd < 4 || nd != std::floor(nd) || ndisc < 0 || ndisc != std::floor(ndisc))
        throw InputError("bad node counts in scattering header");
    LambdaGrid g(lmax, std::size_t(nd));
    ScatteringData d{g, std::vector<cplx>(g.size()), std::vector<cplx>(g.size()), {}, eps};
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!data_line(is, line)) throw InputError("scattering file has fewer rows than declared");
        std::istringstream row(line);
        double l, a, b, c, e;
        if (!(row >> l >> a >> b >> c >> e)) throw InputError("malformed scattering row: " + line);
        if (std::abs(l - g[k]) > 1e-9 * std::max(1.0, std::abs(g[k])))
            throw InputError("scattering rows are not on the declared lambda grid");
        d.rho1[k] = {a, b};
        d.rho2[k] = {c, e};
    }
    for (std::size_t i = 0; i < std::size_t(ndisc); ++i) {
        if (!data_line(is, line)) throw InputError("scattering file has fewer eigenvalue rows than declared");
        std::istringstream row(line);
        double zr, zi, c1r, c1i, c2r, c2i;
        if (!(row >> zr >> zi >> c1r >> c1i >> c2r >> c2i)) throw InputError("malformed eigenvalue row: " + line);
        if (!(zi > 0.0)) throw InputError("eigenvalues must lie in the upper half plane");
        d.discrete.eigenvalues.emplace_back(zr, zi);
        d.discrete.norming.push_back({cplx(c1r, c1i), cplx(c2r, c2i)});
    }
    return d;
}

void write_scattering_file(const std::string& path, const ScatteringData& d, const std::string& extra_header) {
    std::ostringstream os;
    write_scattering(os, d, extra_header);
    write_file_atomically(path, os.str());
}

ScatteringData read_scattering_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InputError("cannot open '" + path + "'");
    return read_scattering(is);
}

}  // namespace manakov
