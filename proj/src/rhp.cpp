#include "manakov/rhp.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <unsupported/Eigen/IterativeSolvers>

#include <mutex>
#include <numbers>
#include <thread>

#include "manakov/errors.hpp"

namespace manakov {
class SieOperator;
}

namespace Eigen::internal {
template <>
struct traits<manakov::SieOperator> : public traits<SparseMatrix<std::complex<double>>> {};
}  // namespace Eigen::internal

namespace manakov {

/// Matrix-free (I - C_W) for Eigen's iterative solvers.
class SieOperator : public Eigen::EigenBase<SieOperator> {
public:
    using Scalar = cplx;
    using RealScalar = double;
    using StorageIndex = int;
    enum { ColsAtCompileTime = Eigen::Dynamic, MaxColsAtCompileTime = Eigen::Dynamic, IsRowMajor = false };

    explicit SieOperator(const ContourRHP& rhp) : rhp_(&rhp) {}
    Eigen::Index rows() const { return Eigen::Index(3 * rhp_->op->size()); }
    Eigen::Index cols() const { return rows(); }

    template <typename Rhs>
    Eigen::Product<SieOperator, Rhs, Eigen::AliasFreeProduct> operator*(const Eigen::MatrixBase<Rhs>& x) const {
        return Eigen::Product<SieOperator, Rhs, Eigen::AliasFreeProduct>(*this, x.derived());
    }

    const ContourRHP& rhp() const { return *rhp_; }

private:
    const ContourRHP* rhp_;
};

}  // namespace manakov

namespace Eigen::internal {
template <typename Rhs>
struct generic_product_impl<manakov::SieOperator, Rhs, SparseShape, DenseShape, GemvProduct>
    : generic_product_impl_base<manakov::SieOperator, Rhs, generic_product_impl<manakov::SieOperator, Rhs>> {
    using Scalar = typename Product<manakov::SieOperator, Rhs>::Scalar;

    template <typename Dest>
    static void scaleAndAddTo(Dest& dst, const manakov::SieOperator& lhs, const Rhs& rhs, const Scalar& alpha) {
        const Eigen::VectorXcd x = rhs;
        const auto y = manakov::apply_sie(lhs.rhp(), std::span<const manakov::cplx>(x.data(), std::size_t(x.size())));
        for (Eigen::Index k = 0; k < x.size(); ++k) dst(k) += alpha * y[std::size_t(k)];
    }
};
}  // namespace Eigen::internal

namespace manakov {

namespace {
constexpr double kPi = std::numbers::pi;
}

std::vector<Circle> soliton_circles(const DiscreteSpectrum& ds, std::size_t nodes) {
    std::vector<Circle> out;
    const auto& z = ds.eigenvalues;
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (!(z[i].imag() > 0.0)) throw CaseViolation("eigenvalue not in the open upper half plane");
        double d = z[i].imag();
        for (std::size_t j = 0; j < z.size(); ++j)
            if (j != i) d = std::min(d, 0.5 * std::abs(z[i] - z[j]));
        const double r = std::min(0.5 * d, 0.5);
        if (!(r > 1e-6)) throw CaseViolation("eigenvalues too close to each other for disjoint circles");
        out.push_back(Circle{z[i], r, -1, nodes});
    }
    for (std::size_t i = 0; i < z.size(); ++i) {
        Circle c = out[i];
        c.center = std::conj(c.center);
        c.orientation = 1;
        out.push_back(c);
    }
    return out;
}

std::shared_ptr<LineCirclesCauchy> make_contour(const ScatteringData& data, std::size_t circle_nodes) {
    return std::make_shared<LineCirclesCauchy>(data.grid, soliton_circles(data.discrete, circle_nodes));
}

namespace {

using Vec2 = std::array<cplx, 2>;

// Residue condition at an eigenvalue z in the upper half plane. Unflipped: column 1 has a pole
// with residue e^{2izx} (M_2, M_3) a. Flipped: columns 2, 3 have poles with residue
// e^{-2izx} M_1 a^T (a used as a row).
struct PoleCondition {
    cplx z;
    Vec2 a;
    bool flipped = false;
};

// Right factor blockdiag(b, I + (1/b - 1) n n^dagger), b = (l - z)/(l - z*), that moves a pole
// of column 1 at z onto the direction n of columns 2, 3. Unitary on the real line.
struct Blaschke {
    cplx z;
    Vec2 n;

    cplx b(cplx l) const { return (l - z) / (l - std::conj(z)); }
    // P^{-1} a = a + (b - 1) n (n^dagger a)
    Vec2 pinv(cplx l, const Vec2& a) const {
        const cplx f = (b(l) - 1.0) * (std::conj(n[0]) * a[0] + std::conj(n[1]) * a[1]);
        return {a[0] + f * n[0], a[1] + f * n[1]};
    }
    // r P = r + (1/b - 1) (r n) n^dagger for a row r
    Vec2 rowp(cplx l, const Vec2& r) const {
        const cplx f = (1.0 / b(l) - 1.0) * (r[0] * n[0] + r[1] * n[1]);
        return {r[0] + f * std::conj(n[0]), r[1] + f * std::conj(n[1])};
    }
    // column-1 vector a -> b P^{-1} a; row-1 vector r -> r P / b
    Vec2 lower(cplx l, const Vec2& a) const {
        const Vec2 q = pinv(l, a);
        const cplx bb = b(l);
        return {bb * q[0], bb * q[1]};
    }
    Vec2 upper(cplx l, const Vec2& r) const {
        const Vec2 q = rowp(l, r);
        const cplx bb = b(l);
        return {q[0] / bb, q[1] / bb};
    }
};

}  // namespace

JumpFactors build_jump_factors(const ScatteringData& data, const LineCirclesCauchy& contour, double x,
                               bool allow_flip) {
    const std::size_t n = contour.size(), nl = contour.line_size();
    const double eps = data.epsilon;
    JumpFactors j{std::vector<Complex3x3>(n), std::vector<Complex3x3>(n)};
    const auto& nodes = contour.nodes();
    const std::size_t ne = data.discrete.size();

    // Residue conditions whose exponential e^{2izx} C is large (x left of the soliton) are
    // flipped one at a time; each flip conjugates the remaining data by its Blaschke factor.
    std::vector<PoleCondition> poles(ne);
    std::vector<Blaschke> flips;
    for (std::size_t i = 0; i < ne; ++i) poles[i] = {data.discrete.eigenvalues[i], data.discrete.norming[i], false};
    for (std::size_t i = 0; allow_flip && i < ne; ++i) {
        auto& p = poles[i];
        const double eta = p.z.imag();
        const double mag = std::hypot(std::abs(p.a[0]), std::abs(p.a[1]));
        if (!(mag * std::exp(-2.0 * eta * x) > 2.0 * eta)) continue;
        const Blaschke B{p.z, {p.a[0] / mag, p.a[1] / mag}};
        const cplx d = (p.z - std::conj(p.z)) * (p.z - std::conj(p.z)) / (mag * mag);
        p.a = {d * std::conj(p.a[0]), d * std::conj(p.a[1])};
        p.flipped = true;
        for (std::size_t q = 0; q < ne; ++q)
            if (q != i) poles[q].a = poles[q].flipped ? B.upper(poles[q].z, poles[q].a) : B.lower(poles[q].z, poles[q].a);
        flips.push_back(B);
    }

    for (std::size_t k = 0; k < nl; ++k) {
        const double l = data.grid[k];
        const cplx e = std::exp(2.0 * kI * l * x);
        Vec2 lo{data.rho1[k] * e, data.rho2[k] * e};
        Vec2 up{eps * std::conj(lo[0]), eps * std::conj(lo[1])};
        for (const auto& B : flips) {
            lo = B.lower(l, lo);
            up = B.upper(l, up);
        }
        j.w_plus[k](1, 0) = lo[0];
        j.w_plus[k](2, 0) = lo[1];
        j.w_minus[k](0, 1) = up[0];
        j.w_minus[k](0, 2) = up[1];
    }
    std::size_t k = nl;
    for (std::size_t c = 0; c < contour.circles().size(); ++c) {
        const auto& circ = contour.circles()[c];
        const auto& p = poles[c % ne];
        const cplx z = p.z;
        for (std::size_t q = 0; q < circ.m; ++q, ++k) {
            const cplx l = nodes[k];
            // clockwise circle around z carries W+; its mirror carries W-(l) = eps W+(l*)^dagger
            if (c < ne) {
                if (!p.flipped) {
                    const cplx g = std::exp(2.0 * kI * l * x) / (l - z);
                    j.w_plus[k](1, 0) = p.a[0] * g;
                    j.w_plus[k](2, 0) = p.a[1] * g;
                } else {
                    const cplx g = std::exp(-2.0 * kI * l * x) / (l - z);
                    j.w_plus[k](0, 1) = p.a[0] * g;
                    j.w_plus[k](0, 2) = p.a[1] * g;
                }
            } else {
                if (!p.flipped) {
                    const cplx g = std::exp(-2.0 * kI * l * x) / (l - std::conj(z));
                    j.w_minus[k](0, 1) = eps * std::conj(p.a[0]) * g;
                    j.w_minus[k](0, 2) = eps * std::conj(p.a[1]) * g;
                } else {
                    const cplx g = std::exp(2.0 * kI * l * x) / (l - std::conj(z));
                    j.w_minus[k](1, 0) = eps * std::conj(p.a[0]) * g;
                    j.w_minus[k](2, 0) = eps * std::conj(p.a[1]) * g;
                }
            }
        }
    }
    return j;
}

ContourRHP build_jump(const ScatteringData& data, std::shared_ptr<const LineCirclesCauchy> contour, double x) {
    ContourRHP r;
    r.case_tag = data.discrete.size() ? CaseTag::II : CaseTag::I;
    r.x = x;
    r.jump = build_jump_factors(data, *contour, x, true);
    r.op = std::move(contour);
    return r;
}

ContourRHP build_jump(const ScatteringData& data, double x) { return build_jump(data, make_contour(data), x); }

Complex3x3 reassemble_jump(const Complex3x3& w_plus, const Complex3x3& w_minus) {
    return inverse(Complex3x3::identity() - w_minus) * (Complex3x3::identity() + w_plus);
}

Complex3x3 real_jump(cplx rho1, cplx rho2, int epsilon) {
    const double e = epsilon;
    Complex3x3 v = Complex3x3::identity();
    v(0, 0) = 1.0 + e * (std::norm(rho1) + std::norm(rho2));
    v(0, 1) = e * std::conj(rho1);
    v(0, 2) = e * std::conj(rho2);
    v(1, 0) = rho1;
    v(2, 0) = rho2;
    return v;
}

std::vector<cplx> apply_sie(const ContourRHP& rhp, std::span<const cplx> mu) {
    const std::size_t n = rhp.op->size();
    std::vector<cplx> g(3 * n), h(3 * n), out(3 * n);
    for (std::size_t k = 0; k < n; ++k) {
        const auto& wp = rhp.jump.w_plus[k];
        const auto& wm = rhp.jump.w_minus[k];
        for (int c = 0; c < 3; ++c) {
            cplx sg = 0.0, sh = 0.0;
            for (int i = 0; i < 3; ++i) {
                sg += mu[i * n + k] * wm(i, c);
                sh += mu[i * n + k] * wp(i, c);
            }
            g[c * n + k] = sg;
            h[c * n + k] = sh;
        }
    }
    rhp.op->apply(g, h, 3, out);
    for (std::size_t k = 0; k < 3 * n; ++k) out[k] = mu[k] - out[k];
    return out;
}

BealsCoifmanSolution solve_beals_coifman(const ContourRHP& rhp, int row, const SolverOptions& opt,
                                         const std::vector<cplx>* guess) {
    const std::size_t n = rhp.op->size();
    BealsCoifmanSolution sol;
    sol.row = row;
    sol.mu.assign(3 * n, 0.0);
    for (std::size_t k = 0; k < n; ++k) sol.mu[row * n + k] = 1.0;
    bool trivial = true;
    for (std::size_t k = 0; k < n && trivial; ++k)
        trivial = max_abs(rhp.jump.w_plus[k]) == 0.0 && max_abs(rhp.jump.w_minus[k]) == 0.0;
    if (trivial) return sol;

    Eigen::VectorXcd b = Eigen::VectorXcd::Map(sol.mu.data(), Eigen::Index(3 * n));
    Eigen::VectorXcd x0 = guess && guess->size() == 3 * n ? Eigen::VectorXcd::Map(guess->data(), Eigen::Index(3 * n)) : b;
    SieOperator a(rhp);
    Eigen::GMRES<SieOperator, Eigen::IdentityPreconditioner> gmres;
    gmres.compute(a);
    gmres.setTolerance(opt.tol);
    gmres.setMaxIterations(opt.max_iter);
    gmres.set_restart(opt.restart);
    Eigen::VectorXcd x = gmres.solveWithGuess(b, x0);
    sol.iterations = int(gmres.iterations());
    if (!x.allFinite()) throw NumericalError("GMRES produced non-finite values");
    std::copy(x.data(), x.data() + x.size(), sol.mu.begin());
    const auto r = apply_sie(rhp, sol.mu);
    double num = 0.0;
    for (std::size_t k = 0; k < 3 * n; ++k) num += std::norm(r[k] - b[Eigen::Index(k)]);
    sol.residual_norm = std::sqrt(num / b.squaredNorm());
    if (gmres.info() != Eigen::Success && sol.residual_norm > 10 * opt.tol)
        throw NumericalError("GMRES did not converge: relative residual " + std::to_string(sol.residual_norm) +
                             " after " + std::to_string(sol.iterations) + " iterations");
    return sol;
}

BealsCoifmanSolution solve_beals_coifman_dense(const ContourRHP& rhp, int row) {
    const std::size_t n = rhp.op->size(), m = 3 * n;
    Eigen::MatrixXcd a(m, m);
    std::vector<cplx> e(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        e[j] = 1.0;
        const auto col = apply_sie(rhp, e);
        for (std::size_t i = 0; i < m; ++i) a(Eigen::Index(i), Eigen::Index(j)) = col[i];
        e[j] = 0.0;
    }
    Eigen::VectorXcd b = Eigen::VectorXcd::Zero(Eigen::Index(m));
    b.segment(Eigen::Index(row * n), Eigen::Index(n)).setOnes();
    const Eigen::VectorXcd x = a.partialPivLu().solve(b);
    BealsCoifmanSolution sol;
    sol.row = row;
    sol.mu.assign(x.data(), x.data() + x.size());
    sol.residual_norm = (a * x - b).norm() / b.norm();
    return sol;
}

std::array<cplx, 3> contour_moment(const BealsCoifmanSolution& sol, const ContourRHP& rhp) {
    const std::size_t n = rhp.op->size();
    const auto& w = rhp.op->weights();
    std::array<cplx, 3> m{};
    for (std::size_t k = 0; k < n; ++k) {
        const Complex3x3 ws = rhp.jump.w_plus[k] + rhp.jump.w_minus[k];
        for (int c = 0; c < 3; ++c) {
            cplx s = 0.0;
            for (int i = 0; i < 3; ++i) s += sol.mu[i * n + k] * ws(i, c);
            m[c] += w[k] * s;
        }
    }
    for (auto& v : m) v /= kPi;
    return m;
}

std::array<cplx, 2> reconstruct_potential(const BealsCoifmanSolution& sol, const ContourRHP& rhp) {
    const auto m = contour_moment(sol, rhp);
    if (sol.row == 0) return {-m[1], -m[2]};
    throw InputError("reconstruction uses the first row of mu");
}

ScatteringData left_normalized_data(const TransitionMatrix& tm, int epsilon, double tol_zero) {
    const std::size_t n = tm.T.size();
    ScatteringData d{tm.grid, std::vector<cplx>(n), std::vector<cplx>(n), {}, epsilon};
    for (std::size_t k = 0; k < n; ++k) {
        // mirrored problem at lambda uses T at -lambda (node n-1-k on the symmetric grid)
        const auto& t = tm.T[n - 1 - k];
        if (std::abs(t(0, 0)) < tol_zero) throw CaseViolation("t11 vanishes on the real axis");
        d.rho1[k] = t(1, 0) / t(0, 0);
        d.rho2[k] = t(2, 0) / t(0, 0);
    }
    return d;
}

JumpFactors left_normalized_jump(const TransitionMatrix& tm, int epsilon, double x) {
    std::vector<cplx> r1, r2;
    left_reflection(tm, r1, r2);
    const std::size_t n = r1.size();
    JumpFactors j{std::vector<Complex3x3>(n), std::vector<Complex3x3>(n)};
    for (std::size_t k = 0; k < n; ++k) {
        const cplx e = std::exp(2.0 * kI * tm.grid[k] * x);
        j.w_minus[k](1, 0) = r1[k] * e;
        j.w_minus[k](2, 0) = r2[k] * e;
        j.w_plus[k](0, 1) = double(epsilon) * std::conj(r1[k] * e);
        j.w_plus[k](0, 2) = double(epsilon) * std::conj(r2[k] * e);
    }
    return j;
}

void attach_sobolev_reports(ReconstructedPotential& out) {
    if (out.potential.size() < 5) return;
    const auto xs = out.potential.grid.nodes();
    // Sobolev reports on the vector magnitude proxy: both components combined
    auto report = [&](int i) {
        const auto ru = sobolev_report(out.potential.u, xs, i, 1);
        const auto rv = sobolev_report(out.potential.v, xs, i, 1);
        SobolevReport r;
        r.i = i;
        r.j = 1;
        r.norm_value = std::hypot(ru.norm_value, rv.norm_value);
        const double coarse = std::hypot(ru.norm_value / ru.refinement_ratio, rv.norm_value / rv.refinement_ratio);
        r.refinement_ratio = coarse > 0.0 ? r.norm_value / coarse : 1.0;
        return r;
    };
    out.h11 = report(1);
    out.h21 = report(2);
}

ReconstructedPotential reconstruct_profile(const ScatteringData& data, const XGrid& grid, const ProfileOptions& opt) {
    const std::size_t nx = grid.size();
    std::vector<cplx> u(nx), v(nx);
    std::vector<double> resid(nx, 0.0);
    std::vector<std::string> err(nx);
    auto right = make_contour(data, opt.circle_nodes);
    std::shared_ptr<LineCirclesCauchy> left;
    if (opt.left) left = make_contour(*opt.left, opt.circle_nodes);

    // contiguous chunks so consecutive x reuse the previous solution as initial guess
    auto work = [&](std::size_t begin, std::size_t end) {
        std::vector<cplx> prev_r, prev_l;
        for (std::size_t k = begin; k < end; ++k) {
            const double x = grid[k];
            const bool use_left = opt.left && x < 0.0;
            try {
                const auto rhp = use_left ? build_jump(*opt.left, left, -x) : build_jump(data, right, x);
                auto& prev = use_left ? prev_l : prev_r;
                const auto sol = solve_beals_coifman(rhp, 0, opt.solver, &prev);
                const auto uv = reconstruct_potential(sol, rhp);
                u[k] = use_left ? -uv[0] : uv[0];
                v[k] = use_left ? -uv[1] : uv[1];
                resid[k] = sol.residual_norm;
                prev = sol.mu;
            } catch (const std::exception& e) {
                err[k] = e.what();
            }
        }
    };
    const unsigned nt = std::min<unsigned>(worker_count(), unsigned(nx));
    if (nt <= 1) {
        work(0, nx);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (nx + nt - 1) / nt;
        for (unsigned t = 0; t < nt; ++t)
            pool.emplace_back(work, std::min(nx, t * chunk), std::min(nx, (t + 1) * chunk));
        for (auto& th : pool) th.join();
    }
    ReconstructedPotential out{GridPotential(grid, u, v, data.epsilon), 0.0, {}, {}, {}, {}};
    for (std::size_t k = 0; k < nx; ++k) {
        out.residual_max = std::max(out.residual_max, resid[k]);
        if (!err[k].empty()) {
            out.failed_x.push_back(grid[k]);
            out.failures.push_back(err[k]);
            out.potential.u[k] = out.potential.v[k] = 0.0;
        }
    }
    attach_sobolev_reports(out);
    return out;
}

}  // namespace manakov
