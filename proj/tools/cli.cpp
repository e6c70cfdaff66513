#include "cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include "manakov/case3.hpp"
#include "manakov/errors.hpp"
#include "manakov/evolution.hpp"
#include "manakov/rhp.hpp"

namespace manakov::cli {

namespace {

struct RunConfig {
    double xmin = std::numeric_limits<double>::quiet_NaN();
    double xmax = std::numeric_limits<double>::quiet_NaN();
    std::size_t nx = 0;
    double lambda_max = 30.0;
    std::size_t nlambda = 2048;
    int epsilon = 0;  // 0: from the input file
    std::string case_override = "auto";
    double tol_zero = 1e-6;
    double tol_residual = 1e-10;
    double tol_matching = 1e-6;
    double max_error = 1e-3;
    std::string flow = "manakov";
    double t = 0.0;
    std::optional<double> kappa;
    std::string out;
    std::string input;
    double s_inf = 0.0;
    double at_x = 0.0;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

/// Result of the direct transform together with the evidence used to classify it.
struct Direct {
    TransitionMatrix tm;
    DiscreteSpectrum ds;
    double min_s11 = 0.0;
    CaseTag tag = CaseTag::I;
    std::string reason;
};

constexpr double kNearReal = 1e-3;

Direct run_direct(const GridPotential& pot, const RunConfig& cfg) {
    Direct d{compute_transition_matrix(pot, LambdaGrid(cfg.lambda_max, cfg.nlambda)), {}, 0.0, CaseTag::I, {}};
    d.min_s11 = min_abs_s11(d.tm);
    if (d.min_s11 < cfg.tol_zero) {
        d.tag = CaseTag::III;
        d.reason = "s11 vanishes on the real axis";
    } else if (pot.epsilon == 1 && cfg.case_override != "I") {
        try {
            d.ds = find_discrete_spectrum(pot, default_region(cfg.lambda_max));
            d.tag = d.ds.size() ? CaseTag::II : CaseTag::I;
        } catch (const CaseViolation& e) {
            d.tag = CaseTag::III;
            d.reason = e.what();
        }
        for (cplx z : d.ds.eigenvalues)
            if (z.imag() < kNearReal) {
                d.tag = CaseTag::III;
                d.reason = "eigenvalue next to the real axis";
            }
    }
    return d;
}

const char* tag_name(CaseTag t) { return t == CaseTag::I ? "I" : t == CaseTag::II ? "II" : "III"; }

GridPotential load_potential(const RunConfig& cfg) {
    auto p = read_potential_file(cfg.input);
    if (cfg.epsilon != 0) p.epsilon = cfg.epsilon;
    return p;
}

ScatteringData load_scattering(const RunConfig& cfg) {
    auto d = read_scattering_file(cfg.input);
    if (cfg.epsilon != 0) d.epsilon = cfg.epsilon;
    return d;
}

XGrid output_grid(const RunConfig& cfg, std::optional<XGrid> fallback) {
    const bool given = !std::isnan(cfg.xmin) || !std::isnan(cfg.xmax) || cfg.nx != 0;
    if (!given && fallback) return *fallback;
    const double lo = std::isnan(cfg.xmin) ? (fallback ? fallback->x_min() : -10.0) : cfg.xmin;
    const double hi = std::isnan(cfg.xmax) ? (fallback ? fallback->x_max() : 10.0) : cfg.xmax;
    const std::size_t n = cfg.nx ? cfg.nx : (fallback ? fallback->size() : 201);
    return XGrid(lo, hi, n);
}

void print_classification(std::ostream& out, const Direct& d) {
    out << "case=" << tag_name(d.tag) << " min_abs_s11=" << d.min_s11 << " eigenvalues=" << d.ds.size();
    if (!d.reason.empty()) out << " reason=\"" << d.reason << '"';
    out << '\n';
}

void print_spectrum(std::ostream& out, const DiscreteSpectrum& ds) {
    for (std::size_t i = 0; i < ds.size(); ++i)
        out << "eigenvalue " << ds.eigenvalues[i].real() << ' ' << ds.eigenvalues[i].imag() << " C1 "
            << ds.norming[i][0].real() << ' ' << ds.norming[i][0].imag() << " C2 " << ds.norming[i][1].real() << ' '
            << ds.norming[i][1].imag() << '\n';
}

std::string trailer(const ReconstructedPotential& r) {
    std::ostringstream os;
    os << std::setprecision(17) << "# residual_max=" << r.residual_max << " h11_norm=" << r.h11.norm_value
       << " h21_norm=" << r.h21.norm_value << '\n';
    for (double x : r.failed_x) os << "# failed_x=" << x << '\n';
    return os.str();
}

void summarize_failures(std::ostream& err, const ReconstructedPotential& r) {
    if (r.failed_x.empty()) return;
    err << "warning: " << r.failed_x.size() << " of " << r.potential.size() << " points failed";
    if (!r.failures.empty()) err << " (first: " << r.failures.front() << ')';
    err << '\n';
}

void check_case(const RunConfig& cfg, CaseTag found) {
    if (cfg.case_override == "auto") return;
    if (cfg.case_override == "I" && found != CaseTag::I)
        throw CaseViolation(std::string("--case I requested but the data are case ") + tag_name(found));
    if (cfg.case_override == "II" && found == CaseTag::III)
        throw CaseViolation("--case II requested but the data are case III");
}

SolverOptions solver(const RunConfig& cfg) {
    SolverOptions s;
    s.tol = cfg.tol_residual;
    return s;
}

// ---- subcommands ----

int cmd_direct(const RunConfig& cfg, std::ostream& out) {
    const auto pot = load_potential(cfg);
    const auto d = run_direct(pot, cfg);
    print_classification(out, d);
    const auto u = check_unitarity(d.tm, pot.epsilon);
    out << "unitarity_residual=" << u.unitarity << " det_deviation=" << u.det << '\n';
    print_spectrum(out, d.ds);
    check_case(cfg, d.tag);
    if (d.tag == CaseTag::III || cfg.case_override == "III")
        throw CaseViolation("case III data are not representable as reflection coefficients; "
                            "use 'roundtrip --case III' or 'diagnose'");
    auto sd = reflection_coefficients(d.tm, pot.epsilon, cfg.tol_zero);
    sd.discrete = d.ds;
    if (!cfg.out.empty()) write_scattering_file(cfg.out, sd);
    return ok;
}

ReconstructedPotential inverse_of(const ScatteringData& sd, const XGrid& grid, const RunConfig& cfg,
                                  std::optional<ScatteringData> left = std::nullopt) {
    ProfileOptions po;
    po.solver = solver(cfg);
    po.left = std::move(left);
    return reconstruct_profile(sd, grid, po);
}

int cmd_inverse(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto sd = load_scattering(cfg);
    const CaseTag tag = sd.discrete.size() ? CaseTag::II : CaseTag::I;
    if (cfg.case_override == "III")
        throw CaseViolation("case III reconstruction needs the potential; use 'roundtrip --case III'");
    check_case(cfg, tag);
    const auto rec = inverse_of(sd, output_grid(cfg, std::nullopt), cfg);
    out << "case=" << tag_name(tag) << " residual_max=" << rec.residual_max << " h11_norm=" << rec.h11.norm_value
        << " h21_norm=" << rec.h21.norm_value << " failed=" << rec.failed_x.size() << '\n';
    summarize_failures(err, rec);
    if (!cfg.out.empty()) write_potential_file(cfg.out, rec.potential, trailer(rec));
    return rec.failed_x.empty() ? ok : numerical_failure;
}

/// Input sampled on the output grid by linear interpolation (zero outside).
GridPotential resample(const GridPotential& p, const XGrid& g) {
    std::vector<cplx> u(g.size()), v(g.size());
    const double h = p.grid.spacing();
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double s = (g[k] - p.grid.x_min()) / h;
        if (s < -1e-9 || s > double(p.size() - 1) + 1e-9) continue;
        const std::size_t j = std::min(std::size_t(std::max(0.0, std::floor(s))), p.size() - 2);
        const double w = std::clamp(s - double(j), 0.0, 1.0);
        u[k] = (1 - w) * p.u[j] + w * p.u[j + 1];
        v[k] = (1 - w) * p.v[j] + w * p.v[j + 1];
    }
    return GridPotential(g, std::move(u), std::move(v), p.epsilon);
}

double combined_norm(const GridPotential& p, int i, int j) {
    return std::hypot(h_ij_norm(p.u, p.grid, i, j), h_ij_norm(p.v, p.grid, i, j));
}

int cmd_roundtrip(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto pot = load_potential(cfg);
    const XGrid grid = output_grid(cfg, pot.grid);
    auto t0 = Clock::now();
    const auto d = run_direct(pot, cfg);
    const double t_direct = seconds_since(t0);
    print_classification(out, d);
    check_case(cfg, d.tag);

    const bool case3 = d.tag == CaseTag::III || cfg.case_override == "III";
    t0 = Clock::now();
    auto reconstruct = [&]() -> ReconstructedPotential {
        if (case3) {
            Case3Options o;
            o.solver = solver(cfg);
            o.tol_zero = cfg.tol_zero;
            o.S_inf = cfg.s_inf;
            const auto r = solve_case3(pot, grid, o);
            const double m = std::max(r.matching_right.max(), r.matching_left.max());
            out << "case3 x0_right=" << r.cuts.right << " x0_left=" << r.cuts.left << " S_inf=" << r.S_inf
                << " matching=" << m << '\n';
            if (m > cfg.tol_matching) err << "warning: matching residual above " << cfg.tol_matching << '\n';
            return r.profile;
        }
        auto sd = reflection_coefficients(d.tm, pot.epsilon, cfg.tol_zero);
        sd.discrete = d.ds;
        std::optional<ScatteringData> left;
        if (d.tag == CaseTag::I) left = left_normalized_data(d.tm, pot.epsilon, cfg.tol_zero);
        return inverse_of(sd, grid, cfg, std::move(left));
    };
    const auto rec = reconstruct();
    const double t_inverse = seconds_since(t0);
    summarize_failures(err, rec);

    const auto ref = resample(pot, grid);
    std::vector<cplx> du(grid.size()), dv(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        du[k] = rec.potential.u[k] - ref.u[k];
        dv[k] = rec.potential.v[k] - ref.v[k];
    }
    const GridPotential diff(grid, du, dv, pot.epsilon);
    const double l2_ref = combined_norm(ref, 0, 0), l2 = combined_norm(diff, 0, 0);
    const double h11_ref = combined_norm(ref, 1, 1), h11 = combined_norm(diff, 1, 1);
    const double rel_l2 = l2_ref > 0 ? l2 / l2_ref : l2;
    const double rel_h11 = h11_ref > 0 ? h11 / h11_ref : h11;
    out << "l2_error=" << l2 << " relative_l2_error=" << rel_l2 << " h11_error=" << h11
        << " relative_h11_error=" << rel_h11 << '\n';
    out << "time_direct=" << t_direct << "s time_inverse=" << t_inverse << "s solved_as=" << (case3 ? "III" : tag_name(d.tag)) << '\n';
    if (!cfg.out.empty()) write_potential_file(cfg.out, rec.potential, trailer(rec));
    const bool pass = rec.failed_x.empty() && rel_l2 <= cfg.max_error;
    out << (pass ? "roundtrip=PASS" : "roundtrip=FAIL") << '\n';
    return pass ? ok : numerical_failure;
}

int cmd_evolve(const RunConfig& cfg, std::ostream& out) {
    const auto sd = load_scattering(cfg);
    const Flow f = parse_flow(cfg.flow);
    const double kappa = cfg.kappa ? *cfg.kappa : PhaseConvention{}.kappa(f);
    const auto ev = evolve_scattering(sd, cfg.t, f, kappa);
    std::ostringstream hdr;
    hdr << std::setprecision(17) << "t=" << cfg.t << " flow=" << flow_name(f) << " kappa=" << kappa;
    out << hdr.str() << '\n';
    if (!cfg.out.empty()) write_scattering_file(cfg.out, ev.data, hdr.str());
    return ok;
}

int cmd_spectrum(const RunConfig& cfg, std::ostream& out) {
    const auto pot = load_potential(cfg);
    const auto d = run_direct(pot, cfg);
    print_classification(out, d);
    print_spectrum(out, d.ds);
    if (!cfg.out.empty()) {
        std::ostringstream os;
        os << std::setprecision(17) << "# manakov-spectrum n_discrete=" << d.ds.size() << " min_abs_s11=" << d.min_s11
           << " case=" << tag_name(d.tag) << '\n';
        for (std::size_t i = 0; i < d.ds.size(); ++i)
            os << d.ds.eigenvalues[i].real() << ' ' << d.ds.eigenvalues[i].imag() << ' ' << d.ds.norming[i][0].real()
               << ' ' << d.ds.norming[i][0].imag() << ' ' << d.ds.norming[i][1].real() << ' '
               << d.ds.norming[i][1].imag() << '\n';
        write_file_atomically(cfg.out, os.str());
    }
    return ok;
}

int cmd_diagnose(const RunConfig& cfg, std::ostream& out) {
    const auto pot = load_potential(cfg);
    for (auto [i, j] : {std::pair{1, 1}, std::pair{2, 1}}) {
        const auto ru = sobolev_report(pot.u, pot.grid.nodes(), i, j);
        const auto rv = sobolev_report(pot.v, pot.grid.nodes(), i, j);
        out << "h" << i << j << "_norm_u=" << ru.norm_value << " ratio=" << ru.refinement_ratio << " h" << i << j
            << "_norm_v=" << rv.norm_value << " ratio=" << rv.refinement_ratio << '\n';
    }
    const auto d = run_direct(pot, cfg);
    print_classification(out, d);
    print_spectrum(out, d.ds);
    const auto u = check_unitarity(d.tm, pot.epsilon);
    out << "unitarity_residual=" << u.unitarity << " det_deviation=" << u.det
        << " symmetry_residual=" << verify_symmetries(d.tm, pot.epsilon).max() << '\n';
    if (d.tag != CaseTag::III && cfg.case_override != "III") return ok;

    const auto cuts = choose_cutoffs(pot);
    double S = cfg.s_inf;
    if (!(S > 0.0)) S = choose_radius(d.tm, d.ds, cfg.tol_zero);
    AugmentedOptions ao;
    ao.x_extent = std::max(1.0, std::abs(cfg.at_x));
    const auto contour = std::make_shared<AugmentedContour>(pot, cuts.right, S, ao);
    const auto m = contour->matching();
    out << "case3 x0_right=" << cuts.right << " x0_left=" << cuts.left << " S_inf=" << S
        << " lambda_max=" << contour->lambda_max() << " nodes=" << contour->size() << " matching_identity="
        << std::max(m.v_identity[0], m.v_identity[1]) << " matching_max=" << m.max() << '\n';
    if (!cfg.out.empty()) {
        std::ostringstream os;
        os << std::setprecision(17);
        contour->dump(os, cfg.at_x);
        write_file_atomically(cfg.out, os.str());
    }
    if (m.max() > cfg.tol_matching) throw NumericalError("matching residual above tolerance");
    return ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Direct and inverse scattering for the Manakov system"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto grid_flags = [&](CLI::App* s) {
        s->add_option("--xmin", cfg.xmin, "left end of the output x-grid");
        s->add_option("--xmax", cfg.xmax, "right end of the output x-grid");
        s->add_option("--nx", cfg.nx, "output x-grid nodes")->check(CLI::Range(std::size_t(2), std::size_t(1) << 24));
        s->add_option("--epsilon", cfg.epsilon, "override the sign: 1 focusing, -1 defocusing")
            ->check(CLI::IsMember({-1, 1}));
        s->add_option("--case", cfg.case_override, "auto | I | II | III")->check(CLI::IsMember({"auto", "I", "II", "III"}));
        s->add_option("--tol-zero", cfg.tol_zero, "|s11| threshold on the real axis")->check(CLI::PositiveNumber);
        s->add_option("--tol-residual", cfg.tol_residual, "GMRES relative residual")->check(CLI::PositiveNumber);
        s->add_option("--tol-matching", cfg.tol_matching, "case III matching tolerance")->check(CLI::PositiveNumber);
        s->add_option("--out", cfg.out, "output file");
    };
    auto lambda_flags = [&](CLI::App* s) {
        s->add_option("--lambda-max", cfg.lambda_max, "spectral cutoff")->check(CLI::PositiveNumber);
        s->add_option("--nlambda", cfg.nlambda, "spectral nodes")->check(CLI::Range(std::size_t(4), std::size_t(1) << 24));
    };

    auto* direct = app.add_subcommand("direct", "potential file -> scattering file");
    auto* inverse = app.add_subcommand("inverse", "scattering file -> potential file");
    auto* roundtrip = app.add_subcommand("roundtrip", "direct then inverse; reports the reconstruction error");
    auto* evolve = app.add_subcommand("evolve", "scattering data at time t");
    auto* spectrum = app.add_subcommand("spectrum", "eigenvalues and norming constants of a potential");
    auto* diagnose = app.add_subcommand("diagnose", "norms, unitarity, symmetries and case III matching");
    for (auto* s : {direct, inverse, roundtrip, evolve, spectrum, diagnose}) {
        s->add_option("input", cfg.input, "input file")->required();
        grid_flags(s);
    }
    for (auto* s : {direct, roundtrip, spectrum, diagnose}) lambda_flags(s);
    roundtrip->add_option("--max-error", cfg.max_error, "relative L2 bound for success")->check(CLI::PositiveNumber);
    for (auto* s : {roundtrip, diagnose}) s->add_option("--s-inf", cfg.s_inf, "case III circle radius (0: automatic)");
    diagnose->add_option("--x", cfg.at_x, "x for the contour dump");
    evolve->add_option("--flow", cfg.flow, "manakov | sasa-satsuma");
    evolve->add_option("--t", cfg.t, "time");
    evolve->add_option("--kappa", cfg.kappa, "phase constant (default: calibrated)");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = e.get_exit_code();
        if (code == 0) {
            out << app.help();
            return ok;
        }
        err << "error: " << e.what() << '\n';
        return input_error;
    }

    out << std::setprecision(10);
    err << std::setprecision(10);
    try {
        if (*direct) return cmd_direct(cfg, out);
        if (*inverse) return cmd_inverse(cfg, out, err);
        if (*roundtrip) return cmd_roundtrip(cfg, out, err);
        if (*evolve) return cmd_evolve(cfg, out);
        if (*spectrum) return cmd_spectrum(cfg, out);
        return cmd_diagnose(cfg, out);
    } catch (const InputError& e) {
        err << "input error: " << e.what() << '\n';
        return input_error;
    } catch (const CaseViolation& e) {
        err << "case violation: " << e.what() << '\n';
        return case_violation;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << '\n';
        return numerical_failure;
    }
}

}  // namespace manakov::cli
