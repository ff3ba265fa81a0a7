#include "runner.hpp"

#include <random>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include "meanloop/errors.hpp"
#include "meanloop/fourier.hpp"
#include "meanloop/hessian.hpp"
#include "meanloop/kepler.hpp"
#include "meanloop/monoid.hpp"
#include "meanloop/reporting.hpp"
#include "meanloop/solver.hpp"
#include "meanloop/twisted_operator.hpp"

namespace meanloop::runner {

namespace {

using nlohmann::json;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Kind { Integer, Number, Boolean, String, Object };

struct Key {
    const char* name;
    Kind kind;
};

void validate_config(const json& config, std::initializer_list<Key> allowed) {
    if (!config.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [key, value] : config.items()) {
        bool known = false;
        for (const Key& k : allowed) {
            if (key != k.name) continue;
            known = true;
            const bool ok = (k.kind == Kind::Integer && value.is_number_integer()) ||
                            (k.kind == Kind::Number && value.is_number()) ||
                            (k.kind == Kind::Boolean && value.is_boolean()) ||
                            (k.kind == Kind::String && value.is_string()) ||
                            (k.kind == Kind::Object && value.is_object());
            if (!ok) throw ConfigError("config key '" + key + "' has the wrong type");
        }
        if (!known) throw ConfigError("unknown config key: " + key);
    }
}

template <typename T>
T take(json& config, const char* key, T fallback) {
    if (!config.contains(key)) {
        config[key] = fallback;
        return fallback;
    }
    return config[key].get<T>();
}

std::map<std::string, double> take_params(json& config) {
    std::map<std::string, double> params;
    if (!config.contains("params")) {
        config["params"] = json::object();
        return params;
    }
    for (const auto& [key, value] : config["params"].items()) {
        if (!value.is_number()) throw ConfigError("params entries must be numbers");
        params[key] = value.get<double>();
    }
    return params;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
    os << text;
}

void write_report(const std::filesystem::path& out_dir, const std::string& name,
                  const json& report) {
    std::filesystem::create_directories(out_dir);
    write_text(out_dir / name, report.dump(2) + "\n");
}

int log_level() {
    static const int level = [] {
        const char* env = std::getenv("MEANLOOP_LOG");
        if (!env) return 1;
        const std::string v(env);
        if (v == "quiet") return 0;
        if (v == "debug") return 2;
        return 1;
    }();
    return level;
}

SolveConfig solve_config_from(json& config, const SystemSpec& sys, int k) {
    SolveConfig cfg = default_config_for(sys, k);
    cfg.grid_n = take<int>(config, "grid", 256);
    cfg.damping = take<double>(config, "damping", cfg.damping);
    cfg.max_outer = take<int>(config, "max_outer", cfg.max_outer);
    cfg.newton_tol = take<double>(config, "newton_tol", cfg.newton_tol);
    cfg.mean_tol = take<double>(config, "mean_tol", cfg.mean_tol);
    cfg.accept_tol = take<double>(config, "accept_tol", cfg.accept_tol);
    return cfg;
}

json solve_result_json(const SystemSpec& sys, const CriticalPoint& cp) {
    json j = reporting::critical_point_json(cp);
    double radius = cp.loop.samples.col(0).norm();
    if (sys.name == "example4-bov") radius = cp.loop.samples.col(0).head(2).norm();
    j["radius"] = radius;
    return j;
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const InvalidArgumentError*>(&e)) return kUsage;
    if (dynamic_cast<const ConfigError*>(&e)) return kUsage;
    return kNumerical;
}

CommandResult failure(json report, const std::exception& e,
                      const std::filesystem::path& out_dir, const std::string& name) {
    report["error"] = e.what();
    write_report(out_dir, name, report);
    return CommandResult{std::move(report), exit_code_for(e)};
}

}  // namespace

void log_info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << "[meanloop] " << msg << "\n";
}
void log_debug(const std::string& msg) {
    if (log_level() >= 2) std::cerr << "[meanloop] " << msg << "\n";
}

CommandResult run_operator_ensemble(json config, const std::filesystem::path& out_dir) {
    json report{{"command", "operator-ensemble"}, {"version", reporting::kArtifactVersion}};
    try {
        validate_config(config, {{"trials", Kind::Integer},
                                 {"n_min", Kind::Integer},
                                 {"n_max", Kind::Integer},
                                 {"m_min", Kind::Integer},
                                 {"m_max", Kind::Integer},
                                 {"grid", Kind::Integer},
                                 {"seed", Kind::Integer},
                                 {"commuting", Kind::Boolean},
                                 {"jobs", Kind::Integer},
                                 {"atol", Kind::Number},
                                 {"rtol", Kind::Number}});
        const int trials = take<int>(config, "trials", 500);
        const int n_min = take<int>(config, "n_min", 1);
        const int n_max = take<int>(config, "n_max", 3);
        const int m_min = take<int>(config, "m_min", 0);
        const int m_max = take<int>(config, "m_max", 4);
        const int N = take<int>(config, "grid", 256);
        const std::uint64_t seed = take<std::uint64_t>(config, "seed", 12345);
        const bool commuting = take<bool>(config, "commuting", false);
        int jobs = take<int>(config, "jobs", 0);
        const double atol_base = take<double>(config, "atol", 1e-8);
        const double rtol = take<double>(config, "rtol", 1e-10);
        if (trials < 0 || n_min < 1 || n_max < n_min || m_min < 0 || m_max < m_min)
            throw ConfigError("ensemble ranges are inconsistent");
        if (jobs <= 0) jobs = std::max(1u, std::thread::hardware_concurrency());
        config.erase("jobs");  // scheduling knob, not part of the payload
        report["config"] = config;

        struct Row {
            int index, n, m, nullity, bound;
            double defect, sigma_min, sigma_max;
            bool bound_ok, used_svd, refined;
            int closed_form;  // -1 when not commuting
            bool closed_match;
        };
        std::vector<Row> rows(trials);

        const double atol = atol_base * std::sqrt(double(N));
        std::atomic<int> next{0};
        auto worker = [&] {
            for (int i = next.fetch_add(1); i < trials; i = next.fetch_add(1)) {
                const std::uint64_t s = seed + static_cast<std::uint64_t>(i);
                std::mt19937_64 pick(s ^ 0x9e3779b97f4a7c15ull);
                const int n = n_min + static_cast<int>(pick() % (n_max - n_min + 1));
                const int m = m_min + static_cast<int>(pick() % (m_max - m_min + 1));
                const OperatorSpec spec = random_instance(n, m, s, commuting, N);

                Row row{};
                row.index = i;
                row.n = n;
                row.m = m;
                row.bound = commuting ? 2 * n : 2 * n + m;
                row.defect = symmetry_defect(spec, 4, s);
                row.closed_form = -1;
                row.closed_match = true;
                if (commuting) row.closed_form = commuting_kernel(spec).dimension;

                const Eigen::MatrixXd M = assemble_matrix(spec);
                const double tol_guess = std::max(atol, rtol * (2.0 * N));
                const SpectralEdges edges =
                    estimate_spectral_edges(M, 2 * n + m + 2, 10, s ^ 0xabcdull);
                const bool fast_ok = edges.usable &&
                                     edges.sigma_min > 100.0 * tol_guess &&
                                     row.closed_form <= 0;
                if (fast_ok) {
                    row.nullity = 0;
                    row.sigma_min = edges.sigma_min;
                    row.sigma_max = edges.sigma_max;
                    row.used_svd = false;
                } else {
                    SpectralReport rep = numerical_nullity(M, atol, rtol, row.bound);
                    row.nullity = rep.nullity;
                    row.sigma_min = rep.singular_values(rep.singular_values.size() - 1);
                    row.sigma_max = rep.singular_values(0);
                    row.used_svd = true;
                    if (!commuting && rep.nullity > 0) {
                        // mandatory grid-doubling confirmation for positive counts
                        NullityOptions opts;
                        opts.atol_base = atol_base;
                        opts.rtol = rtol;
                        opts.bound = row.bound;
                        const RefinedNullity refined = refined_nullity(
                            [&](int nn) { return assemble_matrix(spec.resampled(nn)); }, N,
                            opts);
                        row.nullity = refined.report.nullity;
                        row.refined = true;
                    }
                }
                if (commuting) row.closed_match = row.nullity == row.closed_form;
                row.bound_ok = row.nullity <= row.bound;
                rows[i] = row;
            }
        };
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();

        std::ostringstream csv;
        csv << "index,n,m,nullity,bound,bound_ok,symmetry_defect,sigma_min,sigma_max,"
               "closed_form_dim,closed_form_match,used_svd,refined\n";
        int violations = 0, max_nullity = 0, mismatches = 0;
        double max_defect = 0.0;
        for (const Row& r : rows) {
            csv << r.index << ',' << r.n << ',' << r.m << ',' << r.nullity << ',' << r.bound
                << ',' << (r.bound_ok ? 1 : 0) << ',' << reporting::format_double(r.defect)
                << ',' << reporting::format_double(r.sigma_min) << ','
                << reporting::format_double(r.sigma_max) << ',' << r.closed_form << ','
                << (r.closed_match ? 1 : 0) << ',' << (r.used_svd ? 1 : 0) << ','
                << (r.refined ? 1 : 0) << '\n';
            violations += r.bound_ok ? 0 : 1;
            mismatches += r.closed_match ? 0 : 1;
            max_nullity = std::max(max_nullity, r.nullity);
            max_defect = std::max(max_defect, r.defect);
        }
        std::filesystem::create_directories(out_dir);
        write_text(out_dir / "operator_ensemble.csv", csv.str());

        report["results"] = {{"trials", trials},
                             {"violations", violations},
                             {"max_nullity", max_nullity},
                             {"max_symmetry_defect", max_defect},
                             {"closed_form_mismatches", mismatches}};
        write_report(out_dir, "operator_ensemble.json", report);
        const bool ok = violations == 0 && mismatches == 0;
        log_info("operator-ensemble: " + std::to_string(trials) + " instances, " +
                 std::to_string(violations) + " violations");
        return CommandResult{report, ok ? kOk : kCheckFailed};
    } catch (const std::exception& e) {
        return failure(report, e, out_dir, "operator_ensemble.json");
    }
}

CommandResult run_solve(json config, const std::filesystem::path& out_dir) {
    json report{{"command", "solve"}, {"version", reporting::kArtifactVersion}};
    try {
        validate_config(config, {{"system", Kind::String},
                                 {"k", Kind::Integer},
                                 {"grid", Kind::Integer},
                                 {"params", Kind::Object},
                                 {"damping", Kind::Number},
                                 {"max_outer", Kind::Integer},
                                 {"newton_tol", Kind::Number},
                                 {"mean_tol", Kind::Number},
                                 {"accept_tol", Kind::Number}});
        if (!config.contains("system")) throw ConfigError("solve: missing 'system'");
        const std::string system = config["system"].get<std::string>();
        const int k = take<int>(config, "k", 1);
        const auto params = take_params(config);
        const SystemSpec sys = make_system(system, params);
        if (!sys.solvable)
            throw InvalidArgumentError(system + " ships for evaluation only, not solving");
        SolveConfig cfg = solve_config_from(config, sys, k);
        report["config"] = config;

        const CriticalPoint cp =
            system == "example4-bov" ? bov_solve(k, cfg) : self_consistent_solve(sys.pair, cfg);
        report["results"] = solve_result_json(sys, cp);

        std::filesystem::create_directories(out_dir);
        std::ofstream loop_csv(out_dir / "loop.csv", std::ios::binary);
        reporting::write_loop_csv(loop_csv, cp.loop);
        loop_csv.close();
        write_report(out_dir, "solve.json", report);
        log_info("solve " + system + ": residual " +
                 reporting::format_double(cp.residual_norm));
        return CommandResult{report, kOk};
    } catch (const std::exception& e) {
        return failure(report, e, out_dir, "solve.json");
    }
}

CommandResult run_nullity(json config, const std::filesystem::path& out_dir) {
    json report{{"command", "nullity"}, {"version", reporting::kArtifactVersion}};
    try {
        validate_config(config, {{"system", Kind::String},
                                 {"k", Kind::Integer},
                                 {"grid", Kind::Integer},
                                 {"params", Kind::Object},
                                 {"damping", Kind::Number},
                                 {"max_outer", Kind::Integer},
                                 {"newton_tol", Kind::Number},
                                 {"mean_tol", Kind::Number},
                                 {"accept_tol", Kind::Number},
                                 {"loop_csv", Kind::String}});
        if (!config.contains("system")) throw ConfigError("nullity: missing 'system'");
        const std::string system = config["system"].get<std::string>();
        const int k = take<int>(config, "k", 1);
        const auto params = take_params(config);
        const SystemSpec sys = make_system(system, params);
        SolveConfig cfg = solve_config_from(config, sys, k);

        CriticalPoint cp = [&]() -> CriticalPoint {
            if (config.contains("loop_csv")) {
                std::ifstream is(config["loop_csv"].get<std::string>());
                if (!is) throw ConfigError("nullity: cannot read loop_csv");
                Loop loop = reporting::read_loop_csv(is);
                CriticalPoint out{sys.pair, loop, mean_value(sys.pair, loop), 0.0, {}};
                if (!out.mean.in_domain)
                    throw DomainError("loaded loop has mean outside W");
                out.residual_norm = critical_residual(sys.pair, loop).max_norm();
                out.covector = sys.pair.f_grad(out.mean.value);
                return out;
            }
            if (!sys.solvable)
                throw InvalidArgumentError(system + " ships for evaluation only, not solving");
            return system == "example4-bov" ? bov_solve(k, cfg)
                                            : self_consistent_solve(sys.pair, cfg);
        }();
        report["config"] = config;

        const NullityReport rep = nullity_report(cp);
        report["results"] = reporting::to_json(rep);
        report["results"]["residual"] = cp.residual_norm;
        write_report(out_dir, "nullity.json", report);
        const bool ok = rep.bounds_hold && rep.routes_agree;
        log_info("nullity " + system + ": direct " + std::to_string(rep.nullity_direct) +
                 ", reduced " + std::to_string(rep.nullity_reduced));
        return CommandResult{report, ok ? kOk : kCheckFailed};
    } catch (const std::exception& e) {
        return failure(report, e, out_dir, "nullity.json");
    }
}

CommandResult run_kepler(json config, const std::filesystem::path& out_dir) {
    json report{{"command", "kepler"}, {"version", reporting::kArtifactVersion}};
    try {
        validate_config(config, {{"k", Kind::Integer},
                                 {"grid", Kind::Integer},
                                 {"damping", Kind::Number},
                                 {"max_outer", Kind::Integer},
                                 {"newton_tol", Kind::Number},
                                 {"mean_tol", Kind::Number},
                                 {"accept_tol", Kind::Number},
                                 {"residual_tol", Kind::Number}});
        const int k = take<int>(config, "k", 1);
        const int N = take<int>(config, "grid", 512);
        const double residual_tol = take<double>(config, "residual_tol", 1e-5);
        const SystemSpec sys = make_system("example4-bov");
        SolveConfig cfg = solve_config_from(config, sys, k);
        cfg.grid_n = N;
        report["config"] = config;

        const CriticalPoint cp = bov_solve(k, cfg);
        const PlanarLoop z{cp.loop.grid, cp.loop.samples.topRows(2)};
        const double second_order = bov_residual(z).max_norm();

        const TimeTransform tt(z);
        double roundtrip = 0.0;
        for (int q = 0; q <= N; ++q) {
            const double t = static_cast<double>(q) / N;
            roundtrip = std::max(roundtrip, std::abs(tt.forward(tt.inverse(t)) - t));
        }
        const PlanarLoop orbit = levi_civita_orbit(z);
        const double kepler_res = kepler_residual(orbit, 1.0);
        const Eigen::VectorXd energy = kepler_energy(orbit, 1.0);
        const double energy_drift = energy.maxCoeff() - energy.minCoeff();

        // refinement check: the pipeline must hold up on the doubled grid
        bool refinement_ok = N >= 64;
        double kepler_res_fine = -1.0;
        if (refinement_ok) {
            const TimeGrid fine(2 * N);
            const PlanarLoop z2{fine, fourier::resample(z.samples, fine.nodes())};
            kepler_res_fine = kepler_residual(levi_civita_orbit(z2), 1.0);
            refinement_ok = kepler_res_fine <= std::max(residual_tol, 2.0 * kepler_res);
        }

        report["results"] = {{"k", k},
                             {"bov_first_order_residual", cp.residual_norm},
                             {"bov_second_order_residual", second_order},
                             {"time_transform_roundtrip", roundtrip},
                             {"kepler_residual", kepler_res},
                             {"kepler_residual_refined", kepler_res_fine},
                             {"kepler_mu", 1.0},
                             {"energy_drift", energy_drift},
                             {"refinement_ok", refinement_ok}};

        std::filesystem::create_directories(out_dir);
        std::ofstream orbit_csv(out_dir / "orbit.csv", std::ios::binary);
        reporting::write_planar_csv(orbit_csv, orbit);
        orbit_csv.close();
        write_report(out_dir, "kepler.json", report);

        const bool ok = refinement_ok && kepler_res <= residual_tol && roundtrip <= 1e-8;
        log_info("kepler k=" + std::to_string(k) + ": residual " +
                 reporting::format_double(kepler_res));
        return CommandResult{report, ok ? kOk : kCheckFailed};
    } catch (const std::exception& e) {
        return failure(report, e, out_dir, "kepler.json");
    }
}

CommandResult run_symmetry(json config, const std::filesystem::path& out_dir) {
    json report{{"command", "symmetry"}, {"version", reporting::kArtifactVersion}};
    try {
        validate_config(config, {{"system", Kind::String},
                                 {"n", Kind::Integer},
                                 {"r", Kind::Number},
                                 {"k", Kind::Integer},
                                 {"grid", Kind::Integer},
                                 {"params", Kind::Object},
                                 {"damping", Kind::Number},
                                 {"max_outer", Kind::Integer},
                                 {"newton_tol", Kind::Number},
                                 {"mean_tol", Kind::Number},
                                 {"accept_tol", Kind::Number},
                                 {"tol", Kind::Number}});
        if (!config.contains("system") || !config.contains("n"))
            throw ConfigError("symmetry: need 'system' and 'n'");
        const std::string system = config["system"].get<std::string>();
        const MonoidElement g = make_element(config["n"].get<int>(),
                                             take<double>(config, "r", 0.0));
        const int k = take<int>(config, "k", 1);
        const double tol = take<double>(config, "tol", 1e-7);
        const auto params = take_params(config);
        const SystemSpec sys = make_system(system, params);
        if (!sys.solvable)
            throw InvalidArgumentError(system + " ships for evaluation only, not solving");
        SolveConfig cfg = solve_config_from(config, sys, k);
        report["config"] = config;

        // solve the pulled-back problem on the |n| k branch, then iterate
        const int k_eff = std::max(1, std::abs(g.n) * k);
        cfg.x0 = sys.seed_point(k_eff);
        cfg.mu0 = g.n > 0 ? sys.seed_mean(k_eff)
                          : Eigen::VectorXd(-sys.seed_mean(k_eff));
        const PairSpec pulled = pullback_pair(g, sys.pair);
        const CriticalPoint cp = self_consistent_solve(pulled, cfg);

        const PropositionReport rep = proposition_check(sys.pair, g, cp.loop, tol);
        report["results"] = {{"n", g.n},
                             {"r", g.r},
                             {"residual_pullback", rep.residual_pullback},
                             {"residual_iterate", rep.residual_iterate},
                             {"pullback_critical", rep.pullback_critical},
                             {"iterate_critical", rep.iterate_critical},
                             {"agreement", rep.agree},
                             {"tol", rep.tol}};
        write_report(out_dir, "symmetry.json", report);
        log_info("symmetry (" + std::to_string(g.n) + ", " + std::to_string(g.r) +
                 "): agreement " + (rep.agree ? "true" : "false"));
        return CommandResult{report, rep.agree ? kOk : kCheckFailed};
    } catch (const std::exception& e) {
        return failure(report, e, out_dir, "symmetry.json");
    }
}

}  // namespace meanloop::runner
