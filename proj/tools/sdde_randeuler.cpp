// Command-line front end: convergence studies, single trajectories, and the
// path-regularity probe.

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sdde/brownian.hpp"
#include "sdde/experiment.hpp"
#include "sdde/kernels.hpp"
#include "sdde/problems.hpp"
#include "sdde/solver.hpp"

namespace {

using namespace sdde;

struct ProblemArgs {
    std::string name = "additive_k1";
    ProblemSpec spec;

    void attach(CLI::App& cmd)
    {
        cmd.add_option("--problem", name,
                       "additive_k1 | additive_k2 | multiplicative_k1 | multiplicative_k2 | "
                       "delay_linear | gbm | brownian")
            ->capture_default_str();
        cmd.add_option("--alpha1", spec.alpha1, "Hölder exponent of the drift in z")
            ->capture_default_str();
        cmd.add_option("--alpha2", spec.alpha2, "Hölder exponent of the diffusion in z")
            ->capture_default_str();
        cmd.add_option("--gamma1", spec.gamma1, "k1 exponent (> 2)")->capture_default_str();
        cmd.add_option("--gamma2", spec.gamma2, "k(t) = t^gamma2 exponent in (0, 1]")
            ->capture_default_str();
        cmd.add_option("--tau", spec.tau, "lag")->capture_default_str();
        cmd.add_option("--n", spec.n, "horizon parameter; intervals 0..n")->capture_default_str();
        cmd.add_option("--x0", spec.x0, "constant initial history")->capture_default_str();
        cmd.add_option("--a", spec.drift_rate, "gbm drift rate")->capture_default_str();
        cmd.add_option("--sigma", spec.sigma, "gbm / brownian noise scale")->capture_default_str();
    }

    ProblemSpec resolve() const
    {
        auto s = spec;
        s.family = parse_family(name);
        if (s.family == ProblemFamily::custom)
            throw std::invalid_argument("custom problems are only available through the library");
        return s;
    }
};

std::vector<int> parse_levels(const std::string& text)
{
    std::vector<int> levels;
    if (text.empty())
        return levels;
    const auto dots = text.find("..");
    if (dots != std::string::npos) {
        const int lo = std::stoi(text.substr(0, dots));
        const int hi = std::stoi(text.substr(dots + 2));
        if (hi < lo)
            throw std::invalid_argument("level range '" + text + "' is empty");
        for (int l = lo; l <= hi; ++l)
            levels.push_back(l);
        return levels;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        levels.push_back(std::stoi(item));
    return levels;
}

void print_error(const std::string& kind, const std::string& message)
{
    std::cerr << nlohmann::json{{"error", kind}, {"message", message}}.dump() << '\n';
}

int run_study_command(const ProblemArgs& problem, const std::string& levels, int ref_exponent,
                      int paths, double p, std::uint64_t seed, int workers,
                      const std::string& out, const std::string& format)
{
    StudyConfig config;
    config.problem = problem.resolve();
    config.levels = parse_levels(levels);
    config.ref_exponent = ref_exponent;
    config.paths = paths;
    config.p = p;
    config.master_seed = seed;
    config.workers = workers;
    const auto fmt = parse_format(format);

    ConvergenceReport report;
    int status = 0;
    try {
        report = run_study(config);
    } catch (const StudyFailure& failure) {
        report = failure.partial();
        print_error("study_failed", failure.what());
        status = 3;
    }
    emit(report, fmt, out);

    std::cout << "interval  slope    predicted  aborted\n";
    for (const auto& s : report.slopes)
        std::cout << std::setw(8) << s.interval << "  " << std::fixed << std::setprecision(3)
                  << std::setw(7) << s.slope << "  " << std::setw(9) << s.predicted_exponent
                  << "  " << s.abort_count << '\n';
    return status;
}

int run_solve_command(const ProblemArgs& problem, int level, std::uint64_t seed,
                      std::uint64_t realization, const std::string& scheme_name,
                      const std::string& out)
{
    const auto spec = problem.resolve();
    const auto p = make_problem(spec);
    if (level < 0 || level > 24)
        throw std::invalid_argument("level must lie in [0, 24]");
    const DelayMesh mesh(spec.tau, spec.n, 1 << level);
    Scheme scheme;
    if (scheme_name == "randomized")
        scheme = Scheme::randomized;
    else if (scheme_name == "classical")
        scheme = Scheme::classical;
    else
        throw std::invalid_argument("unknown scheme '" + scheme_name + "'");

    const auto lattice = sample_wiener_lattice(StreamKey::wiener(seed, realization), mesh, p.dim_w);
    const auto gammas =
        sample_gamma_stream(StreamKey::solver_gamma(seed, realization, level),
                            static_cast<std::size_t>(mesh.intervals()) * mesh.steps_per_lag());
    const auto path = solve(SolveSpec{p, mesh, lattice, 1, gammas, scheme});

    std::ofstream file;
    std::ostream* os = &std::cout;
    if (out != "-") {
        file.open(out, std::ios::binary | std::ios::trunc);
        if (!file)
            throw std::runtime_error("cannot open '" + out + "' for writing");
        os = &file;
    }
    *os << "t";
    for (int r = 1; r <= p.dim_x; ++r)
        *os << ",x_" << r;
    *os << '\n' << std::setprecision(17);
    for (int j = 0; j <= mesh.n(); ++j)
        for (int k = (j == 0 ? 0 : 1); k <= mesh.steps_per_lag(); ++k) {
            *os << mesh.node(j, k);
            for (double v : path.at(j, k))
                *os << ',' << v;
            *os << '\n';
        }
    os->flush();
    if (!*os)
        throw std::runtime_error("write to '" + out + "' failed");
    return 0;
}

int run_probe_command(const ProblemArgs& problem, ProbeConfig cfg, const std::string& out)
{
    const auto spec = problem.resolve();
    cfg.n = spec.n;
    const auto result = regularity_probe(make_problem(spec), cfg);
    nlohmann::json doc{{"problem", to_string(spec.family)},
                       {"interval_j", cfg.interval},
                       {"ref_exponent", cfg.ref_exponent},
                       {"paths", cfg.paths},
                       {"seed", cfg.master_seed},
                       {"gaps", result.gaps},
                       {"rms", result.rms},
                       {"exponent", result.exponent}};
    if (out.empty() || out == "-") {
        std::cout << doc.dump() << '\n';
    } else {
        std::ofstream file(out, std::ios::binary | std::ios::trunc);
        if (!file)
            throw std::runtime_error("cannot open '" + out + "' for writing");
        file << doc.dump(2) << '\n';
        std::cout << "exponent " << result.exponent << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Randomized Euler-Maruyama for stochastic delay equations"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("sdde-randeuler 1.0 (kernels: ") +
                                          std::string(kernels::isa_name(kernels::active_isa())) +
                                          ")");

    ProblemArgs study_problem;
    std::string levels = "5..10";
    int ref_exponent = 14;
    int paths = 1000;
    double p = 2.0;
    std::uint64_t seed = 0;
    int workers = 1;
    std::string out;
    std::string format = "csv";
    auto* study = app.add_subcommand("study", "Monte Carlo strong-convergence study");
    study_problem.attach(*study);
    study->add_option("--levels", levels, "mesh exponents, e.g. 5..10 or 5,7,9")
        ->capture_default_str();
    study->add_option("--ref-exponent", ref_exponent, "reference mesh exponent")
        ->capture_default_str();
    study->add_option("--paths", paths, "Monte Carlo realizations K")->capture_default_str();
    study->add_option("--p", p, "error exponent")->capture_default_str();
    study->add_option("--seed", seed, "master seed")->capture_default_str();
    study->add_option("--workers", workers, "worker threads")->capture_default_str();
    study->add_option("--out", out, "output path")->required();
    study->add_option("--format", format, "csv | json")->capture_default_str();

    ProblemArgs solve_problem;
    int solve_level = 10;
    std::uint64_t solve_seed = 0;
    std::uint64_t realization = 0;
    std::string scheme = "randomized";
    std::string solve_out = "-";
    auto* solve_cmd = app.add_subcommand("solve", "one trajectory as CSV t,x_1..x_d");
    solve_problem.attach(*solve_cmd);
    solve_cmd->add_option("--level", solve_level, "N = 2^level steps per lag")
        ->capture_default_str();
    solve_cmd->add_option("--seed", solve_seed, "master seed")->capture_default_str();
    solve_cmd->add_option("--realization", realization, "realization index")
        ->capture_default_str();
    solve_cmd->add_option("--scheme", scheme, "randomized | classical")->capture_default_str();
    solve_cmd->add_option("--out", solve_out, "output path, - for stdout")->capture_default_str();

    ProblemArgs probe_problem;
    ProbeConfig probe;
    std::string probe_out = "-";
    auto* probe_cmd =
        app.add_subcommand("probe-regularity", "mean-square Hölder exponent of simulated paths");
    probe_problem.attach(*probe_cmd);
    probe_cmd->add_option("--ref-exponent", probe.ref_exponent, "paths use 2^r steps per lag")
        ->capture_default_str();
    probe_cmd->add_option("--paths", probe.paths, "number of paths")->capture_default_str();
    probe_cmd->add_option("--interval", probe.interval, "lag interval j")->capture_default_str();
    probe_cmd->add_option("--max-gap-exponent", probe.max_gap_exponent,
                          "largest gap is 2^q fine steps")
        ->capture_default_str();
    probe_cmd->add_option("--seed", probe.master_seed, "master seed")->capture_default_str();
    probe_cmd->add_option("--workers", probe.workers, "worker threads")->capture_default_str();
    probe_cmd->add_option("--out", probe_out, "JSON output path, - for stdout")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error("usage", e.what());
        return e.get_exit_code() != 0 ? e.get_exit_code() : 2;
    }

    try {
        if (*study)
            return run_study_command(study_problem, levels, ref_exponent, paths, p, seed, workers,
                                     out, format);
        if (*solve_cmd)
            return run_solve_command(solve_problem, solve_level, solve_seed, realization, scheme,
                                     solve_out);
        if (*probe_cmd)
            return run_probe_command(probe_problem, probe, probe_out);
    } catch (const SolveError& e) {
        print_error("solve_aborted", e.what());
        return 3;
    } catch (const std::invalid_argument& e) {
        print_error("invalid_argument", e.what());
        return 2;
    } catch (const std::exception& e) {
        print_error("runtime", e.what());
        return 1;
    }
    return 0;
}
