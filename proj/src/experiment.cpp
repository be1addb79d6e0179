#include "sdde/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "sdde/brownian.hpp"
#include "sdde/kernels.hpp"
#include "sdde/solver.hpp"

namespace sdde {

namespace {

constexpr double kMaxAbortFraction = 0.001;

/// Runs fn(i) for i in [0, count) on `workers` threads. Work items must write
/// only to their own slots; the first exception is rethrown after joining.
template <class Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn)
{
    const auto threads = static_cast<std::size_t>(std::max(1, workers));
    if (threads == 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < std::min(threads, count); ++t) {
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= count)
                        return;
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure)
                            failure = std::current_exception();
                        next.store(count);
                        return;
                    }
                }
            });
        }
    }
    if (failure)
        std::rethrow_exception(failure);
}

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double v)
    {
        const double t = sum_ + v;
        if (std::fabs(sum_) >= std::fabs(v))
            carry_ += (sum_ - t) + v;
        else
            carry_ += (v - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + carry_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

int steps_for(int exponent)
{
    if (exponent < 0 || exponent > 30)
        throw std::invalid_argument("mesh exponent " + std::to_string(exponent) +
                                    " outside [0, 30]");
    return 1 << exponent;
}

/// Reference path and lattice for one realization, shared by every level.
struct ReferenceRun {
    WienerLattice lattice;
    SegmentedPath path;
};

ReferenceRun reference_run(const StudyConfig& config, const SddeProblem& problem,
                           std::uint64_t realization)
{
    const DelayMesh fine(problem.tau, config.problem.n, steps_for(config.ref_exponent));
    auto lattice = sample_wiener_lattice(StreamKey::wiener(config.master_seed, realization), fine,
                                         problem.dim_w);
    const auto gammas =
        sample_gamma_stream(StreamKey::reference_gamma(config.master_seed, realization),
                            static_cast<std::size_t>(fine.intervals()) * fine.steps_per_lag());
    auto path = solve_on_increments(problem, fine, lattice.increments(), gammas,
                                    Scheme::randomized);
    return {std::move(lattice), std::move(path)};
}

std::vector<double> level_deviations(const StudyConfig& config, const SddeProblem& problem,
                                     const ReferenceRun& ref, std::uint64_t realization,
                                     int level, RealizationOptions options)
{
    const int factor = 1 << (config.ref_exponent - level);
    const DelayMesh coarse(problem.tau, config.problem.n, steps_for(level));
    const auto count = static_cast<std::size_t>(coarse.intervals()) * coarse.steps_per_lag();
    const auto gammas =
        options.share_reference_gamma
            ? sample_gamma_stream(StreamKey::reference_gamma(config.master_seed, realization),
                                  count)
            : sample_gamma_stream(
                  StreamKey::solver_gamma(config.master_seed, realization, level), count);
    const SolveSpec spec{problem, coarse, ref.lattice, factor, gammas, Scheme::randomized};
    const auto path = solve(spec);

    std::vector<double> devs(static_cast<std::size_t>(coarse.intervals()));
    for (int j = 0; j < coarse.intervals(); ++j)
        devs[j] = kernels::max_strided_deviation(path.segment(j), ref.path.segment(j),
                                                 static_cast<std::size_t>(problem.dim_x),
                                                 static_cast<std::size_t>(factor));
    return devs;
}

void check_problem_matches(const StudyConfig& config, const SddeProblem& problem)
{
    problem.validate();
    if (problem.tau != config.problem.tau)
        throw std::invalid_argument("study: problem lag differs from the configured tau");
}

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

nlohmann::json number_or_null(double v)
{
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

double number_or_nan(const nlohmann::json& v)
{
    return v.is_null() ? nan() : v.get<double>();
}

std::string format_double(double v)
{
    if (std::isnan(v))
        return "nan";
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

}  // namespace

void StudyConfig::validate() const
{
    problem.validate();
    if (paths < 2)
        throw std::invalid_argument("study: at least 2 paths are required");
    if (!(p >= 1.0) || !std::isfinite(p))
        throw std::invalid_argument("study: error exponent p must be >= 1");
    if (workers < 1)
        throw std::invalid_argument("study: workers must be positive");
    steps_for(ref_exponent);
    for (int l : levels) {
        steps_for(l);
        if (l >= ref_exponent)
            throw std::invalid_argument("study: every level must be below the reference exponent " +
                                        std::to_string(ref_exponent));
    }
    auto sorted = levels;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw std::invalid_argument("study: duplicate levels");
}

std::vector<double> ConvergenceReport::interval_errors(int j) const
{
    std::vector<double> out;
    for (const auto& e : errors)
        if (e.interval == j)
            out.push_back(e.error);
    return out;
}

std::vector<double> ConvergenceReport::step_sizes() const
{
    std::vector<double> out;
    for (const auto& e : errors)
        if (e.interval == 0)
            out.push_back(e.h);
    return out;
}

StudyFailure::StudyFailure(const std::string& what, ConvergenceReport partial)
    : std::runtime_error(what), partial_(std::move(partial))
{}

std::vector<double> run_realization(const StudyConfig& config, const SddeProblem& problem,
                                    std::uint64_t realization, int level,
                                    RealizationOptions options)
{
    check_problem_matches(config, problem);
    steps_for(config.ref_exponent);
    if (level < 0 || level > config.ref_exponent)
        throw std::invalid_argument("run_realization: level must lie in [0, ref_exponent]");
    const auto ref = reference_run(config, problem, realization);
    return level_deviations(config, problem, ref, realization, level, options);
}

ErrorEstimate mse_error_with_spread(std::span<const double> deviations, double p)
{
    if (deviations.empty())
        throw std::invalid_argument("mse_error: no retained realizations");
    if (!(p >= 1.0))
        throw std::invalid_argument("mse_error: p must be >= 1");
    const auto k = static_cast<double>(deviations.size());
    CompensatedSum moment;
    for (double d : deviations)
        moment.add(std::pow(d, p));
    const double mean = moment.value() / k;
    ErrorEstimate est;
    est.error = std::pow(mean, 1.0 / p);
    if (deviations.size() > 1 && est.error > 0.0) {
        CompensatedSum spread;
        for (double d : deviations) {
            const double c = std::pow(d, p) - mean;
            spread.add(c * c);
        }
        const double var_of_mean = spread.value() / (k - 1.0) / k;
        est.std_error = std::sqrt(var_of_mean) / (p * std::pow(est.error, p - 1.0));
    }
    return est;
}

double mse_error(std::span<const double> deviations, double p)
{
    return mse_error_with_spread(deviations, p).error;
}

double fit_slope(std::span<const double> hs, std::span<const double> errors)
{
    if (hs.size() != errors.size())
        throw std::invalid_argument("fit_slope: step sizes and errors differ in length");
    if (hs.size() < 2)
        throw std::invalid_argument("fit_slope: at least two levels are required");
    std::vector<double> xs(hs.size());
    std::vector<double> ys(hs.size());
    for (std::size_t i = 0; i < hs.size(); ++i) {
        if (!(hs[i] > 0.0))
            throw std::invalid_argument("fit_slope: step sizes must be positive");
        if (!(errors[i] > 0.0))
            throw std::invalid_argument("fit_slope: errors must be positive");
        xs[i] = std::log2(hs[i]);
        ys[i] = std::log2(errors[i]);
    }
    const auto count = static_cast<double>(xs.size());
    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mean_x += xs[i];
        mean_y += ys[i];
    }
    mean_x /= count;
    mean_y /= count;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mean_x) * (ys[i] - mean_y);
        sxx += (xs[i] - mean_x) * (xs[i] - mean_x);
    }
    if (sxx == 0.0)
        throw std::invalid_argument("fit_slope: step sizes must not all be equal");
    return sxy / sxx;
}

ConvergenceReport run_study(const StudyConfig& config)
{
    config.validate();
    return run_study(config, make_problem(config.problem));
}

ConvergenceReport run_study(const StudyConfig& config, const SddeProblem& problem)
{
    config.validate();
    check_problem_matches(config, problem);

    const int intervals = config.problem.n + 1;
    const auto n_levels = config.levels.size();
    const auto n_paths = static_cast<std::size_t>(config.paths);
    const std::size_t stride = n_levels * static_cast<std::size_t>(intervals);

    std::vector<double> devs(n_paths * stride, 0.0);
    std::vector<char> aborted(n_paths, 0);

    parallel_for(n_paths, config.workers, [&](std::size_t k) {
        const auto realization = static_cast<std::uint64_t>(k);
        try {
            const auto ref = reference_run(config, problem, realization);
            for (std::size_t li = 0; li < n_levels; ++li) {
                const auto d =
                    level_deviations(config, problem, ref, realization, config.levels[li], {});
                std::copy(d.begin(), d.end(),
                          devs.begin() + static_cast<std::ptrdiff_t>(k * stride + li * intervals));
            }
        } catch (const SolveError&) {
            aborted[k] = 1;
        }
    });

    ConvergenceReport report;
    report.config = config;
    report.aborted_paths = static_cast<int>(std::count(aborted.begin(), aborted.end(), 1));
    report.retained_paths = config.paths - report.aborted_paths;

    std::vector<double> column;
    column.reserve(n_paths);
    for (std::size_t li = 0; li < n_levels; ++li) {
        const int level = config.levels[li];
        const DelayMesh mesh(problem.tau, config.problem.n, steps_for(level));
        for (int j = 0; j < intervals; ++j) {
            LevelError row;
            row.level = level;
            row.steps_per_lag = mesh.steps_per_lag();
            row.h = mesh.h();
            row.interval = j;
            row.p = config.p;
            column.clear();
            for (std::size_t k = 0; k < n_paths; ++k)
                if (!aborted[k])
                    column.push_back(devs[k * stride + li * intervals + static_cast<std::size_t>(j)]);
            if (column.empty()) {
                row.error = nan();
                row.std_error = nan();
            } else {
                const auto est = mse_error_with_spread(column, config.p);
                row.error = est.error;
                row.std_error = est.std_error;
            }
            report.errors.push_back(row);
        }
    }

    const auto hs = report.step_sizes();
    for (int j = 0; j < intervals; ++j) {
        IntervalSlope s;
        s.interval = j;
        s.predicted_exponent = problem.predicted_exponent(j);
        s.abort_count = report.aborted_paths;
        s.slope = nan();
        const auto errs = report.interval_errors(j);
        const bool fittable = errs.size() >= 2 &&
                              std::all_of(errs.begin(), errs.end(), [](double e) { return e > 0.0; });
        if (fittable)
            s.slope = fit_slope(hs, errs);
        report.slopes.push_back(s);
    }

    if (report.aborted_paths > kMaxAbortFraction * config.paths)
        throw StudyFailure(std::to_string(report.aborted_paths) + " of " +
                               std::to_string(config.paths) +
                               " realizations aborted on non-finite values",
                           std::move(report));
    return report;
}

ReportFormat parse_format(const std::string& name)
{
    if (name == "csv")
        return ReportFormat::csv;
    if (name == "json")
        return ReportFormat::json;
    throw std::invalid_argument("unknown report format '" + name + "' (expected csv or json)");
}

void write_errors_csv(const ConvergenceReport& report, std::ostream& out)
{
    out << "level,N,h,interval_j,error,p\n";
    for (const auto& e : report.errors)
        out << e.level << ',' << e.steps_per_lag << ',' << format_double(e.h) << ','
            << e.interval << ',' << format_double(e.error) << ',' << format_double(e.p) << '\n';
}

void write_slopes_csv(const ConvergenceReport& report, std::ostream& out)
{
    out << "interval_j,slope,predicted_exponent,abort_count\n";
    for (const auto& s : report.slopes)
        out << s.interval << ',' << format_double(s.slope) << ','
            << format_double(s.predicted_exponent) << ',' << s.abort_count << '\n';
}

nlohmann::json to_json(const ConvergenceReport& report)
{
    const auto& c = report.config;
    const auto& ps = c.problem;
    nlohmann::json doc;
    doc["config"] = {
        {"problem",
         {{"family", to_string(ps.family)},
          {"alpha1", ps.alpha1},
          {"alpha2", ps.alpha2},
          {"gamma1", ps.gamma1},
          {"gamma2", ps.gamma2},
          {"tau", ps.tau},
          {"n", ps.n},
          {"x0", ps.x0},
          {"drift_rate", ps.drift_rate},
          {"sigma", ps.sigma}}},
        {"levels", c.levels},
        {"ref_exponent", c.ref_exponent},
        {"paths", c.paths},
        {"p", c.p},
    };
    doc["seed"] = c.master_seed;
    doc["retained_paths"] = report.retained_paths;
    doc["aborted_paths"] = report.aborted_paths;
    auto& errors = doc["errors"] = nlohmann::json::array();
    for (const auto& e : report.errors)
        errors.push_back({{"level", e.level},
                          {"N", e.steps_per_lag},
                          {"h", e.h},
                          {"interval_j", e.interval},
                          {"error", number_or_null(e.error)},
                          {"std_error", number_or_null(e.std_error)},
                          {"p", e.p}});
    auto& slopes = doc["slopes"] = nlohmann::json::array();
    for (const auto& s : report.slopes)
        slopes.push_back({{"interval_j", s.interval},
                          {"slope", number_or_null(s.slope)},
                          {"predicted_exponent", s.predicted_exponent},
                          {"abort_count", s.abort_count}});
    return doc;
}

ConvergenceReport report_from_json(const nlohmann::json& doc)
{
    ConvergenceReport r;
    const auto& c = doc.at("config");
    const auto& ps = c.at("problem");
    r.config.problem.family = parse_family(ps.at("family").get<std::string>());
    r.config.problem.alpha1 = ps.at("alpha1").get<double>();
    r.config.problem.alpha2 = ps.at("alpha2").get<double>();
    r.config.problem.gamma1 = ps.at("gamma1").get<double>();
    r.config.problem.gamma2 = ps.at("gamma2").get<double>();
    r.config.problem.tau = ps.at("tau").get<double>();
    r.config.problem.n = ps.at("n").get<int>();
    r.config.problem.x0 = ps.at("x0").get<double>();
    r.config.problem.drift_rate = ps.at("drift_rate").get<double>();
    r.config.problem.sigma = ps.at("sigma").get<double>();
    r.config.levels = c.at("levels").get<std::vector<int>>();
    r.config.ref_exponent = c.at("ref_exponent").get<int>();
    r.config.paths = c.at("paths").get<int>();
    r.config.p = c.at("p").get<double>();
    r.config.master_seed = doc.at("seed").get<std::uint64_t>();
    r.retained_paths = doc.at("retained_paths").get<int>();
    r.aborted_paths = doc.at("aborted_paths").get<int>();
    for (const auto& e : doc.at("errors")) {
        LevelError row;
        row.level = e.at("level").get<int>();
        row.steps_per_lag = e.at("N").get<int>();
        row.h = e.at("h").get<double>();
        row.interval = e.at("interval_j").get<int>();
        row.error = number_or_nan(e.at("error"));
        row.std_error = number_or_nan(e.at("std_error"));
        row.p = e.at("p").get<double>();
        r.errors.push_back(row);
    }
    for (const auto& s : doc.at("slopes")) {
        IntervalSlope row;
        row.interval = s.at("interval_j").get<int>();
        row.slope = number_or_nan(s.at("slope"));
        row.predicted_exponent = s.at("predicted_exponent").get<double>();
        row.abort_count = s.at("abort_count").get<int>();
        r.slopes.push_back(row);
    }
    return r;
}

std::filesystem::path slopes_path(const std::filesystem::path& csv_path)
{
    auto out = csv_path;
    out.replace_extension();
    out += ".slopes.csv";
    return out;
}

namespace {

std::ofstream open_for_write(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    return out;
}

void finish_write(std::ofstream& out, const std::filesystem::path& path)
{
    out.flush();
    if (!out)
        throw std::runtime_error("write to '" + path.string() + "' failed");
}

}  // namespace

void emit(const ConvergenceReport& report, ReportFormat format, const std::filesystem::path& path)
{
    if (format == ReportFormat::json) {
        auto out = open_for_write(path);
        out << to_json(report).dump(2) << '\n';
        finish_write(out, path);
        return;
    }
    {
        auto out = open_for_write(path);
        write_errors_csv(report, out);
        finish_write(out, path);
    }
    const auto side = slopes_path(path);
    auto out = open_for_write(side);
    write_slopes_csv(report, out);
    finish_write(out, side);
}

ConvergenceReport read_json_report(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open '" + path.string() + "' for reading");
    return report_from_json(nlohmann::json::parse(in));
}

ProbeResult regularity_probe(const SddeProblem& problem, const ProbeConfig& config)
{
    problem.validate();
    if (config.paths < 1)
        throw std::invalid_argument("regularity_probe: at least one path is required");
    if (config.interval < 0 || config.interval > config.n)
        throw std::invalid_argument("regularity_probe: interval outside 0..n");
    const DelayMesh fine(problem.tau, config.n, steps_for(config.ref_exponent));
    const int M = fine.steps_per_lag();
    if (config.max_gap_exponent < 1 || (1 << config.max_gap_exponent) >= M)
        throw std::invalid_argument("regularity_probe: need 1 <= max gap exponent < ref exponent");

    const int n_gaps = config.max_gap_exponent + 1;
    const auto n_paths = static_cast<std::size_t>(config.paths);
    const int d = problem.dim_x;
    // Per path and gap: sum of squared increments.
    std::vector<double> sums(n_paths * static_cast<std::size_t>(n_gaps), 0.0);

    parallel_for(n_paths, config.workers, [&](std::size_t k) {
        const auto realization = static_cast<std::uint64_t>(k);
        const auto lattice = sample_wiener_lattice(
            StreamKey::wiener(config.master_seed, realization), fine, problem.dim_w);
        const auto gammas = sample_gamma_stream(
            StreamKey::reference_gamma(config.master_seed, realization),
            static_cast<std::size_t>(fine.intervals()) * M);
        const auto path =
            solve_on_increments(problem, fine, lattice.increments(), gammas, Scheme::randomized);
        const auto seg = path.segment(config.interval);
        for (int q = 0; q < n_gaps; ++q) {
            const int gap = 1 << q;
            CompensatedSum acc;
            for (int s = 0; s + gap <= M; ++s) {
                double sq = 0.0;
                for (int r = 0; r < d; ++r) {
                    const double diff = seg[static_cast<std::size_t>(s + gap) * d + r] -
                                        seg[static_cast<std::size_t>(s) * d + r];
                    sq += diff * diff;
                }
                acc.add(sq);
            }
            sums[k * static_cast<std::size_t>(n_gaps) + static_cast<std::size_t>(q)] = acc.value();
        }
    });

    ProbeResult result;
    for (int q = 0; q < n_gaps; ++q) {
        const int gap = 1 << q;
        CompensatedSum total;
        for (std::size_t k = 0; k < n_paths; ++k)
            total.add(sums[k * static_cast<std::size_t>(n_gaps) + static_cast<std::size_t>(q)]);
        const double samples = static_cast<double>(n_paths) * static_cast<double>(M - gap + 1);
        result.gaps.push_back(gap * fine.h());
        result.rms.push_back(std::sqrt(total.value() / samples));
    }
    result.exponent = fit_slope(result.gaps, result.rms);
    return result;
}

}  // namespace sdde
