#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sdde/core.hpp"
#include "sdde/problems.hpp"

namespace sdde {

/// Monte Carlo strong-convergence study.
///
/// Each realization ω_k draws one Brownian lattice at the reference resolution
/// 2^r steps per lag. The reference run uses it directly; the run at level l
/// (N = 2^l) sums it in blocks of c = 2^(r−l). Both use the randomized drift
/// time, with independent gamma streams. The per-interval error is the max
/// deviation over the coarse nodes, aggregated as (mean dev^p)^(1/p).
struct StudyConfig {
    ProblemSpec problem;
    std::vector<int> levels{5, 6, 7, 8, 9, 10};
    int ref_exponent = 14;
    int paths = 1000;
    double p = 2.0;
    std::uint64_t master_seed = 0;
    int workers = 1;  ///< execution only; never changes results

    void validate() const;
};

struct LevelError {
    int level = 0;
    int steps_per_lag = 0;
    double h = 0.0;
    int interval = 0;
    double error = 0.0;
    double std_error = 0.0;  ///< Monte Carlo standard error of `error` (delta method)
    double p = 2.0;
};

struct IntervalSlope {
    int interval = 0;
    double slope = 0.0;  ///< NaN when some error is not positive or fewer than 2 levels
    double predicted_exponent = 0.0;
    int abort_count = 0;
};

struct ConvergenceReport {
    StudyConfig config;
    std::vector<LevelError> errors;  ///< level-major, interval-minor
    std::vector<IntervalSlope> slopes;
    int retained_paths = 0;
    int aborted_paths = 0;

    /// Error estimates for one interval in level order.
    std::vector<double> interval_errors(int j) const;
    std::vector<double> step_sizes() const;
};

/// Thrown when more than 0.1 % of the realizations abort; carries what was
/// computed from the surviving ones.
class StudyFailure : public std::runtime_error {
public:
    StudyFailure(const std::string& what, ConvergenceReport partial);
    const ConvergenceReport& partial() const noexcept { return partial_; }

private:
    ConvergenceReport partial_;
};

struct RealizationOptions {
    /// Feed the coarse run the reference gamma stream instead of its own.
    /// Only meaningful for coupling checks at c = 1.
    bool share_reference_gamma = false;
};

/// Per-interval max deviation between the level-l run and the reference run
/// for realization `realization`. Throws SolveError if either run aborts.
std::vector<double> run_realization(const StudyConfig& config, const SddeProblem& problem,
                                    std::uint64_t realization, int level,
                                    RealizationOptions options = {});

/// ((1/K) Σ dev^p)^(1/p) with compensated summation in the given order.
double mse_error(std::span<const double> deviations, double p);

struct ErrorEstimate {
    double error = 0.0;
    double std_error = 0.0;
};
ErrorEstimate mse_error_with_spread(std::span<const double> deviations, double p);

/// Least-squares slope of log2(error) against log2(h).
double fit_slope(std::span<const double> hs, std::span<const double> errors);

ConvergenceReport run_study(const StudyConfig& config);
/// Study on caller-supplied coefficients (config.problem supplies tau and n).
ConvergenceReport run_study(const StudyConfig& config, const SddeProblem& problem);

enum class ReportFormat { csv, json };
ReportFormat parse_format(const std::string& name);

void write_errors_csv(const ConvergenceReport& report, std::ostream& out);
void write_slopes_csv(const ConvergenceReport& report, std::ostream& out);
nlohmann::json to_json(const ConvergenceReport& report);
ConvergenceReport report_from_json(const nlohmann::json& doc);

/// Location of the slopes table written next to a CSV report: study.csv →
/// study.slopes.csv.
std::filesystem::path slopes_path(const std::filesystem::path& csv_path);

/// CSV writes the error table to `path` and the slopes table to
/// slopes_path(path); JSON writes one document. I/O failures throw
/// std::runtime_error naming the destination.
void emit(const ConvergenceReport& report, ReportFormat format,
          const std::filesystem::path& path);
ConvergenceReport read_json_report(const std::filesystem::path& path);

struct ProbeConfig {
    int n = 0;             ///< horizon parameter of the simulated paths
    int ref_exponent = 14; ///< paths resolved at 2^r steps per lag
    int paths = 200;
    int interval = 0;      ///< lag interval the gaps are measured in
    int max_gap_exponent = 5;  ///< gaps 2^0 .. 2^q fine steps
    std::uint64_t master_seed = 0;
    int workers = 1;
};

struct ProbeResult {
    std::vector<double> gaps;  ///< |t − s|
    std::vector<double> rms;   ///< ‖X(t) − X(s)‖_{L²} averaged over positions
    double exponent = 0.0;
};

/// Empirical Hölder exponent of the solution in mean square over one lag
/// interval, from dyadic gaps of the reference-resolution paths.
ProbeResult regularity_probe(const SddeProblem& problem, const ProbeConfig& config);

}  // namespace sdde
