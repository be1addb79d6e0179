#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <filesystem>
#include <fstream>
#include <bit>
#include <limits>
#include <sstream>

#include "sdde/brownian.hpp"
#include "sdde/experiment.hpp"
#include "sdde/solver.hpp"

using namespace sdde;

namespace {

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::size_t count_lines(const std::string& s)
{
    std::size_t n = 0;
    for (char c : s)
        n += c == '\n';
    return n;
}

StudyConfig small_config(ProblemFamily family)
{
    StudyConfig c;
    c.problem.family = family;
    c.problem.n = 2;
    c.levels = {3, 4, 5};
    c.ref_exponent = 8;
    c.paths = 16;
    c.master_seed = 77;
    return c;
}

std::filesystem::path scratch_dir()
{
    auto dir = std::filesystem::temp_directory_path() / "sdde_experiment_tests";
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("mean-square aggregation")
{
    const std::vector<double> zeros(5, 0.0);
    CHECK(mse_error(zeros, 2.0) == 0.0);
    const std::vector<double> one = {0.3};
    CHECK(mse_error(one, 2.0) == doctest::Approx(0.3).epsilon(1e-15));
    const std::vector<double> two = {3.0, 4.0};
    CHECK(mse_error(two, 2.0) == doctest::Approx(3.5355339059327378).epsilon(1e-14));
    CHECK(mse_error(two, 4.0) == doctest::Approx(std::pow((81.0 + 256.0) / 2.0, 0.25)));
    CHECK_THROWS_AS(mse_error(std::vector<double>{}, 2.0), std::invalid_argument);

    const auto est = mse_error_with_spread(two, 2.0);
    // Var of {9, 16} is 24.5; se of mean sqrt(24.5/2); delta method divides by 2e.
    CHECK(est.std_error == doctest::Approx(std::sqrt(24.5 / 2.0) / (2.0 * std::sqrt(12.5))));
}

TEST_CASE("slope fit on exact power laws")
{
    std::vector<double> hs, half, lin, flat;
    for (int l = 5; l <= 10; ++l) {
        const double h = std::ldexp(1.0, -l);
        hs.push_back(h);
        half.push_back(3.0 * std::sqrt(h));
        lin.push_back(0.7 * h);
        flat.push_back(2.5);
    }
    CHECK(std::fabs(fit_slope(hs, half) - 0.5) < 1e-12);
    CHECK(std::fabs(fit_slope(hs, lin) - 1.0) < 1e-12);
    CHECK(std::fabs(fit_slope(hs, flat)) < 1e-12);
    auto bad = half;
    bad[2] = 0.0;
    CHECK_THROWS_AS(fit_slope(hs, bad), std::invalid_argument);
    CHECK_THROWS_AS(fit_slope(std::span(hs).first(1), std::span(half).first(1)),
                    std::invalid_argument);
}

TEST_CASE("realization deviations vanish for frozen dynamics")
{
    auto c = small_config(ProblemFamily::brownian);
    c.problem.sigma = 0.0;
    const auto p = make_problem(c.problem);
    for (int level : {3, 5})
        for (double d : run_realization(c, p, 3, level))
            CHECK(d == 0.0);
}

TEST_CASE("shared gamma at full resolution reproduces the reference")
{
    auto c = small_config(ProblemFamily::multiplicative_k1);
    c.problem.gamma1 = 3.0;
    c.problem.gamma2 = 0.5;
    const auto p = make_problem(c.problem);
    RealizationOptions shared;
    shared.share_reference_gamma = true;
    for (double d : run_realization(c, p, 0, c.ref_exponent, shared))
        CHECK(d == 0.0);
    // With its own gamma stream the same mesh differs.
    double total = 0.0;
    for (double d : run_realization(c, p, 0, c.ref_exponent))
        total += d;
    CHECK(total > 0.0);
}

TEST_CASE("deterministic delay equation is resolved at level 10")
{
    StudyConfig c;
    c.problem.family = ProblemFamily::delay_linear;
    c.problem.n = 1;
    c.ref_exponent = 14;
    const auto p = make_problem(c.problem);
    const auto devs = run_realization(c, p, 0, 10);
    CHECK(devs[0] <= 1e-3);
    CHECK(devs[1] <= 1e-3);
}

TEST_CASE("constant noise couples exactly")
{
    for (double sigma : {0.5, 1.0, 2.0}) {
        auto c = small_config(ProblemFamily::brownian);
        c.problem.sigma = sigma;
        const auto report = run_study(c);
        for (const auto& e : report.errors)
            CHECK(e.error == 0.0);
        for (const auto& s : report.slopes)
            CHECK(std::isnan(s.slope));
    }
}

TEST_CASE("deterministic delay study has first-order slopes past the first interval")
{
    StudyConfig c;
    c.problem.family = ProblemFamily::delay_linear;
    c.problem.n = 3;
    c.levels = {5, 6, 7, 8, 9, 10};
    c.ref_exponent = 14;
    c.paths = 2;
    const auto r = run_study(c);
    // x' = 1 on the first interval, which Euler integrates exactly on a dyadic mesh.
    for (double e : r.interval_errors(0))
        CHECK(e == 0.0);
    for (int j = 1; j <= 3; ++j)
        CHECK(r.slopes[j].slope == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("study output is independent of the worker count")
{
    auto c = small_config(ProblemFamily::additive_k1);
    c.problem.alpha1 = 0.5;
    c.paths = 24;
    c.workers = 1;
    const auto a = run_study(c);
    c.workers = 4;
    const auto b = run_study(c);
    CHECK(to_json(a).dump() == to_json(b).dump());
    std::ostringstream ca, cb;
    write_errors_csv(a, ca);
    write_errors_csv(b, cb);
    CHECK(ca.str() == cb.str());
}

TEST_CASE("estimator spread shrinks with more paths")
{
    StudyConfig c;
    c.problem.family = ProblemFamily::gbm;
    c.problem.n = 0;
    c.problem.sigma = 0.2;
    c.levels = {4, 6};
    c.ref_exponent = 9;
    c.paths = 400;
    const auto small = run_study(c);
    c.paths = 1600;
    const auto large = run_study(c);
    for (std::size_t i = 0; i < small.errors.size(); ++i) {
        CHECK(small.errors[i].std_error > 0.0);
        CHECK(large.errors[i].std_error < 0.75 * small.errors[i].std_error);
        CHECK(std::fabs(large.errors[i].error - small.errors[i].error) <=
              4.0 * small.errors[i].std_error);
    }
}

TEST_CASE("too many aborted realizations fail the study")
{
    auto c = small_config(ProblemFamily::custom);
    SddeProblem p;
    p.x0 = {0.0};
    p.drift = [](double, std::span<const double> x, std::span<const double>, std::span<double> o) {
        o[0] = x[0] > 0.5 ? std::numeric_limits<double>::quiet_NaN() : 0.0;
    };
    p.diffusion = [](double, std::span<const double>, std::span<const double>,
                     std::span<double> o) { o[0] = 1.0; };
    c.problem.custom = p;
    try {
        (void)run_study(c);
        FAIL("expected StudyFailure");
    } catch (const StudyFailure& f) {
        const auto& r = f.partial();
        CHECK(r.aborted_paths > 0);
        CHECK(r.aborted_paths + r.retained_paths == c.paths);
        CHECK(r.slopes.at(0).abort_count == r.aborted_paths);
    }
}

TEST_CASE("study configuration is validated")
{
    auto c = small_config(ProblemFamily::additive_k2);
    c.levels = {3, 8};
    CHECK_THROWS_AS(run_study(c), std::invalid_argument);
    c = small_config(ProblemFamily::additive_k2);
    c.paths = 1;
    CHECK_THROWS_AS(run_study(c), std::invalid_argument);
    c = small_config(ProblemFamily::additive_k2);
    c.levels = {3, 3};
    CHECK_THROWS_AS(run_study(c), std::invalid_argument);
}

TEST_CASE("csv emission")
{
    const auto dir = scratch_dir();
    ConvergenceReport empty;
    empty.config.levels = {};
    emit(empty, ReportFormat::csv, dir / "empty.csv");
    CHECK(slurp(dir / "empty.csv") == "level,N,h,interval_j,error,p\n");
    CHECK(slurp(dir / "empty.slopes.csv") == "interval_j,slope,predicted_exponent,abort_count\n");

    auto c = small_config(ProblemFamily::additive_k2);
    c.levels = {3, 4};
    const auto report = run_study(c);
    emit(report, ReportFormat::csv, dir / "two.csv");
    const auto text = slurp(dir / "two.csv");
    CHECK(count_lines(text) == 1 + 2 * 3);
    CHECK(text.rfind("level,N,h,interval_j,error,p\n3,8,0.125,0,", 0) == 0);
    CHECK(count_lines(slurp(dir / "two.slopes.csv")) == 1 + 3);
}

TEST_CASE("json round trip is exact")
{
    auto c = small_config(ProblemFamily::multiplicative_k2);
    c.problem.alpha1 = 0.5;
    c.problem.alpha2 = 0.5;
    c.problem.gamma2 = 0.5;
    c.master_seed = 0xFFFFFFFFFFFFFFF1ULL;
    const auto report = run_study(c);
    const auto path = scratch_dir() / "round.json";
    emit(report, ReportFormat::json, path);
    const auto back = read_json_report(path);
    CHECK(to_json(back).dump() == to_json(report).dump());
    CHECK(back.config.master_seed == c.master_seed);
    for (std::size_t i = 0; i < report.errors.size(); ++i)
        CHECK(std::bit_cast<std::uint64_t>(back.errors[i].error) ==
              std::bit_cast<std::uint64_t>(report.errors[i].error));
}

TEST_CASE("emission failures name the destination")
{
    ConvergenceReport r;
    const std::filesystem::path bad = "/nonexistent-dir/for/sure/out.csv";
    try {
        emit(r, ReportFormat::csv, bad);
        FAIL("expected failure");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find(bad.string()) != std::string::npos);
    }
    CHECK_THROWS_AS(parse_format("xml"), std::invalid_argument);
}

TEST_CASE("regularity probe on controls")
{
    ProblemSpec bm;
    bm.family = ProblemFamily::brownian;
    bm.n = 0;
    ProbeConfig cfg;
    cfg.n = 0;
    cfg.ref_exponent = 12;
    cfg.paths = 40;
    cfg.max_gap_exponent = 5;
    const auto r = regularity_probe(make_problem(bm), cfg);
    CHECK(r.gaps.size() == 6);
    CHECK(r.exponent == doctest::Approx(0.5).epsilon(0.04));

    ProblemSpec smooth;
    smooth.family = ProblemFamily::delay_linear;
    smooth.n = 1;
    cfg.n = 1;
    cfg.interval = 1;
    cfg.paths = 2;
    const auto s = regularity_probe(make_problem(smooth), cfg);
    CHECK(s.exponent == doctest::Approx(1.0).epsilon(0.02));
}

}
