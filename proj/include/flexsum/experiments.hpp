#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "flexsum/aggregate.hpp"

namespace flexsum
{

struct ExperimentRecord
{
    std::string experiment;
    std::uint64_t seed = 0;
    std::size_t trial = 0;
    std::size_t n = 0;
    std::size_t horizon = 0;
    std::string method;  // gpoly | homothet | exact
    double j_approx = 0.0;
    double j_exact = 0.0;
    double error = 0.0;
    double wall_ms = 0.0;
};

/// (J_approx - J_exact) / J_exact; 0 when both vanish, +inf when only J_exact does.
double approximation_error(double j_approx, double j_exact);

std::vector<std::size_t> default_horizons();  // 2, 4, ..., 24

struct ApproxErrorConfig
{
    std::size_t n = 100;
    std::vector<std::size_t> horizons = default_horizons();
    std::size_t trials = 50;
    std::uint64_t seed = 1;
    SamplerConfig sampler;
    unsigned jobs = 1;
};

/// Minimization of c.u with c ~ U[0, 1]^T per trial. Every trial draws one population and one cost
/// vector at the longest horizon; shorter horizons use their prefixes. With `fixed` set, that
/// population is reused in every trial and only the cost varies.
std::vector<ExperimentRecord> run_approx_error(const ApproxErrorConfig& cfg, const Population* fixed = nullptr);

struct HorizonSummary
{
    std::size_t horizon = 0;
    std::size_t trials = 0;
    double mean_gpoly = 0.0;
    double mean_homothet = 0.0;
};

std::vector<HorizonSummary> summarize(const std::vector<ExperimentRecord>& records);

/// Least-squares slope of y against x.
double regression_slope(const std::vector<double>& x, const std::vector<double>& y);

enum class SignalKind
{
    kInside,  // random convex combination of aggregate greedy vertices
    kSine,    // mid-range feasible baseline plus a sinusoid
    kZero
};

struct SignalConfig
{
    SignalKind kind = SignalKind::kInside;
    std::uint64_t seed = 1;
    int vertices = 5;
    double amplitude = 0.3;  // relative to the baseline mean
    double period = 0.0;     // periods; 0 means the horizon
    double phase = 0.0;
};

std::string to_string(SignalKind kind);
SignalKind signal_kind_from_string(const std::string& s);

Vec synthesize_signal(const AggregateGPoly& agg, const SignalConfig& cfg);

struct TrackingComparison
{
    TrackingResult gpoly;
    TrackingResult homothet;
};

TrackingComparison compare_tracking(const Population& pop, std::span<const double> signal,
                                    const TrackingConfig& cfg = {}, unsigned jobs = 1);

struct SuiteReport
{
    std::string name;
    std::size_t checks = 0;
    std::size_t failures = 0;
    std::size_t skipped = 0;
    std::vector<std::string> messages;  // first few failures

    bool passed() const { return failures == 0; }
    void fail(std::string msg);
};

/// base_hrep(approx) inside F for every member (support comparison).
SuiteReport suite_containment(const Population& pop, double tol = 1e-8);

/// Moving any bound outward by delta breaks containment. Moves that do not change B (the support of
/// B along the affected prefix grows by at most `effective`) are counted as skipped.
SuiteReport suite_maximality(const Population& pop, double delta = 1e-4, double effective = 1e-6);

/// Recursion against support LPs, submodularity, supermodularity, and the paramodular cross
/// inequality. Exhaustive for T <= 5, sampled otherwise.
SuiteReport suite_set_functions(const Population& pop, std::uint64_t seed = 1, double tol = 1e-7);

/// Greedy against LP over base_hrep per member and against summed LPs for the aggregate.
SuiteReport suite_greedy(const Population& pop, std::size_t costs = 100, std::uint64_t seed = 1,
                         double rel_tol = 1e-6, unsigned jobs = 1);

std::vector<SuiteReport> run_validation(const Population& pop, std::uint64_t seed = 1, unsigned jobs = 1);

}  // namespace flexsum
