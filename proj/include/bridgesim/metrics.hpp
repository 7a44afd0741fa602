#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bridgesim {

// Per-joint population standard deviation of (measured - reference), in
// degrees, on time-aligned series sampled at the control tick grid.
struct TrackingReport {
    std::string mode;
    std::vector<double> std_dev;
    std::vector<double> max_abs;

    double worst_std() const;
    double worst_max_abs() const;
};

// ref/meas: [sample][joint]. Throws std::invalid_argument on shape mismatch.
TrackingReport tracking_std(const std::vector<std::vector<double>>& ref,
                            const std::vector<std::vector<double>>& meas,
                            std::string mode);

// Fixed-width bins anchored at zero so refining the width subdivides bins
// exactly.
struct Histogram {
    double bin_ms = 1.0;
    int64_t first_bin = 0;  // absolute grid index of counts[0]
    std::vector<uint64_t> counts;
    double min = 0.0;
    double max = 0.0;
    uint64_t total = 0;

    double bin_lo(size_t i) const { return (static_cast<double>(first_bin) + static_cast<double>(i)) * bin_ms; }
    size_t nonzero_bins() const;
};

Histogram histogram(const std::vector<double>& samples_ms, double bin_ms);

double fraction_at_least(const std::vector<double>& samples, double threshold);

// Sorted (value, count) pairs, merging values within tol of each other.
std::vector<std::pair<double, uint64_t>> value_counts(std::vector<double> samples,
                                                      double tol = 1e-9);

struct GoalRecord {
    double rate_hz = 0.0;
    bool success = false;
};

struct RateByFrequency {
    double rate_hz = 0.0;
    uint64_t issued = 0;
    uint64_t succeeded = 0;
    double rate() const {
        return issued == 0 ? 0.0 : static_cast<double>(succeeded) / static_cast<double>(issued);
    }
};

// Successes / issued grouped by request frequency, ascending.
std::vector<RateByFrequency> success_rate(const std::vector<GoalRecord>& log);

}  // namespace bridgesim
