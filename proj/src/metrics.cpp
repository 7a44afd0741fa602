#include "bridgesim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace bridgesim {

double TrackingReport::worst_std() const {
    return std_dev.empty() ? 0.0 : *std::max_element(std_dev.begin(), std_dev.end());
}

double TrackingReport::worst_max_abs() const {
    return max_abs.empty() ? 0.0 : *std::max_element(max_abs.begin(), max_abs.end());
}

TrackingReport tracking_std(const std::vector<std::vector<double>>& ref,
                            const std::vector<std::vector<double>>& meas,
                            std::string mode) {
    if (ref.size() != meas.size()) throw std::invalid_argument("series length mismatch");
    if (ref.empty()) throw std::invalid_argument("empty series");
    const size_t dof = ref.front().size();
    for (size_t i = 0; i < ref.size(); ++i)
        if (ref[i].size() != dof || meas[i].size() != dof)
            throw std::invalid_argument("joint count mismatch");

    TrackingReport rep;
    rep.mode = std::move(mode);
    rep.std_dev.resize(dof);
    rep.max_abs.resize(dof);
    const double n = static_cast<double>(ref.size());
    for (size_t j = 0; j < dof; ++j) {
        double mean = 0.0, max_abs = 0.0;
        for (size_t i = 0; i < ref.size(); ++i) {
            const double e = meas[i][j] - ref[i][j];
            mean += e;
            max_abs = std::max(max_abs, std::abs(e));
        }
        mean /= n;
        double var = 0.0;
        for (size_t i = 0; i < ref.size(); ++i) {
            const double e = meas[i][j] - ref[i][j] - mean;
            var += e * e;
        }
        rep.std_dev[j] = std::sqrt(var / n);  // population
        rep.max_abs[j] = max_abs;
    }
    return rep;
}

size_t Histogram::nonzero_bins() const {
    size_t n = 0;
    for (uint64_t c : counts) n += c > 0;
    return n;
}

Histogram histogram(const std::vector<double>& samples_ms, double bin_ms) {
    if (!(bin_ms > 0.0)) throw std::invalid_argument("bin width must be positive");
    Histogram h;
    h.bin_ms = bin_ms;
    if (samples_ms.empty()) return h;
    h.min = *std::min_element(samples_ms.begin(), samples_ms.end());
    h.max = *std::max_element(samples_ms.begin(), samples_ms.end());
    const int64_t lo = static_cast<int64_t>(std::floor(h.min / bin_ms));
    const int64_t hi = static_cast<int64_t>(std::floor(h.max / bin_ms));
    h.first_bin = lo;
    h.counts.assign(static_cast<size_t>(hi - lo + 1), 0);
    for (double x : samples_ms) {
        const int64_t b = static_cast<int64_t>(std::floor(x / bin_ms));
        h.counts[static_cast<size_t>(b - lo)]++;
    }
    h.total = samples_ms.size();
    return h;
}

double fraction_at_least(const std::vector<double>& samples, double threshold) {
    if (samples.empty()) return 0.0;
    size_t n = 0;
    for (double x : samples) n += x >= threshold;
    return static_cast<double>(n) / static_cast<double>(samples.size());
}

std::vector<std::pair<double, uint64_t>> value_counts(std::vector<double> samples, double tol) {
    std::vector<std::pair<double, uint64_t>> out;
    std::sort(samples.begin(), samples.end());
    for (double x : samples) {
        if (!out.empty() && x - out.back().first <= tol) {
            out.back().second++;
        } else {
            out.emplace_back(x, 1);
        }
    }
    return out;
}

std::vector<RateByFrequency> success_rate(const std::vector<GoalRecord>& log) {
    std::map<double, RateByFrequency> groups;
    for (const auto& g : log) {
        auto& r = groups[g.rate_hz];
        r.rate_hz = g.rate_hz;
        r.issued++;
        r.succeeded += g.success;
    }
    std::vector<RateByFrequency> out;
    out.reserve(groups.size());
    for (auto& [_, r] : groups) out.push_back(r);
    return out;
}

}  // namespace bridgesim
