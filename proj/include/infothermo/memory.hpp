#pragma once

// Memory layout: the memory Hilbert space split into orthogonal branches, one
// per stored outcome, each with its own diagonal Hamiltonian.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include <fmt/format.h>

#include "infothermo/errors.hpp"
#include "infothermo/operator.hpp"
#include "infothermo/policy.hpp"

namespace infothermo {

/// Shifted log-sum-exp of -E/T; the building block of every partition function here.
inline double log_partition(std::span<const double> energies, double temperature) {
    if (energies.empty()) return -std::numeric_limits<double>::infinity();
    const double lo = *std::min_element(energies.begin(), energies.end());
    double acc = 0.0;
    for (double e : energies) acc += std::exp(-(e - lo) / temperature);
    return std::log(acc) - lo / temperature;
}

class MemoryLayout {
public:
    /// `branch_energies[k]` are the levels of outcome k; outcome 0 is the standard state.
    explicit MemoryLayout(std::vector<std::vector<double>> branch_energies) : branches_(std::move(branch_energies)) {
        if (branches_.empty()) throw InvariantViolation("memory layout needs at least one branch");
        offsets_.reserve(branches_.size() + 1);
        offsets_.push_back(0);
        for (std::size_t k = 0; k < branches_.size(); ++k) {
            if (branches_[k].empty()) throw InvariantViolation(fmt::format("memory branch {} has no levels", k));
            for (double e : branches_[k])
                if (!std::isfinite(e)) throw InvariantViolation(fmt::format("memory branch {} has a non-finite level", k));
            offsets_.push_back(offsets_.back() + branches_[k].size());
        }
    }

    /// Single-level branches with Z_k proportional to the box volumes t and 1 - t.
    static MemoryLayout two_box(double t, Temperature temperature) {
        if (!(t > 0.0 && t < 1.0)) throw InvariantViolation(fmt::format("two-box volume fraction must lie in (0,1), got {}", t));
        const double kt = temperature.value();
        return MemoryLayout({{-kt * std::log(t)}, {-kt * std::log(1.0 - t)}});
    }

    /// N identical branches with the given levels.
    static MemoryLayout symmetric(std::size_t outcomes, const std::vector<double>& levels) {
        return MemoryLayout(std::vector<std::vector<double>>(outcomes, levels));
    }

    std::size_t outcome_count() const noexcept { return branches_.size(); }
    std::size_t dim() const noexcept { return offsets_.back(); }
    std::size_t branch_dim(std::size_t k) const { return branches_.at(k).size(); }
    std::size_t offset(std::size_t k) const { return offsets_.at(k); }
    const std::vector<double>& branch(std::size_t k) const { return branches_.at(k); }
    const std::vector<std::vector<double>>& branches() const noexcept { return branches_; }

    std::size_t branch_of(std::size_t level) const {
        if (level >= dim()) throw DimensionMismatch(fmt::format("level {} outside memory of dimension {}", level, dim()));
        const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), level);
        return static_cast<std::size_t>(it - offsets_.begin()) - 1;
    }

    /// All levels in block order.
    std::vector<double> energies() const {
        std::vector<double> e;
        e.reserve(dim());
        for (const auto& b : branches_) e.insert(e.end(), b.begin(), b.end());
        return e;
    }

    HermitianOperator hamiltonian(std::size_t k) const { return HermitianOperator::diagonal(branch(k)); }
    HermitianOperator hamiltonian() const {
        const auto e = energies();
        return HermitianOperator::diagonal(e);
    }

    /// Canonical populations of branch k embedded in the full memory.
    std::vector<double> canonical_populations(std::size_t k, Temperature temperature) const {
        std::vector<double> p(dim(), 0.0);
        const auto& b = branch(k);
        const double log_z = log_partition(b, temperature.value());
        for (std::size_t i = 0; i < b.size(); ++i) p[offset(k) + i] = std::exp(-b[i] / temperature.value() - log_z);
        return p;
    }

private:
    std::vector<std::vector<double>> branches_;
    std::vector<std::size_t> offsets_;
};

struct FreeEnergyReport {
    std::vector<double> log_partition;  // ln Z_k
    std::vector<double> free_energy;    // F_k = -T ln Z_k
    std::vector<double> probabilities;  // p_k used for the average
    double delta_free_energy = 0.0;     // sum_k p_k F_k - F_0
};

inline std::vector<double> validated_distribution(std::span<const double> p, std::size_t expected_size) {
    if (p.size() != expected_size)
        throw DimensionMismatch(fmt::format("distribution has {} entries, expected {}", p.size(), expected_size));
    double sum = 0.0;
    for (double x : p) {
        if (!(x >= 0.0) || !std::isfinite(x)) throw InvariantViolation(fmt::format("invalid probability {}", x));
        sum += x;
    }
    if (std::abs(sum - 1.0) > policy.probability_sum)
        throw InvariantViolation(fmt::format("probabilities sum to {} (expected 1)", sum));
    return {p.begin(), p.end()};
}

inline FreeEnergyReport free_energies(const MemoryLayout& layout, Temperature temperature, std::span<const double> p) {
    FreeEnergyReport r;
    r.probabilities = validated_distribution(p, layout.outcome_count());
    const double kt = temperature.value();
    for (std::size_t k = 0; k < layout.outcome_count(); ++k) {
        const double lz = log_partition(layout.branch(k), kt);
        r.log_partition.push_back(lz);
        r.free_energy.push_back(-kt * lz);
    }
    double avg = 0.0;
    for (std::size_t k = 0; k < layout.outcome_count(); ++k)
        if (r.probabilities[k] > 0.0) avg += r.probabilities[k] * r.free_energy[k];
    r.delta_free_energy = avg - r.free_energy[0];
    return r;
}

} // namespace infothermo
