#pragma once

// Quench-and-thermalize protocol engine on classical level populations.
//
// A Quench replaces the level energies at fixed populations and is charged as
// work; a Thermalize relaxes populations to the canonical distribution of the
// current energies (within each branch, or across all branches when the
// barriers are down) and is charged as heat.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <variant>
#include <vector>

#include <fmt/format.h>

#include "infothermo/errors.hpp"
#include "infothermo/memory.hpp"
#include "infothermo/policy.hpp"
#include "infothermo/random.hpp"

namespace infothermo {

struct Quench {
    std::vector<double> energies;
};

enum class ThermalScope { within_branches, across_branches };

struct Thermalize {
    ThermalScope scope = ThermalScope::within_branches;
};

using ProtocolStep = std::variant<Quench, Thermalize>;
using Schedule = std::vector<ProtocolStep>;

struct ProtocolRecord {
    Schedule steps;
    double temperature = 1.0;
    std::vector<double> initial_populations;
    std::vector<double> initial_energies;
    std::vector<double> final_populations;
    std::vector<double> final_energies;
    double work = 0.0;
    double heat = 0.0;

    static double mean_energy(std::span<const double> p, std::span<const double> e) {
        double acc = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) acc += p[i] * e[i];
        return acc;
    }

    double internal_energy_change() const {
        return mean_energy(final_populations, final_energies) - mean_energy(initial_populations, initial_energies);
    }

    /// |Delta E - (W + Q)|
    double first_law_residual() const { return std::abs(internal_energy_change() - (work + heat)); }
};

/// Probability mass per branch.
inline std::vector<double> branch_weights(const MemoryLayout& layout, std::span<const double> populations) {
    std::vector<double> w(layout.outcome_count(), 0.0);
    for (std::size_t k = 0; k < layout.outcome_count(); ++k)
        for (std::size_t i = 0; i < layout.branch_dim(k); ++i) w[k] += populations[layout.offset(k) + i];
    return w;
}

/// Canonical populations of `energies` over [first, last), scaled to `mass`.
inline void fill_canonical(std::span<double> out, std::span<const double> energies, double temperature, double mass) {
    if (out.empty()) return;
    const double lo = *std::min_element(energies.begin(), energies.end());
    double z = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) z += (out[i] = std::exp(-(energies[i] - lo) / temperature));
    for (auto& x : out) x *= mass / z;
}

/// Branch-weighted mixture of per-branch canonical states.
inline std::vector<double> branch_canonical_mixture(const MemoryLayout& layout, Temperature temperature, std::span<const double> weights) {
    std::vector<double> p(layout.dim(), 0.0);
    for (std::size_t k = 0; k < layout.outcome_count(); ++k) {
        const auto& b = layout.branch(k);
        fill_canonical(std::span<double>(p).subspan(layout.offset(k), b.size()), b, temperature.value(), weights[k]);
    }
    return p;
}

/// Applies a schedule to an initial population vector; energies start at the layout's levels.
inline ProtocolRecord run_protocol(const MemoryLayout& layout, Temperature temperature, std::span<const double> initial, Schedule schedule) {
    const std::size_t n = layout.dim();
    if (initial.size() != n) throw DimensionMismatch(fmt::format("initial populations have {} entries, memory has {}", initial.size(), n));
    validated_distribution(initial, n);

    ProtocolRecord rec;
    rec.temperature = temperature.value();
    rec.initial_populations.assign(initial.begin(), initial.end());
    rec.initial_energies = layout.energies();
    std::vector<double> p = rec.initial_populations;
    std::vector<double> e = rec.initial_energies;
    const double kt = temperature.value();

    for (const auto& step : schedule) {
        if (const auto* q = std::get_if<Quench>(&step)) {
            if (q->energies.size() != n)
                throw DimensionMismatch(fmt::format("quench has {} energies, memory has {}", q->energies.size(), n));
            for (std::size_t i = 0; i < n; ++i) {
                if (!std::isfinite(q->energies[i])) throw InvariantViolation("quench energy is not finite");
                rec.work += p[i] * (q->energies[i] - e[i]);
            }
            e = q->energies;
        } else {
            const auto& th = std::get<Thermalize>(step);
            std::vector<double> next(n);
            if (th.scope == ThermalScope::across_branches) {
                fill_canonical(next, e, kt, 1.0);
            } else {
                const auto w = branch_weights(layout, p);
                for (std::size_t k = 0; k < layout.outcome_count(); ++k) {
                    const auto off = layout.offset(k);
                    const auto len = layout.branch_dim(k);
                    fill_canonical(std::span<double>(next).subspan(off, len), std::span<const double>(e).subspan(off, len), kt, w[k]);
                }
            }
            for (std::size_t i = 0; i < n; ++i) rec.heat += (next[i] - p[i]) * e[i];
            p = std::move(next);
        }
    }
    rec.final_populations = std::move(p);
    rec.final_energies = std::move(e);
    rec.steps = std::move(schedule);
    return rec;
}

// ---------------------------------------------------------------------------
// Schedule builders

enum class RampShape { linear, geometric };

struct RampOptions {
    std::size_t steps = 10000;
    RampShape shape = RampShape::geometric;
    double growth = 100.0;  ///< last/first increment ratio of a geometric ramp
};

enum class DenseEnd { start, end };

/// Fractions f_1 < ... < f_n = 1 along a ramp; geometric ramps put their small steps at `dense`.
inline std::vector<double> ramp_fractions(const RampOptions& opt, DenseEnd dense) {
    const std::size_t n = std::max<std::size_t>(opt.steps, 1);
    std::vector<double> inc(n, 1.0);
    if (opt.shape == RampShape::geometric && n > 1) {
        const double r = std::pow(opt.growth, 1.0 / static_cast<double>(n - 1));
        for (std::size_t j = 1; j < n; ++j) inc[j] = inc[j - 1] * r;
    }
    if (dense == DenseEnd::end) std::reverse(inc.begin(), inc.end());
    const double total = std::accumulate(inc.begin(), inc.end(), 0.0);
    std::vector<double> f(n);
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) f[j] = (acc += inc[j]) / total;
    f.back() = 1.0;
    return f;
}

/// Level energies with a uniform shift per branch.
inline std::vector<double> shifted_energies(const MemoryLayout& layout, std::span<const double> shifts) {
    std::vector<double> e = layout.energies();
    for (std::size_t k = 0; k < layout.outcome_count(); ++k)
        for (std::size_t i = 0; i < layout.branch_dim(k); ++i) e[layout.offset(k) + i] += shifts[k];
    return e;
}

/// Quench + across-branch thermalization steps moving `branches` from `from` to `to` shifts.
inline void append_merged_ramp(Schedule& out, const MemoryLayout& layout, std::vector<double>& shifts, const std::vector<std::size_t>& branches,
                               const std::vector<double>& to, const RampOptions& opt, DenseEnd dense) {
    std::vector<double> from = shifts;
    bool moves = false;
    for (auto k : branches) moves = moves || (to[k] != from[k]);
    if (!moves) return;
    for (double f : ramp_fractions(opt, dense)) {
        for (auto k : branches) shifts[k] = from[k] + f * (to[k] - from[k]);
        out.push_back(Quench{shifted_energies(layout, shifts)});
        out.push_back(Thermalize{ThermalScope::across_branches});
    }
    for (auto k : branches) shifts[k] = to[k];
}

/// Resets a memory holding branch weights `p_init` (canonical within each branch) to branch 0.
///
/// Stages: shift each branch so the merged canonical state equals the current one (partition
/// move), remove the barriers, lower branch 0 to the lowest shift, raise every other branch by
/// max_energy*T above it, restore the barriers, return all levels to the layout.
inline Schedule erasure_schedule(const MemoryLayout& layout, Temperature temperature, std::span<const double> p_init, const RampOptions& opt) {
    const auto p = validated_distribution(p_init, layout.outcome_count());
    const double kt = temperature.value();
    const auto fe = free_energies(layout, temperature, p);
    const std::size_t n = layout.outcome_count();

    std::vector<double> shifts(n, 0.0);
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k)
        if (p[k] > 0.0) hi = std::max(hi, shifts[k] = -kt * std::log(p[k]) - fe.free_energy[k]);
    for (std::size_t k = 0; k < n; ++k)
        if (!(p[k] > 0.0)) shifts[k] = hi + policy.max_energy * kt;

    Schedule s;
    s.push_back(Quench{shifted_energies(layout, shifts)});
    s.push_back(Thermalize{ThermalScope::across_branches});

    const double lowest = *std::min_element(shifts.begin(), shifts.end());
    std::vector<double> target = shifts;
    target[0] = lowest;
    append_merged_ramp(s, layout, shifts, {0}, target, opt, DenseEnd::end);

    std::vector<std::size_t> others;
    for (std::size_t k = 1; k < n; ++k) {
        others.push_back(k);
        target[k] = std::max(shifts[k], lowest + policy.max_energy * kt);
    }
    append_merged_ramp(s, layout, shifts, others, target, opt, DenseEnd::start);

    s.push_back(Thermalize{ThermalScope::within_branches});
    s.push_back(Quench{layout.energies()});
    return s;
}

/// Moves a memory that is canonical in branch 0 to branch weights `w` (canonical within each branch).
///
/// Other branches start max_energy*T up; they are lowered (and branch 0 raised if needed) with the
/// barriers down until the merged canonical state has weights w, then barriers are restored and
/// the shifts removed.
inline Schedule split_schedule(const MemoryLayout& layout, Temperature temperature, std::span<const double> w_target, const RampOptions& opt) {
    const auto w = validated_distribution(w_target, layout.outcome_count());
    const double kt = temperature.value();
    const double cap = policy.max_energy * kt;
    const auto fe = free_energies(layout, temperature, w);
    const std::size_t n = layout.outcome_count();

    // Target shifts c_k = -T ln(w_k / Z_k) + C, normalized so branch 0 (or the heaviest branch) sits at 0.
    std::vector<double> c(n, 0.0);
    std::size_t anchor = 0;
    if (!(w[0] > std::exp(-policy.max_energy))) anchor = static_cast<std::size_t>(std::max_element(w.begin(), w.end()) - w.begin());
    const double base = -kt * std::log(w[anchor]) - fe.free_energy[anchor];
    for (std::size_t k = 0; k < n; ++k)
        c[k] = w[k] > 0.0 ? std::min(-kt * std::log(w[k]) - fe.free_energy[k] - base, cap) : cap;

    std::vector<double> shifts(n, cap);
    shifts[0] = 0.0;
    Schedule s;
    if (n == 1) return s;
    s.push_back(Quench{shifted_energies(layout, shifts)});
    s.push_back(Thermalize{ThermalScope::across_branches});

    std::vector<std::size_t> others;
    for (std::size_t k = 1; k < n; ++k) others.push_back(k);
    append_merged_ramp(s, layout, shifts, others, c, opt, DenseEnd::end);
    append_merged_ramp(s, layout, shifts, {0}, c, opt, DenseEnd::start);

    s.push_back(Thermalize{ThermalScope::within_branches});
    s.push_back(Quench{layout.energies()});
    return s;
}

/// A valid but otherwise arbitrary erasure: random quench/thermalize prefix, then a reset tail.
inline Schedule random_erasure_schedule(Rng& rng, const MemoryLayout& layout, Temperature temperature) {
    const double kt = temperature.value();
    const std::size_t n = layout.dim();
    boost::random::uniform_real_distribution<double> shift(-5.0 * kt, 5.0 * kt);
    boost::random::uniform_int_distribution<int> count(0, 10);
    boost::random::bernoulli_distribution coin(0.5);
    boost::random::uniform_int_distribution<int> ramp_steps(1, 60);

    Schedule s;
    const int prefix = count(rng);
    for (int j = 0; j < prefix; ++j) {
        if (coin(rng)) {
            std::vector<double> e = layout.energies();
            for (auto& x : e) x += shift(rng);
            s.push_back(Quench{std::move(e)});
        } else {
            s.push_back(Thermalize{coin(rng) ? ThermalScope::across_branches : ThermalScope::within_branches});
        }
    }

    // Reset tail: merge, raise every other branch far above branch 0, restore barriers.
    std::vector<double> e = layout.energies();
    for (auto& x : e) x += shift(rng);
    s.push_back(Quench{e});
    s.push_back(Thermalize{ThermalScope::across_branches});
    const auto& b0 = layout.branch(0);
    double top0 = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < b0.size(); ++i) top0 = std::max(top0, e[i]);
    const double ceiling = top0 + policy.max_energy * kt;
    const std::vector<double> start = e;
    const int m = ramp_steps(rng);
    for (int j = 1; j <= m; ++j) {
        const double f = static_cast<double>(j) / m;
        if (layout.outcome_count() > 1)
            for (std::size_t i = layout.offset(1); i < n; ++i) e[i] = start[i] + f * (std::max(ceiling, start[i]) - start[i]);
        s.push_back(Quench{e});
        if (coin(rng) || j == m) s.push_back(Thermalize{ThermalScope::across_branches});
    }
    s.push_back(Thermalize{ThermalScope::within_branches});
    s.push_back(Quench{layout.energies()});
    return s;
}

} // namespace infothermo
