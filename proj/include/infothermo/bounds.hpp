#pragma once

// Measurement and erasure processes on a memory, and the work bounds they obey:
//   measurement   W_meas >= -T (H - I) + dF
//   erasure       W_eras >= T H - dF
//   sum           W_meas + W_eras >= T I
//   reconcile     W_ext - W_meas - W_eras <= -dF_S

#include <cmath>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "infothermo/errors.hpp"
#include "infothermo/measurement.hpp"
#include "infothermo/memory.hpp"
#include "infothermo/policy.hpp"
#include "infothermo/protocol.hpp"

namespace infothermo {

enum class BoundKind { measurement, erasure, sum, reconcile };

constexpr std::string_view to_string(BoundKind k) noexcept {
    switch (k) {
    case BoundKind::measurement: return "meas";
    case BoundKind::erasure: return "eras";
    case BoundKind::sum: return "sum";
    case BoundKind::reconcile: return "reconcile";
    }
    return "?";
}

/// lhs and rhs of one inequality. `margin` is the slack in the satisfied direction:
/// lhs - rhs for the lower bounds, rhs - lhs for the reconciliation (an upper bound).
struct BoundReport {
    BoundKind kind = BoundKind::measurement;
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;
    double tolerance = policy.bound_margin;
    bool satisfied = false;

    static BoundReport make(BoundKind kind, double lhs, double rhs, double tolerance = policy.bound_margin) {
        BoundReport r{kind, lhs, rhs, 0.0, tolerance, false};
        r.margin = kind == BoundKind::reconcile ? rhs - lhs : lhs - rhs;
        r.satisfied = r.margin >= -tolerance;
        return r;
    }
};

struct ErasureRun {
    ProtocolRecord record;
    std::vector<double> initial_weights;  // p_k
    double temperature = 1.0;
    double shannon = 0.0;                 // H(p)
    FreeEnergyReport free_energy;
    double residual = 0.0;                // final weight outside branch 0
    BoundReport bound;

    double work() const { return record.work; }
};

struct MeasurementRun {
    std::vector<ProtocolRecord> conditional;  // one record per system basis state
    std::vector<double> system_weights;       // q_s
    std::vector<double> outcome_probabilities;
    double temperature = 1.0;
    double shannon = 0.0;
    double mutual_information = 0.0;
    FreeEnergyReport free_energy;
    double work = 0.0;                        // sum_s q_s W_s
    BoundReport bound;
};

/// Runs `schedule` on the memory prepared canonical within each branch with weights p_init.
inline ErasureRun run_erasure_protocol(const MemoryLayout& layout, Temperature temperature, std::span<const double> p_init,
                                       Schedule schedule, double max_residual = policy.residual_margin) {
    ErasureRun run;
    run.initial_weights = validated_distribution(p_init, layout.outcome_count());
    run.temperature = temperature.value();
    const auto initial = branch_canonical_mixture(layout, temperature, run.initial_weights);
    run.record = run_protocol(layout, temperature, initial, std::move(schedule));

    const auto w = branch_weights(layout, run.record.final_populations);
    run.residual = std::max(0.0, 1.0 - w[0]);
    if (run.residual > max_residual)
        throw NotAnErasure(fmt::format("schedule leaves weight {:.3e} outside the standard branch (allowed {:.1e})", run.residual, max_residual),
                           run.residual);

    run.shannon = shannon(run.initial_weights);
    run.free_energy = free_energies(layout, temperature, run.initial_weights);
    run.bound = BoundReport::make(BoundKind::erasure, run.record.work, temperature.value() * run.shannon - run.free_energy.delta_free_energy,
                                  policy.residual_margin);
    return run;
}

/// Conditional memory schedules, one per system basis state s (the classical interaction acts as a control).
struct MeasurementSchedule {
    std::vector<Schedule> per_state;
};

/// Quasi-static conditional schedules realizing P(k|s) from the measurement model.
inline MeasurementSchedule measurement_schedule(const MemoryLayout& layout, Temperature temperature, const MeasurementModel& m,
                                                const RampOptions& opt) {
    MeasurementSchedule out;
    for (const auto& row : m.likelihood()) {
        std::vector<double> w(row);
        double sum = 0.0;
        for (auto& x : w) sum += (x = std::max(0.0, x));
        for (auto& x : w) x /= sum;
        out.per_state.push_back(split_schedule(layout, temperature, w, opt));
    }
    return out;
}

/// Classical measurement: the memory starts canonical in branch 0 and, conditioned on the
/// system state s, follows its schedule. Energy exchanged with the system counts as work.
inline MeasurementRun run_measurement_process(const MemoryLayout& layout, Temperature temperature, const MeasurementModel& m,
                                              const DensityOperator& rho_s, const MeasurementSchedule& schedule) {
    if (!is_diagonal(rho_s.matrix())) throw NotClassical("measured system state is not diagonal");
    if (!m.is_classical()) throw NotClassical("measurement effects are not diagonal");
    check_compatible(rho_s, m);
    if (m.outcome_count() != layout.outcome_count())
        throw DimensionMismatch(fmt::format("measurement has {} outcomes, memory has {} branches", m.outcome_count(), layout.outcome_count()));
    if (schedule.per_state.size() != static_cast<std::size_t>(rho_s.dim()))
        throw InvalidSchedule(fmt::format("{} conditional schedules for a {}-state system", schedule.per_state.size(), rho_s.dim()));

    MeasurementRun run;
    run.temperature = temperature.value();
    run.system_weights = rho_s.populations();
    const auto likelihood = m.likelihood();
    const auto start = layout.canonical_populations(0, temperature);

    for (std::size_t s = 0; s < schedule.per_state.size(); ++s) {
        auto rec = run_protocol(layout, temperature, start, schedule.per_state[s]);
        const auto w = branch_weights(layout, rec.final_populations);
        for (std::size_t k = 0; k < w.size(); ++k) {
            if (std::abs(w[k] - likelihood[s][k]) > policy.residual_margin)
                throw InvalidSchedule(fmt::format("schedule for system state {} stores outcome {} with weight {:.6g}, measurement requires {:.6g}", s,
                                                  k, w[k], likelihood[s][k]));
        }
        run.work += run.system_weights[s] * rec.work;
        run.conditional.push_back(std::move(rec));
    }

    const auto info = qc_mutual_information_report(rho_s, m);
    run.outcome_probabilities = info.statistics.probabilities;
    run.shannon = info.shannon;
    run.mutual_information = info.mutual;
    run.free_energy = free_energies(layout, temperature, run.outcome_probabilities);
    run.bound = BoundReport::make(BoundKind::measurement, run.work,
                                  -temperature.value() * (run.shannon - run.mutual_information) + run.free_energy.delta_free_energy,
                                  policy.residual_margin);
    return run;
}

inline BoundReport verify_sum_bound(const MeasurementRun& meas, const ErasureRun& eras, double mutual_information, Temperature temperature) {
    if (std::abs(meas.temperature - temperature.value()) > 1e-12 || std::abs(eras.temperature - temperature.value()) > 1e-12)
        throw InvariantViolation("measurement and erasure runs were computed at different temperatures");
    if (meas.outcome_probabilities.size() != eras.initial_weights.size())
        throw DimensionMismatch("measurement and erasure runs use memories with different outcome counts");
    for (std::size_t k = 0; k < eras.initial_weights.size(); ++k)
        if (std::abs(meas.outcome_probabilities[k] - eras.initial_weights[k]) > policy.probability_sum)
            throw InvariantViolation(fmt::format("erasure starts from p_{} = {}, measurement produced {}", k, eras.initial_weights[k],
                                                 meas.outcome_probabilities[k]));
    return BoundReport::make(BoundKind::sum, meas.work + eras.work(), temperature.value() * mutual_information, policy.residual_margin);
}

/// Whole-system check for a feedback engine whose extracted work and free-energy change are supplied.
inline BoundReport reconcile_demon(double extracted_work, double system_free_energy_change, double measurement_work, double erasure_work) {
    return BoundReport::make(BoundKind::reconcile, extracted_work - measurement_work - erasure_work, -system_free_energy_change,
                             policy.residual_margin);
}

inline BoundReport reconcile_demon(double extracted_work, double system_free_energy_change, const MeasurementRun& meas, const ErasureRun& eras) {
    return reconcile_demon(extracted_work, system_free_energy_change, meas.work, eras.work());
}

struct ConvergenceRow {
    std::size_t steps = 0;
    double work = 0.0;
    double bound = 0.0;
    double margin = 0.0;
};

/// Erasure work against the bound for a range of ramp resolutions.
inline std::vector<ConvergenceRow> erasure_convergence(const MemoryLayout& layout, Temperature temperature, std::span<const double> p_init,
                                                       std::span<const std::size_t> step_counts, RampOptions opt = {}) {
    std::vector<ConvergenceRow> rows;
    for (auto n : step_counts) {
        opt.steps = n;
        const auto run = run_erasure_protocol(layout, temperature, p_init, erasure_schedule(layout, temperature, p_init, opt));
        rows.push_back({n, run.work(), run.bound.rhs, run.bound.margin});
    }
    return rows;
}

} // namespace infothermo
