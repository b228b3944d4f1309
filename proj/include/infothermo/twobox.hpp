#pragma once

// Single-molecule two-box memory: left box (outcome 0) holds a fraction t of
// the volume V, right box (outcome 1) the rest. Quasi-static isothermal
// stages follow the ideal-gas convention: taking the particle's volume from
// a to b costs -T ln(b/a); free expansion costs nothing.

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include <fmt/format.h>

#include "infothermo/errors.hpp"
#include "infothermo/operator.hpp"

namespace infothermo::twobox {

struct TwoBoxParams {
    double t = 0.5;
    double volume = 1.0;
    double temperature = 1.0;

    TwoBoxParams() = default;
    TwoBoxParams(double t_, double volume_ = 1.0, double temperature_ = 1.0) : t(t_), volume(volume_), temperature(temperature_) { validate(); }

    void validate() const {
        if (!(t > 0.0 && t < 1.0)) throw InvariantViolation(fmt::format("volume fraction t must lie strictly inside (0,1), got {}", t));
        if (!(volume > 0.0) || !std::isfinite(volume)) throw InvariantViolation(fmt::format("volume must be positive, got {}", volume));
        Temperature{temperature};
    }
};

/// Quasi-static isothermal work to take a single particle from volume `from` to `to`.
inline double isothermal_work(double from, double to, double temperature) { return -temperature * std::log(to / from); }

inline constexpr double free_expansion_work = 0.0;

struct StageWorkReport {
    // erasure
    double partition_move = 0.0;  // averaged over the stored outcome
    double removal = 0.0;
    double compression = 0.0;
    // measurement, outcome 1 (outcome 0 leaves the memory untouched)
    double outcome0 = 0.0;
    double expansion = 0.0;
    double recompression = 0.0;
    double outcome1 = 0.0;

    double erasure = 0.0;      // W_eras
    double measurement = 0.0;  // W_meas
    double sum = 0.0;
};

/// Erasure: move the partition to the center, remove it, compress into the left box.
inline StageWorkReport erasure_works(const TwoBoxParams& p) {
    p.validate();
    const double kt = p.temperature;
    const double v = p.volume;
    StageWorkReport r;
    const double move0 = isothermal_work(p.t * v, 0.5 * v, kt);
    const double move1 = isothermal_work((1.0 - p.t) * v, 0.5 * v, kt);
    r.partition_move = 0.5 * move0 + 0.5 * move1;
    r.removal = free_expansion_work;
    r.compression = isothermal_work(v, p.t * v, kt);
    r.erasure = r.partition_move + r.removal + r.compression;
    r.sum = r.erasure;
    return r;
}

/// Measurement: on outcome 1 the left box expands over the whole volume, then is compressed from the left.
inline StageWorkReport measurement_works(const TwoBoxParams& p) {
    p.validate();
    const double kt = p.temperature;
    const double v = p.volume;
    StageWorkReport r;
    r.outcome0 = 0.0;
    r.expansion = isothermal_work(p.t * v, v, kt);
    r.recompression = isothermal_work(v, (1.0 - p.t) * v, kt);
    r.outcome1 = r.expansion + r.recompression;
    r.measurement = 0.5 * r.outcome0 + 0.5 * r.outcome1;
    r.sum = r.measurement;
    return r;
}

/// Both processes with totals.
inline StageWorkReport stage_works(const TwoBoxParams& p) {
    StageWorkReport r = erasure_works(p);
    const StageWorkReport m = measurement_works(p);
    r.outcome0 = m.outcome0;
    r.expansion = m.expansion;
    r.recompression = m.recompression;
    r.outcome1 = m.outcome1;
    r.measurement = m.measurement;
    r.sum = r.erasure + r.measurement;
    return r;
}

/// Closed forms.
inline double erasure_work(const TwoBoxParams& p) {
    p.validate();
    return p.temperature * std::numbers::ln2 - 0.5 * p.temperature * std::log(p.t / (1.0 - p.t));
}

inline double measurement_work(const TwoBoxParams& p) {
    p.validate();
    return 0.5 * p.temperature * std::log(p.t / (1.0 - p.t));
}

/// dF^M = (T/2) ln(t/(1-t)) with Z_k proportional to the box volumes and p = (1/2, 1/2).
inline double delta_free_energy(const TwoBoxParams& p) {
    p.validate();
    const double f0 = -p.temperature * std::log(p.t * p.volume);
    const double f1 = -p.temperature * std::log((1.0 - p.t) * p.volume);
    return 0.5 * f0 + 0.5 * f1 - f0;
}

/// Asymmetry at which erasure is free: t/(1-t) = 4.
inline constexpr double zero_cost_fraction = 0.8;

struct EntropyBalance {
    double physical_initial = 0.0;
    double physical_final = 0.0;
    double shannon_initial = std::numbers::ln2;
    double shannon_final = 0.0;
    double total_change = 0.0;
};

inline EntropyBalance entropy_balance(const TwoBoxParams& p) {
    p.validate();
    EntropyBalance b;
    b.physical_initial = 0.5 * (std::log(p.t * p.volume) + std::log((1.0 - p.t) * p.volume));
    b.physical_final = std::log(p.t * p.volume);
    b.total_change = (b.physical_final + b.shannon_final) - (b.physical_initial + b.shannon_initial);
    return b;
}

struct SweepRow {
    double t = 0.0;
    double erasure = 0.0;
    double measurement = 0.0;
    double sum = 0.0;
    double delta_free_energy = 0.0;
    double erasure_margin = 0.0;      // W_eras - (T ln 2 - dF)
    double measurement_margin = 0.0;  // W_meas - (-T (H - I) + dF), H = I = ln 2
};

inline SweepRow sweep_row(double t, double temperature) {
    const TwoBoxParams p(t, 1.0, temperature);
    const auto w = stage_works(p);
    SweepRow r;
    r.t = t;
    r.erasure = w.erasure;
    r.measurement = w.measurement;
    r.sum = w.sum;
    r.delta_free_energy = delta_free_energy(p);
    r.erasure_margin = r.erasure - (temperature * std::numbers::ln2 - r.delta_free_energy);
    r.measurement_margin = r.measurement - r.delta_free_energy;
    return r;
}

inline std::vector<SweepRow> sweep(std::span<const double> t_grid, double temperature) {
    std::vector<SweepRow> rows;
    rows.reserve(t_grid.size());
    for (double t : t_grid) rows.push_back(sweep_row(t, temperature));
    return rows;
}

} // namespace infothermo::twobox
