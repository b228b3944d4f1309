#pragma once

// Overdamped Langevin particle in a time-dependent quartic double well,
//   V(x; a, b, c) = a x^4 - b x^2 + c x,
// realizing a one-bit memory: left well = standard state 0, right well = 1.
// Work is accumulated Sekimoto-style, from parameter updates only.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <optional>
#include <exception>
#include <span>
#include <thread>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/random/normal_distribution.hpp>
#include <fmt/format.h>

#include "infothermo/errors.hpp"
#include "infothermo/random.hpp"

namespace infothermo::langevin {

struct QuarticParams {
    double a = 1.0;
    double b = 6.0;
    double c = 0.0;

    double value(double x) const noexcept { return ((a * x * x - b) * x + c) * x; }
    double slope(double x) const noexcept { return (4.0 * a * x * x - 2.0 * b) * x + c; }
    double curvature(double x) const noexcept { return 12.0 * a * x * x - 2.0 * b; }

    friend QuarticParams lerp(const QuarticParams& p, const QuarticParams& q, double f) noexcept {
        return {p.a + f * (q.a - p.a), p.b + f * (q.b - p.b), p.c + f * (q.c - p.c)};
    }
    friend bool operator==(const QuarticParams&, const QuarticParams&) = default;
};

struct CriticalPoints {
    double left_min;
    double barrier;
    double right_min;
};

/// Roots of V' when V has two wells, via the trigonometric cubic formula.
inline std::optional<CriticalPoints> critical_points(const QuarticParams& p) {
    if (!(p.a > 0.0)) return std::nullopt;
    // x^3 + px x + q = 0
    const double px = -p.b / (2.0 * p.a);
    const double q = p.c / (4.0 * p.a);
    if (!(4.0 * px * px * px + 27.0 * q * q < 0.0)) return std::nullopt;
    const double m = 2.0 * std::sqrt(-px / 3.0);
    const double theta = std::acos(std::clamp(3.0 * q / (px * m), -1.0, 1.0)) / 3.0;
    std::array<double, 3> r{};
    for (int k = 0; k < 3; ++k) r[static_cast<std::size_t>(k)] = m * std::cos(theta - 2.0 * std::numbers::pi * k / 3.0);
    std::sort(r.begin(), r.end());
    return CriticalPoints{r[0], r[1], r[2]};
}

/// Largest tilt |c| that keeps two wells for given (a, b).
inline double critical_tilt(double a, double b) {
    if (!(b > 0.0)) return 0.0;
    const double u = b / (2.0 * a);
    return 4.0 * a * std::sqrt(4.0 * u * u * u / 27.0);
}

struct PotentialSpec {
    QuarticParams params;
    double x_min = -2.0;
    double x_max = 2.0;

    /// Barrier seen from the shallower well.
    double barrier_height() const {
        const auto cp = critical_points(params);
        if (!cp) return 0.0;
        const double top = params.value(cp->barrier);
        return std::min(top - params.value(cp->left_min), top - params.value(cp->right_min));
    }

    void validate(double temperature, double barrier_min) const {
        if (!(params.a > 0.0)) throw InvariantViolation(fmt::format("quartic coefficient a must be positive, got {}", params.a));
        if (!(x_min < x_max)) throw InvariantViolation("potential domain is empty");
        const auto cp = critical_points(params);
        if (!cp) throw InvariantViolation(fmt::format("potential (a={}, b={}, c={}) has a single well", params.a, params.b, params.c));
        if (cp->left_min <= x_min || cp->right_min >= x_max) throw InvariantViolation("potential wells lie outside the domain");
        if (barrier_height() < barrier_min * temperature)
            throw InvariantViolation(fmt::format("barrier {:.3f} T is below the required {:.3f} T", barrier_height() / temperature, barrier_min));
    }
};

inline constexpr double default_barrier_min = 8.0;

/// Integral of exp(-(V - shift)/T) over [lo, hi], relative accuracy ~1e-10.
inline double boltzmann_integral(const QuarticParams& p, double temperature, double lo, double hi, double shift) {
    if (!(hi > lo)) return 0.0;
    auto f = [&](double x) { return std::exp(-(p.value(x) - shift) / temperature); };
    double err = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, hi, 20, 1e-12, &err);
    if (!(err <= 1e-8 * std::abs(v)) && v > 0.0)
        throw NumericalInstability(fmt::format("basin quadrature did not converge (relative error {:.2e})", err / v));
    return v;
}

/// Global minimum of V on the domain, used to scale Boltzmann factors.
inline double reference_energy(const PotentialSpec& pot) {
    double lo = std::min(pot.params.value(pot.x_min), pot.params.value(pot.x_max));
    if (const auto cp = critical_points(pot.params)) {
        for (double x : {cp->left_min, cp->right_min})
            if (x > pot.x_min && x < pot.x_max) lo = std::min(lo, pot.params.value(x));
    } else {
        // single well: the real root of V'
        const double x0 = boost::math::tools::bisect([&](double x) { return pot.params.slope(x); }, pot.x_min, pot.x_max,
                                                     boost::math::tools::eps_tolerance<double>(50))
                              .first;
        lo = std::min(lo, pot.params.value(x0));
    }
    return lo;
}

/// -T ln of the configurational partition function over the whole domain.
inline double domain_free_energy(const PotentialSpec& pot, double temperature) {
    const double ref = reference_energy(pot);
    double z = 0.0;
    if (const auto cp = critical_points(pot.params)) {
        // split at the critical points so each piece has one peak
        const double cuts[] = {pot.x_min, std::clamp(cp->left_min, pot.x_min, pot.x_max), std::clamp(cp->barrier, pot.x_min, pot.x_max),
                               std::clamp(cp->right_min, pot.x_min, pot.x_max), pot.x_max};
        for (int i = 0; i < 4; ++i) z += boltzmann_integral(pot.params, temperature, cuts[i], cuts[i + 1], ref);
    } else {
        z = boltzmann_integral(pot.params, temperature, pot.x_min, pot.x_max, ref);
    }
    return ref - temperature * std::log(z);
}

struct BasinFreeEnergies {
    double left = 0.0;   // F_0
    double right = 0.0;  // F_1
    double p_eq_left = 0.5;
    double delta = 0.0;  // (F_0 + F_1)/2 - F_0, outcome weights (1/2, 1/2)
    double boundary = 0.0;
};

inline BasinFreeEnergies basin_free_energies(const PotentialSpec& pot, double temperature) {
    const auto cp = critical_points(pot.params);
    if (!cp) throw InvariantViolation("basin free energies need a double well (no interior maximum)");
    const double ref = reference_energy(pot);
    const auto& p = pot.params;
    const double zl = boltzmann_integral(p, temperature, pot.x_min, cp->left_min, ref) +
                      boltzmann_integral(p, temperature, cp->left_min, cp->barrier, ref);
    const double zr = boltzmann_integral(p, temperature, cp->barrier, cp->right_min, ref) +
                      boltzmann_integral(p, temperature, cp->right_min, pot.x_max, ref);
    BasinFreeEnergies out;
    out.left = ref - temperature * std::log(zl);
    out.right = ref - temperature * std::log(zr);
    out.p_eq_left = zl / (zl + zr);
    out.delta = 0.5 * (out.left + out.right) - out.left;
    out.boundary = cp->barrier;
    return out;
}

/// Tilt c giving Z_left / Z_right = ratio for fixed (a, b).
inline double tune_tilt(PotentialSpec pot, double temperature, double ratio) {
    const double limit = 0.95 * critical_tilt(pot.params.a, pot.params.b);
    auto g = [&](double c) {
        pot.params.c = c;
        const auto f = basin_free_energies(pot, temperature);
        return std::log(f.p_eq_left / (1.0 - f.p_eq_left)) - std::log(ratio);
    };
    const double lo = ratio >= 1.0 ? 0.0 : -limit;
    const double hi = ratio >= 1.0 ? limit : 0.0;
    if (g(lo) * g(hi) > 0.0) throw InvariantViolation(fmt::format("basin ratio {} is not reachable for a={}, b={}", ratio, pot.params.a, pot.params.b));
    const auto r = boost::math::tools::bisect(g, lo, hi, boost::math::tools::eps_tolerance<double>(48));
    return 0.5 * (r.first + r.second);
}

// ---------------------------------------------------------------------------
// Protocol schedules

struct Knot {
    double s = 0.0;  // fraction of the duration, in [0, 1]
    QuarticParams params;
};

/// Piecewise-linear path lambda(t) through knots over [0, duration].
struct ProtocolSchedule {
    double duration = 1.0;
    std::vector<Knot> knots;

    QuarticParams at(double time) const {
        const double s = std::clamp(time / duration, 0.0, 1.0);
        auto it = std::upper_bound(knots.begin(), knots.end(), s, [](double v, const Knot& k) { return v < k.s; });
        if (it == knots.begin()) return knots.front().params;
        if (it == knots.end()) return knots.back().params;
        const Knot& hi = *it;
        const Knot& lo = *(it - 1);
        const double span = hi.s - lo.s;
        return span > 0.0 ? lerp(lo.params, hi.params, (s - lo.s) / span) : hi.params;
    }

    const QuarticParams& initial_params() const { return knots.front().params; }
    const QuarticParams& final_params() const { return knots.back().params; }

    void validate(double x_min, double x_max, double temperature, double barrier_min) const {
        if (!(duration > 0.0) || !std::isfinite(duration)) throw InvariantViolation("schedule duration must be positive");
        if (knots.size() < 1) throw InvariantViolation("schedule needs at least one knot");
        if (knots.front().s != 0.0 || knots.back().s != 1.0) throw InvariantViolation("schedule knots must start at s=0 and end at s=1");
        for (std::size_t i = 1; i < knots.size(); ++i)
            if (knots[i].s < knots[i - 1].s) throw InvariantViolation("schedule knots must be ordered in time");
        PotentialSpec{initial_params(), x_min, x_max}.validate(temperature, barrier_min);
        PotentialSpec{final_params(), x_min, x_max}.validate(temperature, barrier_min);
    }

    static ProtocolSchedule frozen(const QuarticParams& p, double duration) { return {duration, {{0.0, p}, {1.0, p}}}; }
};

struct ErasureShape {
    double barrier_low = 0.0;  ///< b while the barrier is down
    double tilt = 3.0;         ///< c pushing the particle left
    /// Relative durations: untilt, lower barrier, tilt, raise barrier, restore tilt.
    std::array<double, 5> stage_weights{0.1, 1.0, 1.0, 1.0, 0.1};
};

/// Reset to the left well starting and ending at `start`: untilt (barrier up), lower the barrier,
/// tilt left, raise the barrier, restore the original tilt.
inline ProtocolSchedule erasure_protocol(const QuarticParams& start, double duration, const ErasureShape& shape = {}) {
    QuarticParams level = start;
    level.c = 0.0;
    QuarticParams low = level;
    low.b = shape.barrier_low;
    QuarticParams tilted = low;
    tilted.c = shape.tilt;
    QuarticParams raised = start;
    raised.c = shape.tilt;
    const std::array<QuarticParams, 6> pts{start, level, low, tilted, raised, start};
    const double total = std::accumulate(shape.stage_weights.begin(), shape.stage_weights.end(), 0.0);
    ProtocolSchedule out{duration, {}};
    double s = 0.0;
    out.knots.push_back({0.0, pts[0]});
    for (std::size_t i = 0; i < 5; ++i) {
        s += shape.stage_weights[i] / total;
        out.knots.push_back({i == 4 ? 1.0 : s, pts[i + 1]});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Simulation

struct EnsembleParams {
    std::size_t n_traj = 1000;
    std::uint64_t seed = 1;
    double dt = 2e-3;
    double gamma = 1.0;
    double temperature = 1.0;
    double x_min = -2.0;
    double x_max = 2.0;
    double barrier_min = default_barrier_min;
    unsigned threads = 0;  ///< 0 = hardware concurrency
};

struct TrajectoryEnsemble {
    EnsembleParams params;
    std::vector<std::uint64_t> seeds;
    std::vector<double> work;
    std::vector<int> final_basin;  // 0 left, 1 right
    std::vector<double> final_position;

    double mean_work() const { return std::accumulate(work.begin(), work.end(), 0.0) / static_cast<double>(work.size()); }

    double stderr_work() const {
        if (work.size() < 2) return 0.0;
        const double m = mean_work();
        double ss = 0.0;
        for (double w : work) ss += (w - m) * (w - m);
        return std::sqrt(ss / static_cast<double>(work.size() - 1) / static_cast<double>(work.size()));
    }

    double success_fraction() const {
        const auto left = std::count(final_basin.begin(), final_basin.end(), 0);
        return static_cast<double>(left) / static_cast<double>(final_basin.size());
    }
};

/// Largest |V''| over the domain for every knot; V'' is affine in the parameters so knots suffice.
inline double max_curvature(const ProtocolSchedule& schedule, double x_min, double x_max) {
    double m = 0.0;
    for (const auto& k : schedule.knots) {
        for (double x : {x_min, x_max, 0.0}) m = std::max(m, std::abs(k.params.curvature(x)));
    }
    return m;
}

/// Canonical sample restricted to one basin, by rejection against a uniform proposal.
inline double sample_basin(Rng& rng, const QuarticParams& p, double temperature, double lo, double hi, double floor) {
    boost::random::uniform_real_distribution<double> pos(lo, hi);
    boost::random::uniform_real_distribution<double> accept(0.0, 1.0);
    for (;;) {
        const double x = pos(rng);
        if (accept(rng) < std::exp(-(p.value(x) - floor) / temperature)) return x;
    }
}

/// Euler-Maruyama ensemble; initial basins drawn with weights (1/2, 1/2), canonical within each.
inline TrajectoryEnsemble simulate_erasure(const ProtocolSchedule& schedule, const EnsembleParams& ep) {
    if (ep.n_traj < 1) throw InvariantViolation("ensemble needs at least one trajectory");
    if (!(ep.dt > 0.0)) throw InvariantViolation("time step must be positive");
    if (!(ep.gamma > 0.0)) throw InvariantViolation("friction must be positive");
    const double kt = Temperature(ep.temperature).value();
    schedule.validate(ep.x_min, ep.x_max, kt, ep.barrier_min);
    const double curv = max_curvature(schedule, ep.x_min, ep.x_max);
    if (ep.dt > 0.1 * ep.gamma / curv)
        throw NumericalInstability(fmt::format("dt = {} exceeds the stability limit 0.1*gamma/max|V''| = {:.3e}", ep.dt, 0.1 * ep.gamma / curv));

    const auto steps = std::max<std::size_t>(static_cast<std::size_t>(std::llround(schedule.duration / ep.dt)), 1);
    const double dt = schedule.duration / static_cast<double>(steps);

    const QuarticParams& p0 = schedule.initial_params();
    const auto cp0 = *critical_points(p0);
    const auto cpf = *critical_points(schedule.final_params());
    const double floor_l = p0.value(cp0.left_min);
    const double floor_r = p0.value(cp0.right_min);

    TrajectoryEnsemble ens;
    ens.params = ep;
    ens.seeds.resize(ep.n_traj);
    ens.work.resize(ep.n_traj);
    ens.final_basin.resize(ep.n_traj);
    ens.final_position.resize(ep.n_traj);

    const double mobility = 1.0 / ep.gamma;
    const double noise = std::sqrt(2.0 * kt * dt / ep.gamma);

    const auto& knots = schedule.knots;

    auto run_one = [&](std::size_t j) {
        const std::uint64_t seed = mix_seed(ep.seed, j);
        Rng rng(seed);
        boost::random::bernoulli_distribution right(0.5);
        double x = right(rng) ? sample_basin(rng, p0, kt, cp0.barrier, ep.x_max, floor_r) : sample_basin(rng, p0, kt, ep.x_min, cp0.barrier, floor_l);
        boost::random::normal_distribution<double> normal(0.0, 1.0);
        double w = 0.0;
        QuarticParams cur = p0;
        std::size_t seg = 0;
        for (std::size_t i = 0; i < steps; ++i) {
            const double s = static_cast<double>(i + 1) / static_cast<double>(steps);
            while (seg + 2 < knots.size() && s > knots[seg + 1].s) ++seg;
            const Knot& lo = knots[seg];
            const Knot& hi = knots[std::min(seg + 1, knots.size() - 1)];
            const double span = hi.s - lo.s;
            const QuarticParams next = span > 0.0 ? lerp(lo.params, hi.params, std::min(1.0, (s - lo.s) / span)) : hi.params;
            // V(x; next) - V(x; cur) is polynomial in x with coefficient differences
            w += QuarticParams{next.a - cur.a, next.b - cur.b, next.c - cur.c}.value(x);
            x += -mobility * next.slope(x) * dt + noise * normal(rng);
            cur = next;
            // reflect at the domain walls
            if (x < ep.x_min) x = 2.0 * ep.x_min - x;
            if (x > ep.x_max) x = 2.0 * ep.x_max - x;
            if (!std::isfinite(x))
                throw NumericalInstability(fmt::format("trajectory {} (seed {}) diverged at step {}", j, seed, i));
        }
        ens.seeds[j] = seed;
        ens.work[j] = w;
        ens.final_position[j] = x;
        ens.final_basin[j] = x < cpf.barrier ? 0 : 1;
    };

    unsigned workers = ep.threads ? ep.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, ep.n_traj));
    if (workers <= 1) {
        for (std::size_t j = 0; j < ep.n_traj; ++j) run_one(j);
        return ens;
    }
    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t j = w; j < ep.n_traj; j += workers) run_one(j);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return ens;
}

/// Same, with the domain taken from `pot`; the schedule must start from pot.params.
inline TrajectoryEnsemble simulate_erasure(const PotentialSpec& pot, const ProtocolSchedule& schedule, EnsembleParams ep) {
    if (schedule.knots.empty() || !(schedule.initial_params() == pot.params))
        throw InvalidSchedule("schedule does not start from the given potential");
    ep.x_min = pot.x_min;
    ep.x_max = pot.x_max;
    return simulate_erasure(schedule, ep);
}

// ---------------------------------------------------------------------------
// Ensemble statistics

/// -T ln <exp(-W/T)>, evaluated with a shifted log-sum-exp.
inline double jarzynski_estimate(std::span<const double> work, double temperature) {
    const double wmin = *std::min_element(work.begin(), work.end());
    double acc = 0.0;
    for (double w : work) acc += std::exp(-(w - wmin) / temperature);
    return wmin - temperature * std::log(acc / static_cast<double>(work.size()));
}

struct JarzynskiReport {
    double estimator = 0.0;
    double expected = 0.0;
    double stderr_boot = 0.0;
    double z_score = 0.0;
    double effective_sample_size = 0.0;
    bool rare_event_warning = false;  // effective sample size < 10
    bool flagged = false;             // |z| > 3
};

inline JarzynskiReport jarzynski_check(const TrajectoryEnsemble& ens, double delta_f, double temperature, std::size_t resamples = 200,
                                       std::uint64_t seed = 0x5eed) {
    JarzynskiReport r;
    const auto& w = ens.work;
    if (w.empty()) throw InvariantViolation("Jarzynski check on an empty ensemble");
    r.expected = delta_f;
    r.estimator = jarzynski_estimate(w, temperature);

    const double wmin = *std::min_element(w.begin(), w.end());
    double s1 = 0.0;
    double s2 = 0.0;
    for (double x : w) {
        const double e = std::exp(-(x - wmin) / temperature);
        s1 += e;
        s2 += e * e;
    }
    r.effective_sample_size = s1 * s1 / s2;
    r.rare_event_warning = r.effective_sample_size < 10.0;

    Rng rng(mix_seed(seed, ens.params.seed));
    boost::random::uniform_int_distribution<std::size_t> pick(0, w.size() - 1);
    std::vector<double> sample(w.size());
    double m = 0.0;
    double ss = 0.0;
    for (std::size_t b = 0; b < resamples; ++b) {
        for (auto& x : sample) x = w[pick(rng)];
        const double est = jarzynski_estimate(sample, temperature);
        const double d = est - m;
        m += d / static_cast<double>(b + 1);
        ss += d * (est - m);
    }
    r.stderr_boot = resamples > 1 ? std::sqrt(ss / static_cast<double>(resamples - 1)) : 0.0;
    const double diff = r.estimator - r.expected;
    r.z_score = r.stderr_boot > 0.0 ? diff / r.stderr_boot : (diff == 0.0 ? 0.0 : std::copysign(INFINITY, diff));
    r.flagged = std::abs(r.z_score) > 3.0;
    return r;
}

struct LandauerReport {
    double mean_work = 0.0;
    double stderr_work = 0.0;
    double bound = 0.0;   // T ln 2 - dF^M
    double margin = 0.0;  // mean - bound
    double success_fraction = 0.0;
    bool satisfied = false;  // margin >= -3 stderr
};

/// Ensemble-level erasure bound with H = ln 2.
inline LandauerReport landauer_check(const TrajectoryEnsemble& ens, double delta_f_memory, double temperature) {
    LandauerReport r;
    r.mean_work = ens.mean_work();
    r.stderr_work = ens.stderr_work();
    r.bound = temperature * std::numbers::ln2 - delta_f_memory;
    r.margin = r.mean_work - r.bound;
    r.success_fraction = ens.success_fraction();
    r.satisfied = r.margin >= -3.0 * r.stderr_work;
    return r;
}

} // namespace infothermo::langevin
