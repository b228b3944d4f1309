#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "infothermo/bounds.hpp"
#include "infothermo/twobox.hpp"
#include "oracles.hpp"

using namespace infothermo;

namespace {

constexpr double ln2 = std::numbers::ln2;
const Temperature unit_t{1.0};

RampOptions steps(std::size_t n) {
    RampOptions o;
    o.steps = n;
    return o;
}

MemoryLayout random_layout(Rng& rng, std::size_t outcomes) {
    boost::random::uniform_int_distribution<std::size_t> dim(1, 3);
    boost::random::uniform_real_distribution<double> level(-1.0, 2.0);
    std::vector<std::vector<double>> b(outcomes);
    for (auto& br : b) {
        br.resize(dim(rng));
        for (auto& e : br) e = level(rng);
    }
    return MemoryLayout(b);
}

std::vector<std::vector<double>> identity_channel(std::size_t n) {
    std::vector<std::vector<double>> l(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) l[i][i] = 1.0;
    return l;
}

} // namespace

TEST(Layout, Validation) {
    EXPECT_THROW(MemoryLayout(std::vector<std::vector<double>>{}), InvariantViolation);
    EXPECT_THROW(MemoryLayout(std::vector<std::vector<double>>{{0.0}, {}}), InvariantViolation);
    const MemoryLayout l({{0.0, 1.0}, {2.0}, {3.0, 4.0, 5.0}});
    EXPECT_EQ(l.dim(), 6u);
    EXPECT_EQ(l.branch_of(0), 0u);
    EXPECT_EQ(l.branch_of(2), 1u);
    EXPECT_EQ(l.branch_of(5), 2u);
    EXPECT_THROW(l.branch_of(6), DimensionMismatch);
}

TEST(FreeEnergies, Examples) {
    const auto sym = MemoryLayout::symmetric(3, {0.0, 0.4});
    EXPECT_NEAR(free_energies(sym, unit_t, std::vector<double>{0.2, 0.3, 0.5}).delta_free_energy, 0.0, 1e-15);

    const double eps = 0.7;
    const MemoryLayout two({{0.0}, {eps}});
    EXPECT_NEAR(free_energies(two, unit_t, std::vector<double>{0.5, 0.5}).delta_free_energy, eps / 2.0, 1e-15);

    // degeneracies 4:1 at equal energy mirror volumes t : 1 - t with t = 4/5
    const MemoryLayout boxes({{0.0, 0.0, 0.0, 0.0}, {0.0}});
    const double expected = twobox::delta_free_energy(twobox::TwoBoxParams(0.8));
    EXPECT_NEAR(free_energies(boxes, unit_t, std::vector<double>{0.5, 0.5}).delta_free_energy, expected, 1e-14);
    EXPECT_NEAR(expected, 0.5 * std::log(4.0), 1e-15);

    for (double t : {0.1, 0.3, 0.5, 0.65, 0.9}) {
        const auto layout = MemoryLayout::two_box(t, Temperature(1.7));
        EXPECT_NEAR(free_energies(layout, Temperature(1.7), std::vector<double>{0.5, 0.5}).delta_free_energy,
                    twobox::delta_free_energy(twobox::TwoBoxParams(t, 1.0, 1.7)), 1e-13);
    }
}

TEST(Engine, QuenchKeepsPopulationsThermalizeKeepsEnergies) {
    const MemoryLayout l({{0.0, 1.0}, {0.5}});
    const std::vector<double> p0{0.2, 0.3, 0.5};
    const auto q = run_protocol(l, unit_t, p0, {Quench{{1.0, 2.0, -1.0}}});
    EXPECT_EQ(q.final_populations, p0);
    EXPECT_NEAR(q.work, 0.2 * 1.0 + 0.3 * 1.0 + 0.5 * -1.5, 1e-15);
    EXPECT_EQ(q.heat, 0.0);

    const auto th = run_protocol(l, unit_t, p0, {Thermalize{ThermalScope::within_branches}});
    EXPECT_EQ(th.final_energies, l.energies());
    EXPECT_EQ(th.work, 0.0);
    EXPECT_NEAR(th.final_populations[0] + th.final_populations[1], 0.5, 1e-15);
    EXPECT_NEAR(th.final_populations[0] / th.final_populations[1], std::exp(1.0), 1e-12);

    const auto across = run_protocol(l, unit_t, p0, {Thermalize{ThermalScope::across_branches}});
    const double z = 1.0 + std::exp(-1.0) + std::exp(-0.5);
    EXPECT_NEAR(across.final_populations[2], std::exp(-0.5) / z, 1e-15);
}

TEST(Engine, FirstLawOnRandomSchedules) {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        Rng rng(seed);
        const auto layout = random_layout(rng, 2 + seed % 3);
        const auto p = random_probabilities(rng, layout.outcome_count());
        const auto rec = run_protocol(layout, unit_t, branch_canonical_mixture(layout, unit_t, p), random_erasure_schedule(rng, layout, unit_t));
        EXPECT_LT(rec.first_law_residual(), 1e-9) << "seed " << seed;
    }
}

TEST(Erasure, SymmetricQuasiStaticApproachesLandauer) {
    const auto layout = MemoryLayout::symmetric(2, {0.0});
    const std::vector<double> p{0.5, 0.5};
    const auto run = run_erasure_protocol(layout, unit_t, p, erasure_schedule(layout, unit_t, p, steps(10000)));
    EXPECT_NEAR(run.work(), ln2, 0.01 * ln2);
    EXPECT_TRUE(run.bound.satisfied);
    EXPECT_GT(run.bound.margin, 0.0);
    EXPECT_LE(run.residual, 1e-6);
    EXPECT_LT(run.record.first_law_residual(), 1e-9);
}

TEST(Erasure, TunedAsymmetricMemoryErasesForFree) {
    const auto layout = MemoryLayout::two_box(0.8, unit_t);
    const std::vector<double> p{0.5, 0.5};
    const auto fe = free_energies(layout, unit_t, p);
    ASSERT_NEAR(fe.delta_free_energy, ln2, 1e-14);
    const auto run = run_erasure_protocol(layout, unit_t, p, erasure_schedule(layout, unit_t, p, steps(10000)));
    EXPECT_NEAR(run.work(), 0.0, 1e-2);
    EXPECT_TRUE(run.bound.satisfied);
}

TEST(Erasure, FastScheduleDissipates) {
    for (auto layout : {MemoryLayout::symmetric(2, {0.0}), MemoryLayout::two_box(0.8, unit_t), MemoryLayout({{0.0, 0.3}, {0.1}, {0.5, 0.2}})}) {
        std::vector<double> p(layout.outcome_count(), 1.0 / static_cast<double>(layout.outcome_count()));
        const auto run = run_erasure_protocol(layout, unit_t, p, erasure_schedule(layout, unit_t, p, steps(2)));
        EXPECT_GT(run.bound.margin, 0.0);
    }
}

TEST(Erasure, ConvergenceIsFirstOrder) {
    const auto layout = MemoryLayout::symmetric(2, {0.0});
    const std::vector<double> p{0.5, 0.5};
    const std::vector<std::size_t> n{100, 1000, 10000};
    const auto rows = erasure_convergence(layout, unit_t, p, n);
    ASSERT_EQ(rows.size(), 3u);
    for (const auto& r : rows) {
        EXPECT_GT(r.margin, 0.0);
        EXPECT_NEAR(r.bound, ln2, 1e-15);
    }
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        const double ratio = rows[i].margin / rows[i + 1].margin;
        EXPECT_GT(ratio, 7.0);
        EXPECT_LT(ratio, 14.0);
    }
}

TEST(Erasure, LinearRampsAlsoConverge) {
    const auto layout = MemoryLayout::symmetric(2, {0.0});
    const std::vector<double> p{0.5, 0.5};
    RampOptions opt = steps(1000);
    opt.shape = RampShape::linear;
    const auto coarse = run_erasure_protocol(layout, unit_t, p, erasure_schedule(layout, unit_t, p, opt));
    opt.steps = 10000;
    const auto fine = run_erasure_protocol(layout, unit_t, p, erasure_schedule(layout, unit_t, p, opt));
    EXPECT_GT(coarse.bound.margin, fine.bound.margin);
    EXPECT_GT(fine.bound.margin, 0.0);
}

TEST(Erasure, NotAnErasureIsRejected) {
    const auto layout = MemoryLayout::symmetric(2, {0.0});
    const std::vector<double> p{0.5, 0.5};
    try {
        run_erasure_protocol(layout, unit_t, p, Schedule{Thermalize{ThermalScope::across_branches}});
        FAIL() << "expected NotAnErasure";
    } catch (const NotAnErasure& e) {
        EXPECT_NEAR(e.residual, 0.5, 1e-12);
    }
}

TEST(Erasure, FuzzedSchedulesRespectTheBound) {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        Rng rng(mix_seed(seed, 77));
        const auto layout = random_layout(rng, 2 + seed % 3);
        const auto p = random_probabilities(rng, layout.outcome_count());
        const auto run = run_erasure_protocol(layout, unit_t, p, random_erasure_schedule(rng, layout, unit_t));
        EXPECT_LE(run.residual, 1e-6);
        EXPECT_GE(run.bound.margin, -1e-6) << "seed " << seed;
        EXPECT_NEAR(run.bound.rhs, oracle::shannon(p) - free_energies(layout, unit_t, p).delta_free_energy, 1e-12);
    }
}

TEST(Measurement, ErrorFreeCopyIntoSymmetricMemoryIsFree) {
    const auto layout = MemoryLayout::symmetric(2, {0.0});
    const auto m = MeasurementModel::classical(identity_channel(2));
    const auto rho = DensityOperator::diagonal(std::vector<double>{0.5, 0.5});
    const auto run = run_measurement_process(layout, unit_t, m, rho, measurement_schedule(layout, unit_t, m, steps(10000)));
    EXPECT_NEAR(run.shannon, ln2, 1e-12);
    EXPECT_NEAR(run.mutual_information, ln2, 1e-12);
    EXPECT_NEAR(run.free_energy.delta_free_energy, 0.0, 1e-15);
    EXPECT_NEAR(run.work, 0.0, 1e-2);
    EXPECT_TRUE(run.bound.satisfied);
}

TEST(Measurement, TwoBoxEquivalentMemory) {
    for (double t : {0.3, 0.5, 0.8}) {
        const auto layout = MemoryLayout::two_box(t, unit_t);
        const auto m = MeasurementModel::classical(identity_channel(2));
        const auto rho = DensityOperator::diagonal(std::vector<double>{0.5, 0.5});
        const auto run = run_measurement_process(layout, unit_t, m, rho, measurement_schedule(layout, unit_t, m, steps(10000)));
        EXPECT_NEAR(run.work, twobox::measurement_work(twobox::TwoBoxParams(t)), 1e-2) << "t = " << t;
        EXPECT_GE(run.bound.margin, -1e-6);
    }
}

TEST(Measurement, RejectsScheduleThatDoesNotRealizeTheModel) {
    const auto layout = MemoryLayout::symmetric(2, {0.0});
    const auto m = MeasurementModel::classical(identity_channel(2));
    const auto rho = DensityOperator::diagonal(std::vector<double>{0.5, 0.5});
    auto sched = measurement_schedule(layout, unit_t, m, steps(10));
    std::swap(sched.per_state[0], sched.per_state[1]);
    EXPECT_THROW(run_measurement_process(layout, unit_t, m, rho, sched), InvalidSchedule);
    EXPECT_THROW(run_measurement_process(layout, unit_t, random_measurement(1, 2, 2), rho, sched), NotClassical);
}

TEST(Bounds, RandomClassicalInstances) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(mix_seed(seed, 5));
        const std::size_t ds = 2 + seed % 3;
        const std::size_t n = 2 + (seed / 3) % 2;
        std::vector<std::vector<double>> lik;
        for (std::size_t s = 0; s < ds; ++s) lik.push_back(random_probabilities(rng, n));
        const auto q = random_probabilities(rng, ds);
        const auto layout = random_layout(rng, n);
        const auto m = MeasurementModel::classical(lik);
        const auto rho = DensityOperator::diagonal(q);
        const auto meas = run_measurement_process(layout, unit_t, m, rho, measurement_schedule(layout, unit_t, m, steps(500)));
        const auto eras = run_erasure_protocol(layout, unit_t, meas.outcome_probabilities,
                                               erasure_schedule(layout, unit_t, meas.outcome_probabilities, steps(500)));
        const auto sum = verify_sum_bound(meas, eras, meas.mutual_information, unit_t);
        EXPECT_GE(meas.bound.margin, -1e-6) << "seed " << seed;
        EXPECT_GE(eras.bound.margin, -1e-6) << "seed " << seed;
        EXPECT_GE(sum.margin, -1e-6) << "seed " << seed;
        EXPECT_NEAR(meas.mutual_information, oracle::classical_mutual_information(q, lik), 1e-8);
        EXPECT_NEAR(sum.lhs, meas.work + eras.work(), 1e-15);
        for (const auto& rec : meas.conditional) EXPECT_LT(rec.first_law_residual(), 1e-9);
    }
}

TEST(Bounds, SumBoundSaturatesForSymmetricQuasiStaticPair) {
    const auto layout = MemoryLayout::symmetric(2, {0.0, 0.3});
    const auto m = MeasurementModel::classical(identity_channel(2));
    const auto rho = DensityOperator::diagonal(std::vector<double>{0.5, 0.5});
    const auto meas = run_measurement_process(layout, unit_t, m, rho, measurement_schedule(layout, unit_t, m, steps(10000)));
    const auto eras = run_erasure_protocol(layout, unit_t, meas.outcome_probabilities,
                                           erasure_schedule(layout, unit_t, meas.outcome_probabilities, steps(10000)));
    const auto sum = verify_sum_bound(meas, eras, meas.mutual_information, unit_t);
    EXPECT_GT(sum.margin, 0.0);
    EXPECT_LT(sum.margin, 2e-3);

    const auto meas_fast = run_measurement_process(layout, unit_t, m, rho, measurement_schedule(layout, unit_t, m, steps(2)));
    const auto eras_fast = run_erasure_protocol(layout, unit_t, meas_fast.outcome_probabilities,
                                                erasure_schedule(layout, unit_t, meas_fast.outcome_probabilities, steps(2)));
    EXPECT_GT(verify_sum_bound(meas_fast, eras_fast, meas_fast.mutual_information, unit_t).margin, 0.1);
}

TEST(Bounds, SumBoundRejectsInconsistentRuns) {
    const auto layout = MemoryLayout::symmetric(2, {0.0});
    const auto m = MeasurementModel::classical(identity_channel(2));
    const auto rho = DensityOperator::diagonal(std::vector<double>{0.5, 0.5});
    const auto meas = run_measurement_process(layout, unit_t, m, rho, measurement_schedule(layout, unit_t, m, steps(10)));
    const std::vector<double> other{0.9, 0.1};
    const auto eras = run_erasure_protocol(layout, unit_t, other, erasure_schedule(layout, unit_t, other, steps(10)));
    EXPECT_THROW(verify_sum_bound(meas, eras, meas.mutual_information, unit_t), InvariantViolation);
    EXPECT_THROW(verify_sum_bound(meas, eras, meas.mutual_information, Temperature(2.0)), InvariantViolation);
}

TEST(Bounds, TwoBoxPairMeetsSumBoundExactly) {
    for (double t : {0.2, 0.5, 0.8}) {
        const twobox::TwoBoxParams p(t);
        const auto b = BoundReport::make(BoundKind::sum, twobox::measurement_work(p) + twobox::erasure_work(p), ln2);
        EXPECT_NEAR(b.margin, 0.0, 1e-15);
        EXPECT_TRUE(b.satisfied);
    }
}

TEST(Reconcile, SzilardEngineWithTwoBoxMemory) {
    for (double t : {0.5, 0.8, 0.35}) {
        const twobox::TwoBoxParams p(t);
        const auto r = reconcile_demon(ln2, 0.0, twobox::measurement_work(p), twobox::erasure_work(p));
        EXPECT_NEAR(r.lhs, 0.0, 1e-15);
        EXPECT_LE(r.lhs, 1e-15);
        EXPECT_TRUE(r.satisfied);
    }
}

TEST(Reconcile, NoMeasurementAndDissipativeDemons) {
    const auto idle = reconcile_demon(-0.2, 0.0, 0.0, 0.0);
    EXPECT_TRUE(idle.satisfied);
    EXPECT_LT(idle.lhs, 0.0);

    const auto layout = MemoryLayout::symmetric(2, {0.0});
    const auto m = MeasurementModel::classical(identity_channel(2));
    const auto rho = DensityOperator::diagonal(std::vector<double>{0.5, 0.5});
    const auto meas = run_measurement_process(layout, unit_t, m, rho, measurement_schedule(layout, unit_t, m, steps(3)));
    const auto eras = run_erasure_protocol(layout, unit_t, meas.outcome_probabilities,
                                           erasure_schedule(layout, unit_t, meas.outcome_probabilities, steps(3)));
    const auto r = reconcile_demon(meas.mutual_information, 0.0, meas, eras);
    EXPECT_LT(r.lhs, 0.0);
    EXPECT_GT(r.margin, 0.0);
}

TEST(Bounds, ReportConventions) {
    const auto lower = BoundReport::make(BoundKind::erasure, 1.0, 0.7);
    EXPECT_NEAR(lower.margin, 0.3, 1e-15);
    EXPECT_TRUE(lower.satisfied);
    const auto upper = BoundReport::make(BoundKind::reconcile, 0.1, 0.0);
    EXPECT_NEAR(upper.margin, -0.1, 1e-15);
    EXPECT_FALSE(upper.satisfied);
    EXPECT_EQ(to_string(BoundKind::sum), "sum");
}
