// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "infothermo/cli.hpp"

using namespace infothermo;

namespace {

constexpr double ln2 = std::numbers::ln2;

struct Verdict {
    bool pass = true;
    std::string detail;
};

json cli_json(const std::vector<std::string>& args, int* code = nullptr) {
    std::ostringstream out;
    std::ostringstream err;
    const int rc = cli::run_cli(args, out, err);
    if (code) *code = rc;
    if (rc == 2) throw std::runtime_error("cli usage error: " + err.str());
    return json::parse(out.str());
}

bool close_rel(double x, double ref, double tol) { return std::abs(x - ref) <= tol * std::max(1.0, std::abs(ref)); }

Verdict twobox_anchors() {
    Verdict o;
    const auto half = cli_json({"twobox", "--t", "0.5"});
    const auto fifth = cli_json({"twobox", "--t", "0.8"});
    const double checks[][2] = {{half["W_eras"].get<double>(), ln2}, {fifth["W_eras"].get<double>(), 0.0}, {fifth["W_meas"].get<double>(), ln2}};
    double worst = 0.0;
    for (const auto& c : checks) {
        worst = std::max(worst, std::abs(c[0] - c[1]));
        o.pass = o.pass && close_rel(c[0], c[1], 1e-12);
    }
    const auto grid = cli_json({"sweep", "--grid", "0.01:0.99:0.01", "--format", "json"});
    std::size_t rows = 0;
    for (const auto& r : grid["rows"]) {
        ++rows;
        const double sum = r["W_eras"].get<double>() + r["W_meas"].get<double>();
        worst = std::max(worst, std::abs(sum - ln2) / ln2);
        o.pass = o.pass && close_rel(sum, ln2, 1e-12);
    }
    o.pass = o.pass && rows == 99;
    o.detail = fmt::format("anchors at t=1/2, 4/5 and {} grid sums, max deviation {:.2e}", rows, worst);
    return o;
}

Verdict entropy_balance() {
    Verdict o;
    double worst = 0.0;
    for (const std::string v : {"0.5", "1", "8"}) {
        const double at_half = cli_json({"twobox", "--t", "0.5", "--volume", v})["entropy_balance"]["total_change"].get<double>();
        const double at_fifth = cli_json({"twobox", "--t", "0.8", "--volume", v})["entropy_balance"]["total_change"].get<double>();
        worst = std::max({worst, std::abs(at_half + ln2), std::abs(at_fifth)});
    }
    o.pass = worst <= 1e-12;
    o.detail = fmt::format("dS_total = -ln 2 and 0 at V in {{0.5, 1, 8}}, max deviation {:.2e}", worst);
    return o;
}

Verdict bound_saturation() {
    Verdict o;
    const auto rows = cli_json({"convergence", "--steps", "100,1000,10000", "--format", "json"})["rows"];
    std::vector<double> margins;
    for (const auto& r : rows) margins.push_back(r["margin"].get<double>());
    const double w = rows[2]["W"].get<double>();
    const double rel = std::abs(w - ln2) / ln2;
    const double r1 = margins[0] / margins[1];
    const double r2 = margins[1] / margins[2];
    const bool positive = std::all_of(margins.begin(), margins.end(), [](double m) { return m > 0.0; });
    // O(1/n): a tenfold finer ramp cuts the margin by a factor between 5 and 20
    o.pass = rel < 0.01 && positive && r1 > 5.0 && r1 < 20.0 && r2 > 5.0 && r2 < 20.0;
    o.detail = fmt::format("W(1e4) = {:.6f} ({:.3f}% from T ln 2), margin ratios {:.3f}, {:.3f}", w, 100 * rel, r1, r2);
    return o;
}

Verdict inequality_suites() {
    Verdict o;
    int code = 0;
    const auto r = cli_json({"verify-bounds", "--seed", "2024", "--instances", "100"}, &code);
    double meas = INFINITY, eras = INFINITY, sum = INFINITY;
    for (const auto& i : r["instances"]) {
        meas = std::min(meas, i["meas"]["margin"].get<double>());
        eras = std::min(eras, i["eras"]["margin"].get<double>());
        sum = std::min(sum, i["sum"]["margin"].get<double>());
    }
    double szilard = -INFINITY;
    for (const auto& s : r["szilard"]) szilard = std::max(szilard, s["reconcile"]["lhs"].get<double>());
    o.pass = code == 0 && r["instances"].size() >= 100 && meas >= -1e-6 && eras >= -1e-6 && sum >= -1e-6 && szilard <= 1e-12;
    o.detail = fmt::format("{} instances, min margins meas {:.2e}, eras {:.2e}, sum {:.2e}; Szilard max lhs {:.1e}", r["instances"].size(), meas,
                           eras, sum, szilard);
    return o;
}

Verdict qc_mutual_information_checks() {
    Verdict o;
    double exact_err = 0.0;
    double trivial_err = 0.0;
    double identity_err = 0.0;
    double range_violation = 0.0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        Rng rng(mix_seed(seed, 0xacce));
        const auto d = static_cast<Eigen::Index>(2 + seed % 4);

        // error-free projective: every basis state maps to one outcome
        const std::size_t n = 2 + seed % 2;
        std::vector<std::vector<double>> lik(static_cast<std::size_t>(d), std::vector<double>(n, 0.0));
        boost::random::uniform_int_distribution<std::size_t> pick(0, n - 1);
        for (auto& row : lik) row[pick(rng)] = 1.0;
        const auto classical = DensityOperator::diagonal(random_probabilities(rng, static_cast<std::size_t>(d)));
        const auto e = qc_mutual_information_report(classical, MeasurementModel::classical(lik));
        exact_err = std::max(exact_err, std::abs(e.mutual - e.shannon));

        // trivial: effects proportional to the identity
        const auto c = random_probabilities(rng, n);
        std::vector<Matrix> effects;
        for (double x : c) effects.push_back(x * Matrix::Identity(d, d));
        const auto rho = random_state(mix_seed(seed, 1), d);
        trivial_err = std::max(trivial_err, std::abs(qc_mutual_information_report(rho, MeasurementModel::from_effects(effects)).mutual));

        // generic quantum instance
        const auto q = qc_mutual_information_report(rho, random_measurement(mix_seed(seed, 2), d, n));
        identity_err = std::max(identity_err, std::abs(q.mutual - q.mutual_alt));
        range_violation = std::max({range_violation, -q.mutual, q.mutual - q.shannon});
    }
    o.pass = exact_err <= 1e-8 && trivial_err <= 1e-9 && identity_err <= 1e-8 && range_violation <= 1e-12;
    o.detail = fmt::format("1000 instances each: |I-H| {:.1e}, |I_trivial| {:.1e}, formula gap {:.1e}, range excess {:.1e}", exact_err, trivial_err,
                           identity_err, std::max(0.0, range_violation));
    return o;
}

Verdict classical_decomposition() {
    Verdict o;
    double dev = 0.0;
    double completeness = 0.0;
    std::size_t largest = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(mix_seed(seed, 0xdec0));
        boost::random::uniform_int_distribution<Eigen::Index> dim(2, 4);
        const Eigen::Index ds = dim(rng);
        const Eigen::Index dm = dim(rng);
        const Eigen::Index db = boost::random::uniform_int_distribution<Eigen::Index>(1, 4)(rng);
        boost::random::uniform_int_distribution<Eigen::Index> cut(1, dm - 1);
        const auto split = static_cast<std::size_t>(cut(rng));
        const MemoryLayout layout({std::vector<double>(split, 0.0), std::vector<double>(static_cast<std::size_t>(dm) - split, 0.0)});

        // memory starts in the standard branch, bath thermal-like
        std::vector<double> r(static_cast<std::size_t>(dm * db), 0.0);
        const auto w = random_probabilities(rng, split * static_cast<std::size_t>(db));
        std::copy(w.begin(), w.end(), r.begin());
        const auto q = random_probabilities(rng, static_cast<std::size_t>(ds));
        const Matrix u = permutation_matrix(random_permutation_map(rng, ds * dm * db));
        largest = std::max<std::size_t>(largest, static_cast<std::size_t>(ds * dm * db));

        const auto d = classical_decompose(u, DensityOperator::diagonal(q), DensityOperator::diagonal(r), layout);
        dev = std::max(dev, d.max_deviation);
        Matrix total = Matrix::Zero(ds, ds);
        for (const auto& e : d.model.effects()) total += e;
        completeness = std::max(completeness, (total - Matrix::Identity(ds, ds)).cwiseAbs().maxCoeff());
    }
    o.pass = dev <= 1e-9 && completeness <= 1e-9;
    o.detail = fmt::format("100 instances up to total dimension {}, reconstruction {:.1e}, completeness {:.1e}", largest, dev, completeness);
    return o;
}

Verdict langevin_reproduction() {
    Verdict o;
    int code_sym = 0;
    int code_asym = 0;
    const auto sym = cli_json({"langevin", "--seed", "2024", "--n-traj", "10000", "--tau", "400", "--format", "json"}, &code_sym);
    const auto asym =
        cli_json({"langevin", "--seed", "2025", "--n-traj", "10000", "--tau", "400", "--ratio", "4", "--format", "json", "--jarzynski-tau", "0"},
                 &code_asym);
    const double ws = sym["mean"].get<double>() / ln2;
    const double wa = asym["mean"].get<double>();
    const double df = asym["basins"]["dF_M"].get<double>();
    const double z = sym["jarzynski_check"]["z_score"].get<double>();
    o.pass = ws >= 0.95 && ws <= 1.05 && std::abs(wa) <= 0.05 && std::abs(z) <= 3.0 && std::abs(df - ln2) < 1e-6;
    o.detail = fmt::format("symmetric <W>/T ln 2 = {:.4f} (se {:.4f}), asymmetric <W> = {:.4f} (se {:.4f}, dF_M = {:.6f}), Jarzynski z = {:.2f} "
                           "(fast erasure, ESS {:.0f}); exit codes {}/{}",
                           ws, sym["stderr"].get<double>() / ln2, wa, asym["stderr"].get<double>(), df, z,
                           sym["jarzynski_check"]["effective_sample_size"].get<double>(), code_sym, code_asym);
    return o;
}

} // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Verdict()> run;
        double limit_seconds;
    };
    const std::vector<Criterion> criteria{
        {"1 two-box anchors", twobox_anchors, 1.0},
        {"2 entropy balance", entropy_balance, 0.0},
        {"3 bound saturation", bound_saturation, 10.0},
        {"4 inequality suites", inequality_suites, 60.0},
        {"5 QC-mutual information", qc_mutual_information_checks, 30.0},
        {"6 classical decomposition", classical_decomposition, 0.0},
        {"7 Langevin reproduction", langevin_reproduction, 300.0},
    };
    bool all = true;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Verdict o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = c.limit_seconds <= 0.0 || secs < c.limit_seconds;
        const bool pass = o.pass && in_time;
        all = all && pass;
        const std::string timing = c.limit_seconds > 0.0 ? fmt::format("{:.2f} s, limit {:.0f} s", secs, c.limit_seconds) : fmt::format("{:.2f} s", secs);
        std::cout << fmt::format("{} criterion {}: {} [{}]", pass ? "PASS" : "FAIL", c.name, o.detail, timing) << std::endl;
    }
    return all ? 0 : 1;
}
