#pragma once

// POVM measurement statistics, Shannon and QC-mutual information, and the
// decomposition of a classical (permutation) memory interaction into
// measurement operators on the measured system.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include <fmt/format.h>

#include "infothermo/errors.hpp"
#include "infothermo/memory.hpp"
#include "infothermo/operator.hpp"
#include "infothermo/policy.hpp"
#include "infothermo/random.hpp"

namespace infothermo {

struct Outcome {
    int k = 0;
    std::vector<Matrix> operators;  // M_ki, i = 0..
};

/// Measurement operators grouped by outcome; effects E_k = sum_i M_ki^dagger M_ki form a POVM.
class MeasurementModel {
public:
    explicit MeasurementModel(std::vector<Outcome> outcomes) : outcomes_(std::move(outcomes)) {
        if (outcomes_.empty()) throw InvariantViolation("measurement model needs at least one outcome");
        dim_ = -1;
        std::set<int> labels;
        for (const auto& o : outcomes_) {
            if (!labels.insert(o.k).second) throw InvariantViolation(fmt::format("duplicate outcome label {}", o.k));
            for (const auto& m : o.operators) {
                if (m.rows() != m.cols() || m.rows() == 0)
                    throw DimensionMismatch(fmt::format("measurement operator for outcome {} is {}x{}", o.k, m.rows(), m.cols()));
                if (dim_ < 0) dim_ = m.rows();
                if (m.rows() != dim_)
                    throw DimensionMismatch(fmt::format("measurement operator for outcome {} has dim {}, expected {}", o.k, m.rows(), dim_));
            }
        }
        if (dim_ < 0) throw InvariantViolation("measurement model has no operators");

        Matrix total = Matrix::Zero(dim_, dim_);
        for (const auto& o : outcomes_) {
            Matrix e = Matrix::Zero(dim_, dim_);
            for (const auto& m : o.operators) e += m.adjoint() * m;
            e = 0.5 * (e + e.adjoint());
            const double lo = hermitian_eigen(e).values.minCoeff();
            if (lo < -policy.validation)
                throw InvariantViolation(fmt::format("effect of outcome {} is not positive (eigenvalue {:.3e})", o.k, lo));
            total += e;
            effects_.push_back(std::move(e));
        }
        const double dev = (total - Matrix::Identity(dim_, dim_)).cwiseAbs().maxCoeff();
        if (dev > policy.povm_completeness)
            throw InvariantViolation(fmt::format("effects do not sum to the identity (max deviation {:.3e})", dev));
    }

    /// One operator per outcome, M_k = sqrt(E_k).
    static MeasurementModel from_effects(const std::vector<Matrix>& effects) {
        std::vector<Outcome> out;
        for (std::size_t k = 0; k < effects.size(); ++k) out.push_back({static_cast<int>(k), {psd_sqrt(effects[k])}});
        return MeasurementModel(std::move(out));
    }

    /// Projective measurement onto the computational basis states.
    static MeasurementModel computational_basis(Eigen::Index dim) {
        std::vector<Outcome> out;
        for (Eigen::Index k = 0; k < dim; ++k) {
            Matrix p = Matrix::Zero(dim, dim);
            p(k, k) = 1.0;
            out.push_back({static_cast<int>(k), {p}});
        }
        return MeasurementModel(std::move(out));
    }

    /// Classical channel: E_k = diag_s P(k|s); `likelihood[s][k]` = P(k|s).
    static MeasurementModel classical(const std::vector<std::vector<double>>& likelihood) {
        if (likelihood.empty()) throw InvariantViolation("classical measurement needs at least one system state");
        const auto dim = static_cast<Eigen::Index>(likelihood.size());
        const std::size_t n = likelihood.front().size();
        std::vector<Outcome> out;
        for (std::size_t k = 0; k < n; ++k) {
            Matrix m = Matrix::Zero(dim, dim);
            for (Eigen::Index s = 0; s < dim; ++s) {
                const auto& row = likelihood[static_cast<std::size_t>(s)];
                if (row.size() != n) throw DimensionMismatch("ragged likelihood table");
                m(s, s) = std::sqrt(std::max(0.0, row[k]));
            }
            out.push_back({static_cast<int>(k), {m}});
        }
        return MeasurementModel(std::move(out));
    }

    std::size_t outcome_count() const noexcept { return outcomes_.size(); }
    Eigen::Index dim() const noexcept { return dim_; }
    const std::vector<Outcome>& outcomes() const noexcept { return outcomes_; }
    const std::vector<Matrix>& effects() const noexcept { return effects_; }
    const Matrix& effect(std::size_t k) const { return effects_.at(k); }

    bool is_classical(double tol = policy.validation) const {
        for (const auto& o : outcomes_)
            for (const auto& m : o.operators)
                if (!is_diagonal(m.adjoint() * m, tol)) return false;
        return true;
    }

    /// P(k|s) = <s|E_k|s>, indexed [s][k].
    std::vector<std::vector<double>> likelihood() const {
        std::vector<std::vector<double>> l(static_cast<std::size_t>(dim_), std::vector<double>(outcome_count()));
        for (std::size_t k = 0; k < outcome_count(); ++k)
            for (Eigen::Index s = 0; s < dim_; ++s) l[static_cast<std::size_t>(s)][k] = effects_[k](s, s).real();
        return l;
    }

private:
    std::vector<Outcome> outcomes_;
    std::vector<Matrix> effects_;
    Eigen::Index dim_ = 0;
};

/// Random POVM with one operator per outcome, M_k = V_k sqrt(E_k) for Haar V_k.
inline MeasurementModel random_measurement(std::uint64_t seed, Eigen::Index dim, std::size_t outcomes) {
    Rng rng(seed);
    const auto effects = random_effects(rng, dim, outcomes);
    std::vector<Outcome> out;
    for (std::size_t k = 0; k < outcomes; ++k)
        out.push_back({static_cast<int>(k), {random_unitary_matrix(rng, dim) * psd_sqrt(effects[k])}});
    return MeasurementModel(std::move(out));
}

/// -sum p ln p in nats.
inline double shannon(std::span<const double> p) {
    double sum = 0.0;
    double h = 0.0;
    for (double x : p) {
        if (!(x >= 0.0) || !std::isfinite(x)) throw InvariantViolation(fmt::format("invalid probability {}", x));
        sum += x;
        if (x > policy.log_clamp) h -= x * std::log(x);
    }
    if (p.empty() || std::abs(sum - 1.0) > policy.probability_sum)
        throw InvariantViolation(fmt::format("probabilities sum to {} (expected 1)", sum));
    return std::max(0.0, h);
}

struct OutcomeStatistics {
    std::vector<double> probabilities;                   // p_k
    std::vector<std::vector<double>> sub_probabilities;  // p_ki
    std::vector<Matrix> conditional;                     // sigma_k = sqrt(E_k) rho sqrt(E_k), unnormalized
};

inline void check_compatible(const DensityOperator& rho, const MeasurementModel& m) {
    if (rho.dim() != m.dim())
        throw DimensionMismatch(fmt::format("state of dimension {} measured by a {}-dim POVM", rho.dim(), m.dim()));
}

inline OutcomeStatistics outcome_statistics(const DensityOperator& rho, const MeasurementModel& m) {
    check_compatible(rho, m);
    OutcomeStatistics st;
    for (std::size_t k = 0; k < m.outcome_count(); ++k) {
        std::vector<double> pki;
        double pk = 0.0;
        for (const auto& op : m.outcomes()[k].operators) {
            const double v = std::max(0.0, (op.adjoint() * op * rho.matrix()).trace().real());
            pki.push_back(v);
            pk += v;
        }
        const Matrix root = psd_sqrt(m.effect(k));
        Matrix sigma = root * rho.matrix() * root;
        st.conditional.push_back(0.5 * (sigma + sigma.adjoint()));
        st.sub_probabilities.push_back(std::move(pki));
        st.probabilities.push_back(pk);
    }
    return st;
}

struct QcMutualInformation {
    double shannon = 0.0;       // H
    double mutual = 0.0;        // I, defining formula
    double mutual_alt = 0.0;    // I = S(rho) - sum p_k S(sigma_k / p_k)
    double system_entropy = 0.0;
    OutcomeStatistics statistics;

    bool formulas_agree() const { return std::abs(mutual - mutual_alt) <= policy.identity_check; }
    bool in_range() const { return mutual >= -policy.probability_sum && mutual <= shannon + policy.probability_sum; }
};

/// Both routes to the QC-mutual information, without throwing on disagreement.
inline QcMutualInformation qc_mutual_information_report(const DensityOperator& rho, const MeasurementModel& m) {
    QcMutualInformation r;
    r.statistics = outcome_statistics(rho, m);
    r.system_entropy = von_neumann_entropy(rho);
    std::vector<double> p = r.statistics.probabilities;
    double total = 0.0;
    for (double x : p) total += x;
    if (std::abs(total - 1.0) > policy.probability_sum)
        throw InvariantViolation(fmt::format("outcome probabilities sum to {} (expected 1)", total));
    r.shannon = shannon(p);

    double defining = r.system_entropy + r.shannon;
    double alt = r.system_entropy;
    for (std::size_t k = 0; k < p.size(); ++k) {
        const Matrix& sigma = r.statistics.conditional[k];
        defining += trace_x_log_x(sigma);
        if (p[k] > policy.log_clamp) alt -= p[k] * std::max(0.0, -trace_x_log_x(Matrix(sigma / p[k])));
    }
    r.mutual = defining;
    r.mutual_alt = alt;
    return r;
}

/// QC-mutual information I. Throws if the two formulas disagree or I leaves [0, H].
inline double qc_mutual_information(const DensityOperator& rho, const MeasurementModel& m) {
    const auto r = qc_mutual_information_report(rho, m);
    if (!r.formulas_agree())
        throw Error(fmt::format("QC-mutual information routes disagree: {} vs {}", r.mutual, r.mutual_alt));
    if (!r.in_range())
        throw InvariantViolation(fmt::format("QC-mutual information {} outside [0, H={}]", r.mutual, r.shannon));
    return r.mutual;
}

/// Measurement operators obtained from a classical memory interaction.
/// `source_label[k][a]` is the memory+bath basis index whose pointer state accompanies operator a of outcome k.
struct ClassicalDecomposition {
    MeasurementModel model;
    std::vector<std::vector<Eigen::Index>> source_label;
    double max_deviation = 0.0;
};

/// Checks that `u` is a 0/1 permutation matrix and returns the preimage of each row.
inline std::vector<Eigen::Index> permutation_preimage(const Matrix& u) {
    const Eigen::Index n = u.rows();
    if (u.cols() != n) throw NotClassical("interaction is not square");
    std::vector<Eigen::Index> pre(static_cast<std::size_t>(n), -1);
    std::vector<int> col_hits(static_cast<std::size_t>(n), 0);
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index c = 0; c < n; ++c) {
            const Complex v = u(r, c);
            if (std::abs(v - Complex(1.0)) <= policy.validation) {
                if (pre[static_cast<std::size_t>(r)] >= 0) throw NotClassical(fmt::format("row {} of the interaction has two unit entries", r));
                pre[static_cast<std::size_t>(r)] = c;
                ++col_hits[static_cast<std::size_t>(c)];
            } else if (std::abs(v) > policy.validation) {
                throw NotClassical(fmt::format("interaction entry ({},{}) is neither 0 nor 1", r, c));
            }
        }
        if (pre[static_cast<std::size_t>(r)] < 0) throw NotClassical(fmt::format("row {} of the interaction has no unit entry", r));
    }
    for (Eigen::Index c = 0; c < n; ++c)
        if (col_hits[static_cast<std::size_t>(c)] != 1) throw NotClassical(fmt::format("column {} of the interaction is not a permutation column", c));
    return pre;
}

/// Decomposes the post-projection state P_k U (rho_S (x) rho_MB) U^dagger P_k of a classical
/// interaction into sum_{k,i} M_ki rho_S M_ki^dagger (x) |ki><ki|.
///
/// Matrix elements are <s|M|s'> = sqrt(r_lj) <s,k,i|U|s',l,j>, weighted by the initial
/// memory+bath occupation r of the source label. When two rows of the same pointer label draw
/// from the same system state s', those entries are split across separate operators sharing the
/// label so that every operator is injective on its support; otherwise there is one operator per label.
inline ClassicalDecomposition classical_decompose(const Matrix& u, const DensityOperator& rho_s, const DensityOperator& rho_mb,
                                                  const MemoryLayout& layout) {
    if (!is_diagonal(rho_s.matrix())) throw NotClassical("system state is not diagonal");
    if (!is_diagonal(rho_mb.matrix())) throw NotClassical("memory+bath state is not diagonal");
    const Eigen::Index ds = rho_s.dim();
    const Eigen::Index dmb = rho_mb.dim();
    const auto dm = static_cast<Eigen::Index>(layout.dim());
    if (dmb % dm != 0)
        throw DimensionMismatch(fmt::format("memory+bath dimension {} is not a multiple of memory dimension {}", dmb, dm));
    const Eigen::Index db = dmb / dm;
    if (u.rows() != ds * dmb)
        throw DimensionMismatch(fmt::format("interaction has dimension {}, expected {}", u.rows(), ds * dmb));
    const auto pre = permutation_preimage(u);

    std::vector<Outcome> outcomes(layout.outcome_count());
    std::vector<std::vector<Eigen::Index>> labels(layout.outcome_count());
    for (std::size_t k = 0; k < outcomes.size(); ++k) outcomes[k].k = static_cast<int>(k);

    for (Eigen::Index t = 0; t < dmb; ++t) {
        const std::size_t k = layout.branch_of(static_cast<std::size_t>(t / db));
        std::vector<Matrix> ops;
        std::vector<std::vector<bool>> used_cols;
        for (Eigen::Index s = 0; s < ds; ++s) {
            const Eigen::Index src = pre[static_cast<std::size_t>(s * dmb + t)];
            const Eigen::Index s_src = src / dmb;
            const Eigen::Index lj = src % dmb;
            const double r = rho_mb.matrix()(lj, lj).real();
            if (r <= 0.0) continue;
            std::size_t slot = 0;
            while (slot < ops.size() && used_cols[slot][static_cast<std::size_t>(s_src)]) ++slot;
            if (slot == ops.size()) {
                ops.push_back(Matrix::Zero(ds, ds));
                used_cols.emplace_back(static_cast<std::size_t>(ds), false);
            }
            ops[slot](s, s_src) = std::sqrt(r);
            used_cols[slot][static_cast<std::size_t>(s_src)] = true;
        }
        for (auto& op : ops) {
            outcomes[k].operators.push_back(std::move(op));
            labels[k].push_back(t);
        }
    }

    // Reference: project the evolved state onto each branch.
    const Matrix evolved = u * kron(rho_s.matrix(), rho_mb.matrix()) * u.adjoint();
    Matrix projected = Matrix::Zero(evolved.rows(), evolved.cols());
    for (std::size_t k = 0; k < layout.outcome_count(); ++k) {
        Matrix pk = Matrix::Zero(dmb, dmb);
        for (Eigen::Index t = 0; t < dmb; ++t)
            if (layout.branch_of(static_cast<std::size_t>(t / db)) == k) pk(t, t) = 1.0;
        const Matrix full = kron(Matrix::Identity(ds, ds), pk);
        projected += full * evolved * full;
    }
    Matrix rebuilt = Matrix::Zero(evolved.rows(), evolved.cols());
    for (std::size_t k = 0; k < outcomes.size(); ++k) {
        for (std::size_t a = 0; a < outcomes[k].operators.size(); ++a) {
            const Matrix& m = outcomes[k].operators[a];
            Matrix pointer = Matrix::Zero(dmb, dmb);
            pointer(labels[k][a], labels[k][a]) = 1.0;
            rebuilt += kron(m * rho_s.matrix() * m.adjoint(), pointer);
        }
    }
    const double dev = (rebuilt - projected).cwiseAbs().maxCoeff();
    if (dev > policy.povm_completeness)
        throw ReconstructionFailure(fmt::format("classical decomposition does not reproduce the projected state (max deviation {:.3e})", dev), dev);

    // A label may carry no operator at all when its sources have zero weight; keep the outcome with an empty list.
    for (auto& o : outcomes)
        if (o.operators.empty()) o.operators.push_back(Matrix::Zero(ds, ds));
    for (std::size_t k = 0; k < outcomes.size(); ++k)
        if (labels[k].empty()) labels[k].push_back(-1);
    return {MeasurementModel(std::move(outcomes)), std::move(labels), dev};
}

} // namespace infothermo
