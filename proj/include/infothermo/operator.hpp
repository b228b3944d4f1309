#pragma once

// Finite-dimensional Hermitian operator algebra: validated operator types,
// spectral matrix functions, entropies, canonical states.
//
// Energies are in units with k_B = 1; entropies are in nats.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "infothermo/errors.hpp"
#include "infothermo/policy.hpp"

namespace infothermo {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

class Temperature {
public:
    explicit Temperature(double value) : value_(value) {
        if (!(value > 0.0) || !std::isfinite(value)) {
            throw InvariantViolation(fmt::format("temperature must be positive and finite, got {}", value));
        }
    }
    double value() const noexcept { return value_; }
    double beta() const noexcept { return 1.0 / value_; }

private:
    double value_;
};

/// Largest |A - A^dagger| entry.
inline double hermitian_deviation(const Matrix& m) {
    if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
    if (m.size() == 0) return 0.0;
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline bool is_diagonal(const Matrix& m, double tol = policy.validation) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            if (i != j && std::abs(m(i, j)) > tol) return false;
    return true;
}

struct EigenSystem {
    RealVector values;  // ascending
    Matrix vectors;     // columns
};

inline EigenSystem hermitian_eigen(const Matrix& m) {
    // Symmetrize so round-off in the input does not leak into the spectrum.
    const Matrix h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
    if (solver.info() != Eigen::Success) throw Error("Hermitian eigendecomposition failed");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

/// V f(Lambda) V^dagger for a Hermitian matrix.
template <typename F>
Matrix apply_spectral(const Matrix& m, F&& f) {
    const auto eig = hermitian_eigen(m);
    RealVector fv(eig.values.size());
    for (Eigen::Index i = 0; i < fv.size(); ++i) fv[i] = f(eig.values[i]);
    return eig.vectors * fv.cast<Complex>().asDiagonal() * eig.vectors.adjoint();
}

/// Square root of a positive semidefinite matrix; negative round-off eigenvalues clamp to zero.
inline Matrix psd_sqrt(const Matrix& m) {
    return apply_spectral(m, [](double x) { return x > 0.0 ? std::sqrt(x) : 0.0; });
}

/// Sum of x ln x over eigenvalues, with 0 ln 0 := 0. Works for unnormalized PSD input.
inline double trace_x_log_x(std::span<const double> spectrum) {
    double acc = 0.0;
    for (double x : spectrum)
        if (x > policy.log_clamp) acc += x * std::log(x);
    return acc;
}

inline double trace_x_log_x(const Matrix& psd) {
    const auto eig = hermitian_eigen(psd);
    return trace_x_log_x(std::span<const double>(eig.values.data(), static_cast<std::size_t>(eig.values.size())));
}

class HermitianOperator {
public:
    explicit HermitianOperator(Matrix m) : m_(std::move(m)) {
        if (m_.rows() != m_.cols() || m_.rows() == 0)
            throw InvariantViolation(fmt::format("operator must be square and non-empty, got {}x{}", m_.rows(), m_.cols()));
        const double dev = hermitian_deviation(m_);
        if (dev > policy.validation)
            throw InvariantViolation(fmt::format("operator is not Hermitian (max deviation {:.3e})", dev));
    }

    static HermitianOperator diagonal(std::span<const double> levels) {
        Matrix m = Matrix::Zero(static_cast<Eigen::Index>(levels.size()), static_cast<Eigen::Index>(levels.size()));
        for (std::size_t i = 0; i < levels.size(); ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = levels[i];
        return HermitianOperator(std::move(m));
    }

    Eigen::Index dim() const noexcept { return m_.rows(); }
    const Matrix& matrix() const noexcept { return m_; }

private:
    Matrix m_;
};

class DensityOperator {
public:
    explicit DensityOperator(Matrix m) : m_(std::move(m)) {
        if (m_.rows() != m_.cols() || m_.rows() == 0)
            throw InvariantViolation(fmt::format("density operator must be square and non-empty, got {}x{}", m_.rows(), m_.cols()));
        const double dev = hermitian_deviation(m_);
        if (dev > policy.validation)
            throw InvariantViolation(fmt::format("density operator is not Hermitian (max deviation {:.3e})", dev));
        const Complex tr = m_.trace();
        if (std::abs(tr - Complex(1.0, 0.0)) > policy.validation)
            throw InvariantViolation(fmt::format("density operator trace is {} (expected 1)", tr.real()));
        const double lo = hermitian_eigen(m_).values.minCoeff();
        if (lo < -policy.validation)
            throw InvariantViolation(fmt::format("density operator has negative eigenvalue {:.3e}", lo));
    }

    static DensityOperator diagonal(std::span<const double> probabilities) {
        const auto n = static_cast<Eigen::Index>(probabilities.size());
        Matrix m = Matrix::Zero(n, n);
        for (Eigen::Index i = 0; i < n; ++i) m(i, i) = probabilities[static_cast<std::size_t>(i)];
        return DensityOperator(std::move(m));
    }

    static DensityOperator pure(const Eigen::VectorXcd& psi) {
        const Eigen::VectorXcd v = psi / psi.norm();
        return DensityOperator(v * v.adjoint());
    }

    static DensityOperator maximally_mixed(Eigen::Index dim) {
        return DensityOperator(Matrix::Identity(dim, dim) / static_cast<double>(dim));
    }

    Eigen::Index dim() const noexcept { return m_.rows(); }
    const Matrix& matrix() const noexcept { return m_; }

    RealVector spectrum() const { return hermitian_eigen(m_).values; }

    /// Diagonal in the computational basis, as probabilities.
    std::vector<double> populations() const {
        std::vector<double> p(static_cast<std::size_t>(dim()));
        for (Eigen::Index i = 0; i < dim(); ++i) p[static_cast<std::size_t>(i)] = m_(i, i).real();
        return p;
    }

private:
    Matrix m_;
};

/// -sum lambda ln lambda, nats.
inline double von_neumann_entropy(const DensityOperator& rho) {
    const RealVector ev = rho.spectrum();
    const double s = -trace_x_log_x(std::span<const double>(ev.data(), static_cast<std::size_t>(ev.size())));
    return std::max(0.0, s);
}

struct CanonicalState {
    DensityOperator state;
    double free_energy;
    double log_partition;  // ln Z, shift included
};

/// exp(-H/T)/Z and F = -T ln Z. The ground energy is subtracted before exponentiation.
inline CanonicalState canonical_state(const HermitianOperator& h, Temperature temperature) {
    const auto eig = hermitian_eigen(h.matrix());
    const double ground = eig.values.minCoeff();
    const double beta = temperature.beta();
    RealVector weights(eig.values.size());
    for (Eigen::Index i = 0; i < weights.size(); ++i) weights[i] = std::exp(-beta * (eig.values[i] - ground));
    const double z_shifted = weights.sum();
    weights /= z_shifted;
    Matrix rho = eig.vectors * weights.cast<Complex>().asDiagonal() * eig.vectors.adjoint();
    rho = 0.5 * (rho + rho.adjoint());
    const double log_z = std::log(z_shifted) - beta * ground;
    return {DensityOperator(std::move(rho)), -temperature.value() * log_z, log_z};
}

/// tr rho (ln rho - ln sigma). Throws SupportViolation when supp(rho) is not inside supp(sigma).
inline double relative_entropy(const DensityOperator& rho, const DensityOperator& sigma) {
    if (rho.dim() != sigma.dim())
        throw DimensionMismatch(fmt::format("relative entropy of {}-dim and {}-dim states", rho.dim(), sigma.dim()));
    const auto es = hermitian_eigen(sigma.matrix());
    double cross = 0.0;     // tr rho ln sigma over supp(sigma)
    double leaked = 0.0;    // weight of rho on ker(sigma)
    for (Eigen::Index j = 0; j < es.values.size(); ++j) {
        const auto v = es.vectors.col(j);
        const double w = (v.adjoint() * rho.matrix() * v)(0, 0).real();
        if (es.values[j] > policy.support_zero)
            cross += w * std::log(es.values[j]);
        else
            leaked += w;
    }
    if (leaked > policy.support_zero)
        throw SupportViolation(fmt::format("support of rho not contained in support of sigma (leaked weight {:.3e})", leaked));
    const RealVector er = rho.spectrum();
    const double self = trace_x_log_x(std::span<const double>(er.data(), static_cast<std::size_t>(er.size())));
    return self - cross;
}

/// Kronecker product a (x) b.
inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline DensityOperator tensor(const DensityOperator& rho, const DensityOperator& sigma) {
    return DensityOperator(kron(rho.matrix(), sigma.matrix()));
}

enum class Factor { first, second };

/// Traces out `traced` from an operator on a (dim_first x dim_second) product space.
inline Matrix partial_trace(const Matrix& m, Factor traced, std::pair<Eigen::Index, Eigen::Index> dims) {
    const auto [da, db] = dims;
    if (da <= 0 || db <= 0 || m.rows() != da * db || m.cols() != da * db)
        throw DimensionMismatch(fmt::format("partial trace: {}x{} operator is not on a {}x{} product space", m.rows(), m.cols(), da, db));
    if (traced == Factor::second) {
        Matrix out = Matrix::Zero(da, da);
        for (Eigen::Index i = 0; i < da; ++i)
            for (Eigen::Index j = 0; j < da; ++j)
                for (Eigen::Index k = 0; k < db; ++k) out(i, j) += m(i * db + k, j * db + k);
        return out;
    }
    Matrix out = Matrix::Zero(db, db);
    for (Eigen::Index i = 0; i < db; ++i)
        for (Eigen::Index j = 0; j < db; ++j)
            for (Eigen::Index k = 0; k < da; ++k) out(i, j) += m(k * db + i, k * db + j);
    return out;
}

inline DensityOperator partial_trace(const DensityOperator& rho, Factor traced, std::pair<Eigen::Index, Eigen::Index> dims) {
    Matrix reduced = partial_trace(rho.matrix(), traced, dims);
    reduced = 0.5 * (reduced + reduced.adjoint());
    return DensityOperator(std::move(reduced));
}

} // namespace infothermo
