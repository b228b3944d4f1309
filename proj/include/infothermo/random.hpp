#pragma once

// Seeded random instances for property checks. Every generator is a pure
// function of its arguments.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include <boost/random/bernoulli_distribution.hpp>
#include <boost/random/exponential_distribution.hpp>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include "infothermo/operator.hpp"

namespace infothermo {

enum class InstanceKind { state, hermitian, unitary, permutation };

/// SplitMix64 finalizer; derives independent stream seeds from (seed, index).
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index = 0) noexcept {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Same output stream as std::mt19937_64, measurably faster with Boost distributions.
using Rng = boost::random::mt19937_64;

inline Matrix ginibre(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
    boost::random::normal_distribution<double> normal(0.0, 1.0);
    Matrix g(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) {
            const double re = normal(rng);
            const double im = normal(rng);
            g(i, j) = Complex(re, im);
        }
    return g;
}

inline Matrix random_state_matrix(Rng& rng, Eigen::Index dim) {
    const Matrix g = ginibre(rng, dim, dim);
    Matrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    return 0.5 * (rho + rho.adjoint());
}

inline Matrix random_hermitian_matrix(Rng& rng, Eigen::Index dim) {
    const Matrix g = ginibre(rng, dim, dim);
    return 0.5 * (g + g.adjoint());
}

/// Haar unitary: QR of a Ginibre matrix with the phases of R's diagonal removed.
inline Matrix random_unitary_matrix(Rng& rng, Eigen::Index dim) {
    const Matrix g = ginibre(rng, dim, dim);
    Eigen::HouseholderQR<Matrix> qr(g);
    const Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    Matrix u = q;
    for (Eigen::Index j = 0; j < dim; ++j) {
        const Complex d = r(j, j);
        const double a = std::abs(d);
        u.col(j) *= (a > 0.0 ? d / a : Complex(1.0));
    }
    return u;
}

/// Image of each basis index under a uniformly random permutation.
inline std::vector<Eigen::Index> random_permutation_map(Rng& rng, Eigen::Index dim) {
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(dim));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    // std::shuffle's draw pattern is implementation-defined; Fisher-Yates with explicit draws is not.
    for (Eigen::Index i = dim - 1; i > 0; --i) {
        const auto j = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(i + 1));
        std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }
    return perm;
}

/// Permutation matrix with U|j> = |perm[j]>.
inline Matrix permutation_matrix(const std::vector<Eigen::Index>& perm) {
    const auto n = static_cast<Eigen::Index>(perm.size());
    Matrix u = Matrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) u(perm[static_cast<std::size_t>(j)], j) = 1.0;
    return u;
}

inline Matrix random_instance(std::uint64_t seed, Eigen::Index dim, InstanceKind kind) {
    if (dim < 1) throw InvariantViolation("random_instance requires dim >= 1");
    Rng rng(seed);
    switch (kind) {
    case InstanceKind::state: return random_state_matrix(rng, dim);
    case InstanceKind::hermitian: return random_hermitian_matrix(rng, dim);
    case InstanceKind::unitary: return random_unitary_matrix(rng, dim);
    case InstanceKind::permutation: return permutation_matrix(random_permutation_map(rng, dim));
    }
    return {};
}

inline DensityOperator random_state(std::uint64_t seed, Eigen::Index dim) {
    return DensityOperator(random_instance(seed, dim, InstanceKind::state));
}

/// Dirichlet(1,...,1) probability vector.
inline std::vector<double> random_probabilities(Rng& rng, std::size_t n) {
    boost::random::exponential_distribution<double> expo(1.0);
    std::vector<double> p(n);
    for (auto& x : p) x = expo(rng);
    const double s = std::accumulate(p.begin(), p.end(), 0.0);
    for (auto& x : p) x /= s;
    return p;
}

/// Random effects {E_k}: E_k = S^{-1/2} A_k S^{-1/2} with A_k Wishart and S = sum A_k.
inline std::vector<Matrix> random_effects(Rng& rng, Eigen::Index dim, std::size_t outcomes) {
    std::vector<Matrix> a(outcomes);
    Matrix total = Matrix::Zero(dim, dim);
    for (auto& ak : a) {
        const Matrix g = ginibre(rng, dim, dim);
        ak = g * g.adjoint();
        total += ak;
    }
    const Matrix inv_sqrt = apply_spectral(total, [](double x) { return 1.0 / std::sqrt(x); });
    for (auto& ak : a) {
        ak = inv_sqrt * ak * inv_sqrt;
        ak = 0.5 * (ak + ak.adjoint());
    }
    return a;
}

} // namespace infothermo
