#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace adats {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when a covariance cannot be factored even after the jitter ladder.
class NotPsd : public std::runtime_error {
public:
    explicit NotPsd(const std::string& what) : std::runtime_error(what) {}
};

/// Symmetric positive semi-definite matrix. Every construction symmetrizes
/// the input, so A(i,j) == A(j,i) holds bit-for-bit.
class PsdMatrix {
public:
    PsdMatrix() = default;
    explicit PsdMatrix(const Matrix& a) : m_(symmetrized(a)) {}

    static PsdMatrix identity(Eigen::Index dim) { return PsdMatrix(Matrix::Identity(dim, dim)); }
    static PsdMatrix zero(Eigen::Index dim) { return PsdMatrix(Matrix::Zero(dim, dim)); }
    static PsdMatrix diagonal(const Vector& d) { return PsdMatrix(Matrix(d.asDiagonal())); }
    static PsdMatrix scaled_identity(Eigen::Index dim, double v) {
        return PsdMatrix(Matrix::Identity(dim, dim) * v);
    }

    [[nodiscard]] Eigen::Index dim() const { return m_.rows(); }
    [[nodiscard]] const Matrix& matrix() const { return m_; }
    [[nodiscard]] double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }
    [[nodiscard]] Vector diag() const { return m_.diagonal(); }
    [[nodiscard]] bool is_diagonal() const {
        return (m_ - Matrix(m_.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0;
    }

    friend PsdMatrix operator+(const PsdMatrix& a, const PsdMatrix& b) {
        return PsdMatrix(a.m_ + b.m_);
    }
    friend PsdMatrix operator*(double s, const PsdMatrix& a) { return PsdMatrix(s * a.m_); }

private:
    static Matrix symmetrized(const Matrix& a) {
        if (a.rows() != a.cols()) throw std::invalid_argument("PsdMatrix: matrix is not square");
        Matrix s = 0.5 * (a + a.transpose());
        return s;
    }

    Matrix m_;
};

/// Lower-triangular L with L·Lᵀ = source + jitter·I.
struct CholeskyFactor {
    Matrix lower;
    double jitter = 0.0;

    [[nodiscard]] Eigen::Index dim() const { return lower.rows(); }
};

inline constexpr std::array<double, 4> kJitterLadder{0.0, 1e-12, 1e-10, 1e-8};

/// Factor with escalating diagonal jitter. A zero matrix lands on the 1e-12
/// rung, which is what degenerate (point-mass) covariances rely on.
inline CholeskyFactor cholesky(const PsdMatrix& a) {
    const auto d = a.dim();
    if (d < 1) throw std::invalid_argument("cholesky: empty matrix");
    for (double jitter : kJitterLadder) {
        Matrix shifted = a.matrix();
        shifted.diagonal().array() += jitter;
        Eigen::LLT<Matrix> llt(shifted);
        if (llt.info() != Eigen::Success) continue;
        Matrix l = llt.matrixL();
        if ((l.diagonal().array() > 0.0).all() && l.allFinite()) return {std::move(l), jitter};
    }
    throw NotPsd("cholesky: matrix not positive semi-definite after jitter 1e-8 (dim " +
                 std::to_string(d) + ")");
}

inline Vector solve_spd(const PsdMatrix& a, const Vector& b) {
    if (b.size() != a.dim()) throw std::invalid_argument("solve_spd: dimension mismatch");
    const CholeskyFactor f = cholesky(a);
    const auto l = f.lower.triangularView<Eigen::Lower>();
    Vector y = l.solve(b);
    return l.transpose().solve(y);
}

inline PsdMatrix spd_inverse(const PsdMatrix& a) {
    const CholeskyFactor f = cholesky(a);
    const auto l = f.lower.triangularView<Eigen::Lower>();
    Matrix y = l.solve(Matrix::Identity(a.dim(), a.dim()));
    return PsdMatrix(l.transpose().solve(y));
}

/// Largest and smallest eigenvalue of a symmetric matrix.
inline double max_eigenvalue(const PsdMatrix& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(a.matrix(), Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}
inline double min_eigenvalue(const PsdMatrix& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(a.matrix(), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

namespace detail {
inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

inline constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}
}  // namespace detail

/// Combine integers into a stream id. Order matters.
template <typename... Ts>
constexpr std::uint64_t hash_stream(Ts... parts) {
    std::uint64_t h = 0x6A09E667F3BCC909ULL;
    ((h = detail::mix64(h + detail::kGolden + static_cast<std::uint64_t>(parts))), ...);
    return h;
}

/// Counter-based generator: draw k is a pure function of (seed, stream_id, k).
/// Satisfies UniformRandomBitGenerator so std distributions accept it.
class RngStream {
public:
    using result_type = std::uint64_t;

    RngStream(std::uint64_t seed, std::uint64_t stream_id)
        : seed_(seed), stream_(stream_id),
          key_(detail::mix64(detail::mix64(seed) ^ (stream_id * detail::kGolden + 0x2545F4914F6CDD1DULL))) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        ++counter_;
        return detail::mix64(key_ + counter_ * detail::kGolden);
    }

    /// Uniform on the open interval (0, 1).
    double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

    /// Box-Muller, one normal per call (no cached second value, so the
    /// number of raw draws consumed is always 2).
    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double gamma(double shape) { return std::gamma_distribution<double>(shape, 1.0)(*this); }

    double beta(double a, double b) {
        const double x = gamma(a);
        const double y = gamma(b);
        return x / (x + y);
    }

    [[nodiscard]] std::uint64_t seed() const { return seed_; }
    [[nodiscard]] std::uint64_t stream_id() const { return stream_; }
    [[nodiscard]] std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

inline Vector standard_normal(Eigen::Index d, RngStream& rng) {
    Vector z(d);
    for (Eigen::Index i = 0; i < d; ++i) z(i) = rng.normal();
    return z;
}

inline Vector mvn_sample(const Vector& mean, const PsdMatrix& cov, RngStream& rng) {
    if (mean.size() != cov.dim()) throw std::invalid_argument("mvn_sample: dimension mismatch");
    const CholeskyFactor f = cholesky(cov);
    const Vector z = standard_normal(mean.size(), rng);
    return mean + f.lower.triangularView<Eigen::Lower>() * z;
}

}  // namespace adats
