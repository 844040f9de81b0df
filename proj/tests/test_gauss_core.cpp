#include "adats/gauss_core.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace adats;

namespace {

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
    Eigen::Index i = 0;
    for (const auto& r : rows) {
        Eigen::Index j = 0;
        for (double v : r) m(i, j++) = v;
        ++i;
    }
    return m;
}

Matrix random_spd(Eigen::Index d, RngStream& rng) {
    Matrix a(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) a(i, j) = rng.normal();
    return a * a.transpose() + 0.1 * Matrix::Identity(d, d);
}

}  // namespace

TEST(Cholesky, IdentityIsItsOwnFactor) {
    const auto f = cholesky(PsdMatrix::identity(3));
    EXPECT_TRUE(f.lower.isApprox(Matrix::Identity(3, 3)));
    EXPECT_EQ(f.jitter, 0.0);
}

TEST(Cholesky, TwoByTwoExample) {
    const auto f = cholesky(PsdMatrix(mat({{4, 2}, {2, 3}})));
    EXPECT_NEAR(f.lower(0, 0), 2.0, 1e-14);
    EXPECT_NEAR(f.lower(0, 1), 0.0, 1e-14);
    EXPECT_NEAR(f.lower(1, 0), 1.0, 1e-14);
    EXPECT_NEAR(f.lower(1, 1), std::sqrt(2.0), 1e-14);
}

TEST(Cholesky, RankOneNeedsJitter) {
    const auto f = cholesky(PsdMatrix(mat({{1, 1}, {1, 1}})));
    EXPECT_GT(f.jitter, 0.0);
    EXPECT_GT(f.lower(1, 1), 0.0);
    EXPECT_LT(f.lower(1, 1), 1e-3);
}

TEST(Cholesky, IndefiniteThrows) {
    EXPECT_THROW(cholesky(PsdMatrix(mat({{1, 0}, {0, -1}}))), NotPsd);
}

TEST(SolveSpd, Examples) {
    EXPECT_TRUE(solve_spd(PsdMatrix::identity(2), Vector{{3.0, -1.0}}).isApprox(Vector{{3.0, -1.0}}));
    EXPECT_TRUE(solve_spd(PsdMatrix::diagonal(Vector{{2.0, 5.0}}), Vector{{4.0, 10.0}}).isApprox(Vector{{2.0, 2.0}}));
    const Matrix a = mat({{4, 2}, {2, 3}});
    const Vector b{{2.0, 1.0}};
    EXPECT_LT((a * solve_spd(PsdMatrix(a), b) - b).norm(), 1e-10);
}

TEST(SpdInverse, Examples) {
    EXPECT_TRUE(spd_inverse(PsdMatrix::diagonal(Vector{{2.0, 4.0}})).matrix().isApprox(Vector{{0.5, 0.25}}.asDiagonal().toDenseMatrix()));
    EXPECT_TRUE(spd_inverse(PsdMatrix::identity(5)).matrix().isApprox(Matrix::Identity(5, 5)));
    RngStream rng(3, 0);
    const Matrix a = random_spd(4, rng);
    const Matrix r = a * spd_inverse(PsdMatrix(a)).matrix() - Matrix::Identity(4, 4);
    EXPECT_LT(r.cwiseAbs().maxCoeff(), 1e-8);
}

TEST(MvnSample, ZeroCovarianceReturnsMean) {
    RngStream rng(1, 0);
    const Vector mean{{1.0, -2.0, 0.5}};
    EXPECT_LT((mvn_sample(mean, PsdMatrix::zero(3), rng) - mean).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(MvnSample, SampleMomentsMatch) {
    RngStream rng(5, 9);
    const Vector mean = Vector::Zero(2);
    const PsdMatrix cov = PsdMatrix::diagonal(Vector{{1.0, 4.0}});
    const int n = 100000;
    Vector sum = Vector::Zero(2);
    Matrix sq = Matrix::Zero(2, 2);
    for (int i = 0; i < n; ++i) {
        const Vector x = mvn_sample(mean, cov, rng);
        sum += x;
        sq += x * x.transpose();
    }
    const Vector m = sum / n;
    const Matrix c = sq / n - m * m.transpose();
    EXPECT_NEAR(c(0, 0), 1.0, 0.05);
    EXPECT_NEAR(c(1, 1), 4.0, 0.2);
    EXPECT_NEAR(c(0, 1), 0.0, 0.05);
    EXPECT_LT(std::abs(m(0)), 4.0 * 1.0 / std::sqrt(n));
    EXPECT_LT(std::abs(m(1)), 4.0 * 2.0 / std::sqrt(n));
}

TEST(RngStream, SameSeedSameDraws) {
    RngStream a(1, 0);
    RngStream b(1, 0);
    for (int i = 0; i < 1000; ++i) {
        const Vector x = mvn_sample(Vector::Zero(3), PsdMatrix::identity(3), a);
        const Vector y = mvn_sample(Vector::Zero(3), PsdMatrix::identity(3), b);
        ASSERT_EQ(x, y);
    }
    RngStream c(1, 1);
    RngStream d(2, 0);
    RngStream e(1, 0);
    const double first = e.uniform();
    EXPECT_NE(first, c.uniform());
    EXPECT_NE(first, d.uniform());
}

TEST(RngStream, UniformStaysInsideUnitInterval) {
    RngStream rng(0, 0);
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
}

TEST(RngStream, BetaMean) {
    RngStream rng(11, 2);
    double sum = 0.0;
    const int n = 50000;
    for (int i = 0; i < n; ++i) sum += rng.beta(9.0, 1.0);
    EXPECT_NEAR(sum / n, 0.9, 0.003);
}

// ---- properties over random matrices ------------------------------------

TEST(PsdProperty, ConstructionIsSymmetric) {
    RngStream rng(21, 0);
    for (int trial = 0; trial < 200; ++trial) {
        const auto d = static_cast<Eigen::Index>(1 + trial % 8);
        Matrix a = random_spd(d, rng);
        a(0, d - 1) += 1e-9 * rng.normal();
        const PsdMatrix p(a);
        const PsdMatrix q = p + 2.5 * PsdMatrix(random_spd(d, rng));
        for (const auto* m : {&p, &q})
            for (Eigen::Index i = 0; i < d; ++i)
                for (Eigen::Index j = 0; j < d; ++j)
                    ASSERT_LE(std::abs((*m)(i, j) - (*m)(j, i)), 1e-12 * std::max(1.0, std::abs((*m)(i, j))));
    }
}

TEST(PsdProperty, CholeskyRoundTrip) {
    RngStream rng(22, 0);
    for (int trial = 0; trial < 200; ++trial) {
        const auto d = static_cast<Eigen::Index>(1 + trial % 8);
        const PsdMatrix a(random_spd(d, rng));
        const auto f = cholesky(a);
        ASSERT_LE((f.lower * f.lower.transpose() - a.matrix()).norm(), 1e-9 * a.matrix().norm());
        ASSERT_TRUE((f.lower.diagonal().array() > 0.0).all());
    }
}

TEST(PsdProperty, InverseIsInvolution) {
    RngStream rng(23, 0);
    for (int trial = 0; trial < 200; ++trial) {
        const auto d = static_cast<Eigen::Index>(1 + trial % 8);
        const PsdMatrix a(random_spd(d, rng));
        const Matrix back = spd_inverse(spd_inverse(a)).matrix();
        ASSERT_LE((back - a.matrix()).cwiseAbs().maxCoeff(), 1e-7 * std::max(1.0, a.matrix().cwiseAbs().maxCoeff()));
    }
}

TEST(Eigenvalues, DiagonalExtremes) {
    const PsdMatrix a = PsdMatrix::diagonal(Vector{{0.3, 2.0, 1.0}});
    EXPECT_NEAR(max_eigenvalue(a), 2.0, 1e-12);
    EXPECT_NEAR(min_eigenvalue(a), 0.3, 1e-12);
}
