#include "pooledcs/error.hpp"
#include "pooledcs/weights.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace pcs = pooledcs;

namespace {

// Loop-only evaluation of both weight formulas, written from the definitions.
struct OracleWeights {
    double lambda = 0.0;
    double w = 0.0;
    double beta = 0.0;
    std::vector<double> beta_k;
};

OracleWeights oracle(const pcs::Matrix& a, const pcs::Vector& y, double q, double sigma,
                     double q_a, double c) {
    const long n = a.rows();
    const long p = a.cols();
    const double nd = static_cast<double>(n);
    const double theta = 3.0 * std::log(static_cast<double>(p));
    const double kappa = sigma * std::log(1.0 + q_a);
    const double g = std::log(1.0 / (1.0 - std::pow(1.0 - std::exp(-theta), 1.0 / nd)));
    const double mq = q > 0.5 ? q : 1.0 - q;
    const double cnt = std::sqrt(2.0 * nd * q * (1.0 - q) * theta) + mq * theta / 3.0;
    double sum_y = 0.0, sum_y2 = 0.0;
    for (long l = 0; l < n; ++l) {
        sum_y += y[l];
        sum_y2 += y[l] * y[l];
    }
    const double factor = kappa * std::sqrt(2.0 * theta) / (1.0 - kappa * std::sqrt(2.0 * g));
    OracleWeights o;
    o.lambda = (sum_y + std::sqrt(sum_y2) * factor) / (nd * q - cnt);

    std::vector<std::vector<double>> rbar(n, std::vector<double>(p));
    for (long k = 0; k < p; ++k) {
        double col = 0.0;
        for (long l = 0; l < n; ++l) {
            col += a(l, k);
        }
        for (long l = 0; l < n; ++l) {
            const double r = (nd * a(l, k) - col) / (nd * (nd - 1.0) * q * (1.0 - q));
            rbar[l][k] = r * r;
        }
    }
    for (long k = 0; k < p; ++k) {
        for (long m = 0; m < p; ++m) {
            double v = 0.0;
            for (long l = 0; l < n; ++l) {
                v += rbar[l][k] * a(l, m);
            }
            o.w = std::max(o.w, v);
        }
    }
    const double shift =
        c * (theta / nd + mq * mq * theta * theta / (nd * nd * q * (1.0 - q))) * o.lambda;
    o.beta = kappa * o.lambda * std::sqrt(2.0 * theta * o.w) + shift;
    for (long k = 0; k < p; ++k) {
        double v = 0.0;
        for (long l = 0; l < n; ++l) {
            v += rbar[l][k] * y[l] * y[l];
        }
        o.beta_k.push_back(std::sqrt(v) * factor + shift);
    }
    return o;
}

struct Instance {
    pcs::PoolingMatrix a;
    pcs::GroundTruth truth;
    pcs::Vector y;
};

Instance draw(pcs::Index n, pcs::Index p, double q, double f_s, std::uint64_t seed,
              pcs::NoiseParams noise = {}) {
    pcs::RngStream s(seed);
    auto a = pcs::generate_pooling_matrix(n, p, q, s);
    auto truth = pcs::generate_signal(pcs::SignalSpec{p, f_s}, s);
    auto y = pcs::measure_exact(a, truth.x_star, noise, s);
    return Instance{std::move(a), std::move(truth), std::move(y)};
}

}  // namespace

TEST(GTheta, SinglePoolIsIdentity) {
    for (double theta : {0.1, 1.0, 2.0, 13.8, 50.0}) {
        EXPECT_NEAR(pcs::g_theta(theta, 1), theta, 1e-12 * theta);
    }
}

TEST(GTheta, HandValue) {
    EXPECT_NEAR(pcs::g_theta(std::log(4.0), 2), std::log(1.0 / (1.0 - std::sqrt(0.75))), 1e-12);
    EXPECT_NEAR(pcs::g_theta(std::log(4.0), 2), 2.0101, 1e-4);
}

TEST(GTheta, IncreasingInNAndDomain) {
    double previous = 0.0;
    for (pcs::Index n = 1; n < 2000; n *= 3) {
        const double g = pcs::g_theta(3.0 * std::log(1000.0), n);
        EXPECT_GT(g, previous);
        previous = g;
    }
    EXPECT_THROW(pcs::g_theta(0.0, 5), pcs::ParameterError);
    EXPECT_THROW(pcs::g_theta(1.0, 0), pcs::ParameterError);
    // Large θ continues smoothly into the asymptotic branch.
    EXPECT_NEAR(pcs::g_theta(699.0, 10), 699.0 + std::log(10.0), 1e-9);
}

TEST(CNTheta, HandValueAndSymmetry) {
    EXPECT_NEAR(pcs::c_n_theta(20, 0.5, 3.0), std::sqrt(30.0) + 0.5, 1e-12);
    EXPECT_NEAR(pcs::c_n_theta(20, 0.5, 3.0), 5.9772, 1e-4);
    EXPECT_EQ(pcs::c_n_theta(20, 0.5, 0.0), 0.0);
    EXPECT_NEAR(pcs::c_n_theta(20, 0.5, 1e-12), 0.0, 1e-5);
    EXPECT_NEAR(pcs::c_n_theta(77, 0.2, 4.0), pcs::c_n_theta(77, 0.8, 4.0), 1e-12);
}

TEST(SigmaBound, SpotValues) {
    EXPECT_NEAR(pcs::sigma_bound_simplified(100.0), 0.2377, 5e-4);
    EXPECT_NEAR(pcs::sigma_bound_simplified(std::exp(1.0)), 1.0 / (2.0 * std::log(2.0) * std::sqrt(2.0)),
                1e-12);
    EXPECT_NEAR(pcs::sigma_bound_simplified(std::exp(1.0)), 0.5101, 1e-4);
    EXPECT_GT(pcs::sigma_bound_simplified(100.0), pcs::sigma_bound_simplified(1000.0));
}

TEST(CheckAssumptions, PaperConfigPasses) {
    auto params = pcs::WeightParams::standard(300, 1000, 0.5, pcs::NoiseParams{0.05, 0.95});
    const auto r = pcs::check_assumptions(params);
    EXPECT_TRUE(r.all_passed()) << r.describe();
    EXPECT_NEAR(r.find("A1")->rhs, 12.0 * 0.5 * std::log(1000.0), 1e-12);
}

TEST(CheckAssumptions, FailuresAreReportedNotThrown) {
    auto tiny = pcs::WeightParams::standard(1, 2, 0.5, pcs::NoiseParams{});
    const auto r = pcs::check_assumptions(tiny);
    EXPECT_FALSE(r.find("A1")->passed);
    EXPECT_FALSE(r.all_passed());
    EXPECT_FALSE(r.find("C126")->passed);

    for (pcs::Index n : {5, 50, 500}) {
        for (double q : {0.1, 0.5}) {
            auto quiet = pcs::WeightParams::standard(n, 1000, q, pcs::NoiseParams{0.0, 0.95});
            EXPECT_TRUE(pcs::check_assumptions(quiet).find("A3")->passed);
        }
    }
    auto loud = pcs::WeightParams::standard(300, 1000, 0.5, pcs::NoiseParams{0.5, 0.95});
    EXPECT_FALSE(pcs::check_assumptions(loud).find("A3")->passed);
}

TEST(LambdaHat, ZeroAndScaling) {
    const auto params = pcs::WeightParams::standard(300, 1000, 0.5, pcs::NoiseParams{});
    EXPECT_EQ(pcs::lambda_hat(pcs::Vector::Zero(300), params), 0.0);
    const auto inst = draw(300, 1000, 0.5, 0.04, 1);
    const double base = pcs::lambda_hat(inst.y, params);
    EXPECT_NEAR(pcs::lambda_hat(2.5 * inst.y, params), 2.5 * base, 1e-12 * base);
    EXPECT_GT(base, inst.truth.x_star.lpNorm<1>());
}

TEST(LambdaHat, UndefinedBelowA1) {
    auto params = pcs::WeightParams::standard(160, 400, 0.1, pcs::NoiseParams{});
    params.force = true;
    EXPECT_THROW(pcs::lambda_hat(pcs::Vector::Ones(160), params), pcs::AssumptionError);
    auto loud = pcs::WeightParams::standard(300, 1000, 0.5, pcs::NoiseParams{0.5, 0.95});
    EXPECT_THROW(pcs::lambda_hat(pcs::Vector::Ones(300), loud), pcs::AssumptionError);
}

TEST(RMatrices, HandValues) {
    pcs::Matrix m(2, 2);
    m << 1, 0, 0, 1;
    const pcs::PoolingMatrix a(m, 0.5);
    const auto rm = pcs::r_matrices(a);
    EXPECT_NEAR(rm.r(0, 0), 2.0, 1e-12);
    EXPECT_NEAR(rm.r(1, 0), -2.0, 1e-12);
    EXPECT_EQ(rm.r_bar, rm.r.cwiseProduct(rm.r));
    EXPECT_NEAR(pcs::w_statistic(a, rm), 4.0, 1e-12);
}

TEST(RMatrices, ConstantColumnAndAllOnes) {
    pcs::Matrix m = pcs::Matrix::Ones(4, 3);
    m(1, 2) = 0.0;
    const pcs::PoolingMatrix a(m, 0.5);
    const auto rm = pcs::r_matrices(a);
    EXPECT_EQ(rm.r.col(0).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_GT(rm.r.col(2).cwiseAbs().maxCoeff(), 0.0);
    const pcs::PoolingMatrix ones(pcs::Matrix::Ones(4, 3), 0.5);
    EXPECT_EQ(pcs::w_statistic(ones, pcs::r_matrices(ones)), 0.0);
}

TEST(Weights, MatchIndependentOracle) {
    const auto inst = draw(300, 1000, 0.5, 0.04, 2);
    const auto params = pcs::WeightParams::standard(300, 1000, 0.5, pcs::NoiseParams{0.05, 0.95});
    const auto lasso = pcs::beta_lasso(inst.a, inst.y, params);
    const auto wlasso = pcs::beta_wlasso(inst.a, inst.y, params);
    const auto o = oracle(inst.a.membership(), inst.y, 0.5, 0.05, 0.95, 126.0);
    EXPECT_NEAR(lasso.lambda_hat, o.lambda, 1e-10 * o.lambda);
    EXPECT_NEAR(lasso.w, o.w, 1e-10 * o.w);
    EXPECT_NEAR(lasso.beta, o.beta, 1e-10 * o.beta);
    for (pcs::Index k = 0; k < 1000; ++k) {
        ASSERT_NEAR(wlasso.beta_k[k], o.beta_k[static_cast<std::size_t>(k)],
                    1e-10 * o.beta_k[static_cast<std::size_t>(k)]);
    }
    EXPECT_EQ(lasso.per_coordinate(1000), pcs::Vector::Constant(1000, lasso.beta));
}

TEST(Weights, NoiselessDropsFirstTerm) {
    const auto inst = draw(200, 400, 0.5, 0.02, 3, pcs::NoiseParams{0.0, 0.95});
    const auto params = pcs::WeightParams::standard(200, 400, 0.5, pcs::NoiseParams{0.0, 0.95});
    const auto lasso = pcs::beta_lasso(inst.a, inst.y, params);
    const auto wlasso = pcs::beta_wlasso(inst.a, inst.y, params);
    EXPECT_DOUBLE_EQ(wlasso.beta_k.minCoeff(), wlasso.beta_k.maxCoeff());
    EXPECT_DOUBLE_EQ(lasso.beta, wlasso.beta_k[0]);
}

TEST(Weights, ZeroMeasurementsGiveZeroWeights) {
    const auto inst = draw(200, 400, 0.5, 0.02, 4);
    const auto params = pcs::WeightParams::standard(200, 400, 0.5, pcs::NoiseParams{});
    const pcs::Vector zero = pcs::Vector::Zero(200);
    EXPECT_EQ(pcs::beta_wlasso(inst.a, zero, params).beta_k.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(pcs::beta_lasso(inst.a, zero, params).beta, 0.0);
}

TEST(Weights, ConstantColumnFallsBackToSharedTerm) {
    auto inst = draw(100, 300, 0.5, 0.02, 5);
    pcs::Matrix m = inst.a.membership();
    m.col(7).setOnes();
    const pcs::PoolingMatrix a(m, 0.5);
    const auto params = pcs::WeightParams::standard(100, 300, 0.5, pcs::NoiseParams{});
    const auto w = pcs::beta_wlasso(a, inst.y, params);
    // A zero R column leaves only the shared Λ̂ term, the smallest possible weight.
    const double shared = w.beta_k[7];
    EXPECT_LT(shared, w.beta_k.maxCoeff());
    EXPECT_NEAR(shared, w.beta_k.minCoeff(), 1e-12 * shared);
}

TEST(Weights, HomogeneousInMeasurements) {
    const auto inst = draw(200, 400, 0.5, 0.04, 6);
    const auto params = pcs::WeightParams::standard(200, 400, 0.5, pcs::NoiseParams{});
    const auto a = pcs::beta_lasso(inst.a, inst.y, params);
    const auto b = pcs::beta_lasso(inst.a, 3.0 * inst.y, params);
    EXPECT_NEAR(b.beta, 3.0 * a.beta, 1e-12 * b.beta);
    const auto c = pcs::beta_wlasso(inst.a, inst.y, params);
    const auto d = pcs::beta_wlasso(inst.a, 3.0 * inst.y, params);
    EXPECT_LE((d.beta_k - 3.0 * c.beta_k).cwiseAbs().maxCoeff(), 1e-12 * d.beta_k.maxCoeff());
}

TEST(Weights, GateAndForce) {
    const auto inst = draw(20, 400, 0.5, 0.02, 7);
    auto params = pcs::WeightParams::standard(20, 400, 0.5, pcs::NoiseParams{});
    EXPECT_THROW(pcs::beta_lasso(inst.a, inst.y, params), pcs::AssumptionError);
    params.force = true;
    // A1 fails and Λ̂'s denominator is negative here, so even force cannot help.
    EXPECT_THROW(pcs::beta_lasso(inst.a, inst.y, params), pcs::AssumptionError);

    // n = 60 is below A1's threshold (≈ 72 at p=400) but nq - C stays positive.
    const auto mid = draw(60, 400, 0.5, 0.02, 8);
    auto below = pcs::WeightParams::standard(60, 400, 0.5, pcs::NoiseParams{});
    EXPECT_THROW(pcs::beta_wlasso(mid.a, mid.y, below), pcs::AssumptionError);
    below.force = true;
    const auto w = pcs::beta_wlasso(mid.a, mid.y, below);
    EXPECT_TRUE(w.report.forced);
    EXPECT_FALSE(w.report.find("A1")->passed);
    EXPECT_GT(w.lambda_hat, 0.0);
}

TEST(Weights, ShapeAndQMismatch) {
    const auto inst = draw(50, 100, 0.5, 0.02, 9);
    auto params = pcs::WeightParams::standard(50, 100, 0.3, pcs::NoiseParams{});
    EXPECT_THROW(pcs::beta_lasso(inst.a, inst.y, params), pcs::ParameterError);
    params.q = 0.5;
    EXPECT_THROW(pcs::beta_lasso(inst.a, pcs::Vector::Ones(49), params), pcs::ParameterError);
}

TEST(GradientAtTruth, MatchesDenseEvaluation) {
    const auto inst = draw(60, 120, 0.5, 0.05, 10, pcs::NoiseParams{0.0, 0.95});
    const auto sys = pcs::make_surrogate(inst.a, inst.y);
    const pcs::Vector g = pcs::gradient_at_truth(sys.a_tilde, sys.y_tilde, inst.truth.x_star);
    const double scale = std::sqrt(60 * 0.25);
    double max_err = 0.0, max_val = 0.0;
    for (pcs::Index k = 0; k < 120; ++k) {
        double v = 0.0;
        for (pcs::Index l = 0; l < 60; ++l) {
            double ax = 0.0;
            for (pcs::Index m = 0; m < 120; ++m) {
                ax += (inst.a.membership()(l, m) - 0.5) / scale * inst.truth.x_star[m];
            }
            v += (inst.a.membership()(l, k) - 0.5) / scale * (sys.y_tilde[l] - ax);
        }
        max_err = std::max(max_err, std::abs(v - g[k]));
        max_val = std::max(max_val, std::abs(v));
    }
    EXPECT_LE(max_err, 1e-9 * max_val);
    EXPECT_GT(max_val, 0.0);  // recentering by q, not the sample mean
}

TEST(GradientAtTruth, LeastSquaresAndZero) {
    pcs::RngStream s(11);
    pcs::Matrix at(30, 10);
    pcs::Vector yt(30);
    for (pcs::Index i = 0; i < 30; ++i) {
        yt[i] = s.standard_normal();
        for (pcs::Index j = 0; j < 10; ++j) {
            at(i, j) = s.standard_normal();
        }
    }
    const pcs::Vector ls = at.colPivHouseholderQr().solve(yt);
    EXPECT_LE(pcs::gradient_at_truth(at, yt, ls).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_EQ(pcs::gradient_at_truth(at, pcs::Vector::Zero(30), pcs::Vector::Zero(10))
                  .cwiseAbs()
                  .maxCoeff(),
              0.0);
}
