#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mirrorscan/collection.hpp"
#include "mirrorscan/dipole_emission.hpp"
#include "mirrorscan/errors.hpp"
#include "oracles.hpp"

using namespace mirrorscan;

namespace {

constexpr double kLambda = 700.0;
const double kPi = std::numbers::pi;

EmitterEnvironment homogeneous() {
    const auto d = materials::diamond();
    return {d, 8.0, LayerStack(d, {Layer{d, 100.0}}, d), d, OrientationWeights::nv_default()};
}

EmitterEnvironment silver_gap(double gap_nm) { return mirror_environment(materials::silver(), gap_nm); }

// Ideal mirror at the host surface with k1 * z0 = x.
EmitterEnvironment ideal_at(double k1z0) {
    const auto d = materials::diamond();
    const double z0 = k1z0 * kLambda / (2.0 * kPi * materials::kDiamondIndex);
    return {d, z0, LayerStack(d, {}, materials::ideal_mirror()), d, OrientationWeights::nv_default()};
}

double hemisphere(const std::function<double(double)>& density) {
    return 2.0 * kPi * oracle::trapezoid([&](double t) { return density(t) * std::sin(t); }, 0.0, kPi / 2.0, 20000);
}

}  // namespace

TEST(DecayRates, HomogeneousIsUnity) {
    const auto env = homogeneous();
    EXPECT_NEAR(decay_rate_perpendicular(env, kLambda), 1.0, 1e-9);
    EXPECT_NEAR(decay_rate_parallel(env, kLambda), 1.0, 1e-9);
    const auto r = total_decay(env, kLambda);
    EXPECT_NEAR(r.total, 1.0, 1e-9);
    EXPECT_NEAR(r.radiative_down, 0.5, 1e-6);
    EXPECT_NEAR(r.radiative_up, 0.5, 1e-6);
    EXPECT_NEAR(r.nonradiative, 0.0, 1e-6);
}

TEST(DecayRates, IdealMirrorImageLimits) {
    const auto env = ideal_at(1e-3);
    EXPECT_NEAR(decay_rate_perpendicular(env, kLambda), 2.0, 1e-2);
    EXPECT_LE(decay_rate_parallel(env, kLambda), 1e-2);
    EXPECT_GE(decay_rate_parallel(env, kLambda), -1e-9);
}

TEST(DecayRates, IdealMirrorThroughThinAirGap) {
    // Same limit with the mirror behind a vanishing air gap.
    auto env = mirror_environment(materials::ideal_mirror(), 0.02);
    env.depth_nm = 0.02;
    EXPECT_NEAR(decay_rate_perpendicular(env, kLambda), 2.0, 2e-2);
    EXPECT_LE(decay_rate_parallel(env, kLambda), 2e-2);
}

TEST(DecayRates, DenseTrapezoidOracleAt1um) {
    const auto env = silver_gap(1000.0);
    const auto ref = oracle::decay_rates(env, kLambda);
    const double perp = decay_rate_perpendicular(env, kLambda);
    const double par = decay_rate_parallel(env, kLambda);
    EXPECT_NEAR(perp, ref.perpendicular, 1e-6);
    EXPECT_NEAR(par, ref.parallel, 1e-6);
    // Pins from the first verified run (the oracle above is the real check).
    EXPECT_NEAR(perp, 0.09847, 1e-5);
    EXPECT_NEAR(par, 1.02574, 1e-5);
}

TEST(DecayRates, DenseTrapezoidOracleNearQuenching) {
    const auto env = silver_gap(20.0);
    const auto ref = oracle::decay_rates(env, kLambda);
    EXPECT_NEAR(decay_rate_perpendicular(env, kLambda), ref.perpendicular, 1e-6);
    EXPECT_NEAR(decay_rate_parallel(env, kLambda), ref.parallel, 1e-6);
}

TEST(DecayRates, HalvingToleranceChangesLittle) {
    QuadratureOptions tight;
    tight.relative_tolerance = 0.5e-8;
    for (double d : {20.0, 130.0, 1000.0, 5000.0}) {
        const auto a = total_decay(silver_gap(d), kLambda);
        const auto b = total_decay(silver_gap(d), kLambda, tight);
        for (auto [x, y] : {std::pair{a.total, b.total}, {a.perpendicular, b.perpendicular},
                            {a.parallel, b.parallel}, {a.radiative_down, b.radiative_down}}) {
            EXPECT_LT(std::abs(x - y) / std::abs(y), 1e-6) << d;
        }
    }
}

TEST(DecayRates, FarMirrorMatchesNoMirror) {
    const auto far = silver_gap(20000.0);
    const auto none = without_mirror(far);
    for (auto f : {&decay_rate_perpendicular, &decay_rate_parallel}) {
        const double a = (*f)(far, kLambda, {});
        const double b = (*f)(none, kLambda, {});
        EXPECT_LE(std::abs(a - b) / b, 0.01);
    }
    const double a = total_decay(far, kLambda).total;
    const double b = total_decay(none, kLambda).total;
    EXPECT_LE(std::abs(a - b) / b, 0.01);
}

TEST(DecayRates, PurcellRangeBeyond100nm) {
    for (double d = 110.0; d <= 5000.0; d += 97.0) {
        const double total = total_decay(silver_gap(d), kLambda).total;
        EXPECT_GE(total, 0.63) << d;
        EXPECT_LE(total, 0.80) << d;
    }
}

TEST(DecayRates, QuenchingRisesNearMetal) {
    const auto close = total_decay(silver_gap(20.0), kLambda);
    const auto far = total_decay(silver_gap(1000.0), kLambda);
    EXPECT_GT(close.nonradiative, far.nonradiative);
    EXPECT_GT(close.nonradiative / close.total, far.nonradiative / far.total);
    for (const auto& r : {close, far}) {
        EXPECT_GE(r.nonradiative, -1e-9);
        EXPECT_GE(r.radiative_down, -1e-9);
        EXPECT_GE(r.radiative_up, -1e-9);
    }
}

TEST(DecayRates, LosslessEnergyConservation) {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> dd(10.0, 3000.0), ll(540.0, 900.0), nn(1.0, 2.3);
    for (int i = 0; i < 20; ++i) {
        const OpticalMaterial dielectric("dielectric", ConstantIndex{nn(rng), 0.0});
        const auto env = mirror_environment(dielectric, dd(rng));
        const auto r = total_decay(env, ll(rng));
        EXPECT_LE(std::abs(r.total - (r.radiative_down + r.radiative_up)), 1e-4);
    }
}

TEST(DecayRates, TotalIsWeightedSum) {
    const auto env = silver_gap(300.0);
    const auto r = total_decay(env, kLambda);
    EXPECT_NEAR(r.total, env.weights.parallel * r.parallel + env.weights.perpendicular * r.perpendicular, 1e-15);
    EXPECT_NEAR(r.total, r.radiative_down + r.radiative_up + r.nonradiative, 1e-12);
}

TEST(AngularPattern, HomogeneousDonutAndClosure) {
    const auto env = homogeneous();
    std::vector<double> theta;
    for (double t = 0.0; t < kPi / 2.0; t += 0.01) theta.push_back(t);
    const auto p = angular_pattern(env, kLambda, theta);
    ASSERT_EQ(p.densities.size(), theta.size());
    EXPECT_EQ(p.densities[0].perp_p, 0.0);
    for (std::size_t i = 0; i < theta.size(); ++i) {
        EXPECT_NEAR(p.densities[i].perp_p, 3.0 / (8.0 * kPi) * std::pow(std::sin(theta[i]), 2), 1e-15);
    }
    const ResolvedStack s(env.upward, kLambda);
    const double a = s.k0() * s.incidence_index() * env.depth_nm;
    // Each hemisphere carries half; by symmetry the full sphere integrates to 1.
    EXPECT_NEAR(2.0 * hemisphere([&](double t) { return pattern_density(s, a, t).perp_p; }), 1.0, 1e-6);
    EXPECT_NEAR(2.0 * hemisphere([&](double t) {
                    const auto d = pattern_density(s, a, t);
                    return d.par_p + d.par_s;
                }),
                1.0, 1e-6);
}

TEST(AngularPattern, IdealMirrorCancelsParallel) {
    const auto env = ideal_at(1e-4);
    std::vector<double> theta;
    for (double t = 0.0; t < kPi / 2.0; t += 0.05) theta.push_back(t);
    const auto p = angular_pattern(env, kLambda, theta);
    for (const auto& d : p.densities) {
        EXPECT_LT(d.par_s, 1e-7);
        EXPECT_LT(d.par_p, 1e-7);
        EXPECT_GE(d.perp_p, 0.0);
    }
}

TEST(AngularPattern, DensitiesNonNegative) {
    std::vector<double> theta;
    for (double t = 0.0; t < kPi / 2.0; t += 0.003) theta.push_back(t);
    for (double d : {20.0, 130.0, 350.0, 5000.0}) {
        for (const auto& s : angular_pattern(silver_gap(d), kLambda, theta).densities) {
            EXPECT_GE(s.perp_p, 0.0);
            EXPECT_GE(s.par_p, 0.0);
            EXPECT_GE(s.par_s, 0.0);
        }
    }
}

TEST(AngularPattern, ConeFraction130Exceeds350) {
    const double theta_max = std::asin(0.35 / 2.41);
    auto fraction = [&](const EmitterEnvironment& env) {
        const ResolvedStack s(env.upward, kLambda);
        const double a = s.k0() * s.incidence_index() * env.depth_nm;
        auto weighted = [&](double t) {
            const auto d = pattern_density(s, a, t);
            return (env.weights.perpendicular * d.perp_p + env.weights.parallel * (d.par_p + d.par_s)) * std::sin(t);
        };
        return oracle::trapezoid(weighted, 0.0, theta_max, 4000) / oracle::trapezoid(weighted, 0.0, kPi / 2.0, 40000);
    };
    EXPECT_GT(fraction(silver_gap(130.0)), fraction(silver_gap(350.0)));
}

TEST(AngularPattern, RejectsGrazingAngles) {
    const std::vector<double> bad{0.1, kPi / 2.0};
    EXPECT_THROW(angular_pattern(silver_gap(100.0), kLambda, bad), ValidationError);
    const std::vector<double> negative{-0.1};
    EXPECT_THROW(angular_pattern(silver_gap(100.0), kLambda, negative), ValidationError);
}

TEST(OrientationWeights, SingleAxisAlongNormal) {
    const std::vector<Vec3> axes{{0.0, 0.0, 1.0}};
    const auto w = orientation_weights(axes, {0.0, 0.0, 1.0});
    EXPECT_NEAR(w.parallel, 1.0, 1e-15);
    EXPECT_NEAR(w.perpendicular, 0.0, 1e-15);
}

TEST(OrientationWeights, FourAxesUnder100Surface) {
    const auto w = orientation_weights(nv_axes_111(), {0.0, 0.0, 1.0});
    EXPECT_NEAR(w.parallel, 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(w.perpendicular, 1.0 / 3.0, 1e-12);
    const auto g = OrientationWeights::nv_geometric();
    EXPECT_NEAR(g.parallel, 2.0 / 3.0, 1e-12);
    const auto nv_w = OrientationWeights::nv_default();
    EXPECT_EQ(nv_w.parallel, 0.659);
    EXPECT_EQ(nv_w.perpendicular, 0.341);
    EXPECT_LE(std::abs(nv_w.parallel - g.parallel), 0.01);
    EXPECT_NO_THROW(nv_w.validate());
}

TEST(OrientationWeights, AlwaysSumToOne) {
    std::mt19937 rng(5);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<Vec3> axes;
        for (int i = 0; i <= trial % 5; ++i) {
            Vec3 v{g(rng), g(rng), g(rng)};
            const double n = std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z);
            axes.push_back({v.x / n, v.y / n, v.z / n});
        }
        Vec3 normal{g(rng), g(rng), g(rng)};
        const double n = std::sqrt(normal.x * normal.x + normal.y * normal.y + normal.z * normal.z);
        normal = {normal.x / n, normal.y / n, normal.z / n};
        const auto w = orientation_weights(axes, normal);
        EXPECT_NEAR(w.parallel + w.perpendicular, 1.0, 1e-12);
        EXPECT_GE(w.perpendicular, 0.0);
        EXPECT_LE(w.perpendicular, 0.5 + 1e-12);
    }
}

TEST(OrientationWeights, Errors) {
    EXPECT_THROW(orientation_weights({}, {0.0, 0.0, 1.0}), EmptyAxisList);
    const std::vector<Vec3> axes{{0.0, 0.0, 2.0}};
    EXPECT_THROW(orientation_weights(axes, {0.0, 0.0, 1.0}), ValidationError);
    EXPECT_THROW((OrientationWeights{0.7, 0.4}.validate()), ValidationError);
    EXPECT_THROW((OrientationWeights{1.1, -0.1}.validate()), ValidationError);
}

TEST(EmitterEnvironment, Validation) {
    auto env = silver_gap(100.0);
    env.depth_nm = 0.0;
    EXPECT_THROW(env.validate(), ValidationError);
    auto other = silver_gap(100.0);
    other.upward = LayerStack(materials::air(), {}, materials::silver());
    EXPECT_THROW(other.validate(), ValidationError);
}

TEST(EmitterEnvironment, WithGapAndWithoutMirror) {
    const auto env = silver_gap(100.0);
    const auto wider = with_gap(env, 250.0);
    EXPECT_EQ(wider.upward.layers().front().thickness_nm, 250.0);
    const auto contact = with_gap(env, 0.0);
    EXPECT_TRUE(contact.upward.layers().empty());
    EXPECT_EQ(contact.upward.exit().name(), "silver");
    const auto none = without_mirror(env);
    EXPECT_TRUE(none.upward.layers().empty());
    EXPECT_EQ(none.upward.exit().name(), "air");
}
