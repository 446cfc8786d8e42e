#include <gtest/gtest.h>

#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <limits>

#include "covertime/special.hpp"

namespace covertime {
namespace {

TEST(ErfcCody, MatchesBoostAcrossRegions) {
    double worst = 0.0;
    for (double x = -6.0; x <= 26.5; x += 0.0137) {
        const double ref = boost::math::erfc(x);
        if (ref < std::numeric_limits<double>::min()) {
            continue;
        }
        worst = std::max(worst, std::fabs(erfc_cody(x) - ref) / ref);
    }
    EXPECT_LT(worst, 1e-14);
}

TEST(ErfcCody, RegionBoundaries) {
    for (double x : {0.0, 0.46875, 0.46875 + 1e-12, 4.0, 4.0 + 1e-12, -0.46875, -4.0}) {
        const double ref = boost::math::erfc(x);
        EXPECT_NEAR(erfc_cody(x) / ref, 1.0, 1e-14) << "x=" << x;
    }
}

TEST(ErfcCody, LimitsAndSpecialValues) {
    EXPECT_EQ(erfc_cody(0.0), 1.0);
    EXPECT_EQ(erfc_cody(30.0), 0.0);
    EXPECT_EQ(erfc_cody(-30.0), 2.0);
    EXPECT_EQ(erfc_cody(std::numeric_limits<double>::infinity()), 0.0);
    EXPECT_EQ(erfc_cody(-std::numeric_limits<double>::infinity()), 2.0);
    EXPECT_TRUE(std::isnan(erfc_cody(std::numeric_limits<double>::quiet_NaN())));
}

TEST(CompensatedSum, RecoversLostLowOrderBits) {
    CompensatedSum s;
    s.add(1.0);
    for (int i = 0; i < 1000; ++i) {
        s.add(1e-16);
    }
    s.add(-1.0);
    EXPECT_NEAR(s.value(), 1e-13, 1e-25);
    EXPECT_NEAR(s.magnitude(), 2.0, 1e-12);
}

TEST(CompensatedSum, CancellingPair) {
    CompensatedSum s;
    s.add(1e100);
    s.add(1.0);
    s.add(-1e100);
    EXPECT_EQ(s.value(), 1.0);
}

}  // namespace
}  // namespace covertime
