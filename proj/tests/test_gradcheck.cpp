#include <gtest/gtest.h>

#include "detkit/gradcheck.hpp"

TEST(GradCheck, AllAnalyticGradientsMatchFiniteDifferences) {
    const auto results = detkit::run_gradchecks(25, 1234);
    ASSERT_EQ(results.size(), 10u);
    for (const auto& r : results)
        EXPECT_TRUE(r.pass) << r.name << " max_rel_err=" << r.max_rel_err;
}

TEST(GradCheck, SmallOpBackwardsMatchOracle) {
    using namespace detkit;
    Rng rng(5);
    Tensor<double> x({1, 2, 4, 5});
    for (double& v : x.data) v = rng.uniform(-1, 1);

    // directional pooling
    for (Axis axis : {Axis::Horizontal, Axis::Vertical}) {
        const Tensor<double> probe = directional_pool(x, axis);
        Tensor<double> u(probe.shape);
        for (double& v : u.data) v = rng.uniform(-1, 1);
        const std::function<double(const Tensor<double>&)> f = [&](const Tensor<double>& t) {
            const Tensor<double> y = directional_pool(t, axis);
            double s = 0;
            for (std::size_t i = 0; i < y.data.size(); ++i) s += u.data[i] * y.data[i];
            return s;
        };
        const Tensor<double> fd = finite_diff_grad<double>(f, x, 1e-3);
        const Tensor<double> an = directional_pool_backward(u, axis, x.shape);
        for (std::size_t i = 0; i < fd.data.size(); ++i) EXPECT_NEAR(an.data[i], fd.data[i], 1e-8);
    }

    // nearest resize
    const Tensor<double> probe = resize_nearest(x, 7, 3);
    Tensor<double> u(probe.shape);
    for (double& v : u.data) v = rng.uniform(-1, 1);
    const std::function<double(const Tensor<double>&)> f = [&](const Tensor<double>& t) {
        const Tensor<double> y = resize_nearest(t, 7, 3);
        double s = 0;
        for (std::size_t i = 0; i < y.data.size(); ++i) s += u.data[i] * y.data[i];
        return s;
    };
    const Tensor<double> fd = finite_diff_grad<double>(f, x, 1e-3);
    const Tensor<double> an = resize_nearest_backward(u, x.shape);
    for (std::size_t i = 0; i < fd.data.size(); ++i) EXPECT_NEAR(an.data[i], fd.data[i], 1e-8);
}
