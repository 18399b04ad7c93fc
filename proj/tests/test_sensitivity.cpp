#include <doctest.h>

#include <cmath>

#include "folio/errors.hpp"
#include "folio/rng.hpp"
#include "folio/sensitivity.hpp"
#include "oracles.hpp"

using namespace folio;

namespace {

TrainingBatch toy_batch(int b, int k, int n, std::uint64_t seed) {
    Rng rng(seed);
    TrainingBatch batch;
    batch.next_returns.resize(b, n);
    for (int s = 0; s < b; ++s) {
        FeatureWindow w;
        w.timestamp = Date{2020, 1, 6}.add_days(s);
        w.m.resize(k, 2 * n);
        for (Eigen::Index r = 0; r < w.m.rows(); ++r)
            for (Eigen::Index c = 0; c < w.m.cols(); ++c)
                w.m(r, c) = (c % 2 == 0) ? 1.0 + 0.05 * rng.gaussian() : 0.01 * rng.gaussian();
        batch.return_dates.push_back(w.timestamp.add_days(1));
        batch.windows.push_back(std::move(w));
        for (int i = 0; i < n; ++i) batch.next_returns(s, i) = 0.001 + 0.02 * rng.gaussian();
    }
    return batch;
}

} // namespace

TEST_SUITE_BEGIN("sensitivity");

TEST_CASE("normalization divides by the max absolute entry") {
    Eigen::MatrixXd g(1, 3);
    g << 2.0, -4.0, 1.0;
    SensitivityMap map = normalized_sensitivity(g, {Date{2020, 1, 2}}, {"a", "b", "c"});
    CHECK(map.values(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(map.values(0, 1) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(map.values(0, 2) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(map.flagged[0] == 0);
}

TEST_CASE("single nonzero gradient dominates") {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(1, 4);
    g(0, 2) = -0.3;
    SensitivityMap map = normalized_sensitivity(g, {Date{2020, 1, 2}}, {"a", "b", "c", "d"});
    CHECK(map.values(0, 2) == 1.0);
    CHECK(map.values.row(0).sum() == 1.0);
}

TEST_CASE("all-zero rows are flagged, never divided") {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(2, 3);
    g(1, 0) = 1.0;
    SensitivityMap map =
        normalized_sensitivity(g, {Date{2020, 1, 2}, Date{2020, 1, 3}}, {"a", "b", "c"});
    CHECK(map.flagged[0] == 1);
    CHECK(map.flagged[1] == 0);
    CHECK(map.values.row(0).cwiseAbs().maxCoeff() == 0.0);
    CHECK(map.values.allFinite());
}

TEST_CASE("scaling gradients leaves the sensitivities unchanged") {
    Rng rng(5);
    Eigen::MatrixXd g(3, 7);
    for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = rng.gaussian();
    std::vector<Date> dates = {Date{2020, 1, 2}, Date{2020, 1, 3}, Date{2020, 1, 6}};
    std::vector<std::string> labels(7, "x");
    SensitivityMap a = normalized_sensitivity(g, dates, labels);
    SensitivityMap b = normalized_sensitivity(-3.5 * g, dates, labels);
    CHECK((a.values - b.values).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("input gradients match finite differences on a tiny net") {
    TrainingBatch batch = toy_batch(4, 4, 2, 77);
    ModelParams params = init_params(2, 3, 11);
    InputGradients g = input_gradients(params, batch);
    REQUIRE(!g.degenerate);
    REQUIRE(g.per_window.size() == 4);

    auto fd = oracles::finite_diff_input_grad(params, batch, 1e-5);
    for (std::size_t s = 0; s < fd.size(); ++s)
        CHECK(oracles::gradcheck_error(g.per_window[s], fd[s]) < 1e-6);
}

TEST_CASE("feature labels and flattening cover 2nk entries in fixed order") {
    auto labels = feature_labels({"VTI", "AGG", "DBC", "VIX"}, 50);
    REQUIRE(labels.size() == 400);
    CHECK(labels[0] == "VTI_price_lag0");
    CHECK(labels[49] == "VTI_price_lag49");
    CHECK(labels[50] == "VTI_return_lag0");
    CHECK(labels[100] == "AGG_price_lag0");
    CHECK(labels.back() == "VIX_return_lag49");

    Eigen::MatrixXd g(3, 4); // k = 3, n = 2
    g << 1, 2, 3, 4, //
        5, 6, 7, 8,  //
        -9, 10, 11, 12;
    Eigen::VectorXd flat = flatten_abs_gradient(g);
    REQUIRE(flat.size() == 12);
    CHECK(flat(0) == 9.0);  // asset 1, price, lag 0 = most recent row
    CHECK(flat(1) == 5.0);  // lag 1
    CHECK(flat(2) == 1.0);  // lag 2
    CHECK(flat(3) == 10.0); // asset 1, return, lag 0
    CHECK(flat(6) == 11.0); // asset 2, price, lag 0
}

TEST_CASE("per-block sensitivities attribute to the last decision date") {
    std::vector<TrainingBatch> blocks;
    blocks.push_back(toy_batch(6, 4, 2, 1));
    blocks.push_back(toy_batch(6, 4, 2, 2));
    ModelParams params = init_params(2, 4, 9);
    SensitivityMap map = sensitivity_over_blocks(params, blocks, {"A1", "A2"});
    REQUIRE(map.dates.size() == 2);
    CHECK(map.dates[0] == blocks[0].windows.back().timestamp);
    CHECK(map.dates[1] == blocks[1].windows.back().timestamp);
    REQUIRE(map.values.cols() == 16); // 2 assets * 2 kinds * k=4

    for (Eigen::Index r = 0; r < map.values.rows(); ++r) {
        CHECK(map.values.row(r).maxCoeff() == 1.0);
        CHECK(map.values.row(r).minCoeff() >= 0.0);
        CHECK(map.values.row(r).maxCoeff() <= 1.0);
    }
}

TEST_CASE("degenerate blocks yield flagged rows") {
    TrainingBatch batch = toy_batch(5, 3, 2, 3);
    batch.next_returns.setZero(); // constant objective
    ModelParams params = init_params(2, 3, 4);
    InputGradients g = input_gradients(params, batch);
    CHECK(g.degenerate);

    SensitivityMap map = sensitivity_over_blocks(params, {batch}, {"A1", "A2"});
    CHECK(map.flagged[0] == 1);
    CHECK(map.values.allFinite());
}

TEST_SUITE_END();
