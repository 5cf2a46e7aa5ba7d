#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "tabgbm/errors.hpp"
#include "tabgbm/metrics.hpp"
#include "tabgbm/prng.hpp"

using namespace tabgbm;

TEST_CASE("r_squared") {
    CHECK(r_squared(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}) == 1.0);
    CHECK(r_squared(std::vector<double>{1, 2, 3}, std::vector<double>{2, 2, 2}) == 0.0);
    CHECK(r_squared(std::vector<double>{0, 2, 4}, std::vector<double>{1, 2, 3}) == 0.75);
    CHECK_THROWS_AS(r_squared(std::vector<double>{5, 5}, std::vector<double>{1, 2}),
                    DegenerateResponse);
    CHECK_THROWS_AS(r_squared(std::vector<double>{1, 2}, std::vector<double>{1}),
                    LengthMismatch);
}

TEST_CASE("predicting the mean scores exactly zero") {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + rng.bounded(40);
        std::vector<double> y(n);
        for (auto& v : y) v = rng.uniform(-7, 7);
        double mean = 0;
        for (double v : y) mean += v;
        mean /= static_cast<double>(n);
        const std::vector<double> yhat(n, mean);
        REQUIRE(r_squared(y, yhat) == 0.0);
    }
}

TEST_CASE("rmse") {
    const std::vector<double> y{1, 2, 3};
    CHECK(rmse(y, y) == 0.0);
    CHECK(rmse(y, std::vector<double>{2, 3, 4}) == 1.0);
    CHECK(rmse(std::vector<double>{0, 0}, std::vector<double>{3, 4}) ==
          doctest::Approx(3.5355).epsilon(1e-4));
    CHECK(rmse(std::vector<double>{0, 0}, std::vector<double>{3, 4}) ==
          doctest::Approx(std::sqrt(12.5)).epsilon(1e-12));

    // translation consistency
    Rng rng(5);
    std::vector<double> a(30), b(30), ac(30), bc(30);
    for (std::size_t i = 0; i < 30; ++i) {
        a[i] = rng.uniform(-4, 4);
        b[i] = rng.uniform(-4, 4);
        ac[i] = a[i] + 17.5;
        bc[i] = b[i] + 17.5;
    }
    CHECK(rmse(ac, bc) == doctest::Approx(rmse(a, b)).epsilon(1e-12));
}

TEST_CASE("linear baseline on exactly linear data") {
    Rng rng(7);
    std::vector<std::vector<double>> rows;
    std::vector<double> y;
    for (int i = 0; i < 40; ++i) {
        rows.push_back({rng.uniform(-5, 5)});
        y.push_back(2.0 * rows.back()[0] + 3.0);
    }
    const auto data = oracles::make_dataset(rows, y);
    const LinearModel model = fit_baseline(data, BaselineBasis::linear);
    CHECK(model.intercept == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(model.coefficients[0] == doctest::Approx(2.0).epsilon(1e-10));
    const auto preds = predict_baseline(model, make_view(data.x, data.n(), data.d()));
    CHECK(r_squared(data.y, preds) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("linear fit of a symmetric square is flat") {
    std::vector<std::vector<double>> rows;
    std::vector<double> y;
    for (int i = -10; i <= 10; ++i) {
        rows.push_back({static_cast<double>(i)});
        y.push_back(static_cast<double>(i) * static_cast<double>(i));
    }
    const auto data = oracles::make_dataset(rows, y);
    const LinearModel linear = fit_baseline(data, BaselineBasis::linear);
    CHECK(linear.coefficients[0] == doctest::Approx(0.0).epsilon(1e-10));

    const LinearModel quad = fit_baseline(data, BaselineBasis::quadratic);
    const auto preds = predict_baseline(quad, make_view(data.x, data.n(), data.d()));
    CHECK(r_squared(data.y, preds) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("quadratic basis layout and coefficient recovery") {
    Rng rng(11);
    std::vector<std::vector<double>> rows;
    std::vector<double> y;
    for (int i = 0; i < 60; ++i) {
        rows.push_back({rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)});
        const auto& r = rows.back();
        y.push_back(1.5 - 2.0 * r[1] + 0.5 * r[0] * r[0] + 3.0 * r[1] * r[2]);
    }
    const auto data = oracles::make_dataset(rows, y);
    const LinearModel model = fit_baseline(data, BaselineBasis::quadratic);

    // originals, squares, then cross products (j < j') lexicographic
    REQUIRE(model.term_names == std::vector<std::string>{"f1", "f2", "f3", "f1^2", "f2^2",
                                                         "f3^2", "f1*f2", "f1*f3", "f2*f3"});
    REQUIRE(model.coefficients.size() == 3 + 3 + 3);
    CHECK(model.intercept == doctest::Approx(1.5).epsilon(1e-8));
    CHECK(model.coefficients[1] == doctest::Approx(-2.0).epsilon(1e-8));
    CHECK(model.coefficients[3] == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(model.coefficients[8] == doctest::Approx(3.0).epsilon(1e-8));
    CHECK(model.coefficients[0] == doctest::Approx(0.0).epsilon(1e-8));
}

TEST_CASE("quadratic training fit is at least as good as linear") {
    Rng rng(13);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<std::vector<double>> rows;
        std::vector<double> y;
        for (int i = 0; i < 50; ++i) {
            rows.push_back({rng.uniform(-2, 2), rng.uniform(-2, 2)});
            y.push_back(rng.uniform(-3, 3));
        }
        const auto data = oracles::make_dataset(rows, y);
        const auto view = make_view(data.x, data.n(), data.d());
        const double r2_linear =
            r_squared(data.y, predict_baseline(fit_baseline(data, BaselineBasis::linear), view));
        const double r2_quad = r_squared(
            data.y, predict_baseline(fit_baseline(data, BaselineBasis::quadratic), view));
        REQUIRE(r2_quad >= r2_linear - 1e-10);
    }
}

TEST_CASE("held-out prediction of an exact cross term") {
    Rng rng(17);
    std::vector<std::vector<double>> rows;
    std::vector<double> y;
    for (int i = 0; i < 80; ++i) {
        rows.push_back({rng.uniform(-2, 2), rng.uniform(-2, 2)});
        y.push_back(rows.back()[0] * rows.back()[1]);
    }
    const auto train = oracles::make_dataset(
        {rows.begin(), rows.begin() + 60}, {y.begin(), y.begin() + 60});
    const LinearModel model = fit_baseline(train, BaselineBasis::quadratic);
    for (int i = 60; i < 80; ++i) {
        const auto pred = predict_baseline(model, make_view(rows[i], 1, 2));
        REQUIRE(pred[0] == doctest::Approx(y[i]).epsilon(1e-8));
    }
}

TEST_CASE("rank deficiency names the dependent term") {
    // second feature is an exact copy of the first
    std::vector<std::vector<double>> rows;
    std::vector<double> y;
    Rng rng(19);
    for (int i = 0; i < 30; ++i) {
        const double v = rng.uniform(-1, 1);
        rows.push_back({v, v});
        y.push_back(3 * v);
    }
    const auto data = oracles::make_dataset(rows, y);
    try {
        fit_baseline(data, BaselineBasis::linear);
        FAIL("expected RankDeficient");
    } catch (const RankDeficient& e) {
        CHECK((e.term == "f1" || e.term == "f2"));
    }
}

TEST_CASE("baseline predict errors and trivia") {
    LinearModel flat;
    flat.basis = BaselineBasis::linear;
    flat.intercept = 5.0;
    flat.coefficients = {0.0};
    flat.term_names = {"f1"};
    flat.n_features = 1;
    const std::vector<double> xs{1.0, -4.0, 9.0};
    for (double p : predict_baseline(flat, make_view(xs, 3, 1))) CHECK(p == 5.0);

    LinearModel line = flat;
    line.coefficients = {2.0};
    line.intercept = 3.0;
    const std::vector<double> one{4.0};
    CHECK(predict_baseline(line, make_view(one, 1, 1))[0] == 11.0);

    const std::vector<double> wide{1.0, 2.0};
    CHECK_THROWS_AS(predict_baseline(line, make_view(wide, 1, 2)), ArityMismatch);

    const LinearModel back = LinearModel::from_json(line.to_json());
    CHECK(back.to_json() == line.to_json());
}
