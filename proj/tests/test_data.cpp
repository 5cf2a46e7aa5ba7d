#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "tabgbm/data.hpp"
#include "tabgbm/errors.hpp"
#include "tabgbm/prng.hpp"

using namespace tabgbm;

namespace {

Schema small_schema() {
    Schema s;
    s.features = {
        FeatureSpec{"Gas price", FeatureKind::continuous, 0.0, 10.0, {}},
        FeatureSpec{"Urban area", FeatureKind::binary, 0.0, 1.0, {}},
        FeatureSpec{"Household income", FeatureKind::discrete, 5.0, 100.0, {5, 15, 25}},
    };
    s.response_name = "Online purchases";
    return s;
}

}  // namespace

TEST_CASE("midpoint_encode") {
    CHECK(midpoint_encode(25000, 35000) == 30000.0);
    CHECK(midpoint_encode(50, 50) == 50.0);
    CHECK(midpoint_encode(0, 1) == 0.5);
    CHECK_THROWS_AS(midpoint_encode(5, 3), InvalidRange);
}

TEST_CASE("load_csv reorders columns to schema order") {
    // File column order differs from schema order.
    std::istringstream in(
        "Online purchases,Household income,Gas price,Urban area\n"
        "2,5,1.5,0\n"
        "4,15,2.5,1\n"
        "0,25,3.5,0\n");
    const Dataset data = read_csv(in, small_schema());
    REQUIRE(data.n() == 3);
    CHECK(data.at(0, 0) == 1.5);
    CHECK(data.at(0, 1) == 0.0);
    CHECK(data.at(0, 2) == 5.0);
    CHECK(data.y == std::vector<double>{2, 4, 0});
}

TEST_CASE("load_csv rejections") {
    SUBCASE("missing value names row and column") {
        std::istringstream in(
            "Gas price,Urban area,Household income,Online purchases\n"
            "1.5,0,5,2\n"
            ",1,15,4\n");
        try {
            read_csv(in, small_schema());
            FAIL("expected MissingValue");
        } catch (const MissingValue& e) {
            CHECK(e.row == 2);
            CHECK(e.column == "Gas price");
        }
    }
    SUBCASE("binary value outside {0,1}") {
        std::istringstream in(
            "Gas price,Urban area,Household income,Online purchases\n"
            "1.5,2,5,2\n");
        CHECK_THROWS_AS(read_csv(in, small_schema()), TypeViolation);
    }
    SUBCASE("non-numeric token") {
        std::istringstream in(
            "Gas price,Urban area,Household income,Online purchases\n"
            "abc,0,5,2\n");
        CHECK_THROWS_AS(read_csv(in, small_schema()), TypeViolation);
    }
    SUBCASE("discrete value outside the allowed list") {
        std::istringstream in(
            "Gas price,Urban area,Household income,Online purchases\n"
            "1.5,0,40,2\n");
        CHECK_THROWS_AS(read_csv(in, small_schema()), DomainViolation);
    }
    SUBCASE("missing column") {
        std::istringstream in("Gas price,Urban area,Online purchases\n1.5,0,2\n");
        CHECK_THROWS_AS(read_csv(in, small_schema()), MissingColumn);
    }
}

TEST_CASE("csv round-trip is bit exact") {
    Rng rng(99);
    Dataset data;
    data.schema = small_schema();
    for (int i = 0; i < 50; ++i) {
        data.x.push_back(rng.uniform(0, 10));
        data.x.push_back(rng.bernoulli(0.5) ? 1.0 : 0.0);
        data.x.push_back(std::vector<double>{5, 15, 25}[rng.bounded(3)]);
        data.y.push_back(rng.uniform01() * 7);
    }
    std::ostringstream out;
    write_csv(out, data);
    std::istringstream in(out.str());
    const Dataset back = read_csv(in, data.schema);
    CHECK(back.x == data.x);
    CHECK(back.y == data.y);

    // A second pass through text changes nothing.
    std::ostringstream out2;
    write_csv(out2, back);
    CHECK(out2.str() == out.str());
}

TEST_CASE("split sizes and determinism") {
    const auto data = oracles::make_dataset(
        {{0}, {1}, {2}, {3}, {4}, {5}, {6}, {7}, {8}, {9}},
        {0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
    const SplitIndices s = split(data, 0.6, 0.2, 0.2, 7);
    CHECK(s.train.size() == 6);
    CHECK(s.validation.size() == 2);
    CHECK(s.test.size() == 2);

    const SplitIndices again = split(data, 0.6, 0.2, 0.2, 7);
    CHECK(again.train == s.train);
    CHECK(again.validation == s.validation);
    CHECK(again.test == s.test);

    CHECK_THROWS_AS(split(data, 0.5, 0.5, 0.5, 7), BadFractions);
    CHECK_THROWS_AS(split(data, 0.8, -0.2, 0.4, 7), BadFractions);
}

TEST_CASE("split partitions the index set for random sizes and seeds") {
    Rng rng(4);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t n = 3 + rng.bounded(120);
        std::vector<std::vector<double>> rows(n, {0.0});
        std::vector<double> y(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) rows[i][0] = static_cast<double>(i);
        const auto data = oracles::make_dataset(rows, y);
        const SplitIndices s = split(data, 0.6, 0.2, 0.2, rng.next_u64());

        std::set<std::size_t> all;
        for (std::size_t i : s.train) all.insert(i);
        for (std::size_t i : s.validation) all.insert(i);
        for (std::size_t i : s.test) all.insert(i);
        CHECK(all.size() == n);
        CHECK(s.train.size() + s.validation.size() + s.test.size() == n);
        CHECK(*all.rbegin() == n - 1);
    }
}

TEST_CASE("kfold balance, partition, and errors") {
    SUBCASE("n=10 k=3 gives sizes {4,3,3}") {
        const auto folds = kfold(10, 3, 1);
        std::multiset<std::size_t> sizes;
        for (const auto& f : folds) sizes.insert(f.size());
        CHECK(sizes == std::multiset<std::size_t>{3, 3, 4});
    }
    SUBCASE("n=10 k=10 gives singletons") {
        const auto folds = kfold(10, 10, 1);
        for (const auto& f : folds) CHECK(f.size() == 1);
    }
    SUBCASE("k > n rejected") { CHECK_THROWS_AS(kfold(5, 6, 1), BadK); }
    SUBCASE("partition and balance for all 2 <= k <= n <= 50") {
        for (std::size_t n = 2; n <= 50; ++n)
            for (std::size_t k = 2; k <= n; ++k) {
                const auto folds = kfold(n, k, n * 31 + k);
                std::set<std::size_t> all;
                std::size_t lo = n, hi = 0;
                for (const auto& f : folds) {
                    lo = std::min(lo, f.size());
                    hi = std::max(hi, f.size());
                    for (std::size_t i : f) all.insert(i);
                }
                REQUIRE(all.size() == n);
                REQUIRE(hi - lo <= 1);
            }
    }
}

TEST_CASE("summarize") {
    const auto data = oracles::make_dataset({{1}, {2}, {3}}, {5, 5, 5});
    const auto table = summarize(data);
    REQUIRE(table.size() == 2);
    CHECK(table[0].min == 1.0);
    CHECK(table[0].max == 3.0);
    CHECK(table[0].mean == 2.0);
    CHECK(table[0].std_dev == doctest::Approx(0.8165).epsilon(1e-4));
    CHECK(table[0].std_dev == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-12));
    // constant response column
    CHECK(table[1].std_dev == 0.0);
    CHECK(table[1].mean == 5.0);

    const auto single = summarize(oracles::make_dataset({{4}}, {9}));
    CHECK(single[0].std_dev == 0.0);
}

TEST_CASE("synth constant generator and determinism") {
    SynthConfig cfg;
    cfg.schema = small_schema();
    cfg.n = 40;
    cfg.seed = 5;
    cfg.c0 = 3.0;
    cfg.noise_sd = 0.0;
    cfg.terms.assign(3, SynthTerm{});
    cfg.binary_means.assign(3, 0.5);

    const Dataset a = synth(cfg);
    for (double v : a.y) CHECK(v == 3.0);

    const Dataset b = synth(cfg);
    CHECK(a.x == b.x);
    CHECK(a.y == b.y);
}

TEST_CASE("synth response is monotone in a single weighted feature") {
    SynthConfig cfg;
    cfg.schema.response_name = "y";
    cfg.schema.features = {
        FeatureSpec{"Household size", FeatureKind::continuous, 1.0, 14.0, {}},
        FeatureSpec{"Gas price", FeatureKind::continuous, 1.0, 5.0, {}},
    };
    cfg.n = 300;
    cfg.seed = 12;
    cfg.c0 = 5.0;
    cfg.noise_sd = 0.0;
    cfg.terms = {SynthTerm{0.35, SynthTransform::identity}, SynthTerm{}};
    cfg.binary_means.assign(2, 0.5);

    const Dataset data = synth(cfg);
    std::vector<std::size_t> order(data.n());
    for (std::size_t i = 0; i < data.n(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return data.at(a, 0) < data.at(b, 0); });
    for (std::size_t i = 1; i < order.size(); ++i)
        REQUIRE(data.y[order[i]] >= data.y[order[i - 1]]);
}

TEST_CASE("synth respects every feature kind constraint across seeds") {
    const SynthConfig base = SynthConfig::load(std::string(TABGBM_SOURCE_DIR) +
                                               "/data/synth_default.json");
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        SynthConfig cfg = base;
        cfg.n = 25;
        cfg.seed = seed;
        const Dataset data = synth(cfg);
        for (std::size_t i = 0; i < data.n(); ++i)
            for (std::size_t j = 0; j < data.d(); ++j) {
                const auto& f = data.schema.features[j];
                REQUIRE(f.admits(data.at(i, j)));
                REQUIRE(data.at(i, j) >= f.declared_min);
                REQUIRE(data.at(i, j) <= f.declared_max);
            }
        for (double v : data.y) REQUIRE(v >= 0.0);
    }
}

TEST_CASE("schema validation and fingerprint") {
    Schema s = small_schema();
    CHECK_NOTHROW(s.validate());

    Schema dup = s;
    dup.features.push_back(dup.features[0]);
    CHECK_THROWS_AS(dup.validate(), SchemaMismatch);

    Schema clash = s;
    clash.response_name = "Gas price";
    CHECK_THROWS_AS(clash.validate(), SchemaMismatch);

    Schema rekind = s;
    rekind.features[0].kind = FeatureKind::binary;
    CHECK(rekind.fingerprint() != s.fingerprint());

    // round trip through JSON preserves the fingerprint
    const Schema back = Schema::from_json(s.to_json());
    CHECK(back.fingerprint() == s.fingerprint());
}

TEST_CASE("shipped schema and generator config agree") {
    const Schema schema =
        Schema::load(std::string(TABGBM_SOURCE_DIR) + "/data/schema_default.json");
    const SynthConfig cfg =
        SynthConfig::load(std::string(TABGBM_SOURCE_DIR) + "/data/synth_default.json");
    CHECK(schema.fingerprint() == cfg.schema.fingerprint());
    CHECK(schema.arity() == 16);
    CHECK(schema.response_name == cfg.schema.response_name);

    CHECK_THROWS_AS(Schema::load("/no/such/schema.json"), ParseError);
    CHECK_THROWS_AS(SynthConfig::load("/no/such/config.json"), ParseError);
}

TEST_CASE("synth config rejects unknown feature names") {
    const nlohmann::json j{{"n", 5},
                           {"seed", 0},
                           {"c0", 0.0},
                           {"noise_sd", 0.0},
                           {"schema", small_schema().to_json()},
                           {"coefficients", {{"No such feature", 1.0}}}};
    CHECK_THROWS_AS(SynthConfig::from_json(j), ParseError);
}
