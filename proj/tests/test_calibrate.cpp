#include "admitlab/calibrate.hpp"
#include "admitlab/errors.hpp"
#include "admitlab/estimation.hpp"
#include "admitlab/json_io.hpp"
#include "admitlab/metrics.hpp"
#include "admitlab/rng.hpp"

#include "catch_amalgamated.hpp"
#include "fixtures.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

using namespace admitlab;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

ColumnMapping small_mapping() {
    ColumnMapping m;
    m.skill_column = "gpa";
    m.group_column = "grp";
    m.group_b_values = {"B"};
    m.feature_columns = {"rank", "test"};
    m.test_column = "test";
    return m;
}

Dataset from_text(const std::string& text, const ColumnMapping& m) {
    std::istringstream in(text);
    return load_csv(in, m);
}

Dataset model_dataset(const Scenario& s, std::size_t n, std::uint64_t seed) {
    std::stringstream buf;
    write_model_csv(buf, s, n, seed);
    return load_csv(buf, model_mapping(s));
}

std::string data_file(const std::string& name) { return std::string(ADMITLAB_DATA_DIR) + "/" + name; }

}  // namespace

TEST_CASE("parse_csv") {
    std::istringstream in("a,b,c\r\n1,\"x, y\",\"say \"\"hi\"\"\"\n2,\"multi\nline\",\n");
    auto rows = parse_csv(in);
    REQUIRE(rows.size() == 3);
    CHECK(rows[1][1] == "x, y");
    CHECK(rows[1][2] == "say \"hi\"");
    CHECK(rows[2][1] == "multi\nline");
    CHECK(rows[2][2].empty());
}

TEST_CASE("load_csv") {
    auto m = small_mapping();
    SECTION("missing skill drops the row") {
        auto d = from_text("grp,rank,test,gpa\nA,1,2,3\nB,2,3,\nB,3,4,5\n", m);
        CHECK(d.size() == 2);
        CHECK(d.dropped == 1);
        REQUIRE(d.drop_report.size() == 1);
        CHECK_THAT(d.drop_report[0], ContainsSubstring("gpa"));
        CHECK(d.is_b == std::vector<std::uint8_t>{0, 1});
        CHECK(d.skill == std::vector<double>{3, 5});
    }
    SECTION("unparseable cell") {
        auto d = from_text("grp,rank,test,gpa\nA,one,2,3\nA,1,2,3\n", m);
        CHECK(d.size() == 1);
        CHECK_THAT(d.drop_report.at(0), ContainsSubstring("unparseable"));
    }
    SECTION("categorical levels") {
        m.feature_columns = {"rank", "college", "test"};
        m.categorical_columns = {"college"};
        auto d = from_text("grp,rank,college,test,gpa\nA,1,Z,2,3\nB,2,X,3,4\nA,3,Y,4,5\nB,1,X,1,1\n", m);
        // Three levels, X is the reference.
        CHECK(d.design_names == std::vector<std::string>{"rank", "college=Y", "college=Z", "test"});
        CHECK(d.rows[0] == std::vector<double>{1, 0, 1, 2});
        CHECK(d.rows[1] == std::vector<double>{2, 0, 0, 3});
        CHECK(d.design_is_test == std::vector<bool>{false, false, false, true});
    }
    SECTION("header problems") {
        CHECK_THROWS_AS(from_text("grp,rank,test,gpa,rank\nA,1,2,3,4\n", m), InputError);
        CHECK_THROWS_AS(from_text("grp,rank,gpa\nA,1,3\n", m), InputError);
    }
    SECTION("mapping invariants") {
        auto bad = m;
        bad.test_column = "other";
        CHECK_THROWS_AS(bad.check(), InputError);
        bad = m;
        bad.feature_columns.push_back("gpa");
        CHECK_THROWS_AS(bad.check(), InputError);
    }
}

TEST_CASE("fit_ols") {
    SECTION("exact recovery") {
        std::vector<std::vector<double>> X;
        std::vector<double> y;
        for (int i = 0; i < 50; ++i) {
            double x = 0.1 * i - 2.0;
            X.push_back({x});
            y.push_back(1.0 + 2.0 * x);
        }
        auto f = fit_ols(X, y, {0});
        CHECK_THAT(f.coef[0], WithinAbs(1.0, 1e-10));
        CHECK_THAT(f.coef[1], WithinAbs(2.0, 1e-10));
        CHECK(f.residual_variance >= 0.0);
        CHECK(f.residual_variance < 1e-20);
        CHECK_THAT(f.predict({3.0}), WithinAbs(7.0, 1e-10));
    }
    SECTION("independent regressor") {
        CounterRng rng(17);
        std::vector<std::vector<double>> X;
        std::vector<double> y;
        double sx = 0, sxx = 0;
        const int n = 10000;
        for (int i = 0; i < n; ++i) {
            double x = rng.normal();
            X.push_back({x});
            y.push_back(0.5 + rng.normal());
            sx += x;
            sxx += x * x;
        }
        auto f = fit_ols(X, y, {0});
        double se = std::sqrt(f.residual_variance / (sxx - sx * sx / n));
        CHECK(std::abs(f.coef[1]) <= 4.0 * se);
    }
    SECTION("too few rows") {
        std::vector<std::vector<double>> X{{1, 2}, {2, 1}};
        CHECK_THROWS_AS(fit_ols(X, {1.0, 2.0}, {0, 1}), InputError);
    }
    SECTION("collinear columns fall back to ridge") {
        std::vector<std::vector<double>> X;
        std::vector<double> y;
        for (int i = 0; i < 40; ++i) {
            X.push_back({double(i), 2.0 * i});
            y.push_back(3.0 + i);
        }
        auto f = fit_ols(X, y, {0, 1});
        CHECK(f.ridge_used);
        CHECK_THAT(f.predict({10.0, 20.0}), WithinAbs(13.0, 1e-6));
    }
}

TEST_CASE("residual variance on model data") {
    auto s = fixture::two_feature(1.0);
    auto d = model_dataset(s, 100000, 5);
    for (Group g : {Group::A, Group::B}) {
        for (bool wt : {true, false}) {
            auto f = fit_ols(d, g, wt);
            // Skill given features is Gaussian with the posterior variance.
            double truth = skill_given_estimate(s, g, wt ? FeatureSet::full() : FeatureSet::subset(), 0.0).variance;
            CHECK(std::abs(f.residual_variance - truth) <= 0.05 * truth);
        }
    }
}

TEST_CASE("pipeline reproduces closed-form metrics on model data") {
    auto s = fixture::two_feature();
    auto d = model_dataset(s, 400000, 9);
    auto r = run_experiment(d, s.capacity, s.b.access, 3);
    auto full = evaluate(s, Policy::full());
    auto sub = evaluate(s, Policy::subset());
    auto tol = [](double k, double spread) { return 4.0 * spread / std::sqrt(k); };
    double k = static_cast<double>(r.with_test.admitted);
    CHECK(r.with_test.admitted == static_cast<std::uint64_t>(400000 * 0.2));
    CHECK(std::abs(r.with_test.diversity - full.diversity) <= tol(k, 0.5));
    CHECK(std::abs(r.without_test.diversity - sub.diversity) <= tol(k, 0.5));
    CHECK(std::abs(r.with_test.merit - full.merit_overall) <= tol(k, 1.0));
    CHECK(std::abs(r.without_test.merit - sub.merit_overall) <= tol(k, 1.0));
}

TEST_CASE("redundant test") {
    // An almost noiseless first feature makes the test irrelevant.
    auto s = fixture::two_feature(1.0);
    s.a.features[0].variance = s.b.features[0].variance = 1e-6;
    auto d = model_dataset(s, 100000, 2);
    auto r = run_experiment(d, 0.2, 1.0, 1);
    CHECK(std::abs(r.with_test.merit - r.without_test.merit) < 1e-3);
    CHECK(std::abs(r.with_test.diversity - r.without_test.diversity) < 2e-3);
}

TEST_CASE("synthetic applicants") {
    auto low = mapping_from_json(parse_json_file(data_file("mapping_low.json")));
    auto high = mapping_from_json(parse_json_file(data_file("mapping_high.json")));
    auto d_low = load_csv(data_file("synthetic_applicants.csv"), low);
    auto d_high = load_csv(data_file("synthetic_applicants.csv"), high);
    REQUIRE(d_low.size() == 20000);

    SECTION("fixture regenerates byte for byte") {
        std::ostringstream fresh;
        write_synthetic_csv(fresh, 20000, 1);
        std::ifstream f(data_file("synthetic_applicants.csv"), std::ios::binary);
        std::stringstream stored;
        stored << f.rdbuf();
        CHECK(fresh.str() == stored.str());
    }
    SECTION("sign pattern at two-thirds access") {
        auto rl = run_experiment(d_low, 0.2, 2.0 / 3.0, 1);
        CHECK(rl.without_test.merit < rl.with_test.merit);
        CHECK(rl.without_test.diversity < rl.with_test.diversity);
        auto rh = run_experiment(d_high, 0.2, 2.0 / 3.0, 1);
        CHECK(rh.without_test.merit > rh.with_test.merit);
        CHECK(rh.without_test.diversity > rh.with_test.diversity);
    }
    SECTION("low-informativeness ordering holds across access rates") {
        for (double gb = 0.1; gb <= 1.0 + 1e-9; gb += 0.1) {
            auto r = run_experiment(d_low, 0.2, gb, 1);
            CHECK(r.without_test.merit < r.with_test.merit);
            CHECK(r.without_test.diversity < r.with_test.diversity);
        }
    }
    SECTION("determinism") {
        auto x = run_experiment(d_high, 0.2, 0.5, 11);
        auto y = run_experiment(d_high, 0.2, 0.5, 11);
        CHECK(x.with_test.merit == y.with_test.merit);
        CHECK(x.with_test.admitted_b == y.with_test.admitted_b);
        CHECK(x.without_test.diversity == y.without_test.diversity);
    }
    SECTION("table output") {
        std::ostringstream out;
        auto r = run_experiment(d_low, 0.2, 2.0 / 3.0, 1);
        r.label = low.label;
        write_table_csv(out, {r});
        std::string text = out.str();
        CHECK(text.rfind("case,capacity,gamma_b,merit_with_test,merit_without_test,diversity_with_test,"
                         "diversity_without_test,admitted\n",
                         0) == 0);
        CHECK_THAT(text, ContainsSubstring("Low informativeness"));
    }
}

TEST_CASE("empty admit set") {
    auto d = from_text("grp,rank,test,gpa\nA,1,2,3\nA,2,1,2\nA,3,5,1\nB,1,2,3\nB,2,2,2\nB,3,1,1\nA,4,4,4\nB,4,3,3\n",
                       small_mapping());
    CHECK_THROWS_AS(run_experiment(d, 0.05, 1.0, 1), InputError);
}
