#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "recsharpe/errors.hpp"
#include "recsharpe/market.hpp"

using namespace recsharpe;
using recsharpe::testing::small_table;

namespace {

MarketPanel parse(const std::string& text, double max_reject = 0.05) {
    std::istringstream in(text);
    IngestOptions o;
    o.max_reject_fraction = max_reject;
    return ingest_csv(in, o);
}

} // namespace

TEST_SUITE("market") {
TEST_CASE("two symbols and three dates") {
    const auto p = parse(
        "date,symbol,close,volume\n"
        "2020-01-02,BBB,10,100\n"
        "2020-01-02,AAA,20,100\n"
        "2020-01-03,AAA,22,100\n"
        "2020-01-03,BBB,11,100\n"
        "2020-01-06,AAA,11,100\n"
        "2020-01-06,BBB,11,100\n");
    REQUIRE(p.symbols.size() == 2);
    CHECK(p.symbols[0].symbol == "AAA");
    CHECK(p.dates == std::vector<std::string>{"2020-01-02", "2020-01-03", "2020-01-06"});
    CHECK(p.symbols[0].rows() == 3); // 2 returns each
    CHECK(p.symbols[0].simple_return(1) == doctest::Approx(0.1));
    CHECK(p.symbols[0].log_return(2) == doctest::Approx(std::log(0.5)));
    CHECK(p.symbols[1].simple_return(2) == 0.0);
    CHECK(p.symbol_index("BBB") == 1);
    CHECK_FALSE(p.symbol_index("CCC").has_value());
}

TEST_CASE("bad rows are rejected with line numbers") {
    std::string text = "date,symbol,close,volume\n";
    for (int d = 1; d <= 28; ++d) text += "2021-02-" + std::string(d < 10 ? "0" : "") + std::to_string(d) + ",X,10,5\n";
    text += "2021-03-01,X,-1,5\n";   // line 30
    text += "2021-03-02,X,,5\n";     // line 31
    text += "2021-02-30,Y,10,5\n";   // line 32
    text += "2021-03-03,X,abc,5\n";  // line 33
    const auto p = parse(text, 0.2);
    REQUIRE(p.rejected.size() == 4);
    CHECK(p.rejected[0].line == 30);
    CHECK(p.rejected[0].reason == "non-positive close");
    CHECK(p.rejected[1].line == 31);
    CHECK(p.rejected[2].line == 32);
    CHECK(p.rejected[3].line == 33);
    CHECK_THROWS_AS(parse(text, 0.05), InputError);
}

TEST_CASE("ordering and uniqueness are enforced") {
    try {
        parse("date,symbol,close,volume\n2020-01-03,ZZ,1,1\n2020-01-02,ZZ,1,1\n");
        FAIL("out-of-order dates accepted");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("ZZ") != std::string::npos);
    }
    CHECK_THROWS_AS(parse("date,symbol,close,volume\n2020-01-03,ZZ,1,1\n2020-01-03,ZZ,2,1\n"), InputError);
    CHECK_THROWS_AS(parse("day,symbol,close,volume\n"), InputError);
    CHECK_THROWS_AS(parse(""), InputError);
}

TEST_CASE("liquidity filter") {
    std::string text = "date,symbol,close,volume\n";
    const char* dates[] = {"2020-01-01", "2020-01-02", "2020-01-03", "2020-01-04", "2020-01-05", "2020-01-06"};
    for (int i = 0; i < 6; ++i) {
        text += std::string(dates[i]) + ",ALT,25," + (i % 2 == 0 ? "100000" : "400000") + "\n";
        text += std::string(dates[i]) + ",CHEAP,19.99,9000000\n";
        text += std::string(dates[i]) + ",OK,25,300000\n";
    }
    const auto p = parse(text);
    LiquidityOptions o;
    o.volume_window = 5;
    const auto e = liquidity_filter(p, o);
    // Window ending at row 4 holds 100k,400k,100k,400k,100k (median 100k);
    // the one ending at row 5 holds 400k,100k,400k,100k,400k (median 400k).
    CHECK(e[*p.symbol_index("ALT")] == std::vector<bool>{false, false, false, false, false, true});
    CHECK(e[*p.symbol_index("CHEAP")] == std::vector<bool>(6, false));
    CHECK(e[*p.symbol_index("OK")] == std::vector<bool>{false, false, false, false, true, true});
    const auto d = liquidity_filter(p); // default 60-row window: too short
    CHECK(d[*p.symbol_index("OK")] == std::vector<bool>(6, false));
}

TEST_CASE("rolling sweep survives degenerate windows") {
    std::vector<IncrementSpec> specs{IncrementSpec::gaussian(0.01, 0.001)};
    MarketPanel p = synthetic_panel(specs, 40, 3);
    // Steady growth: every window is all up-moves.
    for (std::size_t k = 0; k < 40; ++k) p.symbols[0].close[k] = 50.0 * std::exp(0.001 * static_cast<double>(k));
    RollingOptions o;
    o.window = 20;
    o.permutations = 20;
    o.apply_liquidity = false;
    const auto est = rolling_estimates(p, small_table(), o);
    REQUIRE(est.size() == 20);
    for (const auto& e : est) {
        CHECK(e.r0 == 20.0); // every step a new high
        CHECK(std::isfinite(e.record));
        CHECK(std::isnan(e.vanilla) == !e.vanilla_error.empty());
    }
}

TEST_CASE("window seeds depend on symbol and date only") {
    CHECK(window_seed(1, "A", "2020-01-01") == window_seed(1, "A", "2020-01-01"));
    CHECK(window_seed(1, "A", "2020-01-01") != window_seed(1, "A", "2020-01-02"));
    CHECK(window_seed(1, "AB", "2020-01-01") != window_seed(1, "A", "B2020-01-01"));
}

TEST_CASE("ranking comparison boundaries") {
    std::vector<double> x(40), rev(40);
    for (std::size_t i = 0; i < 40; ++i) {
        x[i] = static_cast<double>(i) - 19.5;
        rev[i] = -x[i];
    }
    const auto same = compare_rankings(x, x, 0.05);
    CHECK(same.quantile_size == 2);
    CHECK(same.top_overlap == 1.0);
    CHECK(same.bottom_overlap == 1.0);
    CHECK(same.spearman_positive == 1.0);
    CHECK(same.kendall_negative == 1.0);
    CHECK(same.blest == doctest::Approx(1.0));
    const auto opp = compare_rankings(x, rev, 0.05);
    CHECK(opp.top_overlap == 0.0);
    CHECK(opp.spearman_all == -1.0);
    CHECK(opp.kendall_all == -1.0);
    CHECK(opp.blest == doctest::Approx(-1.0));
    CHECK(opp.positive_assets == 0);
}

TEST_CASE("backtest accounting") {
    const std::vector<IncrementSpec> specs{IncrementSpec::gaussian(0.01, 0.05)};
    const MarketPanel p = synthetic_panel(specs, 10, 1);
    std::vector<RollingEstimate> est;
    for (std::size_t d = 2; d < 10; ++d) {
        RollingEstimate e;
        e.symbol = 0;
        e.row = d;
        e.date_index = d;
        e.record_annualized = 5.0;
        e.vanilla_annualized = 0.5; // below threshold: flat
        est.push_back(e);
    }
    const auto r = threshold_backtest(p, est);
    double log_sum = 0.0;
    for (std::size_t d = 0; d < 10; ++d) {
        const double expected = d >= 3 ? p.symbols[0].simple_return(d) : 0.0;
        CHECK(r.record.daily_return[d] == expected);
        CHECK(r.record.positions[d] == (d >= 3 ? 1u : 0u));
        CHECK(r.vanilla.daily_return[d] == 0.0);
        log_sum += std::log1p(r.record.daily_return[d]);
    }
    CHECK(std::abs(r.record.log_wealth.back() - std::log(r.record.wealth.back())) < 1e-12);
    CHECK(r.record.log_wealth.back() == log_sum);
    CHECK(r.vanilla.log_wealth.back() == 0.0);
    CHECK(r.record.turnover == 1);
    // Constant drift, always long after warm-up: log wealth is the sum of log(1 + r).
    CHECK(r.record.log_wealth.back() ==
          doctest::Approx(std::log(p.symbols[0].close[9] / p.symbols[0].close[2])).epsilon(1e-12));
}

TEST_CASE("truncation leaves earlier signals unchanged") {
    std::vector<IncrementSpec> specs;
    for (int i = 0; i < 6; ++i) specs.push_back(IncrementSpec::student(3.0 + i, 0.01, 0.002 * (i - 2)));
    const MarketPanel full = synthetic_panel(specs, 70, 12);
    RollingOptions o;
    o.window = 20;
    o.permutations = 30;
    o.apply_liquidity = false;
    const auto est_full = rolling_estimates(full, small_table(), o);
    const auto bt_full = threshold_backtest(full, est_full);
    const std::string cut = full.dates[45];
    const MarketPanel part = full.truncated(cut);
    CHECK(part.dates.size() == 46);
    const auto est_part = rolling_estimates(part, small_table(), o);
    const auto bt_part = threshold_backtest(part, est_part);
    for (std::size_t d = 0; d < part.dates.size(); ++d) {
        CHECK(bt_part.record.signals[d] == bt_full.record.signals[d]);
        CHECK(bt_part.vanilla.signals[d] == bt_full.vanilla.signals[d]);
        CHECK(bt_part.record.daily_return[d] == bt_full.record.daily_return[d]);
    }
}

TEST_CASE("synthetic panel and CSV writers") {
    const std::vector<IncrementSpec> specs(2, IncrementSpec::gaussian(0.01));
    const MarketPanel p = synthetic_panel(specs, 6, 1);
    CHECK(p.dates.front() == "2000-01-03");
    CHECK(p.dates[5] == "2000-01-10"); // weekend skipped
    CHECK(p.symbols[1].symbol == "SYM001");
    std::ostringstream out;
    write_header(out, {"0.1.0", "estimate", "window=5", 7, "abcd1234"});
    CHECK(out.str() ==
          "# recsharpe 0.1.0\n# command estimate\n# config window=5\n# seed 7\n# table_checksum abcd1234\n");
}
}
