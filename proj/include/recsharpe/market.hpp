#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "recsharpe/calibration.hpp"
#include "recsharpe/estimator.hpp"
#include "recsharpe/synthetic.hpp"

namespace recsharpe {

// One symbol's observations, dates strictly increasing.
struct SymbolHistory {
    std::string symbol;
    std::vector<std::size_t> date_index; // into MarketPanel::dates
    std::vector<double> close;
    std::vector<double> volume;

    std::size_t rows() const noexcept { return close.size(); }
    // Return ending at row k >= 1, between consecutive available rows.
    double log_return(std::size_t k) const;
    double simple_return(std::size_t k) const;
};

struct RejectedRow {
    std::size_t line = 0;
    std::string reason;
};

// Symbols sorted by name; dates are the sorted union of all ISO dates.
struct MarketPanel {
    std::vector<std::string> dates;
    std::vector<SymbolHistory> symbols;
    std::vector<RejectedRow> rejected;

    std::optional<std::size_t> symbol_index(const std::string& symbol) const;
    // Copy without any observation dated after `last_date` (ISO compare).
    MarketPanel truncated(const std::string& last_date) const;
};

struct IngestOptions {
    // Hard error when rejected rows exceed this fraction of data rows.
    double max_reject_fraction = 0.05;
};

// CSV with header date,symbol,close,volume. Rows with missing fields, bad
// numbers, malformed dates or non-positive prices are rejected and reported
// by line number. Duplicate (date, symbol) and out-of-order dates within a
// symbol are hard errors (InputError).
MarketPanel ingest_csv(std::istream& in, const IngestOptions& options = {});
MarketPanel ingest_csv(const std::string& path, const IngestOptions& options = {});

struct LiquidityOptions {
    double min_price = 20.0;
    double min_median_volume = 250000.0;
    std::size_t volume_window = 60;
};

// eligible[s][k]: close > min_price and the median volume of the last
// volume_window rows of symbol s through row k exceeds min_median_volume.
// Rows with shorter history are ineligible.
std::vector<std::vector<bool>> liquidity_filter(const MarketPanel& panel, const LiquidityOptions& options = {});

struct RollingOptions {
    std::size_t window = 100;
    EstimationMethod method = EstimationMethod::simplified;
    std::size_t permutations = kDefaultPermutations;
    std::uint64_t seed = 0;
    double periods_per_year = kDefaultPeriodsPerYear;
    std::optional<double> nu_override;
    bool apply_liquidity = true;
    LiquidityOptions liquidity;
    std::size_t jobs = 0;
};

// One window of `window` log returns ending at (symbol, row); only rows that
// pass the liquidity filter (when applied) produce a window. Failed
// estimates are NaN with the reason kept, so the sweep never stops.
struct RollingEstimate {
    std::size_t symbol = 0;
    std::size_t row = 0;
    std::size_t date_index = 0;
    double r0 = std::numeric_limits<double>::quiet_NaN();
    double record = std::numeric_limits<double>::quiet_NaN();
    double record_annualized = std::numeric_limits<double>::quiet_NaN();
    double vanilla = std::numeric_limits<double>::quiet_NaN();
    double vanilla_annualized = std::numeric_limits<double>::quiet_NaN();
    double nu_hat = std::numeric_limits<double>::quiet_NaN();
    bool nu_gaussian = false;
    std::vector<std::string> flags;
    std::string record_error;
    std::string vanilla_error;
};

// Permutation seed of one window; depends on (seed, symbol, end date) only,
// so truncating the panel never changes earlier windows.
std::uint64_t window_seed(std::uint64_t master_seed, const std::string& symbol, const std::string& date);

// Sorted by (date_index, symbol).
std::vector<RollingEstimate> rolling_estimates(const MarketPanel& panel, const CalibrationTable& table,
                                               const RollingOptions& options = {});

// One estimate per symbol over its whole history, dated at its last row.
// `window` is ignored; short histories yield errors in the row, not throws.
std::vector<RollingEstimate> full_history_estimates(const MarketPanel& panel, const CalibrationTable& table,
                                                    const RollingOptions& options = {});

struct RankingOptions {
    double quantile = 0.05;
    std::size_t min_assets = 20;
};

struct RankingReport {
    std::size_t date_index = 0;
    std::string date;
    std::size_t assets = 0;
    std::size_t quantile_size = 0;
    double top_overlap = 0.0;
    double bottom_overlap = 0.0;
    // Assets where both methods give a positive (negative) estimate.
    std::size_t positive_assets = 0;
    std::size_t negative_assets = 0;
    double spearman_positive = std::numeric_limits<double>::quiet_NaN();
    double kendall_positive = std::numeric_limits<double>::quiet_NaN();
    double spearman_negative = std::numeric_limits<double>::quiet_NaN();
    double kendall_negative = std::numeric_limits<double>::quiet_NaN();
    double spearman_all = std::numeric_limits<double>::quiet_NaN();
    double kendall_all = std::numeric_limits<double>::quiet_NaN();
    double blest = std::numeric_limits<double>::quiet_NaN();
    // Gaussian fits count as nu = 100, the top of the fitted range.
    double nu_mean = 0.0;
    double nu_sd = 0.0;
};

// Cross-sections of eligible assets with both estimates finite. Windows with
// fewer than min_assets or an empty quantile set are skipped.
std::vector<RankingReport> ranking_divergence(const MarketPanel& panel, std::span<const RollingEstimate> estimates,
                                              const RankingOptions& options = {});

// Core metrics on two score vectors, exposed for direct testing.
RankingReport compare_rankings(std::span<const double> record, std::span<const double> vanilla, double quantile);

struct BacktestOptions {
    double threshold = 1.0; // on the annualized estimate
};

struct BacktestSeries {
    std::string method;
    std::vector<double> daily_return; // per panel date; 0 when flat
    std::vector<double> log_wealth;   // cumulative sum of log(1 + daily_return)
    std::vector<double> wealth;       // compounded product, starting at 1
    std::vector<std::size_t> positions;
    // signals[d][s]: position decided at the close of date d, held on the
    // symbol's next row.
    std::vector<std::vector<int>> signals;
    std::size_t turnover = 0;
};

struct BacktestResult {
    std::vector<std::string> dates;
    BacktestSeries record;
    BacktestSeries vanilla;
};

// Long/short one day when |annualized estimate| > threshold, equal-weight
// mean of active positions' simple returns.
BacktestResult threshold_backtest(const MarketPanel& panel, std::span<const RollingEstimate> estimates,
                                  const BacktestOptions& options = {});

// Symbols named SYM000..; ISO dates from 2000-01-03 on weekdays; log returns
// drawn from spec[s]; constant volume.
MarketPanel synthetic_panel(std::span<const IncrementSpec> specs, std::size_t days, std::uint64_t seed,
                            double start_price = 100.0, double volume = 1.0e6);

// Header comment lines shared by every CSV output.
struct OutputHeader {
    std::string version;
    std::string command;
    std::string config;
    std::uint64_t seed = 0;
    std::string table_checksum;
};

void write_header(std::ostream& out, const OutputHeader& header);
void write_estimates_csv(std::ostream& out, const MarketPanel& panel, std::span<const RollingEstimate> estimates);
void write_rankings_csv(std::ostream& out, std::span<const RankingReport> reports);
void write_backtest_csv(std::ostream& out, const BacktestResult& result);

} // namespace recsharpe
