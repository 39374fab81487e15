#include "recsharpe/market.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <istream>
#include <sstream>

#include "recsharpe/errors.hpp"
#include "recsharpe/parallel.hpp"
#include "recsharpe/rank_stats.hpp"
#include "recsharpe/seeding.hpp"

namespace recsharpe {

double SymbolHistory::log_return(std::size_t k) const {
    if (k == 0 || k >= close.size()) throw InputError("return index out of range");
    return std::log(close[k] / close[k - 1]);
}

double SymbolHistory::simple_return(std::size_t k) const {
    if (k == 0 || k >= close.size()) throw InputError("return index out of range");
    return close[k] / close[k - 1] - 1.0;
}

std::optional<std::size_t> MarketPanel::symbol_index(const std::string& symbol) const {
    const auto it = std::lower_bound(symbols.begin(), symbols.end(), symbol,
                                     [](const SymbolHistory& h, const std::string& s) { return h.symbol < s; });
    if (it == symbols.end() || it->symbol != symbol) return std::nullopt;
    return static_cast<std::size_t>(it - symbols.begin());
}

MarketPanel MarketPanel::truncated(const std::string& last_date) const {
    MarketPanel out;
    out.rejected = rejected;
    const auto end = std::upper_bound(dates.begin(), dates.end(), last_date);
    out.dates.assign(dates.begin(), end);
    const std::size_t keep = out.dates.size();
    for (const auto& h : symbols) {
        SymbolHistory t;
        t.symbol = h.symbol;
        for (std::size_t k = 0; k < h.rows() && h.date_index[k] < keep; ++k) {
            t.date_index.push_back(h.date_index[k]);
            t.close.push_back(h.close[k]);
            t.volume.push_back(h.volume[k]);
        }
        if (t.rows() > 0) out.symbols.push_back(std::move(t));
    }
    return out;
}

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(',', start);
        fields.push_back(trim(std::string_view(line).substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return fields;
}

bool parse_number(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* first = s.data();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

bool valid_iso_date(const std::string& s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    int y = 0;
    unsigned m = 0, d = 0;
    if (std::from_chars(s.data(), s.data() + 4, y).ptr != s.data() + 4) return false;
    if (std::from_chars(s.data() + 5, s.data() + 7, m).ptr != s.data() + 7) return false;
    if (std::from_chars(s.data() + 8, s.data() + 10, d).ptr != s.data() + 10) return false;
    return std::chrono::year_month_day{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}}.ok();
}

struct RawRow {
    std::string date;
    double close;
    double volume;
};

} // namespace

MarketPanel ingest_csv(std::istream& in, const IngestOptions& options) {
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (!have_header && std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (fields != std::vector<std::string>{"date", "symbol", "close", "volume"})
            throw InputError("line " + std::to_string(line_no) + ": expected header date,symbol,close,volume");
        have_header = true;
    }
    if (!have_header) throw InputError("empty CSV input");

    MarketPanel panel;
    std::map<std::string, std::vector<RawRow>> by_symbol;
    std::size_t data_rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        ++data_rows;
        const auto fields = split_fields(line);
        const auto reject = [&](std::string reason) { panel.rejected.push_back({line_no, std::move(reason)}); };
        if (fields.size() != 4) {
            reject("expected 4 fields, found " + std::to_string(fields.size()));
            continue;
        }
        if (std::any_of(fields.begin(), fields.end(), [](const std::string& f) { return f.empty(); })) {
            reject("missing field");
            continue;
        }
        if (!valid_iso_date(fields[0])) {
            reject("invalid ISO date '" + fields[0] + "'");
            continue;
        }
        double close = 0.0, volume = 0.0;
        if (!parse_number(fields[2], close)) {
            reject("unparsable close '" + fields[2] + "'");
            continue;
        }
        if (!(close > 0.0)) {
            reject("non-positive close");
            continue;
        }
        if (!parse_number(fields[3], volume) || volume < 0.0) {
            reject("invalid volume '" + fields[3] + "'");
            continue;
        }
        auto& rows = by_symbol[fields[1]];
        if (!rows.empty()) {
            if (rows.back().date == fields[0])
                throw InputError("line " + std::to_string(line_no) + ": duplicate row for symbol " + fields[1] +
                                 " on " + fields[0]);
            if (rows.back().date > fields[0])
                throw InputError("line " + std::to_string(line_no) + ": dates out of order for symbol " + fields[1]);
        }
        rows.push_back({fields[0], close, volume});
    }
    if (data_rows == 0) throw InputError("CSV has no data rows");
    const double fraction = static_cast<double>(panel.rejected.size()) / static_cast<double>(data_rows);
    if (fraction > options.max_reject_fraction) {
        std::ostringstream msg;
        msg << panel.rejected.size() << " of " << data_rows << " rows rejected (limit "
            << options.max_reject_fraction << "); first at line " << panel.rejected.front().line << ": "
            << panel.rejected.front().reason;
        throw InputError(msg.str());
    }

    for (const auto& [symbol, rows] : by_symbol)
        for (const auto& r : rows) panel.dates.push_back(r.date);
    std::sort(panel.dates.begin(), panel.dates.end());
    panel.dates.erase(std::unique(panel.dates.begin(), panel.dates.end()), panel.dates.end());
    for (auto& [symbol, rows] : by_symbol) {
        SymbolHistory h;
        h.symbol = symbol;
        for (const auto& r : rows) {
            h.date_index.push_back(static_cast<std::size_t>(
                std::lower_bound(panel.dates.begin(), panel.dates.end(), r.date) - panel.dates.begin()));
            h.close.push_back(r.close);
            h.volume.push_back(r.volume);
        }
        panel.symbols.push_back(std::move(h));
    }
    return panel;
}

MarketPanel ingest_csv(const std::string& path, const IngestOptions& options) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    return ingest_csv(in, options);
}

std::vector<std::vector<bool>> liquidity_filter(const MarketPanel& panel, const LiquidityOptions& options) {
    if (options.volume_window == 0) throw InputError("volume window must be positive");
    std::vector<std::vector<bool>> eligible;
    eligible.reserve(panel.symbols.size());
    std::vector<double> buf;
    for (const auto& h : panel.symbols) {
        std::vector<bool> e(h.rows(), false);
        for (std::size_t k = 0; k < h.rows(); ++k) {
            if (k + 1 < options.volume_window || !(h.close[k] > options.min_price)) continue;
            buf.assign(h.volume.begin() + static_cast<std::ptrdiff_t>(k + 1 - options.volume_window),
                       h.volume.begin() + static_cast<std::ptrdiff_t>(k + 1));
            std::sort(buf.begin(), buf.end());
            const std::size_t w = buf.size();
            const double median = w % 2 == 1 ? buf[w / 2] : 0.5 * (buf[w / 2 - 1] + buf[w / 2]);
            e[k] = median > options.min_median_volume;
        }
        eligible.push_back(std::move(e));
    }
    return eligible;
}

std::uint64_t window_seed(std::uint64_t master_seed, const std::string& symbol, const std::string& date) {
    // FNV-1a over "symbol\0date".
    std::uint64_t h = 0xcbf29ce484222325ULL;
    const auto feed = [&h](unsigned char c) {
        h ^= c;
        h *= 0x100000001b3ULL;
    };
    for (const char c : symbol) feed(static_cast<unsigned char>(c));
    feed(0);
    for (const char c : date) feed(static_cast<unsigned char>(c));
    return derive_seed(master_seed, StreamPurpose::rolling, h);
}

namespace {

RollingEstimate estimate_window(const MarketPanel& panel, const CalibrationTable& table, const RollingOptions& options,
                                std::size_t s, std::size_t k, std::span<const double> window) {
    const auto& h = panel.symbols[s];
    RollingEstimate est;
    est.symbol = s;
    est.row = k;
    est.date_index = h.date_index[k];
    const double annual = std::sqrt(options.periods_per_year);
    try {
        EstimateOptions eo;
        eo.method = options.method;
        eo.permutations = options.permutations;
        eo.seed = window_seed(options.seed, h.symbol, panel.dates[est.date_index]);
        eo.periods_per_year = options.periods_per_year;
        eo.nu_override = options.nu_override;
        if (window.empty()) throw InputError("no returns in window");
        const auto res =
            estimate_sharpe(ReturnSeries(std::vector<double>(window.begin(), window.end())), table, eo);
        est.r0 = res.r0;
        est.record = res.theta;
        est.record_annualized = res.theta * annual;
        est.nu_hat = res.nu_hat;
        est.nu_gaussian = res.nu_gaussian;
        est.flags = res.diagnostics.flags;
    } catch (const std::exception& e) {
        est.record_error = e.what();
    }
    try {
        est.vanilla = vanilla_sharpe(window);
        est.vanilla_annualized = est.vanilla * annual;
    } catch (const std::exception& e) {
        est.vanilla_error = e.what();
    }
    return est;
}

std::vector<double> log_returns(const SymbolHistory& h) {
    std::vector<double> r(h.rows(), 0.0);
    for (std::size_t k = 1; k < h.rows(); ++k) r[k] = h.log_return(k);
    return r; // r[0] unused
}

std::vector<RollingEstimate> sweep(const MarketPanel& panel, const CalibrationTable& table,
                                   const RollingOptions& options, bool full_history) {
    if (options.method == EstimationMethod::vanilla)
        throw InputError("record method must be table or simplified");
    if (!full_history && options.window < kMinEstimateLength)
        throw InputError("rolling window must be at least " + std::to_string(kMinEstimateLength));
    const auto eligible = options.apply_liquidity ? liquidity_filter(panel, options.liquidity)
                                                  : std::vector<std::vector<bool>>{};
    std::vector<std::vector<RollingEstimate>> per_symbol(panel.symbols.size());
    parallel_for(panel.symbols.size(), options.jobs, [&](std::size_t s) {
        const auto& h = panel.symbols[s];
        const auto returns = log_returns(h);
        if (full_history) {
            const std::size_t k = h.rows() - 1;
            if (options.apply_liquidity && !eligible[s][k]) return;
            per_symbol[s].push_back(
                estimate_window(panel, table, options, s, k, std::span<const double>(returns).subspan(1)));
            return;
        }
        const std::size_t w = options.window;
        for (std::size_t k = w; k < h.rows(); ++k) {
            if (options.apply_liquidity && !eligible[s][k]) continue;
            per_symbol[s].push_back(estimate_window(panel, table, options, s, k,
                                                    std::span<const double>(returns).subspan(k + 1 - w, w)));
        }
    });
    std::vector<RollingEstimate> all;
    for (auto& v : per_symbol)
        for (auto& e : v) all.push_back(std::move(e));
    std::stable_sort(all.begin(), all.end(), [](const RollingEstimate& a, const RollingEstimate& b) {
        return a.date_index != b.date_index ? a.date_index < b.date_index : a.symbol < b.symbol;
    });
    return all;
}

} // namespace

std::vector<RollingEstimate> rolling_estimates(const MarketPanel& panel, const CalibrationTable& table,
                                               const RollingOptions& options) {
    return sweep(panel, table, options, false);
}

std::vector<RollingEstimate> full_history_estimates(const MarketPanel& panel, const CalibrationTable& table,
                                                    const RollingOptions& options) {
    return sweep(panel, table, options, true);
}

RankingReport compare_rankings(std::span<const double> record, std::span<const double> vanilla, double quantile) {
    if (record.size() != vanilla.size()) throw InputError("ranking inputs differ in length");
    if (!(quantile > 0.0 && quantile <= 1.0)) throw InputError("quantile must lie in (0, 1]");
    RankingReport rep;
    rep.assets = record.size();
    rep.quantile_size = static_cast<std::size_t>(std::floor(quantile * static_cast<double>(rep.assets)));
    if (rep.quantile_size >= 1) {
        rep.top_overlap = overlap_fraction(top_k(record, rep.quantile_size), top_k(vanilla, rep.quantile_size));
        rep.bottom_overlap =
            overlap_fraction(bottom_k(record, rep.quantile_size), bottom_k(vanilla, rep.quantile_size));
    }
    std::vector<double> pr, pv, nr, nv;
    for (std::size_t i = 0; i < record.size(); ++i) {
        if (record[i] > 0.0 && vanilla[i] > 0.0) {
            pr.push_back(record[i]);
            pv.push_back(vanilla[i]);
        } else if (record[i] < 0.0 && vanilla[i] < 0.0) {
            nr.push_back(record[i]);
            nv.push_back(vanilla[i]);
        }
    }
    rep.positive_assets = pr.size();
    rep.negative_assets = nr.size();
    rep.spearman_positive = spearman(pr, pv);
    rep.kendall_positive = kendall_tau_b(pr, pv);
    rep.spearman_negative = spearman(nr, nv);
    rep.kendall_negative = kendall_tau_b(nr, nv);
    rep.spearman_all = spearman(record, vanilla);
    rep.kendall_all = kendall_tau_b(record, vanilla);
    rep.blest = symmetric_blest(record, vanilla);
    return rep;
}

std::vector<RankingReport> ranking_divergence(const MarketPanel& panel, std::span<const RollingEstimate> estimates,
                                              const RankingOptions& options) {
    std::vector<RankingReport> reports;
    std::size_t i = 0;
    while (i < estimates.size()) {
        const std::size_t d = estimates[i].date_index;
        std::vector<double> rec, van, nu;
        for (; i < estimates.size() && estimates[i].date_index == d; ++i) {
            const auto& e = estimates[i];
            if (!std::isfinite(e.record) || !std::isfinite(e.vanilla)) continue;
            rec.push_back(e.record);
            van.push_back(e.vanilla);
            nu.push_back(e.nu_gaussian ? kNuFitMax : e.nu_hat);
        }
        if (rec.size() < options.min_assets || rec.size() < 2) continue;
        RankingReport rep = compare_rankings(rec, van, options.quantile);
        if (rep.quantile_size < 1) continue;
        rep.date_index = d;
        rep.date = panel.dates.at(d);
        CompensatedSum s;
        for (const double v : nu) s.add(v);
        rep.nu_mean = s.value() / static_cast<double>(nu.size());
        CompensatedSum ss;
        for (const double v : nu) ss.add((v - rep.nu_mean) * (v - rep.nu_mean));
        rep.nu_sd = std::sqrt(ss.value() / static_cast<double>(nu.size() - 1));
        reports.push_back(rep);
    }
    return reports;
}

namespace {

BacktestSeries run_backtest(const MarketPanel& panel, std::span<const RollingEstimate> estimates, double threshold,
                            bool record) {
    const std::size_t n_dates = panel.dates.size(), n_sym = panel.symbols.size();
    BacktestSeries out;
    out.method = record ? "record" : "vanilla";
    out.signals.assign(n_dates, std::vector<int>(n_sym, 0));
    for (const auto& e : estimates) {
        const double a = record ? e.record_annualized : e.vanilla_annualized;
        if (std::isfinite(a) && std::abs(a) > threshold) out.signals[e.date_index][e.symbol] = a > 0.0 ? 1 : -1;
    }
    std::vector<CompensatedSum> sums(n_dates);
    out.positions.assign(n_dates, 0);
    for (std::size_t s = 0; s < n_sym; ++s) {
        const auto& h = panel.symbols[s];
        int held_before = 0;
        for (std::size_t k = 1; k < h.rows(); ++k) {
            const int pos = out.signals[h.date_index[k - 1]][s];
            if (pos != held_before) ++out.turnover;
            held_before = pos;
            if (pos == 0) continue;
            sums[h.date_index[k]].add(pos * h.simple_return(k));
            ++out.positions[h.date_index[k]];
        }
    }
    out.daily_return.assign(n_dates, 0.0);
    out.log_wealth.assign(n_dates, 0.0);
    out.wealth.assign(n_dates, 1.0);
    double log_w = 0.0, w = 1.0;
    for (std::size_t d = 0; d < n_dates; ++d) {
        if (out.positions[d] > 0) out.daily_return[d] = sums[d].value() / static_cast<double>(out.positions[d]);
        log_w += std::log1p(out.daily_return[d]);
        w *= 1.0 + out.daily_return[d];
        out.log_wealth[d] = log_w;
        out.wealth[d] = w;
    }
    return out;
}

} // namespace

BacktestResult threshold_backtest(const MarketPanel& panel, std::span<const RollingEstimate> estimates,
                                  const BacktestOptions& options) {
    BacktestResult result;
    result.dates = panel.dates;
    result.record = run_backtest(panel, estimates, options.threshold, true);
    result.vanilla = run_backtest(panel, estimates, options.threshold, false);
    return result;
}

MarketPanel synthetic_panel(std::span<const IncrementSpec> specs, std::size_t days, std::uint64_t seed,
                            double start_price, double volume) {
    if (specs.empty() || days < 2) throw InputError("synthetic panel needs symbols and at least 2 days");
    MarketPanel panel;
    using namespace std::chrono;
    sys_days day = sys_days{year{2000} / January / 3};
    while (panel.dates.size() < days) {
        const weekday wd{day};
        if (wd != Saturday && wd != Sunday) {
            const year_month_day ymd{day};
            char buf[16];
            std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                          static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
            panel.dates.emplace_back(buf);
        }
        day += std::chrono::days{1};
    }
    std::vector<double> increments(days - 1);
    for (std::size_t s = 0; s < specs.size(); ++s) {
        SymbolHistory h;
        char name[32];
        std::snprintf(name, sizeof name, "SYM%03zu", s);
        h.symbol = name;
        SplitMix64 rng(derive_seed(seed, StreamPurpose::series, s));
        draw_increments(specs[s], rng, increments);
        double price = start_price;
        for (std::size_t d = 0; d < days; ++d) {
            if (d > 0) price *= std::exp(increments[d - 1]);
            h.date_index.push_back(d);
            h.close.push_back(price);
            h.volume.push_back(volume);
        }
        panel.symbols.push_back(std::move(h));
    }
    return panel;
}

namespace {

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string csv_safe(std::string s) {
    std::replace(s.begin(), s.end(), ',', ';');
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

} // namespace

void write_header(std::ostream& out, const OutputHeader& header) {
    out << "# recsharpe " << header.version << '\n'
        << "# command " << header.command << '\n'
        << "# config " << header.config << '\n'
        << "# seed " << header.seed << '\n'
        << "# table_checksum " << (header.table_checksum.empty() ? "-" : header.table_checksum) << '\n';
}

void write_estimates_csv(std::ostream& out, const MarketPanel& panel, std::span<const RollingEstimate> estimates) {
    out << "date,symbol,r0,record,record_annualized,vanilla,vanilla_annualized,nu_hat,nu_gaussian,flags,"
           "record_error,vanilla_error\n";
    for (const auto& e : estimates) {
        std::string flags;
        for (const auto& f : e.flags) flags += (flags.empty() ? "" : ";") + f;
        out << panel.dates.at(e.date_index) << ',' << panel.symbols.at(e.symbol).symbol << ',' << fmt(e.r0) << ','
            << fmt(e.record) << ',' << fmt(e.record_annualized) << ',' << fmt(e.vanilla) << ','
            << fmt(e.vanilla_annualized) << ',' << fmt(e.nu_hat) << ',' << (e.nu_gaussian ? 1 : 0) << ',' << flags
            << ',' << csv_safe(e.record_error) << ',' << csv_safe(e.vanilla_error) << '\n';
    }
}

void write_rankings_csv(std::ostream& out, std::span<const RankingReport> reports) {
    out << "date,assets,quantile_size,top_overlap,bottom_overlap,positive_assets,negative_assets,"
           "spearman_positive,kendall_positive,spearman_negative,kendall_negative,spearman_all,kendall_all,"
           "blest,nu_mean,nu_sd\n";
    for (const auto& r : reports) {
        out << r.date << ',' << r.assets << ',' << r.quantile_size << ',' << fmt(r.top_overlap) << ','
            << fmt(r.bottom_overlap) << ',' << r.positive_assets << ',' << r.negative_assets << ','
            << fmt(r.spearman_positive) << ',' << fmt(r.kendall_positive) << ',' << fmt(r.spearman_negative) << ','
            << fmt(r.kendall_negative) << ',' << fmt(r.spearman_all) << ',' << fmt(r.kendall_all) << ','
            << fmt(r.blest) << ',' << fmt(r.nu_mean) << ',' << fmt(r.nu_sd) << '\n';
    }
}

void write_backtest_csv(std::ostream& out, const BacktestResult& result) {
    out << "date,method,daily_return,log_wealth,positions\n";
    for (const auto* series : {&result.record, &result.vanilla})
        for (std::size_t d = 0; d < result.dates.size(); ++d)
            out << result.dates[d] << ',' << series->method << ',' << fmt(series->daily_return[d]) << ','
                << fmt(series->log_wealth[d]) << ',' << series->positions[d] << '\n';
    out << "# turnover record=" << result.record.turnover << " vanilla=" << result.vanilla.turnover << '\n';
}

} // namespace recsharpe
