// recsharpe: moment-free Sharpe ratio estimation from record statistics.
// Run `recsharpe <command> --help` for the flags of each command.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "recsharpe/analytic.hpp"
#include "recsharpe/calibration.hpp"
#include "recsharpe/errors.hpp"
#include "recsharpe/estimator.hpp"
#include "recsharpe/market.hpp"
#include "recsharpe/records.hpp"
#include "recsharpe/synthetic.hpp"

using namespace recsharpe;

namespace {

constexpr const char* kVersion = "0.1.0";

enum ExitCode { kOk = 0, kOther = 1, kUsage = 2, kInput = 3, kTable = 4, kNumeric = 5, kBudget = 6 };

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

double parse_nu(const std::string& text) {
    if (text == "inf" || text == "gaussian") return kGaussianNu;
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || !(v > 2.0)) throw InputError("nu must exceed 2 or be 'inf', got '" + text + "'");
    return v;
}

// Everything given on the command line or config file for one subcommand,
// as sorted key=value pairs. Echoed into every output header.
std::string describe(const CLI::App& sub) {
    std::map<std::string, std::string> kv;
    for (const CLI::Option* opt : sub.get_options()) {
        if (opt->count() == 0 || opt->get_name() == "--help" || opt->get_name() == "--config") continue;
        std::string joined;
        for (const auto& r : opt->results()) joined += (joined.empty() ? "" : ",") + r;
        kv[opt->get_name().substr(2)] = joined.empty() ? "true" : joined;
    }
    std::string out;
    for (const auto& [k, v] : kv) out += (out.empty() ? "" : " ") + k + "=" + v;
    return out.empty() ? "-" : out;
}

// Plain key=value lines ('#' comments allowed). Keys name long flags of the
// chosen subcommand; flags given on the command line win.
std::vector<std::string> merge_config(const std::string& path, const CLI::App& sub,
                                      const std::vector<std::string>& args) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file " + path);
    std::vector<std::string> extra;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InputError("config line " + std::to_string(line_no) + ": expected key=value");
        auto trim = [](std::string s) {
            const auto first = s.find_first_not_of(" \t\r");
            if (first == std::string::npos) return std::string{};
            return s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
        };
        const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        const std::string flag = "--" + key;
        if (sub.get_option_no_throw(flag) == nullptr)
            throw CLI::ExtrasError("config key '" + key + "' is not a flag of '" + sub.get_name() + "'",
                                   CLI::ExitCodes::ExtrasError);
        bool given = false;
        for (const auto& a : args) given = given || a == flag || a.rfind(flag + "=", 0) == 0;
        if (!given) extra.push_back(flag + "=" + value);
    }
    return extra;
}

std::vector<double> read_returns_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    std::vector<double> values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos || line[b] == '#') continue;
        try {
            std::size_t used = 0;
            values.push_back(std::stod(line.substr(b), &used));
        } catch (const std::exception&) {
            if (values.empty() && line_no == 1) continue; // header
            throw InputError("line " + std::to_string(line_no) + ": not a number");
        }
    }
    return values;
}

struct Common {
    std::size_t jobs = 0;
    std::uint64_t seed = 0;
    std::size_t permutations = kDefaultPermutations;
    std::string output;
};

std::ostream& open_output(const std::string& path, std::ofstream& file) {
    if (path.empty() || path == "-") return std::cout;
    file.open(path);
    if (!file) throw InputError("cannot open output " + path);
    return file;
}

void add_common(CLI::App* sub, Common& c, bool random) {
    sub->add_option("-o,--output", c.output, "Output file (default stdout)");
    if (random) {
        sub->add_option("--seed", c.seed, "Master seed")->capture_default_str();
        sub->add_option("--permutations", c.permutations, "Shuffles per R0 evaluation")
            ->capture_default_str()
            ->check(CLI::PositiveNumber);
        sub->add_option("--jobs", c.jobs, "Worker threads (0 = all cores)")->capture_default_str();
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Moment-free Sharpe ratio estimation from record statistics"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    std::string config_path;
    Common common;

    // records
    auto* records = app.add_subcommand("records", "Record counts, durations and R0 of one return series");
    std::string rec_input;
    std::vector<double> rec_returns;
    auto* rec_in = records->add_option("--input", rec_input, "File with one return per line");
    records->add_option("--returns", rec_returns, "Comma-separated returns")->delimiter(',')->excludes(rec_in);
    add_common(records, common, true);

    // calibrate
    auto* calibrate = app.add_subcommand("calibrate", "Build and save a calibration table");
    std::string grid_name = "desk", table_out, surface_csv, built_at;
    std::vector<std::size_t> grid_n;
    std::vector<double> grid_theta;
    std::vector<std::string> grid_nu;
    std::size_t n_avg = 10000;
    bool force = false;
    calibrate->add_option("--grid", grid_name, "Base grid")->check(CLI::IsMember({"desk"}))->capture_default_str();
    calibrate->add_option("--grid-n", grid_n, "Override series lengths")->delimiter(',');
    calibrate->add_option("--grid-theta", grid_theta, "Override theta values")->delimiter(',');
    calibrate->add_option("--grid-nu", grid_nu, "Override nu values (inf = Gaussian)")->delimiter(',');
    calibrate->add_option("--navg", n_avg, "Synthetic series per grid point")->capture_default_str()->check(CLI::Range(2ul, 100000000ul));
    calibrate->add_option("--out", table_out, "Table path")->required();
    calibrate->add_option("--surface-csv", surface_csv, "Also write the raw surface as CSV");
    calibrate->add_option("--built-at", built_at, "Timestamp recorded in the table (not checksummed)");
    calibrate->add_flag("--force", force, "Ignore the work budget");
    add_common(calibrate, common, true);

    // estimate / rank-compare / backtest share the panel options
    std::string input, table_path, method_name = "simplified";
    std::size_t window = 0;
    double periods = kDefaultPeriodsPerYear, quantile = 0.05, threshold = 1.0;
    std::size_t min_assets = 20;
    std::string nu_text;
    bool liquidity = true;
    double max_reject = 0.05;
    auto add_panel = [&](CLI::App* sub, std::size_t default_window, bool default_liquidity) {
        sub->add_option("--input", input, "CSV with header date,symbol,close,volume")->required();
        sub->add_option("--table", table_path, "Calibration table")->required();
        sub->add_option("--window", window, "Returns per window (0 = whole history)")
            ->default_val(default_window)
            ->capture_default_str();
        sub->add_option("--method", method_name, "Record method")
            ->check(CLI::IsMember({"table", "simplified"}))
            ->capture_default_str();
        sub->add_option("--annualize", periods, "Periods per year")->capture_default_str()->check(CLI::PositiveNumber);
        sub->add_option("--nu", nu_text, "Use this nu instead of fitting (inf = Gaussian)");
        sub->add_flag("--liquidity,!--no-liquidity", liquidity, "Apply the price/volume filter")
            ->default_val(default_liquidity);
        sub->add_option("--max-reject", max_reject, "Tolerated fraction of rejected CSV rows")->capture_default_str();
        add_common(sub, common, true);
    };
    auto* estimate = app.add_subcommand("estimate", "Sharpe estimates per symbol (rolling when --window > 0)");
    add_panel(estimate, 0, false);
    auto* rank = app.add_subcommand("rank-compare", "Ranking divergence between record and vanilla estimates");
    add_panel(rank, 100, true);
    rank->add_option("--quantile", quantile, "Top/bottom fraction")->capture_default_str()->check(CLI::Range(0.0, 1.0));
    rank->add_option("--min-assets", min_assets, "Skip windows with fewer assets")->capture_default_str();
    auto* backtest = app.add_subcommand("backtest", "Naive threshold strategy for both estimators");
    add_panel(backtest, 100, true);
    backtest->add_option("--threshold", threshold, "Annualized threshold")->capture_default_str();

    // efficiency
    auto* efficiency = app.add_subcommand("efficiency", "Delta-method efficiency of the record estimator");
    std::string family = "student";
    double eff_nu = 4.0;
    std::vector<std::size_t> eff_n{50, 252};
    std::vector<double> eff_theta{0.01, 0.02, 0.05, 0.1, 0.2};
    std::size_t eff_navg = 2000;
    efficiency->add_option("--family", family, "Increment law")
        ->check(CLI::IsMember({"gaussian", "student"}))
        ->capture_default_str();
    efficiency->add_option("--nu", eff_nu, "Student degrees of freedom")->capture_default_str();
    efficiency->add_option("--n", eff_n, "Series lengths")->delimiter(',')->capture_default_str();
    efficiency->add_option("--theta", eff_theta, "True Sharpe ratios")->delimiter(',')->capture_default_str();
    efficiency->add_option("--navg", eff_navg, "Replicas per point")->capture_default_str();
    efficiency->add_option("--table", table_path, "Calibration table")->required();
    add_common(efficiency, common, true);

    // analytics
    auto* analytics = app.add_subcommand("analytics", "Closed-form record statistics");
    std::string which;
    std::size_t an_n = 100;
    std::vector<double> an_c{0.001};
    double an_sigma = 1.0;
    analytics->add_option("--which", which, "Quantity")
        ->required()
        ->check(CLI::IsMember({"driftless-pmf", "eq3", "eq4", "pconv0", "n0", "rate"}));
    analytics->add_option("--n", an_n, "Length (pmf) or largest length (series)")->capture_default_str();
    analytics->add_option("--c", an_c, "Drift values (or c/sigma for n0 and rate)")->delimiter(',')->capture_default_str();
    analytics->add_option("--sigma", an_sigma, "Increment standard deviation")->capture_default_str();
    add_common(analytics, common, false);

    for (auto* sub : app.get_subcommands({}))
        sub->add_option("--config", config_path, "key=value file merged under command-line flags");

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        // First pass finds the subcommand and the config file; second pass
        // parses with config values appended for flags not given.
        std::string config_arg;
        CLI::App* chosen = nullptr;
        for (std::size_t i = 0; i < args.size(); ++i) {
            if (!chosen) chosen = app.get_subcommand_no_throw(args[i]);
            if (args[i] == "--config" && i + 1 < args.size()) config_arg = args[i + 1];
            if (args[i].rfind("--config=", 0) == 0) config_arg = args[i].substr(9);
        }
        std::vector<std::string> full = args;
        if (chosen && !config_arg.empty()) {
            const auto extra = merge_config(config_arg, *chosen, args);
            full.insert(full.end(), extra.begin(), extra.end());
        }
        std::reverse(full.begin(), full.end());
        app.parse(full);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: code=usage message=" << e.what() << '\n';
        return kUsage;
    } catch (const InputError& e) {
        std::cerr << "error: code=input message=" << e.what() << '\n';
        return kInput;
    }

    CLI::App* sub = app.get_subcommands().front();
    OutputHeader header;
    header.version = kVersion;
    header.command = sub->get_name();
    header.config = describe(*sub);
    header.seed = common.seed;

    try {
        std::ofstream file;
        if (sub == records) {
            std::vector<double> values = rec_input.empty() ? rec_returns : read_returns_file(rec_input);
            if (values.empty()) throw InputError("records needs --input or --returns");
            const ReturnSeries series(values);
            std::ostream& out = open_output(common.output, file);
            write_header(out, header);
            const RecordSummary s = count_records(series.values());
            out << "n=" << s.n << "\nr_plus=" << s.r_plus << "\nr_minus=" << s.r_minus << "\nt_minus=" << s.t_minus
                << "\nt_plus=" << s.t_plus << '\n';
            if (series.size() >= 2) {
                const auto stat = r0_statistic(series, common.permutations, common.seed);
                out << "r0=" << fmt(*stat.r0) << "\npermutations=" << stat.num_permutations << '\n';
            }
        } else if (sub == calibrate) {
            SurfaceGrid grid = desk_scale_grid();
            if (!grid_n.empty()) grid.n = grid_n;
            if (!grid_theta.empty()) grid.theta = grid_theta;
            if (!grid_nu.empty()) {
                grid.nu.clear();
                for (const auto& t : grid_nu) grid.nu.push_back(parse_nu(t));
            }
            SurfaceOptions so;
            so.jobs = common.jobs;
            so.force = force;
            const Surface surface = mean_r0_surface(grid, n_avg, common.permutations, common.seed, so);
            if (!surface_csv.empty()) {
                std::ofstream csv(surface_csv);
                if (!csv) throw InputError("cannot open " + surface_csv);
                header.table_checksum.clear();
                write_header(csv, header);
                write_surface_csv(csv, surface);
            }
            const CalibrationTable table = CalibrationTable::build(surface, {}, built_at);
            table.save(table_out);
            std::ostream& out = open_output(common.output, file);
            header.table_checksum = table.checksum();
            write_header(out, header);
            out << "table=" << table_out << "\nchecksum=" << table.checksum() << "\nfits=" << table.fits().size()
                << "\nsimplified=" << (table.simplified() ? "yes" : "no: " + table.simplified_error()) << '\n';
        } else if (sub == estimate || sub == rank || sub == backtest) {
            const CalibrationTable table = CalibrationTable::load(table_path);
            header.table_checksum = table.checksum();
            IngestOptions io;
            io.max_reject_fraction = max_reject;
            const MarketPanel panel = ingest_csv(input, io);
            // The panel subcommands share storage, so unset flags take this subcommand's defaults.
            const bool rolling_command = sub != estimate;
            if (sub->count("--window") == 0) window = rolling_command ? 100 : 0;
            if (sub->count("--liquidity") == 0) liquidity = rolling_command;
            RollingOptions ro;
            ro.window = window;
            ro.method = parse_method(method_name);
            ro.permutations = common.permutations;
            ro.seed = common.seed;
            ro.periods_per_year = periods;
            if (!nu_text.empty()) ro.nu_override = parse_nu(nu_text);
            ro.apply_liquidity = liquidity;
            ro.jobs = common.jobs;
            if (sub != estimate && window == 0) throw InputError("--window must be positive for " + sub->get_name());
            const auto estimates =
                window == 0 ? full_history_estimates(panel, table, ro) : rolling_estimates(panel, table, ro);
            std::ostream& out = open_output(common.output, file);
            write_header(out, header);
            for (const auto& r : panel.rejected) out << "# rejected line=" << r.line << " reason=" << r.reason << '\n';
            if (sub == estimate) {
                write_estimates_csv(out, panel, estimates);
            } else if (sub == rank) {
                RankingOptions rk;
                rk.quantile = quantile;
                rk.min_assets = min_assets;
                const auto reports = ranking_divergence(panel, estimates, rk);
                write_rankings_csv(out, reports);
            } else {
                BacktestOptions bo;
                bo.threshold = threshold;
                write_backtest_csv(out, threshold_backtest(panel, estimates, bo));
            }
        } else if (sub == efficiency) {
            const CalibrationTable table = CalibrationTable::load(table_path);
            header.table_checksum = table.checksum();
            const IncrementSpec spec =
                family == "gaussian" ? IncrementSpec::gaussian() : IncrementSpec::student(eff_nu);
            const auto reports = efficiency_study(spec, eff_n, eff_theta, eff_navg, common.permutations, common.seed,
                                                  table, common.jobs);
            std::ostream& out = open_output(common.output, file);
            write_header(out, header);
            out << "n,nu,theta,mean_r0,var_r0,derivative,mean_vanilla,sigma_s2,sigma_r2,rho,usable\n";
            for (const auto& r : reports)
                out << r.n << ',' << fmt(r.nu) << ',' << fmt(r.theta_true) << ',' << fmt(r.mean_r0) << ','
                    << fmt(r.var_r0) << ',' << fmt(r.derivative) << ',' << fmt(r.mean_vanilla) << ','
                    << fmt(r.sigma_s2) << ',' << fmt(r.sigma_r2) << ',' << fmt(r.rho) << ',' << (r.usable ? 1 : 0)
                    << '\n';
        } else if (sub == analytics) {
            std::ostream& out = open_output(common.output, file);
            write_header(out, header);
            if (which == "driftless-pmf") {
                const auto pmf = driftless_record_pmf(an_n);
                out << "records,probability\n";
                for (std::size_t r = 0; r < pmf.size(); ++r) out << r + 1 << ',' << fmt(pmf[r]) << '\n';
            } else if (which == "eq3" || which == "eq4") {
                out << "n,c,expected_records\n";
                for (const double c : an_c)
                    for (std::size_t n = 1; n <= an_n; ++n) {
                        const double m = which == "eq3" ? gaussian_expected_records(c, an_sigma, n)
                                                        : (n >= 2 ? student3_expected_records(c, an_sigma, n)
                                                                  : std::nan(""));
                        out << n << ',' << fmt(c) << ',' << fmt(m) << '\n';
                    }
            } else if (which == "pconv0") {
                out << "n,exact,asymptotic\n";
                for (std::size_t n = 1; n <= an_n; ++n)
                    out << n << ',' << fmt(student3_convolution_density_at_zero(n, an_sigma)) << ','
                        << fmt(student3_convolution_density_asymptotic(n, an_sigma)) << '\n';
            } else if (which == "n0") {
                out << "c_over_sigma,n0\n";
                for (const double c : an_c) {
                    const auto n0 = crossover_n0(c);
                    out << fmt(c) << ',' << (n0 ? std::to_string(*n0) : std::string("none")) << '\n';
                }
            } else {
                out << "c_over_sigma,gaussian,student3,gaussian_out_of_regime,student3_out_of_regime\n";
                for (const double c : an_c) {
                    const auto g = large_drift_record_rate(RateDistribution::gaussian, c);
                    const auto t = large_drift_record_rate(RateDistribution::student3, c);
                    out << fmt(c) << ',' << fmt(g.rate) << ',' << fmt(t.rate) << ',' << g.out_of_regime << ','
                        << t.out_of_regime << '\n';
                }
            }
        }
    } catch (const FormatError& e) {
        std::cerr << "error: code=table message=" << e.what() << '\n';
        return kTable;
    } catch (const BudgetError& e) {
        std::cerr << "error: code=budget message=" << e.what() << '\n';
        return kBudget;
    } catch (const InputError& e) {
        std::cerr << "error: code=input message=" << e.what() << '\n';
        return kInput;
    } catch (const NumericError& e) {
        std::cerr << "error: code=numeric message=" << e.what() << '\n';
        return kNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: code=other message=" << e.what() << '\n';
        return kOther;
    }
    return kOk;
}
