#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <boost/crc.hpp>

#include "recsharpe/calibration.hpp"
#include "recsharpe/errors.hpp"

namespace recsharpe {

namespace {

constexpr const char* kMagic = "recsharpe-calibration-table";

std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

double parse_double(const std::string& token) {
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (token.empty() || *end != '\0') throw FormatError("bad number '" + token + "' in calibration table");
    return v;
}

std::size_t parse_count(const std::string& token) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(token.c_str(), &end, 10);
    if (token.empty() || *end != '\0') throw FormatError("bad integer '" + token + "' in calibration table");
    return static_cast<std::size_t>(v);
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(line);
    while (std::getline(is, cur, sep)) out.push_back(cur);
    return out;
}

std::string crc_hex(const std::string& payload) {
    boost::crc_32_type crc;
    crc.process_bytes(payload.data(), payload.size());
    std::ostringstream os;
    os << std::hex << std::setw(8) << std::setfill('0') << crc.checksum();
    return os.str();
}

// Line cursor over the payload with keyed-line helpers.
class Reader {
public:
    explicit Reader(std::vector<std::string> lines) : lines_(std::move(lines)) {}

    const std::string& next() {
        if (pos_ >= lines_.size()) throw FormatError("calibration table is truncated");
        return lines_[pos_++];
    }

    std::vector<std::string> keyed(const std::string& key) {
        auto tokens = split(next(), ' ');
        if (tokens.empty() || tokens[0] != key) throw FormatError("expected '" + key + "' in calibration table");
        tokens.erase(tokens.begin());
        return tokens;
    }

    std::string single(const std::string& key) {
        const auto tokens = keyed(key);
        if (tokens.size() != 1) throw FormatError("expected one value for '" + key + "'");
        return tokens[0];
    }

    std::vector<std::string> row(std::size_t fields) {
        auto tokens = split(next(), ',');
        if (tokens.size() != fields) throw FormatError("malformed row in calibration table");
        return tokens;
    }

private:
    std::vector<std::string> lines_;
    std::size_t pos_ = 0;
};

} // namespace

std::string CalibrationTable::payload() const {
    std::ostringstream os;
    os << "master_seed " << provenance_.master_seed << '\n';
    os << "n_avg " << provenance_.n_avg << '\n';
    os << "permutations " << provenance_.permutations << '\n';
    os << "grid_n";
    for (const auto n : grid_.n) os << ' ' << n;
    os << "\ngrid_theta";
    for (const auto t : grid_.theta) os << ' ' << format_double(t);
    os << "\ngrid_nu";
    for (const auto nu : grid_.nu) os << ' ' << format_double(nu);
    os << "\nsurface " << rows_.size() << "\nn,nu,theta,mean_r0,stderr_r0\n";
    for (const auto& r : rows_)
        os << r.n << ',' << format_double(r.nu) << ',' << format_double(r.theta) << ',' << format_double(r.mean_r0)
           << ',' << format_double(r.stderr_r0) << '\n';
    os << "fits " << fits_.size() << "\nr0,n,a,b,p_value_b,mean_sq_residual,clamped,accepted\n";
    for (const auto& f : fits_)
        os << format_double(f.r0) << ',' << f.n << ',' << format_double(f.a) << ',' << format_double(f.b) << ','
           << format_double(f.p_value_b) << ',' << format_double(f.mean_sq_residual) << ',' << int(f.clamped)
           << ',' << int(f.accepted) << '\n';
    if (simplified_) {
        os << "a_curve " << simplified_->groups.size() << '\n';
        os << "fits_used " << simplified_->fits_used << '\n';
        os << "b_over_a_slope " << format_double(simplified_->b_over_a_slope) << "\nr,a\n";
        for (const auto& [r, a] : simplified_->groups) os << format_double(r) << ',' << format_double(a) << '\n';
    } else {
        os << "a_curve 0\n";
        os << "simplified_error " << (simplified_error_.empty() ? "-" : simplified_error_) << '\n';
    }
    os << "end\n";
    return os.str();
}

std::string CalibrationTable::checksum() const { return crc_hex(payload()); }

void CalibrationTable::save(std::ostream& out) const {
    const std::string body = payload();
    out << kMagic << '\n'
        << "version " << kTableFormatVersion << '\n'
        << "checksum " << crc_hex(body) << '\n'
        << "built_at " << (provenance_.built_at.empty() ? "-" : provenance_.built_at) << '\n'
        << body;
    if (!out) throw FormatError("failed to write calibration table");
}

void CalibrationTable::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open " + path + " for writing");
    save(out);
}

CalibrationTable CalibrationTable::load(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kMagic) throw FormatError("not a calibration table (bad magic line)");
    if (!std::getline(in, line) || line.rfind("version ", 0) != 0) throw FormatError("calibration table has no version");
    const std::string version = line.substr(8);
    if (version != std::to_string(kTableFormatVersion))
        throw FormatError("calibration table version " + version + " is not supported (expected " +
                          std::to_string(kTableFormatVersion) + ")");
    if (!std::getline(in, line) || line.rfind("checksum ", 0) != 0) throw FormatError("calibration table has no checksum");
    const std::string expected = line.substr(9);
    if (!std::getline(in, line) || line.rfind("built_at ", 0) != 0) throw FormatError("calibration table has no built_at");
    std::string built_at = line.substr(9);
    if (built_at == "-") built_at.clear();

    std::ostringstream body;
    body << in.rdbuf();
    const std::string payload = body.str();
    if (crc_hex(payload) != expected) throw FormatError("calibration table checksum mismatch (corrupt or truncated file)");

    std::vector<std::string> lines = split(payload, '\n');
    Reader reader(std::move(lines));
    CalibrationTable table;
    table.provenance_.built_at = std::move(built_at);
    table.provenance_.master_seed = std::stoull(reader.single("master_seed"));
    table.provenance_.n_avg = parse_count(reader.single("n_avg"));
    table.provenance_.permutations = parse_count(reader.single("permutations"));
    for (const auto& t : reader.keyed("grid_n")) table.grid_.n.push_back(parse_count(t));
    for (const auto& t : reader.keyed("grid_theta")) table.grid_.theta.push_back(parse_double(t));
    for (const auto& t : reader.keyed("grid_nu")) table.grid_.nu.push_back(parse_double(t));

    const std::size_t n_rows = parse_count(reader.single("surface"));
    reader.next();
    for (std::size_t i = 0; i < n_rows; ++i) {
        const auto f = reader.row(5);
        SurfaceRow r;
        r.n = parse_count(f[0]);
        r.nu = parse_double(f[1]);
        r.theta = parse_double(f[2]);
        r.mean_r0 = parse_double(f[3]);
        r.stderr_r0 = parse_double(f[4]);
        r.n_avg = table.provenance_.n_avg;
        r.permutations = table.provenance_.permutations;
        table.rows_.push_back(r);
    }
    if (table.rows_.size() != table.grid_.n.size() * table.grid_.nu.size() * table.grid_.theta.size())
        throw FormatError("calibration table surface does not match its grid");

    const std::size_t n_fits = parse_count(reader.single("fits"));
    reader.next();
    for (std::size_t i = 0; i < n_fits; ++i) {
        const auto f = reader.row(8);
        FitRecord fit;
        fit.r0 = parse_double(f[0]);
        fit.n = parse_count(f[1]);
        fit.a = parse_double(f[2]);
        fit.b = parse_double(f[3]);
        fit.p_value_b = parse_double(f[4]);
        fit.mean_sq_residual = parse_double(f[5]);
        fit.clamped = f[6] == "1";
        fit.accepted = f[7] == "1";
        table.fits_.push_back(fit);
    }

    const std::size_t n_groups = parse_count(reader.single("a_curve"));
    if (n_groups > 0) {
        const std::size_t used = parse_count(reader.single("fits_used"));
        const double slope = parse_double(reader.single("b_over_a_slope"));
        reader.next();
        std::vector<std::pair<double, double>> groups;
        for (std::size_t i = 0; i < n_groups; ++i) {
            const auto f = reader.row(2);
            groups.emplace_back(parse_double(f[0]), parse_double(f[1]));
        }
        table.simplified_ = simplified_curve_from_groups(std::move(groups), slope, used);
    } else {
        const std::string& err = reader.next();
        if (err.rfind("simplified_error ", 0) != 0) throw FormatError("expected 'simplified_error' in calibration table");
        table.simplified_error_ = err.substr(17);
        if (table.simplified_error_ == "-") table.simplified_error_.clear();
    }
    if (reader.next() != "end") throw FormatError("calibration table has trailing garbage before 'end'");
    table.build_slices();
    return table;
}

CalibrationTable CalibrationTable::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open calibration table " + path);
    return load(in);
}

} // namespace recsharpe
