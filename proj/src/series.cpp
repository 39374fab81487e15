#include "recsharpe/series.hpp"

#include <algorithm>
#include <cmath>

namespace recsharpe {

ReturnSeries::ReturnSeries(std::vector<double> values, std::string symbol,
                           std::vector<std::string> timestamps)
    : values_(std::move(values)), symbol_(std::move(symbol)), timestamps_(std::move(timestamps)) {
    if (values_.empty()) throw InputError("return series is empty");
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i]))
            throw InputError("return series has a non-finite value at index " + std::to_string(i));
    }
    if (!timestamps_.empty() && timestamps_.size() != values_.size())
        throw InputError("timestamps and values differ in length");
}

ReturnSeries ReturnSeries::negated() const {
    std::vector<double> v(values_.size());
    std::transform(values_.begin(), values_.end(), v.begin(), [](double x) { return -x; });
    return ReturnSeries(std::move(v), symbol_, timestamps_);
}

ReturnSeries ReturnSeries::scaled(double factor) const {
    std::vector<double> v(values_.size());
    std::transform(values_.begin(), values_.end(), v.begin(), [factor](double x) { return x * factor; });
    return ReturnSeries(std::move(v), symbol_, timestamps_);
}

PricePath PricePath::from_returns(std::span<const double> returns) {
    if (returns.empty()) throw InputError("cannot build a price path from an empty series");
    std::vector<double> levels(returns.size() + 1);
    levels[0] = 0.0;
    for (std::size_t k = 0; k < returns.size(); ++k) levels[k + 1] = levels[k] + returns[k];
    return PricePath(std::move(levels));
}

} // namespace recsharpe
