#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "recsharpe/errors.hpp"

namespace recsharpe {

// Truncated power series sum_{k < order} c_k z^k over any field-like scalar
// (double, boost::multiprecision::cpp_rational, ...). All operations keep the
// truncation order of their operands.
template <typename Scalar>
class PowerSeries {
public:
    PowerSeries() = default;
    explicit PowerSeries(std::vector<Scalar> coefficients) : c_(std::move(coefficients)) {}
    explicit PowerSeries(std::size_t order) : c_(order, Scalar(0)) {}

    std::size_t order() const noexcept { return c_.size(); }
    const Scalar& operator[](std::size_t k) const { return c_[k]; }
    Scalar& operator[](std::size_t k) { return c_[k]; }
    const std::vector<Scalar>& coefficients() const noexcept { return c_; }

    // (1 - z)^k for integer k >= 0, truncated.
    static PowerSeries one_minus_z_pow(std::size_t k, std::size_t order) {
        PowerSeries out(order);
        // Binomial coefficients with alternating sign.
        Scalar coef(1);
        for (std::size_t j = 0; j <= k && j < order; ++j) {
            out[j] = (j % 2 == 0) ? coef : Scalar(-coef);
            coef = coef * Scalar(static_cast<long>(k - j)) / Scalar(static_cast<long>(j + 1));
        }
        return out;
    }

    friend PowerSeries operator*(const PowerSeries& a, const PowerSeries& b) {
        const std::size_t order = std::min(a.order(), b.order());
        PowerSeries out(order);
        for (std::size_t i = 0; i < order; ++i) {
            if (a.c_[i] == Scalar(0)) continue;
            for (std::size_t j = 0; i + j < order; ++j) out.c_[i + j] += a.c_[i] * b.c_[j];
        }
        return out;
    }

    friend PowerSeries operator+(PowerSeries a, const PowerSeries& b) {
        a.c_.resize(std::min(a.order(), b.order()));
        for (std::size_t i = 0; i < a.order(); ++i) a.c_[i] += b.c_[i];
        return a;
    }

    PowerSeries scaled(const Scalar& factor) const {
        PowerSeries out = *this;
        for (auto& x : out.c_) x = x * factor;
        return out;
    }

    // Multiplicative inverse; needs a nonzero constant term.
    PowerSeries inverse() const {
        if (c_.empty() || c_[0] == Scalar(0)) throw NumericError("power series with zero constant term is not invertible");
        PowerSeries out(order());
        out.c_[0] = Scalar(1) / c_[0];
        for (std::size_t n = 1; n < order(); ++n) {
            Scalar acc(0);
            for (std::size_t k = 1; k <= n; ++k) acc += c_[k] * out.c_[n - k];
            out.c_[n] = -acc / c_[0];
        }
        return out;
    }

    // exp of a series with zero constant term, via n e_n = sum_k k a_k e_{n-k}.
    PowerSeries exp() const {
        if (!c_.empty() && c_[0] != Scalar(0)) throw InputError("exp needs a series with zero constant term");
        PowerSeries out(order());
        if (order() == 0) return out;
        out.c_[0] = Scalar(1);
        for (std::size_t n = 1; n < order(); ++n) {
            Scalar acc(0);
            for (std::size_t k = 1; k <= n; ++k) acc += Scalar(static_cast<long>(k)) * c_[k] * out.c_[n - k];
            out.c_[n] = acc / Scalar(static_cast<long>(n));
        }
        return out;
    }

    // Integer power by repeated multiplication.
    PowerSeries pow(std::size_t k) const {
        PowerSeries out(order());
        if (order() > 0) out.c_[0] = Scalar(1);
        for (std::size_t i = 0; i < k; ++i) out = out * *this;
        return out;
    }

private:
    std::vector<Scalar> c_;
};

} // namespace recsharpe
