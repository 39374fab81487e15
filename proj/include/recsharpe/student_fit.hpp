#pragma once

#include <span>
#include <stdexcept>
#include <string>

#include "recsharpe/errors.hpp"

namespace recsharpe {

inline constexpr double kNuFitMin = 2.05;
inline constexpr double kNuFitMax = 100.0;
inline constexpr std::size_t kNuFitMinLength = 20;

// Location-scale Student t maximum likelihood fit. When the profile
// likelihood peaks at the upper bound kNuFitMax the data are reported as
// Gaussian (nu = kNuFitMax, gaussian = true).
struct StudentFit {
    double nu = kNuFitMax;
    double location = 0.0;
    double scale = 1.0;
    double log_likelihood = 0.0;
    bool gaussian = false;
};

class StudentFitError : public NumericError {
public:
    StudentFitError(const std::string& what, StudentFit best) : NumericError(what), best_(best) {}
    const StudentFit& best_iterate() const noexcept { return best_; }

private:
    StudentFit best_;
};

// Log-likelihood of the location-scale t law.
double student_log_likelihood(std::span<const double> x, double nu, double location, double scale);

// Profile fit: for each nu, EM iterations maximize over (location, scale);
// nu is scanned on a log grid over [kNuFitMin, kNuFitMax] and refined by
// golden-section search. Throws InputError for n < 20 or zero dispersion and
// StudentFitError if EM fails to converge.
StudentFit fit_student_nu(std::span<const double> x);

} // namespace recsharpe
