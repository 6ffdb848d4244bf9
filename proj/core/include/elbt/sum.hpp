#pragma once

#include <cmath>

namespace elbt {

/// Neumaier-compensated running sum. Callers feed terms in account-id order,
/// so results are reproducible bit-for-bit across runs and platforms.
class Sum {
public:
    Sum& operator+=(double x) noexcept {
        const double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
        return *this;
    }

    Sum& operator-=(double x) noexcept { return *this += -x; }

    [[nodiscard]] double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// |a - b| <= rel_tol * max(|a|, |b|, scale). `scale` keeps the comparison
/// meaningful when both sides are near zero but the inputs were not.
inline bool nearly_equal(double a, double b, double rel_tol, double scale = 1.0) noexcept {
    const double mag = std::fmax(std::fmax(std::fabs(a), std::fabs(b)), scale);
    return std::fabs(a - b) <= rel_tol * mag;
}

inline constexpr double kDefaultTolerance = 1e-9;

}  // namespace elbt
