#pragma once

#include <cmath>
#include <span>

#include "pra/common.hpp"

namespace pra {

// Neumaier-compensated accumulator.
class Kahan {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double lchoose(double n, double k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// Generalized binomial C(t,d) = t(t-1)...(t-d+1)/d! for real t, in log space.
// Requires d >= 0 and t > d - 1 so every factor is positive.
inline double ln_gen_binomial(double t, int d) {
    if (d < 0) throw ArgumentError("ln_gen_binomial: d must be nonnegative");
    if (d == 0) return 0.0;
    if (!(t > double(d) - 1.0))
        throw ArgumentError("ln_gen_binomial: requires t > d-1");
    double s = 0.0;
    for (int u = 0; u < d; ++u) s += std::log(t - u);
    return s - std::lgamma(double(d) + 1.0);
}

inline double gen_binomial(double t, int d) { return std::exp(ln_gen_binomial(t, d)); }

// P(Binomial(n, p) > c), summed in linear space around the leading term.
double binomial_upper_tail(long long n, double p, long long c);

// Chi-square upper quantile (Wilson-Hilferty), good to a few percent.
double chi_square_quantile(double p, int dof);

} // namespace pra
