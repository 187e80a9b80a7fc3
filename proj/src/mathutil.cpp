#include "pra/mathutil.hpp"

#include <algorithm>

namespace pra {

double binomial_upper_tail(long long n, double p, long long c) {
    if (p <= 0.0) return c < 0 ? 1.0 : 0.0;
    if (p >= 1.0) return c < n ? 1.0 : 0.0;
    if (c >= n) return 0.0;
    if (c < 0) return 1.0;

    const double lp = std::log(p), lq = std::log1p(-p);
    // Terms from j = c+1 upward, scaled by the first term.
    long long j0 = c + 1;
    double lfirst = lchoose(double(n), double(j0)) + double(j0) * lp + double(n - j0) * lq;
    Kahan sum;
    double term = 1.0;
    sum.add(term);
    for (long long j = j0 + 1; j <= n; ++j) {
        term *= double(n - j + 1) / double(j) * (p / (1.0 - p));
        sum.add(term);
        if (term < 1e-19 * sum.value()) break;
    }
    double v = std::exp(lfirst) * sum.value();
    return std::min(v, 1.0);
}

double chi_square_quantile(double p, int dof) {
    // Wilson-Hilferty cube approximation with a normal quantile via
    // Acklam's rational fit.
    auto norm_quantile = [](double q) {
        // coefficients for the central region
        static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
        static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
        static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
        static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
        const double plow = 0.02425, phigh = 1 - plow;
        double x;
        if (q < plow) {
            double u = std::sqrt(-2 * std::log(q));
            x = (((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
                ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1);
        } else if (q <= phigh) {
            double u = q - 0.5, r = u * u;
            x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * u /
                (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
        } else {
            double u = std::sqrt(-2 * std::log(1 - q));
            x = -(((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
                ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1);
        }
        return x;
    };
    double z = norm_quantile(p);
    double k = double(dof);
    double term = 1.0 - 2.0 / (9.0 * k) + z * std::sqrt(2.0 / (9.0 * k));
    return k * term * term * term;
}

} // namespace pra
