#include "meanet/polya_gamma.hpp"

#include <cmath>

#include "meanet/errors.hpp"

namespace meanet {

namespace {

constexpr double kPi = 3.14159265358979323846264338328;
constexpr double kTrunc = 0.64;  // proposal split point of the rejection sampler

// n-th alternating-series coefficient of the Jacobi density at x.
double series_coef(int n, double x) {
    const double k = n + 0.5;
    if (x <= kTrunc) {
        const double r = 2.0 / (kPi * x);
        return kPi * k * r * std::sqrt(r) * std::exp(-2.0 * k * k / x);
    }
    return kPi * k * std::exp(-0.5 * k * k * kPi * kPi * x);
}

double norm_cdf(double x) { return 0.5 * std::erfc(-x * 0.7071067811865475244); }

// P(IG(mu=1/z, lambda=1) <= x); the z=0 limit is valid.
double inv_gauss_cdf(double x, double z) {
    const double rx = 1.0 / std::sqrt(x);
    const double b = rx * (x * z - 1.0);
    const double a = rx * (x * z + 1.0);
    double tilt = 0.0;
    if (a < 37.0) tilt = std::exp(2.0 * z) * norm_cdf(-a);  // underflows to 0 past that
    return norm_cdf(b) + tilt;
}

// Inverse-Gaussian(1/z, 1) restricted to (0, kTrunc].
double truncated_inv_gauss(double z, RngStream& rng) {
    double x = kTrunc + 1.0;
    if (z < 1.0 / kTrunc) {
        // mean above the cut: sample 1/chi^2 tail proposals
        for (;;) {
            double e1, e2;
            do {
                e1 = rng.exponential();
                e2 = rng.exponential();
            } while (e1 * e1 > 2.0 * e2 / kTrunc);
            x = kTrunc / ((1.0 + kTrunc * e1) * (1.0 + kTrunc * e1));
            if (rng.uniform() <= std::exp(-0.5 * z * z * x)) return x;
        }
    }
    const double mu = 1.0 / z;
    while (x > kTrunc) {
        const double y = [&] {
            const double v = rng.normal();
            return v * v;
        }();
        const double muy = mu * y;
        x = mu + 0.5 * mu * (muy - std::sqrt(4.0 * muy + muy * muy));
        if (rng.uniform() > mu / (mu + x)) x = mu * mu / x;
    }
    return x;
}

// J*(1, z): the tilted Jacobi variable; PG(1, c) = J*(1, |c|/2) / 4.
double draw_jacobi(double z, RngStream& rng) {
    const double fz = 0.125 * kPi * kPi + 0.5 * z * z;
    const double p = 0.5 * kPi / fz * std::exp(-fz * kTrunc);
    const double q = 2.0 * std::exp(-z) * inv_gauss_cdf(kTrunc, z);
    const double head = (p + q > 0.0) ? p / (p + q) : 0.0;
    for (;;) {
        double x;
        if (rng.uniform() < head)
            x = kTrunc + rng.exponential() / fz;
        else
            x = truncated_inv_gauss(z, rng);
        double s = series_coef(0, x);
        const double y = rng.uniform() * s;
        for (int n = 1;; ++n) {
            if (n & 1) {
                s -= series_coef(n, x);
                if (y <= s) return x;
            } else {
                s += series_coef(n, x);
                if (y > s) break;
            }
        }
    }
}

double truncated_draw(double c, RngStream& rng) {
    constexpr int kTerms = 200;
    const double ratio = 0.5 * std::fabs(c) / kPi;
    const double shift = ratio * ratio;  // c^2 / (4 pi^2)
    double sum = 0.0;
    double partial_mean = 0.0;
    for (int k = 1; k <= kTerms; ++k) {
        const double den = (k - 0.5) * (k - 0.5) + shift;
        sum += rng.exponential() / den;
        partial_mean += 1.0 / den;
    }
    const double scale = 1.0 / (2.0 * kPi * kPi);
    // Replace the dropped terms by their exact expectation so the mean of the
    // approximation is the analytic PG mean.
    const double tail = std::max(polya_gamma_mean(c) - scale * partial_mean, 0.0);
    return scale * sum + tail;
}

} // namespace

double polya_gamma_mean(double c) {
    const double a = std::fabs(c);
    if (a < 1e-4) {
        const double u = 0.5 * a;
        return 0.25 - u * u / 12.0 + u * u * u * u / 30.0;
    }
    return 0.5 * std::tanh(0.5 * a) / a;
}

double sample_polya_gamma(double c, RngStream& rng, PgMethod method) {
    if (std::isnan(c)) throw numerical_error("Polya-Gamma tilt is NaN");
    if (method == PgMethod::truncated) return truncated_draw(c, rng);
    double z = 0.5 * std::fabs(c);
    if (z > 700.0) z = 700.0;
    return 0.25 * draw_jacobi(z, rng);
}

} // namespace meanet
