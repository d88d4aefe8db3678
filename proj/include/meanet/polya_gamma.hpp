#pragma once

#include "meanet/philox.hpp"

namespace meanet {

enum class PgMethod {
    devroye,    // exact alternating-series rejection sampler
    truncated   // 200-term series with analytic tail-mean correction
};

// E[PG(1, c)] = tanh(c/2) / (2c), with the limit 1/4 at c = 0.
double polya_gamma_mean(double c);

// One draw from PG(1, c). Strictly positive. |c| beyond 1400 is clamped
// (the tilting factor exp(-c^2 x / 8) degenerates there; the distribution
// is already concentrated below 1e-3).
double sample_polya_gamma(double c, RngStream& rng, PgMethod method = PgMethod::devroye);

} // namespace meanet
