#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace ghzres {

/// All physical rates, units 1/time. Builders validate the subset they need.
struct RateSet {
    double kappa_u = 0.0;
    double kappa_d = 0.0;
    double kappa_t = 0.0;
    double kappa_st = 0.0;
    double kappa_r = 0.0;
    double kappa_c = 0.0;
    double kappa_f = 0.0;
    double kappa_x = 0.0;
    double kappa_z = 0.0;
    double kappa_p = 0.0;

    void validate() const {
        for (double v : {kappa_u, kappa_d, kappa_t, kappa_st, kappa_r, kappa_c, kappa_f,
                         kappa_x, kappa_z, kappa_p})
            if (!(v >= 0.0) || !std::isfinite(v))
                throw std::invalid_argument("rates must be finite and >= 0");
    }
};

namespace detail {
inline void require_positive(double v, const char* name) {
    if (!(v > 0.0)) throw std::invalid_argument(std::string(name) + " must be > 0");
}
} // namespace detail

} // namespace ghzres
