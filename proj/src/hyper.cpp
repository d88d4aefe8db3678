#include "meanet/hyper.hpp"

#include <cmath>

#include "meanet/errors.hpp"

namespace meanet {

void HyperParams::validate() const {
    if (!(rho >= 0.0 && rho <= 1.0)) throw config_error("rho must lie in [0,1]");
    if (!(tau_ms > 0.0) || !std::isfinite(tau_ms)) throw config_error("tau_ms must be positive");
    if (window_bins < 1) throw config_error("window_bins must be >= 1");
    if (!(niw_kappa > 0.0)) throw config_error("niw_kappa must be positive");
    if (!(niw_scale > 0.0)) throw config_error("niw_scale must be positive");
    if (!(niw_dof > 2.0)) throw config_error("niw_dof must exceed 2 for scalar weights");
    if (!(s_w > 0.0)) throw config_error("s_w must be positive");
    if (!(s_b > 0.0)) throw config_error("s_b must be positive");
    if (!std::isfinite(mu_w) || !std::isfinite(mu_b))
        throw config_error("prior means must be finite");
}

} // namespace meanet
