#pragma once

namespace meanet {

// Model priors and kernel settings. The NIW block (mean, kappa, scale, dof)
// governs hyperparameter resampling when it is enabled; mu_w/s_w/mu_b/s_b are
// the fixed-mode weight and bias priors used otherwise and as the starting
// values. Defaults: edge prior 0.5, tau 15 ms, 100-lag window, NIW(0,1,1,3),
// weight prior N(1,1), bias prior N(0,1).
struct HyperParams {
    double rho = 0.5;       // edge inclusion prior
    double tau_ms = 15.0;   // decay time constant of the history kernel
    int window_bins = 100;  // kernel truncation T

    double niw_mean = 0.0;   // m0
    double niw_kappa = 1.0;  // kappa0
    double niw_scale = 1.0;  // Psi (scalar; weights and biases are 1-D)
    double niw_dof = 3.0;    // nu

    double mu_w = 1.0;  // weight prior mean
    double s_w = 1.0;   // weight prior variance
    double mu_b = 0.0;  // bias prior mean
    double s_b = 1.0;   // bias prior variance

    void validate() const;  // throws config_error
};

} // namespace meanet
