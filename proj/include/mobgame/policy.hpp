#pragma once

#include <array>
#include <stdexcept>

namespace mobgame {

// Municipal control vector z = (tau_pt, tau_tx, lambda, sigma_pt, sigma_tx):
// revenue tax rates on both operators, the taxi license cap, and per-transfer
// integration subsidies paid to each operator.
struct Policy {
    double tau_pt = 0.0;
    double tau_tx = 0.0;
    double lambda = 1000.0;  // max taxi fleet size [veh]
    double sigma_pt = 0.0;   // subsidy per taxi->PT transfer [CHF]
    double sigma_tx = 0.0;   // subsidy per PT->taxi transfer [CHF]

    std::array<double, 5> to_vector() const { return {tau_pt, tau_tx, lambda, sigma_pt, sigma_tx}; }
    static Policy from_vector(const std::array<double, 5>& v) {
        return Policy{v[0], v[1], v[2], v[3], v[4]};
    }
};

struct PolicyBounds {
    double tau_pt_min = -1.0, tau_pt_max = 0.5;
    double tau_tx_min = 0.0, tau_tx_max = 0.5;
    double lambda_max = 1000.0;
    double sigma_pt_max = 20.0;
    double sigma_tx_max = 20.0;

    std::array<double, 5> lower() const { return {tau_pt_min, tau_tx_min, 0.0, 0.0, 0.0}; }
    std::array<double, 5> upper() const {
        return {tau_pt_max, tau_tx_max, lambda_max, sigma_pt_max, sigma_tx_max};
    }
    void check() const {
        if (tau_pt_min > tau_pt_max || tau_tx_min > tau_tx_max || lambda_max < 0.0 ||
            sigma_pt_max < 0.0 || sigma_tx_max < 0.0)
            throw std::invalid_argument("inconsistent policy bounds");
    }
};

// Weights of the municipal objective J = -w1*J_sw + w2*J_em - w3*J_rev and
// the monetized taxi emission factor. The sign structure rewards higher
// travel cost when w1 > 0; flip the sign of w1 (weights may be negative) to
// make lower system cost preferable.
struct MunicipalParams {
    double omega1 = 1.0;
    double omega2 = 1.0;
    double omega3 = 1.0;
    double emission_factor = 0.2;  // e [CHF/km]
};

// Componentwise clamp onto the policy box (exact Euclidean projection).
Policy project_policy(const Policy& z, const PolicyBounds& bounds);

bool policy_feasible(const Policy& z, const PolicyBounds& bounds, double tol = 1e-12);

}  // namespace mobgame
