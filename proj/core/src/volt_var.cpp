#include "gridfit/volt_var.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "gridfit/errors.hpp"

namespace gridfit {

void VoltVarCurve::validate() const {
    if (!(v_low < v1 && v1 < v2 && v2 < v3 && v3 < v4 && v4 < v_high))
        throw ConfigError("VoltVarCurve: breakpoints must satisfy v_low < v1 < v2 < v3 < v4 < v_high");
    if (!(q1 >= q2 && q2 >= q3 && q3 >= q4))
        throw ConfigError("VoltVarCurve: reactive setpoints must be non-increasing");
}

double volt_var_q(double v_pu, const VoltVarCurve& c, bool* ride_through) {
    if (ride_through) *ride_through = false;
    if (v_pu < c.v_low) {
        if (ride_through) *ride_through = true;
        return c.q1;
    }
    if (v_pu >= c.v_high) {
        if (ride_through) *ride_through = true;
        return c.q4;
    }
    if (v_pu < c.v1) return c.q1;
    if (v_pu < c.v2) return c.q1 + (c.q2 - c.q1) / (c.v2 - c.v1) * (v_pu - c.v1);
    if (v_pu < c.v3) return c.q2 + (c.q3 - c.q2) / (c.v3 - c.v2) * (v_pu - c.v2);
    if (v_pu < c.v4) return c.q3 + (c.q4 - c.q3) / (c.v4 - c.v3) * (v_pu - c.v3);
    return c.q4;
}

double q_reference(double q_curve_kvar, double p_inv_kw, double s_kva) {
    if (!(s_kva > 0.0)) throw std::domain_error("q_reference: apparent power rating must be positive");
    if (std::abs(p_inv_kw) > s_kva)
        throw std::domain_error("q_reference: |P|=" + std::to_string(p_inv_kw) +
                                " kW exceeds rating " + std::to_string(s_kva) + " kVA");
    const double headroom = std::sqrt(s_kva * s_kva - p_inv_kw * p_inv_kw);
    return std::copysign(std::min(std::abs(q_curve_kvar), headroom), q_curve_kvar);
}

}  // namespace gridfit
