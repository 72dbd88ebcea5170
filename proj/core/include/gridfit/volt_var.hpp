#pragma once

namespace gridfit {

/// IEEE 1547-style Volt-VAr characteristic: four breakpoints between the
/// continuous-operation limits [v_low, v_high], reactive setpoints q1..q4
/// (kVAr, injection positive). Segments interpolate linearly; the middle
/// segment runs q2 -> q3, which is the flat zero dead band whenever
/// q2 == q3 == 0 (the standard configuration).
struct VoltVarCurve {
    double v_low = 0.88;   // V_L
    double v1 = 0.92;
    double v2 = 0.98;
    double v3 = 1.02;
    double v4 = 1.08;
    double v_high = 1.10;  // V_H
    double q1 = 6.25;      // kVAr at low voltage (injection)
    double q2 = 0.0;
    double q3 = 0.0;
    double q4 = -6.25;     // kVAr at high voltage (absorption)

    bool has_standard_deadband() const { return q2 == 0.0 && q3 == 0.0; }

    /// Throws ConfigError unless v_low < v1 < v2 < v3 < v4 < v_high and
    /// q1 >= q2 >= q3 >= q4.
    void validate() const;
};

/// Piecewise-linear curve evaluation. Inside [v_low, v_high) this is the
/// exact characteristic; outside, the nearest endpoint value is returned and
/// *ride_through (when non-null) is set, standing in for the disabled
/// ride-through function.
double volt_var_q(double v_pu, const VoltVarCurve& curve, bool* ride_through = nullptr);

/// Capability-circle limit on the curve demand: keeps |Q| within
/// sqrt(S^2 - P^2), preserving sign. Throws std::domain_error when |p| > s.
double q_reference(double q_curve_kvar, double p_inv_kw, double s_kva);

}  // namespace gridfit
