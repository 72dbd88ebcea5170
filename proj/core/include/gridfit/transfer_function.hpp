#pragma once

#include <span>
#include <vector>

namespace gridfit {

/// Discrete transfer function
///
///   Y(z)   b0 + b1 z^-1 + ... + bm z^-m
///   ---- = -----------------------------
///   U(z)   1 + a1 z^-1 + ... + an z^-n
///
/// `b` holds b0..bm, `a` holds a1..an (the leading 1 is implicit). `a` may be
/// empty for a pure FIR/gain. Stability is queryable but never enforced.
struct DiscreteTransferFunction {
    std::vector<double> b;
    std::vector<double> a;
    double ts = 1.0;  // sampling time, s

    int numerator_order() const { return static_cast<int>(b.size()) - 1; }
    int denominator_order() const { return static_cast<int>(a.size()); }

    /// Largest pole magnitude (0 when there are no poles).
    double max_pole_radius() const;
    bool is_stable() const { return max_pole_radius() < 1.0; }

    void validate() const;
};

/// Free-run simulation of the difference-equation recursion: each output is
/// computed from *previously simulated* outputs, never from measurements.
/// `y_init` seeds y(-n)..y(-1) and must be empty (zeros) or of length n;
/// inputs before the start are taken as zero. Throws NumericBlowupError
/// naming the largest pole radius if the recursion leaves the finite range.
std::vector<double> simulate_tf(const DiscreteTransferFunction& tf,
                                std::span<const double> u,
                                std::span<const double> y_init = {});

}  // namespace gridfit
