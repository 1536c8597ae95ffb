#pragma once

#include <span>

#include "btq/observable.hpp"
#include "btq/sections.hpp"

namespace btq {

struct VectorFieldComponents {
  Complex x_z{0, 0};
  Complex x_zbar{0, 0};
};

// Laplacian normalization Delta f = (kappa/rho) d_z d_zbar f.  kappa = 2 is
// the unique candidate in {+-1, +-2, +-4} for which the prequantum/Toeplitz
// relation in toeplitz.hpp is an identity; `btq calibrate` re-derives it at
// runtime.  With this value Delta is the Laplace-Beltrami operator of the
// metric omega(., J.), e.g. Delta x3 = -4 x3 on the sphere.
inline constexpr double kLaplaceKappa = 2.0;

// Solves omega(X_f, .) = df at p: X^z = -(i/rho) dbar f, X^zbar = (i/rho) d f.
VectorFieldComponents hamiltonian_field(const KahlerModel& model, const Observable& f,
                                        const ChartPoint& p);

// {f,g} = (i/rho)(dbar f dz g - dz f dbar g), computed symbolically; on the
// sphere 1/rho = s^{-2} keeps the result inside the observable algebra.
Observable poisson_bracket(const KahlerModel& model, const Observable& f, const Observable& g);

Observable laplacian(const KahlerModel& model, const Observable& f,
                     double kappa = kLaplaceKappa);

// Max of |f| over the grid; rejects observables that are not real-valued.
double sup_norm(const KahlerModel& model, const Observable& f,
                std::span<const ChartPoint> grid);

// Max over the grid of |d_zbar d_z log h-hat + rho|, i.e. the residual of the
// curvature condition relating the metric of the line bundle to the Kahler
// form (both sides as dz^dzbar coefficients, where the condition reads
// -d_zbar d_z log h-hat = rho).
double verify_quantization_condition(const KahlerModel& model, const MetricLog& mlog,
                                     std::span<const ChartPoint> grid);
double verify_quantization_condition(const KahlerModel& model, const MetricLog& mlog);

}  // namespace btq
