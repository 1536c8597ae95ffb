#pragma once

#include <random>
#include <string>

#include "btq/toeplitz.hpp"

namespace btq {

// Deterministic generators for the randomized checks.  Observables are
// produced as expression strings in the CLI grammar so reports stay
// reproducible from their text form.
std::string random_observable_expression(ModelKind kind, std::mt19937_64& rng);
Matrix random_hermitian(std::mt19937_64& rng, int dim);

}  // namespace btq
