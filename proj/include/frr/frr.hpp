#pragma once

#include "frr/adm.hpp"
#include "frr/closed_form.hpp"
#include "frr/error.hpp"
#include "frr/experiment.hpp"
#include "frr/feature_extract.hpp"
#include "frr/linalg.hpp"
#include "frr/matrix.hpp"
#include "frr/matrix_io.hpp"
#include "frr/prox.hpp"
#include "frr/seeding.hpp"
#include "frr/spectral.hpp"
#include "frr/synthgen.hpp"

namespace frr {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace frr
