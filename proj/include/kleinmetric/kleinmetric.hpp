#ifndef KLEINMETRIC_KLEINMETRIC_HPP
#define KLEINMETRIC_KLEINMETRIC_HPP

#include "kleinmetric/common.hpp"
#include "kleinmetric/evolution.hpp"
#include "kleinmetric/feshbach_villars.hpp"
#include "kleinmetric/lattice.hpp"
#include "kleinmetric/metric.hpp"

#endif  // KLEINMETRIC_KLEINMETRIC_HPP
