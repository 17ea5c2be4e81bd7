#pragma once

#include "gaugeflow/errors.hpp"
#include "gaugeflow/linalg.hpp"
#include "gaugeflow/finite_difference.hpp"
#include "gaugeflow/report.hpp"
#include "gaugeflow/gauge_model.hpp"
#include "gaugeflow/sternberg_geometry.hpp"
#include "gaugeflow/dirac_dynamics.hpp"
#include "gaugeflow/integrators.hpp"
#include "gaugeflow/scenarios.hpp"
#include "gaugeflow/registry.hpp"
