#pragma once

#include "gapforge/error.hpp"
#include "gapforge/graph.hpp"
#include "gapforge/catalog.hpp"
#include "gapforge/limit_model.hpp"
#include "gapforge/inverse_design.hpp"
#include "gapforge/fiber.hpp"
#include "gapforge/secular.hpp"
#include "gapforge/parallel.hpp"
#include "gapforge/band_scan.hpp"
#include "gapforge/calibration.hpp"
#include "gapforge/io.hpp"
