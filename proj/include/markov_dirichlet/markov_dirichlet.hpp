#pragma once

#include "common.hpp"
#include "parallel.hpp"
#include "geometry.hpp"
#include "field.hpp"
#include "kernel.hpp"
#include "conditions.hpp"
#include "solver.hpp"
#include "algebra.hpp"
#include "oracle.hpp"
#include "io.hpp"
#include "config.hpp"
#include "commands.hpp"
