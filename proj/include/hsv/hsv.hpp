#pragma once

// Everything: expressions, programs, proof tactics, model files and the driver.
#include <hsv/arith.hpp>
#include <hsv/deriv.hpp>
#include <hsv/driver.hpp>
#include <hsv/expr.hpp>
#include <hsv/model.hpp>
#include <hsv/program.hpp>
#include <hsv/simulate.hpp>
#include <hsv/store.hpp>
#include <hsv/tactics.hpp>
#include <hsv/vcg.hpp>
