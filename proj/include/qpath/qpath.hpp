#pragma once

#include "qpath/analysis.hpp"
#include "qpath/detector.hpp"
#include "qpath/dynamics.hpp"
#include "qpath/errors.hpp"
#include "qpath/io.hpp"
#include "qpath/mlp.hpp"
#include "qpath/params.hpp"
#include "qpath/rng.hpp"
#include "qpath/simulator.hpp"
