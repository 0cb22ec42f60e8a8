#ifndef QCHOM_QCHOM_HPP
#define QCHOM_QCHOM_HPP

#include "qchom/cellsolve.hpp"
#include "qchom/effective.hpp"
#include "qchom/ergodic.hpp"
#include "qchom/errors.hpp"
#include "qchom/fft.hpp"
#include "qchom/field.hpp"
#include "qchom/finescale.hpp"
#include "qchom/generators.hpp"
#include "qchom/grid.hpp"
#include "qchom/material.hpp"
#include "qchom/operators.hpp"
#include "qchom/pipeline.hpp"
#include "qchom/projection.hpp"
#include "qchom/quadext.hpp"

#endif
