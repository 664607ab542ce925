#pragma once

#include "pomdpgeo/critical.hpp"
#include "pomdpgeo/errors.hpp"
#include "pomdpgeo/freq.hpp"
#include "pomdpgeo/geometry.hpp"
#include "pomdpgeo/io.hpp"
#include "pomdpgeo/model.hpp"
#include "pomdpgeo/projection.hpp"
#include "pomdpgeo/random.hpp"
#include "pomdpgeo/rational.hpp"
