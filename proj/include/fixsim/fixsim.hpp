#pragma once

#include "fixsim/errors.hpp"
#include "fixsim/scalar.hpp"
#include "fixsim/simplex_core.hpp"
#include "fixsim/labeling.hpp"
#include "fixsim/sperner_search.hpp"
#include "fixsim/fixed_point.hpp"
#include "fixsim/construction.hpp"
#include "fixsim/json_io.hpp"
#include "fixsim/mapspec.hpp"
#include "fixsim/svg.hpp"
