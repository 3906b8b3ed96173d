#pragma once

#include "sgm/barriers.hpp"
#include "sgm/config.hpp"
#include "sgm/error.hpp"
#include "sgm/grid.hpp"
#include "sgm/io.hpp"
#include "sgm/nonlinearity.hpp"
#include "sgm/operator.hpp"
#include "sgm/pipeline.hpp"
#include "sgm/solver.hpp"
#include "sgm/verify.hpp"
