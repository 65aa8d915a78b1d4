#pragma once

#include "pecert/activation.hpp"
#include "pecert/config.hpp"
#include "pecert/error.hpp"
#include "pecert/excitation.hpp"
#include "pecert/geometry.hpp"
#include "pecert/io.hpp"
#include "pecert/linalg.hpp"
#include "pecert/mrac.hpp"
#include "pecert/simplex.hpp"
#include "pecert/trajectory.hpp"
