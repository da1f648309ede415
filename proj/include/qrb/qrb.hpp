#pragma once

#include "qrb/errors.hpp"
#include "qrb/model.hpp"
#include "qrb/dissipation.hpp"
#include "qrb/steady_state.hpp"
#include "qrb/correlations.hpp"
#include "qrb/crossing.hpp"
#include "qrb/sweep.hpp"
#include "qrb/io.hpp"
