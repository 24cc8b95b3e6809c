#pragma once

#include "enaqt/chain.hpp"
#include "enaqt/config.hpp"
#include "enaqt/dephasing_solver.hpp"
#include "enaqt/errors.hpp"
#include "enaqt/lindblad.hpp"
#include "enaqt/optimizer.hpp"
#include "enaqt/propagate.hpp"
#include "enaqt/random.hpp"
#include "enaqt/records_io.hpp"
#include "enaqt/redfield.hpp"
#include "enaqt/stats.hpp"
#include "enaqt/steady_state.hpp"
#include "enaqt/superoperator.hpp"
#include "enaqt/sweep.hpp"
