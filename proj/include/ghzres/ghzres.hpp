// Umbrella header.
#pragma once

#include "ghzres/core.hpp"
#include "ghzres/rates.hpp"
#include "ghzres/lindblad.hpp"
#include "ghzres/catalog.hpp"
#include "ghzres/steady_state.hpp"
#include "ghzres/ctmc.hpp"
#include "ghzres/clock_chain.hpp"
#include "ghzres/signal_chain.hpp"
#include "ghzres/qutrit_chain.hpp"
#include "ghzres/tuning.hpp"
#include "ghzres/experiment.hpp"
