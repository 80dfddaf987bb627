#pragma once

#include "dcfcap/capture.hpp"
#include "dcfcap/dcf_analytic.hpp"
#include "dcfcap/dcf_sim.hpp"
#include "dcfcap/error.hpp"
#include "dcfcap/experiments.hpp"
#include "dcfcap/mac_params.hpp"
#include "dcfcap/markov_chain.hpp"
#include "dcfcap/parallel.hpp"
#include "dcfcap/phy_link.hpp"
#include "dcfcap/reproduce.hpp"
#include "dcfcap/rng.hpp"
#include "dcfcap/units.hpp"
#include "dcfcap/validate.hpp"
