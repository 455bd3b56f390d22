#pragma once

#include "tzclock/angles.hpp"
#include "tzclock/errors.hpp"
#include "tzclock/estimation.hpp"
#include "tzclock/least_squares.hpp"
#include "tzclock/multi_ensemble.hpp"
#include "tzclock/noise.hpp"
#include "tzclock/phase_inversion.hpp"
#include "tzclock/qubit.hpp"
#include "tzclock/random.hpp"
#include "tzclock/sequence.hpp"
#include "tzclock/sequence_io.hpp"
#include "tzclock/simulator.hpp"
#include "tzclock/special_functions.hpp"
