#pragma once

#include "tzclock/harness/config.hpp"
#include "tzclock/harness/experiments.hpp"
#include "tzclock/harness/output.hpp"
#include "tzclock/harness/plot_data.hpp"
#include "tzclock/harness/report.hpp"
#include "tzclock/harness/result_table.hpp"
#include "tzclock/harness/selftest.hpp"
