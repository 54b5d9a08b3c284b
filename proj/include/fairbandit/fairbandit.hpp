#ifndef FAIRBANDIT_FAIRBANDIT_HPP
#define FAIRBANDIT_FAIRBANDIT_HPP

#include "fairbandit/agent.hpp"
#include "fairbandit/environment.hpp"
#include "fairbandit/harness.hpp"
#include "fairbandit/oracle.hpp"
#include "fairbandit/output.hpp"
#include "fairbandit/reward_matrix.hpp"
#include "fairbandit/rng.hpp"

#endif  // FAIRBANDIT_FAIRBANDIT_HPP
