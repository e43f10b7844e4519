#ifndef AVERL_AVERL_HPP
#define AVERL_AVERL_HPP

#include "averl/advice.hpp"
#include "averl/ap.hpp"
#include "averl/automaton.hpp"
#include "averl/common.hpp"
#include "averl/env/cartpole.hpp"
#include "averl/env/env.hpp"
#include "averl/env/factory.hpp"
#include "averl/env/gridworld.hpp"
#include "averl/env/sweeping.hpp"
#include "averl/harness.hpp"
#include "averl/io.hpp"
#include "averl/learn.hpp"
#include "averl/mdp.hpp"
#include "averl/potential.hpp"
#include "averl/product.hpp"
#include "averl/solve.hpp"
#include "averl/stats.hpp"
#include "averl/winning.hpp"

#endif  // AVERL_AVERL_HPP
