#ifndef REACHAVOID_REACHAVOID_HPP_
#define REACHAVOID_REACHAVOID_HPP_

#include "reachavoid/compare.hpp"
#include "reachavoid/eikonal.hpp"
#include "reachavoid/grid.hpp"
#include "reachavoid/io.hpp"
#include "reachavoid/matching.hpp"
#include "reachavoid/oracle.hpp"
#include "reachavoid/parallel.hpp"
#include "reachavoid/path_defense.hpp"
#include "reachavoid/scenario.hpp"
#include "reachavoid/simulation.hpp"

#endif  // REACHAVOID_REACHAVOID_HPP_
