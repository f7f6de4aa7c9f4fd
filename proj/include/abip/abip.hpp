#ifndef ABIP_ABIP_HPP
#define ABIP_ABIP_HPP

#include "abip/bench.hpp"
#include "abip/cones.hpp"
#include "abip/core.hpp"
#include "abip/hsd.hpp"
#include "abip/precond.hpp"
#include "abip/problems/generators.hpp"
#include "abip/problems/json_io.hpp"
#include "abip/problems/mps.hpp"
#include "abip/solver.hpp"
#include "abip/sparse_linalg.hpp"

#endif // ABIP_ABIP_HPP
