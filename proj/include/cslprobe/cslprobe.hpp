#ifndef CSLPROBE_CSLPROBE_HPP
#define CSLPROBE_CSLPROBE_HPP

#include "config.hpp"
#include "constants.hpp"
#include "dynamics.hpp"
#include "entanglement.hpp"
#include "error.hpp"
#include "hash.hpp"
#include "noise.hpp"
#include "output.hpp"
#include "params.hpp"
#include "sweep.hpp"

#endif // CSLPROBE_CSLPROBE_HPP
