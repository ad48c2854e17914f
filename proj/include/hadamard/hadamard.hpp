#pragma once

#include "hadamard/errors.hpp"
#include "hadamard/geometry.hpp"
#include "hadamard/space.hpp"
#include "hadamard/serialize.hpp"
#include "hadamard/operators.hpp"
#include "hadamard/flows.hpp"
#include "hadamard/markov.hpp"
#include "hadamard/energy.hpp"
#include "hadamard/heat.hpp"
#include "hadamard/io.hpp"
#include "hadamard/config.hpp"
#include "hadamard/run.hpp"
