#pragma once

#include "pups/archive.hpp"
#include "pups/batch.hpp"
#include "pups/dominance.hpp"
#include "pups/external_evaluator.hpp"
#include "pups/json_io.hpp"
#include "pups/optimizer.hpp"
#include "pups/preference.hpp"
#include "pups/problems.hpp"
#include "pups/session.hpp"
#include "pups/types.hpp"
#include "pups/ups.hpp"
#include "pups/variation.hpp"
