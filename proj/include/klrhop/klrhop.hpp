#pragma once

#include "klrhop/core_model.hpp"
#include "klrhop/dynamics.hpp"
#include "klrhop/errors.hpp"
#include "klrhop/io.hpp"
#include "klrhop/kernel.hpp"
#include "klrhop/landscape.hpp"
#include "klrhop/spectral.hpp"
#include "klrhop/stats.hpp"
#include "klrhop/sweep.hpp"
#include "klrhop/trainer.hpp"
