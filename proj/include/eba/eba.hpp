#pragma once

#include "eba/bessel.hpp"
#include "eba/bounds.hpp"
#include "eba/checkpoint.hpp"
#include "eba/config.hpp"
#include "eba/dynamics.hpp"
#include "eba/error.hpp"
#include "eba/format.hpp"
#include "eba/inequalities.hpp"
#include "eba/instability.hpp"
#include "eba/lyapunov.hpp"
#include "eba/parallel.hpp"
#include "eba/spectral.hpp"
#include "eba/verify.hpp"
