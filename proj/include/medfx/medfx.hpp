#pragma once

#include "medfx/bounds.hpp"
#include "medfx/dist.hpp"
#include "medfx/effects.hpp"
#include "medfx/errors.hpp"
#include "medfx/families.hpp"
#include "medfx/io.hpp"
#include "medfx/report.hpp"
#include "medfx/scm.hpp"
