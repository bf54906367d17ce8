#pragma once

#include "attrib/core.hpp"
#include "attrib/data.hpp"
#include "attrib/decomp.hpp"
#include "attrib/models.hpp"
#include "attrib/report.hpp"
