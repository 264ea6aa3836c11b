// sdcx.hpp - umbrella header for the congruence toolkit.
#pragma once

#include "matcore.hpp"
#include "canonical.hpp"
#include "sdc.hpp"
#include "jordan.hpp"
#include "toeplitz.hpp"
#include "asdc.hpp"
#include "triple.hpp"
#include "rsdc.hpp"
#include "obstruct.hpp"
#include "qcqp.hpp"
#include "io.hpp"
