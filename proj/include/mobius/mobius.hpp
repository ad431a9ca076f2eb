#pragma once

#include "mobius/common.hpp"
#include "mobius/sampling.hpp"
#include "mobius/link_geometry.hpp"
#include "mobius/energy.hpp"
#include "mobius/conformal.hpp"
#include "mobius/canonical_family.hpp"
#include "mobius/sweepout.hpp"
#include "mobius/optimizer.hpp"
#include "mobius/io.hpp"
#include "mobius/verify.hpp"
