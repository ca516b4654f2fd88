#pragma once

#include "nmr/arclength.hpp"
#include "nmr/attention.hpp"
#include "nmr/bernstein.hpp"
#include "nmr/config.hpp"
#include "nmr/coplanarity.hpp"
#include "nmr/errors.hpp"
#include "nmr/inversion.hpp"
#include "nmr/loss.hpp"
#include "nmr/pipeline.hpp"
#include "nmr/sampler.hpp"
#include "nmr/sog_io.hpp"
#include "nmr/surface.hpp"
#include "nmr/surface_io.hpp"
