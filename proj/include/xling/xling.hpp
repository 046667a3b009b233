#pragma once

#include "xling/errors.hpp"    // IWYU pragma: export
#include "xling/unicode.hpp"   // IWYU pragma: export
#include "xling/formats.hpp"   // IWYU pragma: export
#include "xling/spanmark.hpp"  // IWYU pragma: export
#include "xling/segment.hpp"   // IWYU pragma: export
#include "xling/backend.hpp"   // IWYU pragma: export
#include "xling/pipeline.hpp"  // IWYU pragma: export
#include "xling/costmodel.hpp" // IWYU pragma: export
#include "xling/metrics.hpp"   // IWYU pragma: export
