#pragma once

#include <iosfwd>
#include <utility>

#include "bloomseg/types.hpp"

namespace bloomseg {

/// Scores behind `--scorer oracle`: brightness of the darkest channel, so white and
/// pale flowers score high and saturated foliage low. m_F = 8 (min(r, g, b) / 255 - 0.5), m_B = 0.
std::pair<double, double> whiteness_score(Rgb pixel) noexcept;

/// Entry point shared by the executable and the tests. Returns the process exit status.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace bloomseg
