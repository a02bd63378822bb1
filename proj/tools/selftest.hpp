#pragma once

#include <ostream>

namespace upb::tools {

// Quick oracle checks; one PASS/FAIL line each. True when all pass.
bool run_selftest(std::ostream& out);

} // namespace upb::tools
