#include "coca/version.hpp"

namespace coca {

std::string_view library_version() noexcept { return COCA_VERSION; }

}  // namespace coca
