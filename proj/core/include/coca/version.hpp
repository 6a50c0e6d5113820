#pragma once

#include <string_view>

namespace coca {

[[nodiscard]] std::string_view library_version() noexcept;

}  // namespace coca
