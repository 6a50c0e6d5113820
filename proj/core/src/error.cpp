#include "coca/error.hpp"

namespace coca {

DegenerateColumn::DegenerateColumn(std::size_t column)
    : Error("DegenerateColumn",
            "column " + std::to_string(column) + " is constant"),
      column_(column) {}

}  // namespace coca
