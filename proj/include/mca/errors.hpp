#pragma once

#include <stdexcept>
#include <string>

namespace mca {

// File / format / parse problems: bad CSV cell, ragged rows, unreadable path.
class DataError : public std::runtime_error {
  public:
    explicit DataError(const std::string &what) : std::runtime_error(what) {}
};

// A series with zero variance where variation is required (z-score, Pearson).
class DegenerateSeriesError : public std::runtime_error {
  public:
    explicit DegenerateSeriesError(const std::string &what)
        : std::runtime_error(what)
    {
    }
};

} // namespace mca
