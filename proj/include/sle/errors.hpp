#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sle {

/// A selection query (n-th bubble, n-th excursion, ...) had no match in the
/// finite window it was asked about.
struct not_found_error : std::runtime_error {
  explicit not_found_error(const std::string& what) : std::runtime_error(what) {}
};

/// An input sequence is too short for the requested statistic.
struct insufficient_data_error : std::runtime_error {
  explicit insufficient_data_error(const std::string& what) : std::runtime_error(what) {}
};

/// A raster grid is too coarse for the trace it was asked to hold.
struct resolution_error : std::runtime_error {
  explicit resolution_error(const std::string& what) : std::runtime_error(what) {}
};

/// An SDE step exceeded its stability bound; `step` is the offending index.
struct step_size_error : std::runtime_error {
  step_size_error(const std::string& what, std::size_t offending_step)
      : std::runtime_error(what + " (step " + std::to_string(offending_step) + ")"),
        step(offending_step) {}
  std::size_t step;
};

}  // namespace sle
