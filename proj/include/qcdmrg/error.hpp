#pragma once

#include <stdexcept>
#include <string>

namespace qcdmrg {

/// Exception carrying the name of the module that raised it, so numeric
/// failures deep inside a run can be traced back to their origin.
class Error : public std::runtime_error {
  public:
    Error(std::string module, const std::string &what)
        : std::runtime_error(module + ": " + what), module_(std::move(module)) {}

    const std::string &module() const noexcept { return module_; }

  private:
    std::string module_;
};

} // namespace qcdmrg
