#include "colorgs/errors.hpp"

#include <utility>

namespace colorgs {

InvalidParameterError::InvalidParameterError(std::size_t primitive, const std::string& what)
    : Error("invalid parameter on primitive " + std::to_string(primitive) + ": " + what),
      primitive_(primitive) {}

RenderError::RenderError(int x, int y, std::size_t primitive, const std::string& what)
    : Error("render error at pixel (" + std::to_string(x) + ", " + std::to_string(y) +
            "), primitive " + std::to_string(primitive) + ": " + what) {}

DatasetError::DatasetError(std::string path, const std::string& what)
    : Error(what + ": " + path), path_(std::move(path)) {}

}  // namespace colorgs
