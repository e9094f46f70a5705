#pragma once

#include <stdexcept>
#include <string>

namespace cxr {

/// Raised for invalid inputs and data problems (bad files, violated
/// preconditions). The CLI maps it to exit code 2.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// No usable lung region: empty masks, failed fallback segmentation, or an
/// ROI too small for texture analysis. The service maps it to HTTP 422.
class SegmentationError : public Error {
public:
    using Error::Error;
};

} // namespace cxr
