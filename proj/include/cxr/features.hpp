#pragma once

#include <string>
#include <utility>
#include <vector>

namespace cxr {

/// Named, ordered feature values for one sample.
struct FeatureVector {
    std::vector<std::string> names;
    std::vector<double> values;

    void add(std::string name, double value) {
        names.push_back(std::move(name));
        values.push_back(value);
    }
    void append(const FeatureVector& other) {
        names.insert(names.end(), other.names.begin(), other.names.end());
        values.insert(values.end(), other.values.begin(), other.values.end());
    }
    std::size_t size() const { return values.size(); }
};

} // namespace cxr
