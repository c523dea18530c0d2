#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace flowlab {

using Scalar = double;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Arr = Eigen::ArrayXd;

// Error taxonomy shared across modules. Everything derives from std
// exceptions so callers that only care about "did it fail" can catch
// std::exception at the CLI boundary.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SingularMapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ScoreSingularityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct PoleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct OptimizerError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Ordered list of named flat arrays. Used for gradients, optimizer moments
// and checkpoint payloads; order is part of the contract (deterministic
// iteration everywhere).
class NamedArrays {
public:
    void add(std::string name, Arr values) {
        entries_.emplace_back(std::move(name), std::move(values));
    }
    bool contains(const std::string& name) const {
        for (const auto& [n, _] : entries_)
            if (n == name) return true;
        return false;
    }
    const Arr& at(const std::string& name) const {
        for (const auto& [n, v] : entries_)
            if (n == name) return v;
        throw std::out_of_range("NamedArrays: no entry '" + name + "'");
    }
    Arr& at(const std::string& name) {
        for (auto& [n, v] : entries_)
            if (n == name) return v;
        throw std::out_of_range("NamedArrays: no entry '" + name + "'");
    }
    auto begin() const { return entries_.begin(); }
    auto end() const { return entries_.end(); }
    auto begin() { return entries_.begin(); }
    auto end() { return entries_.end(); }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    void clear() { entries_.clear(); }

private:
    std::vector<std::pair<std::string, Arr>> entries_;
};

// View into one mutable parameter array, identified by name. Groups of
// these are what the optimizer updates in place.
struct ParamRef {
    std::string name;
    double* data = nullptr;
    Eigen::Index size = 0;

    Eigen::Map<Arr> map() const { return Eigen::Map<Arr>(data, size); }
};

}  // namespace flowlab
