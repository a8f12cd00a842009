#ifndef TKSMOOTH_TYPES_HPP
#define TKSMOOTH_TYPES_HPP

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace tks {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A symmetric block failed its positive-definiteness test. Carries the
/// 0-based index of the offending diagonal block (or time step).
class NotPositiveDefinite : public std::runtime_error {
public:
    NotPositiveDefinite(const std::string& what, int block_index)
        : std::runtime_error(what), block_index_(block_index) {}

    int block_index() const { return block_index_; }

private:
    int block_index_;
};

class DimensionMismatch : public std::invalid_argument {
public:
    explicit DimensionMismatch(const std::string& what)
        : std::invalid_argument(what) {}
};

} // namespace tks

#endif
