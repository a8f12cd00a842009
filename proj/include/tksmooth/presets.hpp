#ifndef TKSMOOTH_PRESETS_HPP
#define TKSMOOTH_PRESETS_HPP

#include <string>

#include "tksmooth/model.hpp"

namespace tks {

/// The named smoothers, each a partition setting over the same framework:
///   L2      - everything Gaussian (classical least-squares smoother)
///   TRobust - Student's t on all measurement residuals
///   TTrend  - Student's t on all process innovations
///   DoubleT - Student's t on both
///   Custom  - caller-supplied index sets
enum class PresetKind { L2, TRobust, TTrend, DoubleT, Custom };

class InvalidPreset : public std::invalid_argument {
public:
    explicit InvalidPreset(const std::string& what) : std::invalid_argument(what) {}
};

/// Partition for a named preset on an n-state, m-measurement model.
/// PresetKind::Custom is rejected here; build the NoisePartition directly
/// (or through make_custom) when the index sets are model-specific.
NoisePartition make_preset(PresetKind kind, int n, int m, double r = 4.0, double s = 4.0);

/// Validated custom partition.
NoisePartition make_custom(std::vector<int> proc_student, std::vector<int> meas_student, int n,
                           int m, double r = 4.0, double s = 4.0);

/// Parse "l2" | "t-robust" | "t-trend" | "double-t"; throws InvalidPreset.
PresetKind preset_from_name(const std::string& name);
const char* preset_name(PresetKind kind);

} // namespace tks

#endif
