#include "tksmooth/presets.hpp"

#include <numeric>

namespace tks {

namespace {

std::vector<int> all_indices(int dim) {
    std::vector<int> out(dim);
    std::iota(out.begin(), out.end(), 0);
    return out;
}

} // namespace

NoisePartition make_preset(PresetKind kind, int n, int m, double r, double s) {
    if (n <= 0 || m <= 0) throw InvalidPreset("preset: dimensions must be positive");

    NoisePartition part;
    part.r = r;
    part.s = s;
    switch (kind) {
        case PresetKind::L2:
            break;
        case PresetKind::TRobust:
            part.meas_student = all_indices(m);
            break;
        case PresetKind::TTrend:
            part.proc_student = all_indices(n);
            break;
        case PresetKind::DoubleT:
            part.proc_student = all_indices(n);
            part.meas_student = all_indices(m);
            break;
        case PresetKind::Custom:
            throw InvalidPreset("preset: Custom requires explicit index sets; use make_custom");
    }
    if (!part.proc_student.empty() && !(r > 0.0))
        throw InvalidPreset("preset: process dof must be positive");
    if (!part.meas_student.empty() && !(s > 0.0))
        throw InvalidPreset("preset: measurement dof must be positive");
    return part;
}

NoisePartition make_custom(std::vector<int> proc_student, std::vector<int> meas_student, int n,
                           int m, double r, double s) {
    NoisePartition part;
    part.proc_student = std::move(proc_student);
    part.meas_student = std::move(meas_student);
    part.r = r;
    part.s = s;
    try {
        part.validate(n, m);
    } catch (const DimensionMismatch& e) {
        throw InvalidPreset(std::string("custom partition: ") + e.what());
    }
    return part;
}

PresetKind preset_from_name(const std::string& name) {
    if (name == "l2") return PresetKind::L2;
    if (name == "t-robust") return PresetKind::TRobust;
    if (name == "t-trend") return PresetKind::TTrend;
    if (name == "double-t") return PresetKind::DoubleT;
    if (name == "custom") return PresetKind::Custom;
    throw InvalidPreset("unknown preset '" + name + "'");
}

const char* preset_name(PresetKind kind) {
    switch (kind) {
        case PresetKind::L2: return "l2";
        case PresetKind::TRobust: return "t-robust";
        case PresetKind::TTrend: return "t-trend";
        case PresetKind::DoubleT: return "double-t";
        case PresetKind::Custom: return "custom";
    }
    return "unknown";
}

} // namespace tks
