#pragma once

#include "flowphd/types.hpp"

#include <span>
#include <vector>

namespace flowphd {

struct OspaParams {
    double cutoff = 20.0;  // c, degrees
    double order = 1.0;    // p >= 1

    void validate() const;
};

/// OSPA distance between two state sets on wrapped az/el positions:
/// [ (1/n) ( min-assignment sum of min(c, d)^p + c^p (n - m) ) ]^(1/p)
/// with m the smaller and n the larger cardinality; empty vs empty is 0.
/// The assignment is solved exactly.
double ospa(std::span<const TargetState> estimates, std::span<const TargetState> truth,
            const OspaParams& params = {});

struct SequenceScore {
    double mean = 0.0;
    std::vector<double> per_frame;
};

/// Per-frame OSPA plus the arithmetic mean over the sequence. Throws
/// std::invalid_argument on length mismatch.
SequenceScore ospa_sequence(const std::vector<std::vector<TargetState>>& estimates,
                            const std::vector<std::vector<TargetState>>& truth,
                            const OspaParams& params = {});

}  // namespace flowphd
