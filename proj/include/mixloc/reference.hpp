#pragma once

#include <string>

#include "mixloc/network.hpp"
#include "mixloc/rigidity.hpp"
#include "mixloc/scenario.hpp"

namespace mixloc {

/// Outcome of one check against a published worked example.
struct ReferenceCheck {
    std::string name;
    bool pass = false;
    double max_error = 0.0;
    std::string detail;
};

/// Information matrix of the seven-node example with the first two
/// constraints scaled so the centre's net coefficient is 1 and the third so
/// its f2 coefficient has magnitude 1, as in the published matrices.
InformationMatrix seven_node_published_scaling();

/// Fixed offsets on node 4's relative positions to nodes 0, 1, 5, 6 of the
/// 27-node analog, in that node's (identity) frame.
NoiseSpec node5_fixed_offsets();

/// Direct solve of the seven-node example, expected
/// ((10,20,0), (10,40,0), (2.5,30,30)) within 1e-9.
ReferenceCheck seven_node_solution_check();

/// M_ff and M_fa blocks of the seven-node example against the published
/// values (1e-9; the rounded (1,1) entry within 1e-4).
ReferenceCheck seven_node_blocks_check();

/// Noisy relative-position constraint of node 4 (neighbors 0, 1, 5, 6),
/// scaled so the last coefficient is -1, against the published rationals
/// within 1e-2 relative.
ReferenceCheck noisy_constraint_check();

}  // namespace mixloc
