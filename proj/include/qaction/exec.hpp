#pragma once

namespace qaction {

// Execution policy for the data-parallel kernels (eigensolve over states,
// table fill over entries, design-matrix rows, trajectory batches). Results
// are bitwise identical between the two: every parallel iteration writes a
// disjoint slot and does the same arithmetic the serial loop would.
enum class Exec { serial, parallel };

int hardware_threads();

}  // namespace qaction
