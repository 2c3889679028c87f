#pragma once

#include <cstdint>
#include <vector>

#include "epsext/geometry.hpp"

namespace epsext {

/// Two labelled point lists indexed by the same index set.
struct LabelledPair {
    std::vector<Vec> ys;
    std::vector<Vec> zs;
};

/// Checks sizes agree, l >= 1, and points within each list are pairwise
/// distinct (min gap > 1e-12).
void validate_labelled_pair(const LabelledPair& pair);

struct ProcrustesResult {
    EuclideanMotion motion;
    double max_residual = 0.0;
};

/// Least-squares Euclidean motion mapping ys onto zs: centroids are aligned
/// and the rotation comes from the SVD of the centered cross-covariance.
/// With `proper` set the determinant is forced to +1 by flipping the column
/// paired with the smallest singular value. l = 1 yields a pure translation.
ProcrustesResult procrustes_align(const LabelledPair& pair, bool proper);

/// Translates both lists so the first points sit at the origin and scales
/// jointly so sum_{i != j} |y_i-y_j|^2 + sum_{i != j} |z_i-z_j|^2 = 1.
LabelledPair normalize_pair(const LabelledPair& pair);

struct EtaBlock {
    std::vector<int> indices;  // n+1 source indices
    double volume = 0.0;       // V_n of the source simplex
    double diam = 0.0;         // diameter of the source tuple
    int orientation = 0;       // +1 source/image determinants agree, -1 else
};

struct BlockScan {
    std::vector<EtaBlock> positive;
    std::vector<EtaBlock> negative;
    bool truncated = false;
};

/// Enumerates (n+1)-tuples of source points in lexicographic order (up to
/// tuple_cap, then flags truncation). A tuple is a block when
/// V_n >= eta^n * diam^n; the sign compares source and image orientations.
BlockScan eta_block_scan(const LabelledPair& pair, double eta,
                         std::int64_t tuple_cap);

struct MaxSimplexVolume {
    double value = 0.0;
    bool truncated = false;
};

/// Max of the l-dimensional simplex volume over enumerated (l+1)-tuples.
MaxSimplexVolume max_simplex_volume(const std::vector<Vec>& points, int l,
                                    std::int64_t tuple_cap);

}  // namespace epsext
