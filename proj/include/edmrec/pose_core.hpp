#pragma once

#include "edmrec/types.hpp"

namespace edmrec {

// Pairwise Euclidean distances between all joints.
DistanceMatrix edm_from_pose(const Pose& pose);

// Isotropically rescales a 2D pose so the bounding box of the observed
// joints is centered at the origin and its longer side spans [-1, 1].
// The single scale factor is 2 / longer box side. Occluded joints are
// carried through the same transform but their values are meaningless
// to callers; the representation schemes below overwrite or ignore them.
// Throws if fewer than 2 joints are observed or all observed joints
// coincide.
Pose normalize_observed(const Pose& pose, const JointMask& mask);

// 'zero' occlusion representation: normalize the observed joints only,
// compute their EDM and embed it at observed positions of the full
// N x N matrix. Every row/column touching an occluded joint is zero.
DistanceMatrix represent_zero(const Pose& pose, const JointMask& mask);

// 'average' occlusion representation: occluded coordinates are replaced
// by the mean of the observed coordinates, then the full joint set is
// normalized and the EDM computed.
DistanceMatrix represent_average(const Pose& pose, const JointMask& mask);

// Strict upper triangle flattening. Throws if the matrix is asymmetric
// beyond 1e-9.
EdmVector vectorize(const DistanceMatrix& edm);

struct DevectorizeResult {
    DistanceMatrix matrix;
    int clamped = 0; // negative inputs clamped to zero
};

// Rebuilds a symmetric zero-diagonal matrix from an upper-triangle
// vector. Negative values (possible regressor outputs) are clamped to
// zero and counted.
DevectorizeResult devectorize(const EdmVector& vec, int joint_count);

// All upper-triangle vector positions whose pair touches an occluded
// joint, ascending. For m occluded joints out of N this has
// m*N - m*(m+1)/2 elements.
std::vector<int> entry_positions(const JointMask& mask, int joint_count);

// Complement of entry_positions: the observed positions, ascending.
std::vector<int> observed_positions(const JointMask& mask, int joint_count);

// Final assembly: keep input entries where both joints are observed,
// take recovered entries everywhere else.
DistanceMatrix assemble_final(const DistanceMatrix& input,
                              const DistanceMatrix& recovered,
                              const JointMask& mask);

// Elementwise percentage error |est - gt| / gt * 100. The diagonal and
// any off-diagonal entry with gt below 1e-9 are excluded via the
// validity mask.
ErrorMatrix err_matrix(const DistanceMatrix& estimate,
                       const DistanceMatrix& ground_truth);

// Mean over valid entries. Throws if no entry is valid.
double err_ave(const ErrorMatrix& err);

} // namespace edmrec
