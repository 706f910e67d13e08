#pragma once

#include "edmrec/pose_core.hpp"
#include "edmrec/rng.hpp"

#include <Eigen/Dense>

namespace edmrec::testutil {

inline Pose random_pose(Rng& rng, int joints, int dims = 2, double spread = 100.0) {
    Pose pose;
    pose.joints.resize(joints, dims);
    for (int i = 0; i < joints; ++i)
        for (int d = 0; d < dims; ++d) pose.joints(i, d) = rng.uniform(-spread, spread);
    return pose;
}

inline DistanceMatrix random_edm(Rng& rng, int joints) {
    return edm_from_pose(random_pose(rng, joints));
}

inline double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

} // namespace edmrec::testutil
