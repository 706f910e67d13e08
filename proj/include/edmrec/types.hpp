#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

namespace edmrec {

// A pose is an ordered list of joint coordinates, one row per joint.
// Two columns for image space (pixels or normalized units), three for
// world space (millimeters).
struct Pose {
    Eigen::MatrixXd joints;

    int joint_count() const { return static_cast<int>(joints.rows()); }
    int dims() const { return static_cast<int>(joints.cols()); }

    // Throws std::invalid_argument if any coordinate is non-finite,
    // fewer than 2 joints, or dimensionality is not 2 or 3.
    void validate() const;
};

// Set of occluded joint indices for one pose. Indices are kept sorted
// and unique.
struct JointMask {
    std::vector<int> occluded;

    static JointMask from_indices(std::vector<int> indices);
    static JointMask empty() { return JointMask{}; }

    bool contains(int joint) const;
    int size() const { return static_cast<int>(occluded.size()); }
    std::vector<int> observed_indices(int joint_count) const;

    // Throws if indices are out of [0, joint_count), duplicated, or
    // the mask occludes every joint.
    void validate(int joint_count) const;
};

// N x N symmetric nonnegative matrix of pairwise joint distances with
// zero diagonal.
struct DistanceMatrix {
    Eigen::MatrixXd entries;

    int size() const { return static_cast<int>(entries.rows()); }
    void validate(double tol = 1e-9) const;
};

// Flattened strict upper triangle of a DistanceMatrix, row-major:
// position of (i,j) with i<j is i*N - i*(i+1)/2 + (j - i - 1).
// Length N(N-1)/2 (91 for N = 14).
struct EdmVector {
    Eigen::VectorXd values;

    int length() const { return static_cast<int>(values.size()); }
};

// Elementwise percentage errors plus a validity mask saying which
// entries participate in averaging. The diagonal is never valid.
struct ErrorMatrix {
    Eigen::MatrixXd entries;
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> validity;

    int size() const { return static_cast<int>(entries.rows()); }
    long valid_count() const { return validity.count(); }
};

// Upper-triangle indexing helpers.
inline int tri_length(int joint_count) {
    return joint_count * (joint_count - 1) / 2;
}

inline int tri_index(int i, int j, int joint_count) {
    // Requires i < j.
    return i * joint_count - i * (i + 1) / 2 + (j - i - 1);
}

// Inverse of tri_index.
std::pair<int, int> tri_pair(int position, int joint_count);

} // namespace edmrec
