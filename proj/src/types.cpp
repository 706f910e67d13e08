#include "edmrec/types.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace edmrec {

void Pose::validate() const {
    if (joint_count() < 2)
        throw std::invalid_argument("pose needs at least 2 joints, got " +
                                    std::to_string(joint_count()));
    if (dims() != 2 && dims() != 3)
        throw std::invalid_argument("pose dimensionality must be 2 or 3, got " +
                                    std::to_string(dims()));
    if (!joints.allFinite())
        throw std::invalid_argument("pose contains a non-finite coordinate");
}

JointMask JointMask::from_indices(std::vector<int> indices) {
    std::sort(indices.begin(), indices.end());
    indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
    return JointMask{std::move(indices)};
}

bool JointMask::contains(int joint) const {
    return std::binary_search(occluded.begin(), occluded.end(), joint);
}

std::vector<int> JointMask::observed_indices(int joint_count) const {
    std::vector<int> out;
    out.reserve(joint_count - size());
    for (int i = 0; i < joint_count; ++i)
        if (!contains(i)) out.push_back(i);
    return out;
}

void JointMask::validate(int joint_count) const {
    if (size() >= joint_count)
        throw std::invalid_argument("mask occludes every joint");
    for (size_t i = 0; i < occluded.size(); ++i) {
        if (occluded[i] < 0 || occluded[i] >= joint_count)
            throw std::invalid_argument("mask index " + std::to_string(occluded[i]) +
                                        " out of range [0," + std::to_string(joint_count) + ")");
        if (i > 0 && occluded[i] == occluded[i - 1])
            throw std::invalid_argument("mask index " + std::to_string(occluded[i]) +
                                        " duplicated");
    }
    if (!std::is_sorted(occluded.begin(), occluded.end()))
        throw std::invalid_argument("mask indices not sorted");
}

void DistanceMatrix::validate(double tol) const {
    if (entries.rows() != entries.cols())
        throw std::invalid_argument("distance matrix is not square");
    if (!entries.allFinite())
        throw std::invalid_argument("distance matrix has a non-finite entry");
    for (int i = 0; i < entries.rows(); ++i) {
        if (std::abs(entries(i, i)) > tol)
            throw std::invalid_argument("distance matrix diagonal not zero at " +
                                        std::to_string(i));
        for (int j = i + 1; j < entries.cols(); ++j) {
            if (std::abs(entries(i, j) - entries(j, i)) > tol)
                throw std::invalid_argument("distance matrix asymmetric at (" +
                                            std::to_string(i) + "," + std::to_string(j) + ")");
            if (entries(i, j) < -tol)
                throw std::invalid_argument("distance matrix negative at (" +
                                            std::to_string(i) + "," + std::to_string(j) + ")");
        }
    }
}

std::pair<int, int> tri_pair(int position, int joint_count) {
    int p = position;
    for (int i = 0; i < joint_count - 1; ++i) {
        int row_len = joint_count - 1 - i;
        if (p < row_len) return {i, i + 1 + p};
        p -= row_len;
    }
    throw std::invalid_argument("triangle position " + std::to_string(position) +
                                " out of range for N=" + std::to_string(joint_count));
}

} // namespace edmrec
