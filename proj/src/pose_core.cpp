#include "edmrec/pose_core.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace edmrec {

DistanceMatrix edm_from_pose(const Pose& pose) {
    pose.validate();
    const int n = pose.joint_count();
    Eigen::MatrixXd entries = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double d = (pose.joints.row(i) - pose.joints.row(j)).norm();
            entries(i, j) = d;
            entries(j, i) = d;
        }
    }
    return DistanceMatrix{std::move(entries)};
}

namespace {

struct BoxTransform {
    Eigen::RowVector2d center;
    double scale;
};

// Bounding box of the given joint rows; scale maps the longer side to [-1,1].
BoxTransform observed_box(const Pose& pose, const std::vector<int>& observed) {
    Eigen::RowVector2d lo = pose.joints.row(observed[0]).head<2>();
    Eigen::RowVector2d hi = lo;
    for (int idx : observed) {
        lo = lo.cwiseMin(pose.joints.row(idx).head<2>());
        hi = hi.cwiseMax(pose.joints.row(idx).head<2>());
    }
    const double side = (hi - lo).maxCoeff();
    if (side <= 0.0)
        throw std::invalid_argument("degenerate pose: all observed joints coincide");
    return BoxTransform{(lo + hi) / 2.0, 2.0 / side};
}

} // namespace

Pose normalize_observed(const Pose& pose, const JointMask& mask) {
    pose.validate();
    if (pose.dims() != 2)
        throw std::invalid_argument("normalization expects a 2D pose");
    mask.validate(pose.joint_count());
    const std::vector<int> observed = mask.observed_indices(pose.joint_count());
    if (observed.size() < 2)
        throw std::invalid_argument("normalization needs at least 2 observed joints");

    const BoxTransform t = observed_box(pose, observed);
    Pose out = pose;
    out.joints = (pose.joints.rowwise() - t.center) * t.scale;
    return out;
}

DistanceMatrix represent_zero(const Pose& pose, const JointMask& mask) {
    const Pose normalized = normalize_observed(pose, mask);
    const std::vector<int> observed = mask.observed_indices(pose.joint_count());
    const int n = pose.joint_count();
    Eigen::MatrixXd entries = Eigen::MatrixXd::Zero(n, n);
    for (size_t a = 0; a < observed.size(); ++a) {
        for (size_t b = a + 1; b < observed.size(); ++b) {
            const int i = observed[a];
            const int j = observed[b];
            const double d = (normalized.joints.row(i) - normalized.joints.row(j)).norm();
            entries(i, j) = d;
            entries(j, i) = d;
        }
    }
    return DistanceMatrix{std::move(entries)};
}

DistanceMatrix represent_average(const Pose& pose, const JointMask& mask) {
    pose.validate();
    if (pose.dims() != 2)
        throw std::invalid_argument("representation expects a 2D pose");
    mask.validate(pose.joint_count());
    const std::vector<int> observed = mask.observed_indices(pose.joint_count());
    if (observed.size() < 2)
        throw std::invalid_argument("representation needs at least 2 observed joints");

    Eigen::RowVector2d mean = Eigen::RowVector2d::Zero();
    for (int idx : observed) mean += pose.joints.row(idx).head<2>();
    mean /= static_cast<double>(observed.size());

    Pose filled = pose;
    for (int idx : mask.occluded) filled.joints.row(idx) = mean;

    // The substituted centroid lies inside the observed bounding box, so
    // normalizing the full set uses the same transform as the observed set.
    const Pose normalized = normalize_observed(filled, JointMask::empty());
    return edm_from_pose(normalized);
}

EdmVector vectorize(const DistanceMatrix& edm) {
    const int n = edm.size();
    if (edm.entries.cols() != n)
        throw std::invalid_argument("distance matrix is not square");
    Eigen::VectorXd values(tri_length(n));
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (std::abs(edm.entries(i, j) - edm.entries(j, i)) > 1e-9)
                throw std::invalid_argument("matrix asymmetric at (" + std::to_string(i) +
                                            "," + std::to_string(j) + "), cannot vectorize");
            values(tri_index(i, j, n)) = edm.entries(i, j);
        }
    }
    return EdmVector{std::move(values)};
}

DevectorizeResult devectorize(const EdmVector& vec, int joint_count) {
    if (vec.length() != tri_length(joint_count))
        throw std::invalid_argument("vector length " + std::to_string(vec.length()) +
                                    " does not match N=" + std::to_string(joint_count) +
                                    " (expected " + std::to_string(tri_length(joint_count)) + ")");
    DevectorizeResult out;
    out.matrix.entries = Eigen::MatrixXd::Zero(joint_count, joint_count);
    for (int i = 0; i < joint_count; ++i) {
        for (int j = i + 1; j < joint_count; ++j) {
            double v = vec.values(tri_index(i, j, joint_count));
            if (v < 0.0) {
                v = 0.0;
                ++out.clamped;
            }
            out.matrix.entries(i, j) = v;
            out.matrix.entries(j, i) = v;
        }
    }
    return out;
}

std::vector<int> entry_positions(const JointMask& mask, int joint_count) {
    mask.validate(joint_count);
    std::vector<int> out;
    for (int i = 0; i < joint_count; ++i) {
        for (int j = i + 1; j < joint_count; ++j) {
            if (mask.contains(i) || mask.contains(j))
                out.push_back(tri_index(i, j, joint_count));
        }
    }
    return out;
}

std::vector<int> observed_positions(const JointMask& mask, int joint_count) {
    mask.validate(joint_count);
    std::vector<int> out;
    for (int i = 0; i < joint_count; ++i) {
        for (int j = i + 1; j < joint_count; ++j) {
            if (!mask.contains(i) && !mask.contains(j))
                out.push_back(tri_index(i, j, joint_count));
        }
    }
    return out;
}

DistanceMatrix assemble_final(const DistanceMatrix& input,
                              const DistanceMatrix& recovered,
                              const JointMask& mask) {
    const int n = input.size();
    if (recovered.size() != n || input.entries.cols() != n || recovered.entries.cols() != n)
        throw std::invalid_argument("assemble: matrix sizes do not match");
    mask.validate(n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (std::abs(input.entries(i, j) - input.entries(j, i)) > 1e-9 ||
                std::abs(recovered.entries(i, j) - recovered.entries(j, i)) > 1e-9)
                throw std::invalid_argument("assemble: asymmetric input at (" +
                                            std::to_string(i) + "," + std::to_string(j) + ")");
        }
    }

    Eigen::MatrixXd entries = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const bool both_observed = !mask.contains(i) && !mask.contains(j);
            const double v = both_observed ? input.entries(i, j) : recovered.entries(i, j);
            entries(i, j) = v;
            entries(j, i) = v;
        }
    }
    return DistanceMatrix{std::move(entries)};
}

ErrorMatrix err_matrix(const DistanceMatrix& estimate, const DistanceMatrix& ground_truth) {
    const int n = estimate.size();
    if (ground_truth.size() != n)
        throw std::invalid_argument("error metric: matrix sizes do not match");

    ErrorMatrix out;
    out.entries = Eigen::MatrixXd::Zero(n, n);
    out.validity = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n, n, false);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const double gt = ground_truth.entries(i, j);
            if (gt < 1e-9) continue; // coincident ground-truth joints are excluded
            out.entries(i, j) = std::abs(estimate.entries(i, j) - gt) / gt * 100.0;
            out.validity(i, j) = true;
        }
    }
    return out;
}

double err_ave(const ErrorMatrix& err) {
    const long count = err.valid_count();
    if (count == 0)
        throw std::invalid_argument("error average undefined: no valid entries");
    double sum = 0.0;
    for (int i = 0; i < err.size(); ++i)
        for (int j = 0; j < err.size(); ++j)
            if (err.validity(i, j)) sum += err.entries(i, j);
    return sum / static_cast<double>(count);
}

} // namespace edmrec
