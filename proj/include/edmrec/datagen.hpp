#pragma once

#include "edmrec/types.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace edmrec {

inline constexpr int kJointCount = 14;

// Joint order used throughout: head, neck, right-shoulder, right-elbow,
// right-wrist, left-shoulder, left-elbow, left-wrist, right-hip,
// right-knee, right-ankle, left-hip, left-knee, left-ankle.
const std::array<std::string, kJointCount>& joint_names();

// The 15 action categories, in report column order.
const std::array<std::string, 15>& category_names();

struct PoseRecord {
    std::string id;
    std::string category;
    Pose pose2d;                // 14 x 2, pixels
    std::optional<Pose> pose3d; // 14 x 3, millimeters
};

struct Dataset {
    std::vector<PoseRecord> records;
    std::string provenance; // "ingested" or "synthetic(seed=...)"

    int size() const { return static_cast<int>(records.size()); }
};

struct Bone {
    int parent;
    int child;
    double length_mm;
};

// Joint-to-joint bones with their fixed lengths; every generated 3D pose
// satisfies them exactly.
const std::vector<Bone>& skeleton_bones();

struct CameraConfig {
    double focal = 1100.0; // pixels
    double center_x = 512.0;
    double center_y = 512.0;
    double distance_mm = 4200.0; // camera to skeleton root along the optical axis
};

// Samples a 14-joint kinematic tree with fixed bone lengths, joint-angle
// ranges keyed on category archetypes (stand/sit/walk/reach) and a
// pinhole projection to pixels. Every pose has all pairwise 3D distances
// above 1 mm.
Dataset synth_poses(int count, std::uint64_t seed, const CameraConfig& camera = {});

struct OcclusionPlan {
    std::vector<JointMask> masks; // parallel to the dataset records
    std::string regime;           // "1", "2", "3" or "mixed"
    std::uint64_t seed = 0;
};

// Uniform occluded-joint draws without replacement within each pose;
// the mixed regime draws the count uniformly from {1,2,3} per record.
OcclusionPlan sample_occlusions(const Dataset& dataset, const std::string& regime,
                                std::uint64_t seed);

// Seeded shuffle, 5/6 train and 1/6 test.
std::pair<Dataset, Dataset> split_dataset(const Dataset& dataset, std::uint64_t seed);

// Isotropic [-1,1] normalization of a 3D pose (longest bounding-box side),
// used to put 3D EDM regression targets on the network's scale.
Pose normalize_pose3d(const Pose& pose);

} // namespace edmrec
