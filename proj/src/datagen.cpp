#include "edmrec/datagen.hpp"

#include "edmrec/rng.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace edmrec {

namespace {

enum Joint {
    kHead = 0,
    kNeck,
    kRSho,
    kRElb,
    kRWri,
    kLSho,
    kLElb,
    kLWri,
    kRHip,
    kRKnee,
    kRAnk,
    kLHip,
    kLKnee,
    kLAnk
};

constexpr double kSpineLen = 520.0;
constexpr double kHeadLen = 250.0;
constexpr double kShoulderOff = 180.0;
constexpr double kUpperArm = 300.0;
constexpr double kForearm = 260.0;
constexpr double kHipOff = 120.0;
constexpr double kThigh = 450.0;
constexpr double kShin = 440.0;

Eigen::Matrix3d rot_x(double a) {
    Eigen::Matrix3d m;
    m << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
    return m;
}

Eigen::Matrix3d rot_y(double a) {
    Eigen::Matrix3d m;
    m << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
    return m;
}

Eigen::Matrix3d rot_z(double a) {
    Eigen::Matrix3d m;
    m << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
    return m;
}

struct AngleRanges {
    double torso_lo, torso_hi;
    double hip_lo, hip_hi;
    double knee_lo, knee_hi;
    double sho_lo, sho_hi;     // arm swing (pitch)
    double abduct_lo, abduct_hi;
    double elbow_lo, elbow_hi;
};

enum class Archetype { Stand, Sit, Walk, Reach };

Archetype archetype_for(const std::string& category) {
    static const std::map<std::string, Archetype> table = {
        {"Direct", Archetype::Stand}, {"Discuss", Archetype::Stand},
        {"Phone", Archetype::Stand},  {"Smoke", Archetype::Stand},
        {"Wait", Archetype::Stand},   {"Eat", Archetype::Sit},
        {"Sit", Archetype::Sit},      {"SitD", Archetype::Sit},
        {"Walk", Archetype::Walk},    {"WalkD", Archetype::Walk},
        {"WalkT", Archetype::Walk},   {"Purch", Archetype::Walk},
        {"Greet", Archetype::Reach},  {"Pose", Archetype::Reach},
        {"TakeP", Archetype::Reach}};
    const auto it = table.find(category);
    return it == table.end() ? Archetype::Stand : it->second;
}

AngleRanges ranges_for(Archetype archetype) {
    switch (archetype) {
        case Archetype::Sit:
            return {0.09, 0.61, 1.22, 1.75, 1.22, 1.75, -0.35, 0.52, 0.0, 0.35, 0.0, 1.57};
        case Archetype::Walk:
            return {0.0, 0.26, -0.61, 0.61, 0.09, 1.13, -0.61, 0.61, 0.0, 0.17, 0.35, 1.40};
        case Archetype::Reach:
            return {-0.17, 0.17, -0.09, 0.17, 0.0, 0.26, -2.10, 0.35, 0.0, 1.40, 0.0, 1.00};
        case Archetype::Stand:
        default:
            return {-0.09, 0.17, -0.09, 0.17, 0.0, 0.26, -0.35, 0.35, 0.0, 0.35, 0.0, 1.00};
    }
}

Eigen::MatrixXd sample_skeleton(Rng& rng, const AngleRanges& r) {
    const Eigen::Vector3d down(0, -1, 0);
    Eigen::MatrixXd joints(kJointCount, 3);

    const Eigen::Matrix3d torso = rot_y(rng.uniform(-0.15, 0.15)) *
                                  rot_x(rng.uniform(r.torso_lo, r.torso_hi)) *
                                  rot_z(rng.uniform(-0.08, 0.08));
    const Eigen::Matrix3d pelvis =
        rot_y(rng.uniform(-0.12, 0.12)) * rot_z(rng.uniform(-0.06, 0.06));

    const Eigen::Vector3d root = Eigen::Vector3d::Zero();
    const Eigen::Vector3d neck = root + torso * Eigen::Vector3d(0, kSpineLen, 0);
    const Eigen::Matrix3d neck_rot =
        rot_x(rng.uniform(-0.25, 0.25)) * rot_z(rng.uniform(-0.15, 0.15));
    joints.row(kNeck) = neck;
    joints.row(kHead) = neck + torso * neck_rot * Eigen::Vector3d(0, kHeadLen, 0);

    const int shoulder_joints[2] = {kRSho, kLSho};
    const int elbow_joints[2] = {kRElb, kLElb};
    const int wrist_joints[2] = {kRWri, kLWri};
    const int hip_joints[2] = {kRHip, kLHip};
    const int knee_joints[2] = {kRKnee, kLKnee};
    const int ankle_joints[2] = {kRAnk, kLAnk};
    const double sides[2] = {-1.0, 1.0}; // right, left

    for (int s = 0; s < 2; ++s) {
        const double side = sides[s];

        const Eigen::Vector3d sho = neck + torso * Eigen::Vector3d(side * kShoulderOff, 0, 0);
        const Eigen::Matrix3d shoulder = rot_x(rng.uniform(r.sho_lo, r.sho_hi)) *
                                         rot_z(side * rng.uniform(r.abduct_lo, r.abduct_hi));
        const Eigen::Vector3d upper = torso * shoulder * down;
        const Eigen::Vector3d elb = sho + kUpperArm * upper;
        const Eigen::Matrix3d elbow = rot_x(-rng.uniform(r.elbow_lo, r.elbow_hi));
        const Eigen::Vector3d fore = torso * shoulder * elbow * down;
        joints.row(shoulder_joints[s]) = sho;
        joints.row(elbow_joints[s]) = elb;
        joints.row(wrist_joints[s]) = elb + kForearm * fore;

        const Eigen::Vector3d hip = root + pelvis * Eigen::Vector3d(side * kHipOff, 0, 0);
        const Eigen::Matrix3d hip_rot = rot_x(rng.uniform(r.hip_lo, r.hip_hi)) *
                                        rot_z(side * rng.uniform(0.0, 0.12));
        const Eigen::Vector3d thigh = pelvis * hip_rot * down;
        const Eigen::Vector3d knee = hip + kThigh * thigh;
        const Eigen::Matrix3d knee_rot = rot_x(rng.uniform(r.knee_lo, r.knee_hi));
        const Eigen::Vector3d shin = pelvis * hip_rot * knee_rot * down;
        joints.row(hip_joints[s]) = hip;
        joints.row(knee_joints[s]) = knee;
        joints.row(ankle_joints[s]) = knee + kShin * shin;
    }
    return joints;
}

bool min_distance_above(const Eigen::MatrixXd& joints, double min_mm) {
    for (int i = 0; i < joints.rows(); ++i)
        for (int j = i + 1; j < joints.rows(); ++j)
            if ((joints.row(i) - joints.row(j)).norm() <= min_mm) return false;
    return true;
}

} // namespace

const std::array<std::string, kJointCount>& joint_names() {
    static const std::array<std::string, kJointCount> names = {
        "head",          "neck",       "right-shoulder", "right-elbow", "right-wrist",
        "left-shoulder", "left-elbow", "left-wrist",     "right-hip",   "right-knee",
        "right-ankle",   "left-hip",   "left-knee",      "left-ankle"};
    return names;
}

const std::array<std::string, 15>& category_names() {
    static const std::array<std::string, 15> names = {
        "Direct", "Discuss", "Eat",   "Greet", "Phone", "Pose",  "Purch", "Sit",
        "SitD",   "Smoke",   "TakeP", "Wait",  "Walk",  "WalkD", "WalkT"};
    return names;
}

const std::vector<Bone>& skeleton_bones() {
    static const std::vector<Bone> bones = {
        {kNeck, kHead, kHeadLen},   {kNeck, kRSho, kShoulderOff}, {kNeck, kLSho, kShoulderOff},
        {kRSho, kRElb, kUpperArm},  {kRElb, kRWri, kForearm},     {kLSho, kLElb, kUpperArm},
        {kLElb, kLWri, kForearm},   {kRHip, kLHip, 2 * kHipOff},  {kRHip, kRKnee, kThigh},
        {kRKnee, kRAnk, kShin},     {kLHip, kLKnee, kThigh},      {kLKnee, kLAnk, kShin}};
    return bones;
}

Dataset synth_poses(int count, std::uint64_t seed, const CameraConfig& camera) {
    if (count < 1) throw std::invalid_argument("pose count must be positive");

    Dataset dataset;
    dataset.provenance = "synthetic(seed=" + std::to_string(seed) + ")";
    dataset.records.reserve(count);
    Rng rng(seed);

    for (int index = 0; index < count; ++index) {
        const std::string category = category_names()[rng.uniform_int(15)];
        const AngleRanges ranges = ranges_for(archetype_for(category));

        Eigen::MatrixXd world;
        bool ok = false;
        for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
            Eigen::MatrixXd local = sample_skeleton(rng, ranges);
            const Eigen::Matrix3d global = rot_y(rng.uniform(-0.96, 0.96));
            const Eigen::Vector3d offset(rng.uniform(-300.0, 300.0), rng.uniform(-200.0, 200.0),
                                         rng.uniform(-400.0, 400.0));
            world = (local * global.transpose()).rowwise() + offset.transpose();
            ok = min_distance_above(world, 1.0);
        }
        if (!ok)
            throw std::runtime_error("failed to sample a non-degenerate pose after 100 attempts");

        Eigen::MatrixXd pixels(kJointCount, 2);
        for (int j = 0; j < kJointCount; ++j) {
            const double depth = world(j, 2) + camera.distance_mm;
            pixels(j, 0) = camera.focal * world(j, 0) / depth + camera.center_x;
            pixels(j, 1) = camera.focal * -world(j, 1) / depth + camera.center_y;
        }

        PoseRecord record;
        char id[32];
        std::snprintf(id, sizeof(id), "synth-%06d", index);
        record.id = id;
        record.category = category;
        record.pose2d = Pose{std::move(pixels)};
        record.pose3d = Pose{std::move(world)};
        dataset.records.push_back(std::move(record));
    }
    return dataset;
}

OcclusionPlan sample_occlusions(const Dataset& dataset, const std::string& regime,
                                std::uint64_t seed) {
    int fixed = 0;
    if (regime == "1")
        fixed = 1;
    else if (regime == "2")
        fixed = 2;
    else if (regime == "3")
        fixed = 3;
    else if (regime != "mixed")
        throw std::invalid_argument("regime must be one of 1, 2, 3, mixed");

    OcclusionPlan plan;
    plan.regime = regime;
    plan.seed = seed;
    plan.masks.reserve(dataset.records.size());
    Rng rng(seed);
    for (size_t i = 0; i < dataset.records.size(); ++i) {
        const int m = fixed > 0 ? fixed : 1 + rng.uniform_int(3);
        plan.masks.push_back(JointMask::from_indices(rng.sample_distinct(kJointCount, m)));
    }
    return plan;
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& dataset, std::uint64_t seed) {
    const int n = dataset.size();
    if (n < 6) throw std::invalid_argument("need at least 6 records to split 5/6 vs 1/6");
    const int test_count = n / 6;

    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);

    Dataset train, test;
    train.provenance = dataset.provenance;
    test.provenance = dataset.provenance;
    train.records.reserve(n - test_count);
    test.records.reserve(test_count);
    for (int i = 0; i < n; ++i) {
        if (i < n - test_count)
            train.records.push_back(dataset.records[order[i]]);
        else
            test.records.push_back(dataset.records[order[i]]);
    }
    return {std::move(train), std::move(test)};
}

Pose normalize_pose3d(const Pose& pose) {
    pose.validate();
    if (pose.dims() != 3) throw std::invalid_argument("expected a 3D pose");
    const Eigen::RowVector3d lo = pose.joints.colwise().minCoeff();
    const Eigen::RowVector3d hi = pose.joints.colwise().maxCoeff();
    const double side = (hi - lo).maxCoeff();
    if (side <= 0.0) throw std::invalid_argument("degenerate 3D pose: all joints coincide");
    Pose out = pose;
    out.joints = (pose.joints.rowwise() - (lo + hi) / 2.0) * (2.0 / side);
    return out;
}

} // namespace edmrec
