#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "edmrec/pose_core.hpp"
#include "edmrec/rng.hpp"
#include "test_util.hpp"

#include <cmath>

using namespace edmrec;
using edmrec::testutil::max_abs_diff;
using edmrec::testutil::random_pose;

namespace {

Pose make_pose(std::initializer_list<std::pair<double, double>> points) {
    Pose pose;
    pose.joints.resize(static_cast<long>(points.size()), 2);
    int i = 0;
    for (const auto& [x, y] : points) {
        pose.joints(i, 0) = x;
        pose.joints(i, 1) = y;
        ++i;
    }
    return pose;
}

} // namespace

TEST_CASE("edm_from_pose matches direct computation") {
    const Pose pose = make_pose({{0, 0}, {1, 0}, {0, 1}});
    const DistanceMatrix edm = edm_from_pose(pose);
    Eigen::MatrixXd expected(3, 3);
    const double r2 = std::sqrt(2.0);
    expected << 0, 1, 1, 1, 0, r2, 1, r2, 0;
    CHECK(max_abs_diff(edm.entries, expected) == doctest::Approx(0.0));
    edm.validate();
}

TEST_CASE("edm_from_pose handles coincident joints") {
    const Pose pose = make_pose({{3, 4}, {3, 4}});
    const DistanceMatrix edm = edm_from_pose(pose);
    CHECK(edm.entries.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("edm_from_pose rejects non-finite coordinates") {
    Pose pose = make_pose({{0, 0}, {1, 0}});
    pose.joints(1, 1) = std::nan("");
    CHECK_THROWS_AS(edm_from_pose(pose), std::invalid_argument);
}

TEST_CASE("edm_from_pose is invariant under rotation and translation") {
    Rng rng(7);
    const double angle = 37.0 * 3.14159265358979323846 / 180.0;
    Eigen::Matrix2d rot;
    rot << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    for (int trial = 0; trial < 50; ++trial) {
        const Pose pose = random_pose(rng, 14);
        Pose moved = pose;
        moved.joints = pose.joints * rot.transpose();
        moved.joints.rowwise() += Eigen::RowVector2d(5.0, -2.0);
        CHECK(max_abs_diff(edm_from_pose(pose).entries, edm_from_pose(moved).entries) <= 1e-9);
    }
}

TEST_CASE("edm_from_pose scales linearly under uniform scaling") {
    Rng rng(8);
    const Pose pose = random_pose(rng, 10);
    Pose scaled = pose;
    scaled.joints *= 3.5;
    CHECK(max_abs_diff(edm_from_pose(scaled).entries, 3.5 * edm_from_pose(pose).entries) <=
          1e-9);
}

TEST_CASE("normalize_observed centers the box and scales the longer side to [-1,1]") {
    const Pose pose = make_pose({{0, 0}, {2, 0}, {2, 4}, {0, 4}});
    const Pose out = normalize_observed(pose, JointMask::empty());
    Eigen::MatrixXd expected(4, 2);
    expected << -0.5, -1, 0.5, -1, 0.5, 1, -0.5, 1;
    CHECK(max_abs_diff(out.joints, expected) <= 1e-12);
}

TEST_CASE("normalize_observed is a fixed point on the canonical box") {
    const Pose pose = make_pose({{-1, -1}, {1, -1}, {0.25, 1}});
    const Pose out = normalize_observed(pose, JointMask::empty());
    CHECK(max_abs_diff(out.joints, pose.joints) <= 1e-12);
}

TEST_CASE("normalize_observed only looks at observed joints") {
    const Pose full = make_pose({{0, 0}, {2, 1}, {-1, 3}, {1000, 1000}});
    const JointMask mask = JointMask::from_indices({3});
    const Pose trimmed = make_pose({{0, 0}, {2, 1}, {-1, 3}});
    const Pose out = normalize_observed(full, mask);
    const Pose expected = normalize_observed(trimmed, JointMask::empty());
    CHECK(max_abs_diff(out.joints.topRows(3), expected.joints) <= 1e-12);
}

TEST_CASE("normalize_observed rejects degenerate poses") {
    const Pose pose = make_pose({{1, 1}, {1, 1}, {5, 5}});
    CHECK_THROWS_AS(normalize_observed(pose, JointMask::from_indices({2})),
                    std::invalid_argument);
    CHECK_THROWS_AS(normalize_observed(pose, JointMask::from_indices({1, 2})),
                    std::invalid_argument);
}

TEST_CASE("represent_zero with empty mask equals the plain normalized EDM") {
    Rng rng(9);
    const Pose pose = random_pose(rng, 14);
    const DistanceMatrix a = represent_zero(pose, JointMask::empty());
    const DistanceMatrix b = edm_from_pose(normalize_observed(pose, JointMask::empty()));
    CHECK(max_abs_diff(a.entries, b.entries) == 0.0);
}

TEST_CASE("represent_zero zeroes occluded rows and columns") {
    const Pose pose = make_pose({{0, 0}, {2, 0}, {1, 5}});
    const JointMask mask = JointMask::from_indices({2});
    const DistanceMatrix out = represent_zero(pose, mask);
    CHECK(out.entries.row(2).cwiseAbs().maxCoeff() == 0.0);
    CHECK(out.entries.col(2).cwiseAbs().maxCoeff() == 0.0);
    // The two observed points normalized on their own end up 2 apart.
    CHECK(out.entries(0, 1) == doctest::Approx(2.0));
}

TEST_CASE("represent_zero has exactly 2(N-1) forced zeros for one occluded joint") {
    Rng rng(10);
    const Pose pose = random_pose(rng, 14);
    const DistanceMatrix out = represent_zero(pose, JointMask::from_indices({5}));
    int zero_offdiag = 0;
    for (int i = 0; i < 14; ++i)
        for (int j = 0; j < 14; ++j)
            if (i != j && out.entries(i, j) == 0.0) ++zero_offdiag;
    CHECK(zero_offdiag == 26);
}

TEST_CASE("represent_zero observed entries ignore interior occlusions") {
    // With the box extremes observed, hiding interior joints does not
    // change the normalization of the observed set.
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        Pose pose = random_pose(rng, 14);
        pose.joints(0, 0) = -200;
        pose.joints(0, 1) = -200;
        pose.joints(1, 0) = 200;
        pose.joints(1, 1) = 200;
        const JointMask mask = JointMask::from_indices({4, 9});
        const DistanceMatrix with_mask = represent_zero(pose, mask);
        const DistanceMatrix without = represent_zero(pose, JointMask::empty());
        for (int i = 0; i < 14; ++i)
            for (int j = 0; j < 14; ++j)
                if (!mask.contains(i) && !mask.contains(j))
                    CHECK(with_mask.entries(i, j) == doctest::Approx(without.entries(i, j)));
    }
}

TEST_CASE("represent_average substitutes the observed centroid") {
    const Pose pose = make_pose({{0, 0}, {2, 0}, {1, 5}});
    const JointMask mask = JointMask::from_indices({2});
    const DistanceMatrix out = represent_average(pose, mask);
    CHECK(out.entries(0, 2) == doctest::Approx(out.entries(1, 2)));
    CHECK(out.entries(0, 2) == doctest::Approx(out.entries(0, 1) / 2.0));
}

TEST_CASE("represent_average equals represent_zero on empty masks") {
    Rng rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        const Pose pose = random_pose(rng, 14);
        const DistanceMatrix a = represent_average(pose, JointMask::empty());
        const DistanceMatrix b = represent_zero(pose, JointMask::empty());
        CHECK(max_abs_diff(a.entries, b.entries) <= 1e-12);
    }
}

TEST_CASE("represent_average puts two occluded joints at distance zero") {
    Rng rng(13);
    const Pose pose = random_pose(rng, 14);
    const JointMask mask = JointMask::from_indices({3, 8});
    const DistanceMatrix out = represent_average(pose, mask);
    CHECK(out.entries(3, 8) == 0.0);
}

TEST_CASE("vectorize follows the row-major upper-triangle ordering") {
    const Pose pose = make_pose({{0, 0}, {1, 0}, {0, 1}});
    const EdmVector vec = vectorize(edm_from_pose(pose));
    REQUIRE(vec.length() == 3);
    CHECK(vec.values(0) == doctest::Approx(1.0));
    CHECK(vec.values(1) == doctest::Approx(1.0));
    CHECK(vec.values(2) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("vectorize of a 14x14 matrix has 91 entries") {
    Rng rng(14);
    CHECK(vectorize(testutil::random_edm(rng, 14)).length() == 91);
    CHECK(tri_length(14) == 91);
}

TEST_CASE("vectorize rejects asymmetric matrices") {
    Rng rng(15);
    DistanceMatrix edm = testutil::random_edm(rng, 5);
    edm.entries(1, 2) += 1e-6;
    CHECK_THROWS_AS(vectorize(edm), std::invalid_argument);
}

TEST_CASE("vectorize and devectorize are exact inverses") {
    Rng rng(16);
    for (int trial = 0; trial < 25; ++trial) {
        const DistanceMatrix edm = testutil::random_edm(rng, 14);
        const DevectorizeResult back = devectorize(vectorize(edm), 14);
        CHECK(back.clamped == 0);
        CHECK((back.matrix.entries.array() == edm.entries.array()).all());

        EdmVector vec{Eigen::VectorXd(91)};
        for (int i = 0; i < 91; ++i) vec.values(i) = rng.uniform(0.0, 5.0);
        const EdmVector round = vectorize(devectorize(vec, 14).matrix);
        CHECK((round.values.array() == vec.values.array()).all());
    }
}

TEST_CASE("devectorize clamps negatives and counts them") {
    EdmVector vec{Eigen::VectorXd::Zero(3)};
    vec.values << 1.0, -0.01, 2.0;
    const DevectorizeResult out = devectorize(vec, 3);
    CHECK(out.clamped == 1);
    CHECK(out.matrix.entries(0, 2) == 0.0);
    CHECK(out.matrix.entries(0, 1) == 1.0);

    const DevectorizeResult zeros = devectorize(EdmVector{Eigen::VectorXd::Zero(91)}, 14);
    CHECK(zeros.matrix.entries.cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(devectorize(EdmVector{Eigen::VectorXd::Zero(90)}, 14),
                    std::invalid_argument);
}

TEST_CASE("entry_positions counts masked pairs") {
    CHECK(entry_positions(JointMask::from_indices({5}), 14).size() == 13);
    CHECK(entry_positions(JointMask::from_indices({2, 9}), 14).size() == 25);
    CHECK(entry_positions(JointMask::empty(), 14).empty());
}

TEST_CASE("entry_positions cardinality formula holds exhaustively") {
    for (int n = 4; n <= 14; ++n) {
        for (int a = 0; a < n; ++a) {
            CHECK(static_cast<int>(entry_positions(JointMask::from_indices({a}), n).size()) ==
                  n - 1);
            for (int b = a + 1; b < n; ++b) {
                CHECK(static_cast<int>(
                          entry_positions(JointMask::from_indices({a, b}), n).size()) ==
                      2 * n - 3);
                for (int c = b + 1; c < n; ++c)
                    CHECK(static_cast<int>(
                              entry_positions(JointMask::from_indices({a, b, c}), n).size()) ==
                          3 * n - 6);
            }
        }
    }
}

TEST_CASE("entry_positions and observed_positions partition the triangle") {
    const JointMask mask = JointMask::from_indices({1, 6, 12});
    const auto masked = entry_positions(mask, 14);
    const auto observed = observed_positions(mask, 14);
    CHECK(masked.size() + observed.size() == 91);
    std::vector<int> all = masked;
    all.insert(all.end(), observed.begin(), observed.end());
    std::sort(all.begin(), all.end());
    for (int i = 0; i < 91; ++i) CHECK(all[i] == i);
}

TEST_CASE("assemble_final keeps observed entries and splices recovered ones") {
    Rng rng(18);
    const DistanceMatrix input = testutil::random_edm(rng, 14);
    const DistanceMatrix recovered = testutil::random_edm(rng, 14);
    const JointMask mask = JointMask::from_indices({0, 7});
    const DistanceMatrix out = assemble_final(input, recovered, mask);
    for (int i = 0; i < 14; ++i)
        for (int j = 0; j < 14; ++j) {
            if (i == j) continue;
            if (!mask.contains(i) && !mask.contains(j))
                CHECK(out.entries(i, j) == input.entries(i, j));
            else
                CHECK(out.entries(i, j) == recovered.entries(i, j));
        }

    SUBCASE("empty mask returns the input exactly") {
        const DistanceMatrix same = assemble_final(input, recovered, JointMask::empty());
        CHECK((same.entries.array() == input.entries.array()).all());
    }
    SUBCASE("idempotence") {
        const DistanceMatrix again = assemble_final(out, recovered, mask);
        CHECK((again.entries.array() == out.entries.array()).all());
    }
    SUBCASE("asymmetric input is rejected") {
        DistanceMatrix bad = input;
        bad.entries(2, 3) += 1e-6;
        CHECK_THROWS_AS(assemble_final(bad, recovered, mask), std::invalid_argument);
    }
}

TEST_CASE("assemble_final with all-but-two occluded keeps a single input pair") {
    Rng rng(19);
    const DistanceMatrix input = testutil::random_edm(rng, 14);
    const DistanceMatrix recovered = testutil::random_edm(rng, 14);
    std::vector<int> occluded;
    for (int i = 2; i < 14; ++i) occluded.push_back(i);
    const DistanceMatrix out =
        assemble_final(input, recovered, JointMask::from_indices(occluded));
    int from_input = 0;
    for (int i = 0; i < 14; ++i)
        for (int j = i + 1; j < 14; ++j)
            if (out.entries(i, j) == input.entries(i, j) &&
                input.entries(i, j) != recovered.entries(i, j))
                ++from_input;
    CHECK(from_input == 1);
}

TEST_CASE("perfect recovery assembles to the ground truth at masked positions") {
    Rng rng(20);
    const DistanceMatrix truth = testutil::random_edm(rng, 14);
    const DistanceMatrix occluded = testutil::random_edm(rng, 14);
    const JointMask mask = JointMask::from_indices({4, 5});
    const DistanceMatrix out = assemble_final(occluded, truth, mask);
    for (int pos : entry_positions(mask, 14)) {
        const auto [i, j] = tri_pair(pos, 14);
        CHECK(out.entries(i, j) == truth.entries(i, j));
    }
}

TEST_CASE("err metrics match hand-computed values") {
    Rng rng(21);
    const DistanceMatrix gt = testutil::random_edm(rng, 14);

    SUBCASE("identity gives zero error") {
        CHECK(err_ave(err_matrix(gt, gt)) == doctest::Approx(0.0));
    }
    SUBCASE("scaling by 1.1 gives 10 percent everywhere") {
        DistanceMatrix est = gt;
        est.entries *= 1.1;
        const ErrorMatrix err = err_matrix(est, gt);
        CHECK(err.valid_count() == 14 * 13);
        for (int i = 0; i < 14; ++i)
            for (int j = 0; j < 14; ++j)
                if (i != j) CHECK(err.entries(i, j) == doctest::Approx(10.0).epsilon(1e-9));
        CHECK(err_ave(err) == doctest::Approx(10.0).epsilon(1e-9));
    }
    SUBCASE("full validity divisor for N=14 is 182") {
        CHECK(err_matrix(gt, gt).valid_count() == 182);
    }
}

TEST_CASE("err_matrix excludes coincident ground-truth pairs") {
    Rng rng(22);
    Pose pose = random_pose(rng, 5);
    pose.joints.row(1) = pose.joints.row(0);
    const DistanceMatrix gt = edm_from_pose(pose);
    const DistanceMatrix est = testutil::random_edm(rng, 5);
    const ErrorMatrix err = err_matrix(est, gt);
    CHECK_FALSE(err.validity(0, 1));
    CHECK_FALSE(err.validity(1, 0));
    CHECK(err.valid_count() == 5 * 4 - 2);
}

TEST_CASE("err_ave averages valid entries and rejects empty masks") {
    Rng rng(23);
    const DistanceMatrix gt = testutil::random_edm(rng, 6);
    DistanceMatrix est = gt;
    est.entries *= 1.07;
    CHECK(err_ave(err_matrix(est, gt)) == doctest::Approx(7.0).epsilon(1e-9));

    const Pose twin = make_pose({{1, 1}, {1, 1}});
    const DistanceMatrix degenerate = edm_from_pose(twin);
    CHECK_THROWS_AS(err_ave(err_matrix(degenerate, degenerate)), std::invalid_argument);
}

TEST_CASE("joint mask validation") {
    const JointMask all = JointMask{{0, 1, 2}};
    const JointMask negative = JointMask{{-1}};
    const JointMask oversized = JointMask{{7}};
    CHECK_THROWS_AS(all.validate(3), std::invalid_argument);
    CHECK_THROWS_AS(negative.validate(5), std::invalid_argument);
    CHECK_THROWS_AS(oversized.validate(5), std::invalid_argument);
    const JointMask mask = JointMask::from_indices({3, 1, 3});
    const std::vector<int> expected{1, 3};
    CHECK(mask.occluded == expected);
    mask.validate(5);
}
