#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "regcorr/geometry.hpp"
#include "regcorr/rng.hpp"

using namespace regcorr;

namespace {

// Independent IoU oracle: count sample points on a fine lattice that fall
// inside both boxes vs inside either.
double iou_rasterized(const Box& a, const Box& b, double step) {
    const double x0 = std::min(a.x_min, b.x_min), x1 = std::max(a.x_max, b.x_max);
    const double y0 = std::min(a.y_min, b.y_min), y1 = std::max(a.y_max, b.y_max);
    auto inside = [](const Box& box, double x, double y) {
        return x >= box.x_min && x < box.x_max && y >= box.y_min && y < box.y_max;
    };
    long long both = 0, either = 0;
    for (double y = y0 + step / 2; y < y1; y += step)
        for (double x = x0 + step / 2; x < x1; x += step) {
            const bool in_a = inside(a, x, y), in_b = inside(b, x, y);
            if (in_a && in_b) ++both;
            if (in_a || in_b) ++either;
        }
    return static_cast<double>(both) / static_cast<double>(either);
}

Box random_int_box(Rng& rng) {
    const int x0 = static_cast<int>(rng.uniform_int(30));
    const int y0 = static_cast<int>(rng.uniform_int(30));
    const int w = 1 + static_cast<int>(rng.uniform_int(20));
    const int h = 1 + static_cast<int>(rng.uniform_int(20));
    return {static_cast<double>(x0), static_cast<double>(y0), static_cast<double>(x0 + w),
            static_cast<double>(y0 + h)};
}

}  // namespace

TEST_SUITE_BEGIN("geometry");

TEST_CASE("iou of identical boxes is 1") {
    const Box b{0, 0, 10, 10};
    CHECK(iou(b, b) == doctest::Approx(1.0));
}

TEST_CASE("iou of disjoint boxes is 0") {
    CHECK(iou({0, 0, 1, 1}, {5, 5, 6, 6}) == 0.0);
}

TEST_CASE("iou matches the rasterization oracle on the 1/7 instance") {
    const Box a{0, 0, 2, 2}, b{1, 1, 3, 3};
    const double expected = iou_rasterized(a, b, 0.25);
    CHECK(expected == doctest::Approx(1.0 / 7.0));
    CHECK(iou(a, b) == doctest::Approx(expected).epsilon(1e-9));
    CHECK(iou(a, b) == doctest::Approx(1.0 / 7.0));
}

TEST_CASE("iou is symmetric and matches pixel counting on random integer boxes") {
    Rng rng(42);
    for (int trial = 0; trial < 100; ++trial) {
        const Box a = random_int_box(rng), b = random_int_box(rng);
        CHECK(iou(a, b) == iou(b, a));
        CHECK(iou(a, a) == doctest::Approx(1.0));
        CHECK(std::abs(iou(a, b) - iou_rasterized(a, b, 1.0)) < 1e-3);
    }
}

TEST_CASE("iou rejects degenerate boxes") {
    CHECK_THROWS_AS(iou({0, 0, 0, 1}, {0, 0, 1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(iou({0, 0, 1, 1}, {2, 2, 2, 2}), std::invalid_argument);
}

TEST_CASE("offset of an identity match is zero") {
    const Box b{0, 0, 10, 10};
    const ImageSize s{100, 100};
    const Offset o = offset_between(b, b, s, s);
    CHECK(o.tx == 0.0);
    CHECK(o.ty == 0.0);
    CHECK(o.sx == 0.0);
    CHECK(o.sy == 0.0);
}

TEST_CASE("offset of a pure translation") {
    const ImageSize s{100, 100};
    const Offset o = offset_between({0, 0, 10, 10}, {10, 0, 20, 10}, s, s);
    CHECK(o.tx == doctest::Approx(0.1));
    CHECK(o.ty == doctest::Approx(0.0));
    CHECK(o.sx == doctest::Approx(0.0));
    CHECK(o.sy == doctest::Approx(0.0));
}

TEST_CASE("offset of a doubling about the corner") {
    const ImageSize s{100, 100};
    const Offset o = offset_between({0, 0, 10, 10}, {0, 0, 20, 20}, s, s);
    CHECK(o.tx == doctest::Approx(0.05));
    CHECK(o.ty == doctest::Approx(0.05));
    CHECK(o.sx == doctest::Approx(1.0));
    CHECK(o.sy == doctest::Approx(1.0));
}

TEST_CASE("assign_bin maps the zero offset to the center bin") {
    const OffsetBin b = assign_bin({0, 0, 0, 0}, {});
    CHECK(b == OffsetBin{0, 0, 0, 0});
}

TEST_CASE("assign_bin rounds to the nearest lattice point") {
    CHECK(assign_bin({0.1, 0, 0, 0}, {}) == OffsetBin{0, 0, 0, 0});
    CHECK(assign_bin({0.13, -0.3, 1.6, 0}, {}) == OffsetBin{1, -1, 2, 0});
}

TEST_CASE("assign_bin rounds halves away from zero") {
    CHECK(assign_bin({0.125, -0.125, 0.5, -0.5}, {}) == OffsetBin{1, -1, 1, -1});
}

TEST_CASE("assign_bin clamps out-of-range offsets to the boundary bins") {
    const BinGrid grid;
    const OffsetBin b = assign_bin({7.0, -9.0, 30.0, -30.0}, grid);
    CHECK(b.itx == grid.max_translation_index());
    CHECK(b.ity == -grid.max_translation_index());
    CHECK(b.isx == grid.max_log_scale_index());
    CHECK(b.isy == -grid.max_log_scale_index());
}

TEST_CASE("default grid bounds") {
    const BinGrid grid;
    grid.validate();
    CHECK(grid.max_translation_index() == 4);
    CHECK(grid.max_log_scale_index() == 2);
}

TEST_CASE("bin grid rejects ranges that are not multiples of the width") {
    BinGrid grid;
    grid.translation_range = 0.9;
    CHECK_THROWS_AS(grid.validate(), std::invalid_argument);
}

TEST_CASE("kernel_entry tests bin equality") {
    CHECK(kernel_entry({0, 0, 0, 0}, {0, 0, 0, 0}) == 1);
    CHECK(kernel_entry({0, 0, 0, 0}, {1, 0, 0, 0}) == 0);
}

TEST_CASE("bin equality is an equivalence relation") {
    Rng rng(7);
    auto random_bin = [&rng] {
        return OffsetBin{static_cast<int>(rng.uniform_int(3)) - 1, static_cast<int>(rng.uniform_int(3)) - 1,
                         static_cast<int>(rng.uniform_int(3)) - 1, static_cast<int>(rng.uniform_int(3)) - 1};
    };
    for (int trial = 0; trial < 200; ++trial) {
        const OffsetBin a = random_bin(), b = random_bin(), c = random_bin();
        CHECK(kernel_entry(a, a) == 1);
        CHECK(kernel_entry(a, b) == kernel_entry(b, a));
        if (kernel_entry(a, b) && kernel_entry(b, c)) CHECK(kernel_entry(a, c) == 1);
    }
}

TEST_CASE("boxes csv round trip") {
    const std::string path = (std::filesystem::temp_directory_path() / "regcorr_boxes_test.csv").string();
    const std::vector<Box> boxes = {{0, 0, 10, 10}, {1.5, 2.25, 3.75, 9.125}};
    save_boxes_csv(path, boxes);
    const auto loaded = load_boxes_csv(path);
    REQUIRE(loaded.size() == boxes.size());
    for (std::size_t i = 0; i < boxes.size(); ++i) CHECK(loaded[i] == boxes[i]);
    std::remove(path.c_str());
}

TEST_SUITE_END();
