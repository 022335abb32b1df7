#include <catch2/catch_amalgamated.hpp>

#include "ovsg/geometry.hpp"
#include "oracles.hpp"

using ovsg::BBox;

namespace {
BBox random_box(ovsg::Rng& rng, double span = 100.0) {
    double x1 = rng.uniform_in(0, span);
    double y1 = rng.uniform_in(0, span);
    return BBox{x1, y1, x1 + rng.uniform_in(0.5, span), y1 + rng.uniform_in(0.5, span)};
}
}  // namespace

TEST_CASE("iou identity and disjoint cases") {
    BBox a{10, 20, 50, 60};
    CHECK(ovsg::iou(a, a) == 1.0);
    CHECK(ovsg::iou(BBox{0, 0, 1, 1}, BBox{2, 2, 3, 3}) == 0.0);
}

TEST_CASE("iou hand value: unit overlap of two 2x2 boxes") {
    // inter = 1, union = 7  (frozen by hand; rasterization agrees below)
    double v = ovsg::iou(BBox{0, 0, 2, 2}, BBox{1, 1, 3, 3});
    CHECK_THAT(v, Catch::Matchers::WithinAbs(1.0 / 7.0, 1e-9));
    CHECK_THAT(oracles::raster_iou(BBox{0, 0, 2, 2}, BBox{1, 1, 3, 3}),
               Catch::Matchers::WithinAbs(v, 1e-2));
}

TEST_CASE("boxes touching only at an edge have zero intersection") {
    CHECK(ovsg::iou(BBox{0, 0, 1, 1}, BBox{1, 0, 2, 1}) == 0.0);
    CHECK(ovsg::iou(BBox{0, 0, 1, 1}, BBox{0, 1, 1, 2}) == 0.0);
}

TEST_CASE("giou identity, disjoint hand value, hull==union reduction") {
    BBox a{3, 4, 9, 11};
    CHECK(ovsg::giou(a, a) == 1.0);
    // disjoint: hull = 9, union = 2 -> 0 - 7/9
    CHECK_THAT(ovsg::giou(BBox{0, 0, 1, 1}, BBox{2, 2, 3, 3}),
               Catch::Matchers::WithinAbs(-7.0 / 9.0, 1e-9));
    // nested boxes: hull equals the outer box, giou == iou
    BBox outer{0, 0, 10, 10}, inner{2, 2, 8, 8};
    CHECK(ovsg::giou(outer, inner) == ovsg::iou(outer, inner));
}

TEST_CASE("degenerate boxes are contract errors") {
    BBox bad{5, 5, 5, 9};  // zero width
    BBox ok{0, 0, 1, 1};
    CHECK_THROWS_AS(ovsg::iou(bad, ok), ovsg::ContractError);
    CHECK_THROWS_AS(ovsg::giou(ok, bad), ovsg::ContractError);
    CHECK_THROWS_AS(ovsg::box_l1(bad, ok, 10, 10), ovsg::ContractError);
}

TEST_CASE("box_l1 basics") {
    BBox a{10, 10, 30, 30};
    CHECK(ovsg::box_l1(a, a, 100, 100) == 0.0);
    // centers differ by 10px in x on a 100px-wide image -> 0.1
    BBox shifted{20, 10, 40, 30};
    CHECK_THAT(ovsg::box_l1(a, shifted, 100, 100),
               Catch::Matchers::WithinAbs(0.1, 1e-12));
    CHECK_THROWS_AS(ovsg::box_l1(a, shifted, 0, 100), ovsg::ContractError);
}

TEST_CASE("box_l1 satisfies the triangle inequality on random triples") {
    ovsg::Rng rng(7);
    for (int t = 0; t < 200; ++t) {
        BBox a = random_box(rng), b = random_box(rng), c = random_box(rng);
        double ab = ovsg::box_l1(a, b, 200, 200);
        double bc = ovsg::box_l1(b, c, 200, 200);
        double ac = ovsg::box_l1(a, c, 200, 200);
        CHECK(ac <= ab + bc + 1e-12);
    }
}

TEST_CASE("iou/giou bounds, ordering, and rasterization agreement") {
    ovsg::Rng rng(11);
    for (int t = 0; t < 1000; ++t) {
        BBox a = random_box(rng), b = random_box(rng);
        double i = ovsg::iou(a, b);
        double g = ovsg::giou(a, b);
        CHECK(i >= 0.0);
        CHECK(i <= 1.0);
        CHECK(g > -1.0);
        CHECK(g <= 1.0);
        CHECK(g <= i + 1e-12);
        CHECK_THAT(oracles::raster_iou(a, b), Catch::Matchers::WithinAbs(i, 1e-2));
        CHECK_THAT(oracles::raster_giou(a, b), Catch::Matchers::WithinAbs(g, 1e-2));
    }
}

TEST_CASE("iou and giou are invariant under joint translation and scaling") {
    ovsg::Rng rng(13);
    for (int t = 0; t < 200; ++t) {
        BBox a = random_box(rng), b = random_box(rng);
        double tx = rng.uniform_in(-50, 50), ty = rng.uniform_in(-50, 50);
        double s = rng.uniform_in(0.1, 5.0);
        auto tf = [&](const BBox& x) {
            return BBox{s * (x.x1 + tx), s * (x.y1 + ty), s * (x.x2 + tx),
                        s * (x.y2 + ty)};
        };
        CHECK_THAT(ovsg::iou(tf(a), tf(b)),
                   Catch::Matchers::WithinAbs(ovsg::iou(a, b), 1e-9));
        CHECK_THAT(ovsg::giou(tf(a), tf(b)),
                   Catch::Matchers::WithinAbs(ovsg::giou(a, b), 1e-9));
    }
}

TEST_CASE("iou symmetry") {
    ovsg::Rng rng(17);
    for (int t = 0; t < 100; ++t) {
        BBox a = random_box(rng), b = random_box(rng);
        CHECK(ovsg::iou(a, b) == ovsg::iou(b, a));
        CHECK(ovsg::giou(a, b) == ovsg::giou(b, a));
    }
}
