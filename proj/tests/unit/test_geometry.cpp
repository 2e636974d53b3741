#include "doctest.h"

#include <cmath>
#include <random>

#include "error.hpp"
#include "geometry.hpp"
#include "oracles.hpp"

using namespace aucoder;
using geometry::AnchorSet;

namespace {

io::KeypointFrame template_frame() {
  io::KeypointFrame f;
  f.points = geometry::canonical_template();
  f.mask = full_keypoint_mask();
  return f;
}

io::KeypointFrame similarity_of(const io::KeypointFrame& f, double s, double theta, double tx, double ty) {
  geometry::SimilarityParams p;
  p.scale = s;
  p.angle = theta;
  p.translation = {tx, ty};
  io::KeypointFrame out = f;
  for (std::size_t i = 0; i < kTemplatePoints; ++i)
    if (f.mask[i]) out.points[i] = p.apply(f.points[i]);
  return out;
}

double dist(const Point2& a, const Point2& b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace

TEST_CASE("affine estimation on simple maps") {
  const std::vector<Point2> src = {{0, 0}, {1, 0}, {0, 1}, {3, 2}, {-1, 4}, {2, -2}};
  const auto id = geometry::estimate_affine(src, src);
  CHECK((id.linear - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(id.translation.norm() < 1e-12);

  std::vector<Point2> doubled;
  for (const auto& p : src) doubled.push_back({2 * p.x, 2 * p.y});
  const auto half = geometry::estimate_affine(doubled, src);
  CHECK((half.linear - 0.5 * Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(half.translation.norm() < 1e-12);
  CHECK(half.residual < 1e-20);
}

TEST_CASE("affine estimation matches a normal-equations oracle") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Point2> src, dst;
    std::vector<Eigen::Vector2d> s2, d2;
    Eigen::Matrix2d a;
    a << u(rng) / 50, u(rng) / 50, u(rng) / 50, u(rng) / 50;
    const Eigen::Vector2d t(u(rng), u(rng));
    for (int i = 0; i < 6; ++i) {
      const Eigen::Vector2d p(u(rng), u(rng));
      const Eigen::Vector2d q = a * p + t;
      src.push_back({p.x(), p.y()});
      dst.push_back({q.x(), q.y()});
      s2.push_back(p);
      d2.push_back(q);
    }
    const auto est = geometry::estimate_affine(src, dst);
    const auto ne = oracle::affine_normal_equations(s2, d2);
    CHECK(std::abs(est.linear(0, 0) - ne(0)) < 1e-10);
    CHECK(std::abs(est.linear(0, 1) - ne(1)) < 1e-10);
    CHECK(std::abs(est.translation.x() - ne(2)) < 1e-10);
    CHECK(std::abs(est.linear(1, 0) - ne(3)) < 1e-10);
    CHECK(std::abs(est.linear(1, 1) - ne(4)) < 1e-10);
    CHECK(std::abs(est.translation.y() - ne(5)) < 1e-10);
    CHECK((est.linear - a).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((est.translation - t).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("affine estimation rejects degenerate anchors") {
  const std::vector<Point2> line = {{0, 0}, {1, 1}, {2, 2}, {3, 3}, {4, 4}, {5, 5}};
  CHECK_THROWS_AS(geometry::estimate_affine(line, line), Error);
  const std::vector<Point2> same(6, Point2{3, 3});
  CHECK_THROWS_AS(geometry::estimate_affine(same, same), Error);
}

TEST_CASE("apply_affine") {
  auto f = template_frame();
  const auto id = geometry::apply_affine(geometry::AffineParams{}, f);
  CHECK(id.points == f.points);

  geometry::AffineParams shift;
  shift.translation = {5, 0};
  const auto moved = geometry::apply_affine(shift, f);
  for (std::size_t i = 0; i < kTemplatePoints; ++i) {
    CHECK(moved.points[i].x == f.points[i].x + 5);
    CHECK(moved.points[i].y == f.points[i].y);
  }

  for (int k = 0; k <= 16; ++k) {
    f.mask[k] = false;
    f.points[k] = {};
  }
  geometry::AffineParams any;
  any.linear << 1.3, -0.2, 0.4, 0.9;
  any.translation = {7, -3};
  const auto out = geometry::apply_affine(any, f);
  for (int k = 0; k <= 16; ++k) CHECK(out.points[k] == Point2{0, 0});
  CHECK(out.mask == f.mask);
}

TEST_CASE("similarity estimation") {
  const std::vector<Point2> pts = {{1, 2}, {4, -3}};
  const auto id = geometry::estimate_similarity(pts, pts);
  CHECK(id.scale == doctest::Approx(1.0));
  CHECK(std::abs(id.angle) < 1e-15);
  CHECK(id.translation.norm() < 1e-14);
  CHECK_FALSE(id.degenerate);

  const std::vector<Point2> dst = {{1, 0}, {0, 2}};
  const std::vector<Point2> rotated = {{0, 1}, {-2, 0}};  // dst rotated +90 degrees
  const auto r = geometry::estimate_similarity(rotated, dst);
  CHECK(r.scale == doctest::Approx(1.0));
  CHECK(r.angle * 180.0 / M_PI == doctest::Approx(-90.0));
  CHECK(r.translation.norm() < 1e-14);

  const std::vector<Point2> nose_src = {{10, 10}};
  const std::vector<Point2> nose_dst = {{12, 15}};
  const auto n = geometry::estimate_similarity(nose_src, nose_dst);
  CHECK(n.degenerate);
  CHECK(n.scale == 1.0);
  CHECK(n.angle == 0.0);
  CHECK(n.translation.x() == 2.0);
  CHECK(n.translation.y() == 5.0);

  const std::vector<Point2> coincident = {{1, 1}, {1, 1}};
  CHECK_THROWS_AS(geometry::estimate_similarity(coincident, dst), Error);
}

TEST_CASE("built-in anchor sets") {
  const auto d = geometry::builtin_anchor_set("disfa_ck");
  const auto b = geometry::builtin_anchor_set("bp4d");
  CHECK(d.affine_anchors == std::array<int, 6>{0, 16, 39, 42, 27, 33});
  CHECK(b.affine_anchors == std::array<int, 6>{39, 42, 36, 45, 27, 33});
  CHECK_NOTHROW(d.validate());
  CHECK_NOTHROW(b.validate());

  const auto bp4d_mask = io::builtin_template_map("bp4d49").keypoint_mask();
  const std::vector<AnchorSet> both = {d, b};
  CHECK(geometry::select_anchor_set(bp4d_mask, both).id == "bp4d");
  CHECK(geometry::select_anchor_set(full_keypoint_mask(), both).id == "disfa_ck");
}

TEST_CASE("anchor set from JSON") {
  const auto dir = oracle::scratch_dir("geometry_anchors");
  io::write_text_file(dir / "a.json", R"({"id": "custom", "affine_anchors": [36, 45, 39, 42, 30, 8],
    "part_groups": [{"name": "eyes", "anchors": [36, 45], "members": [36, 37, 45]}]})");
  const auto a = geometry::resolve_anchor_set("a.json", dir);
  CHECK(a.id == "custom");
  CHECK(a.part_groups.size() == 1);
  CHECK(a.canonical_affine[1] == geometry::canonical_template()[45]);
  io::write_text_file(dir / "bad.json", R"({"affine_anchors": [1, 1, 2, 3, 4, 5]})");
  CHECK_THROWS_AS(geometry::load_anchor_set(dir / "bad.json"), Error);
}

TEST_CASE("registration fixed point") {
  for (const auto& name : geometry::builtin_anchor_set_names()) {
    const auto f = template_frame();
    const auto r = geometry::register_frame(f, geometry::builtin_anchor_set(name));
    for (std::size_t i = 0; i < kTemplatePoints; ++i) CHECK(dist(r.points[i], f.points[i]) <= 1e-12);
  }
}

TEST_CASE("global similarities register back onto canonical anchors") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> ang(-M_PI, M_PI), sc(0.3, 3.0), tr(-500.0, 500.0);
  const auto anchors = geometry::builtin_anchor_set("disfa_ck");
  for (int trial = 0; trial < 100; ++trial) {
    const auto f = similarity_of(template_frame(), sc(rng), ang(rng), tr(rng), tr(rng));
    const auto r = geometry::register_frame(f, anchors);
    for (const auto& g : anchors.part_groups) {
      for (std::size_t a = 0; a < g.anchors.size(); ++a)
        CHECK(dist(r.points[static_cast<std::size_t>(g.anchors[a])], g.canonical_anchors[a]) < 1e-10);
    }
  }
}

TEST_CASE("BP4D-style mask registers with its own anchors") {
  auto f = similarity_of(template_frame(), 1.2, 0.3, 40, -10);
  for (int k = 0; k <= 16; ++k) {
    f.mask[k] = false;
    f.points[k] = {};
  }
  CHECK_THROWS_AS(geometry::register_frame(f, geometry::builtin_anchor_set("disfa_ck")), Error);
  const auto r = geometry::register_frame(f, geometry::builtin_anchor_set("bp4d"));
  CHECK(r.mask == f.mask);
  for (int k = 0; k <= 16; ++k) CHECK(r.points[k] == Point2{0, 0});
  const auto& t = geometry::canonical_template();
  for (int k : {36, 39, 42, 45}) CHECK(dist(r.points[k], t[k]) < 1e-10);
}

TEST_CASE("registration is invariant to a global similarity") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> jitter(0.0, 2.0);
  std::uniform_real_distribution<double> ang(-0.8, 0.8), sc(0.5, 2.0), tr(-100.0, 100.0);
  const auto anchors = geometry::builtin_anchor_set("disfa_ck");
  for (int trial = 0; trial < 50; ++trial) {
    auto f = template_frame();
    for (auto& p : f.points) {
      p.x += jitter(rng);
      p.y += jitter(rng);
    }
    const auto a = geometry::register_frame(f, anchors);
    const auto b = geometry::register_frame(similarity_of(f, sc(rng), ang(rng), tr(rng), tr(rng)), anchors);
    for (const auto& g : anchors.part_groups) {
      if (g.anchors.size() != 2) continue;
      for (int m : g.members) CHECK(dist(a.points[m], b.points[m]) < 1e-8);
    }
    CHECK(a.mask == f.mask);
  }
}
