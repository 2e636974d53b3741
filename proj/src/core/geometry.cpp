#include "geometry.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <set>

#include "error.hpp"
#include "json.hpp"

namespace aucoder::geometry {

namespace {

// Normalized mean face in the unit square.
constexpr double kMeanFace[68][2] = {
    {0.0792396913815, 0.339223741112}, {0.0829219487236, 0.456955367943}, {0.0967927109165, 0.575648016728},
    {0.122141515615, 0.691921601066},  {0.168687863544, 0.800341263616},  {0.239789390707, 0.895732504778},
    {0.325662452515, 0.977068762493},  {0.422318282013, 1.04329000149},   {0.531777802068, 1.06080371126},
    {0.641296298053, 1.03981924107},   {0.738105872266, 0.972268833998},  {0.824444363295, 0.889624082279},
    {0.894792677532, 0.792494155836},  {0.939395486253, 0.681546643421},  {0.96111933829, 0.562238253072},
    {0.970579841181, 0.441758925744},  {0.971193274221, 0.322118743967},  {0.163846223133, 0.249151738053},
    {0.21780354657, 0.204255863861},   {0.291299351124, 0.192367318323},  {0.367460241458, 0.203582210627},
    {0.4392945113, 0.233135599851},    {0.586445962425, 0.228141644834},  {0.660152671635, 0.195923841854},
    {0.737466449096, 0.182360984545},  {0.813236546239, 0.192828009114},  {0.8707571886, 0.235293377042},
    {0.51534533827, 0.31863546193},    {0.516221448289, 0.396200446263},  {0.517118861835, 0.473797687758},
    {0.51816430343, 0.553157797772},   {0.433701156035, 0.604054457668},  {0.475501237769, 0.62076344024},
    {0.520712933176, 0.634268222208},  {0.565874114041, 0.618796581487},  {0.607054002672, 0.60157671656},
    {0.252418718401, 0.331052263829},  {0.298663015648, 0.302646354002},  {0.355749724218, 0.303020650651},
    {0.403718978315, 0.33867711083},   {0.352507175597, 0.349987615384},  {0.296791759886, 0.350478978225},
    {0.631326076346, 0.334136672344},  {0.679073381078, 0.29645404267},   {0.73597236153, 0.294721285802},
    {0.782865376271, 0.321305281656},  {0.740312274764, 0.341849376713},  {0.68499850091, 0.343734332172},
    {0.353167761422, 0.746189164237},  {0.414587777921, 0.719053835073},  {0.477677654595, 0.706835892494},
    {0.522732900812, 0.717092275768},  {0.569832064287, 0.705414478982},  {0.635195811927, 0.71565572516},
    {0.69951672331, 0.739419187253},   {0.639447159575, 0.805236879972},  {0.576410514055, 0.835436670169},
    {0.525398405766, 0.841706377792},  {0.47641545769, 0.837505914975},   {0.41379548902, 0.810045601727},
    {0.380084785646, 0.749979603086},  {0.477955996282, 0.74513234612},   {0.523389793327, 0.748924302636},
    {0.571057789237, 0.74332894691},   {0.672409137852, 0.744177032192},  {0.572539621444, 0.776609286626},
    {0.5240106503, 0.783370783245},    {0.477561227414, 0.781950269102}};

KeypointArray build_template() {
  double xmin = 1e9, xmax = -1e9, ymin = 1e9, ymax = -1e9;
  for (const auto& p : kMeanFace) {
    xmin = std::min(xmin, p[0]);
    xmax = std::max(xmax, p[0]);
    ymin = std::min(ymin, p[1]);
    ymax = std::max(ymax, p[1]);
  }
  const double box = 200.0;
  const double scale = box / std::max(xmax - xmin, ymax - ymin);
  const double ox = 0.5 * (box - scale * (xmax - xmin));
  const double oy = 0.5 * (box - scale * (ymax - ymin));
  KeypointArray t{};
  for (std::size_t i = 0; i < kTemplatePoints; ++i) {
    t[i] = {ox + scale * (kMeanFace[i][0] - xmin), oy + scale * (kMeanFace[i][1] - ymin)};
  }
  return t;
}

std::vector<int> range(int lo, int hi) {
  std::vector<int> v;
  for (int i = lo; i <= hi; ++i) v.push_back(i);
  return v;
}

std::vector<int> concat(std::vector<int> a, const std::vector<int>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

PartGroup make_group(std::string name, std::vector<int> anchors, std::vector<int> members) {
  const auto& t = canonical_template();
  PartGroup g{std::move(name), std::move(anchors), std::move(members), {}};
  for (int a : g.anchors) g.canonical_anchors.push_back(t[static_cast<std::size_t>(a)]);
  return g;
}

// Face parts in template order. Eyebrow and eye of the same side share one
// group; lips carry no anchors.
std::vector<PartGroup> default_part_groups() {
  return {
      make_group("jawline", {0, 16}, range(0, 16)),
      make_group("right_brow_eye", {36, 39}, concat(range(17, 21), range(36, 41))),
      make_group("left_brow_eye", {42, 45}, concat(range(22, 26), range(42, 47))),
      make_group("nose", {27}, range(27, 35)),
      make_group("lips", {}, range(48, 67)),
  };
}

AnchorSet make_anchor_set(std::string id, std::array<int, 6> affine) {
  AnchorSet s;
  s.id = std::move(id);
  s.affine_anchors = affine;
  const auto& t = canonical_template();
  for (std::size_t i = 0; i < 6; ++i) s.canonical_affine[i] = t[static_cast<std::size_t>(affine[i])];
  s.part_groups = default_part_groups();
  return s;
}

Point2 to_point(const nlohmann::json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

}  // namespace

const KeypointArray& canonical_template() {
  static const KeypointArray t = build_template();
  return t;
}

void AnchorSet::validate() const {
  std::set<int> seen;
  for (int a : affine_anchors) {
    if (a < 0 || a >= static_cast<int>(kTemplatePoints))
      fail(ErrorCode::InvalidArgument, "anchor set '" + id + "': affine anchor out of range");
    if (!seen.insert(a).second)
      fail(ErrorCode::InvalidArgument, "anchor set '" + id + "': affine anchors must be distinct");
  }
  std::set<int> members;
  for (const auto& g : part_groups) {
    if (g.anchors.size() > 2)
      fail(ErrorCode::InvalidArgument, "anchor set '" + id + "': group '" + g.name + "' has more than two anchors");
    if (g.canonical_anchors.size() != g.anchors.size())
      fail(ErrorCode::InvalidArgument,
           "anchor set '" + id + "': group '" + g.name + "' canonical anchor count mismatch");
    for (int m : g.members) {
      if (m < 0 || m >= static_cast<int>(kTemplatePoints))
        fail(ErrorCode::InvalidArgument, "anchor set '" + id + "': member index out of range");
      if (!members.insert(m).second)
        fail(ErrorCode::InvalidArgument,
             "anchor set '" + id + "': keypoint " + std::to_string(m) + " belongs to two part groups");
    }
    for (int a : g.anchors) {
      if (std::find(g.members.begin(), g.members.end(), a) == g.members.end())
        fail(ErrorCode::InvalidArgument,
             "anchor set '" + id + "': group '" + g.name + "' anchor is not one of its members");
    }
  }
}

bool AnchorSet::affine_anchors_present(const KeypointMask& mask) const {
  return std::all_of(affine_anchors.begin(), affine_anchors.end(),
                     [&](int a) { return mask[static_cast<std::size_t>(a)]; });
}

std::vector<std::string> builtin_anchor_set_names() { return {"disfa_ck", "bp4d"}; }

AnchorSet builtin_anchor_set(const std::string& id) {
  if (id == "disfa_ck") return make_anchor_set(id, {0, 16, 39, 42, 27, 33});
  if (id == "bp4d") return make_anchor_set(id, {39, 42, 36, 45, 27, 33});
  fail(ErrorCode::InvalidArgument, "unknown anchor set '" + id + "'");
}

AnchorSet load_anchor_set(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(io::read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, path.string() + ": " + e.what());
  }
  const auto& t = canonical_template();
  AnchorSet s;
  try {
    s.id = j.value("id", path.stem().string());
    const auto& aff = j.at("affine_anchors");
    if (aff.size() != 6) fail(ErrorCode::InvalidArgument, path.string() + ": affine_anchors must list six indices");
    for (std::size_t i = 0; i < 6; ++i) s.affine_anchors[i] = aff.at(i).get<int>();
    s.validate();  // index range check before template lookups
    if (j.contains("canonical_affine")) {
      for (std::size_t i = 0; i < 6; ++i) s.canonical_affine[i] = to_point(j["canonical_affine"].at(i));
    } else {
      for (std::size_t i = 0; i < 6; ++i) s.canonical_affine[i] = t[static_cast<std::size_t>(s.affine_anchors[i])];
    }
    if (j.contains("part_groups")) {
      for (const auto& gj : j["part_groups"]) {
        PartGroup g;
        g.name = gj.at("name").get<std::string>();
        g.anchors = gj.value("anchors", std::vector<int>{});
        g.members = gj.at("members").get<std::vector<int>>();
        for (int a : g.anchors)
          if (a < 0 || a >= static_cast<int>(kTemplatePoints))
            fail(ErrorCode::InvalidArgument, path.string() + ": group anchor out of range");
        if (gj.contains("canonical_anchors")) {
          for (const auto& c : gj["canonical_anchors"]) g.canonical_anchors.push_back(to_point(c));
        } else {
          for (int a : g.anchors) g.canonical_anchors.push_back(t[static_cast<std::size_t>(a)]);
        }
        s.part_groups.push_back(std::move(g));
      }
    } else {
      s.part_groups = default_part_groups();
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, path.string() + ": malformed anchor set: " + e.what());
  }
  s.validate();
  return s;
}

AnchorSet resolve_anchor_set(const std::string& name_or_path, const std::filesystem::path& base_dir) {
  for (const auto& n : builtin_anchor_set_names())
    if (n == name_or_path) return builtin_anchor_set(n);
  std::filesystem::path p(name_or_path);
  if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
  if (!std::filesystem::exists(p)) fail(ErrorCode::InvalidArgument, "unknown anchor set '" + name_or_path + "'");
  return load_anchor_set(p);
}

const AnchorSet& select_anchor_set(const KeypointMask& mask, std::span<const AnchorSet> candidates) {
  for (const auto& c : candidates)
    if (c.affine_anchors_present(mask)) return c;
  fail(ErrorCode::InvalidArgument, "no anchor set has all affine anchors present in this dataset");
}

Point2 AffineParams::apply(const Point2& p) const {
  const Eigen::Vector2d q = linear * Eigen::Vector2d(p.x, p.y) + translation;
  return {q.x(), q.y()};
}

Point2 SimilarityParams::apply(const Point2& p) const {
  const double c = scale * std::cos(angle), s = scale * std::sin(angle);
  return {c * p.x - s * p.y + translation.x(), s * p.x + c * p.y + translation.y()};
}

AffineParams estimate_affine(std::span<const Point2> src, std::span<const Point2> dst) {
  if (src.size() != dst.size() || src.size() < 3)
    fail(ErrorCode::InvalidArgument, "affine estimation needs at least three matched point pairs");
  const auto n = static_cast<Eigen::Index>(src.size());

  // Center and scale the source for conditioning, then undo afterwards.
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  for (const auto& p : src) centroid += Eigen::Vector2d(p.x, p.y);
  centroid /= static_cast<double>(n);
  double spread = 0.0;
  for (const auto& p : src) spread += (Eigen::Vector2d(p.x, p.y) - centroid).squaredNorm();
  spread = std::sqrt(spread / static_cast<double>(n));
  if (!(spread > 0.0) || !std::isfinite(spread))
    fail(ErrorCode::Degenerate, "degenerate anchor configuration: anchors coincide");
  const double inv = 1.0 / spread;

  Eigen::MatrixXd design = Eigen::MatrixXd::Zero(2 * n, 6);
  Eigen::VectorXd rhs(2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = (src[i].x - centroid.x()) * inv;
    const double y = (src[i].y - centroid.y()) * inv;
    design.row(2 * i) << x, y, 1.0, 0.0, 0.0, 0.0;
    design.row(2 * i + 1) << 0.0, 0.0, 0.0, x, y, 1.0;
    rhs(2 * i) = dst[i].x;
    rhs(2 * i + 1) = dst[i].y;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-9);
  if (qr.rank() < 6) fail(ErrorCode::Degenerate, "degenerate anchor configuration: anchors are collinear");
  const Eigen::VectorXd sol = qr.solve(rhs);

  Eigen::Matrix2d lin;
  lin << sol(0), sol(1), sol(3), sol(4);
  AffineParams out;
  out.linear = lin * inv;
  out.translation = Eigen::Vector2d(sol(2), sol(5)) - out.linear * centroid;
  out.residual = (design * sol - rhs).squaredNorm();
  if (!out.linear.allFinite() || !out.translation.allFinite())
    fail(ErrorCode::Degenerate, "affine estimation produced non-finite parameters");
  return out;
}

io::KeypointFrame apply_affine(const AffineParams& params, const io::KeypointFrame& frame) {
  io::KeypointFrame out = frame;
  for (std::size_t i = 0; i < kTemplatePoints; ++i) {
    out.points[i] = frame.mask[i] ? params.apply(frame.points[i]) : Point2{};
  }
  return out;
}

SimilarityParams estimate_similarity(std::span<const Point2> src, std::span<const Point2> dst) {
  if (src.size() != dst.size() || src.empty() || src.size() > 2)
    fail(ErrorCode::InvalidArgument, "similarity estimation takes one or two matched anchors");
  SimilarityParams out;
  if (src.size() == 1) {
    out.degenerate = true;
    out.translation = Eigen::Vector2d(dst[0].x - src[0].x, dst[0].y - src[0].y);
    return out;
  }
  using C = std::complex<double>;
  const C s0(src[0].x, src[0].y), s1(src[1].x, src[1].y);
  const C d0(dst[0].x, dst[0].y), d1(dst[1].x, dst[1].y);
  if (s1 == s0) fail(ErrorCode::Degenerate, "coincident similarity anchors");
  const C a = (d1 - d0) / (s1 - s0);
  const C b = d0 - a * s0;
  out.scale = std::abs(a);
  out.angle = std::arg(a);
  out.translation = Eigen::Vector2d(b.real(), b.imag());
  if (!(out.scale > 0.0) || !std::isfinite(out.scale))
    fail(ErrorCode::Degenerate, "similarity estimation produced a non-positive scale");
  return out;
}

io::KeypointFrame register_frame(const io::KeypointFrame& frame, const AnchorSet& anchors) {
  for (int a : anchors.affine_anchors) {
    if (!frame.mask[static_cast<std::size_t>(a)])
      fail(ErrorCode::MaskMismatch, "affine anchor " + std::to_string(a) + " of anchor set '" + anchors.id +
                                        "' is absent in this dataset");
  }
  std::array<Point2, 6> src{};
  for (std::size_t i = 0; i < 6; ++i) src[i] = frame.points[static_cast<std::size_t>(anchors.affine_anchors[i])];
  io::KeypointFrame out = apply_affine(estimate_affine(src, anchors.canonical_affine), frame);

  for (const auto& group : anchors.part_groups) {
    if (group.anchors.empty()) continue;
    const bool present = std::all_of(group.anchors.begin(), group.anchors.end(),
                                     [&](int a) { return out.mask[static_cast<std::size_t>(a)]; });
    if (!present) continue;
    std::vector<Point2> gsrc;
    for (int a : group.anchors) gsrc.push_back(out.points[static_cast<std::size_t>(a)]);
    const auto sim = estimate_similarity(gsrc, group.canonical_anchors);
    for (int m : group.members) {
      const auto idx = static_cast<std::size_t>(m);
      if (out.mask[idx]) out.points[idx] = sim.apply(out.points[idx]);
    }
  }
  return out;
}

}  // namespace aucoder::geometry
