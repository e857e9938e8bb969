#include "scenecraft/sim/settle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>

#include "scenecraft/error.hpp"
#include "scenecraft/scene/serialize.hpp"

namespace scenecraft::sim {

using geom::Aabb3;
using geom::Mat3;
using geom::Quat;
using geom::WorldPiece;

namespace {

struct Item {
  std::string id;
  bool dynamic = false;
  double inv_mass = 0.0;
  Mat3 inv_inertia_local = Mat3::Zero();
  Mat3 inv_inertia = Mat3::Zero();  // world
  Vec3 com_local = Vec3::Zero();
  Vec3 x = Vec3::Zero();  // world com
  Quat q = Quat::Identity();
  Vec3 v = Vec3::Zero();
  Vec3 w = Vec3::Zero();
  Vec3 vp = Vec3::Zero();  // pseudo velocities for position correction
  Vec3 wp = Vec3::Zero();
  double friction = 0.5;
  const std::vector<ConvexPiece>* pieces = nullptr;
  std::vector<WorldPiece> world;
  Aabb3 bounds;

  Pose3 object_pose() const { return Pose3(x - (q * com_local), q); }

  void refresh() {
    const Pose3 pose = object_pose();
    world.clear();
    bounds = Aabb3{};
    for (const auto& p : *pieces) {
      world.push_back(WorldPiece::from(p, pose));
      bounds.extend(world.back().bounds);
    }
    const Mat3 r = q.toRotationMatrix();
    inv_inertia = r * inv_inertia_local * r.transpose();
  }
};

using Key = std::array<int, 6>;  // item a, piece a, item b, piece b, side, vertex

struct Contact {
  int a = 0;
  int b = 0;
  Key key{};
  Vec3 n, t1, t2, ra, rb;
  double depth = 0.0;
  double mu = 0.0;
  double mn = 0.0, mt1 = 0.0, mt2 = 0.0;
  double ln = 0.0, lt1 = 0.0, lt2 = 0.0, lp = 0.0;
};

struct Impulses {
  double ln = 0.0, lt1 = 0.0, lt2 = 0.0;
};

struct SatResult {
  Vec3 n;
  double depth;  // positive: penetration; negative: gap
};

void project(const std::vector<Vec3>& vs, const Vec3& d, double& lo, double& hi) {
  lo = hi = vs[0].dot(d);
  for (std::size_t i = 1; i < vs.size(); ++i) {
    const double s = vs[i].dot(d);
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
}

// Minimum-overlap axis over face normals and edge crosses, rejecting pairs
// separated by more than `margin` on any axis. The normal points from a to b.
std::optional<SatResult> sat_contact(const WorldPiece& a, const WorldPiece& b, double margin) {
  double best = std::numeric_limits<double>::infinity();
  Vec3 best_n = Vec3::UnitZ();
  auto test = [&](const Vec3& d) {
    double alo, ahi, blo, bhi;
    project(a.vertices, d, alo, ahi);
    project(b.vertices, d, blo, bhi);
    const double push_pos = ahi - blo;
    const double push_neg = bhi - alo;
    const double pen = std::min(push_pos, push_neg);
    if (pen < -margin) return false;
    if (pen < best) {
      best = pen;
      best_n = push_pos <= push_neg ? d : Vec3(-d);
    }
    return true;
  };
  for (const auto& f : a.faces)
    if (!test(f.normal)) return std::nullopt;
  for (const auto& f : b.faces)
    if (!test(f.normal)) return std::nullopt;
  for (const auto& ea : a.edge_dirs) {
    for (const auto& eb : b.edge_dirs) {
      Vec3 c = ea.cross(eb);
      const double len = c.norm();
      if (len < 1e-6) continue;
      if (!test(c / len)) return std::nullopt;
    }
  }
  return SatResult{best_n, best};
}

Vec3 any_perpendicular(const Vec3& n) {
  const Vec3 ref = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  return n.cross(ref).normalized();
}

struct RawPoint {
  Vec3 p;
  double depth;
  int side;
  int vertex;
};

// Keeps the deepest point and then greedily the points farthest from those kept.
std::vector<RawPoint> reduce(std::vector<RawPoint> pts, std::size_t cap) {
  if (pts.size() <= cap) return pts;
  std::vector<RawPoint> out;
  std::size_t deepest = 0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (pts[i].depth > pts[deepest].depth) deepest = i;
  out.push_back(pts[deepest]);
  std::vector<double> dmin(pts.size(), std::numeric_limits<double>::infinity());
  while (out.size() < cap) {
    std::size_t pick = 0;
    double far = -1.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      dmin[i] = std::min(dmin[i], (pts[i].p - out.back().p).squaredNorm());
      if (dmin[i] > far) {
        far = dmin[i];
        pick = i;
      }
    }
    if (far <= 1e-12) break;
    out.push_back(pts[pick]);
  }
  return out;
}

// Vertices of face f, counter-clockwise about its outward normal.
std::vector<Vec3> face_polygon(const WorldPiece& w, std::size_t f) {
  const auto& pl = w.faces[f];
  std::vector<Vec3> pts;
  for (const auto& v : w.vertices)
    if (std::abs(pl.normal.dot(v) - pl.offset) <= 1e-6) pts.push_back(v);
  if (pts.size() < 3) return pts;
  Vec3 c = Vec3::Zero();
  for (const auto& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  const Vec3 u = any_perpendicular(pl.normal);
  const Vec3 v = pl.normal.cross(u);
  std::sort(pts.begin(), pts.end(), [&](const Vec3& p, const Vec3& q) {
    return std::atan2((p - c).dot(v), (p - c).dot(u)) < std::atan2((q - c).dot(v), (q - c).dot(u));
  });
  return pts;
}

std::size_t most_aligned(const WorldPiece& w, const Vec3& d) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < w.faces.size(); ++i)
    if (w.faces[i].normal.dot(d) > w.faces[best].normal.dot(d)) best = i;
  return best;
}

// Sutherland-Hodgman clip of `poly` against the half space n.x <= o.
std::vector<Vec3> clip(const std::vector<Vec3>& poly, const Vec3& n, double o) {
  std::vector<Vec3> out;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec3& p = poly[i];
    const Vec3& q = poly[(i + 1) % poly.size()];
    const double dp = n.dot(p) - o;
    const double dq = n.dot(q) - o;
    if (dp <= 0.0) out.push_back(p);
    if ((dp < 0.0 && dq > 0.0) || (dp > 0.0 && dq < 0.0)) out.push_back(p + (dp / (dp - dq)) * (q - p));
  }
  return out;
}

// Reference face most aligned with the contact normal, incident face of the
// other piece clipped to its side planes.
std::vector<RawPoint> clipped_manifold(const WorldPiece& a, const WorldPiece& b, const SatResult& s,
                                       double margin) {
  const std::size_t fa = most_aligned(a, s.n);
  const std::size_t fb = most_aligned(b, -s.n);
  const double align_a = a.faces[fa].normal.dot(s.n);
  const double align_b = -b.faces[fb].normal.dot(s.n);
  if (std::max(align_a, align_b) < 0.7) return {};
  const bool ref_is_a = align_a >= align_b;
  const WorldPiece& ref = ref_is_a ? a : b;
  const WorldPiece& inc = ref_is_a ? b : a;
  const auto& rplane = ref.faces[ref_is_a ? fa : fb];
  const std::size_t fi = most_aligned(inc, -rplane.normal);
  std::vector<Vec3> poly = face_polygon(inc, fi);
  const std::vector<Vec3> rpoly = face_polygon(ref, ref_is_a ? fa : fb);
  if (poly.size() < 3 || rpoly.size() < 3) return {};
  for (std::size_t i = 0; i < rpoly.size() && !poly.empty(); ++i) {
    const Vec3 e = rpoly[(i + 1) % rpoly.size()] - rpoly[i];
    const Vec3 side = e.cross(rplane.normal).normalized();
    poly = clip(poly, side, side.dot(rpoly[i]));
  }
  std::vector<RawPoint> pts;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const double depth = rplane.offset - rplane.normal.dot(poly[i]);
    if (depth < -margin) continue;
    pts.push_back({poly[i], std::min(depth, std::max(s.depth, depth)), ref_is_a ? 3 : 4, static_cast<int>(i)});
  }
  return pts;
}

std::vector<RawPoint> manifold(const WorldPiece& a, const WorldPiece& b, const SatResult& s, double margin) {
  std::vector<RawPoint> pts = clipped_manifold(a, b, s, margin);
  if (!pts.empty()) return reduce(std::move(pts), 8);
  double alo, ahi, blo, bhi;
  project(a.vertices, s.n, alo, ahi);
  project(b.vertices, s.n, blo, bhi);
  for (std::size_t i = 0; i < a.vertices.size(); ++i) {
    const Vec3& v = a.vertices[i];
    if (!geom::contains_point(b, v, margin)) continue;
    const double d = std::min(v.dot(s.n) - blo, s.depth);
    pts.push_back({v, d, 0, static_cast<int>(i)});
  }
  for (std::size_t i = 0; i < b.vertices.size(); ++i) {
    const Vec3& u = b.vertices[i];
    if (!geom::contains_point(a, u, margin)) continue;
    const double d = std::min(ahi - u.dot(s.n), s.depth);
    pts.push_back({u, d, 1, static_cast<int>(i)});
  }
  if (pts.empty()) {
    // Edge-on-edge: midpoint of the supporting features.
    Vec3 pa = Vec3::Zero(), pb = Vec3::Zero();
    int na = 0, nb = 0;
    for (const auto& v : a.vertices)
      if (v.dot(s.n) >= ahi - 1e-4) pa += v, ++na;
    for (const auto& u : b.vertices)
      if (u.dot(s.n) <= blo + 1e-4) pb += u, ++nb;
    pts.push_back({0.5 * (pa / na + pb / nb), s.depth, 2, 0});
  }
  return reduce(std::move(pts), 8);
}

bool finite(const Vec3& v) { return v.allFinite(); }

class Solver {
 public:
  Solver(const std::vector<SimBody>& bodies, const std::vector<ConvexPiece>& env, const SimConfig& cfg)
      : cfg_(cfg), env_(env) {
    for (const auto& b : bodies) {
      Item it;
      it.id = b.id;
      it.pieces = &b.asset.collision_pieces;
      it.friction = b.asset.friction;
      it.com_local = b.asset.com;
      it.q = b.pose.rotation;
      it.x = b.pose.apply(b.asset.com);
      it.dynamic = !b.welded;
      if (it.dynamic) {
        if (b.asset.collision_pieces.empty() || !(b.asset.mass > 0.0))
          throw Error(ErrorCode::kSpec, "body " + b.id + " needs collision pieces and positive mass",
                      {{"body", b.id}});
        it.inv_mass = 1.0 / b.asset.mass;
        Eigen::FullPivLU<Mat3> lu(b.asset.inertia);
        it.inv_inertia_local = lu.isInvertible() ? Mat3(lu.inverse()) : Mat3::Zero();
        it.v = b.linear_velocity;
        it.w = b.angular_velocity;
      }
      it.refresh();
      items_.push_back(std::move(it));
    }
    if (!env_.empty()) {
      Item it;
      it.id = "static";
      it.pieces = &env_;
      it.friction = cfg.static_friction;
      it.refresh();
      items_.push_back(std::move(it));
    }
  }

  SettleReport run(const std::vector<SimBody>& bodies) {
    SettleReport rep;
    std::vector<double> start_bottom;
    for (std::size_t i = 0; i < bodies.size(); ++i) start_bottom.push_back(items_[i].bounds.min.z());

    const double dt = cfg_.time_step;
    const int max_steps = static_cast<int>(std::llround(cfg_.duration / dt));
    const int rest_steps = std::max(1, static_cast<int>(std::llround(cfg_.rest_time / dt)));
    int quiet = 0;
    int step = 0;
    for (; step < max_steps; ++step) {
      advance(dt);
      if (cfg_.record_energy) rep.energy.push_back(energy());
      if (cfg_.early_stop) {
        quiet = all_quiet() ? quiet + 1 : 0;
        if (quiet >= rest_steps) {
          ++step;
          rep.at_rest = true;
          break;
        }
      }
    }
    if (!rep.at_rest) rep.at_rest = all_quiet();
    rep.steps = step;
    rep.simulated_time = step * dt;

    for (std::size_t i = 0; i < bodies.size(); ++i) {
      const Item& it = items_[i];
      BodyResult r;
      r.id = it.id;
      r.initial = bodies[i].pose;
      r.welded = bodies[i].welded;
      if (!it.dynamic) {
        r.final = bodies[i].pose;
      } else {
        r.final = it.object_pose();
        r.displacement = (r.final.translation - r.initial.translation).norm();
        r.rotation = geom::rotation_angle_between(r.initial.rotation, r.final.rotation);
        r.fell_off = it.bounds.min.z() < start_bottom[i] - cfg_.fall_drop;
      }
      rep.bodies.push_back(r);
    }
    return rep;
  }

 private:
  double energy() const {
    double e = 0.0;
    for (const auto& it : items_) {
      if (!it.dynamic) continue;
      const double m = 1.0 / it.inv_mass;
      const Mat3 r = it.q.toRotationMatrix();
      const Vec3 wl = r.transpose() * it.w;
      Eigen::FullPivLU<Mat3> lu(it.inv_inertia_local);
      const Mat3 inertia = lu.isInvertible() ? Mat3(lu.inverse()) : Mat3::Zero();
      e += 0.5 * m * it.v.squaredNorm() + 0.5 * wl.dot(inertia * wl) + m * cfg_.gravity * it.x.z();
    }
    return e;
  }

  bool all_quiet() const {
    for (const auto& it : items_)
      if (it.dynamic && (it.v.norm() > cfg_.rest_linear || it.w.norm() > cfg_.rest_angular)) return false;
    return true;
  }

  void collide(int ia, int ib, std::vector<Contact>& out) {
    const Item& A = items_[ia];
    const Item& B = items_[ib];
    const double margin = cfg_.contact_margin;
    if (!A.bounds.overlaps(B.bounds, margin)) return;
    const double mu = std::sqrt(A.friction * B.friction);
    for (std::size_t pa = 0; pa < A.world.size(); ++pa) {
      for (std::size_t pb = 0; pb < B.world.size(); ++pb) {
        const WorldPiece& wa = A.world[pa];
        const WorldPiece& wb = B.world[pb];
        if (!wa.bounds.overlaps(wb.bounds, margin)) continue;
        auto s = sat_contact(wa, wb, margin);
        if (!s) continue;
        for (const auto& rp : manifold(wa, wb, *s, margin)) {
          Contact c;
          c.a = ia;
          c.b = ib;
          c.key = {ia, static_cast<int>(pa), ib, static_cast<int>(pb), rp.side, rp.vertex};
          c.n = s->n;
          c.t1 = any_perpendicular(c.n);
          c.t2 = c.n.cross(c.t1);
          c.ra = rp.p - A.x;
          c.rb = rp.p - B.x;
          c.depth = rp.depth;
          c.mu = mu;
          c.mn = 1.0 / inv_k(c, c.n);
          c.mt1 = 1.0 / inv_k(c, c.t1);
          c.mt2 = 1.0 / inv_k(c, c.t2);
          out.push_back(c);
        }
      }
    }
  }

  double inv_k(const Contact& c, const Vec3& d) const {
    const Item& A = items_[c.a];
    const Item& B = items_[c.b];
    const Vec3 ca = c.ra.cross(d);
    const Vec3 cb = c.rb.cross(d);
    return A.inv_mass + B.inv_mass + ca.dot(A.inv_inertia * ca) + cb.dot(B.inv_inertia * cb);
  }

  static Vec3 point_velocity(const Item& it, const Vec3& r, bool pseudo) {
    return pseudo ? Vec3(it.vp + it.wp.cross(r)) : Vec3(it.v + it.w.cross(r));
  }

  void apply(const Contact& c, const Vec3& impulse, bool pseudo) {
    Item& A = items_[c.a];
    Item& B = items_[c.b];
    Vec3& va = pseudo ? A.vp : A.v;
    Vec3& wa = pseudo ? A.wp : A.w;
    Vec3& vb = pseudo ? B.vp : B.v;
    Vec3& wb = pseudo ? B.wp : B.w;
    if (A.dynamic) {
      va -= A.inv_mass * impulse;
      wa -= A.inv_inertia * c.ra.cross(impulse);
    }
    if (B.dynamic) {
      vb += B.inv_mass * impulse;
      wb += B.inv_inertia * c.rb.cross(impulse);
    }
  }

  Vec3 relative(const Contact& c, bool pseudo) const {
    return point_velocity(items_[c.b], c.rb, pseudo) - point_velocity(items_[c.a], c.ra, pseudo);
  }

  void advance(double dt) {
    for (auto& it : items_) {
      if (!it.dynamic) continue;
      it.v.z() -= cfg_.gravity * dt;
      it.vp.setZero();
      it.wp.setZero();
    }

    std::vector<Contact> contacts;
    const int n = static_cast<int>(items_.size());
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (items_[i].dynamic || items_[j].dynamic) collide(i, j, contacts);

    // Warm start.
    for (auto& c : contacts) {
      auto found = cache_.find(c.key);
      if (found == cache_.end()) continue;
      c.ln = found->second.ln;
      c.lt1 = found->second.lt1;
      c.lt2 = found->second.lt2;
      apply(c, c.ln * c.n + c.lt1 * c.t1 + c.lt2 * c.t2, false);
    }

    for (int iter = 0; iter < cfg_.iterations; ++iter) {
      for (auto& c : contacts) {
        // Speculative contacts may close at most their gap this step.
        const double target = c.depth < 0.0 ? c.depth / dt : 0.0;
        const double vn = relative(c, false).dot(c.n);
        const double old = c.ln;
        c.ln = std::max(0.0, old + c.mn * (target - vn));
        apply(c, (c.ln - old) * c.n, false);

        const Vec3 vr = relative(c, false);
        const double o1 = c.lt1, o2 = c.lt2;
        double l1 = o1 - c.mt1 * vr.dot(c.t1);
        double l2 = o2 - c.mt2 * vr.dot(c.t2);
        const double cap = c.mu * c.ln;
        const double mag = std::hypot(l1, l2);
        if (mag > cap) {
          const double s = mag > 0.0 ? cap / mag : 0.0;
          l1 *= s;
          l2 *= s;
        }
        c.lt1 = l1;
        c.lt2 = l2;
        apply(c, (l1 - o1) * c.t1 + (l2 - o2) * c.t2, false);
      }
    }

    // Position correction on pseudo velocities only.
    for (int iter = 0; iter < cfg_.iterations; ++iter) {
      for (auto& c : contacts) {
        if (c.depth <= cfg_.slop) continue;
        const double target = cfg_.baumgarte * (c.depth - cfg_.slop) / dt;
        const double vn = relative(c, true).dot(c.n);
        const double old = c.lp;
        c.lp = std::max(0.0, old + c.mn * (target - vn));
        apply(c, (c.lp - old) * c.n, true);
      }
    }

    cache_.clear();
    for (const auto& c : contacts) cache_[c.key] = Impulses{c.ln, c.lt1, c.lt2};

    // Rolling resistance: angular damping on bodies that touch something.
    if (cfg_.contact_angular_damping > 0.0) {
      std::vector<char> touching(items_.size(), 0);
      for (const auto& c : contacts)
        if (c.ln > 0.0) touching[c.a] = touching[c.b] = 1;
      const double f = 1.0 / (1.0 + cfg_.contact_angular_damping * dt);
      for (std::size_t i = 0; i < items_.size(); ++i)
        if (touching[i] && items_[i].dynamic) items_[i].w *= f;
    }

    for (auto& it : items_) {
      if (!it.dynamic) continue;
      it.x += (it.v + it.vp) * dt;
      const Vec3 w = it.w + it.wp;
      Quat dq(0.0, w.x(), w.y(), w.z());
      Quat q = it.q;
      q.coeffs() += 0.5 * dt * (dq * q).coeffs();
      it.q = q.normalized();
      if (!finite(it.x) || !finite(it.v) || !finite(it.w) || !it.q.coeffs().allFinite() ||
          it.v.norm() > cfg_.max_speed || it.w.norm() > 10.0 * cfg_.max_speed)
        throw Error(ErrorCode::kSimulationDiverged, "simulation diverged at body " + it.id, {{"body", it.id}});
      it.refresh();
    }
  }

  const SimConfig& cfg_;
  const std::vector<ConvexPiece>& env_;
  std::vector<Item> items_;
  std::map<Key, Impulses> cache_;
};

}  // namespace

const BodyResult& SettleReport::body(const std::string& id) const {
  for (const auto& b : bodies)
    if (b.id == id) return b;
  throw Error(ErrorCode::kNotFound, "no body " + id + " in settle report");
}

SettleReport settle(const std::vector<SimBody>& bodies, const std::vector<ConvexPiece>& static_env,
                    const SimConfig& cfg) {
  if (!(cfg.time_step > 0.0) || !(cfg.duration >= cfg.time_step))
    throw Error(ErrorCode::kSpec, "time_step must be positive and duration at least one step");
  Solver s(bodies, static_env, cfg);
  return s.run(bodies);
}

nlohmann::json to_json(const SettleReport& r) {
  nlohmann::json bodies = nlohmann::json::array();
  for (const auto& b : r.bodies)
    bodies.push_back({{"id", b.id},
                      {"displacement", b.displacement},
                      {"rotation", b.rotation},
                      {"fell_off", b.fell_off},
                      {"welded", b.welded},
                      {"final_pose", scene::pose3_to_json(b.final)}});
  return {{"bodies", bodies}, {"simulated_time", r.simulated_time}, {"steps", r.steps}, {"at_rest", r.at_rest}};
}

}  // namespace scenecraft::sim
