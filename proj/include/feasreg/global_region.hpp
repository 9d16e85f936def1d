#pragma once

#include "feasreg/region.hpp"

#include <cmath>
#include <fstream>
#include <future>
#include <optional>
#include <string>
#include <vector>

namespace feasreg {

struct SipRequest {
  const Scenario* scenario = nullptr;
  std::vector<Vec2> directions;  // unit vectors
  double alpha = 0.5;            // step gain in (0, 1]
  double eps_d = 1e-3;           // m, convergence distance
  int max_iterations = 50;       // per direction
  double region_eps = 1e-5;      // m^2, per-iterate projection tolerance
  ConstraintMode mode = ConstraintMode::friction_and_actuation;
  bool concurrent = true;

  static SipRequest from_scenario(const Scenario& sc, int num_directions = 16) {
    SipRequest req;
    req.scenario = &sc;
    for (int k = 0; k < num_directions; ++k) {
      const double th = 2.0 * 3.14159265358979323846 * k / num_directions;
      req.directions.emplace_back(std::cos(th), std::sin(th));
    }
    return req;
  }
};

enum class SipStatus { converged, kinematic_limit, region_vanished, not_converged };

inline const char* to_string(SipStatus s) {
  switch (s) {
    case SipStatus::converged: return "converged";
    case SipStatus::kinematic_limit: return "kinematic_limit";
    case SipStatus::region_vanished: return "region_vanished";
    case SipStatus::not_converged: return "not_converged";
  }
  return "?";
}

struct SipVertexResult {
  SipStatus status = SipStatus::not_converged;
  Vec2 vertex = Vec2::Zero();          // last CoM iterate
  std::vector<double> distance_trace;  // d_k per iteration, m
  int iterations = 0;
  std::string detail;
};

namespace detail {

// Intersection interval of the line c + t*a with a convex polygon; empty()
// when the line misses it.
struct LineClip {
  double t_min = -std::numeric_limits<double>::infinity();
  double t_max = std::numeric_limits<double>::infinity();
  bool empty() const { return t_min > t_max; }
};

inline LineClip clip_line(const Polygon2& poly, const Vec2& c, const Vec2& a) {
  LineClip lc;
  for (const Halfspace2& h : poly.halfspaces()) {
    const double denom = h.a.dot(a);
    const double room = h.b - h.a.dot(c);
    if (std::abs(denom) < 1e-14) {
      if (room < 0.0) {
        lc.t_min = 1.0;
        lc.t_max = 0.0;
        return lc;
      }
      continue;
    }
    const double t = room / denom;
    if (denom > 0.0)
      lc.t_max = std::min(lc.t_max, t);
    else
      lc.t_min = std::max(lc.t_min, t);
  }
  return lc;
}

}  // namespace detail

/// One SIP run: walk the CoM along `direction`, re-solving IK and the local
/// region at every iterate, until the region boundary meets the CoM
/// (distance <= eps_d). Returns the failure mode instead of throwing so
/// direction batches never abort.
inline SipVertexResult sip_vertex(const SipRequest& req, const Vec2& direction) {
  if (!req.scenario) throw Error("sip_vertex: request has no scenario");
  if (req.alpha <= 0.0 || req.alpha > 1.0)
    throw DegenerateInput("sip_vertex: alpha must be in (0, 1]");
  if (std::abs(direction.norm() - 1.0) > 1e-9)
    throw DegenerateInput("sip_vertex: direction must be unit-norm");
  Scenario sc = *req.scenario;  // contacts stay fixed in the world frame
  SipVertexResult out;
  Vec2 c_hat = sc.com.head<2>();
  for (int k = 0; k < req.max_iterations; ++k) {
    sc.com.head<2>() = c_hat;
    RegionRequest rr = RegionRequest::from_scenario(sc, req.mode);
    rr.eps = req.region_eps;
    std::optional<RegionResult> region;
    try {
      region = compute_region(rr);  // limb states re-solved by IK inside
    } catch (const OutOfWorkspace& e) {
      out.status = SipStatus::kinematic_limit;
      out.detail = e.what();
      out.vertex = c_hat;
      return out;
    } catch (const JointLimit& e) {
      out.status = SipStatus::kinematic_limit;
      out.detail = e.what();
      out.vertex = c_hat;
      return out;
    } catch (const EmptyRegion& e) {
      out.status = SipStatus::region_vanished;
      out.detail = e.what();
      out.vertex = c_hat;
      return out;
    }
    const detail::LineClip lc = detail::clip_line(region->inner, c_hat, direction);
    Vec2 e;
    if (!lc.empty() && std::isfinite(lc.t_max)) {
      e = c_hat + lc.t_max * direction;
    } else {
      // Region drifted off the search line; pull back to its closest point.
      e = closest_point_in_polygon(region->inner, c_hat);
    }
    const double d = (e - c_hat).norm();
    out.distance_trace.push_back(d);
    out.iterations = k + 1;
    if (d <= req.eps_d) {
      out.status = SipStatus::converged;
      out.vertex = c_hat;
      return out;
    }
    c_hat += req.alpha * (e - c_hat);
  }
  out.status = SipStatus::not_converged;
  out.vertex = c_hat;
  return out;
}

struct GlobalRegionResult {
  std::vector<SipVertexResult> per_direction;  // aligned with request order
  std::optional<Polygon2> hull;                // of converged vertices
  int converged_count = 0;
};

/// SIP across all requested directions (concurrently when allowed); the
/// global region is the hull of the converged vertices.
inline GlobalRegionResult global_region(const SipRequest& req) {
  if (req.directions.size() < 3)
    throw DegenerateInput("global_region: need at least 3 directions");
  GlobalRegionResult out;
  out.per_direction.resize(req.directions.size());
  if (req.concurrent) {
    std::vector<std::future<SipVertexResult>> futures;
    futures.reserve(req.directions.size());
    for (const Vec2& a : req.directions)
      futures.push_back(std::async(std::launch::async, [&req, a] { return sip_vertex(req, a); }));
    for (std::size_t i = 0; i < futures.size(); ++i) out.per_direction[i] = futures[i].get();
  } else {
    for (std::size_t i = 0; i < req.directions.size(); ++i)
      out.per_direction[i] = sip_vertex(req, req.directions[i]);
  }
  std::vector<Vec2> vertices;
  for (const SipVertexResult& r : out.per_direction)
    if (r.status == SipStatus::converged) vertices.push_back(r.vertex);
  out.converged_count = static_cast<int>(vertices.size());
  if (vertices.size() >= 3) {
    try {
      out.hull = convex_hull_2d(vertices);
    } catch (const DegenerateInput&) {
      out.hull = std::nullopt;  // all vertices collinear
    }
  }
  return out;
}

struct VolumeSlice {
  double z = 0.0;
  std::optional<Polygon2> region;
  SipStatus status = SipStatus::not_converged;  // summary cause when empty
  int converged_directions = 0;
};

/// Global regions stacked over robot heights: one slice per z level, failures
/// reported per slice (kinematic limit vs vanished region) without aborting.
inline std::vector<VolumeSlice> feasible_volume(const Scenario& sc,
                                                const std::vector<double>& z_levels,
                                                const SipRequest& params) {
  std::vector<VolumeSlice> slices;
  for (double z : z_levels) {
    Scenario sz = sc;
    sz.com.z() = z;
    SipRequest req = params;
    req.scenario = &sz;
    VolumeSlice slice;
    slice.z = z;
    GlobalRegionResult gr;
    bool ik_failed_everywhere = false;
    try {
      gr = global_region(req);
    } catch (const OutOfWorkspace&) {
      ik_failed_everywhere = true;
    } catch (const JointLimit&) {
      ik_failed_everywhere = true;
    }
    if (!ik_failed_everywhere) {
      slice.converged_directions = gr.converged_count;
      if (gr.hull) {
        slice.region = gr.hull;
        slice.status = SipStatus::converged;
      } else {
        int kin = 0, vanished = 0;
        for (const SipVertexResult& r : gr.per_direction) {
          kin += r.status == SipStatus::kinematic_limit;
          vanished += r.status == SipStatus::region_vanished;
        }
        slice.status = kin >= vanished ? SipStatus::kinematic_limit : SipStatus::region_vanished;
      }
    } else {
      slice.status = SipStatus::kinematic_limit;
    }
    slices.push_back(std::move(slice));
  }
  return slices;
}

/// Per-slice CSV files plus an index mapping z to filename.
inline void write_volume(const std::vector<VolumeSlice>& slices, const std::string& directory,
                         const std::string& prefix) {
  std::ofstream index(directory + "/" + prefix + "_index.txt");
  if (!index) throw Error("write_volume: cannot open index file");
  char buf[160];
  for (std::size_t i = 0; i < slices.size(); ++i) {
    const VolumeSlice& s = slices[i];
    if (s.region) {
      const std::string name = prefix + "_slice" + std::to_string(i) + ".csv";
      std::ofstream out(directory + "/" + name);
      for (const Vec2& v : s.region->vertices()) {
        std::snprintf(buf, sizeof(buf), "%.9g,%.9g\n", v.x(), v.y());
        out << buf;
      }
      std::snprintf(buf, sizeof(buf), "%.9g %s\n", s.z, name.c_str());
      index << buf;
    } else {
      std::snprintf(buf, sizeof(buf), "%.9g empty %s\n", s.z, to_string(s.status));
      index << buf;
    }
  }
}

}  // namespace feasreg
