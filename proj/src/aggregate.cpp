#include "instobj/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "instobj/errors.hpp"

namespace instobj {

namespace {

double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

MetricSummary summarize(std::vector<double> v) {
  std::erase_if(v, [](double x) { return std::isnan(x); });
  MetricSummary s;
  s.n = v.size();
  if (v.empty()) return s;
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  std::sort(v.begin(), v.end());
  s.p10 = quantile(v, 0.1);
  s.p50 = quantile(v, 0.5);
  s.p90 = quantile(v, 0.9);
  return s;
}

std::string two(int v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d", v);
  return buf;
}

std::string key_of(const SampleRecord& r, GroupKey key) {
  switch (key) {
    case GroupKey::All: return "all";
    case GroupKey::Face: return "face" + std::to_string(r.face);
    case GroupKey::Location:
      return r.contact_count == 0 ? "none" : "x" + two(r.location.x) + "_y" + two(r.location.y);
    case GroupKey::Probe: return "p" + std::to_string(r.contact_count);
    case GroupKey::Factor: return "k" + two(r.factor);
    case GroupKey::ForceBin: return "bin" + two(r.force_bin + 1);
  }
  return {};
}

GroupSummary summarize_group(std::string key, std::span<const SampleRecord* const> rs) {
  GroupSummary g;
  g.key = std::move(key);
  g.count = rs.size();
  std::vector<double> a, ex, ey, ee, fp, fn;
  std::size_t nc_ok = 0;
  for (const auto* r : rs) {
    if (r->contact_count == 0) {
      ++g.non_contact;
      if (r->predicted_non_contact) ++nc_ok;
      continue;
    }
    ++g.contact;
    a.push_back(r->a_sim);
    ex.push_back(r->e_x);
    ey.push_back(r->e_y);
    ee.push_back(r->e_eucl);
    fp.push_back(r->ef_pct);
    fn.push_back(r->ef_n);
  }
  g.a_sim = summarize(std::move(a));
  g.e_x = summarize(std::move(ex));
  g.e_y = summarize(std::move(ey));
  g.e_eucl = summarize(std::move(ee));
  g.ef_pct = summarize(std::move(fp));
  g.ef_n = summarize(std::move(fn));
  if (g.non_contact > 0) {
    g.a_non = static_cast<double>(nc_ok) / static_cast<double>(g.non_contact);
  }
  return g;
}

}  // namespace

GroupKey parse_group_key(std::string_view name) {
  if (name == "all") return GroupKey::All;
  if (name == "face") return GroupKey::Face;
  if (name == "location") return GroupKey::Location;
  if (name == "probe") return GroupKey::Probe;
  if (name == "factor") return GroupKey::Factor;
  if (name == "force_bin") return GroupKey::ForceBin;
  throw UsageError("unknown group key '" + std::string(name) + "'");
}

std::string_view to_string(GroupKey key) {
  switch (key) {
    case GroupKey::All: return "all";
    case GroupKey::Face: return "face";
    case GroupKey::Location: return "location";
    case GroupKey::Probe: return "probe";
    case GroupKey::Factor: return "factor";
    case GroupKey::ForceBin: return "force_bin";
  }
  return {};
}

std::vector<GroupSummary> aggregate(std::span<const SampleRecord> records, GroupKey key) {
  if (records.empty()) throw UsageError("nothing to aggregate");
  std::map<std::string, std::vector<const SampleRecord*>> groups;
  for (const auto& r : records) groups[key_of(r, key)].push_back(&r);
  std::vector<GroupSummary> out;
  for (auto& [k, rs] : groups) out.push_back(summarize_group(k, rs));
  return out;
}

MetricsReport make_report(std::vector<SampleRecord> samples, int grid) {
  MetricsReport rep;
  rep.grid = grid;
  rep.samples = std::move(samples);
  if (!rep.samples.empty()) rep.overall = aggregate(rep.samples, GroupKey::All).front();

  const auto cells = static_cast<std::size_t>(grid * grid);
  std::vector<double> sa(cells, 0.0), se(cells, 0.0), sf(cells, 0.0);
  std::vector<int> n(cells, 0);
  for (const auto& r : rep.samples) {
    if (r.contact_count != 1 || !is_valid(r.location, grid)) continue;
    const auto i = static_cast<std::size_t>((r.location.y - 1) * grid + (r.location.x - 1));
    sa[i] += r.a_sim;
    se[i] += r.e_eucl;
    sf[i] += r.ef_pct;
    ++n[i];
  }
  rep.grid_a_sim.assign(cells, kNaN);
  rep.grid_e_eucl.assign(cells, kNaN);
  rep.grid_ef_pct.assign(cells, kNaN);
  for (std::size_t i = 0; i < cells; ++i) {
    if (n[i] == 0) continue;
    rep.grid_a_sim[i] = sa[i] / n[i];
    rep.grid_e_eucl[i] = se[i] / n[i];
    rep.grid_ef_pct[i] = sf[i] / n[i];
  }
  return rep;
}

std::string format_samples_csv(std::span<const SampleRecord> records) {
  std::string out =
      "face,case_id,sample,contacts,x,y,factor,force_bin,a_sim,e_x,e_y,e_eucl,ef_pct,ef_n,"
      "pred_non_contact\n";
  auto num = [](double v) {
    if (std::isnan(v)) return std::string();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return std::string(buf);
  };
  for (const auto& r : records) {
    out += std::to_string(r.face) + ',' + r.case_id + ',' + std::to_string(r.sample) + ',' +
           std::to_string(r.contact_count) + ',' + std::to_string(r.location.x) + ',' +
           std::to_string(r.location.y) + ',' + std::to_string(r.factor) + ',' +
           std::to_string(r.force_bin) + ',' + num(r.a_sim) + ',' + num(r.e_x) + ',' +
           num(r.e_y) + ',' + num(r.e_eucl) + ',' + num(r.ef_pct) + ',' + num(r.ef_n) + ',' +
           (r.predicted_non_contact ? "1" : "0") + '\n';
  }
  return out;
}

}  // namespace instobj
