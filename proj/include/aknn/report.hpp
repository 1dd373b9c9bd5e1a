#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "aknn/error.hpp"
#include "aknn/harness.hpp"

namespace aknn {

inline constexpr std::string_view kCsvHeader = "N,mean_excess,stderr,trials,method,world";

// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string format_fixed(double v, int decimals) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, decimals);
  return std::string(buf, res.ptr);
}

namespace detail {

inline void check_csv_field(const std::string& s) {
  if (s.find_first_of(",\n\r\"") != std::string::npos)
    throw Error("CSV field '" + s + "' contains a separator");
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) throw Error("write failed for '" + path + "'");
}

}  // namespace detail

inline std::string to_csv(std::span<const SweepResult> results) {
  std::string s(kCsvHeader);
  s += '\n';
  for (const auto& r : results) {
    detail::check_csv_field(r.method);
    detail::check_csv_field(r.world);
    for (const auto& p : r.points) {
      s += std::to_string(p.N);
      s += ',';
      s += format_double(p.risk.mean);
      s += ',';
      s += format_double(p.risk.std_error);
      s += ',';
      s += std::to_string(p.risk.n_trials);
      s += ',';
      s += r.method;
      s += ',';
      s += r.world;
      s += '\n';
    }
  }
  return s;
}

inline void emit_csv(std::span<const SweepResult> results, const std::string& path) {
  detail::write_file(path, to_csv(results));
}

inline void emit_csv(const SweepResult& result, const std::string& path) {
  emit_csv(std::span<const SweepResult>(&result, 1), path);
}

// Parses CSV text written by to_csv back into one SweepResult per
// (method, world) pair, in order of first appearance, with fits attached.
inline std::vector<SweepResult> parse_csv(std::string_view text, const std::string& origin = "<csv>") {
  std::vector<SweepResult> out;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kCsvHeader) throw Error(origin + ": unexpected CSV header");
      header_seen = true;
      continue;
    }
    std::vector<std::string_view> f;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      f.push_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    const auto bad = [&] { return Error(origin + ":" + std::to_string(line_no) + ": malformed CSV row"); };
    if (f.size() != 6) throw bad();
    SweepPoint p;
    const auto parse_uint = [&](std::string_view s, std::size_t& v) {
      const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
      if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw bad();
    };
    const auto parse_real = [&](std::string_view s, double& v) {
      const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
      if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw bad();
    };
    parse_uint(f[0], p.N);
    parse_real(f[1], p.risk.mean);
    parse_real(f[2], p.risk.std_error);
    parse_uint(f[3], p.risk.n_trials);
    const std::string method(f[4]), world(f[5]);
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const SweepResult& r) { return r.method == method && r.world == world; });
    if (it == out.end()) {
      out.push_back({});
      it = std::prev(out.end());
      it->method = method;
      it->world = world;
    }
    it->points.push_back(p);
  }
  if (!header_seen) throw Error(origin + ": empty CSV");
  for (auto& r : out) attach_fit(r);
  return out;
}

inline std::vector<SweepResult> read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), path);
}

// ---------------------------------------------------------------------------
// SVG
// ---------------------------------------------------------------------------

namespace detail {

struct SeriesStyle {
  const char* color;
  const char* dash;  // empty: solid
};

inline SeriesStyle style_for(const std::string& method, std::size_t i) {
  if (method == "adaptive") return {"#1f77b4", ""};
  if (method == "standard") return {"#ff7f0e", "6,4"};
  static constexpr const char* extra[] = {"#2ca02c", "#d62728", "#9467bd", "#8c564b"};
  return {extra[i % 4], "2,3"};
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace detail

// Log-log plot of mean excess risk against N: one circle per grid point and
// one polyline per series (the least-squares line, or the raw points when no
// fit exists). Points with nonpositive mean are dropped.
inline std::string to_svg(std::span<const SweepResult> results) {
  constexpr double W = 640, H = 480, ml = 70, mr = 170, mt = 20, mb = 55;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& r : results)
    for (const auto& p : r.points) {
      if (!(p.risk.mean > 0.0) || p.N == 0) continue;
      const double lx = std::log10(static_cast<double>(p.N)), ly = std::log10(p.risk.mean);
      x0 = std::min(x0, lx);
      x1 = std::max(x1, lx);
      y0 = std::min(y0, ly);
      y1 = std::max(y1, ly);
    }
  if (!std::isfinite(x0)) x0 = 2, x1 = 4, y0 = -3, y1 = -1;
  if (x1 - x0 < 1e-9) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-9) y0 -= 0.5, y1 += 0.5;
  const double padx = 0.05 * (x1 - x0), pady = 0.08 * (y1 - y0);
  x0 -= padx, x1 += padx, y0 -= pady, y1 += pady;

  const auto sx = [&](double lx) { return ml + (lx - x0) / (x1 - x0) * (W - ml - mr); };
  const auto sy = [&](double ly) { return H - mb - (ly - y0) / (y1 - y0) * (H - mt - mb); };
  const auto num = [](double v) { return format_fixed(v, 2); };

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"640\" height=\"480\" "
       "viewBox=\"0 0 640 480\">\n";
  s += "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
  s += "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  // frame and ticks
  s += "<rect x=\"" + num(ml) + "\" y=\"" + num(mt) + "\" width=\"" + num(W - ml - mr) +
       "\" height=\"" + num(H - mt - mb) + "\" fill=\"none\" stroke=\"black\"/>\n";
  const auto tick_step = [](double span) {
    const double raw = span / 5.0;
    for (double step : {0.1, 0.2, 0.25, 0.5, 1.0, 2.0})
      if (raw <= step) return step;
    return 5.0;
  };
  const double xs = tick_step(x1 - x0), ys = tick_step(y1 - y0);
  for (double t = std::ceil(x0 / xs) * xs; t <= x1 + 1e-12; t += xs) {
    s += "<line x1=\"" + num(sx(t)) + "\" y1=\"" + num(H - mb) + "\" x2=\"" + num(sx(t)) + "\" y2=\"" +
         num(H - mb + 5) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(sx(t)) + "\" y=\"" + num(H - mb + 18) + "\" text-anchor=\"middle\">" +
         format_fixed(t, 2) + "</text>\n";
  }
  for (double t = std::ceil(y0 / ys) * ys; t <= y1 + 1e-12; t += ys) {
    s += "<line x1=\"" + num(ml - 5) + "\" y1=\"" + num(sy(t)) + "\" x2=\"" + num(ml) + "\" y2=\"" +
         num(sy(t)) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(ml - 8) + "\" y=\"" + num(sy(t) + 4) + "\" text-anchor=\"end\">" +
         format_fixed(t, 2) + "</text>\n";
  }
  s += "<text x=\"" + num(ml + (W - ml - mr) / 2) + "\" y=\"" + num(H - 12) +
       "\" text-anchor=\"middle\">log10(N)</text>\n";
  s += "<text x=\"16\" y=\"" + num(mt + (H - mt - mb) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
       num(mt + (H - mt - mb) / 2) + ")\">log10(excess risk)</text>\n";

  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    const auto st = detail::style_for(r.method, i);
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : r.points)
      if (p.risk.mean > 0.0 && p.N > 0)
        pts.emplace_back(std::log10(static_cast<double>(p.N)), std::log10(p.risk.mean));
    std::string line;
    if (r.fit && !pts.empty()) {
      for (double lx : {pts.front().first, pts.back().first})
        line += num(sx(lx)) + "," + num(sy(r.fit->intercept + r.fit->slope * lx)) + " ";
    } else {
      for (const auto& [lx, ly] : pts) line += num(sx(lx)) + "," + num(sy(ly)) + " ";
    }
    if (!line.empty()) line.pop_back();
    s += "<polyline class=\"series\" fill=\"none\" stroke=\"" + std::string(st.color) +
         "\" stroke-width=\"2\"";
    if (*st.dash) s += " stroke-dasharray=\"" + std::string(st.dash) + "\"";
    s += " points=\"" + line + "\"/>\n";
    for (const auto& [lx, ly] : pts)
      s += "<circle cx=\"" + num(sx(lx)) + "\" cy=\"" + num(sy(ly)) + "\" r=\"3.5\" fill=\"" +
           std::string(st.color) + "\"/>\n";

    const double ly = mt + 18 + 20.0 * static_cast<double>(i);
    const double lx = W - mr + 12;
    s += "<line x1=\"" + num(lx) + "\" y1=\"" + num(ly - 4) + "\" x2=\"" + num(lx + 24) + "\" y2=\"" +
         num(ly - 4) + "\" stroke=\"" + st.color + "\" stroke-width=\"2\"";
    if (*st.dash) s += " stroke-dasharray=\"" + std::string(st.dash) + "\"";
    s += "/>\n";
    std::string label = r.method;
    if (results.size() > 2 || (results.size() == 2 && results[0].world != results[1].world))
      label += " " + r.world;
    if (r.fit) label += " (" + format_fixed(r.fit->rate(), 2) + ")";
    s += "<text class=\"legend\" x=\"" + num(lx + 30) + "\" y=\"" + num(ly) + "\">" +
         detail::xml_escape(label) + "</text>\n";
  }
  s += "</g>\n</svg>\n";
  return s;
}

inline void emit_svg(std::span<const SweepResult> results, const std::string& path) {
  detail::write_file(path, to_svg(results));
}

}  // namespace aknn
