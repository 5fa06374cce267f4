#include "zpf/report.hpp"

#include "zpf/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace zpf {

std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path, std::vector<std::string> header)
    : path_(path), columns_(header.size()), out_(path) {
  if (!out_) throw Error("cannot write '" + path + "'");
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<Cell>& cells) {
  if (cells.size() != columns_) throw Error("CsvWriter: row width does not match header");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    if (const auto* d = std::get_if<double>(&cells[i])) {
      out_ << csv_number(*d);
    } else if (const auto* n = std::get_if<long long>(&cells[i])) {
      out_ << *n;
    } else {
      const auto& s = std::get<std::string>(cells[i]);
      if (s.find_first_of(",\"\n") == std::string::npos) {
        out_ << s;
      } else {
        out_ << '"';
        for (char c : s) out_ << (c == '"' ? "\"\"" : std::string(1, c));
        out_ << '"';
      }
    }
  }
  out_ << '\n';
  out_.flush();
}

namespace {

std::string esc(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace

void write_svg_chart(const std::string& path, const ChartSpec& spec,
                     const std::vector<Series>& series) {
  const double W = 640, H = 420, ml = 80, mr = 170, mt = 40, mb = 55;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  auto ty = [&](double y) { return spec.log_y ? std::log10(y) : y; };
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (spec.log_y && !(s.y[i] > 0)) continue;
      if (!std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double x) { return ml + (x - x0) / (x1 - x0) * (W - ml - mr); };
  auto py = [&](double y) { return H - mb - (ty(y) - y0) / (y1 - y0) * (H - mt - mb); };

  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << esc(spec.title) << "</text>\n";
  out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\""
      << H - mt - mb << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4.0;
    const double yv = y0 + (y1 - y0) * i / 4.0;
    out << "<text x=\"" << px(xv) << "\" y=\"" << H - mb + 16 << "\" text-anchor=\"middle\">"
        << tick(xv) << "</text>\n";
    const double ypix = H - mb - (yv - y0) / (y1 - y0) * (H - mt - mb);
    out << "<text x=\"" << ml - 6 << "\" y=\"" << ypix + 4 << "\" text-anchor=\"end\">"
        << tick(spec.log_y ? std::pow(10.0, yv) : yv) << "</text>\n";
  }
  out << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">"
      << esc(spec.xlabel) << "</text>\n";
  out << "<text x=\"16\" y=\"" << (mt + H - mb) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << (mt + H - mb) / 2 << ")\">" << esc(spec.ylabel) << "</text>\n";

  int idx = 0;
  for (const auto& s : series) {
    std::ostringstream pts;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i]) || (spec.log_y && !(s.y[i] > 0))) continue;
      pts << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    }
    out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\""
        << (s.dashed ? 1.5 : 2.5) << "\"" << (s.dashed ? " stroke-dasharray=\"6,4\"" : "")
        << " points=\"" << pts.str() << "\"/>\n";
    const double ly = mt + 14 + 18 * idx++;
    out << "<line x1=\"" << W - mr + 10 << "\" y1=\"" << ly << "\" x2=\"" << W - mr + 40
        << "\" y2=\"" << ly << "\" stroke=\"" << s.color << "\" stroke-width=\""
        << (s.dashed ? 1.5 : 2.5) << "\"" << (s.dashed ? " stroke-dasharray=\"6,4\"" : "")
        << "/>\n";
    out << "<text x=\"" << W - mr + 46 << "\" y=\"" << ly + 4 << "\">" << esc(s.name)
        << "</text>\n";
  }
  out << "</svg>\n";
}

void write_manifest(const std::string& path, const Manifest& m) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << "command = " << m.command << '\n';
  out << "version = " << version_string() << '\n';
  out << "seed = " << m.seed << '\n';
  out << "threads = " << m.threads << '\n';
  out << "cache = " << (m.cache ? "on" : "off") << '\n';
  for (const auto& o : m.outputs) out << "output = " << o << '\n';
  for (const auto& n : m.notes) out << "note = " << n << '\n';
  out << "\n# effective configuration\n" << m.config;
}

std::string version_string() {
  std::ostringstream os;
  os << "zpf 0.1.0; Eigen " << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.'
     << EIGEN_MINOR_VERSION << "; "
#if defined(__clang__)
     << "clang " << __clang_major__ << '.' << __clang_minor__;
#elif defined(__GNUC__)
     << "gcc " << __GNUC__ << '.' << __GNUC_MINOR__;
#else
     << "unknown compiler";
#endif
  return os.str();
}

}  // namespace zpf
